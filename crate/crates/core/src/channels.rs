//! Amplitude- and phase-damping channels, their interferometric dilations,
//! the waveplate calibrations, and the Alice-side mixture recipe.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{embed_operator, ComplexMatrix, Pauli, C64, ONE, ZERO};
use crate::state::{partial_trace_matrix, phi_plus, state_fidelity, DensityMatrix};

pub const COMPLETENESS_TOL: f64 = 1e-10;

fn check_probability(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} = {p} outside [0, 1]")))
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A trace-preserving map `rho -> sum_j K_j rho K_j^dagger`.
#[derive(Clone)]
pub struct KrausChannel {
    dim: usize,
    kraus_ops: Vec<ComplexMatrix>,
    label: String,
}

impl KrausChannel {
    /// Checks `sum_j K_j^dagger K_j = I` within [`COMPLETENESS_TOL`].
    pub fn new(kraus_ops: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let dim = kraus_ops
            .first()
            .ok_or_else(|| Error::InvalidArgument("channel needs at least one Kraus operator".into()))?
            .rows();
        if kraus_ops.iter().any(|k| k.rows() != dim || k.cols() != dim) {
            return Err(Error::InvalidArgument("Kraus operators must share one square shape".into()));
        }
        let channel = Self { dim, kraus_ops, label: label.into() };
        let defect = channel.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::InvalidArgument(format!(
                "Kraus operators are not trace preserving (defect {defect:.3e})"
            )));
        }
        Ok(channel)
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, kraus_ops: vec![ComplexMatrix::identity(dim)], label: "identity".into() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Max entry of `|sum K^dagger K - I|`.
    pub fn completeness_defect(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus_ops {
            acc = &acc + &(&k.dagger() * k);
        }
        acc.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel> {
        if self.dim != next.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: next.dim });
        }
        let ops = next
            .kraus_ops
            .iter()
            .flat_map(|b| self.kraus_ops.iter().map(move |a| b * a))
            .collect();
        Ok(Self { dim: self.dim, kraus_ops: ops, label: format!("{} then {}", self.label, next.label) })
    }
}

impl fmt::Debug for KrausChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KrausChannel")
            .field("label", &self.label)
            .field("kraus_ops", &self.kraus_ops)
            .finish()
    }
}

/// Amplitude damping: `K1 = diag(1, sqrt(1-p))`, `K2 = sqrt(p) |0><1|`.
pub fn adc(p: f64) -> Result<KrausChannel> {
    check_probability(p, "damping")?;
    let k1 = ComplexMatrix::diagonal(&[ONE, re((1.0 - p).sqrt())]);
    let mut k2 = ComplexMatrix::zeros(2, 2);
    k2[(0, 1)] = re(p.sqrt());
    Ok(KrausChannel { dim: 2, kraus_ops: vec![k1, k2], label: format!("adc({p})") })
}

/// Phase damping: `K1 = diag(1, sqrt(1-p))`, `K2 = sqrt(p) |1><1|`.
pub fn pdc(p: f64) -> Result<KrausChannel> {
    check_probability(p, "damping")?;
    let k1 = ComplexMatrix::diagonal(&[ONE, re((1.0 - p).sqrt())]);
    let k2 = ComplexMatrix::diagonal(&[ZERO, re(p.sqrt())]);
    Ok(KrausChannel { dim: 2, kraus_ops: vec![k1, k2], label: format!("pdc({p})") })
}

pub fn apply(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if ch.dim != rho.dim() {
        return Err(Error::DimensionMismatch { expected: ch.dim, found: rho.dim() });
    }
    Ok(DensityMatrix::from_map_output(apply_ops(&ch.kraus_ops, rho.matrix())))
}

pub(crate) fn apply_ops(ops: &[ComplexMatrix], m: &ComplexMatrix) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(m.rows(), m.cols());
    for k in ops {
        acc = &acc + &k.conjugate_by(m);
    }
    acc
}

/// Applies a single-qubit channel to qubit `target`, identity elsewhere.
pub fn apply_local(ch: &KrausChannel, rho: &DensityMatrix, target: usize) -> Result<DensityMatrix> {
    if ch.dim != 2 {
        return Err(Error::InvalidArgument("apply_local expects a single-qubit channel".into()));
    }
    let n = rho.num_qubits();
    if target >= n {
        return Err(Error::InvalidArgument(format!("qubit {target} out of range for {n} qubits")));
    }
    let lifted = ch
        .kraus_ops
        .iter()
        .map(|k| embed_operator(k, &[target], n))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityMatrix::from_map_output(apply_ops(&lifted, rho.matrix())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DampingFamily {
    Adc,
    Pdc,
}

impl DampingFamily {
    pub fn channel(self, p: f64) -> Result<KrausChannel> {
        match self {
            DampingFamily::Adc => adc(p),
            DampingFamily::Pdc => pdc(p),
        }
    }
}

/// Which party's qubit a channel or calibration refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alice,
    Bob,
}

impl Side {
    /// Qubit index inside the two-qubit resource.
    pub fn qubit(self) -> usize {
        match self {
            Side::Alice => 0,
            Side::Bob => 1,
        }
    }
}

// Polarization-path interferometer
//
// System qubit: polarization (H = |0>, V = |1>). Environment qubit: output
// mode (a = |0>, b = |1>), starting in a.

fn sagnac_unitary(p: f64, mode_b_flip: bool) -> ComplexMatrix {
    let (s, c) = (p.sqrt(), (1.0 - p).sqrt());
    // basis |pol, mode>: 0 = Ha, 1 = Hb, 2 = Va, 3 = Vb; columns are images
    let mut u = ComplexMatrix::zeros(4, 4);
    u[(0, 0)] = ONE; // Ha -> Ha
    u[(2, 2)] = re(c); // Va -> sqrt(1-p) Va + sqrt(p) Hb
    u[(1, 2)] = re(s);
    u[(2, 1)] = re(-s); // completion on the unused b input port
    u[(1, 1)] = re(c);
    u[(3, 3)] = ONE;
    if mode_b_flip {
        // Without H2 the mode-b photons are read out in the orthogonal polarization.
        let mut flip = ComplexMatrix::identity(4);
        flip[(1, 1)] = ZERO;
        flip[(3, 3)] = ZERO;
        flip[(1, 3)] = ONE;
        flip[(3, 1)] = ONE;
        return &flip * &u;
    }
    u
}

/// Runs the interferometer on qubit `target` of `rho` and traces out the path.
pub fn dilation_local(family: DampingFamily, p: f64, rho: &DensityMatrix, target: usize) -> Result<DensityMatrix> {
    check_probability(p, "damping")?;
    let n = rho.num_qubits();
    if target >= n {
        return Err(Error::InvalidArgument(format!("qubit {target} out of range for {n} qubits")));
    }
    if n + 1 > crate::state::MAX_QUBITS {
        return Err(Error::InvalidArgument("no room for the path qubit".into()));
    }
    let mut mode_a = ComplexMatrix::zeros(2, 2);
    mode_a[(0, 0)] = ONE;
    let joint = crate::linalg::tensor_product(rho.matrix(), &mode_a);
    let u = sagnac_unitary(p, family == DampingFamily::Pdc);
    let lifted = embed_operator(&u, &[target, n], n + 1)?;
    let evolved = lifted.conjugate_by(&joint);
    let keep: Vec<usize> = (0..n).collect();
    Ok(DensityMatrix::from_map_output(partial_trace_matrix(&evolved, n + 1, &keep)?))
}

/// Amplitude damping realised through the interferometer dilation.
pub fn dilation_adc(p: f64, rho: &DensityMatrix) -> Result<DensityMatrix> {
    single_qubit(rho)?;
    dilation_local(DampingFamily::Adc, p, rho, 0)
}

/// Phase damping: the same interferometer with H2 removed from mode b.
pub fn dilation_pdc(p: f64, rho: &DensityMatrix) -> Result<DensityMatrix> {
    single_qubit(rho)?;
    dilation_local(DampingFamily::Pdc, p, rho, 0)
}

fn single_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.num_qubits() == 1 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: 2, found: rho.dim() })
    }
}

/// Bob's damping from the H1 waveplate angle: `sin^2(2 alpha)`.
pub fn pb_from_alpha(alpha_deg: f64) -> f64 {
    (2.0 * alpha_deg.to_radians()).sin().powi(2)
}

pub const THETA_MIN_DEG: f64 = 22.5;
pub const THETA_MAX_DEG: f64 = 45.0;

/// Alice's damping from the pump waveplate angle: `2 - 1/sin^2(2 theta)`,
/// defined for 22.5 deg <= theta <= 45 deg.
pub fn pa_from_theta(theta_deg: f64) -> Result<f64> {
    const SLACK: f64 = 1e-9;
    if !(THETA_MIN_DEG - SLACK..=THETA_MAX_DEG + SLACK).contains(&theta_deg) {
        return Err(Error::InvalidArgument(format!("theta = {theta_deg} deg outside [22.5, 45]")));
    }
    let s = (2.0 * theta_deg.to_radians()).sin().powi(2);
    Ok((2.0 - 1.0 / s).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub control_angle_deg: f64,
    pub damping: f64,
    pub side: Side,
}

impl CalibrationPoint {
    pub fn bob(alpha_deg: f64) -> Self {
        Self { control_angle_deg: alpha_deg, damping: pb_from_alpha(alpha_deg), side: Side::Bob }
    }

    pub fn alice(theta_deg: f64) -> Result<Self> {
        Ok(Self { control_angle_deg: theta_deg, damping: pa_from_theta(theta_deg)?, side: Side::Alice })
    }
}

/// Where the two pure states of the Alice mixture come from.
#[derive(Debug, Clone)]
pub enum AliceSource {
    /// Perfect `|Phi+>` source.
    Ideal,
    /// An imperfect source state standing in for `|Phi+>`; the pump rotation
    /// acts on it as a local filter on Alice's qubit.
    FromBase(DensityMatrix),
}

/// `(1 - p_a/2) rho1 + (p_a/2) rho2` with `rho1` the pump-rotated source
/// (`sin(phi) = 1/sqrt(2 - p_a)`) and `rho2 = |HV><HV|`.
pub fn alice_mixture(p_a: f64, source: &AliceSource) -> Result<DensityMatrix> {
    check_probability(p_a, "p_a")?;
    let sin_phi = 1.0 / (2.0 - p_a).sqrt();
    let cos_phi = (1.0 - sin_phi * sin_phi).max(0.0).sqrt();
    let (rho1, rho2) = match source {
        AliceSource::Ideal => {
            let psi = [re(sin_phi), ZERO, ZERO, re(cos_phi)];
            let rho1 = ComplexMatrix::outer(&psi, &psi);
            let mut rho2 = ComplexMatrix::zeros(4, 4);
            rho2[(1, 1)] = ONE;
            (rho1, rho2)
        }
        AliceSource::FromBase(base) => {
            if base.num_qubits() != 2 {
                return Err(Error::DimensionMismatch { expected: 4, found: base.dim() });
            }
            let sq2 = std::f64::consts::SQRT_2;
            let rho1 = local_filter(base, sq2 * sin_phi, sq2 * cos_phi)?;
            let hh = local_filter(base, 1.0, 0.0)?;
            let flip_b = embed_operator(&Pauli::X.matrix(), &[1], 2)?;
            (rho1, flip_b.conjugate_by(&hh))
        }
    };
    let m = &rho1.scale_real(1.0 - p_a / 2.0) + &rho2.scale_real(p_a / 2.0);
    Ok(DensityMatrix::from_map_output(m))
}

/// Normalized `(F (x) I) rho (F (x) I)^dagger` with `F = diag(h, v)` on Alice.
fn local_filter(rho: &DensityMatrix, h: f64, v: f64) -> Result<ComplexMatrix> {
    let f = embed_operator(&ComplexMatrix::diagonal(&[re(h), re(v)]), &[0], 2)?;
    let out = f.conjugate_by(rho.matrix());
    let tr = out.trace().re;
    if tr <= 1e-14 {
        return Err(Error::InvalidArgument("base state has no weight on the filtered branch".into()));
    }
    Ok(out.scale_real(1.0 / tr))
}

const COARSE_POINTS: usize = 51;
const P_TOLERANCE: f64 = 1e-7;

/// Best-fit damping: maximizes `F(measured, family(p) on qubit side of base)`
/// over `p in [0, 1]`.
pub fn estimate_p(measured: &DensityMatrix, family: DampingFamily, side: usize, base: &DensityMatrix) -> Result<f64> {
    if measured.dim() != base.dim() {
        return Err(Error::DimensionMismatch { expected: base.dim(), found: measured.dim() });
    }
    if side >= base.num_qubits() {
        return Err(Error::InvalidArgument(format!("qubit {side} out of range")));
    }
    let score = |p: f64| -> Result<f64> {
        let model = apply_local(&family.channel(p)?, base, side)?;
        state_fidelity(measured, &model)
    };
    // coarse scan guards against a non-unimodal curve
    let step = 1.0 / (COARSE_POINTS - 1) as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..COARSE_POINTS {
        let p = i as f64 * step;
        let s = score(p)?;
        if s > best.1 {
            best = (p, s);
        }
    }
    let (mut lo, mut hi) = ((best.0 - step).max(0.0), (best.0 + step).min(1.0));
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (score(x1)?, score(x2)?);
    while hi - lo > P_TOLERANCE {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = score(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = score(x2)?;
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut candidates = vec![(mid, score(mid)?), best];
    for edge in [lo, hi] {
        if edge == 0.0 || edge == 1.0 {
            candidates.push((edge, score(edge)?));
        }
    }
    Ok(candidates.into_iter().fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a }).0)
}

/// Channel descriptor used in config files.
///
/// Exactly one of `p`, `alpha_deg` (Bob's H1 angle) or `theta_deg` (Alice's
/// pump angle, ADC only) must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub family: DampingFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
}

impl ChannelSpec {
    pub fn damping(&self) -> Result<f64> {
        let p = match (self.p, self.alpha_deg, self.theta_deg) {
            (Some(p), None, None) => p,
            (None, Some(alpha), None) => pb_from_alpha(alpha),
            (None, None, Some(theta)) if self.family == DampingFamily::Adc => {
                pa_from_theta(theta).map_err(|e| Error::Config(e.to_string()))?
            }
            (None, None, Some(_)) => {
                return Err(Error::Config("theta_deg parametrizes the amplitude damping channel only".into()))
            }
            _ => return Err(Error::Config("channel needs exactly one of p, alpha_deg, theta_deg".into())),
        };
        check_probability(p, "p").map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }

    pub fn channel(&self) -> Result<KrausChannel> {
        self.family.channel(self.damping()?)
    }
}

/// `|Phi+>` with ADC/PDC applied locally on each side.
pub fn damped_bell(alice: (DampingFamily, f64), bob: (DampingFamily, f64)) -> Result<DensityMatrix> {
    damp_pair(&phi_plus(), alice, bob)
}

/// Applies `alice` on qubit 0, then `bob` on qubit 1.
pub fn damp_pair(base: &DensityMatrix, alice: (DampingFamily, f64), bob: (DampingFamily, f64)) -> Result<DensityMatrix> {
    let after_a = apply_local(&alice.0.channel(alice.1)?, base, 0)?;
    apply_local(&bob.0.channel(bob.1)?, &after_a, 1)
}
