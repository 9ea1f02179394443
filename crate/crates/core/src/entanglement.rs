//! Fully entangled fraction, its closed forms under local damping, and the
//! fidelity relation for teleportation.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{leading_real_symmetric, C64, I, ZERO};
use crate::state::{DensityMatrix, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FefMethod {
    ClosedForm,
    BruteForce,
}

#[derive(Debug, Clone)]
pub struct FefResult {
    pub f: f64,
    pub maximizer: PureState,
    pub method: FefMethod,
}

/// Damping strengths on Alice's and Bob's qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingPair {
    pub p_a: f64,
    pub p_b: f64,
}

impl DampingPair {
    pub fn new(p_a: f64, p_b: f64) -> Result<Self> {
        for (name, p) in [("p_a", p_a), ("p_b", p_b)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(Self { p_a, p_b })
    }

    fn checked(self) -> Result<Self> {
        Self::new(self.p_a, self.p_b)
    }
}

/// `Phi+, i Phi-, i Psi+, Psi-` as columns.
fn magic_basis() -> [[C64; 4]; 4] {
    let s = FRAC_1_SQRT_2;
    let r = C64::new(s, 0.0);
    let j = I * s;
    [[r, ZERO, ZERO, r], [j, ZERO, ZERO, -j], [ZERO, j, j, ZERO], [ZERO, r, -r, ZERO]]
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.num_qubits() == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("expected a two-qubit state, got {} qubits", rho.num_qubits())))
    }
}

/// Largest eigenvalue of the real part of `rho` written in the magic basis.
pub fn fef(rho: &DensityMatrix) -> Result<FefResult> {
    require_two_qubits(rho)?;
    let basis = magic_basis();
    let m = rho.matrix();
    let mut real = vec![vec![0.0; 4]; 4];
    for (i, ei) in basis.iter().enumerate() {
        let rho_ei: Vec<C64> = (0..4).map(|r| (0..4).map(|c| m[(r, c)] * ei[c]).sum()).collect();
        for (j, ej) in basis.iter().enumerate() {
            let mij: C64 = (0..4).map(|r| ej[r].conj() * rho_ei[r]).sum();
            real[j][i] = mij.re;
        }
    }
    let (f, coeffs) = leading_real_symmetric(&real);
    let amplitudes: Vec<C64> = (0..4).map(|r| (0..4).map(|k| basis[k][r] * coeffs[k]).sum()).collect();
    let maximizer = PureState::normalized(amplitudes)?;
    Ok(FefResult { f, maximizer, method: FefMethod::ClosedForm })
}

pub const BRUTEFORCE_STARTS: usize = 32;
pub const BRUTEFORCE_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 20_000;
const BRUTEFORCE_SEED: u64 = 0x5eed_fef0;

/// `(U (x) I)|Phi+>` for `U = Rz(a) Ry(b) Rz(c)`.
fn rotated_bell(angles: [f64; 3]) -> [C64; 4] {
    let [a, b, c] = angles;
    let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
    let pa = C64::from_polar(1.0, a / 2.0);
    let pc = C64::from_polar(1.0, c / 2.0);
    let u = [
        [pa.conj() * pc.conj() * cb, -pa.conj() * pc * sb],
        [pa * pc.conj() * sb, pa * pc * cb],
    ];
    let s = FRAC_1_SQRT_2;
    // (U (x) I)|Phi+> = sum_k U|k> (x) |k> / sqrt 2
    let mut out = [ZERO; 4];
    for k in 0..2 {
        for row in 0..2 {
            out[2 * row + k] = u[row][k] * s;
        }
    }
    out
}

fn overlap(rho: &DensityMatrix, psi: &[C64; 4]) -> f64 {
    let m = rho.matrix();
    let mut acc = ZERO;
    for r in 0..4 {
        for c in 0..4 {
            acc += psi[r].conj() * m[(r, c)] * psi[c];
        }
    }
    acc.re
}

/// Maximizes `<psi|rho|psi>` over `psi = (U (x) I)|Phi+>` by coordinate ascent
/// on the three Euler angles of `U`, restarted from `n_starts` seeded points.
///
/// Along one angle the objective is `A + B cos t + C sin t`, so each
/// coordinate step jumps straight to the exact line maximum.
pub fn fef_bruteforce(rho: &DensityMatrix, n_starts: usize, tol: f64) -> Result<FefResult> {
    require_two_qubits(rho)?;
    if n_starts == 0 {
        return Err(Error::InvalidArgument("n_starts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(BRUTEFORCE_SEED);
    let mut best = ([0.0; 3], f64::NEG_INFINITY);
    for _ in 0..n_starts {
        let mut angles = [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI)];
        let mut value = overlap(rho, &rotated_bell(angles));
        for _ in 0..MAX_SWEEPS {
            let before = value;
            for k in 0..3 {
                let eval = |t: f64| {
                    let mut trial = angles;
                    trial[k] = t;
                    overlap(rho, &rotated_bell(trial))
                };
                let (f0, f1, f2) = (eval(0.0), eval(PI / 2.0), eval(PI));
                let a = 0.5 * (f0 + f2);
                let (b, c) = (f0 - a, f1 - a);
                let t = c.atan2(b);
                let candidate = eval(t);
                if candidate >= value {
                    angles[k] = t;
                    value = candidate;
                }
            }
            if value - before <= tol * 1e-3 {
                break;
            }
        }
        if value > best.1 {
            best = (angles, value);
        }
    }
    let maximizer = PureState::normalized(rotated_bell(best.0).to_vec())?;
    Ok(FefResult { f: best.1, maximizer, method: FefMethod::BruteForce })
}

/// `F = (f d + 1)/(d + 1)`.
pub fn teleport_fidelity(f: f64, d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension d = {d} must be at least 2")));
    }
    // round-off from an eigensolver can land a few ulps past 1
    if !(-1e-12..=1.0 + 1e-12).contains(&f) {
        return Err(Error::InvalidArgument(format!("f = {f} outside [0, 1]")));
    }
    let f = f.clamp(0.0, 1.0);
    let d = d as f64;
    Ok((f * d + 1.0) / (d + 1.0))
}

fn check_p(p: f64) -> Result<()> {
    DampingPair::new(p, 0.0).map(|_| ())
}

/// ADC on one qubit of `|Phi+>`.
pub fn f_adc_single(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok((1.0 + (1.0 - p).sqrt()).powi(2) / 4.0)
}

/// ADC on both qubits of `|Phi+>`.
pub fn f_adc_both(pair: DampingPair) -> Result<f64> {
    let DampingPair { p_a, p_b } = pair.checked()?;
    Ok(0.25 * (p_a * p_b + (1.0 + ((1.0 - p_a) * (1.0 - p_b)).sqrt()).powi(2)))
}

/// ADC on Alice's qubit, PDC on Bob's.
pub fn f_adc_pdc(pair: DampingPair) -> Result<f64> {
    let DampingPair { p_a, p_b } = pair.checked()?;
    Ok(0.5 * (1.0 + ((1.0 - p_a) * (1.0 - p_b)).sqrt() - p_a / 2.0))
}

/// PDC on both qubits of `|Phi+>`.
pub fn f_pdc_both(pair: DampingPair) -> Result<f64> {
    let DampingPair { p_a, p_b } = pair.checked()?;
    Ok(0.5 * (1.0 + ((1.0 - p_a) * (1.0 - p_b)).sqrt()))
}

/// `d f_adc_both / d p_b`; singular at `p_b = 1`.
pub fn dfdpb(pair: DampingPair) -> Result<f64> {
    let DampingPair { p_a, p_b } = pair.checked()?;
    if p_b >= 1.0 {
        return Err(Error::Domain("the p_b derivative diverges at p_b = 1".into()));
    }
    let root = ((1.0 - p_a) * (1.0 - p_b)).sqrt();
    Ok(0.25 * (p_a - (1.0 + root) * (1.0 - p_a).sqrt() / (1.0 - p_b).sqrt()))
}

pub const THRESHOLD_TOL: f64 = 1e-10;
const BOUNDARY_TOL: f64 = 1e-12;

/// Where `f_curve` crosses 1/2 on `[0, 1]`, by bisection.
///
/// A curve that only touches 1/2 at an endpoint reports that endpoint.
pub fn classical_threshold(f_curve: impl Fn(f64) -> f64) -> Result<f64> {
    let g = |p: f64| f_curve(p) - 0.5;
    let (mut lo, mut hi) = (0.0, 1.0);
    let (g_lo, g_hi) = (g(lo), g(hi));
    if !g_lo.is_finite() || !g_hi.is_finite() {
        return Err(Error::InvalidArgument("curve is not finite at the interval ends".into()));
    }
    if g_lo.abs() <= BOUNDARY_TOL {
        return Ok(lo);
    }
    if g_hi.abs() <= BOUNDARY_TOL {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NotFound(format!(
            "no crossing of 1/2 on [0, 1] (f(0) = {:.6}, f(1) = {:.6})",
            g_lo + 0.5,
            g_hi + 0.5
        )));
    }
    let lo_sign = g_lo.signum();
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `2 sqrt 2 - 2`: where single-sided amplitude damping reaches f = 1/2.
pub fn single_sided_threshold() -> f64 {
    2.0 * std::f64::consts::SQRT_2 - 2.0
}

/// Both marginals of a two-qubit pure state, as a check of maximal entanglement.
pub fn marginal_defect(psi: &PureState) -> f64 {
    let rho = psi.density();
    let half = DensityMatrix::maximally_mixed(1);
    [0, 1]
        .iter()
        .map(|&q| {
            crate::state::partial_trace(&rho, &[q])
                .map(|r| r.matrix().max_abs_diff(half.matrix()))
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}
