//! Pure and mixed qubit states.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, nuclear_norm, sqrt_psd, ComplexMatrix, C64, ONE, ZERO};

pub const MAX_QUBITS: usize = 3;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-12;

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidState(format!("dimension {dim} is not 2^n")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::InvalidState(format!("{n} qubits exceeds the {MAX_QUBITS}-qubit limit")));
    }
    Ok(n)
}

/// How a candidate matrix is turned into a [`DensityMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    /// Reject anything outside the tolerances.
    Strict,
    /// Project onto the closest (Frobenius) PSD unit-trace matrix.
    Repair,
}

#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::validated(matrix, Validation::Strict)
    }

    pub fn validated(matrix: ComplexMatrix, mode: Validation) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let num_qubits = qubits_for_dim(matrix.rows())?;
        match mode {
            Validation::Strict => {
                let defect = matrix.hermiticity_defect();
                if defect > HERMITIAN_TOL {
                    return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.3e})")));
                }
                let tr = matrix.trace();
                if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
                    return Err(Error::InvalidState(format!("trace {tr} is not 1")));
                }
                let (values, _) = eig_hermitian(&matrix)?;
                if values[0] < -PSD_TOL {
                    return Err(Error::InvalidState(format!(
                        "not positive semidefinite (eigenvalue {:.3e})",
                        values[0]
                    )));
                }
                Ok(Self { num_qubits, matrix: matrix.hermitian_part() })
            }
            Validation::Repair => {
                let h = matrix.hermitian_part();
                let (values, vectors) = eig_hermitian(&h)?;
                let projected = project_to_simplex(&values);
                let n = h.rows();
                let mut out = ComplexMatrix::zeros(n, n);
                for (k, &w) in projected.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let v = vectors.column(k);
                    out = &out + &ComplexMatrix::outer(&v, &v).scale_real(w);
                }
                Ok(Self { num_qubits, matrix: out })
            }
        }
    }

    /// Wraps the output of a trace-preserving map of a valid state.
    pub(crate) fn from_map_output(matrix: ComplexMatrix) -> Self {
        let num_qubits = qubits_for_dim(matrix.rows()).expect("map output keeps a qubit dimension");
        Self { num_qubits, matrix: matrix.hermitian_part() }
    }

    /// Normalizes a nonzero PSD operator, e.g. a conditional state.
    pub(crate) fn from_unnormalized(matrix: &ComplexMatrix) -> Option<Self> {
        let tr = matrix.trace().re;
        (tr > 0.0).then(|| Self::from_map_output(matrix.scale_real(1.0 / tr)))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let matrix = ComplexMatrix::outer(&psi.amplitudes, &psi.amplitudes);
        Self { num_qubits: psi.num_qubits, matrix }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        assert!((1..=MAX_QUBITS).contains(&num_qubits));
        let dim = 1 << num_qubits;
        Self {
            num_qubits,
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Convex combination `sum w_i rho_i`; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?.1;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("mixture weights must be a probability vector".into()));
        }
        let dim = first.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: rho.dim() });
            }
            acc = &acc + &rho.matrix.scale_real(*w);
        }
        Ok(Self::from_map_output(acc))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.matrix).map(|(v, _)| v).expect("density matrices are Hermitian")
    }

    /// `<psi|rho|psi>`.
    pub fn expectation(&self, psi: &PureState) -> f64 {
        let v = self.matrix.apply(&psi.amplitudes);
        psi.amplitudes.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }

    pub fn to_file(&self) -> DensityMatrixFile {
        let n = self.dim();
        DensityMatrixFile {
            num_qubits: self.num_qubits,
            re: (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].im).collect()).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DensityMatrixFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("plain numeric payload")
    }

    pub fn read(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({} qubits) {:?}", self.num_qubits, self.matrix)
    }
}

/// On-disk density matrix: `{ "num_qubits": n, "re": [[..]], "im": [[..]] }`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub num_qubits: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TryFrom<DensityMatrixFile> for DensityMatrix {
    type Error = Error;

    fn try_from(file: DensityMatrixFile) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&file.num_qubits) {
            return Err(Error::InvalidState(format!("num_qubits {} not in 1..=3", file.num_qubits)));
        }
        let n = 1 << file.num_qubits;
        let shape_ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !shape_ok(&file.re) || !shape_ok(&file.im) {
            return Err(Error::InvalidState(format!("re/im must both be {n}x{n}")));
        }
        let data = file
            .re
            .iter()
            .flatten()
            .zip(file.im.iter().flatten())
            .map(|(&re, &im)| C64::new(re, im))
            .collect();
        DensityMatrix::new(ComplexMatrix::from_vec(n, n, data)?)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = DensityMatrixFile::deserialize(d)?;
        file.try_into().map_err(serde::de::Error::custom)
    }
}

/// Euclidean projection onto the probability simplex.
fn project_to_simplex(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            shift = candidate;
        }
    }
    values.iter().map(|&v| (v - shift).max(0.0)).collect()
}

#[derive(Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = qubits_for_dim(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm} is not 1")));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[index] = ONE;
        Self { num_qubits, amplitudes }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PureState").field("amplitudes", &self.amplitudes).finish()
    }
}

/// Eigenstates of the three Pauli axes in polarization notation:
/// H/V for Z, D/A for X, R/L for Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AxialState {
    H,
    V,
    D,
    A,
    R,
    L,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl AxialState {
    pub const ALL: [AxialState; 6] =
        [AxialState::H, AxialState::V, AxialState::D, AxialState::A, AxialState::R, AxialState::L];

    pub fn ket(self) -> [C64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            AxialState::H => [ONE, ZERO],
            AxialState::V => [ZERO, ONE],
            AxialState::D => [C64::new(s, 0.0), C64::new(s, 0.0)],
            AxialState::A => [C64::new(s, 0.0), C64::new(-s, 0.0)],
            AxialState::R => [C64::new(s, 0.0), C64::new(0.0, s)],
            AxialState::L => [C64::new(s, 0.0), C64::new(0.0, -s)],
        }
    }

    pub fn axis(self) -> Axis {
        match self {
            AxialState::H | AxialState::V => Axis::Z,
            AxialState::D | AxialState::A => Axis::X,
            AxialState::R | AxialState::L => Axis::Y,
        }
    }

    /// Eigenvalue of the axis Pauli operator.
    pub fn sign(self) -> f64 {
        match self {
            AxialState::H | AxialState::D | AxialState::R => 1.0,
            _ => -1.0,
        }
    }

    pub fn state(self) -> PureState {
        PureState { num_qubits: 1, amplitudes: self.ket().to_vec() }
    }

    pub fn as_char(self) -> char {
        match self {
            AxialState::H => 'H',
            AxialState::V => 'V',
            AxialState::D => 'D',
            AxialState::A => 'A',
            AxialState::R => 'R',
            AxialState::L => 'L',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.as_char() == c.to_ascii_uppercase())
    }
}

impl FromStr for AxialState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Self::from_char(c),
            _ => None,
        }
        .ok_or_else(|| Error::InvalidArgument(format!("unknown axial state {s:?} (use H,V,D,A,R,L)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

pub fn bell_state(label: BellLabel) -> PureState {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let amplitudes = match label {
        BellLabel::PhiPlus => vec![s, ZERO, ZERO, s],
        BellLabel::PhiMinus => vec![s, ZERO, ZERO, -s],
        BellLabel::PsiPlus => vec![ZERO, s, s, ZERO],
        BellLabel::PsiMinus => vec![ZERO, s, -s, ZERO],
    };
    PureState { num_qubits: 2, amplitudes }
}

pub fn phi_plus() -> DensityMatrix {
    bell_state(BellLabel::PhiPlus).density()
}

/// `v |Phi+><Phi+| + (1 - v) I/4`.
pub fn werner_state(v: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!("Werner weight {v} outside [0, 1]")));
    }
    let m = &phi_plus().matrix.scale_real(v) + &ComplexMatrix::identity(4).scale_real((1.0 - v) / 4.0);
    Ok(DensityMatrix::from_map_output(m))
}

pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    if a.num_qubits + b.num_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument("tensor product exceeds the qubit limit".into()));
    }
    Ok(DensityMatrix::from_map_output(crate::linalg::tensor_product(&a.matrix, &b.matrix)))
}

/// Reduced state on the qubits listed in `keep` (kept in ascending order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let reduced = partial_trace_matrix(rho.matrix(), rho.num_qubits(), keep)?;
    Ok(DensityMatrix::from_map_output(reduced))
}

/// Partial trace of any operator on `num_qubits` qubits.
pub fn partial_trace_matrix(m: &ComplexMatrix, num_qubits: usize, keep: &[usize]) -> Result<ComplexMatrix> {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.len() >= num_qubits || keep.iter().any(|&q| q >= num_qubits) {
        return Err(Error::InvalidArgument(format!(
            "keep set {keep:?} must be a nonempty proper subset of 0..{num_qubits}"
        )));
    }
    if m.rows() != 1 << num_qubits || !m.is_square() {
        return Err(Error::DimensionMismatch { expected: 1 << num_qubits, found: m.rows() });
    }
    let traced: Vec<usize> = (0..num_qubits).filter(|q| !keep.contains(q)).collect();
    // qubit q sits at bit (num_qubits - 1 - q) of the basis index
    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0;
        for (pos, &q) in keep.iter().enumerate() {
            let bit = (kept_bits >> (keep.len() - 1 - pos)) & 1;
            idx |= bit << (num_qubits - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            let bit = (traced_bits >> (traced.len() - 1 - pos)) & 1;
            idx |= bit << (num_qubits - 1 - q);
        }
        idx
    };
    let dk = 1 << keep.len();
    let dt = 1 << traced.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            out[(i, j)] = (0..dt).map(|e| m[(compose(i, e), compose(j, e))]).sum();
        }
    }
    Ok(out)
}

/// `[Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2`, evaluated as the squared nuclear
/// norm of `sqrt(rho) sqrt(sigma)`.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let a = sqrt_psd(rho.matrix())?;
    let b = sqrt_psd(sigma.matrix())?;
    let f = nuclear_norm(&(&a * &b)).powi(2);
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tensor_product;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// `|Phi+>` after amplitude damping of strength `pa` on the first qubit.
    fn alice_damped(pa: f64) -> DensityMatrix {
        let s = (1.0 - pa).sqrt();
        DensityMatrix::new(
            ComplexMatrix::from_real_rows(&[
                vec![0.5, 0.0, 0.0, s / 2.0],
                vec![0.0, pa / 2.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
                vec![s / 2.0, 0.0, 0.0, (1.0 - pa) / 2.0],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn bell_amplitudes() {
        let s = FRAC_1_SQRT_2;
        let phi = bell_state(BellLabel::PhiPlus);
        assert_eq!(phi.amplitudes(), &[re(s), ZERO, ZERO, re(s)]);
        let psi_minus = bell_state(BellLabel::PsiMinus);
        assert_eq!(psi_minus.amplitudes(), &[ZERO, re(s), re(-s), ZERO]);
        assert!(phi.inner(&bell_state(BellLabel::PsiPlus)).norm() < 1e-15);
    }

    #[test]
    fn werner_endpoints_and_fidelity() {
        assert!(werner_state(1.0).unwrap().matrix().max_abs_diff(phi_plus().matrix()) < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(werner_state(0.0).unwrap().matrix().max_abs_diff(mixed.matrix()) < 1e-15);
        let f = state_fidelity(&phi_plus(), &werner_state(0.8).unwrap()).unwrap();
        assert!((f - 0.85).abs() < 1e-9, "{f}");
        assert!(werner_state(1.2).is_err());
        assert!(werner_state(-0.1).is_err());
    }

    #[test]
    fn marginal_of_bell_state_is_maximally_mixed() {
        let r = partial_trace(&phi_plus(), &[0]).unwrap();
        assert!(r.matrix().max_abs_diff(DensityMatrix::maximally_mixed(1).matrix()) < 1e-15);
    }

    #[test]
    fn marginal_of_product_state() {
        let a = AxialState::R.state().density();
        let b = AxialState::V.state().density();
        let ab = tensor(&a, &b).unwrap();
        assert!(partial_trace(&ab, &[0]).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(partial_trace(&ab, &[1]).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn marginal_of_alice_damped_state() {
        let r = partial_trace(&alice_damped(0.5), &[0]).unwrap();
        let expected = ComplexMatrix::diagonal(&[re(0.75), re(0.25)]);
        assert!(r.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_index_sets() {
        let rho = phi_plus();
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[0, 1]).is_err());
        assert!(partial_trace(&rho, &[2]).is_err());
    }

    #[test]
    fn alice_damped_spectrum() {
        let mut vals = alice_damped(0.5).eigenvalues();
        vals.sort_by(f64::total_cmp);
        for (v, e) in vals.iter().zip([0.0, 0.0, 0.25, 0.75]) {
            assert!((v - e).abs() < 1e-12, "{vals:?}");
        }
    }

    #[test]
    fn fidelity_fixtures() {
        let w = werner_state(0.3).unwrap();
        assert!((state_fidelity(&w, &w).unwrap() - 1.0).abs() < 1e-10);
        let zero = AxialState::H.state().density();
        let one = AxialState::V.state().density();
        assert!(state_fidelity(&zero, &one).unwrap() < 1e-12);
        assert!(state_fidelity(&zero, &phi_plus()).is_err());
    }

    #[test]
    fn fidelity_with_pure_state_is_expectation() {
        let psi = AxialState::D.state();
        let sigma = DensityMatrix::mixture(&[
            (0.3, &AxialState::H.state().density()),
            (0.7, &AxialState::R.state().density()),
        ])
        .unwrap();
        let f = state_fidelity(&psi.density(), &sigma).unwrap();
        assert!((f - sigma.expectation(&psi)).abs() < 1e-12);
    }

    #[test]
    fn strict_rejects_and_repair_fixes() {
        let bad = ComplexMatrix::from_real_rows(&[vec![1.1, 0.0], vec![0.0, -0.1]]).unwrap();
        assert!(DensityMatrix::new(bad.clone()).is_err());
        let fixed = DensityMatrix::validated(bad, Validation::Repair).unwrap();
        assert!(fixed.matrix().max_abs_diff(AxialState::H.state().density().matrix()) < 1e-15);
        let not_herm = ComplexMatrix::from_real_rows(&[vec![0.5, 0.2], vec![0.0, 0.5]]).unwrap();
        assert!(DensityMatrix::new(not_herm).is_err());
        let trace_off = ComplexMatrix::from_real_rows(&[vec![0.5, 0.0], vec![0.0, 0.6]]).unwrap();
        assert!(DensityMatrix::new(trace_off).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::identity(16).scale_real(1.0 / 16.0)).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let w = werner_state(0.8).unwrap();
        let back = DensityMatrix::from_json(&w.to_json()).unwrap();
        assert!(back.matrix().max_abs_diff(w.matrix()) < 1e-15);
        let bad = r#"{"num_qubits":1,"re":[[1.0,0.0],[0.0,1.0]],"im":[[0,0],[0,0]]}"#;
        assert!(DensityMatrix::from_json(bad).is_err());
        let ragged = r#"{"num_qubits":1,"re":[[1.0],[0.0,0.0]],"im":[[0,0],[0,0]]}"#;
        assert!(DensityMatrix::from_json(ragged).is_err());
    }

    #[test]
    fn pure_state_norm_checked() {
        assert!(PureState::new(vec![ONE, ONE]).is_err());
        assert!(PureState::normalized(vec![ONE, ONE]).is_ok());
        assert!(PureState::new(vec![ONE, ZERO, ZERO]).is_err());
    }

    #[test]
    fn tensor_respects_qubit_limit() {
        let rho = phi_plus();
        assert!(tensor(&rho, &rho).is_err());
        let three = tensor(&AxialState::H.state().density(), &rho).unwrap();
        assert_eq!(three.num_qubits(), 3);
        let m = tensor_product(&ComplexMatrix::identity(2), rho.matrix());
        assert!(three.matrix().max_abs_diff(&m) > 0.1);
    }

    #[test]
    fn axial_parsing() {
        assert_eq!("d".parse::<AxialState>().unwrap(), AxialState::D);
        assert!("Q".parse::<AxialState>().is_err());
        assert!("HV".parse::<AxialState>().is_err());
    }
}
