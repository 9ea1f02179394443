use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, real_rank, tensor_product, ComplexMatrix, Pauli, ZERO};
use crate::state::{AxialState, Axis, DensityMatrix, Validation};

use super::records::{as_weights, MeasurementRecord, Setting};

pub const MLE_MAX_ITERATIONS: usize = 5000;
pub const MLE_TOL: f64 = 1e-9;

fn aggregate(data: &[(Setting, f64)]) -> Result<(usize, BTreeMap<Setting, f64>)> {
    let n = data
        .first()
        .ok_or_else(|| Error::InvalidArgument("no measurement records".into()))?
        .0
        .num_qubits();
    let mut map = BTreeMap::new();
    for (s, w) in data {
        if s.num_qubits() != n {
            return Err(Error::InvalidArgument("records mix different qubit counts".into()));
        }
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::InvalidArgument(format!("bad count {w} for setting {s}")));
        }
        *map.entry(s.clone()).or_insert(0.0) += w;
    }
    Ok((n, map))
}

fn axis_pauli(axis: Axis) -> Pauli {
    match axis {
        Axis::X => Pauli::X,
        Axis::Y => Pauli::Y,
        Axis::Z => Pauli::Z,
    }
}

fn axial_pair(axis: Axis) -> [AxialState; 2] {
    match axis {
        Axis::Z => [AxialState::H, AxialState::V],
        Axis::X => [AxialState::D, AxialState::A],
        Axis::Y => [AxialState::R, AxialState::L],
    }
}

fn tuples<T: Copy>(alphabet: &[T], len: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p: Vec<T>| {
                alphabet.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

/// Stokes-parameter linear inversion without any positivity repair.
///
type SignedFrequency = (Vec<f64>, f64);

/// Needs both eigenstates of every product Pauli basis. Each Stokes
/// parameter is averaged over all bases that measure it.
pub fn linear_inversion(data: &[(Setting, f64)]) -> Result<ComplexMatrix> {
    let (n, map) = aggregate(data)?;
    let axes = [Axis::X, Axis::Y, Axis::Z];
    // basis -> outcome frequencies with their sign patterns
    let mut bases: Vec<(Vec<Axis>, Vec<SignedFrequency>)> = Vec::new();
    for basis in tuples(&axes, n) {
        let mut outcomes = Vec::new();
        for choice in tuples(&[0usize, 1], n) {
            let states: Vec<AxialState> = basis.iter().zip(&choice).map(|(&a, &k)| axial_pair(a)[k]).collect();
            let setting = Setting::new(states.clone())?;
            let w = *map.get(&setting).ok_or_else(|| {
                Error::InvalidArgument(format!("linear inversion needs every Pauli basis; missing {setting}"))
            })?;
            outcomes.push((states.iter().map(|s| s.sign()).collect::<Vec<_>>(), w));
        }
        let total: f64 = outcomes.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            let label: String = basis.iter().map(|a| format!("{a:?}")).collect();
            return Err(Error::InvalidArgument(format!("basis {label} has no counts")));
        }
        for o in &mut outcomes {
            o.1 /= total;
        }
        bases.push((basis, outcomes));
    }
    let dim = 1 << n;
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for mu in tuples(&[Pauli::I, Pauli::X, Pauli::Y, Pauli::Z], n) {
        let mut acc = 0.0;
        let mut used = 0usize;
        for (basis, outcomes) in &bases {
            let compatible = mu.iter().zip(basis).all(|(&p, &a)| p == Pauli::I || p == axis_pauli(a));
            if !compatible {
                continue;
            }
            used += 1;
            acc += outcomes
                .iter()
                .map(|(signs, f)| f * mu.iter().zip(signs).map(|(&p, &s)| if p == Pauli::I { 1.0 } else { s }).product::<f64>())
                .sum::<f64>();
        }
        let stokes = acc / used as f64;
        let op = mu.iter().map(|p| p.matrix()).reduce(|a, b| tensor_product(&a, &b)).expect("n >= 1");
        rho = &rho + &op.scale_real(stokes / dim as f64);
    }
    Ok(rho)
}

/// Linear inversion followed by projection onto the nearest physical state.
pub fn state_tomo_linear(records: &[MeasurementRecord]) -> Result<DensityMatrix> {
    DensityMatrix::validated(linear_inversion(&as_weights(records))?, Validation::Repair)
}

/// Profiled Poisson log-likelihood `sum c ln p - C ln(sum p)`, i.e. the
/// likelihood maximized over an unknown overall intensity.
pub fn log_likelihood(data: &[(Setting, f64)], rho: &DensityMatrix) -> Result<f64> {
    let problem = Problem::new(data)?;
    if problem.dim != rho.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim, found: rho.dim() });
    }
    Ok(problem.value(rho.matrix()).0)
}

struct Problem {
    dim: usize,
    projectors: Vec<ComplexMatrix>,
    counts: Vec<f64>,
    total: f64,
    projector_sum: ComplexMatrix,
}

impl Problem {
    fn new(data: &[(Setting, f64)]) -> Result<Self> {
        let (n, map) = aggregate(data)?;
        let dim = 1 << n;
        let projectors: Vec<ComplexMatrix> = map.keys().map(|s| s.projector()).collect();
        let counts: Vec<f64> = map.values().copied().collect();
        let mut projector_sum = ComplexMatrix::zeros(dim, dim);
        for p in &projectors {
            projector_sum = &projector_sum + p;
        }
        Ok(Self { dim, total: counts.iter().sum(), projectors, counts, projector_sum })
    }

    fn informationally_complete(&self) -> bool {
        let rows: Vec<Vec<f64>> = self
            .projectors
            .iter()
            .map(|p| p.as_slice().iter().flat_map(|z| [z.re, z.im]).collect())
            .collect();
        real_rank(&rows, 1e-10) == self.dim * self.dim
    }

    /// Log-likelihood and the probabilities it was built from.
    fn value(&self, rho: &ComplexMatrix) -> (f64, Vec<f64>) {
        let probs: Vec<f64> = self.projectors.iter().map(|p| (p * rho).trace().re).collect();
        let norm: f64 = probs.iter().sum();
        let mut l = -self.total * norm.ln();
        for (&c, &p) in self.counts.iter().zip(&probs) {
            if c > 0.0 {
                l += if p > 0.0 { c * p.ln() } else { f64::NEG_INFINITY };
            }
        }
        (l, probs)
    }

    /// `dL/drho` as a Hermitian matrix.
    fn rho_gradient(&self, probs: &[f64]) -> ComplexMatrix {
        let norm: f64 = probs.iter().sum();
        let mut r = self.projector_sum.scale_real(-self.total / norm);
        for ((p, &c), &prob) in self.projectors.iter().zip(&self.counts).zip(probs) {
            if c > 0.0 {
                r = &r + &p.scale_real(c / prob);
            }
        }
        r
    }
}

/// `T^dagger T / Tr(T^dagger T)`.
fn rho_of(t: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let m = &t.dagger() * t;
    let tr = m.trace().re;
    (m.scale_real(1.0 / tr), tr)
}

/// Keeps the upper triangle with a real diagonal.
fn mask(m: &mut ComplexMatrix) {
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if c < r {
                m[(r, c)] = ZERO;
            } else if c == r {
                m[(r, c)].im = 0.0;
            }
        }
    }
}

/// Result of the maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct MleFit {
    pub state: DensityMatrix,
    /// Fitted counts per unit probability, `C / sum_s Tr(P_s rho)`.
    pub intensity: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
}

/// Maximum-likelihood state over `rho = T^dagger T / Tr`, with `T` upper
/// triangular. Gradient ascent with Barzilai-Borwein steps and an Armijo
/// safeguard; stops once the log-likelihood gain per step falls below `tol`
/// relative to its magnitude, twice in a row.
pub fn state_tomo_mle_fit(data: &[(Setting, f64)], tol: f64) -> Result<MleFit> {
    let problem = Problem::new(data)?;
    if !problem.informationally_complete() {
        return Err(Error::InvalidArgument("settings are not informationally complete".into()));
    }
    let dim = problem.dim;
    if problem.total <= 0.0 {
        return Err(Error::InvalidArgument("no counts recorded".into()));
    }
    let start = match linear_inversion(data).and_then(|m| DensityMatrix::validated(m, Validation::Repair)) {
        Ok(lin) => lin.matrix().clone(),
        Err(_) => ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
    };
    let seed = &start.scale_real(0.9) + &ComplexMatrix::identity(dim).scale_real(0.1 / dim as f64);
    let mut t = cholesky_lower(&seed).ok_or_else(|| Error::InvalidState("starting point not positive".into()))?.dagger();

    let eval = |t: &ComplexMatrix| -> (f64, ComplexMatrix) {
        let (rho, tr) = rho_of(t);
        let (l, probs) = problem.value(&rho);
        let r = problem.rho_gradient(&probs);
        let shift = (&r * &rho).trace().re;
        let g = (&r - &ComplexMatrix::identity(dim).scale_real(shift)).scale_real(2.0 / tr);
        let mut grad = t * &g;
        mask(&mut grad);
        (l, grad)
    };
    let inner = |a: &ComplexMatrix, b: &ComplexMatrix| -> f64 {
        a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x.conj() * y).re).sum()
    };

    let (mut l, mut grad) = eval(&t);
    let mut step = 1.0 / inner(&grad, &grad).sqrt().max(1e-300);
    let mut quiet = 0;
    for iteration in 1..=MLE_MAX_ITERATIONS {
        let g2 = inner(&grad, &grad);
        if g2 == 0.0 {
            return finish(&problem, &t, l, iteration);
        }
        let mut accepted = None;
        let mut trial_step = step;
        for _ in 0..80 {
            let candidate = &t + &grad.scale_real(trial_step);
            let (lc, gc) = eval(&candidate);
            if lc.is_finite() && lc >= l + 1e-4 * trial_step * g2 {
                accepted = Some((candidate, lc, gc));
                break;
            }
            trial_step *= 0.5;
        }
        let Some((t_new, l_new, g_new)) = accepted else {
            return finish(&problem, &t, l, iteration);
        };
        let s = &t_new - &t;
        let y = &g_new - &grad;
        let sy = inner(&s, &y);
        step = if sy < 0.0 { inner(&s, &s) / -sy } else { 2.0 * trial_step };
        let gain = l_new - l;
        t = t_new;
        l = l_new;
        grad = g_new;
        if gain <= tol * l.abs().max(1.0) {
            quiet += 1;
            if quiet >= 2 {
                return finish(&problem, &t, l, iteration);
            }
        } else {
            quiet = 0;
        }
    }
    let (rho, _) = rho_of(&t);
    Err(Error::NonConvergence {
        iterations: MLE_MAX_ITERATIONS,
        log_likelihood: l,
        best: Box::new(DensityMatrix::validated(rho, Validation::Repair)?),
    })
}

fn finish(problem: &Problem, t: &ComplexMatrix, l: f64, iterations: usize) -> Result<MleFit> {
    let (rho, _) = rho_of(t);
    let norm: f64 = problem.projectors.iter().map(|p| (p * &rho).trace().re).sum();
    let state = DensityMatrix::validated(rho, Validation::Strict)?;
    Ok(MleFit { state, intensity: problem.total / norm, log_likelihood: l, iterations })
}

/// Maximum-likelihood reconstruction from counts; see [`state_tomo_mle_fit`].
pub fn state_tomo_mle(records: &[MeasurementRecord], tol: f64) -> Result<DensityMatrix> {
    Ok(state_tomo_mle_fit(&as_weights(records), tol)?.state)
}
