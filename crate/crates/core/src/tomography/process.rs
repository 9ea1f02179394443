use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Pauli, C64, ZERO};
use crate::state::{AxialState, DensityMatrix};
use crate::teleport::teleport_channel;

use super::estimate::{state_tomo_mle_fit, MLE_TOL};
use super::records::{as_weights, full_settings, simulate_counts_operator, stream_rng};

/// Process matrix in the `{I, X, Y, Z}` basis:
/// `e(rho) = sum_mn chi_mn E_m rho E_n^dagger`.
#[derive(Debug, Clone)]
pub struct ChiMatrix {
    entries: ComplexMatrix,
}

impl ChiMatrix {
    pub fn new(entries: ComplexMatrix) -> Result<Self> {
        if entries.rows() != 4 || entries.cols() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: entries.rows() });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn get(&self, m: Pauli, n: Pauli) -> C64 {
        self.entries[(m.index(), n.index())]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { entries: self.entries.scale_real(s) }
    }

    /// Applies the process to any 2x2 operator.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(2, 2);
        for m in Pauli::ALL {
            let em = m.matrix();
            let left = &em * rho;
            for n in Pauli::ALL {
                let c = self.get(m, n);
                if c == ZERO {
                    continue;
                }
                out = &out + &(&left * &n.matrix().dagger()).scale(c);
            }
        }
        out
    }

    /// Max entry of `|sum chi_mn E_n^dagger E_m - I|`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(2, 2);
        for m in Pauli::ALL {
            for n in Pauli::ALL {
                acc = &acc + &(&n.matrix().dagger() * &m.matrix()).scale(self.get(m, n));
            }
        }
        acc.max_abs_diff(&ComplexMatrix::identity(2))
    }
}

/// Average fidelity of a trace-preserving qubit process, `(2 Re chi_II + 1)/3`.
pub fn avg_fidelity_from_chi(chi: &ChiMatrix) -> f64 {
    (2.0 * chi.get(Pauli::I, Pauli::I).re + 1.0) / 3.0
}

/// Probe inputs `|0>, |1>, |+>, |+i>`.
pub fn probe_states() -> [DensityMatrix; 4] {
    [AxialState::H, AxialState::V, AxialState::D, AxialState::R].map(|s| s.state().density())
}

/// Solves for chi from the images of the four probes (any normalization;
/// the map is treated as linear).
pub fn chi_from_probe_outputs(outputs: &[ComplexMatrix; 4]) -> Result<ChiMatrix> {
    let [e0, e1, ep, ei] = outputs;
    let sum = e0 + e1;
    // |0><1| = |+><+| + i|+i><+i| - (1+i)/2 (|0><0| + |1><1|), and its adjoint
    let e01 = &(ep + &ei.scale(C64::new(0.0, 1.0))) - &sum.scale(C64::new(0.5, 0.5));
    let e10 = &(ep - &ei.scale(C64::new(0.0, 1.0))) - &sum.scale(C64::new(0.5, -0.5));
    let images = [[e0, &e01], [&e10, e1]];
    // Choi operator J = sum_ij |i><j| (x) e(|i><j|)
    let mut choi = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let block = images[i][j];
            for r in 0..2 {
                for c in 0..2 {
                    choi[(2 * i + r, 2 * j + c)] = block[(r, c)];
                }
            }
        }
    }
    // v_m = (I (x) E_m)|Omega>, |Omega> = |00> + |11>
    let vs: Vec<Vec<C64>> = Pauli::ALL
        .iter()
        .map(|p| {
            let e = p.matrix();
            let mut v = vec![ZERO; 4];
            for k in 0..2 {
                for r in 0..2 {
                    v[2 * k + r] = e[(r, k)];
                }
            }
            v
        })
        .collect();
    let mut chi = ComplexMatrix::zeros(4, 4);
    for (m, vm) in vs.iter().enumerate() {
        for (n, vn) in vs.iter().enumerate() {
            let jv = choi.apply(vn);
            chi[(m, n)] = vm.iter().zip(&jv).map(|(a, b)| a.conj() * b).sum::<C64>() / 4.0;
        }
    }
    ChiMatrix::new(chi)
}

/// How probe outputs are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessMode {
    /// Outputs taken directly from the map.
    Exact,
    /// Poisson counts on the six-eigenstate setting set, MLE per output.
    Counts { n_per_setting: u64, seed: u64 },
}

/// Estimates an output operator from simulated counts, restoring its trace
/// from the fitted intensity.
fn estimate_output(m: &ComplexMatrix, n_per_setting: u64, rng: &mut ChaCha8Rng) -> Result<ComplexMatrix> {
    let records = simulate_counts_operator(m, &full_settings(1), n_per_setting, rng)?;
    if records.iter().all(|r| r.counts == 0) {
        return Ok(ComplexMatrix::zeros(2, 2));
    }
    let fit = state_tomo_mle_fit(&as_weights(&records), MLE_TOL)?;
    Ok(fit.state.matrix().scale_real(fit.intensity / n_per_setting as f64))
}

fn probe_outputs(
    channel: &dyn Fn(&DensityMatrix) -> Result<ComplexMatrix>,
    mode: ProcessMode,
    stream_base: u64,
) -> Result<[ComplexMatrix; 4]> {
    let probes = probe_states();
    let mut outs: Vec<ComplexMatrix> = Vec::with_capacity(4);
    for (j, probe) in probes.iter().enumerate() {
        let exact = channel(probe)?;
        if exact.rows() != 2 || exact.cols() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: exact.rows() });
        }
        outs.push(match mode {
            ProcessMode::Exact => exact,
            ProcessMode::Counts { n_per_setting, seed } => {
                estimate_output(&exact, n_per_setting, &mut stream_rng(seed, stream_base + j as u64))?
            }
        });
    }
    Ok(outs.try_into().expect("four probes"))
}

/// Process tomography of a single-qubit map given as an input -> output
/// evaluator. The output need not be normalized.
pub fn process_tomo(
    channel: &dyn Fn(&DensityMatrix) -> Result<ComplexMatrix>,
    mode: ProcessMode,
) -> Result<ChiMatrix> {
    chi_from_probe_outputs(&probe_outputs(channel, mode, 0)?)
}

/// Composite teleportation fidelity: each outcome's conditional map is
/// tomographed without correction, normalized by its probe-averaged
/// probability, and contributes the chi diagonal element of its correction.
pub fn composite_teleport_fidelity(resource: &DensityMatrix, mode: ProcessMode) -> Result<f64> {
    let channels = teleport_channel(resource)?;
    let mut weighted = 0.0;
    let mut total_p = 0.0;
    for (k, ch) in channels.iter().enumerate() {
        let eval = |rho: &DensityMatrix| Ok(ch.apply_raw(rho.matrix()));
        let outputs = probe_outputs(&eval, mode, 4 * k as u64)?;
        let p = outputs.iter().map(|m| m.trace().re).sum::<f64>() / 4.0;
        if p <= 0.0 {
            continue;
        }
        let chi = chi_from_probe_outputs(&outputs)?.scale(1.0 / p);
        weighted += p * chi.get(ch.correction, ch.correction).re;
        total_p += p;
    }
    if total_p <= 0.0 {
        return Err(Error::InvalidState("no outcome was observed".into()));
    }
    Ok((2.0 * weighted / total_p + 1.0) / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub std: f64,
}

/// Repeats the counts-mode composite fidelity with independent derived seeds.
pub fn monte_carlo_fidelity_error(
    resource: &DensityMatrix,
    n_per_setting: u64,
    n_resamples: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    if n_resamples < 2 {
        return Err(Error::InvalidArgument("need at least two resamples".into()));
    }
    let run = |r: usize| {
        let sub_seed = stream_rng(seed, r as u64).next_u64();
        composite_teleport_fidelity(resource, ProcessMode::Counts { n_per_setting, seed: sub_seed })
    };
    #[cfg(feature = "parallel")]
    let values: Vec<f64> = {
        use rayon::prelude::*;
        (0..n_resamples).into_par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<f64> = (0..n_resamples).map(run).collect::<Result<_>>()?;
    Ok(summarize(&values))
}

/// Sample mean and (n - 1)-normalized standard deviation.
pub fn summarize(values: &[f64]) -> FidelityEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    FidelityEstimate { mean, std: var.sqrt() }
}
