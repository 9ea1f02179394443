//! Random states and unitaries for property tests and benchmarks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};
use crate::state::{DensityMatrix, PureState};

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_pure_state(num_qubits: usize, rng: &mut impl Rng) -> PureState {
    let amps = (0..1 << num_qubits).map(|_| gaussian(rng)).collect();
    PureState::normalized(amps).expect("gaussian vector is nonzero")
}

/// Ginibre-distributed mixed state of full rank (Hilbert-Schmidt measure).
pub fn random_density_matrix(num_qubits: usize, rng: &mut impl Rng) -> DensityMatrix {
    random_density_matrix_rank(num_qubits, 1 << num_qubits, rng)
}

/// `G G^dagger / Tr` with `G` a `dim x rank` complex Gaussian matrix.
pub fn random_density_matrix_rank(num_qubits: usize, rank: usize, rng: &mut impl Rng) -> DensityMatrix {
    let dim = 1 << num_qubits;
    let mut g = ComplexMatrix::zeros(dim, rank.max(1));
    for r in 0..dim {
        for c in 0..rank.max(1) {
            g[(r, c)] = gaussian(rng);
        }
    }
    let m = &g * &g.dagger();
    let tr = m.trace().re;
    DensityMatrix::from_map_output(m.scale_real(1.0 / tr))
}

/// Haar-random unitary via Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (c, col) in cols.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            u[(r, c)] = *z;
        }
    }
    u
}
