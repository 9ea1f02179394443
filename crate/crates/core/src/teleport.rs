//! Circuit-level teleportation of one qubit through an arbitrary two-qubit
//! resource.
//!
//! Qubits are ordered (in, A, B). Alice's analyzer applies CNOT(in -> A) and a
//! Hadamard on `in`, flips A once more conditioned on `in`, and reads both
//! qubits in the computational basis. The outcome label is `<in><A>` with A
//! written as H (0) or V (1), which projects onto
//! `0H = Phi+`, `0V = Psi+`, `1H = Psi-`, `1V = Phi-`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, embed_operator, tensor_product, ComplexMatrix, Pauli, C64, ONE, ZERO};
use crate::state::{AxialState, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "0H")]
    ZeroH,
    #[serde(rename = "0V")]
    ZeroV,
    #[serde(rename = "1H")]
    OneH,
    #[serde(rename = "1V")]
    OneV,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::ZeroH, Outcome::ZeroV, Outcome::OneH, Outcome::OneV];

    /// Measured bits `(in, A)`.
    pub fn bits(self) -> (usize, usize) {
        match self {
            Outcome::ZeroH => (0, 0),
            Outcome::ZeroV => (0, 1),
            Outcome::OneH => (1, 0),
            Outcome::OneV => (1, 1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::ZeroH => "0H",
            Outcome::ZeroV => "0V",
            Outcome::OneH => "1H",
            Outcome::OneV => "1V",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bob's Pauli correction per outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionTable {
    entries: [(Outcome, Pauli); 4],
}

impl CorrectionTable {
    pub fn standard() -> Self {
        Self {
            entries: [
                (Outcome::ZeroH, Pauli::I),
                (Outcome::ZeroV, Pauli::X),
                (Outcome::OneH, Pauli::Y),
                (Outcome::OneV, Pauli::Z),
            ],
        }
    }

    pub fn get(&self, outcome: Outcome) -> Pauli {
        self.entries.iter().find(|(o, _)| *o == outcome).map(|(_, p)| *p).expect("table covers every outcome")
    }

    pub fn entries(&self) -> &[(Outcome, Pauli); 4] {
        &self.entries
    }
}

impl Default for CorrectionTable {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TeleportOutcome {
    pub label: Outcome,
    pub probability: f64,
    #[serde(skip)]
    pub bob_raw: DensityMatrix,
    pub bob_corrected: DensityMatrix,
}

/// The analyzer unitary on (in, A, B).
fn analyzer() -> &'static ComplexMatrix {
    static U: OnceLock<ComplexMatrix> = OnceLock::new();
    U.get_or_init(|| {
        let mut cnot = ComplexMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
            cnot[(r, c)] = ONE;
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = ComplexMatrix::from_real_rows(&[vec![s, s], vec![s, -s]]).expect("2x2");
        let cnot = embed_operator(&cnot, &[0, 1], 3).expect("valid embedding");
        let h = embed_operator(&h, &[0], 3).expect("valid embedding");
        &cnot * &(&h * &cnot)
    })
}

fn check_inputs(input: &DensityMatrix, resource: &DensityMatrix) -> Result<()> {
    if input.num_qubits() != 1 {
        return Err(Error::DimensionMismatch { expected: 2, found: input.dim() });
    }
    if resource.num_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 4, found: resource.dim() });
    }
    Ok(())
}

/// Bob's unnormalized conditional operator `<xy| M |xy>` of an 8x8 operator.
fn bob_block(m: &ComplexMatrix, outcome: Outcome) -> ComplexMatrix {
    let (x, y) = outcome.bits();
    let base = 4 * x + 2 * y;
    let mut out = ComplexMatrix::zeros(2, 2);
    for r in 0..2 {
        for c in 0..2 {
            out[(r, c)] = m[(base + r, base + c)];
        }
    }
    out
}

fn correct(raw: &ComplexMatrix, pauli: Pauli) -> ComplexMatrix {
    pauli.matrix().conjugate_by(raw)
}

/// Runs the protocol and returns the four outcomes in the order 0H, 0V, 1H, 1V.
///
/// An outcome that cannot occur gets probability 0 and the maximally mixed
/// state as a placeholder.
pub fn teleport(input: &DensityMatrix, resource: &DensityMatrix) -> Result<Vec<TeleportOutcome>> {
    check_inputs(input, resource)?;
    let joint = tensor_product(input.matrix(), resource.matrix());
    let evolved = analyzer().conjugate_by(&joint);
    let table = CorrectionTable::standard();
    Ok(Outcome::ALL
        .iter()
        .map(|&label| {
            let block = bob_block(&evolved, label);
            let probability = block.trace().re.max(0.0);
            let corrected = correct(&block, table.get(label));
            let (bob_raw, bob_corrected) = if probability > 1e-15 {
                (
                    DensityMatrix::from_unnormalized(&block).expect("positive trace"),
                    DensityMatrix::from_unnormalized(&corrected).expect("positive trace"),
                )
            } else {
                (DensityMatrix::maximally_mixed(1), DensityMatrix::maximally_mixed(1))
            };
            TeleportOutcome { label, probability, bob_raw, bob_corrected }
        })
        .collect())
}

/// The completely positive, trace non-increasing map taking Alice's input to
/// Bob's unnormalized state for one outcome.
#[derive(Debug, Clone)]
pub struct ConditionalChannel {
    pub label: Outcome,
    pub correction: Pauli,
    kraus_ops: Vec<ComplexMatrix>,
}

impl ConditionalChannel {
    /// Kraus operators before correction.
    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    /// Applies the uncorrected map to any 2x2 operator (linear extension).
    pub fn apply_raw(&self, m: &ComplexMatrix) -> ComplexMatrix {
        crate::channels::apply_ops(&self.kraus_ops, m)
    }

    pub fn apply_corrected(&self, m: &ComplexMatrix) -> ComplexMatrix {
        correct(&self.apply_raw(m), self.correction)
    }

    pub fn probability(&self, input: &DensityMatrix) -> f64 {
        self.apply_raw(input.matrix()).trace().re
    }
}

/// One [`ConditionalChannel`] per outcome, built from the resource's
/// eigendecomposition: `K = sqrt(r) (<xy| (x) I) U (I (x) |r>)`.
pub fn teleport_channel(resource: &DensityMatrix) -> Result<Vec<ConditionalChannel>> {
    if resource.num_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 4, found: resource.dim() });
    }
    let (values, vectors) = eig_hermitian(resource.matrix())?;
    let u = analyzer();
    let table = CorrectionTable::standard();
    let components: Vec<(f64, Vec<C64>)> = values
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 1e-14)
        .map(|(k, &w)| (w, vectors.column(k)))
        .collect();
    Ok(Outcome::ALL
        .iter()
        .map(|&label| {
            let (x, y) = label.bits();
            let kraus_ops = components
                .iter()
                .map(|(w, r)| {
                    let mut k = ComplexMatrix::zeros(2, 2);
                    for i in 0..2 {
                        let mut ket = vec![ZERO; 8];
                        ket[4 * i..4 * i + 4].copy_from_slice(r);
                        let image = u.apply(&ket);
                        for b in 0..2 {
                            k[(b, i)] = image[4 * x + 2 * y + b] * w.sqrt();
                        }
                    }
                    k
                })
                .collect();
            ConditionalChannel { label, correction: table.get(label), kraus_ops }
        })
        .collect())
}

/// Average teleportation fidelity over the six axial input states, which is
/// exact for the Bloch-sphere average.
pub fn average_fidelity_direct(resource: &DensityMatrix) -> Result<f64> {
    let mut total = 0.0;
    for axial in AxialState::ALL {
        let psi = axial.state();
        let input = psi.density();
        for outcome in teleport(&input, resource)? {
            total += outcome.probability * outcome.bob_corrected.expectation(&psi);
        }
    }
    Ok(total / AxialState::ALL.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{phi_plus, werner_state};

    #[test]
    fn analyzer_projects_onto_bell_states() {
        use crate::state::{bell_state, BellLabel};
        let expected = [
            (Outcome::ZeroH, BellLabel::PhiPlus),
            (Outcome::ZeroV, BellLabel::PsiPlus),
            (Outcome::OneH, BellLabel::PsiMinus),
            (Outcome::OneV, BellLabel::PhiMinus),
        ];
        let u = analyzer();
        for (outcome, bell) in expected {
            let ket = crate::linalg::kron_vec(bell_state(bell).amplitudes(), &[ONE, ZERO]);
            let image = u.apply(&ket);
            let (x, y) = outcome.bits();
            assert!((image[4 * x + 2 * y].norm() - 1.0).abs() < 1e-12, "{outcome}");
        }
    }

    #[test]
    fn ideal_resource_teleports_plus() {
        let plus = AxialState::D.state().density();
        let outcomes = teleport(&plus, &phi_plus()).unwrap();
        assert_eq!(outcomes.len(), 4);
        for o in &outcomes {
            assert!((o.probability - 0.25).abs() < 1e-12);
            assert!(o.bob_corrected.matrix().max_abs_diff(plus.matrix()) < 1e-12);
        }
    }

    #[test]
    fn mixed_resource_gives_mixed_output() {
        let input = AxialState::R.state().density();
        for o in teleport(&input, &DensityMatrix::maximally_mixed(2)).unwrap() {
            assert!(o.bob_raw.matrix().max_abs_diff(DensityMatrix::maximally_mixed(1).matrix()) < 1e-12);
        }
    }

    #[test]
    fn channels_reproduce_teleport() {
        let resource = werner_state(0.6).unwrap();
        let input = AxialState::A.state().density();
        let outcomes = teleport(&input, &resource).unwrap();
        for (ch, o) in teleport_channel(&resource).unwrap().iter().zip(&outcomes) {
            assert_eq!(ch.label, o.label);
            assert!((ch.probability(&input) - o.probability).abs() < 1e-12);
            let corrected = ch.apply_corrected(input.matrix()).scale_real(1.0 / o.probability);
            assert!(corrected.max_abs_diff(o.bob_corrected.matrix()) < 1e-10);
        }
    }

    #[test]
    fn werner_channels_coincide_after_correction() {
        let chans = teleport_channel(&werner_state(0.8).unwrap()).unwrap();
        let probe = AxialState::R.state().density();
        let first = chans[0].apply_corrected(probe.matrix());
        for ch in &chans[1..] {
            assert!(ch.apply_corrected(probe.matrix()).max_abs_diff(&first) < 1e-12);
        }
    }

    #[test]
    fn direct_average_fixtures() {
        assert!((average_fidelity_direct(&phi_plus()).unwrap() - 1.0).abs() < 1e-12);
        assert!((average_fidelity_direct(&DensityMatrix::maximally_mixed(2)).unwrap() - 0.5).abs() < 1e-12);
        assert!((average_fidelity_direct(&werner_state(0.8).unwrap()).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn impossible_outcomes_get_zero_weight() {
        // |00> resource with input |0>: only outcomes with A = in parity survive
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = ONE;
        let resource = DensityMatrix::new(m).unwrap();
        let outcomes = teleport(&AxialState::H.state().density(), &resource).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(outcomes.iter().any(|o| o.probability == 0.0));
    }

    #[test]
    fn shape_errors() {
        assert!(teleport(&phi_plus(), &phi_plus()).is_err());
        assert!(teleport_channel(&DensityMatrix::maximally_mixed(1)).is_err());
    }
}
