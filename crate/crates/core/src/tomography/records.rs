use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{tensor_product, ComplexMatrix};
use crate::state::{AxialState, DensityMatrix, MAX_QUBITS};

/// A product projector, one axial eigenstate per qubit (first = most
/// significant), labelled e.g. `"HD"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Setting(Vec<AxialState>);

impl Setting {
    pub fn new(states: Vec<AxialState>) -> Result<Self> {
        if states.is_empty() || states.len() > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("setting must cover 1..={MAX_QUBITS} qubits")));
        }
        Ok(Self(states))
    }

    pub fn states(&self) -> &[AxialState] {
        &self.0
    }

    pub fn num_qubits(&self) -> usize {
        self.0.len()
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|s| s.as_char()).collect()
    }

    pub fn projector(&self) -> ComplexMatrix {
        self.0
            .iter()
            .map(|s| {
                let k = s.ket();
                ComplexMatrix::outer(&k, &k)
            })
            .reduce(|a, b| tensor_product(&a, &b))
            .expect("nonempty setting")
    }

    /// `Tr(P m)`, real part.
    pub fn expectation(&self, m: &ComplexMatrix) -> f64 {
        let p = self.projector();
        (&p * m).trace().re
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let states = s
            .trim()
            .chars()
            .map(|c| {
                AxialState::from_char(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown setting symbol {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Setting::new(states)
    }
}

impl Serialize for Setting {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for Setting {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    #[serde(rename = "setting_label")]
    pub setting: Setting,
    pub counts: u64,
}

fn product_settings(alphabet: &[AxialState], num_qubits: usize) -> Vec<Setting> {
    let mut out: Vec<Vec<AxialState>> = vec![vec![]];
    for _ in 0..num_qubits {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |&s| {
                    let mut next = prefix.clone();
                    next.push(s);
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(Setting).collect()
}

/// All `6^n` products of Pauli eigenstates.
pub fn full_settings(num_qubits: usize) -> Vec<Setting> {
    product_settings(&AxialState::ALL, num_qubits)
}

/// The `4^n` products of `{H, V, D, R}`.
pub fn minimal_settings(num_qubits: usize) -> Vec<Setting> {
    product_settings(&[AxialState::H, AxialState::V, AxialState::D, AxialState::R], num_qubits)
}

/// Generator for stream `stream` of a master seed; distinct streams never
/// overlap, so parallel tasks can draw independently and reproducibly.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Poisson counts with mean `n_per_setting * Tr(P rho)` for each setting.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[Setting],
    n_per_setting: u64,
    seed: u64,
) -> Result<Vec<MeasurementRecord>> {
    simulate_counts_operator(rho.matrix(), settings, n_per_setting, &mut stream_rng(seed, 0))
}

/// As [`simulate_counts`] for any PSD operator; its trace scales the rates.
pub fn simulate_counts_operator(
    m: &ComplexMatrix,
    settings: &[Setting],
    n_per_setting: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<MeasurementRecord>> {
    if n_per_setting == 0 {
        return Err(Error::InvalidArgument("n_per_setting must be at least 1".into()));
    }
    settings
        .iter()
        .map(|s| {
            if 1 << s.num_qubits() != m.rows() {
                return Err(Error::DimensionMismatch { expected: m.rows(), found: 1 << s.num_qubits() });
            }
            let mean = n_per_setting as f64 * s.expectation(m);
            let counts = if mean > 0.0 {
                Poisson::new(mean).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(rng) as u64
            } else {
                0
            };
            Ok(MeasurementRecord { setting: s.clone(), counts })
        })
        .collect()
}

/// Noise-free expected counts `n * Tr(P rho)` as real weights.
pub fn expected_counts(m: &ComplexMatrix, settings: &[Setting], n: f64) -> Vec<(Setting, f64)> {
    settings.iter().map(|s| (s.clone(), n * s.expectation(m).max(0.0))).collect()
}

pub fn as_weights(records: &[MeasurementRecord]) -> Vec<(Setting, f64)> {
    records.iter().map(|r| (r.setting.clone(), r.counts as f64)).collect()
}

/// Reads a `setting_label,counts` CSV file.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<MeasurementRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let records = reader.deserialize().collect::<std::result::Result<Vec<MeasurementRecord>, _>>()?;
    if let Some(first) = records.first() {
        if records.iter().any(|r| r.setting.num_qubits() != first.setting.num_qubits()) {
            return Err(Error::InvalidArgument("settings in one file must cover the same qubits".into()));
        }
    }
    Ok(records)
}

pub fn write_records(path: impl AsRef<Path>, records: &[MeasurementRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}
