//! Configurable parameter sweeps producing tabular datasets.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map as JsonMap, Value as Json};

use crate::channels::{
    alice_mixture, apply_local, dilation_local, estimate_p, pa_from_theta, pb_from_alpha, AliceSource,
    DampingFamily, Side,
};
use crate::entanglement::{classical_threshold, dfdpb, f_adc_both, fef, single_sided_threshold, DampingPair};
use crate::error::{Error, Result};
use crate::state::{phi_plus, werner_state, DensityMatrix};
use crate::tomography::{
    composite_teleport_fidelity, full_settings, monte_carlo_fidelity_error, simulate_counts, state_tomo_mle,
    stream_rng, summarize, ProcessMode, MLE_TOL,
};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_POINTS: usize = 101;
pub const ENHANCEMENT_SCAN_POINTS: usize = 201;
/// Line of nearly constant `f` in the two-sided amplitude damping plane.
pub const FLAT_LINE_PA: f64 = 0.76;
const CROSSING_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    FefContour,
    Sensitivity,
    CalibAlice,
    CalibBob,
    FidelityAdc,
    FidelityPdc,
    EnhancementSearch,
}

/// Base entangled resource, before any damping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ResourceSpec {
    #[default]
    Ideal,
    Werner(f64),
    File(PathBuf),
}

impl ResourceSpec {
    pub fn load(&self) -> Result<DensityMatrix> {
        match self {
            ResourceSpec::Ideal => Ok(phi_plus()),
            ResourceSpec::Werner(v) => werner_state(*v).map_err(|e| Error::Config(e.to_string())),
            ResourceSpec::File(path) => {
                let rho = DensityMatrix::read(path).map_err(|e| match e {
                    Error::Io(io) => Error::Config(format!("cannot read {}: {io}", path.display())),
                    other => Error::Config(format!("{}: {other}", path.display())),
                })?;
                if rho.num_qubits() != 2 {
                    return Err(Error::Config(format!("{} is not a two-qubit state", path.display())));
                }
                Ok(rho)
            }
        }
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self, ResourceSpec::Ideal)
    }
}

impl FromStr for ResourceSpec {
    type Err = Error;

    /// `ideal`, `werner:<v>` or `file:<path>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "ideal" => Ok(ResourceSpec::Ideal),
            Some(("werner", v)) => v
                .parse()
                .map(ResourceSpec::Werner)
                .map_err(|_| Error::Config(format!("bad Werner weight {v:?}"))),
            Some(("file", p)) if !p.is_empty() => Ok(ResourceSpec::File(p.into())),
            _ => Err(Error::Config(format!("unknown resource {s:?} (ideal | werner:<v> | file:<path>)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    #[default]
    Exact,
    Counts {
        n_per_setting: u64,
        n_resamples: usize,
        #[serde(default)]
        seed: u64,
    },
}

impl Statistics {
    /// `exact` or `counts:<n>:<resamples>`; the seed is supplied separately.
    pub fn parse(s: &str, seed: u64) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["exact"] => Ok(Statistics::Exact),
            ["counts", n, r] => {
                let n_per_setting = n.parse().map_err(|_| Error::Config(format!("bad count {n:?}")))?;
                let n_resamples = r.parse().map_err(|_| Error::Config(format!("bad resample count {r:?}")))?;
                Ok(Statistics::Counts { n_per_setting, n_resamples, seed })
            }
            _ => Err(Error::Config(format!("unknown statistics {s:?} (exact | counts:<n>:<resamples>)"))),
        }
    }

    pub fn is_counts(&self) -> bool {
        matches!(self, Statistics::Counts { .. })
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Statistics::Exact => None,
            Statistics::Counts { seed, .. } => Some(*seed),
        }
    }

    pub fn with_seed(self, new_seed: u64) -> Self {
        match self {
            Statistics::Counts { n_per_setting, n_resamples, .. } => {
                Statistics::Counts { n_per_setting, n_resamples, seed: new_seed }
            }
            exact => exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 1.0, DEFAULT_POINTS)
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start + step * i as f64 })
            .collect()
    }

    fn validate(&self, name: &str, lo: f64, hi: f64) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config(format!("axis {name} needs at least 2 points")));
        }
        let ok = |x: f64| x.is_finite() && x >= lo - 1e-12 && x <= hi + 1e-12;
        if !ok(self.start) || !ok(self.stop) {
            return Err(Error::Config(format!("axis {name} must stay within [{lo}, {hi}]")));
        }
        Ok(())
    }
}

/// A curve in the fidelity sweeps: Alice's damping fixed, or tied to Bob's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Series {
    Fixed(f64),
    Tied(TiedSeries),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiedSeries {
    /// `p_a = p_b`.
    Diag,
}

impl Series {
    pub fn p_a(&self, p_b: f64) -> f64 {
        match self {
            Series::Fixed(p) => *p,
            Series::Tied(TiedSeries::Diag) => p_b,
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Series::Fixed(p) => write!(f, "p_a={}", format_number(*p)),
            Series::Tied(TiedSeries::Diag) => f.write_str("p_a=p_b"),
        }
    }
}

/// How Alice's damping is applied to the base resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AliceMethod {
    /// Amplitude damping channel on qubit A.
    #[default]
    Direct,
    /// Weighted mixture of the two source states.
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    #[serde(default)]
    pub resource: ResourceSpec,
    /// Axes in order; empty selects the defaults of the sweep kind.
    #[serde(default)]
    pub grid: Vec<GridAxis>,
    #[serde(default)]
    pub statistics: Statistics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<Series>>,
    #[serde(default)]
    pub alice_method: AliceMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn new(kind: SweepKind) -> Self {
        Self {
            kind,
            resource: ResourceSpec::Ideal,
            grid: Vec::new(),
            statistics: Statistics::Exact,
            series: None,
            alice_method: AliceMethod::Direct,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Grid axes with defaults filled in, validated against the sweep kind.
    pub fn axes(&self) -> Result<Vec<GridAxis>> {
        let (defaults, names, bounds): (Vec<GridAxis>, &[&str], &[(f64, f64)]) = match self.kind {
            SweepKind::FefContour | SweepKind::Sensitivity => {
                (vec![GridAxis::unit(), GridAxis::unit()], &["p_a", "p_b"], &[(0.0, 1.0), (0.0, 1.0)])
            }
            SweepKind::CalibBob => (vec![GridAxis::new(0.0, 45.0, DEFAULT_POINTS)], &["alpha_deg"], &[(-360.0, 360.0)]),
            SweepKind::CalibAlice => (
                vec![GridAxis::new(crate::channels::THETA_MIN_DEG, crate::channels::THETA_MAX_DEG, DEFAULT_POINTS)],
                &["theta_deg"],
                &[(crate::channels::THETA_MIN_DEG, crate::channels::THETA_MAX_DEG)],
            ),
            SweepKind::FidelityAdc | SweepKind::FidelityPdc => (vec![GridAxis::unit()], &["p_b"], &[(0.0, 1.0)]),
            SweepKind::EnhancementSearch => {
                (vec![GridAxis::new(0.0, 1.0, ENHANCEMENT_SCAN_POINTS)], &["p_a"], &[(0.0, 1.0)])
            }
        };
        let axes = if self.grid.is_empty() { defaults } else { self.grid.clone() };
        if axes.len() != names.len() {
            return Err(Error::Config(format!(
                "{:?} expects {} grid axes ({}), got {}",
                self.kind,
                names.len(),
                names.join(", "),
                axes.len()
            )));
        }
        for ((axis, name), (lo, hi)) in axes.iter().zip(names).zip(bounds) {
            axis.validate(name, *lo, *hi)?;
        }
        Ok(axes)
    }

    pub fn series_or_default(&self) -> Result<Vec<Series>> {
        let series = match (&self.series, self.kind) {
            (Some(s), _) => s.clone(),
            (None, SweepKind::FidelityPdc) => vec![Series::Fixed(0.0), Series::Fixed(0.5)],
            (None, _) => vec![Series::Fixed(0.0), Series::Fixed(0.7), Series::Tied(TiedSeries::Diag)],
        };
        if series.is_empty() {
            return Err(Error::Config("series list is empty".into()));
        }
        for s in &series {
            if let Series::Fixed(p) = s {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Config(format!("series p_a = {p} outside [0, 1]")));
                }
            }
        }
        Ok(series)
    }

    pub fn validate(&self) -> Result<()> {
        self.axes()?;
        if let ResourceSpec::Werner(v) = self.resource {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("Werner weight {v} outside [0, 1]")));
            }
        }
        if let Statistics::Counts { n_per_setting, n_resamples, .. } = self.statistics {
            if n_per_setting == 0 || n_resamples < 2 {
                return Err(Error::Config("counts statistics need n >= 1 and at least 2 resamples".into()));
            }
            if matches!(self.kind, SweepKind::FefContour | SweepKind::Sensitivity | SweepKind::EnhancementSearch) {
                return Err(Error::Config(format!("{:?} is computed from exact states only", self.kind)));
            }
        }
        if matches!(self.kind, SweepKind::FidelityAdc | SweepKind::FidelityPdc) {
            self.series_or_default()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
    Absent,
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Number(x) if x.is_finite() => s.serialize_f64(*x),
            Value::Text(t) => s.serialize_str(t),
            _ => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub config: SweepConfig,
    pub version: String,
    pub seed: Option<u64>,
    pub extra: JsonMap<String, Json>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub metadata: Metadata,
}

impl SweepResult {
    fn new(cfg: &SweepConfig, columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: Metadata {
                config: cfg.clone(),
                version: CODE_VERSION.to_string(),
                seed: cfg.statistics.seed(),
                extra: JsonMap::new(),
            },
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column, `None` where absent.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Number(x) => format_number(*x),
                    Value::Text(t) => t.clone(),
                    Value::Absent => String::new(),
                })
                .collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Twelve significant digits, `%g` style.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp).max(0) as usize, x))
    } else {
        format!("{}e{}", trim(mantissa), exp)
    }
}

/// Parallel-or-serial ordered map over indices.
fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Seed for grid point `index`, independent of evaluation order.
pub fn point_seed(master: u64, index: usize) -> u64 {
    stream_rng(master, index as u64).next_u64()
}

fn adc_pair(base: &DensityMatrix, p_a: f64, p_b: f64) -> Result<DensityMatrix> {
    crate::channels::damp_pair(base, (DampingFamily::Adc, p_a), (DampingFamily::Adc, p_b))
}

/// `f` of the base resource with amplitude damping on both sides.
fn contour_value(cfg: &SweepConfig, base: &DensityMatrix, p_a: f64, p_b: f64) -> Result<f64> {
    if cfg.resource.is_ideal() {
        f_adc_both(DampingPair::new(p_a, p_b)?)
    } else {
        Ok(fef(&adc_pair(base, p_a, p_b)?)?.f)
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

pub fn run_fef_contour(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let axes = cfg.axes()?;
    let base = cfg.resource.load()?;
    let (pa, pb) = (axes[0].values(), axes[1].values());
    let points: Vec<(f64, f64)> = pa.iter().flat_map(|&a| pb.iter().map(move |&b| (a, b))).collect();
    let values = map_indexed(points.len(), |i| contour_value(cfg, &base, points[i].0, points[i].1))?;
    let mut result = SweepResult::new(cfg, &["p_a", "p_b", "f"]);
    for (&(a, b), &f) in points.iter().zip(&values) {
        result.rows.push(vec![Value::Number(a), Value::Number(b), Value::Number(f)]);
    }
    let mut lines = Vec::new();
    for (name, line_pa) in [("flat", FLAT_LINE_PA), ("threshold", single_sided_threshold())] {
        let f: Vec<f64> = pb.iter().map(|&b| contour_value(cfg, &base, line_pa, b)).collect::<Result<_>>()?;
        let below_07: Vec<f64> = pb.iter().zip(&f).filter(|(b, _)| **b <= 0.7 + 1e-12).map(|(_, f)| *f).collect();
        lines.push(json!({
            "name": name,
            "p_a": line_pa,
            "p_b": pb,
            "f": f,
            "spread": spread(&f),
            "spread_p_b_le_0.7": if below_07.is_empty() { Json::Null } else { json!(spread(&below_07)) },
        }));
    }
    result.metadata.extra.insert("reference_lines".into(), Json::Array(lines));
    Ok(result)
}

/// `df/dp_b`: analytic for the ideal resource, central differences otherwise.
fn slope(cfg: &SweepConfig, base: &DensityMatrix, p_a: f64, p_b: f64) -> Result<f64> {
    if cfg.resource.is_ideal() {
        return dfdpb(DampingPair::new(p_a, p_b)?);
    }
    let f = |b: f64| contour_value(cfg, base, p_a, b);
    let h = FD_STEP;
    if p_b < h {
        Ok((-3.0 * f(p_b)? + 4.0 * f(p_b + h)? - f(p_b + 2.0 * h)?) / (2.0 * h))
    } else if p_b > 1.0 - h {
        Ok((3.0 * f(p_b)? - 4.0 * f(p_b - h)? + f(p_b - 2.0 * h)?) / (2.0 * h))
    } else {
        Ok((f(p_b + h)? - f(p_b - h)?) / (2.0 * h))
    }
}

pub fn run_sensitivity(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let axes = cfg.axes()?;
    let base = cfg.resource.load()?;
    let (pa, pb) = (axes[0].values(), axes[1].values());
    let points: Vec<(f64, f64)> = pa.iter().flat_map(|&a| pb.iter().map(move |&b| (a, b))).collect();
    let rows = map_indexed(points.len(), |i| {
        let (a, b) = points[i];
        let f = contour_value(cfg, &base, a, b)?;
        let d = if f > 0.5 && b < 1.0 { Value::Number(slope(cfg, &base, a, b)?) } else { Value::Absent };
        Ok(vec![Value::Number(a), Value::Number(b), Value::Number(f), d])
    })?;
    let mut result = SweepResult::new(cfg, &["p_a", "p_b", "f", "dfdpb"]);
    result.rows = rows;
    let trace: Vec<Json> = pa
        .iter()
        .map(|&a| {
            let crossing = classical_threshold(|b| contour_value(cfg, &base, a, b).unwrap_or(f64::NAN));
            json!({ "p_a": a, "p_b": crossing.ok() })
        })
        .collect();
    result.metadata.extra.insert("f_half_contour".into(), Json::Array(trace));
    Ok(result)
}

/// Damped state the calibration would measure at one control angle.
fn calibration_state(cfg: &SweepConfig, base: &DensityMatrix, angle: f64) -> Result<(f64, DensityMatrix)> {
    match cfg.kind {
        SweepKind::CalibBob => {
            let p = pb_from_alpha(angle);
            Ok((p, dilation_local(DampingFamily::Adc, p, base, Side::Bob.qubit())?))
        }
        _ => {
            let p = pa_from_theta(angle).map_err(|e| Error::Config(e.to_string()))?;
            let source = if cfg.resource.is_ideal() { AliceSource::Ideal } else { AliceSource::FromBase(base.clone()) };
            Ok((p, alice_mixture(p, &source)?))
        }
    }
}

pub fn run_calibration(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if !matches!(cfg.kind, SweepKind::CalibAlice | SweepKind::CalibBob) {
        return Err(Error::Config(format!("{:?} is not a calibration sweep", cfg.kind)));
    }
    let axes = cfg.axes()?;
    let base = cfg.resource.load()?;
    let side = if cfg.kind == SweepKind::CalibBob { Side::Bob } else { Side::Alice };
    let angles = axes[0].values();
    let angle_col = if side == Side::Bob { "alpha_deg" } else { "theta_deg" };
    let counts = cfg.statistics;
    let rows = map_indexed(angles.len(), |i| {
        let (p_theory, measured) = calibration_state(cfg, &base, angles[i])?;
        let mut row = vec![Value::Number(angles[i]), Value::Number(p_theory)];
        match counts {
            Statistics::Exact => {
                row.push(Value::Number(estimate_p(&measured, DampingFamily::Adc, side.qubit(), &base)?));
            }
            Statistics::Counts { n_per_setting, n_resamples, seed } => {
                let point = point_seed(seed, i);
                let estimates = (0..n_resamples)
                    .map(|r| {
                        let recs = simulate_counts(&measured, &full_settings(2), n_per_setting, point_seed(point, r))?;
                        let rho = state_tomo_mle(&recs, MLE_TOL)?;
                        estimate_p(&rho, DampingFamily::Adc, side.qubit(), &base)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let s = summarize(&estimates);
                row.push(Value::Number(s.mean));
                row.push(Value::Number(s.std));
            }
        }
        Ok(row)
    })?;
    let mut columns = vec![angle_col, "p_theory", "p_estimated"];
    if counts.is_counts() {
        columns.push("p_err");
    }
    let mut result = SweepResult::new(cfg, &columns);
    result.rows = rows;
    Ok(result)
}

/// Base resource damped on both sides for the fidelity sweeps.
pub fn damped_resource(
    base: &DensityMatrix,
    ideal: bool,
    method: AliceMethod,
    p_a: f64,
    bob: (DampingFamily, f64),
) -> Result<DensityMatrix> {
    let after_alice = match method {
        AliceMethod::Direct => apply_local(&crate::channels::adc(p_a)?, base, 0)?,
        AliceMethod::Mixture => {
            let source = if ideal { AliceSource::Ideal } else { AliceSource::FromBase(base.clone()) };
            alice_mixture(p_a, &source)?
        }
    };
    apply_local(&bob.0.channel(bob.1)?, &after_alice, 1)
}

fn run_fidelity(cfg: &SweepConfig, bob_family: DampingFamily) -> Result<SweepResult> {
    cfg.validate()?;
    let axes = cfg.axes()?;
    let base = cfg.resource.load()?;
    let ideal = cfg.resource.is_ideal();
    let series = cfg.series_or_default()?;
    let pb = axes[0].values();
    let points: Vec<(usize, f64)> = (0..series.len()).flat_map(|s| pb.iter().map(move |&b| (s, b))).collect();
    let exact_f = |method: AliceMethod, s: usize, b: f64| -> Result<f64> {
        let rho = damped_resource(&base, ideal, method, series[s].p_a(b), (bob_family, b))?;
        composite_teleport_fidelity(&rho, ProcessMode::Exact)
    };
    let rows = map_indexed(points.len(), |i| {
        let (s, b) = points[i];
        let p_a = series[s].p_a(b);
        let mut row = vec![Value::Text(series[s].to_string()), Value::Number(p_a), Value::Number(b)];
        match cfg.statistics {
            Statistics::Exact => row.push(Value::Number(exact_f(cfg.alice_method, s, b)?)),
            Statistics::Counts { n_per_setting, n_resamples, seed } => {
                let rho = damped_resource(&base, ideal, cfg.alice_method, p_a, (bob_family, b))?;
                let est = monte_carlo_fidelity_error(&rho, n_per_setting, n_resamples, point_seed(seed, i))?;
                row.push(Value::Number(est.mean));
                row.push(Value::Number(est.std));
            }
        }
        Ok(row)
    })?;
    let mut columns = vec!["series", "p_a", "p_b", "F"];
    if cfg.statistics.is_counts() {
        columns.push("F_err");
    }
    let mut result = SweepResult::new(cfg, &columns);
    result.rows = rows;

    // per-series spreads, from the tabulated metric
    let mut spreads = JsonMap::new();
    for (s, label) in series.iter().enumerate() {
        let vals: Vec<(f64, f64)> = points
            .iter()
            .zip(&result.rows)
            .filter(|((si, _), _)| *si == s)
            .filter_map(|((_, b), row)| row[3].as_f64().map(|f| (*b, f)))
            .collect();
        let all: Vec<f64> = vals.iter().map(|v| v.1).collect();
        let low: Vec<f64> = vals.iter().filter(|v| v.0 <= 0.8 + 1e-12).map(|v| v.1).collect();
        spreads.insert(
            label.to_string(),
            json!({ "spread": spread(&all), "spread_p_b_le_0.8": if low.is_empty() { Json::Null } else { json!(spread(&low)) } }),
        );
    }
    result.metadata.extra.insert("series_spread".into(), Json::Object(spreads));

    // both ways of damping Alice's side, compared in exact mode
    let diffs = map_indexed(points.len(), |i| {
        let (s, b) = points[i];
        Ok((exact_f(AliceMethod::Mixture, s, b)? - exact_f(AliceMethod::Direct, s, b)?).abs())
    })?;
    result
        .metadata
        .extra
        .insert("max_abs_mixture_minus_direct".into(), json!(diffs.iter().copied().fold(0.0, f64::max)));
    Ok(result)
}

pub fn run_fidelity_adc(cfg: &SweepConfig) -> Result<SweepResult> {
    run_fidelity(cfg, DampingFamily::Adc)
}

pub fn run_fidelity_pdc(cfg: &SweepConfig) -> Result<SweepResult> {
    run_fidelity(cfg, DampingFamily::Pdc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct EnhancementReport {
    /// Where `F(p_a = 0, p_b)` crosses 2/3; absent when it does not.
    pub p_b_star: Option<f64>,
    pub p_a_opt: Option<f64>,
    pub F_max: Option<f64>,
    pub F_at_pa0: Option<f64>,
    /// `F(0, 0)` and `F(0, 1)`, reported when there is no crossing.
    pub boundary: Option<[f64; 2]>,
    pub scan_p_a: Vec<f64>,
    pub scan_f: Vec<f64>,
}

/// Teleportation fidelity with amplitude damping of strengths `p_a`, `p_b`.
pub fn two_sided_fidelity(base: &DensityMatrix, ideal: bool, method: AliceMethod, p_a: f64, p_b: f64) -> Result<f64> {
    composite_teleport_fidelity(&damped_resource(base, ideal, method, p_a, (DampingFamily::Adc, p_b))?, ProcessMode::Exact)
}

pub fn enhancement_search(cfg: &SweepConfig) -> Result<EnhancementReport> {
    cfg.validate()?;
    let axes = cfg.axes()?;
    let base = cfg.resource.load()?;
    let ideal = cfg.resource.is_ideal();
    let f = |p_a: f64, p_b: f64| two_sided_fidelity(&base, ideal, cfg.alice_method, p_a, p_b);
    let classical = 2.0 / 3.0;
    let (f0, f1) = (f(0.0, 0.0)?, f(0.0, 1.0)?);
    let no_crossing = |_: ()| EnhancementReport {
        p_b_star: None,
        p_a_opt: None,
        F_max: None,
        F_at_pa0: None,
        boundary: Some([f0, f1]),
        scan_p_a: Vec::new(),
        scan_f: Vec::new(),
    };
    if (f0 - classical) * (f1 - classical) > 0.0 || f0 < classical {
        return Ok(no_crossing(()));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > CROSSING_TOL {
        let mid = 0.5 * (lo + hi);
        if f(0.0, mid)? >= classical {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_b_star = 0.5 * (lo + hi);
    let scan_p_a = axes[0].values();
    let scan_f = map_indexed(scan_p_a.len(), |i| f(scan_p_a[i], p_b_star))?;
    let k = (0..scan_f.len()).fold(0, |best, i| if scan_f[i] > scan_f[best] { i } else { best });
    Ok(EnhancementReport {
        p_b_star: Some(p_b_star),
        p_a_opt: Some(scan_p_a[k]),
        F_max: Some(scan_f[k]),
        F_at_pa0: Some(f(0.0, p_b_star)?),
        boundary: None,
        scan_p_a,
        scan_f,
    })
}

/// Enhancement search as a table of the `p_a` scan, report in the metadata.
pub fn run_enhancement_search(cfg: &SweepConfig) -> Result<SweepResult> {
    let report = enhancement_search(cfg)?;
    let mut result = SweepResult::new(cfg, &["p_a", "F"]);
    result.rows = report
        .scan_p_a
        .iter()
        .zip(&report.scan_f)
        .map(|(&a, &f)| vec![Value::Number(a), Value::Number(f)])
        .collect();
    result.metadata.extra.insert("report".into(), report_json(&report));
    Ok(result)
}

/// `{p_b_star, p_a_opt, F_max, F_at_pa0}` plus boundary values when absent.
pub fn report_json(report: &EnhancementReport) -> Json {
    let mut m = JsonMap::new();
    m.insert("p_b_star".into(), json!(report.p_b_star));
    m.insert("p_a_opt".into(), json!(report.p_a_opt));
    m.insert("F_max".into(), json!(report.F_max));
    m.insert("F_at_pa0".into(), json!(report.F_at_pa0));
    if let Some([a, b]) = report.boundary {
        m.insert("F_pa0_pb0".into(), json!(a));
        m.insert("F_pa0_pb1".into(), json!(b));
    }
    Json::Object(m)
}

/// Dispatches on the sweep kind.
pub fn run(cfg: &SweepConfig) -> Result<SweepResult> {
    match cfg.kind {
        SweepKind::FefContour => run_fef_contour(cfg),
        SweepKind::Sensitivity => run_sensitivity(cfg),
        SweepKind::CalibAlice | SweepKind::CalibBob => run_calibration(cfg),
        SweepKind::FidelityAdc => run_fidelity_adc(cfg),
        SweepKind::FidelityPdc => run_fidelity_pdc(cfg),
        SweepKind::EnhancementSearch => run_enhancement_search(cfg),
    }
}
