use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noisy_teleport::harness::{self, AliceMethod, ResourceSpec, Statistics, SweepConfig, SweepKind, SweepResult};
use noisy_teleport::state::AxialState;
use noisy_teleport::teleport::{average_fidelity_direct, teleport};
use noisy_teleport::tomography::{composite_teleport_fidelity, ProcessMode};
use noisy_teleport::{DensityMatrix, Error, Result};
use serde_json::{json, Value as Json};

#[derive(Parser)]
#[command(name = "noisy-teleport", version, about = "Teleportation through damped channels: sweeps and single runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fully entangled fraction over (p_a, p_b) with damping on both sides.
    FefContour(Common),
    /// df/dp_b over (p_a, p_b), masked where f <= 1/2.
    Sensitivity(Common),
    /// Estimated damping strength against the control angle.
    Calib {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        side: Option<CalibSide>,
    },
    /// Teleportation fidelity with amplitude damping on Bob's qubit.
    FidelityAdc(Sweep),
    /// Teleportation fidelity with phase damping on Bob's qubit.
    FidelityPdc(Sweep),
    /// Where Alice's extra damping lifts the fidelity back above 2/3.
    Enhance(Sweep),
    /// Teleports one input state and reports each measurement outcome.
    Teleport {
        #[command(flatten)]
        common: Common,
        /// Axial label (H, V, D, A, R, L) or file:<path> holding a one-qubit density matrix.
        #[arg(long, default_value = "H")]
        input: String,
    },
}

#[derive(Args)]
struct Common {
    /// JSON sweep configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for counts statistics.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// ideal | werner:<v> | file:<path>
    #[arg(long)]
    resource: Option<String>,
    /// exact | counts:<n>:<resamples>
    #[arg(long)]
    stats: Option<String>,
}

#[derive(Args)]
struct Sweep {
    #[command(flatten)]
    common: Common,
    /// How Alice's damping is applied.
    #[arg(long, value_enum)]
    alice_method: Option<Method>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CalibSide {
    Alice,
    Bob,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Direct,
    Mixture,
}

fn load_config(common: &Common, kind: SweepKind) -> Result<SweepConfig> {
    let mut cfg = match &common.config {
        Some(path) => SweepConfig::read(path)?,
        None => SweepConfig::new(kind),
    };
    if cfg.kind != kind {
        return Err(Error::Config(format!("config describes {:?}, command runs {:?}", cfg.kind, kind)));
    }
    if let Some(r) = &common.resource {
        cfg.resource = r.parse()?;
    }
    let seed = common.seed.or(cfg.statistics.seed()).unwrap_or(0);
    if let Some(s) = &common.stats {
        cfg.statistics = Statistics::parse(s, seed)?;
    } else if common.seed.is_some() {
        cfg.statistics = cfg.statistics.with_seed(seed);
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn sweep_config(sweep: &Sweep, kind: SweepKind) -> Result<SweepConfig> {
    let mut cfg = load_config(&sweep.common, kind)?;
    match sweep.alice_method {
        Some(Method::Direct) => cfg.alice_method = AliceMethod::Direct,
        Some(Method::Mixture) => cfg.alice_method = AliceMethod::Mixture,
        None => {}
    }
    Ok(cfg)
}

fn calib_kind(common: &Common, side: Option<CalibSide>) -> Result<SweepKind> {
    Ok(match side {
        Some(CalibSide::Alice) => SweepKind::CalibAlice,
        Some(CalibSide::Bob) => SweepKind::CalibBob,
        None => match &common.config {
            Some(path) => SweepConfig::read(path)?.kind,
            None => SweepKind::CalibBob,
        },
    })
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn write_result(result: &SweepResult, common: &Common, json_body: Option<Json>) -> Result<()> {
    let out = common.out.as_deref();
    match common.format {
        Format::Csv => {
            emit(&result.to_csv_string(), out)?;
            if let Some(path) = out {
                let meta = serde_json::to_string_pretty(&result.metadata)?;
                fs::write(sidecar_path(path), meta + "\n")?;
            }
        }
        Format::Json => {
            let text = match json_body {
                Some(body) => serde_json::to_string_pretty(&body)?,
                None => result.to_json(),
            };
            emit(&(text + "\n"), out)?;
        }
    }
    Ok(())
}

fn run_sweep(cfg: &SweepConfig, common: &Common) -> Result<()> {
    let result = harness::run(cfg)?;
    write_result(&result, common, None)
}

fn enhance(cfg: &SweepConfig, common: &Common) -> Result<()> {
    let result = harness::run_enhancement_search(cfg)?;
    let mut body = result.metadata.extra["report"].clone();
    body["scan"] = json!({ "p_a": result.column("p_a"), "F": result.column("F") });
    body["metadata"] = serde_json::to_value(&result.metadata)?;
    write_result(&result, common, Some(body))
}

fn parse_input(input: &str) -> Result<DensityMatrix> {
    if let Some(path) = input.strip_prefix("file:") {
        let rho = DensityMatrix::read(path)?;
        if rho.num_qubits() != 1 {
            return Err(Error::Config(format!("{path} is not a one-qubit state")));
        }
        return Ok(rho);
    }
    let mut chars = input.chars();
    match (chars.next().and_then(AxialState::from_char), chars.next()) {
        (Some(s), None) => Ok(s.state().density()),
        _ => Err(Error::Config(format!("unknown input {input:?} (H, V, D, A, R, L or file:<path>)"))),
    }
}

fn teleport_once(common: &Common, input: &str) -> Result<()> {
    if common.config.is_some() || common.stats.is_some() || common.seed.is_some() {
        return Err(Error::Config("teleport takes only --input, --resource, --out and --format".into()));
    }
    let resource: ResourceSpec = common.resource.as_deref().unwrap_or("ideal").parse()?;
    let rho_ab = resource.load()?;
    let rho_in = parse_input(input)?;
    let outcomes = teleport(&rho_in, &rho_ab)?;
    let fidelity_to_input = |o: &noisy_teleport::teleport::TeleportOutcome| -> Result<Option<f64>> {
        if o.probability <= 0.0 {
            return Ok(None);
        }
        noisy_teleport::state::state_fidelity(&rho_in, &o.bob_corrected).map(Some)
    };
    let text = match common.format {
        Format::Csv => {
            let mut text = String::from("outcome,probability,fidelity\n");
            for o in &outcomes {
                let f = fidelity_to_input(o)?.map(harness::format_number).unwrap_or_default();
                text.push_str(&format!("{},{},{}\n", o.label.as_str(), harness::format_number(o.probability), f));
            }
            text
        }
        Format::Json => {
            let mut rows = Vec::new();
            for o in &outcomes {
                let mut row = serde_json::to_value(o)?;
                row["fidelity"] = json!(fidelity_to_input(o)?);
                rows.push(row);
            }
            let body = json!({
                "input": input,
                "resource": resource,
                "outcomes": rows,
                "average_fidelity": average_fidelity_direct(&rho_ab)?,
                "composite_fidelity": composite_teleport_fidelity(&rho_ab, ProcessMode::Exact)?,
                "version": harness::CODE_VERSION,
            });
            serde_json::to_string_pretty(&body)? + "\n"
        }
    };
    emit(&text, common.out.as_deref())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::FefContour(c) => run_sweep(&load_config(&c, SweepKind::FefContour)?, &c),
        Command::Sensitivity(c) => run_sweep(&load_config(&c, SweepKind::Sensitivity)?, &c),
        Command::Calib { common, side } => {
            let kind = calib_kind(&common, side)?;
            run_sweep(&load_config(&common, kind)?, &common)
        }
        Command::FidelityAdc(s) => run_sweep(&sweep_config(&s, SweepKind::FidelityAdc)?, &s.common),
        Command::FidelityPdc(s) => run_sweep(&sweep_config(&s, SweepKind::FidelityPdc)?, &s.common),
        Command::Enhance(s) => enhance(&sweep_config(&s, SweepKind::EnhancementSearch)?, &s.common),
        Command::Teleport { common, input } => teleport_once(&common, &input),
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("noisy-teleport: {line}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let stuck = Error::NonConvergence {
            iterations: 5000,
            log_likelihood: -1.0,
            best: Box::new(DensityMatrix::maximally_mixed(1)),
        };
        assert_eq!(exit_code(&stuck), 3);
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Domain("x".into())), 2);
    }

    #[test]
    fn sidecar_replaces_extension() {
        assert_eq!(sidecar_path(Path::new("a/b.csv")), PathBuf::from("a/b.meta.json"));
    }
}
