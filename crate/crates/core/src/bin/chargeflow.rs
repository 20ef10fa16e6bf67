use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use chargeflow::gaussian::Case;
use chargeflow::scenario::{self, ConfigError, RunConfig, Scenario, ScenarioError};

const AFTER_HELP: &str = "\
Scenarios and CSV columns:
  gauss-map    x1, x2, delta_qd        closed-form charge difference over a probe grid
  gauss-scan   x_g, p0, delta_qd       closed-form charge difference for fixed probes
  laser-sweep  f0, a0, delta_qd, delta_q1, delta_qc, norm_drift, halving_change, status
               pulse -> excitation -> charge between the probes, one row per peak field
  verify       JSON report: checks[] with name, passed, tolerance, values, error

CSV files start with '#' lines: the scenario, the fully resolved config as
JSON, one line per column, and run metadata.

Config precedence (lowest first): built-in defaults, --config file,
--override key=value (dotted paths, values parsed as JSON, applied in order),
--case and --out. Unknown keys are rejected.

Exit codes: 0 ok, 1 verification failed, 2 config or I/O error,
3 numerical convergence/accuracy error.";

#[derive(Parser, Debug)]
#[command(name = "chargeflow", version, about = "Extra probability charge carried by a wave packet on a plane wave", after_help = AFTER_HELP)]
struct Cli {
    /// gauss-map | gauss-scan | laser-sweep | verify
    scenario: String,
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout if absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reference packet A, B, C or D
    #[arg(long)]
    case: Option<String>,
    /// key=value, dotted key into the config document; repeatable
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn resolve(cli: &Cli) -> Result<(Scenario, RunConfig), ConfigError> {
    let scenario: Scenario = cli.scenario.parse()?;
    let text = fs::read_to_string(&cli.config)?;
    let mut overrides = cli.overrides.clone();
    if let Some(c) = &cli.case {
        let case: Case = c.parse().map_err(|e: chargeflow::Error| ConfigError::Invalid(e.to_string()))?;
        overrides.push(format!("case=\"{case}\""));
    }
    if let Some(p) = &cli.out {
        overrides.push(format!("output={}", serde_json::Value::String(p.display().to_string())));
    }
    overrides.push(format!("scenario=\"{scenario}\""));
    Ok((scenario, RunConfig::load(&text, &overrides)?))
}

fn run(cli: &Cli) -> Result<i32, ScenarioError> {
    let (scenario, cfg) = resolve(cli)?;
    let code = match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(fs::File::create(path)?);
            let code = scenario::run(scenario, &cfg, &mut w);
            w.flush()?;
            code?
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            scenario::run(scenario, &cfg, &mut w)?
        }
    };
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("chargeflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
