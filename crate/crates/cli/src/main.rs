use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use symbill_cli::{parse_config, run, CliError, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "symbill", version, about = "Outer symplectic billiard experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sampled directions and starts (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write scatter.svg for orbit-based experiments.
    #[arg(long, global = true)]
    svg: bool,
    /// Inline body spec, e.g. '{"kind":"pball","p":1.5}'.
    #[arg(long, global = true)]
    body: Option<String>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// T²-orbit from x0 with per-step reflection data.
    Orbit,
    /// Distance between T² and the time-1 flow over a radius grid.
    Shadow,
    /// Decay of the three estimate-lemma quantities with the radius.
    EpsDecay,
    /// Growth of |x_k|_H² along a long orbit against the constant C̄.
    Escape,
    /// Multistart search for k-periodic orbits and the radius bound ρ(k).
    Periodic,
    /// Symmetrization, Reeb and involution identities, and V = −2X_H.
    DualityCheck,
    /// Sampled estimates of the geometric constants.
    Constants,
    /// Far-field orbit about a constant-width curve.
    Demo,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Orbit => "orbit",
            Command::Shadow => "shadow",
            Command::EpsDecay => "eps-decay",
            Command::Escape => "escape",
            Command::Periodic => "periodic",
            Command::DualityCheck => "duality-check",
            Command::Constants => "constants",
            Command::Demo => "demo",
        }
    }
}

/// Merges the config file with flag overrides; flags win.
fn assemble(cli: &Cli) -> Result<String, CliError> {
    let mut doc = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<Value>(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => json!({}),
    };
    let Value::Object(map) = &mut doc else {
        return Err(CliError::Config("configuration must be a JSON object".into()));
    };
    let name = cli.command.name();
    match map.get("experiment") {
        None => {
            map.insert("experiment".into(), json!({ "name": name }));
        }
        Some(e) if e.get("name").and_then(Value::as_str) == Some(name) => {}
        Some(_) => {
            return Err(CliError::Config(format!(
                "experiment: config names a different experiment than `{name}`"
            )))
        }
    }
    if let Some(body) = &cli.body {
        let v: Value = serde_json::from_str(body).map_err(|e| CliError::Config(format!("body: {e}")))?;
        map.insert("body".into(), v);
    }
    if let Some(seed) = cli.seed {
        map.insert("seed".into(), json!(seed));
    }
    if cli.out.is_some() || cli.svg {
        let output = map.entry("output").or_insert_with(|| json!({}));
        let Value::Object(o) = output else {
            return Err(CliError::Config("output must be an object".into()));
        };
        if let Some(dir) = &cli.out {
            o.insert("dir".into(), json!(dir));
        }
        if cli.svg {
            o.insert("svg".into(), json!(true));
        }
    }
    Ok(doc.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match assemble(&cli).and_then(|text| parse_config(&text)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    ExitCode::from(run(&config, cli.quiet) as u8)
}
