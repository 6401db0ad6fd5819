use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use seqrev_cli::{
    cmd_risk, cmd_simulate, cmd_sweep, cmd_thresholds, cmd_value, cmd_verify, CliError, CommandOutput, RunConfig,
    SweepFormat, CONFIG_ENV,
};

#[derive(Parser)]
#[command(name = "seqrev", version, about = "Sequential drift-sign test with revisable decisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override a config key, e.g. `--set n_paths=1000` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[arg(long, global = true)]
    mu: Option<String>,
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true)]
    c0: Option<String>,
    #[arg(long, global = true)]
    c1: Option<String>,
    #[arg(long, global = true)]
    c2: Option<String>,
    #[arg(long, global = true)]
    dt: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long = "n-paths", global = true)]
    n_paths: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for A, B and K.
    Thresholds,
    /// Tabulate V(x), U(x, 1), U(x, -1) as CSV.
    Value,
    /// Dump one simulated path (t, x, m, d) as CSV.
    Simulate,
    /// Monte Carlo risk of a threshold rule.
    Risk,
    /// Risk over a grid of perturbed thresholds.
    Sweep {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check the structural properties of the value functions.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        let named = [
            ("mu", &self.mu),
            ("p", &self.p),
            ("c0", &self.c0),
            ("c1", &self.c1),
            ("c2", &self.c2),
            ("dt", &self.dt),
            ("seed", &self.seed),
            ("n_paths", &self.n_paths),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }
}

fn run(cli: &Cli) -> Result<CommandOutput, CliError> {
    let file = match &cli.common.config {
        Some(path) => Some(std::fs::read_to_string(path)?),
        None => None,
    };
    let config = RunConfig::from_sources(file.as_deref(), &cli.common.overrides()?)?;
    let output = match &cli.command {
        Command::Thresholds => cmd_thresholds(&config)?,
        Command::Value => cmd_value(&config)?,
        Command::Simulate => cmd_simulate(&config)?,
        Command::Risk => cmd_risk(&config)?,
        Command::Sweep { format } => {
            let format = match format {
                Format::Json => SweepFormat::Json,
                Format::Csv => SweepFormat::Csv,
            };
            cmd_sweep(&config, format)?
        }
        Command::Verify => cmd_verify(&config)?,
    };
    match &cli.common.out {
        Some(path) => std::fs::write(path, &output.body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(output.body.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => ExitCode::from(out.exit_code as u8),
        Err(e) => {
            eprintln!("seqrev: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
