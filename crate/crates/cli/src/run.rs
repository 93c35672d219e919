//! Argument parsing, dispatch and the single output writer.

use std::path::PathBuf;

use ckn_core::spectral::{BAxis, ScanGrid};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::commands::*;
use crate::config::{Config, OutputFormat};
use crate::error::{CliError, CliResult};
use crate::output::{scan_csv, to_json};

#[derive(Debug, Parser)]
#[command(
    name = "ckn",
    version,
    about = "Sharp constants and symmetry checks for the monomial CKN inequality"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON configuration file; the classical d = 3 case when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Samples for the geometry batteries.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Polynomial degree of the Rayleigh-Ritz bases.
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// Print a one-line summary instead of the document.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived parameters, theorem hypotheses and regime.
    Derive,
    /// Z in closed form and by quadrature, and C_opt.
    Constant,
    /// Optimizer ratio, Euler-Lagrange residual and tight equality.
    VerifyOptimizer {
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Seeded geometry batteries.
    Geometry {
        #[arg(long, hide = true)]
        inject_fault: Option<f64>,
    },
    /// First sphere eigenvalue, axis residual and radial gap.
    Eigen,
    /// Detector over an (a, b) grid, as CSV by default.
    Scan(ScanArgs),
    /// Every suite on one configuration.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BAxisArg {
    Absolute,
    Offset,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// `LO:HI` or a single value.
    #[arg(long, default_value = "-1:0.4", allow_hyphen_values = true)]
    pub a_range: String,
    /// `LO:HI` or a single value, read as b or b - a per `--b-axis`.
    #[arg(long, default_value = "0:0.9", allow_hyphen_values = true)]
    pub b_range: String,
    #[arg(long, value_enum, default_value_t = BAxisArg::Offset)]
    pub b_axis: BAxisArg,
    /// `N` or `NxM` (a steps by b steps).
    #[arg(long, default_value = "20")]
    pub steps: String,
}

pub fn parse_range(s: &str) -> CliResult<(f64, f64)> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("malformed range {s:?}: expected LO:HI")))
    };
    match s.split_once(':') {
        Some((lo, hi)) => Ok((num(lo)?, num(hi)?)),
        None => {
            let v = num(s)?;
            Ok((v, v))
        }
    }
}

pub fn parse_steps(s: &str) -> CliResult<(usize, usize)> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("malformed steps {s:?}: expected N or NxM")))
    };
    match s.split_once('x') {
        Some((a, b)) => Ok((num(a)?, num(b)?)),
        None => {
            let n = num(s)?;
            Ok((n, n))
        }
    }
}

impl ScanArgs {
    pub fn grid(&self) -> CliResult<ScanGrid> {
        let (a_steps, b_steps) = parse_steps(&self.steps)?;
        let grid = ScanGrid {
            a_range: parse_range(&self.a_range)?,
            b_range: parse_range(&self.b_range)?,
            b_axis: match self.b_axis {
                BAxisArg::Absolute => BAxis::Absolute,
                BAxisArg::Offset => BAxis::Offset,
            },
            a_steps,
            b_steps,
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema: &'static str,
    command: &'static str,
    config: &'a Config,
    pass: bool,
    result: &'a T,
    timings: &'a Timings,
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    #[serde(flatten)]
    report: &'a Report,
    timings: &'a Timings,
}

/// Rendered output of one command.
pub struct Rendered {
    pub document: String,
    pub summary: String,
    pub pass: bool,
}

fn envelope<T: Serialize>(
    command: &'static str,
    config: &Config,
    result: &T,
    checks: &[Check],
    timings: &Timings,
) -> CliResult<Rendered> {
    let pass = all_pass(checks);
    let document = to_json(&Envelope {
        schema: SCHEMA_VERSION,
        command,
        config,
        pass,
        result,
        timings,
    })?;
    let failing: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passes())
        .map(|c| c.name.as_str())
        .collect();
    let summary = if pass {
        format!("PASS: {command}")
    } else {
        format!("FAIL: {command} ({})", failing.join(", "))
    };
    Ok(Rendered {
        document,
        summary,
        pass,
    })
}

pub fn load_config(global: &GlobalArgs) -> CliResult<Config> {
    let mut config = match &global.config {
        Some(path) => Config::load(path)?,
        None => Config::classical(),
    };
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    Ok(config)
}

/// Runs one command and renders its document in the requested format.
pub fn execute(cli: &Cli, config: &Config) -> CliResult<Rendered> {
    let g = &cli.global;
    let samples = g.samples.unwrap_or(DEFAULT_SAMPLES);
    let degree = g.degree.unwrap_or(DEFAULT_DEGREE);
    let is_scan = matches!(cli.command, Command::Scan(_));
    let format = g.format.or(config.output.format).unwrap_or(if is_scan {
        OutputFormat::Csv
    } else {
        OutputFormat::Json
    });
    if format == OutputFormat::Csv && !is_scan {
        return Err(CliError::Config(
            "csv output is only available for scan".into(),
        ));
    }
    let mut timings = Timings::default();
    match &cli.command {
        Command::Derive => {
            let r = timings.time("derive", || cmd_derive(config))?;
            envelope("derive", config, &r, &r.checks, &timings)
        }
        Command::Constant => {
            let r = timings.time("constant", || cmd_constant(config))?;
            envelope("constant", config, &r, &r.checks, &timings)
        }
        Command::VerifyOptimizer { s, t } => {
            let r = timings.time("optimizer", || cmd_verify_optimizer(config, *s, *t))?;
            envelope("verify-optimizer", config, &r, &r.checks, &timings)
        }
        Command::Geometry { inject_fault } => {
            let r = timings.time("geometry", || cmd_geometry(config, samples, *inject_fault))?;
            envelope("geometry", config, &r, &r.checks, &timings)
        }
        Command::Eigen => {
            let r = timings.time("eigen", || cmd_eigen(config, degree))?;
            envelope("eigen", config, &r, &r.checks, &timings)
        }
        Command::Scan(args) => {
            let grid = args.grid()?;
            let r = timings.time("scan", || cmd_scan(config, &grid, degree))?;
            let mut out = envelope("scan", config, &r, &r.checks, &timings)?;
            if format == OutputFormat::Csv {
                out.document = scan_csv(&r.rows)?;
            }
            Ok(out)
        }
        Command::Report => {
            let options = ReportOptions { samples, degree };
            let report = cmd_report(config, options, &mut timings)?;
            Ok(Rendered {
                document: to_json(&ReportDocument {
                    report: &report,
                    timings: &timings,
                })?,
                summary: report.summary(),
                pass: report.pass,
            })
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("CKN_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!("CKN_THREADS = {v:?} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn write_output(cli: &Cli, config: &Config, rendered: &Rendered) -> CliResult<()> {
    match cli.global.out.as_ref().or(config.output.path.as_ref()) {
        Some(p) => std::fs::write(p, &rendered.document)?,
        None if !cli.global.quiet => print!("{}", rendered.document),
        None => {}
    }
    if cli.global.quiet {
        println!("{}", rendered.summary);
    }
    Ok(())
}

/// Process exit code: `0` when every enforced check holds, `1` on a failed
/// check or numerical failure, `2` on configuration and domain errors.
pub fn run(cli: Cli) -> i32 {
    let result = configure_threads()
        .and_then(|_| load_config(&cli.global))
        .and_then(|config| {
            let r = execute(&cli, &config)?;
            write_output(&cli, &config, &r).map(|_| r.pass)
        });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_steps_parse() {
        assert_eq!(parse_range("-1:0.4").unwrap(), (-1.0, 0.4));
        assert_eq!(parse_range("0.25").unwrap(), (0.25, 0.25));
        assert!(parse_range("1:").is_err());
        assert!(parse_range("a:b").is_err());
        assert_eq!(parse_steps("20").unwrap(), (20, 20));
        assert_eq!(parse_steps("3x5").unwrap(), (3, 5));
        assert!(parse_steps("3x").is_err());
    }

    #[test]
    fn reversed_range_is_a_config_error() {
        let args = ScanArgs {
            a_range: "0.4:-1".into(),
            b_range: "0:0.9".into(),
            b_axis: BAxisArg::Offset,
            steps: "20".into(),
        };
        assert_eq!(args.grid().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
