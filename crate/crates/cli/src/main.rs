//! `hypercircle`: error-bound tables, β sweeps, estimates and verification suites.
//!
//! Exit status is 0 on success, 1 on usage errors and 2 on numerical failures.
//! Errors are printed as a single line prefixed with `error[usage]:`,
//! `error[numerical]:` or `error[io]:`.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypercircle::estimator::{estimate, REPORT_CSV_HEADER};
use hypercircle::mesh::MeshError;
use hypercircle::tables::{beta_sweep, compute_table, dedup_betas, sweep_csv, table_csv};
use hypercircle::verify::{run_suite, tap_report, true_error, ManufacturedSolution, SuiteConfig};
use hypercircle::{generate, DomainId, Error, KappaOptions, SolverOptions};

#[derive(Parser, Debug)]
#[command(
    name = "hypercircle",
    version,
    about = "Explicit error bounds for P1 Neumann problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the uniform mesh of a domain.
    Mesh {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = MeshFormat::Text)]
        format: MeshFormat,
    },
    /// Tabulate h, κ_h, C₁(h), M_h and the κ_h rate over levels.
    Table {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100.0)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// κ_h for each level and β.
    BetaSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated list of β values.
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10,100,1000")]
        betas: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// A priori and a posteriori bounds for data from a manufactured solution.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100.0)]
        beta: f64,
        /// One of exp_x, exp_diag, zero.
        #[arg(long = "f", default_value = "exp_x")]
        f: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the verification suite and print TAP.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100.0)]
        beta: f64,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value = "square")]
    domain: DomainId,
    /// Single refinement level (≥ 1).
    #[arg(long, conflicts_with = "levels")]
    level: Option<u32>,
    /// Level range `A..B` (inclusive) or a single level.
    #[arg(long)]
    levels: Option<LevelRange>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative residual tolerance of the linear solves.
    #[arg(long, env = "HYPERCIRCLE_TOL", default_value_t = 1e-10)]
    tol: f64,
    /// Worker threads for the boundary-basis solves; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MeshFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct LevelRange {
    first: u32,
    last: u32,
}

impl FromStr for LevelRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("invalid level `{t}`"))
        };
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let l = parse(s)?;
                (l, l)
            }
        };
        if first == 0 {
            return Err("levels start at 1".into());
        }
        if last < first {
            return Err(format!("empty level range {first}..{last}"));
        }
        Ok(Self { first, last })
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, msg) = match self {
            Failure::Usage(m) => ("usage", m),
            Failure::Numerical(m) => ("numerical", m),
            Failure::Io(m) => ("io", m),
        };
        write!(f, "error[{tag}]: {}", msg.replace('\n', " "))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::Mesh(MeshError::InvalidLevel(_))
            | Error::Mesh(MeshError::BudgetExceeded { .. })
            | Error::Mesh(MeshError::UnknownDomain(_)) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<MeshError> for Failure {
    fn from(e: MeshError) -> Self {
        Error::Mesh(e).into()
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl Common {
    fn levels(&self) -> std::ops::RangeInclusive<u32> {
        match (self.level, self.levels) {
            (Some(l), _) => l..=l,
            (None, Some(r)) => r.first..=r.last,
            (None, None) => 1..=1,
        }
    }

    fn single_level(&self) -> Result<u32, Failure> {
        let r = self.levels();
        if r.start() != r.end() {
            return Err(Failure::Usage("this command takes a single level".into()));
        }
        Ok(*r.start())
    }

    fn kappa_options(&self) -> Result<KappaOptions, Failure> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Failure::Usage(format!(
                "--tol must lie in (0, 1), got {}",
                self.tol
            )));
        }
        Ok(KappaOptions {
            solver: SolverOptions {
                residual_tol: self.tol,
            },
            jobs: self.jobs,
        })
    }

    fn sink(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn check_beta(beta: f64) -> Result<(), Failure> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Failure::Usage(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

fn to_json<S: serde::Serialize>(v: &S) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Mesh { common, format } => {
            let level = common.single_level()?;
            let mesh = generate::<f64>(common.domain, level)?;
            let mut out = common.sink()?;
            match format {
                MeshFormat::Text => mesh.write_text(&mut out)?,
                MeshFormat::Json => {
                    let v = serde_json::json!({
                        "domain": common.domain.name(),
                        "level": level,
                        "h": mesh.h(),
                        "vertices": mesh.vertices(),
                        "triangles": mesh.triangles(),
                        "boundary_edges": mesh
                            .boundary_edges()
                            .iter()
                            .map(|&e| mesh.edges()[e].vertices)
                            .collect::<Vec<_>>(),
                    });
                    out.write_all(to_json(&v).as_bytes())?;
                }
            }
            out.flush()?;
        }
        Command::Table {
            common,
            beta,
            format,
        } => {
            check_beta(beta)?;
            let rows = compute_table(
                common.domain,
                common.levels(),
                beta,
                common.kappa_options()?,
            )?;
            let text = match format {
                Format::Csv => table_csv(&rows),
                Format::Json => to_json(&rows),
            };
            let mut out = common.sink()?;
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        Command::BetaSweep {
            common,
            betas,
            format,
        } => {
            for &b in &betas {
                check_beta(b)?;
            }
            let (betas, dropped) = dedup_betas(&betas);
            for b in dropped {
                eprintln!("warning: duplicate beta {b} ignored");
            }
            let rows = beta_sweep(
                common.domain,
                common.levels(),
                &betas,
                common.kappa_options()?,
            )?;
            let text = match format {
                Format::Csv => sweep_csv(&rows),
                Format::Json => to_json(&rows),
            };
            let mut out = common.sink()?;
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        Command::Estimate {
            common,
            beta,
            f,
            format,
        } => {
            check_beta(beta)?;
            let exact = ManufacturedSolution::<f64>::by_name(&f)?;
            let opts = common.kappa_options()?;
            let mut reports = Vec::new();
            for level in common.levels() {
                let mesh = generate::<f64>(common.domain, level)?;
                let est = estimate(&mesh, &exact.neumann_data(), beta, opts)?;
                let err = true_error(&est.u_h, &exact);
                reports.push(est.report.with_true_error(err.h1, err.boundary));
            }
            let text = match format {
                Format::Csv => {
                    let mut s = format!("{REPORT_CSV_HEADER}\n");
                    for r in &reports {
                        s.push_str(&r.to_csv_row());
                        s.push('\n');
                    }
                    s
                }
                Format::Json if reports.len() == 1 => to_json(&reports[0]),
                Format::Json => to_json(&reports),
            };
            let mut out = common.sink()?;
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        Command::Verify { common, beta } => {
            check_beta(beta)?;
            let mut cfg = SuiteConfig::new(common.domain, common.levels());
            cfg.beta = beta;
            cfg.kappa = common.kappa_options()?;
            let checks = run_suite(&cfg)?;
            let mut out = common.sink()?;
            out.write_all(tap_report(&checks).as_bytes())?;
            out.flush()?;
            let failed = checks.iter().filter(|c| !c.ok).count();
            if failed > 0 {
                return Err(Failure::Numerical(format!(
                    "{failed} of {} checks failed",
                    checks.len()
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!(
                "{}",
                Failure::Usage(first.trim_start_matches("error: ").to_string())
            );
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
