use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use plap::harness::{self, export_report, Format, Report, ScenarioConfig};
use plap::io::{self, fmt_float};
use plap::{build_mesh, solvers, Result};

const AFTER_HELP: &str = "\
Exit status: 0 on PASS, 2 when a check fails, 1 on errors.

Output files (written under --out, or the config's output_dir):
  solve        report.json, or report.csv + checks.csv with --format csv;
               u_first.csv, u_pass.csv, u_third.csv
  sweep        sweep.json or sweep.csv (printed to stdout without an output dir)
  lambda-star  lambda_star.json or lambda_star.csv; v_star.csv, witness.csv
  check        prints the re-verified checks; writes report.json with --out

CSV columns:
  report.csv       branch,converged,iterations,t_scale,kinetic,termA,termB,termC,
                   total,residual,sup_norm,min_value
  checks.csv       name,passed,quantity,value
  sweep.csv        lambda,fraction,in_u_lambda,root_count,t1,t2,t3,solved,j1,j2,j3,
                   t_scale1,t_scale3,converged1,converged2,converged3,error
                   (t1..t3 are fibering roots along v*; empty cells mean absent)
  lambda_star.csv  lambda_star,rho,lambda_hump,lambda_barrier,lambda_dip,
                   b_max,a_max,c_star
  field CSV        '# dimension=.. extents=.. nodes=..' line, then x,value (1D)
                   or x,y,value (2D), one row per grid node

Floats use 17 significant digits; identical inputs give identical bytes.";

#[derive(Parser)]
#[command(
    name = "plap",
    version,
    about = "Three positive solutions of a perturbed concave-convex p-Laplacian problem"
)]
#[command(after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (flat TOML); the canonical scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides the config's output_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Fmt::Json)]
    format: Fmt,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print nothing on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and verify the three-solution checks.
    Solve,
    /// Fibering analysis along v* over a grid of fractions of λ*.
    Sweep {
        /// Comma-separated fractions of λ*; the config's grid when omitted.
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
    },
    /// Estimate the threshold λ* and the mountain radius ρ.
    LambdaStar,
    /// Re-verify a stored JSON report.
    Check { report: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Json,
    Csv,
}

impl From<Fmt> for Format {
    fn from(f: Fmt) -> Self {
        match f {
            Fmt::Json => Format::Json,
            Fmt::Csv => Format::Csv,
        }
    }
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return ExitCode::from(if informational { 0 } else { 1 });
        }
    };
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::from_file(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = Some(o.clone());
    }
    Ok(cfg)
}

// Write errors (a closed pipe, say) are not worth dying over.
fn say(cli: &Cli, line: impl AsRef<str>) {
    if !cli.quiet {
        let _ = writeln!(std::io::stdout(), "{}", line.as_ref());
    }
}

fn print_checks(cli: &Cli, report: &Report) {
    for c in &report.checks {
        let vals: Vec<String> = c.values.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        say(
            cli,
            format!(
                "{} {} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                vals.join(" ")
            ),
        );
    }
    for d in &report.diagnostics {
        say(cli, format!("note: {d}"));
    }
    say(cli, if report.passed { "PASS" } else { "FAIL" });
}

fn verdict(report: &Report) -> Outcome {
    if report.passed {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let format: Format = cli.format.into();
    match &cli.command {
        Command::Solve => {
            let cfg = load_config(cli)?;
            let report = harness::run_scenario(&cfg)?;
            if let Some(dir) = &cfg.output_dir {
                write_report(dir, &report, format)?;
                say(cli, format!("wrote {}", dir.display()));
            }
            if let (Some(l), Some(ls)) = (report.lambda, report.lambda_star) {
                say(cli, format!("lambda={l:.6e} lambda_star={ls:.6e}"));
            }
            print_checks(cli, &report);
            Ok(verdict(&report))
        }
        Command::Sweep { fractions } => {
            let cfg = load_config(cli)?;
            let grid = fractions.clone().unwrap_or_else(|| cfg.sweep_fractions.clone());
            let table = harness::sweep_lambda(&cfg, &grid)?;
            match &cfg.output_dir {
                Some(dir) => {
                    let name = if format == Format::Json {
                        "sweep.json"
                    } else {
                        "sweep.csv"
                    };
                    export_report(&table, format, &dir.join(name))?;
                    say(cli, format!("wrote {}", dir.join(name).display()));
                }
                None => {
                    let text = match format {
                        Format::Json => io::to_json(&table)?,
                        Format::Csv => table.to_csv()?,
                    };
                    if !cli.quiet {
                        let _ = std::io::stdout().write_all(text.as_bytes());
                    }
                }
            }
            Ok(Outcome::Pass)
        }
        Command::LambdaStar => {
            let cfg = load_config(cli)?;
            let mesh = build_mesh(&cfg.mesh)?;
            let star = solvers::estimate_lambda_star(&mesh, &cfg.exponents()?, &cfg.threshold)?;
            if let Some(dir) = &cfg.output_dir {
                match format {
                    Format::Json => io::write_json(&dir.join("lambda_star.json"), &star)?,
                    Format::Csv => {
                        let row = [
                            star.lambda_star,
                            star.rho,
                            star.lambda_hump,
                            star.lambda_barrier,
                            star.lambda_dip,
                            star.b_max,
                            star.a_max,
                            star.c_star,
                        ]
                        .map(fmt_float)
                        .to_vec();
                        let header = [
                            "lambda_star",
                            "rho",
                            "lambda_hump",
                            "lambda_barrier",
                            "lambda_dip",
                            "b_max",
                            "a_max",
                            "c_star",
                        ];
                        io::write_text(&dir.join("lambda_star.csv"), &io::table_to_csv(&header, &[row])?)?;
                    }
                }
                io::write_field_csv(&dir.join("v_star.csv"), &mesh, &star.v_star)?;
                io::write_field_csv(&dir.join("witness.csv"), &mesh, &star.witness)?;
                say(cli, format!("wrote {}", dir.display()));
            }
            say(
                cli,
                format!(
                    "lambda_star={:.6e} rho={:.6e} hump={:.6e} barrier={:.6e} dip={:.6e}",
                    star.lambda_star, star.rho, star.lambda_hump, star.lambda_barrier, star.lambda_dip
                ),
            );
            Ok(Outcome::Pass)
        }
        Command::Check { report } => {
            let mut stored: Report = io::read_json(report)?;
            stored.reverify();
            if let Some(dir) = &cli.out {
                write_report(dir, &stored, format)?;
            }
            print_checks(cli, &stored);
            Ok(verdict(&stored))
        }
    }
}

fn write_report(dir: &Path, report: &Report, format: Format) -> Result<()> {
    match format {
        Format::Json => export_report(report, format, &dir.join("report.json"))?,
        Format::Csv => {
            export_report(report, format, &dir.join("report.csv"))?;
            io::write_text(&dir.join("checks.csv"), &report.checks_csv()?)?;
        }
    }
    let mesh = build_mesh(&report.config.mesh)?;
    for (name, r) in [
        ("first", &report.first),
        ("pass", &report.pass),
        ("third", &report.third),
    ] {
        if let Some(r) = r {
            io::write_field_csv(&dir.join(format!("u_{name}.csv")), &mesh, &r.solution)?;
        }
    }
    Ok(())
}
