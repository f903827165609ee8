//! Command-line entry point: config ingestion, subcommand dispatch, and
//! deterministic artifact emission (CSV / JSON).

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use teichlab::config::{load_json, ConvergeConfig, LaminationConfig, TraceConfig};
use teichlab::disk::{liouville_box, liouville_integral, GeodesicBox};
use teichlab::error::Error;
use teichlab::experiments::{
    format_sig, run_liouville_asymptotics, run_modulus_convergence, ConvergenceRecord, ExperimentOptions,
};
use teichlab::lamination::lamination_mass;
use teichlab::modulus::{quad_modulus, Quadrilateral};
use teichlab::quad_diff::{trace_trajectory, QuadraticDifferential};
use teichlab::selfcheck;

#[derive(Parser)]
#[command(
    name = "teichlab",
    about = "Numerical laboratory for Liouville measures, quadratic-differential \
             laminations, affine Teichmüller deformations, and curve-family moduli",
    version
)]
struct Cli {
    /// Output directory for artifacts (default: $TEICHLAB_OUT_DIR or '.')
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Liouville measure of a box of geodesics
    Liouville(LiouvilleArgs),
    /// Trace a trajectory of a quadratic differential
    Trace(TraceArgs),
    /// Mass of a box under the measured lamination of a differential
    Lamination(ConfigArgs),
    /// Modulus of a quadrilateral curve family
    Modulus(ModulusArgs),
    /// Normalized-modulus convergence along an approach path
    Converge(ConfigArgs),
    /// Liouville-measure asymptotics along an approach path
    Asymptotics(ConfigArgs),
    /// Run the cross-module invariant suite
    Validate(ValidateArgs),
}

#[derive(Args)]
struct LiouvilleArgs {
    /// Four angles in radians, counterclockwise: a,b,c,d
    #[arg(long, value_parser = parse_box)]
    r#box: GeodesicBox,
    /// Evaluate the double-integral form as well and report both
    #[arg(long)]
    integral: bool,
    /// Quadrature tolerance for --integral
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct TraceArgs {
    /// JSON config with differential, theta, seed, step, shell
    #[arg(long)]
    config: PathBuf,
    /// CSV output file for the sampled trajectory
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config file
    #[arg(long)]
    config: PathBuf,
    /// Output file (CSV for converge/asymptotics, JSON for lamination)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModulusArgs {
    /// Axis-aligned rectangle a,b (family connecting the vertical sides)
    #[arg(long, value_parser = parse_pair, conflicts_with = "quad")]
    rect: Option<(f64, f64)>,
    /// JSON file with a quadrilateral {boundary, marks}
    #[arg(long)]
    quad: Option<PathBuf>,
    /// Grid resolution
    #[arg(long, default_value_t = 257)]
    grid: usize,
    /// JSON output file
    #[arg(long, default_value = "modulus.json")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Seed for the randomized property suites
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn parse_box(text: &str) -> Result<GeodesicBox, String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("box angles must be numbers: {e}"))?;
    if parts.len() != 4 {
        return Err(format!("expected 4 angles, got {}", parts.len()));
    }
    GeodesicBox::new(parts[0], parts[1], parts[2], parts[3]).map_err(|e| e.to_string())
}

fn parse_pair(text: &str) -> Result<(f64, f64), String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("expected numbers: {e}"))?;
    if parts.len() != 2 {
        return Err(format!("expected 2 values, got {}", parts.len()));
    }
    Ok((parts[0], parts[1]))
}

fn out_path(dir: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        file.to_path_buf()
    } else {
        dir.join(file)
    }
}

fn write_records_csv(path: &Path, records: &[ConvergenceRecord]) -> Result<(), Error> {
    let mut text = String::from(ConvergenceRecord::CSV_HEADER);
    text.push('\n');
    for r in records {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn print_records(records: &[ConvergenceRecord]) {
    for r in records {
        match &r.error {
            None => println!(
                "s={:.6} t={:.6} raw={:.6} normalized={:.6} target={:.6} residual={:.3e}",
                r.parameter.s(),
                r.parameter.t(),
                r.raw_modulus,
                r.normalized,
                r.target,
                r.residual
            ),
            Some(e) => println!(
                "s={:.6} t={:.6} FAILED: {e}",
                r.parameter.s(),
                r.parameter.t()
            ),
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let dir = cli
        .out_dir
        .or_else(|| std::env::var_os("TEICHLAB_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    match cli.command {
        Command::Liouville(args) => {
            let value = liouville_box(&args.r#box);
            if args.integral {
                let integral = liouville_integral(&args.r#box, args.tol)?;
                println!(
                    "liouville cross_ratio={value:.6} integral={integral:.6} diff={:.2e}",
                    (value - integral).abs()
                );
            } else {
                println!("{value:.6}");
            }
        }
        Command::Trace(args) => {
            let cfg: TraceConfig = load_json(&args.config)?;
            let phi = QuadraticDifferential::from_spec(&cfg.differential)?;
            let seed = Complex64::new(cfg.seed[0], cfg.seed[1]);
            let traj = trace_trajectory(&phi, cfg.theta, seed, cfg.step, cfg.shell)?;
            let mut text = String::from("re,im\n");
            for p in &traj.samples {
                text.push_str(&format!("{},{}\n", format_sig(p.re), format_sig(p.im)));
            }
            let path = out_path(&dir, &args.out);
            std::fs::write(&path, text)?;
            println!(
                "trace endpoints=({:.6},{:.6}) phi_length={:.6} samples={} -> {}",
                traj.endpoints[0].angle(),
                traj.endpoints[1].angle(),
                traj.phi_length,
                traj.samples.len(),
                path.display()
            );
        }
        Command::Lamination(args) => {
            let cfg: LaminationConfig = load_json(&args.config)?;
            let phi = QuadraticDifferential::from_spec(&cfg.differential)?;
            let mass = lamination_mass(&phi, cfg.theta, &cfg.r#box, cfg.n_samples)?;
            let path = out_path(&dir, args.out.as_deref().unwrap_or(Path::new("lamination.json")));
            std::fs::write(&path, serde_json::to_string_pretty(&mass).unwrap())?;
            println!(
                "lamination value={:.9} error_estimate={:.3e} samples={}{} -> {}",
                mass.value,
                mass.error_estimate,
                mass.samples_used,
                if mass.empty_coverage {
                    " (empty coverage)"
                } else {
                    ""
                },
                path.display()
            );
        }
        Command::Modulus(args) => {
            let q = match (&args.rect, &args.quad) {
                (Some((a, b)), None) => Quadrilateral::rectangle(*a, *b, 128)?,
                (None, Some(path)) => load_json(path)?,
                _ => {
                    return Err(Error::Config(
                        "exactly one of --rect or --quad is required".into(),
                    ))
                }
            };
            let r = quad_modulus(&q, args.grid)?;
            let path = out_path(&dir, &args.out);
            std::fs::write(&path, serde_json::to_string_pretty(&r).unwrap())?;
            println!(
                "modulus value={:.6} grid={} error_estimate={:.3e} -> {}",
                r.value,
                r.grid,
                r.error_estimate,
                path.display()
            );
        }
        Command::Converge(args) => {
            let cfg: ConvergeConfig = load_json(&args.config)?;
            let phi = QuadraticDifferential::from_spec(&cfg.differential)?;
            let opts = ExperimentOptions {
                n_boundary: cfg.n_boundary,
                n_samples: cfg.n_samples,
            };
            let records =
                run_modulus_convergence(&phi, cfg.theta, &cfg.r#box, &cfg.path, cfg.grid, &opts)?;
            print_records(&records);
            let path = out_path(&dir, args.out.as_deref().unwrap_or(Path::new("converge.csv")));
            write_records_csv(&path, &records)?;
            println!("wrote {}", path.display());
            if records.iter().any(|r| r.error.is_some()) {
                return Err(Error::Accuracy {
                    best_estimate: f64::NAN,
                    error_estimate: f64::NAN,
                });
            }
        }
        Command::Asymptotics(args) => {
            let cfg: ConvergeConfig = load_json(&args.config)?;
            let phi = QuadraticDifferential::from_spec(&cfg.differential)?;
            let opts = ExperimentOptions {
                n_boundary: cfg.n_boundary,
                n_samples: cfg.n_samples,
            };
            let records =
                run_liouville_asymptotics(&phi, cfg.theta, &cfg.r#box, &cfg.path, cfg.grid, &opts)?;
            print_records(&records);
            let path = out_path(
                &dir,
                args.out.as_deref().unwrap_or(Path::new("asymptotics.csv")),
            );
            write_records_csv(&path, &records)?;
            println!("wrote {}", path.display());
            if records.iter().any(|r| r.error.is_some()) {
                return Err(Error::Accuracy {
                    best_estimate: f64::NAN,
                    error_estimate: f64::NAN,
                });
            }
        }
        Command::Validate(args) => {
            let checks = selfcheck::run_all(args.seed);
            let mut failures = 0usize;
            for c in &checks {
                println!(
                    "{} {} ({})",
                    if c.passed { "ok  " } else { "FAIL" },
                    c.name,
                    c.detail
                );
                if !c.passed {
                    failures += 1;
                }
            }
            println!("{} checks, {} failures", checks.len(), failures);
            return Ok(failures == 0);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_)
                | Error::InvalidParameter(_)
                | Error::InvalidBox(_)
                | Error::InvalidDifferential(_)
                | Error::Io(_) => 1,
                Error::Accuracy { .. }
                | Error::NonTerminatingTrajectory { .. }
                | Error::ChartInjectivity(_)
                | Error::Resolution(_) => 2,
            };
            ExitCode::from(code)
        }
    }
}
