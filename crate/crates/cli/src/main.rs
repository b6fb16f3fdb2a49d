use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use smib::cli::{exit, exit_code, plot_svg, registry, run, run_all, verify, write_atomic, RunOptions, Workbench};
use smib::config::Config;
use smib::sim::Trajectory;
use smib::SmibError;

/// Single-machine infinite-bus dynamics and control workbench.
#[derive(Debug, Parser)]
#[command(name = "smib", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Parameter file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Integrator::Rk45)]
    integrator: Integrator,
    /// Fixed step for rk4, in seconds.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Seed for the randomised pole-placement steps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Do not clamp E_FD and G_V to their limits.
    #[arg(long, global = true)]
    no_limits: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Integrator {
    Rk4,
    Rk45,
}

const DEFAULT_RK4_STEP: f64 = 1e-3;

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario, or all of them, and write their artifacts.
    Run {
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        scenario: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Run the acceptance suite and print one line per check.
    Verify,
    /// Plot channels of a trajectory CSV as SVG files.
    Plot {
        csv: PathBuf,
        /// Channels to plot; all of them when omitted.
        channels: Vec<String>,
    },
    /// List the bundled scenarios.
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => code(exit::USAGE),
            };
        }
    };
    match execute(cli) {
        Ok(c) => code(c),
        Err(e) => {
            eprintln!("error: {e}");
            code(exit_code(&e))
        }
    }
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn run_options(g: &Global) -> Result<RunOptions, SmibError> {
    let mut opts = RunOptions { limits: !g.no_limits, ..Default::default() };
    if let Some(seed) = g.seed {
        opts.seed = seed;
    }
    match (g.integrator, g.dt) {
        (Integrator::Rk4, dt) => {
            let dt = dt.unwrap_or(DEFAULT_RK4_STEP);
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(SmibError::InvalidArgument(format!("--dt must be positive, got {dt}")));
            }
            opts.fixed_step = Some(dt);
        }
        (Integrator::Rk45, Some(_)) => {
            return Err(SmibError::InvalidArgument("--dt applies to --integrator rk4 only".into()));
        }
        (Integrator::Rk45, None) => {}
    }
    Ok(opts)
}

fn workbench(g: &Global) -> Result<Workbench, SmibError> {
    let config = match &g.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    Workbench::new(config)
}

fn execute(cli: Cli) -> Result<i32, SmibError> {
    let g = &cli.global;
    match cli.command {
        Command::List => {
            for sc in registry() {
                println!("{:32} {}", sc.name, sc.summary);
            }
            Ok(exit::OK)
        }
        Command::Run { scenario, all } => {
            let opts = run_options(g)?;
            let wb = workbench(g)?;
            if all {
                let mut worst = exit::OK;
                for (name, c, status) in run_all(&wb, &g.out, &opts) {
                    println!("{name:32} {} {status}", if c == exit::OK { "ok  " } else { "FAIL" });
                    worst = worst.max(c);
                }
                return Ok(worst);
            }
            let name = scenario.expect("clap requires --scenario without --all");
            let (outcome, c) = run(&wb, &name, &g.out, &opts)?;
            let dir = g.out.join(&name);
            match &outcome.trajectory.termination {
                Some(reason) => eprintln!("{name}: {reason}; partial results in {}", dir.display()),
                None => {
                    let vt = outcome.metrics.final_value("V_t").map(|v| format!(", V_t final {v:.6}"));
                    println!("{name}: wrote {}{}", dir.display(), vt.unwrap_or_default());
                }
            }
            Ok(c)
        }
        Command::Verify => {
            let wb = workbench(g)?;
            let report = verify(&wb);
            print!("{}", report.to_text());
            Ok(if report.passed() { exit::OK } else { exit::VERIFY_FAILED })
        }
        Command::Plot { csv, channels } => {
            let text = std::fs::read_to_string(&csv).map_err(|e| SmibError::Io(format!("{}: {e}", csv.display())))?;
            let tr = Trajectory::from_csv(&text)?;
            let dir = plot_dir(&csv, g);
            for (channel, svg) in plot_svg(&tr, &channels)? {
                let path = dir.join(format!("{channel}.svg"));
                write_atomic(&path, &svg)?;
                println!("{}", path.display());
            }
            Ok(exit::OK)
        }
    }
}

/// `--out` when given explicitly, else next to the CSV.
fn plot_dir(csv: &Path, g: &Global) -> PathBuf {
    let explicit = std::env::args().any(|a| a == "--out" || a.starts_with("--out="));
    if explicit {
        g.out.clone()
    } else {
        csv.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
    }
}
