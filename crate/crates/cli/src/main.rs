use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fch_core::config::SimConfig;
use fch_core::mobility::{entropy_branches, regularized_entropy, MobilitySpec};
use fch_core::output::run_simulation;
use fch_core::potential::check_growth_exponent;
use fch_core::{run_sweep, FchError, GrowthConstants, SweepPlan};

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "fch", version, about = "Spectral solver for the functionalized Cahn-Hilliard flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only print errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Run(Common),
    /// Run a strictly decreasing sequence of theta values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated theta values.
        #[arg(long, value_delimiter = ',', required = true)]
        thetas: Vec<f64>,
    },
    /// Check the potential and entropy hypotheses without simulating.
    Check(Common),
}

/// An error together with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<FchError> for Failure {
    fn from(e: FchError) -> Self {
        let code = match e {
            FchError::Config(_) | FchError::Json(_) | FchError::Structure(_) | FchError::Aliasing { .. } => {
                EXIT_VALIDATION
            }
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn load(common: &Common) -> Result<SimConfig, Failure> {
    // A missing or unreadable file is a validation failure, not a runtime one.
    let text = std::fs::read_to_string(&common.config).map_err(|e| Failure {
        code: EXIT_VALIDATION,
        message: format!("cannot read {}: {e}", common.config.display()),
    })?;
    Ok(SimConfig::from_json(&text)?)
}

fn out_dir(common: &Common, config: &SimConfig) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.directory))
}

fn cmd_run(common: &Common) -> Result<(), Failure> {
    let config = load(common)?;
    config.validate()?;
    let dir = out_dir(common, &config);
    let (state, series) = run_simulation(&config, Some(&dir), &mut [])?;
    let last = series.records.last().expect("initial record");
    log::info!(
        "t = {}: {} accepted / {} rejected steps, energy {:e}, min u {:e}",
        state.t,
        series.steps.accepted,
        series.steps.rejected,
        last.energy,
        last.min_u
    );
    if series.stability_warning {
        log::warn!("h2 norm exceeded its growth limit");
    }
    Ok(())
}

fn cmd_sweep(common: &Common, thetas: &[f64]) -> Result<(), Failure> {
    let config = load(common)?;
    let plan = SweepPlan::new(thetas.to_vec(), config)?;
    let dir = out_dir(common, &plan.config);
    let report = run_sweep(&plan, Some(&dir))?;
    for s in report.summaries() {
        log::info!(
            "theta = {:e}: min u {:e}, sup negativity {:e}, ratio {:e}",
            s.theta,
            s.min_u_final,
            s.negativity_sup,
            s.bound_ratio
        );
    }
    log::info!(
        "gaps nonincreasing: {}, lower bound: {}, nonzero: {}",
        report.cauchy,
        report.lower_bound_ok,
        report.nonzero_ok
    );
    if !report.all_succeeded() {
        return Err(Failure {
            code: EXIT_RUNTIME,
            message: "at least one theta run failed; see sweep_summary.csv".into(),
        });
    }
    Ok(())
}

/// Hypothesis report: one PASS/FAIL line per check on stdout.
struct Report {
    ok: bool,
    quiet: bool,
}

impl Report {
    fn line(&mut self, name: &str, passed: bool, detail: String) {
        self.ok &= passed;
        if !self.quiet || !passed {
            println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        }
    }
}

fn cmd_check(common: &Common) -> Result<(), Failure> {
    let config = load(common)?;
    let w = &config.potential;
    let mut report = Report {
        ok: true,
        quiet: common.quiet,
    };

    match w.find_wells() {
        Ok(wells) => report.line(
            "wells",
            true,
            format!("b0 = {:.12}, b+ = {:.12}, W(b+) = {:.6}", wells.b0, wells.b_plus, w.w(wells.b_plus)),
        ),
        Err(e) => report.line("wells", false, e.to_string()),
    }
    match check_growth_exponent(w.p, config.dim) {
        Ok(()) => report.line("p-range", true, format!("p = {}", w.p)),
        Err(e) => report.line("p-range", false, e.to_string()),
    }
    let constants = config.growth_constants.unwrap_or(GrowthConstants::EXAMPLE);
    let reach = w.find_wells().map(|x| x.b_plus.max(1.0)).unwrap_or(1.0).max(100.0);
    match w.verify_growth(constants, w.p, (-reach, reach), 100_001) {
        Ok(growth) => {
            for c in &growth.checks {
                report.line(
                    c.name,
                    c.passed,
                    format!("worst margin {:e} at z = {}", c.worst_margin, c.worst_point),
                );
            }
        }
        Err(e) => report.line("growth", false, e.to_string()),
    }

    match MobilitySpec::regularized(config.theta) {
        Ok(m) => {
            let theta = config.theta;
            let [a, b] = entropy_branches(theta, theta);
            let gap = (a.0 - b.0).abs().max((a.1 - b.1).abs()).max((a.2 - b.2).abs() / a.2);
            report.line("entropy-c2", gap <= 1e-12, format!("branch mismatch {gap:e}"));
            let worst = (0..=10_000)
                .map(|i| {
                    let u = -5.0 + 10.0 * i as f64 / 10_000.0;
                    let (_, phi2) = m.entropy_derivatives(u).expect("regularized");
                    (phi2 * m.eval(u) - 1.0).abs()
                })
                .fold(0.0, f64::max);
            report.line("entropy-inverse-mobility", worst <= 1e-12, format!("max error {worst:e}"));
            let violations = (0..=10_000)
                .filter(|&i| {
                    let z = -10.0 * i as f64 / 10_000.0;
                    (z + theta).powi(2) > 2.0 * theta * regularized_entropy(theta, z) * (1.0 + 1e-12)
                })
                .count();
            report.line("negative-side-bound", violations == 0, format!("{violations} violations"));
        }
        Err(e) => report.line("theta", false, e.to_string()),
    }

    if report.ok {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VALIDATION,
            message: "hypothesis check failed".into(),
        })
    }
}

fn init_logging(quiet: bool) {
    let level = if quiet { "error" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Run(c) | Command::Check(c) => c,
        Command::Sweep { common, .. } => common,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(common(&cli.command).quiet);
    let result = match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Sweep { common, thetas } => cmd_sweep(common, thetas),
        Command::Check(c) => cmd_check(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
