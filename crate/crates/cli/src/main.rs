use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdarwin::experiments::figures::{dataset, figure_datasets};
use qdarwin::experiments::verify::{default_suites, reports_json};
use qdarwin::experiments::{run_sweep, verify_suite, write_outputs, ExperimentConfig, VerifyOptions, VerifyReport};
use qdarwin::infotheory::{fragment_information, LogBase};
use qdarwin::model::{evolve_branches, prc_times, EnvironmentSpec, SystemObservable};
use qdarwin::petz::{prc_fidelity_closed_form, recovery_quality};
use qdarwin::{BlochState, DensityMatrix64, Error};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qdarwin",
    version,
    about = "Petz recovery and redundancy sweeps for premeasurement models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Replace the configured RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Log base of the entropic CSV columns.
    #[arg(long, value_parser = ["2", "e"])]
    log_base: Option<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), Error> {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(base) = &self.log_base {
            cfg.log_base = base.parse::<LogBase>()?;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a JSON config and write CSV plus metadata.
    Run {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; metadata goes to `<stem>.meta.json` beside it.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the identity suite; without --config, the bundled Z–Z (n=4) and GUE (n=3) suites.
    Check {
        /// Experiment config (JSON) describing the model to check.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Test hook: replace every encoding channel by a non-trace-preserving Kraus set.
        #[arg(long)]
        inject_non_tp: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write the dataset(s) of a figure: fig1..fig5, or a single dataset name such as fig2_g01.
    Figure {
        name: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Closed-form PRC times and fidelity for a Z–Z model, compared with simulation.
    Prc {
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 0.1)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Number of PRC times to list.
        #[arg(long, default_value_t = 3)]
        count: usize,
        /// Log base of the printed entropies.
        #[arg(long, value_parser = ["2", "e"])]
        log_base: Option<String>,
    },
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(match err {
        Error::Size(_) => EXIT_CAP,
        _ => EXIT_USAGE,
    })
}

fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path)?;
    overrides.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

fn sweep_to(cfg: &ExperimentConfig, out: &Path) -> Result<(), Error> {
    let res = run_sweep(cfg)?;
    let meta = write_outputs(&res, out)?;
    println!(
        "wrote {} ({} rows) and {}",
        out.display(),
        res.rows.len(),
        meta.display()
    );
    for e in &res.errors {
        eprintln!("warning: t={} k={}: {}", e.t, e.k, e.message);
    }
    Ok(())
}

fn cmd_run(config: &Path, out: &Path, overrides: &Overrides) -> ExitCode {
    match load(config, overrides).and_then(|cfg| sweep_to(&cfg, out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}

fn cmd_check(config: Option<&Path>, out: Option<&Path>, inject_non_tp: bool, overrides: &Overrides) -> ExitCode {
    let suites = match config {
        Some(path) => match load(path, overrides) {
            Ok(cfg) => vec![(path.display().to_string(), cfg)],
            Err(e) => return exit_for(&e),
        },
        None => {
            let mut suites = Vec::new();
            for (name, mut cfg) in default_suites() {
                if let Err(e) = overrides.apply(&mut cfg) {
                    return exit_for(&e);
                }
                suites.push((name.to_string(), cfg));
            }
            suites
        }
    };
    let opts = VerifyOptions {
        inject_non_tp,
        ..VerifyOptions::default()
    };
    let mut all_pass = true;
    let mut reports = Vec::new();
    for (name, cfg) in &suites {
        let report = match verify_suite(cfg, opts) {
            Ok(r) => r,
            Err(e) => return exit_for(&e),
        };
        println!("== {name}\n{}", report.table());
        all_pass &= report.passed();
        reports.push((name.clone(), report));
    }
    if let Some(path) = out {
        if let Err(e) = write_reports(&reports, path) {
            return exit_for(&e);
        }
    }
    if all_pass {
        println!("all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("verification failed");
        ExitCode::from(EXIT_VERIFY)
    }
}

fn write_reports(reports: &[(String, VerifyReport)], path: &Path) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, reports_json(reports)?)?;
    Ok(())
}

fn cmd_figure(name: &str, out: &Path, overrides: &Overrides) -> ExitCode {
    let names = match figure_datasets(name) {
        Ok(n) => n,
        Err(e) => return exit_for(&e),
    };
    for d in names {
        let result = dataset(d).and_then(|mut cfg| {
            overrides.apply(&mut cfg)?;
            sweep_to(&cfg, &out.join(format!("{d}.csv")))
        });
        if let Err(e) = result {
            return exit_for(&e);
        }
    }
    ExitCode::SUCCESS
}

struct PrcArgs {
    r: f64,
    theta: f64,
    phi: f64,
    g: f64,
    n: usize,
    count: usize,
}

fn prc_report(a: &PrcArgs, base: LogBase) -> Result<bool, Error> {
    if a.n == 0 || a.n > qdarwin::experiments::MAX_SITES {
        let msg = format!("n must be within 1..={}", qdarwin::experiments::MAX_SITES);
        return Err(if a.n == 0 { Error::Config(msg) } else { Error::Size(msg) });
    }
    let x = BlochState::new(a.r, a.theta, a.phi).map_err(|e| Error::Config(e.to_string()))?;
    let sys = SystemObservable::pauli_z();
    let env = EnvironmentSpec::zz(a.n, a.g).map_err(|e| Error::Config(e.to_string()))?;
    let schedule = prc_times(&sys, &env).ok_or_else(|| Error::Config("no closed-form PRC times (g = 0?)".into()))?;
    let times = schedule.times(a.count.max(1));
    let f = prc_fidelity_closed_form(&x.gamma())?;
    println!("PRC times t = π(1+2n)/(4g):");
    for (i, t) in times.iter().enumerate() {
        println!("  n={i}: {t:.16e}");
    }
    println!("closed-form fidelity at PRC: {f:.16e}");
    let rec = evolve_branches(&sys, &env, times[0])?;
    let s = DensityMatrix64::maximally_mixed(2);
    let mut worst: f64 = 0.0;
    println!(
        "{:>3} {:>24} {:>24}",
        "k",
        "Q(k)",
        format!("R(k) [log {}]", base.label())
    );
    for k in 1..=a.n {
        let q = recovery_quality(&x.density(), &rec, k, &s)?;
        let r = base.from_nats(fragment_information(&x.density(), &rec, k)?.mutual());
        worst = worst.max((q - f).abs());
        println!("{k:>3} {q:>24.16e} {r:>24.16e}");
    }
    let entropy = base.from_nats(fragment_information(&x.density(), &rec, 0)?.system);
    println!("S(ρ_Γ) = {entropy:.16e}; max |Q(k) − F| = {worst:.3e}");
    Ok(worst < 1e-8)
}

fn cmd_prc(a: &PrcArgs, log_base: Option<&str>) -> ExitCode {
    let base = match log_base.map(str::parse::<LogBase>).transpose() {
        Ok(b) => b.unwrap_or_default(),
        Err(e) => return exit_for(&e),
    };
    match prc_report(a, base) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(e) => exit_for(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config, out, overrides } => cmd_run(config, out, overrides),
        Command::Check {
            config,
            out,
            inject_non_tp,
            overrides,
        } => cmd_check(config.as_deref(), out.as_deref(), *inject_non_tp, overrides),
        Command::Figure { name, out, overrides } => cmd_figure(name, out, overrides),
        Command::Prc {
            r,
            theta,
            phi,
            g,
            n,
            count,
            log_base,
        } => {
            let a = PrcArgs {
                r: *r,
                theta: *theta,
                phi: *phi,
                g: *g,
                n: *n,
                count: *count,
            };
            cmd_prc(&a, log_base.as_deref())
        }
    }
}
