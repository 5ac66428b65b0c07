//! Command-line front end for the tracking simulator.
//!
//! Exit codes: 0 on success, 2 when a run violates an invariant (quality
//! ratio outside its band, an approximation bound failing, or a numerical
//! fault mid-run), 3 on configuration errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hetrack::assignment::BoundMode;
use hetrack::harness::{self, HarnessError, Policy};
use hetrack::report::{
    format_sig6, write_assignments_csv, write_ratios_csv, write_steps_csv, write_summary_csv,
};
use hetrack::scenario::ScenarioConfig;

#[derive(Parser)]
#[command(
    name = "hetrack",
    version,
    about = "Heterogeneous sensor-to-target assignment and multi-target tracking simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write steps.csv, assignments.csv, and
    /// summary.csv into the output directory.
    Run {
        /// Scenario config file (`key = value` lines).
        #[arg(long)]
        config: PathBuf,
        /// Assignment policy driving the simulation.
        #[arg(long, value_enum, default_value_t = PolicyArg::Greedy)]
        policy: PolicyArg,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate once per seed with greedy driving and the optimal assignment
    /// computed alongside; writes ratios.csv.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Number of seeds, `config.seed .. config.seed + N`.
        #[arg(long)]
        seeds: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the greedy approximation bound on synthetic random tables.
    Bounds {
        /// `arbitrary` checks the 1/3 bound, `submodular` the 1/2 bound.
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Number of random instances.
        #[arg(long)]
        instances: usize,
        /// Base seed for instance generation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional CSV dump of all trials.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Greedy,
    Optimal,
    Both,
}

impl From<PolicyArg> for Policy {
    fn from(arg: PolicyArg) -> Self {
        match arg {
            PolicyArg::Greedy => Policy::Greedy,
            PolicyArg::Optimal => Policy::Optimal,
            PolicyArg::Both => Policy::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Arbitrary,
    Submodular,
}

impl From<ModeArg> for BoundMode {
    fn from(arg: ModeArg) -> Self {
        match arg {
            ModeArg::Arbitrary => BoundMode::Arbitrary,
            ModeArg::Submodular => BoundMode::Submodular,
        }
    }
}

enum CliError {
    /// Bad or infeasible configuration: exit code 3.
    Config(String),
    /// A run violated an invariant: exit code 2.
    Invariant(String),
    /// I/O trouble: exit code 1.
    Io(String),
}

impl From<hetrack::scenario::ScenarioError> for CliError {
    fn from(err: hetrack::scenario::ScenarioError) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(err: HarnessError) -> Self {
        match err {
            HarnessError::Scenario(e) => CliError::Config(e.to_string()),
            HarnessError::Assignment(
                e @ hetrack::assignment::AssignmentError::InstanceTooLarge { .. },
            ) => CliError::Config(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Invariant(message)) => {
            eprintln!("invariant violation: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            policy,
            out,
        } => cmd_run(&config, policy.into(), &out),
        Command::Compare { config, seeds, out } => cmd_compare(&config, seeds, &out),
        Command::Bounds {
            mode,
            instances,
            seed,
            out,
        } => cmd_bounds(mode.into(), instances, seed, out.as_deref()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_run(config_path: &Path, policy: Policy, out: &Path) -> Result<(), CliError> {
    let config = ScenarioConfig::load(config_path)?;
    config.validate()?;
    let (records, summary) = harness::run(&config, policy)?;

    std::fs::create_dir_all(out)?;
    write_steps_csv(create(&out.join("steps.csv"))?, &records)?;
    write_assignments_csv(create(&out.join("assignments.csv"))?, &records)?;
    write_summary_csv(create(&out.join("summary.csv"))?, &summary)?;

    println!(
        "simulated {} steps, {} targets, {} robots",
        config.time_steps,
        config.n_targets,
        config.n_sufficient + config.n_limited
    );
    for (target, checkpoints) in summary.rmse.iter().enumerate() {
        let line: Vec<String> = checkpoints
            .iter()
            .map(|(step, rmse)| format!("k={step}: {}", format_sig6(*rmse)))
            .collect();
        println!("target {target} RMSE  {}", line.join("  "));
    }
    let residuals = summary.residuals;
    println!(
        "control solves: {}/{} converged (max converged residual {})",
        residuals.converged,
        residuals.solves,
        format_sig6(residuals.max_converged_residual)
    );
    if let Some(ratio) = summary.final_quality_ratio {
        println!("final greedy/optimal quality ratio: {}", format_sig6(ratio));
    }
    println!(
        "wrote steps.csv, assignments.csv, summary.csv to {}",
        out.display()
    );
    Ok(())
}

fn cmd_compare(config_path: &Path, seeds: usize, out: &Path) -> Result<(), CliError> {
    let config = ScenarioConfig::load(config_path)?;
    config.validate()?;
    let seed_list: Vec<u64> = (0..seeds as u64).map(|i| config.seed + i).collect();
    let report = harness::compare_policies(&config, &seed_list)?;

    std::fs::create_dir_all(out)?;
    write_ratios_csv(create(&out.join("ratios.csv"))?, &report.rows)?;

    println!(
        "{} seeds x {} steps: ratio range [{}, {}], {} violations",
        seeds,
        config.time_steps,
        format_sig6(report.min_ratio),
        format_sig6(report.max_ratio),
        report.violations
    );
    println!("wrote ratios.csv to {}", out.display());
    if report.violations > 0 {
        return Err(CliError::Invariant(format!(
            "{} of {} ratios left [0.5, 1.0]",
            report.violations,
            report.rows.len()
        )));
    }
    Ok(())
}

fn cmd_bounds(
    mode: BoundMode,
    instances: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let trials = harness::bound_trials(mode, instances, seed);
    let failures: Vec<_> = trials.iter().filter(|t| !t.holds).collect();
    for trial in &failures {
        println!(
            "instance {}: N1={} N2={} M={} greedy={} optimal={} BOUND VIOLATED",
            trial.index,
            trial.n_sufficient,
            trial.n_limited,
            trial.n_targets,
            format_sig6(trial.greedy_total),
            format_sig6(trial.optimal_total)
        );
    }
    println!(
        "{} instances, {} satisfied the {} bound",
        trials.len(),
        trials.len() - failures.len(),
        match mode {
            BoundMode::Arbitrary => "1/3",
            BoundMode::Submodular => "1/2",
        }
    );
    if let Some(path) = out {
        let mut writer = create(path)?;
        writeln!(
            writer,
            "instance,n_sufficient,n_limited,n_targets,greedy_total,optimal_total,holds"
        )?;
        for t in &trials {
            writeln!(
                writer,
                "{},{},{},{},{},{},{}",
                t.index,
                t.n_sufficient,
                t.n_limited,
                t.n_targets,
                format_sig6(t.greedy_total),
                format_sig6(t.optimal_total),
                t.holds
            )?;
        }
        println!("wrote trials to {}", path.display());
    }
    if !failures.is_empty() {
        return Err(CliError::Invariant(format!(
            "{} of {} instances violated the bound",
            failures.len(),
            trials.len()
        )));
    }
    Ok(())
}
