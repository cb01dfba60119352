use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use ehd_cli::config::ScenarioConfig;
use ehd_cli::output::write_run;
use ehd_cli::presets::preset;
use ehd_cli::runner::{run_bound, run_search, run_simulate, run_solve, run_sweep, run_validate};

#[derive(Parser)]
#[command(
    name = "ehd",
    version,
    about = "Transmission policies for energy-harvesting devices with lossy storage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal policy with perfect knowledge of the battery level
    Solve(Common),
    /// Best per-subset policy by exhaustive search
    Search(Common),
    /// Evaluate the configured policies over the sweep axes
    Sweep(Common),
    /// Monte Carlo run of the configured policy
    Simulate(Common),
    /// Storage-aware throughput bound
    Bound(Common),
    /// Check the config and the recharge hypothesis
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment description
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: fig2, fig3, fig4 or fig5
    #[arg(long)]
    preset: Option<String>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> anyhow::Result<ScenarioConfig> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), None) => ScenarioConfig::load(path)?,
            (None, Some(name)) => preset(name)?,
            _ => bail!("exactly one of --config or --preset is required"),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(threads) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .context("configuring worker threads")?;
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (name, common) = match &cli.command {
        Command::Solve(c) => ("solve", c),
        Command::Search(c) => ("search", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Simulate(c) => ("simulate", c),
        Command::Bound(c) => ("bound", c),
        Command::Validate(c) => ("validate", c),
    };
    let config = common.load()?;
    let out = match cli.command {
        Command::Solve(_) => run_solve(&config)?,
        Command::Search(_) => run_search(&config)?,
        Command::Sweep(_) => run_sweep(&config)?,
        Command::Simulate(_) => run_simulate(&config)?,
        Command::Bound(_) => run_bound(&config)?,
        Command::Validate(_) => {
            let report = run_validate(&config)?;
            for (id, e_max, check) in &report.recharge {
                if check.holds {
                    println!("{id} e_max={e_max}: recharge hypothesis holds");
                } else {
                    println!(
                        "{id} e_max={e_max}: maximal arrival cannot recharge levels {:?}",
                        check.violating
                    );
                }
            }
            return Ok(report.passed());
        }
    };
    write_run(&common.out, name, &config, &out)?;
    for row in &out.rows {
        let g = row
            .g_analytic
            .map_or(String::from("-"), |g| format!("{g:.6}"));
        if row.error.is_empty() {
            println!(
                "{} e_max={} N={} {}: G={g}",
                row.scenario, row.e_max, row.n_subsets, row.policy
            );
        } else {
            println!(
                "{} e_max={} N={} {}: error: {}",
                row.scenario, row.e_max, row.n_subsets, row.policy, row.error
            );
        }
    }
    println!("wrote {}", common.out.display());
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
