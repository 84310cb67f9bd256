use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pts_core::output::{write_metrics, write_trajectories, METRICS_FILE, TRAJECTORIES_FILE};
use pts_core::sim::{formation_seed, Execution};
use pts_core::{interpolate, load_scenario_file, plan, presets, write_scenario, Error, ScenarioConfig64};

/// Multi-formation payload transport traffic simulator.
#[derive(Parser)]
#[command(name = "pts-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trajectories.csv and metrics.json.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides params.max_steps.
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Print the interpolated waypoints planned for one formation.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        formation: u32,
    },
    /// Check a scenario without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Print a built-in scenario as TOML.
    Preset {
        #[arg(value_enum)]
        name: PresetName,
        /// Seed for the obstacle layout.
        #[arg(long, default_value_t = 5)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetName {
    Baseline,
    FourSwap,
    Obstacles,
    Thirty,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // messages already carry their sources
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_planning_failure() {
        3
    } else if e.is_validation() {
        2
    } else {
        1
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate {
            scenario,
            seed,
            out,
            max_steps,
        } => {
            let mut config: ScenarioConfig64 = load_scenario_file(&scenario)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(n) = max_steps {
                config.params.max_steps = n;
            }
            if seed.is_some() || max_steps.is_some() {
                config.validate()?;
            }
            let report = pts_core::run_with(&config, Execution::from_env())?;
            std::fs::create_dir_all(&out).map_err(|source| Error::Io {
                path: out.clone(),
                source,
            })?;
            write_trajectories(&report, &out.join(TRAJECTORIES_FILE))?;
            write_metrics(&report, &out.join(METRICS_FILE))?;
            for f in &report.formations {
                match f.time_to_goal {
                    Some(t) => eprintln!("formation {}: arrived after {t:.2} s", f.id),
                    None => eprintln!("formation {}: did not arrive", f.id),
                }
            }
            eprintln!("collisions: {}", report.collision_count);
            if !report.complete {
                eprintln!(
                    "warning: stopped after {} steps before every formation arrived",
                    report.steps
                );
            }
            Ok(())
        }
        Command::Plan { scenario, formation } => {
            let config: ScenarioConfig64 = load_scenario_file(&scenario)?;
            let f = config
                .formations
                .iter()
                .find(|f| f.id == formation)
                .ok_or_else(|| Error::InvalidInput(format!("no formation with id {formation}")))?;
            let path = plan(
                f.src(),
                f.dest,
                &config.obstacles,
                config.arena,
                f.radius + config.params.rrt.clearance_margin,
                &config.params.rrt,
                formation_seed(config.seed, f.id),
            )
            .map_err(|e| Error::FormationPlanning {
                formation: f.id,
                source: Box::new(e),
            })?;
            let waypoints = interpolate(&path, config.params.waypoint_spacing)?;
            println!("index,x,y");
            for (i, p) in waypoints.points.iter().enumerate() {
                println!("{i},{},{}", p.x, p.y);
            }
            Ok(())
        }
        Command::Validate { scenario } => {
            let config: ScenarioConfig64 = load_scenario_file(&scenario)?;
            println!(
                "ok: {} formations, {} obstacles",
                config.formations.len(),
                config.obstacles.len()
            );
            Ok(())
        }
        Command::Preset { name, seed } => {
            let config: ScenarioConfig64 = match name {
                PresetName::Baseline => presets::baseline(),
                PresetName::FourSwap => presets::four_swap(),
                PresetName::Obstacles => presets::obstacle_field(seed),
                PresetName::Thirty => presets::thirty(),
            };
            print!("{}", write_scenario(&config)?);
            Ok(())
        }
    }
}
