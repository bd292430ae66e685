use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lfsim::config::{self, BuiltScenario, RunOverrides};
use lfsim::report;
use lfsim::simulator;

#[derive(Parser)]
#[command(name = "lfsim", version, about = "Sampled-leader following simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write the trajectory CSV and metrics summary.
    Run {
        /// Built-in scenario name (msd, waypoints, aircraft) or a TOML path.
        #[arg(long)]
        scenario: String,
        /// Override the RK4 steps per sampling epoch.
        #[arg(long)]
        steps: Option<usize>,
        /// Override the packet deadzone width in grid steps.
        #[arg(long)]
        deadzone: Option<usize>,
        /// Override the perturbation seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: $LFSIM_OUT_DIR or ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Design waypoint arrival times under the input bound and print them.
    Design {
        /// Built-in scenario name or a TOML path (waypoint leader required).
        #[arg(long)]
        scenario: String,
        /// Absolute bisection tolerance in seconds.
        #[arg(long)]
        tol: Option<f64>,
        /// Output directory for the plan file (default as in run).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load a scenario file and report every validation issue.
    Validate { path: PathBuf },
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("LFSIM_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load(arg: &str, overrides: &RunOverrides) -> Result<BuiltScenario, String> {
    let cfg = config::load_scenario_source(arg).map_err(|e| e.to_string())?;
    cfg.build(overrides).map_err(|e| e.to_string())
}

/// Invariants every finished run must satisfy; returns the first violation.
fn check_run(input_bound: Option<f64>, log: &simulator::TrajectoryLog) -> Result<(), String> {
    for em in &log.epochs {
        let sample_norm: f64 = em.leader_sample.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (i, fm) in em.followers.iter().enumerate() {
            let id = log.agent_ids[i];
            let bound = 1e-4 * (1.0 + sample_norm);
            if fm.arrival_error > bound {
                return Err(format!(
                    "arrival invariant violated: epoch {}, follower {id}: error {:.3e} > {:.3e}",
                    em.k, fm.arrival_error, bound
                ));
            }
            let etol = 1e-4 * (1.0 + fm.oracle_energy);
            if (fm.energy - fm.oracle_energy).abs() > etol {
                return Err(format!(
                    "minimum-energy invariant violated: epoch {}, follower {id}: |{:.6} - {:.6}| > {:.3e}",
                    em.k, fm.energy, fm.oracle_energy, etol
                ));
            }
            if let Some(u_max) = input_bound {
                if fm.max_abs_input > u_max + 1e-3 {
                    return Err(format!(
                        "saturation bound violated: epoch {}, follower {id}: max |u| = {:.6} > {u_max}",
                        em.k, fm.max_abs_input
                    ));
                }
            }
        }
        if em.law_equivalence > 1e-5 {
            return Err(format!(
                "law equivalence violated: epoch {}: relative gap {:.3e} > 1e-5",
                em.k, em.law_equivalence
            ));
        }
    }
    Ok(())
}

fn cmd_run(built: BuiltScenario, out: PathBuf) -> Result<(), String> {
    std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
    let name = built.name;
    let steps = built.policy.steps_per_epoch;
    let input_bound = built.input_bound;
    if let Some(plan) = &built.plan {
        println!("designed arrival times (u_max = {}):", plan.u_max);
        for (l, t) in plan.times.iter().enumerate().skip(1) {
            println!("  waypoint {l}: t = {t:.4} s");
        }
    }
    let log = simulator::run_scenario(built.scenario).map_err(|e| e.to_string())?;
    let csv_path = out.join(format!("{name}_trajectory.csv"));
    report::write_csv_file(&log, &csv_path).map_err(|e| e.to_string())?;
    let summary = report::metrics_summary(&log, &name, steps);
    let metrics_path = out.join(format!("{name}_metrics.toml"));
    report::write_metrics_file(&summary, &metrics_path).map_err(|e| e.to_string())?;

    let max_arrival = log
        .epochs
        .iter()
        .flat_map(|e| e.followers.iter().map(|f| f.arrival_error))
        .fold(0.0f64, f64::max);
    let max_u = log
        .epochs
        .iter()
        .flat_map(|e| e.followers.iter().map(|f| f.max_abs_input))
        .fold(0.0f64, f64::max);
    println!(
        "scenario {name}: {} epochs, {} followers",
        log.epochs.len(),
        log.follower_count()
    );
    println!("  max arrival error: {max_arrival:.3e}");
    println!("  max |u|:           {max_u:.6}");
    println!("  trajectory: {}", csv_path.display());
    println!("  metrics:    {}", metrics_path.display());
    check_run(input_bound, &log)?;
    println!("all run invariants satisfied");
    Ok(())
}

#[derive(serde::Serialize)]
struct PlanDoc {
    u_max: f64,
    times: Vec<f64>,
    waypoints: Vec<[f64; 2]>,
    first_epoch_per_follower: Vec<f64>,
}

fn cmd_design(built: BuiltScenario, out: PathBuf) -> Result<(), String> {
    let plan = built
        .plan
        .ok_or_else(|| "scenario does not request arrival-time design".to_string())?;
    println!("arrival-time plan (u_max = {}):", plan.u_max);
    println!("  waypoint   position   velocity   arrival [s]");
    for (l, w) in plan.waypoints.iter().enumerate() {
        println!(
            "  {:<9} {:>9.4} {:>10.4} {:>12.4}",
            l + 1,
            w[0],
            w[1],
            plan.times[l + 1]
        );
    }
    println!("  first-epoch times per follower:");
    for (i, t) in plan.first_epoch_per_follower.iter().enumerate() {
        println!("    follower {}: {t:.4} s", i + 1);
    }
    std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
    let doc = PlanDoc {
        u_max: plan.u_max,
        times: plan.times.clone(),
        waypoints: plan.waypoints.clone(),
        first_epoch_per_follower: plan.first_epoch_per_follower.clone(),
    };
    let path = out.join(format!("{}_plan.toml", built.name));
    let text = toml::to_string_pretty(&doc).map_err(|e| e.to_string())?;
    std::fs::write(&path, text).map_err(|e| e.to_string())?;
    println!("  plan: {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, steps, deadzone, seed, out } => {
            let overrides = RunOverrides {
                steps_per_epoch: steps,
                deadzone_steps: deadzone,
                seed,
                bisection_tol: None,
            };
            load(&scenario, &overrides).and_then(|b| cmd_run(b, out_dir(out)))
        }
        Command::Design { scenario, tol, out } => {
            let overrides = RunOverrides {
                bisection_tol: tol,
                ..Default::default()
            };
            load(&scenario, &overrides).and_then(|b| cmd_design(b, out_dir(out)))
        }
        Command::Validate { path } => match config::load_config(&path) {
            Err(e) => Err(e.to_string()),
            Ok(cfg) => {
                let issues = cfg.validate();
                if issues.is_empty() {
                    println!("{}: valid", path.display());
                    Ok(())
                } else {
                    for issue in &issues {
                        eprintln!("{}: {issue}", path.display());
                    }
                    Err(format!("{} validation issue(s)", issues.len()))
                }
            }
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
