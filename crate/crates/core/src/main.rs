use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use skyroute::bench::{
    brute_force_oracle, read_schedule, read_suite_csv, run_suite, write_records_csv,
    write_schedule, write_summary_csv, write_trace_csv, SuiteOptions,
};
use skyroute::instances::{
    builtin_suite, generate, load_instance, save_instance, GenParams, KindMix,
};
use skyroute::model::{validate_schedule, DroneSpec, ObjectiveWeights};
use skyroute::solver::{solve_variant, SaConfig, Variant};

#[derive(Parser)]
#[command(
    name = "skyroute",
    version,
    about = "Multi-depot drone pickup and delivery scheduling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random planar instance file.
    Generate(GenerateArgs),
    /// Solve an instance, writing the schedule and optionally the convergence trace.
    Solve(SolveArgs),
    /// Check a schedule file against an instance. Exits 1 on any violation.
    Validate {
        instance: PathBuf,
        schedule: PathBuf,
    },
    /// Run variants over a suite of generated instances.
    Bench(BenchArgs),
    /// Exact optimum of a tiny instance (at most 6 tasks and 2 depots).
    Oracle {
        instance: PathBuf,
        /// Also write the optimal schedule here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 40)]
    tasks: usize,
    #[arg(long, default_value_t = 5)]
    depots: usize,
    /// Side of the square area in km.
    #[arg(long, default_value_t = 50.0)]
    area: f64,
    #[arg(long, default_value_t = 1.0)]
    weight_min: f64,
    #[arg(long, default_value_t = 8.0)]
    weight_max: f64,
    /// Probabilities of drop, pickup and pick-drop tasks.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    mix: Option<Vec<f64>>,
    #[command(flatten)]
    drone: DroneArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    name: Option<String>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct DroneArgs {
    /// Empty flying range in km.
    #[arg(long, default_value_t = 30.0)]
    range: f64,
    #[arg(long, default_value_t = 8.0)]
    capacity: f64,
    /// Payload penalty at full load.
    #[arg(long, default_value_t = 2.0)]
    beta_max: f64,
    /// Distance weight of the objective.
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    /// Sortie weight of the objective.
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
}

#[derive(Args, Clone, Copy)]
struct SaArgs {
    #[arg(long, default_value_t = 1000.0)]
    t0: f64,
    #[arg(long, default_value_t = 1e-7)]
    t_end: f64,
    /// Cooling rate.
    #[arg(long, default_value_t = 0.93)]
    q: f64,
    /// Reallocation moves per temperature.
    #[arg(long = "L", default_value_t = 20)]
    inner: usize,
    #[arg(long, default_value_t = 10)]
    n_starts: usize,
}

impl SaArgs {
    fn config(self, seed: u64) -> SaConfig {
        SaConfig {
            t0: self.t0,
            t_end: self.t_end,
            cooling_rate: self.q,
            inner_iterations: self.inner,
            n_starts: self.n_starts,
            seed,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    sa: SaArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = Variant::Full)]
    variant: Variant,
    /// Schedule output file.
    #[arg(long, short)]
    out: PathBuf,
    /// Convergence trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// `builtin` or a CSV file with columns label,num_tasks,num_depots.
    #[arg(long, default_value = "builtin")]
    suite: String,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "full,no_ls,random_init,erpa_only"
    )]
    variants: Vec<Variant>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[command(flatten)]
    sa: SaArgs,
    #[arg(long, default_value = "results.csv")]
    results: PathBuf,
    #[arg(long, default_value = "summary.csv")]
    summary: PathBuf,
}

enum Outcome {
    Ok,
    Violations,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violations) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Generate(args) => {
            let mix = match args.mix.as_deref() {
                None => KindMix::default(),
                Some(&[drop, pickup, pick_drop]) => KindMix {
                    drop,
                    pickup,
                    pick_drop,
                },
                Some(_) => bail!("--mix takes three probabilities"),
            };
            let d = &args.drone;
            let params = GenParams {
                num_tasks: args.tasks,
                num_depots: args.depots,
                area_km: args.area,
                weight_min_kg: args.weight_min,
                weight_max_kg: args.weight_max,
                kind_mix: mix,
                drone: DroneSpec::new(d.range, d.capacity, d.beta_max)?,
                weights: ObjectiveWeights::new(d.alpha, d.rho)?,
                seed: args.seed,
                name: args.name,
            };
            let instance = generate(&params)?;
            save_instance(&instance, &args.out)?;
            println!(
                "wrote {} ({} tasks, {} depots) to {}",
                instance.name(),
                instance.num_tasks(),
                instance.num_depots(),
                args.out.display()
            );
        }
        Command::Solve(args) => {
            let instance = load_instance(&args.instance)?;
            let report = solve_variant(&instance, &args.sa.config(args.seed), args.variant)?;
            let violations = validate_schedule(&instance, &report.best_schedule);
            if let Some(v) = violations.first() {
                bail!(
                    "solver produced an invalid schedule ({} violations): {v}",
                    violations.len()
                );
            }
            write_schedule(&report.best_schedule, &instance, &args.out)?;
            if let Some(path) = &args.trace {
                write_trace_csv(&report.trace, path)?;
            }
            println!(
                "cost {:.6} (initial {:.6}), distance {:.3} km, {} sorties, {} outer iterations, {:.2}s",
                report.best_cost,
                report.initial_cost,
                report.best_schedule.total_distance_km(),
                report.best_schedule.sortie_count(),
                report.outer_iterations,
                report.wall_time_s
            );
        }
        Command::Validate { instance, schedule } => {
            let instance = load_instance(&instance)?;
            let schedule = read_schedule(&instance, &schedule)?;
            let violations = validate_schedule(&instance, &schedule);
            if violations.is_empty() {
                println!("valid: cost {:.6}", schedule.objective(instance.weights()));
            } else {
                for v in &violations {
                    println!("{v}");
                }
                println!("{} violations", violations.len());
                return Ok(Outcome::Violations);
            }
        }
        Command::Bench(args) => {
            let suite = if args.suite == "builtin" {
                builtin_suite()
            } else {
                read_suite_csv(&args.suite)
                    .with_context(|| format!("reading suite {}", args.suite))?
            };
            let options = SuiteOptions {
                solver: args.sa.config(0),
                ..SuiteOptions::default()
            };
            let result = run_suite(&suite, &args.variants, args.reps, args.seed_base, &options)?;
            write_records_csv(&result.records, fs::File::create(&args.results)?)?;
            write_summary_csv(&result.summary, fs::File::create(&args.summary)?)?;
            for row in &result.summary {
                let gap = row
                    .gap_vs_full
                    .map(|g| format!("{:.2}%", 100.0 * g))
                    .unwrap_or_default();
                println!(
                    "{:<6} {:<12} mean {:>10.3}  cv {:>6.3}%  gap {:>7}",
                    row.instance,
                    row.variant.as_str(),
                    row.mean_cost,
                    100.0 * row.cv_population,
                    gap
                );
            }
        }
        Command::Oracle { instance, out } => {
            let instance = load_instance(&instance)?;
            let (cost, schedule) = brute_force_oracle(&instance)?;
            if let Some(path) = out {
                write_schedule(&schedule, &instance, path)?;
            }
            println!("{cost:.9}");
        }
    }
    Ok(Outcome::Ok)
}
