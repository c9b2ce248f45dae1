//! The outer simulated-annealing loop tying allocation and routing together.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::{self, AllocationScheme, Incumbent};
use crate::model::{validate_schedule, Instance, ModelError, Schedule};
use crate::routing::{self, RoutingError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid instance: {0}")]
    Instance(#[from] ModelError),
    #[error("invalid annealing configuration: {0}")]
    Config(String),
    #[error("temperature must be positive, got {0}")]
    Temperature(f64),
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

/// Annealing parameters. Defaults are the published experimental settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    pub t0: f64,
    pub t_end: f64,
    /// Geometric cooling factor applied after each outer iteration.
    pub cooling_rate: f64,
    /// Reallocation moves per temperature.
    pub inner_iterations: usize,
    /// Construction restarts for the initial route plan.
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            t0: 1000.0,
            t_end: 1e-7,
            cooling_rate: 0.93,
            inner_iterations: 20,
            n_starts: 10,
            seed: 0,
        }
    }
}

impl SaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn check(&self) -> Result<(), SolveError> {
        if !(self.t_end > 0.0 && self.t0 > self.t_end && self.t0.is_finite()) {
            return Err(SolveError::Config(format!(
                "need t0 > t_end > 0, got t0={} t_end={}",
                self.t0, self.t_end
            )));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(SolveError::Config(format!(
                "cooling rate must lie in (0, 1), got {}",
                self.cooling_rate
            )));
        }
        if self.inner_iterations == 0 {
            return Err(SolveError::Config(
                "inner iterations must be at least 1".into(),
            ));
        }
        if self.n_starts == 0 {
            return Err(SolveError::Config("n_starts must be at least 1".into()));
        }
        Ok(())
    }

    /// Temperature of outer iteration `k` (zero-based).
    pub fn temperature(&self, k: usize) -> f64 {
        self.t0 * self.cooling_rate.powi(k as i32)
    }

    /// Number of outer iterations: how many `t0 * q^k` stay above `t_end`.
    pub fn outer_iterations(&self) -> usize {
        let mut k = 0;
        while self.temperature(k) > self.t_end {
            k += 1;
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Nearest-depot start, reallocation and local search.
    Full,
    /// As `Full` without the local search step.
    NoLs,
    /// As `Full` from a random depot assignment.
    RandomInit,
    /// The initial constructed plan, no annealing.
    ErpaOnly,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Full,
        Variant::NoLs,
        Variant::RandomInit,
        Variant::ErpaOnly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoLs => "no_ls",
            Variant::RandomInit => "random_init",
            Variant::ErpaOnly => "erpa_only",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                format!("unknown variant `{s}` (expected full, no_ls, random_init or erpa_only)")
            })
    }
}

/// One row of the convergence trace. Row 0 is the constructed starting plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub temperature: f64,
    pub incumbent_cost: f64,
    pub best_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub best_schedule: Schedule,
    pub best_cost: f64,
    pub initial_cost: f64,
    pub trace: Vec<TracePoint>,
    pub wall_time_s: f64,
    pub seed: u64,
    pub variant: Variant,
    pub outer_iterations: usize,
    /// Route constructions, counting every construction start.
    pub route_builds: usize,
    pub ls_improvements: usize,
}

/// Snapshot handed to an observer after every outer iteration.
#[derive(Debug)]
pub struct OuterStep<'a> {
    pub iteration: usize,
    pub temperature: f64,
    pub incumbent: &'a Schedule,
    pub incumbent_cost: f64,
    pub best_cost: f64,
    pub inner_iterations: usize,
    /// Incumbent cost right before the local search step.
    pub cost_before_ls: f64,
    pub ls_accepted: bool,
}

/// Metropolis rule: always accept an improvement, otherwise accept with `exp(-df/t)`.
pub fn metropolis_accept<R: Rng + ?Sized>(
    df: f64,
    t: f64,
    rng: &mut R,
) -> Result<bool, SolveError> {
    if t.is_nan() || t <= 0.0 {
        return Err(SolveError::Temperature(t));
    }
    if df < 0.0 {
        return Ok(true);
    }
    let epsilon: f64 = rng.random();
    Ok((-df / t).exp() >= epsilon)
}

pub fn solve(instance: &Instance, config: &SaConfig) -> Result<SolverReport, SolveError> {
    solve_variant(instance, config, Variant::Full)
}

pub fn solve_variant(
    instance: &Instance,
    config: &SaConfig,
    variant: Variant,
) -> Result<SolverReport, SolveError> {
    solve_observed(instance, config, variant, |_| {})
}

/// Runs one annealing solve, calling `observer` after every outer iteration.
pub fn solve_observed(
    instance: &Instance,
    config: &SaConfig,
    variant: Variant,
    mut observer: impl FnMut(&OuterStep<'_>),
) -> Result<SolverReport, SolveError> {
    config.check()?;
    instance.check_reachability()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let weights = *instance.weights();

    let scheme = match variant {
        Variant::RandomInit => allocation::random_allocate(instance, &mut rng)?,
        _ => allocation::initial_allocate(instance, &mut rng)?,
    };
    let schedule = routing::erpa(&scheme, instance, &mut rng, config.n_starts)?;
    let initial_cost = schedule.objective(&weights);
    let mut route_builds = config.n_starts;

    let mut incumbent = Incumbent {
        scheme: AllocationScheme::from_schedule(&schedule),
        schedule,
        cost: initial_cost,
    };
    let mut best = incumbent.clone();
    let mut trace = vec![TracePoint {
        iter: 0,
        temperature: config.t0,
        incumbent_cost: initial_cost,
        best_cost: initial_cost,
    }];
    let mut outer_iterations = 0;
    let mut ls_improvements = 0;

    if variant != Variant::ErpaOnly {
        let mut k = 0;
        loop {
            let t = config.temperature(k);
            if t <= config.t_end {
                break;
            }
            let outcome = allocation::ivnd(
                incumbent,
                config.inner_iterations,
                t,
                instance,
                &mut rng,
                |candidate: &AllocationScheme| routing::build_schedule(candidate, instance),
            )?;
            route_builds += outcome.steps.len();
            incumbent = outcome.incumbent;
            if let Some(b) = outcome.best {
                if b.cost < best.cost {
                    best = b;
                }
            }

            let cost_before_ls = incumbent.cost;
            let mut ls_accepted = false;
            if variant != Variant::NoLs {
                let refined = routing::local_search(&incumbent.schedule, instance, &mut rng);
                let cost = refined.objective(&weights);
                if cost < incumbent.cost {
                    incumbent = Incumbent {
                        scheme: AllocationScheme::from_schedule(&refined),
                        schedule: refined,
                        cost,
                    };
                    ls_accepted = true;
                    ls_improvements += 1;
                }
            }
            if incumbent.cost < best.cost {
                best = incumbent.clone();
            }

            k += 1;
            outer_iterations = k;
            trace.push(TracePoint {
                iter: k,
                temperature: t,
                incumbent_cost: incumbent.cost,
                best_cost: best.cost,
            });
            observer(&OuterStep {
                iteration: k,
                temperature: t,
                incumbent: &incumbent.schedule,
                incumbent_cost: incumbent.cost,
                best_cost: best.cost,
                inner_iterations: outcome.steps.len(),
                cost_before_ls,
                ls_accepted,
            });
        }
    }

    debug_assert!(validate_schedule(instance, &best.schedule).is_empty());
    Ok(SolverReport {
        best_schedule: best.schedule,
        best_cost: best.cost,
        initial_cost,
        trace,
        wall_time_s: started.elapsed().as_secs_f64(),
        seed: config.seed,
        variant,
        outer_iterations,
        route_builds,
        ls_improvements,
    })
}
