//! Benchmark harness: suite runs, summary statistics, CSV output and the exact oracle.

mod files;
mod oracle;

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use files::{
    read_schedule, read_trace_csv, schedule_from_json, schedule_to_json, trace_to_csv,
    write_schedule, write_trace_csv, ScheduleFileError,
};
pub use oracle::{brute_force_oracle, OracleError, ORACLE_MAX_DEPOTS, ORACLE_MAX_TASKS};

use crate::instances::{generate, GenParams, InstanceError, SuiteConfig};
use crate::model::validate_schedule;
use crate::solver::{solve_variant, SaConfig, SolveError, Variant};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Stat(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{instance}/{variant}/seed {seed}: schedule has {count} violations, first: {first}")]
    Invalid {
        instance: String,
        variant: Variant,
        seed: u64,
        count: usize,
        first: String,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// Relative advantage of `reference` over `other`: `(other - reference) / other`.
///
/// Positive when the reference is cheaper.
pub fn gap(other: f64, reference: f64) -> Result<f64, BenchError> {
    if other.is_nan() || other <= 0.0 {
        return Err(BenchError::Stat(format!(
            "gap needs a positive competitor cost, got {other}"
        )));
    }
    Ok((other - reference) / other)
}

/// Population standard deviation over mean.
pub fn coefficient_of_variation(costs: &[f64]) -> Result<f64, BenchError> {
    if costs.is_empty() {
        return Err(BenchError::Stat(
            "coefficient of variation of an empty list".into(),
        ));
    }
    let n = costs.len() as f64;
    let mean = costs.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(BenchError::Stat(
            "coefficient of variation with zero mean".into(),
        ));
    }
    let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}

/// One solver run as a results-CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub variant: Variant,
    pub seed: u64,
    pub cost: f64,
    pub distance_km: f64,
    pub sorties: usize,
    pub time_s: f64,
}

/// Per (instance, variant) aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub variant: Variant,
    pub runs: usize,
    pub min_cost: f64,
    pub max_cost: f64,
    pub mean_cost: f64,
    pub mean_time_s: f64,
    /// Population standard deviation over mean.
    pub cv_population: f64,
    /// Gap of this variant's mean cost against the full solver's mean cost; empty when
    /// the full solver was not run.
    pub gap_vs_full: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteOptions {
    /// Template for instance generation; counts and seed are set per configuration.
    pub generation: GenParams,
    /// Template for the solver; the seed is set per repetition.
    pub solver: SaConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Instance seed for the configuration at `index`.
pub fn instance_seed(seed_base: u64, index: usize) -> u64 {
    seed_base.wrapping_add(1_000_003u64.wrapping_mul(index as u64 + 1))
}

/// Generates one instance per configuration and runs every variant `reps` times with
/// seeds `seed_base..seed_base + reps`. Every schedule is validated; a violation aborts.
pub fn run_suite(
    suite: &[SuiteConfig],
    variants: &[Variant],
    reps: usize,
    seed_base: u64,
    options: &SuiteOptions,
) -> Result<SuiteResult, BenchError> {
    if reps == 0 {
        return Err(BenchError::Stat("repetitions must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(suite.len() * variants.len() * reps);
    for (index, config) in suite.iter().enumerate() {
        let instance = generate(&GenParams {
            num_tasks: config.num_tasks,
            num_depots: config.num_depots,
            seed: instance_seed(seed_base, index),
            name: Some(config.label.clone()),
            ..options.generation.clone()
        })?;
        for &variant in variants {
            for rep in 0..reps {
                let seed = seed_base.wrapping_add(rep as u64);
                let report = solve_variant(&instance, &options.solver.with_seed(seed), variant)?;
                let violations = validate_schedule(&instance, &report.best_schedule);
                if let Some(first) = violations.first() {
                    return Err(BenchError::Invalid {
                        instance: config.label.clone(),
                        variant,
                        seed,
                        count: violations.len(),
                        first: first.to_string(),
                    });
                }
                records.push(RunRecord {
                    instance: config.label.clone(),
                    variant,
                    seed,
                    cost: report.best_cost,
                    distance_km: report.best_schedule.total_distance_km(),
                    sorties: report.best_schedule.sortie_count(),
                    time_s: report.wall_time_s,
                });
            }
        }
    }
    let order: BTreeMap<&str, usize> = suite
        .iter()
        .enumerate()
        .map(|(i, c)| (c.label.as_str(), i))
        .collect();
    records.sort_by(|a, b| {
        (order[a.instance.as_str()], a.variant, a.seed).cmp(&(
            order[b.instance.as_str()],
            b.variant,
            b.seed,
        ))
    });
    let summary = summarize(&records)?;
    Ok(SuiteResult { records, summary })
}

/// Aggregates records per (instance, variant), keeping first-appearance order.
pub fn summarize(records: &[RunRecord]) -> Result<Vec<SummaryRow>, BenchError> {
    let mut groups: Vec<((&str, Variant), Vec<&RunRecord>)> = Vec::new();
    for r in records {
        let key = (r.instance.as_str(), r.variant);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    let mean = |xs: &[&RunRecord], f: fn(&RunRecord) -> f64| {
        xs.iter().map(|r| f(r)).sum::<f64>() / xs.len() as f64
    };
    let full_mean: BTreeMap<&str, f64> = groups
        .iter()
        .filter(|((_, v), _)| *v == Variant::Full)
        .map(|((inst, _), rs)| (*inst, mean(rs, |r| r.cost)))
        .collect();

    groups
        .iter()
        .map(|((inst, variant), rs)| {
            let costs: Vec<f64> = rs.iter().map(|r| r.cost).collect();
            let mean_cost = mean(rs, |r| r.cost);
            Ok(SummaryRow {
                instance: inst.to_string(),
                variant: *variant,
                runs: rs.len(),
                min_cost: costs.iter().copied().fold(f64::INFINITY, f64::min),
                max_cost: costs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_cost,
                mean_time_s: mean(rs, |r| r.time_s),
                cv_population: coefficient_of_variation(&costs)?,
                gap_vs_full: full_mean
                    .get(inst)
                    .map(|&full| gap(mean_cost, full))
                    .transpose()?,
            })
        })
        .collect()
}

fn write_rows<T: Serialize>(rows: &[T], out: impl io::Write) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(input: impl io::Read) -> Result<Vec<T>, BenchError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(BenchError::from)
}

pub fn write_records_csv(records: &[RunRecord], out: impl io::Write) -> Result<(), BenchError> {
    write_rows(records, out)
}

pub fn read_records_csv(input: impl io::Read) -> Result<Vec<RunRecord>, BenchError> {
    read_rows(input)
}

pub fn write_summary_csv(summary: &[SummaryRow], out: impl io::Write) -> Result<(), BenchError> {
    write_rows(summary, out)
}

pub fn read_summary_csv(input: impl io::Read) -> Result<Vec<SummaryRow>, BenchError> {
    read_rows(input)
}

/// Reads a suite file: CSV with columns `label,num_tasks,num_depots`.
pub fn read_suite_csv(path: impl AsRef<Path>) -> Result<Vec<SuiteConfig>, BenchError> {
    read_rows(std::fs::File::open(path)?)
}
