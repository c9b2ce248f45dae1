//! Schedule files (JSON) and convergence traces (CSV).

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{DepotPlan, Instance, Leg, ModelError, NodeId, RoutePattern, Schedule, Sortie};
use crate::solver::TracePoint;

#[derive(Debug, thiserror::Error)]
pub enum ScheduleFileError {
    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("malformed schedule file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schedule does not fit the instance: {0}")]
    Model(#[from] ModelError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    instance: String,
    cost: f64,
    distance_km: f64,
    sorties: usize,
    plans: Vec<PlanRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanRecord {
    depot: NodeId,
    sorties: Vec<SortieRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SortieRecord {
    pattern: RoutePattern,
    legs: Vec<Leg>,
}

pub fn schedule_to_json(schedule: &Schedule, instance: &Instance) -> String {
    let file = ScheduleFile {
        instance: instance.name().to_string(),
        cost: schedule.objective(instance.weights()),
        distance_km: schedule.total_distance_km(),
        sorties: schedule.sortie_count(),
        plans: schedule
            .plans()
            .iter()
            .map(|p| PlanRecord {
                depot: p.depot_id,
                sorties: p
                    .sorties
                    .iter()
                    .map(|s| SortieRecord {
                        pattern: s.pattern(),
                        legs: s.legs().to_vec(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("schedule serializes") + "\n"
}

/// Parses a schedule file against `instance`. Distances are recomputed from the instance;
/// the summary fields in the file are informational only.
pub fn schedule_from_json(text: &str, instance: &Instance) -> Result<Schedule, ScheduleFileError> {
    let file: ScheduleFile = serde_json::from_str(text)?;
    let mut plans = Vec::with_capacity(file.plans.len());
    for p in file.plans {
        let mut plan = DepotPlan::new(p.depot);
        for s in p.sorties {
            plan.sorties
                .push(Sortie::new(instance, p.depot, s.legs, s.pattern)?);
        }
        plans.push(plan);
    }
    Ok(Schedule::new(plans))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ScheduleFileError + '_ {
    move |source| ScheduleFileError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_schedule(
    schedule: &Schedule,
    instance: &Instance,
    path: impl AsRef<Path>,
) -> Result<(), ScheduleFileError> {
    let path = path.as_ref();
    fs::write(path, schedule_to_json(schedule, instance)).map_err(io_err(path))
}

pub fn read_schedule(
    instance: &Instance,
    path: impl AsRef<Path>,
) -> Result<Schedule, ScheduleFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    schedule_from_json(&text, instance)
}

pub fn trace_to_csv(trace: &[TracePoint], out: impl io::Write) -> Result<(), ScheduleFileError> {
    let mut w = csv::Writer::from_writer(out);
    for p in trace {
        w.serialize(p)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_trace_csv(
    trace: &[TracePoint],
    path: impl AsRef<Path>,
) -> Result<(), ScheduleFileError> {
    let path = path.as_ref();
    trace_to_csv(trace, fs::File::create(path).map_err(io_err(path))?)
}

pub fn read_trace_csv(input: impl io::Read) -> Result<Vec<TracePoint>, ScheduleFileError> {
    Ok(csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate, GenParams};
    use crate::model::validate_schedule;
    use crate::solver::{solve, SaConfig};

    #[test]
    fn schedule_and_trace_round_trip() {
        let inst = generate(&GenParams {
            num_tasks: 15,
            num_depots: 2,
            seed: 9,
            ..GenParams::default()
        })
        .unwrap();
        let report = solve(
            &inst,
            &SaConfig {
                t0: 50.0,
                t_end: 1.0,
                ..SaConfig::default()
            }
            .with_seed(4),
        )
        .unwrap();
        let text = schedule_to_json(&report.best_schedule, &inst);
        let back = schedule_from_json(&text, &inst).unwrap();
        assert_eq!(back, report.best_schedule);
        assert!(validate_schedule(&inst, &back).is_empty());

        let mut buf = Vec::new();
        trace_to_csv(&report.trace, &mut buf).unwrap();
        assert!(buf.starts_with(b"iter,temperature,incumbent_cost,best_cost\n"));
        assert_eq!(read_trace_csv(buf.as_slice()).unwrap(), report.trace);
    }

    #[test]
    fn unknown_node_in_file_is_rejected() {
        let inst = generate(&GenParams {
            num_tasks: 3,
            num_depots: 1,
            seed: 1,
            ..GenParams::default()
        })
        .unwrap();
        let text = r#"{"instance": "x", "cost": 0, "distance_km": 0, "sorties": 1,
            "plans": [{"depot": 4, "sorties": [{"pattern": "drop_only",
            "legs": [{"from": 4, "to": 99, "payload_kg": 1}, {"from": 99, "to": 4, "payload_kg": 0}]}]}]}"#;
        assert!(matches!(
            schedule_from_json(text, &inst),
            Err(ScheduleFileError::Model(ModelError::UnknownNode(NodeId(
                99
            ))))
        ));
    }
}
