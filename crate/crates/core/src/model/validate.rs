//! Feasibility checks for a complete schedule.
//!
//! Each failed check yields one [`Violation`] naming the model constraint it breaks:
//!
//! | kind            | constraint | meaning                                              |
//! |-----------------|------------|------------------------------------------------------|
//! | `DepotAnchor`   | C3         | sortie does not leave from and return to its depot   |
//! | `Coverage`      | C3         | task missing from the schedule or served twice       |
//! | `Pattern`       | pattern    | visit sequence or payloads match no legal sortie     |
//! | `PickDropSplit` | C4         | a pick-drop task is not served by a single sortie    |
//! | `Range`         | C5         | leg longer than the range left at its payload        |
//! | `Capacity`      | C6         | leg payload outside `[0, C_max]`                     |

use std::collections::HashMap;
use std::fmt;

use super::{pattern_legs, DepotPlan, Instance, NodeId, RoutePattern, Schedule, Sortie, TaskKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    DepotAnchor,
    Coverage,
    Pattern,
    PickDropSplit,
    Range,
    Capacity,
}

impl ViolationKind {
    pub fn constraint(self) -> &'static str {
        match self {
            ViolationKind::DepotAnchor | ViolationKind::Coverage => "C3",
            ViolationKind::Pattern => "pattern",
            ViolationKind::PickDropSplit => "C4",
            ViolationKind::Range => "C5",
            ViolationKind::Capacity => "C6",
        }
    }
}

/// Where a violation was found: `(depot id, index within the depot's sortie list)`.
pub type SortieRef = (NodeId, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub sortie: Option<SortieRef>,
    pub task: Option<NodeId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.kind.constraint())?;
        if let Some((depot, idx)) = self.sortie {
            write!(f, "depot {depot} sortie #{idx}: ")?;
        }
        f.write_str(&self.detail)
    }
}

/// All constraint violations of `schedule`; empty iff the schedule is feasible.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut visits: HashMap<NodeId, usize> = HashMap::new();

    for plan in schedule.plans() {
        if instance.depot_index(plan.depot_id).is_none() {
            out.push(Violation {
                kind: ViolationKind::DepotAnchor,
                sortie: None,
                task: None,
                detail: format!("plan anchored at {} which is not a depot", plan.depot_id),
            });
        }
        for (idx, sortie) in plan.sorties.iter().enumerate() {
            check_sortie(instance, plan, (plan.depot_id, idx), sortie, &mut out);
            for v in sortie.visits() {
                *visits.entry(v).or_default() += 1;
            }
        }
    }

    for id in instance.task_ids() {
        match visits.get(&id).copied().unwrap_or(0) {
            1 => {}
            0 => out.push(Violation {
                kind: ViolationKind::Coverage,
                sortie: None,
                task: Some(id),
                detail: format!("task {id} is never served"),
            }),
            k => out.push(Violation {
                kind: ViolationKind::Coverage,
                sortie: None,
                task: Some(id),
                detail: format!("task {id} is visited {k} times"),
            }),
        }
    }
    out
}

fn check_sortie(
    instance: &Instance,
    plan: &DepotPlan,
    at: SortieRef,
    sortie: &Sortie,
    out: &mut Vec<Violation>,
) {
    let legs = sortie.legs();
    let home = sortie.depot_id();
    let violation = |kind, task, detail: String| Violation {
        kind,
        sortie: Some(at),
        task,
        detail,
    };

    if home != plan.depot_id {
        out.push(violation(
            ViolationKind::DepotAnchor,
            None,
            format!(
                "sortie belongs to depot {home} but is listed under {}",
                plan.depot_id
            ),
        ));
    }
    if legs[0].from != home {
        out.push(violation(
            ViolationKind::DepotAnchor,
            None,
            format!("first leg departs {} instead of depot {home}", legs[0].from),
        ));
    }
    let last = legs[legs.len() - 1];
    if last.to != home {
        out.push(violation(
            ViolationKind::DepotAnchor,
            None,
            format!("last leg arrives at {} instead of depot {home}", last.to),
        ));
    }

    // Per-leg load and range. An overweight leg has no defined range, so it is only
    // reported against C6.
    let capacity = instance.drone().max_capacity_kg;
    let mut overweight = vec![false; legs.len()];
    for (i, leg) in legs.iter().enumerate() {
        if !(0.0..=capacity).contains(&leg.payload_kg) {
            overweight[i] = true;
            out.push(violation(
                ViolationKind::Capacity,
                None,
                format!(
                    "leg {}->{} carries {} kg, capacity is {capacity} kg",
                    leg.from, leg.to, leg.payload_kg
                ),
            ));
            continue;
        }
        match super::leg_feasible(leg, instance) {
            Ok(true) => {}
            Ok(false) => {
                let d = instance.dist(leg.from, leg.to);
                let range = instance
                    .drone()
                    .effective_range(leg.payload_kg)
                    .unwrap_or(0.0);
                out.push(violation(
                    ViolationKind::Range,
                    None,
                    format!(
                        "leg {}->{} is {d:.3} km but range at {} kg is {range:.3} km",
                        leg.from, leg.to, leg.payload_kg
                    ),
                ));
            }
            // Sortie::new already rejected unknown nodes.
            Err(_) => unreachable!("sortie legs reference known nodes"),
        }
    }

    for pair in legs.windows(2) {
        if pair[0].to != pair[1].from {
            out.push(violation(
                ViolationKind::Pattern,
                None,
                format!(
                    "legs are not contiguous at {} / {}",
                    pair[0].to, pair[1].from
                ),
            ));
            return;
        }
    }

    let interior: Vec<NodeId> = sortie.visits().collect();
    let mut kinds = Vec::with_capacity(interior.len());
    for &v in &interior {
        match instance.task(v) {
            Some(t) => kinds.push(t.kind),
            None => {
                out.push(violation(
                    ViolationKind::Pattern,
                    None,
                    format!("sortie passes through non-task node {v} mid-flight"),
                ));
                return;
            }
        }
    }

    let matched = RoutePattern::classify(&kinds);
    if matched.is_none() || matched != Some(sortie.pattern()) {
        let split = interior
            .iter()
            .zip(&kinds)
            .find(|(_, k)| **k == TaskKind::PickDrop)
            .map(|(id, _)| *id);
        let seq = interior
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("->");
        match (matched, split) {
            (None, Some(t)) => out.push(violation(
                ViolationKind::PickDropSplit,
                Some(t),
                format!("pick-drop task {t} must be served alone by one sortie (visits {seq})"),
            )),
            (None, None) => out.push(violation(
                ViolationKind::Pattern,
                None,
                format!("visit sequence {seq} matches no legal sortie shape"),
            )),
            (Some(p), _) => out.push(violation(
                ViolationKind::Pattern,
                None,
                format!("declared {} but visits {seq} form {p}", sortie.pattern()),
            )),
        }
        return;
    }

    let expected = pattern_legs(instance, home, &interior);
    for (i, (leg, want)) in legs.iter().zip(&expected).enumerate() {
        if !overweight[i] && leg.payload_kg != want.payload_kg {
            out.push(violation(
                ViolationKind::Pattern,
                None,
                format!(
                    "leg {}->{} carries {} kg, {} requires {} kg",
                    leg.from,
                    leg.to,
                    leg.payload_kg,
                    sortie.pattern(),
                    want.payload_kg
                ),
            ));
        }
    }
}
