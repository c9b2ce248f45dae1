use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Instance, ModelError, NodeId, ObjectiveWeights, TaskKind};

/// One flight between two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Leg {
    pub from: NodeId,
    pub to: NodeId,
    pub payload_kg: f64,
}

/// The four legal shapes of a drone sortie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutePattern {
    /// depot -> pickup -> depot
    PickupOnly,
    /// depot -> drop -> depot
    DropOnly,
    /// depot -> drop -> pickup -> depot
    DropThenPickup,
    /// depot -> pick-drop -> depot, loaded both ways
    PickDropSame,
}

impl RoutePattern {
    /// The pattern matching a sequence of visited task kinds, if any.
    pub fn classify(kinds: &[TaskKind]) -> Option<Self> {
        match kinds {
            [TaskKind::Pickup] => Some(RoutePattern::PickupOnly),
            [TaskKind::Drop] => Some(RoutePattern::DropOnly),
            [TaskKind::Drop, TaskKind::Pickup] => Some(RoutePattern::DropThenPickup),
            [TaskKind::PickDrop] => Some(RoutePattern::PickDropSame),
            _ => None,
        }
    }
}

impl fmt::Display for RoutePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoutePattern::PickupOnly => "pickup_only",
            RoutePattern::DropOnly => "drop_only",
            RoutePattern::DropThenPickup => "drop_then_pickup",
            RoutePattern::PickDropSame => "pick_drop_same",
        })
    }
}

/// One drone launch from a depot and back.
///
/// The sortie's total distance is computed once at construction and reused by the
/// objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Sortie {
    depot_id: NodeId,
    legs: Vec<Leg>,
    pattern: RoutePattern,
    distance_km: f64,
}

impl Sortie {
    /// Wraps arbitrary legs. Only node existence is checked here; everything else is the
    /// validator's business.
    pub fn new(
        instance: &Instance,
        depot_id: NodeId,
        legs: Vec<Leg>,
        pattern: RoutePattern,
    ) -> Result<Self, ModelError> {
        if legs.is_empty() {
            return Err(ModelError::EmptySortie(depot_id));
        }
        let mut distance_km = 0.0;
        for leg in &legs {
            distance_km += instance.distance(leg.from, leg.to)?;
        }
        Ok(Sortie {
            depot_id,
            legs,
            pattern,
            distance_km,
        })
    }

    /// Builds the sortie that serves `tasks` in order from `depot_id`, deriving the
    /// pattern and the leg payloads from the task kinds and weights.
    pub fn serving(
        instance: &Instance,
        depot_id: NodeId,
        tasks: &[NodeId],
    ) -> Result<Self, ModelError> {
        instance
            .depot_index(depot_id)
            .ok_or(ModelError::UnknownNode(depot_id))?;
        let mut kinds = Vec::with_capacity(tasks.len());
        for &t in tasks {
            kinds.push(instance.task(t).ok_or(ModelError::UnknownNode(t))?.kind);
        }
        let pattern =
            RoutePattern::classify(&kinds).ok_or_else(|| ModelError::NoPattern(tasks.to_vec()))?;
        let legs = pattern_legs(instance, depot_id, tasks);
        let distance_km = legs.iter().map(|l| instance.dist(l.from, l.to)).sum();
        Ok(Sortie {
            depot_id,
            legs,
            pattern,
            distance_km,
        })
    }

    pub fn depot_id(&self) -> NodeId {
        self.depot_id
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn pattern(&self) -> RoutePattern {
        self.pattern
    }

    /// Cached sum of leg lengths.
    pub fn distance_km(&self) -> f64 {
        self.distance_km
    }

    /// Interior nodes visited, in flight order.
    pub fn visits(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.legs[..self.legs.len() - 1].iter().map(|l| l.to)
    }

    pub fn recompute_distance(&self, instance: &Instance) -> Result<f64, ModelError> {
        self.legs
            .iter()
            .try_fold(0.0, |acc, l| Ok(acc + instance.distance(l.from, l.to)?))
    }

    /// Every leg within range at its payload.
    pub fn is_feasible(&self, instance: &Instance) -> bool {
        self.legs
            .iter()
            .all(|l| super::leg_feasible(l, instance).unwrap_or(false))
    }
}

/// Legs for a task sequence whose kinds are already known to form a pattern.
///
/// At most one parcel is aboard per leg: the outbound leg carries the first task's drop
/// parcel, a drop -> pickup hop is empty and the homebound leg carries the last task's
/// pickup parcel.
pub(crate) fn pattern_legs(instance: &Instance, depot_id: NodeId, tasks: &[NodeId]) -> Vec<Leg> {
    let mut legs = Vec::with_capacity(tasks.len() + 1);
    let mut prev = depot_id;
    let mut payload = 0.0;
    for (i, &t) in tasks.iter().enumerate() {
        let task = instance.task(t).expect("task ids checked by caller");
        if i == 0 {
            payload = task.outbound_payload();
        }
        legs.push(Leg {
            from: prev,
            to: t,
            payload_kg: payload,
        });
        // Leaving a drop-only stop the drone is empty; otherwise it carries the pickup.
        payload = task.return_payload();
        prev = t;
    }
    legs.push(Leg {
        from: prev,
        to: depot_id,
        payload_kg: payload,
    });
    legs
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepotPlan {
    pub depot_id: NodeId,
    pub sorties: Vec<Sortie>,
}

impl DepotPlan {
    pub fn new(depot_id: NodeId) -> Self {
        DepotPlan {
            depot_id,
            sorties: Vec::new(),
        }
    }

    /// Task visits in sortie order.
    pub fn task_sequence(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.sorties.iter().flat_map(|s| s.visits())
    }

    pub fn distance_km(&self) -> f64 {
        self.sorties.iter().map(Sortie::distance_km).sum()
    }
}

/// Route plans of all depots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    plans: Vec<DepotPlan>,
}

impl Schedule {
    pub fn new(plans: Vec<DepotPlan>) -> Self {
        Schedule { plans }
    }

    pub fn plans(&self) -> &[DepotPlan] {
        &self.plans
    }

    pub fn plans_mut(&mut self) -> &mut [DepotPlan] {
        &mut self.plans
    }

    pub fn into_plans(self) -> Vec<DepotPlan> {
        self.plans
    }

    pub fn sorties(&self) -> impl Iterator<Item = &Sortie> {
        self.plans.iter().flat_map(|p| p.sorties.iter())
    }

    pub fn sortie_count(&self) -> usize {
        self.plans.iter().map(|p| p.sorties.len()).sum()
    }

    pub fn total_distance_km(&self) -> f64 {
        self.plans.iter().map(DepotPlan::distance_km).sum()
    }

    pub fn objective(&self, weights: &ObjectiveWeights) -> f64 {
        objective(self, weights)
    }

    /// Total distance summed from the instance's distance matrix rather than the caches.
    pub fn recompute_distance(&self, instance: &Instance) -> Result<f64, ModelError> {
        self.sorties()
            .try_fold(0.0, |acc, s| Ok(acc + s.recompute_distance(instance)?))
    }
}

/// `alpha * total distance + rho * number of sorties`.
pub fn objective(schedule: &Schedule, weights: &ObjectiveWeights) -> f64 {
    weights.alpha * schedule.total_distance_km() + weights.rho * schedule.sortie_count() as f64
}
