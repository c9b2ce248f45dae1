use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{distance, CoordinateSystem, DroneSpec, Leg, Location, ModelError, ObjectiveWeights};

/// Identifier of a task (`1..=c`) or a depot (`c+1..=c+m`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Delivery only.
    Drop,
    /// Collection only.
    Pickup,
    /// Delivery and collection at the same rooftop, in one sortie.
    PickDrop,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::Drop, TaskKind::Pickup, TaskKind::PickDrop];

    pub fn has_drop(self) -> bool {
        matches!(self, TaskKind::Drop | TaskKind::PickDrop)
    }

    pub fn has_pickup(self) -> bool {
        matches!(self, TaskKind::Pickup | TaskKind::PickDrop)
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Drop => "drop",
            TaskKind::Pickup => "pickup",
            TaskKind::PickDrop => "pick_drop",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: NodeId,
    pub location: Location,
    pub kind: TaskKind,
    pub drop_weight: Option<f64>,
    pub pickup_weight: Option<f64>,
}

impl Task {
    pub fn drop(id: usize, location: Location, weight_kg: f64) -> Self {
        Task {
            id: NodeId(id),
            location,
            kind: TaskKind::Drop,
            drop_weight: Some(weight_kg),
            pickup_weight: None,
        }
    }

    pub fn pickup(id: usize, location: Location, weight_kg: f64) -> Self {
        Task {
            id: NodeId(id),
            location,
            kind: TaskKind::Pickup,
            drop_weight: None,
            pickup_weight: Some(weight_kg),
        }
    }

    pub fn pick_drop(id: usize, location: Location, drop_kg: f64, pickup_kg: f64) -> Self {
        Task {
            id: NodeId(id),
            location,
            kind: TaskKind::PickDrop,
            drop_weight: Some(drop_kg),
            pickup_weight: Some(pickup_kg),
        }
    }

    /// Payload on the leg flown into this task from the depot.
    pub fn outbound_payload(&self) -> f64 {
        self.drop_weight.unwrap_or(0.0)
    }

    /// Payload on the leg flown from this task back to the depot.
    pub fn return_payload(&self) -> f64 {
        self.pickup_weight.unwrap_or(0.0)
    }

    pub fn heaviest_payload(&self) -> f64 {
        self.outbound_payload().max(self.return_payload())
    }

    /// Whether a lone depot -> task -> depot sortie over `distance_km` each way is in range.
    pub fn round_trip_feasible(&self, distance_km: f64, drone: &DroneSpec) -> bool {
        drone
            .effective_range(self.heaviest_payload())
            .is_ok_and(|range| distance_km <= range)
    }

    fn check(&self, drone: &DroneSpec) -> Result<(), ModelError> {
        self.location.check()?;
        let (needs_drop, needs_pickup) = (self.kind.has_drop(), self.kind.has_pickup());
        for (weight, needed, which) in [
            (self.drop_weight, needs_drop, "drop_weight"),
            (self.pickup_weight, needs_pickup, "pickup_weight"),
        ] {
            match (weight, needed) {
                (Some(w), true) => {
                    if !(w > 0.0 && w <= drone.max_capacity_kg) {
                        return Err(ModelError::OverCapacity {
                            task: self.id,
                            weight_kg: w,
                            capacity_kg: drone.max_capacity_kg,
                        });
                    }
                }
                (None, true) => {
                    return Err(ModelError::MissingWeight {
                        task: self.id,
                        field: which,
                    })
                }
                (Some(_), false) => {
                    return Err(ModelError::UnexpectedWeight {
                        task: self.id,
                        field: which,
                        kind: self.kind,
                    })
                }
                (None, false) => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Depot {
    pub id: NodeId,
    pub location: Location,
}

/// A complete problem input with a precomputed distance matrix.
///
/// Tasks are stored sorted by id (`1..=c`) and depots by id (`c+1..=c+m`), so a node's
/// matrix index is `id - 1`. Structural invariants are checked at construction; the
/// reachability of every task is a separate check because schedules may legitimately be
/// validated against instances that violate it.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    coordinate_system: CoordinateSystem,
    drone: DroneSpec,
    weights: ObjectiveWeights,
    depots: Vec<Depot>,
    tasks: Vec<Task>,
    dist: Vec<f64>,
    // serviceable[t * m + k]: task t can be served alone from depot k
    serviceable: Vec<bool>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        coordinate_system: CoordinateSystem,
        drone: DroneSpec,
        weights: ObjectiveWeights,
        mut depots: Vec<Depot>,
        mut tasks: Vec<Task>,
    ) -> Result<Self, ModelError> {
        drone.check()?;
        weights.check()?;
        if depots.is_empty() || tasks.is_empty() {
            return Err(ModelError::Empty {
                depots: depots.len(),
                tasks: tasks.len(),
            });
        }
        let c = tasks.len();
        let m = depots.len();
        tasks.sort_by_key(|t| t.id);
        depots.sort_by_key(|d| d.id);

        let mut seen = HashSet::with_capacity(c + m);
        for id in tasks
            .iter()
            .map(|t| t.id)
            .chain(depots.iter().map(|d| d.id))
        {
            if !seen.insert(id) {
                return Err(ModelError::DuplicateId(id));
            }
        }
        for (i, t) in tasks.iter().enumerate() {
            if t.id.0 != i + 1 {
                return Err(ModelError::IdLayout(format!(
                    "task ids must be exactly 1..={c}, found {}",
                    t.id
                )));
            }
        }
        for (k, d) in depots.iter().enumerate() {
            if d.id.0 != c + k + 1 {
                return Err(ModelError::IdLayout(format!(
                    "depot ids must be exactly {}..={}, found {}",
                    c + 1,
                    c + m,
                    d.id
                )));
            }
        }

        let locations: Vec<Location> = tasks
            .iter()
            .map(|t| t.location)
            .chain(depots.iter().map(|d| d.location))
            .collect();
        for loc in &locations {
            loc.check()?;
            if loc.system() != coordinate_system {
                return Err(ModelError::CoordinateMismatch {
                    left: coordinate_system,
                    right: loc.system(),
                });
            }
        }
        for t in &tasks {
            t.check(&drone)?;
        }

        let n = c + m;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = distance(&locations[i], &locations[j])?;
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let mut serviceable = vec![false; c * m];
        for (ti, t) in tasks.iter().enumerate() {
            for k in 0..m {
                serviceable[ti * m + k] = t.round_trip_feasible(dist[ti * n + c + k], &drone);
            }
        }

        Ok(Instance {
            name: name.into(),
            coordinate_system,
            drone,
            weights,
            depots,
            tasks,
            dist,
            serviceable,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coordinate_system(&self) -> CoordinateSystem {
        self.coordinate_system
    }

    pub fn drone(&self) -> &DroneSpec {
        &self.drone
    }

    pub fn weights(&self) -> &ObjectiveWeights {
        &self.weights
    }

    pub fn depots(&self) -> &[Depot] {
        &self.depots
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn num_depots(&self) -> usize {
        self.depots.len()
    }

    pub fn task_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.tasks.iter().map(|t| t.id)
    }

    pub fn is_task(&self, id: NodeId) -> bool {
        (1..=self.tasks.len()).contains(&id.0)
    }

    pub fn task(&self, id: NodeId) -> Option<&Task> {
        if self.is_task(id) {
            Some(&self.tasks[id.0 - 1])
        } else {
            None
        }
    }

    /// Position of a depot in [`Instance::depots`].
    pub fn depot_index(&self, id: NodeId) -> Option<usize> {
        let c = self.tasks.len();
        (id.0 > c && id.0 <= c + self.depots.len()).then(|| id.0 - c - 1)
    }

    pub fn depot_id(&self, index: usize) -> NodeId {
        self.depots[index].id
    }

    pub fn location(&self, id: NodeId) -> Option<Location> {
        if let Some(t) = self.task(id) {
            Some(t.location)
        } else {
            self.depot_index(id).map(|k| self.depots[k].location)
        }
    }

    fn node_index(&self, id: NodeId) -> Option<usize> {
        (id.0 >= 1 && id.0 <= self.tasks.len() + self.depots.len()).then(|| id.0 - 1)
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> Result<f64, ModelError> {
        let i = self.node_index(a).ok_or(ModelError::UnknownNode(a))?;
        let j = self.node_index(b).ok_or(ModelError::UnknownNode(b))?;
        Ok(self.dist[i * self.dist_stride() + j])
    }

    /// Matrix lookup for ids already known to belong to this instance.
    pub(crate) fn dist(&self, a: NodeId, b: NodeId) -> f64 {
        self.dist[(a.0 - 1) * self.dist_stride() + (b.0 - 1)]
    }

    fn dist_stride(&self) -> usize {
        self.tasks.len() + self.depots.len()
    }

    /// Whether `task` can be served on its own from the depot at `depot_index`.
    pub fn serviceable(&self, task: NodeId, depot_index: usize) -> bool {
        self.is_task(task) && self.serviceable[(task.0 - 1) * self.depots.len() + depot_index]
    }

    pub fn serviceable_depots(&self, task: NodeId) -> impl Iterator<Item = usize> + '_ {
        (0..self.depots.len()).filter(move |&k| self.serviceable(task, k))
    }

    /// Depot index closest to `task`; ties go to the lower index.
    pub fn nearest_depot(&self, task: NodeId) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, d) in self.depots.iter().enumerate() {
            let dd = self.dist(task, d.id);
            if dd < best_d {
                best = k;
                best_d = dd;
            }
        }
        best
    }

    /// Every task must be servable alone from its nearest depot.
    pub fn check_reachability(&self) -> Result<(), ModelError> {
        for t in &self.tasks {
            let k = self.nearest_depot(t.id);
            if !self.serviceable(t.id, k) {
                return Err(ModelError::Unreachable {
                    task: t.id,
                    nearest_depot: self.depots[k].id,
                    distance_km: self.dist(t.id, self.depots[k].id),
                });
            }
        }
        Ok(())
    }

    /// Whether a drone that just dropped at `drop` can fly empty to `pickup`.
    pub fn chain_feasible(&self, drop: NodeId, pickup: NodeId) -> bool {
        self.dist(drop, pickup) <= self.drone.max_range_km
    }
}

/// True iff the leg's length is within the range left at its payload.
pub fn leg_feasible(leg: &Leg, instance: &Instance) -> Result<bool, ModelError> {
    let d = instance.distance(leg.from, leg.to)?;
    Ok(d <= instance.drone().effective_range(leg.payload_kg)?)
}

/// Incremental construction with automatically assigned ids.
///
/// Tasks are numbered `1..=c` in insertion order and depots `c+1..=c+m`.
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    name: String,
    coordinate_system: CoordinateSystem,
    drone: DroneSpec,
    weights: ObjectiveWeights,
    depots: Vec<Location>,
    tasks: Vec<(Location, TaskKind, Option<f64>, Option<f64>)>,
}

impl InstanceBuilder {
    pub fn new(name: impl Into<String>, coordinate_system: CoordinateSystem) -> Self {
        InstanceBuilder {
            name: name.into(),
            coordinate_system,
            drone: DroneSpec::default(),
            weights: ObjectiveWeights::default(),
            depots: Vec::new(),
            tasks: Vec::new(),
        }
    }

    pub fn planar(name: impl Into<String>) -> Self {
        Self::new(name, CoordinateSystem::Planar)
    }

    pub fn drone(mut self, drone: DroneSpec) -> Self {
        self.drone = drone;
        self
    }

    pub fn weights(mut self, weights: ObjectiveWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn depot_at(mut self, location: Location) -> Self {
        self.depots.push(location);
        self
    }

    pub fn depot(self, x: f64, y: f64) -> Self {
        self.depot_at(Location::planar(x, y))
    }

    pub fn task_at(
        mut self,
        location: Location,
        kind: TaskKind,
        drop_weight: Option<f64>,
        pickup_weight: Option<f64>,
    ) -> Self {
        self.tasks
            .push((location, kind, drop_weight, pickup_weight));
        self
    }

    pub fn drop(self, x: f64, y: f64, weight_kg: f64) -> Self {
        self.task_at(
            Location::planar(x, y),
            TaskKind::Drop,
            Some(weight_kg),
            None,
        )
    }

    pub fn pickup(self, x: f64, y: f64, weight_kg: f64) -> Self {
        self.task_at(
            Location::planar(x, y),
            TaskKind::Pickup,
            None,
            Some(weight_kg),
        )
    }

    pub fn pick_drop(self, x: f64, y: f64, drop_kg: f64, pickup_kg: f64) -> Self {
        self.task_at(
            Location::planar(x, y),
            TaskKind::PickDrop,
            Some(drop_kg),
            Some(pickup_kg),
        )
    }

    pub fn build(self) -> Result<Instance, ModelError> {
        let c = self.tasks.len();
        let tasks = self
            .tasks
            .into_iter()
            .enumerate()
            .map(|(i, (location, kind, drop_weight, pickup_weight))| Task {
                id: NodeId(i + 1),
                location,
                kind,
                drop_weight,
                pickup_weight,
            })
            .collect();
        let depots = self
            .depots
            .into_iter()
            .enumerate()
            .map(|(k, location)| Depot {
                id: NodeId(c + k + 1),
                location,
            })
            .collect();
        Instance::new(
            self.name,
            self.coordinate_system,
            self.drone,
            self.weights,
            depots,
            tasks,
        )
    }
}
