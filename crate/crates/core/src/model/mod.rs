//! Problem data, the payload-dependent range model, the objective and the validator.

mod drone;
mod geometry;
mod instance;
mod schedule;
mod validate;

pub use drone::{effective_range, payload_penalty, DroneSpec, ObjectiveWeights};
pub use geometry::{distance, CoordinateSystem, Location, EARTH_RADIUS_KM};
pub use instance::{leg_feasible, Depot, Instance, InstanceBuilder, NodeId, Task, TaskKind};
pub(crate) use schedule::pattern_legs;
pub use schedule::{objective, DepotPlan, Leg, RoutePattern, Schedule, Sortie};
pub use validate::{validate_schedule, SortieRef, Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("cannot measure between {left} and {right} coordinates")]
    CoordinateMismatch {
        left: CoordinateSystem,
        right: CoordinateSystem,
    },
    #[error("invalid coordinate {0:?}")]
    InvalidCoordinate(Location),
    #[error("payload {weight_kg} kg outside [0, {capacity_kg}] kg")]
    PayloadOutOfRange { weight_kg: f64, capacity_kg: f64 },
    #[error("C6: task {task} package weighs {weight_kg} kg, must be in (0, {capacity_kg}] kg")]
    OverCapacity {
        task: NodeId,
        weight_kg: f64,
        capacity_kg: f64,
    },
    #[error("invalid drone: {0}")]
    InvalidDrone(String),
    #[error("objective weights must lie in [0, 1], got alpha={alpha} rho={rho}")]
    InvalidWeights { alpha: f64, rho: f64 },
    #[error("instance needs at least one depot and one task (got {depots} depots, {tasks} tasks)")]
    Empty { depots: usize, tasks: usize },
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
    #[error("{0}")]
    IdLayout(String),
    #[error("task {task} is missing {field}")]
    MissingWeight { task: NodeId, field: &'static str },
    #[error("task {task} of kind {kind} must not carry {field}")]
    UnexpectedWeight {
        task: NodeId,
        field: &'static str,
        kind: TaskKind,
    },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("sortie from depot {0} has no legs")]
    EmptySortie(NodeId),
    #[error("tasks {0:?} form no legal sortie")]
    NoPattern(Vec<NodeId>),
    #[error(
        "task {task} is unreachable: nearest depot {nearest_depot} is {distance_km:.3} km away"
    )]
    Unreachable {
        task: NodeId,
        nearest_depot: NodeId,
        distance_km: f64,
    },
}
