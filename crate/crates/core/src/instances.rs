//! Random instance generation, the benchmark suite shapes, and instance files.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    distance, CoordinateSystem, Depot, DroneSpec, Instance, Location, ModelError, NodeId,
    ObjectiveWeights, Task, TaskKind,
};

/// Attempts per task before generation gives up on placing a reachable task.
const MAX_TASK_ATTEMPTS: usize = 100_000;

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed instance file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("instance violates the model: {0}")]
    Invalid(#[from] ModelError),
    #[error("invalid generation parameters: {0}")]
    Params(String),
    #[error("malformed instance file: {0}")]
    Coordinates(String),
    #[error("could not place task {task} within reach of a depot after {attempts} attempts")]
    Unreachable { task: usize, attempts: usize },
}

/// Task-kind probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindMix {
    pub drop: f64,
    pub pickup: f64,
    pub pick_drop: f64,
}

impl Default for KindMix {
    fn default() -> Self {
        KindMix {
            drop: 1.0 / 3.0,
            pickup: 1.0 / 3.0,
            pick_drop: 1.0 / 3.0,
        }
    }
}

impl KindMix {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TaskKind {
        let u: f64 = rng.random();
        if u < self.drop {
            TaskKind::Drop
        } else if u < self.drop + self.pickup {
            TaskKind::Pickup
        } else {
            TaskKind::PickDrop
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub num_tasks: usize,
    pub num_depots: usize,
    /// Side of the square area, in km.
    pub area_km: f64,
    pub weight_min_kg: f64,
    pub weight_max_kg: f64,
    pub kind_mix: KindMix,
    pub drone: DroneSpec,
    pub weights: ObjectiveWeights,
    pub seed: u64,
    pub name: Option<String>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            num_tasks: 40,
            num_depots: 5,
            area_km: 50.0,
            weight_min_kg: 1.0,
            weight_max_kg: 8.0,
            kind_mix: KindMix::default(),
            drone: DroneSpec::default(),
            weights: ObjectiveWeights::default(),
            seed: 0,
            name: None,
        }
    }
}

impl GenParams {
    pub fn check(&self) -> Result<(), InstanceError> {
        let bad = |msg: String| Err(InstanceError::Params(msg));
        if self.num_tasks == 0 || self.num_depots == 0 {
            return bad("need at least one task and one depot".into());
        }
        if !(self.area_km.is_finite() && self.area_km > 0.0) {
            return bad(format!("area must be positive, got {}", self.area_km));
        }
        let mix = self.kind_mix;
        if [mix.drop, mix.pickup, mix.pick_drop]
            .iter()
            .any(|p| !(0.0..=1.0).contains(p))
            || (mix.drop + mix.pickup + mix.pick_drop - 1.0).abs() > 1e-9
        {
            return bad(format!(
                "kind mix must be probabilities summing to 1, got {mix:?}"
            ));
        }
        self.drone.check()?;
        self.weights.check()?;
        if !(self.weight_min_kg > 0.0
            && self.weight_min_kg <= self.weight_max_kg
            && self.weight_max_kg <= self.drone.max_capacity_kg)
        {
            return bad(format!(
                "weights need 0 < min <= max <= {} kg, got [{}, {}]",
                self.drone.max_capacity_kg, self.weight_min_kg, self.weight_max_kg
            ));
        }
        Ok(())
    }
}

/// Draws depots and tasks uniformly over the square; tasks that no depot can serve alone
/// are redrawn, so the task count is exact.
pub fn generate(params: &GenParams) -> Result<Instance, InstanceError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let side = params.area_km;
    let point = |rng: &mut ChaCha8Rng| {
        Location::planar(rng.random_range(0.0..=side), rng.random_range(0.0..=side))
    };

    let c = params.num_tasks;
    let depots: Vec<Depot> = (0..params.num_depots)
        .map(|k| Depot {
            id: NodeId(c + k + 1),
            location: point(&mut rng),
        })
        .collect();

    let weight =
        |rng: &mut ChaCha8Rng| rng.random_range(params.weight_min_kg..=params.weight_max_kg);
    let mut tasks = Vec::with_capacity(c);
    for id in 1..=c {
        let mut placed = None;
        for _ in 0..MAX_TASK_ATTEMPTS {
            let location = point(&mut rng);
            let task = match params.kind_mix.sample(&mut rng) {
                TaskKind::Drop => Task::drop(id, location, weight(&mut rng)),
                TaskKind::Pickup => Task::pickup(id, location, weight(&mut rng)),
                TaskKind::PickDrop => {
                    Task::pick_drop(id, location, weight(&mut rng), weight(&mut rng))
                }
            };
            let nearest = depots
                .iter()
                .map(|d| distance(&location, &d.location).expect("planar"))
                .fold(f64::INFINITY, f64::min);
            if task.round_trip_feasible(nearest, &params.drone) {
                placed = Some(task);
                break;
            }
        }
        tasks.push(placed.ok_or(InstanceError::Unreachable {
            task: id,
            attempts: MAX_TASK_ATTEMPTS,
        })?);
    }

    let name = params
        .name
        .clone()
        .unwrap_or_else(|| format!("gen-c{}-m{}-s{}", c, params.num_depots, params.seed));
    Ok(Instance::new(
        name,
        CoordinateSystem::Planar,
        params.drone,
        params.weights,
        depots,
        tasks,
    )?)
}

/// One benchmark shape: a label with task and depot counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub label: String,
    pub num_tasks: usize,
    pub num_depots: usize,
}

/// The thirteen published (tasks, depots) shapes, labelled C1..C13.
pub fn builtin_suite() -> Vec<SuiteConfig> {
    const SHAPES: [(usize, usize); 13] = [
        (40, 5),
        (60, 5),
        (80, 5),
        (100, 5),
        (150, 5),
        (200, 5),
        (40, 2),
        (40, 4),
        (60, 3),
        (80, 4),
        (100, 10),
        (150, 7),
        (200, 10),
    ];
    SHAPES
        .iter()
        .enumerate()
        .map(|(i, &(num_tasks, num_depots))| SuiteConfig {
            label: format!("C{}", i + 1),
            num_tasks,
            num_depots,
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    name: String,
    coordinate_system: CoordinateSystem,
    drone: DroneSpec,
    weights: ObjectiveWeights,
    depots: Vec<NodeRecord>,
    tasks: Vec<TaskRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskRecord {
    id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
    kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    drop_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pickup_weight: Option<f64>,
}

type Coords = (Option<f64>, Option<f64>, Option<f64>, Option<f64>);

fn split(loc: Location) -> Coords {
    match loc {
        Location::Planar { x, y } => (Some(x), Some(y), None, None),
        Location::Geographic { lat, lon } => (None, None, Some(lat), Some(lon)),
    }
}

fn join(id: NodeId, system: CoordinateSystem, coords: Coords) -> Result<Location, InstanceError> {
    match (system, coords) {
        (CoordinateSystem::Planar, (Some(x), Some(y), None, None)) => Ok(Location::planar(x, y)),
        (CoordinateSystem::Geographic, (None, None, Some(lat), Some(lon))) => {
            Ok(Location::geographic(lat, lon))
        }
        (CoordinateSystem::Planar, _) => Err(InstanceError::Coordinates(format!(
            "node {id} needs exactly x and y"
        ))),
        (CoordinateSystem::Geographic, _) => Err(InstanceError::Coordinates(format!(
            "node {id} needs exactly lat and lon"
        ))),
    }
}

/// Pretty-printed JSON form of an instance.
pub fn instance_to_json(instance: &Instance) -> String {
    let file = InstanceFile {
        name: instance.name().to_string(),
        coordinate_system: instance.coordinate_system(),
        drone: *instance.drone(),
        weights: *instance.weights(),
        depots: instance
            .depots()
            .iter()
            .map(|d| {
                let (x, y, lat, lon) = split(d.location);
                NodeRecord {
                    id: d.id,
                    x,
                    y,
                    lat,
                    lon,
                }
            })
            .collect(),
        tasks: instance
            .tasks()
            .iter()
            .map(|t| {
                let (x, y, lat, lon) = split(t.location);
                TaskRecord {
                    id: t.id,
                    x,
                    y,
                    lat,
                    lon,
                    kind: t.kind,
                    drop_weight: t.drop_weight,
                    pickup_weight: t.pickup_weight,
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("instance serializes") + "\n"
}

pub fn instance_from_json(text: &str) -> Result<Instance, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let system = file.coordinate_system;
    let depots = file
        .depots
        .into_iter()
        .map(|d| {
            Ok(Depot {
                id: d.id,
                location: join(d.id, system, (d.x, d.y, d.lat, d.lon))?,
            })
        })
        .collect::<Result<_, InstanceError>>()?;
    let tasks = file
        .tasks
        .into_iter()
        .map(|t| {
            Ok(Task {
                id: t.id,
                location: join(t.id, system, (t.x, t.y, t.lat, t.lon))?,
                kind: t.kind,
                drop_weight: t.drop_weight,
                pickup_weight: t.pickup_weight,
            })
        })
        .collect::<Result<_, InstanceError>>()?;
    Ok(Instance::new(
        file.name,
        file.coordinate_system,
        file.drone,
        file.weights,
        depots,
        tasks,
    )?)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    instance_from_json(&text)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, instance_to_json(instance)).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}
