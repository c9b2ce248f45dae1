//! Phase two: turning each depot's task list into drone sorties.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::AllocationScheme;
pub use crate::model::DepotPlan;
use crate::model::{Instance, ModelError, NodeId, RoutePattern, Schedule, Sortie, TaskKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RoutingError {
    #[error("task {task} cannot be served from depot {depot} even on its own")]
    Unserviceable { task: NodeId, depot: NodeId },
    #[error("raw route must start and end at the same depot")]
    NotAnchored,
    #[error("raw route anchored at {home} passes through depot {other}")]
    ForeignDepot { home: NodeId, other: NodeId },
    #[error("scheme lists {schemes} depots but the instance has {instance}")]
    DepotCount { schemes: usize, instance: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Elitist multi-start construction.
///
/// Each start draws its own ChaCha8 substream seeded from `rng`, so start `i` of this call
/// can be replayed on its own with [`erpa_start`]. The cheapest start wins; ties keep the
/// earliest.
pub fn erpa<R: Rng + ?Sized>(
    scheme: &AllocationScheme,
    instance: &Instance,
    rng: &mut R,
    n_starts: usize,
) -> Result<Schedule, RoutingError> {
    let weights = *instance.weights();
    let mut best: Option<(f64, Schedule)> = None;
    for seed in start_seeds(rng, n_starts.max(1)) {
        let s = erpa_start(scheme, instance, &mut ChaCha8Rng::seed_from_u64(seed))?;
        let cost = s.objective(&weights);
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, s));
        }
    }
    Ok(best.expect("at least one start").1)
}

/// Seeds of the per-start substreams [`erpa`] would use.
pub fn start_seeds<R: Rng + ?Sized>(rng: &mut R, n_starts: usize) -> Vec<u64> {
    (0..n_starts).map(|_| rng.next_u64()).collect()
}

/// One randomized construction pass.
///
/// Each depot list is shuffled and walked in order. Drop and pick-drop tasks open a new
/// sortie. A pickup straight after a drop joins that drop's sortie on a coin flip when
/// the empty hop between them is in range; otherwise it gets its own sortie.
pub fn erpa_start<R: Rng + ?Sized>(
    scheme: &AllocationScheme,
    instance: &Instance,
    rng: &mut R,
) -> Result<Schedule, RoutingError> {
    check_depot_count(scheme, instance)?;
    let mut plans = Vec::with_capacity(scheme.num_depots());
    for (k, tasks) in scheme.groups().iter().enumerate() {
        let depot = instance.depot_id(k);
        let mut order = tasks.clone();
        order.shuffle(rng);
        let mut plan = DepotPlan::new(depot);
        // Open drop-only sortie of the previous task, if that task was a drop.
        let mut open_drop: Option<(usize, NodeId)> = None;
        for &t in &order {
            let kind = task_kind(instance, t)?;
            ensure_serviceable(instance, t, k)?;
            match kind {
                TaskKind::Drop => {
                    plan.sorties.push(Sortie::serving(instance, depot, &[t])?);
                    open_drop = Some((plan.sorties.len() - 1, t));
                }
                TaskKind::PickDrop => {
                    plan.sorties.push(Sortie::serving(instance, depot, &[t])?);
                    open_drop = None;
                }
                TaskKind::Pickup => {
                    let chained = match open_drop {
                        Some((idx, d)) => {
                            let chain = rng.random::<f64>() < 0.5;
                            if chain && instance.chain_feasible(d, t) {
                                plan.sorties[idx] = Sortie::serving(instance, depot, &[d, t])?;
                                true
                            } else {
                                false
                            }
                        }
                        None => false,
                    };
                    if !chained {
                        plan.sorties.push(Sortie::serving(instance, depot, &[t])?);
                    }
                    open_drop = None;
                }
            }
        }
        plans.push(plan);
    }
    Ok(Schedule::new(plans))
}

/// Cuts a depot route given as a node sequence into legal sorties.
///
/// `raw_route` starts and ends at the same depot and may revisit it in between; those
/// intermediate returns are ignored and the task sequence is cut afresh. Scanning left to
/// right, a drop immediately followed by a pickup is kept together when the empty hop
/// between them is in range. Every other task is flown alone.
pub fn repair(raw_route: &[NodeId], instance: &Instance) -> Result<Vec<Sortie>, RoutingError> {
    let (Some(&first), Some(&last)) = (raw_route.first(), raw_route.last()) else {
        return Err(RoutingError::NotAnchored);
    };
    if first != last || raw_route.len() < 2 {
        return Err(RoutingError::NotAnchored);
    }
    let k = instance
        .depot_index(first)
        .ok_or(RoutingError::NotAnchored)?;
    let mut tasks = Vec::with_capacity(raw_route.len());
    for &node in &raw_route[1..raw_route.len() - 1] {
        if instance.is_task(node) {
            tasks.push(node);
        } else if node != first {
            return Err(match instance.depot_index(node) {
                Some(_) => RoutingError::ForeignDepot {
                    home: first,
                    other: node,
                },
                None => ModelError::UnknownNode(node).into(),
            });
        }
    }
    cut_sequence(instance, k, &tasks)
}

fn cut_sequence(
    instance: &Instance,
    k: usize,
    tasks: &[NodeId],
) -> Result<Vec<Sortie>, RoutingError> {
    let depot = instance.depot_id(k);
    let mut sorties = Vec::with_capacity(tasks.len());
    let mut i = 0;
    while i < tasks.len() {
        let t = tasks[i];
        ensure_serviceable(instance, t, k)?;
        if task_kind(instance, t)? == TaskKind::Drop {
            if let Some(&next) = tasks.get(i + 1) {
                if task_kind(instance, next)? == TaskKind::Pickup
                    && instance.chain_feasible(t, next)
                {
                    ensure_serviceable(instance, next, k)?;
                    sorties.push(Sortie::serving(instance, depot, &[t, next])?);
                    i += 2;
                    continue;
                }
            }
        }
        sorties.push(Sortie::serving(instance, depot, &[t])?);
        i += 1;
    }
    Ok(sorties)
}

/// Route plan that follows the scheme's task order exactly, cut by [`repair`]'s rule.
///
/// This is the constructor used inside the reallocation loop, where the order produced by
/// the neighbourhood moves is the thing being optimized.
pub fn build_schedule(
    scheme: &AllocationScheme,
    instance: &Instance,
) -> Result<Schedule, RoutingError> {
    check_depot_count(scheme, instance)?;
    let plans = scheme
        .groups()
        .iter()
        .enumerate()
        .map(|(k, tasks)| {
            Ok(DepotPlan {
                depot_id: instance.depot_id(k),
                sorties: cut_sequence(instance, k, tasks)?,
            })
        })
        .collect::<Result<Vec<_>, RoutingError>>()?;
    Ok(Schedule::new(plans))
}

/// Merges one lone drop sortie and one lone pickup sortie of a random depot.
///
/// The merged drop-then-pickup sortie takes the drop sortie's place. Nothing changes when
/// the chosen depot lacks either kind of lone sortie or the empty hop is out of range.
pub fn local_search<R: Rng + ?Sized>(
    schedule: &Schedule,
    instance: &Instance,
    rng: &mut R,
) -> Schedule {
    let mut out = schedule.clone();
    let plans = out.plans_mut();
    if plans.is_empty() {
        return out;
    }
    let k = rng.random_range(0..plans.len());
    let plan = &mut plans[k];

    let mut lone_pickups = Vec::new();
    let mut lone_drops = Vec::new();
    for (idx, s) in plan.sorties.iter().enumerate() {
        match s.pattern() {
            RoutePattern::PickupOnly => lone_pickups.push(idx),
            RoutePattern::DropOnly => lone_drops.push(idx),
            _ => {}
        }
    }
    let (Some(&pi), Some(&di)) = (lone_pickups.choose(rng), lone_drops.choose(rng)) else {
        return out;
    };
    let pickup = plan.sorties[pi]
        .visits()
        .next()
        .expect("pickup sortie visits a task");
    let drop = plan.sorties[di]
        .visits()
        .next()
        .expect("drop sortie visits a task");
    if !instance.chain_feasible(drop, pickup) {
        return out;
    }
    let Ok(merged) = Sortie::serving(instance, plan.depot_id, &[drop, pickup]) else {
        return out;
    };
    if !merged.is_feasible(instance) {
        return out;
    }
    plan.sorties[di] = merged;
    plan.sorties.remove(pi);
    out
}

fn check_depot_count(scheme: &AllocationScheme, instance: &Instance) -> Result<(), RoutingError> {
    if scheme.num_depots() != instance.num_depots() {
        return Err(RoutingError::DepotCount {
            schemes: scheme.num_depots(),
            instance: instance.num_depots(),
        });
    }
    Ok(())
}

fn task_kind(instance: &Instance, t: NodeId) -> Result<TaskKind, RoutingError> {
    Ok(instance.task(t).ok_or(ModelError::UnknownNode(t))?.kind)
}

fn ensure_serviceable(instance: &Instance, t: NodeId, k: usize) -> Result<(), RoutingError> {
    if instance.serviceable(t, k) {
        Ok(())
    } else {
        Err(RoutingError::Unserviceable {
            task: t,
            depot: instance.depot_id(k),
        })
    }
}
