//! Phase one: assigning tasks to depots and reshuffling that assignment.
//!
//! The order of a depot's task list is meaningful: it is the visit sequence that phase
//! two cuts into sorties, so the exchange operators change routes even though they never
//! move a task between depots.

use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::model::{Instance, ModelError, NodeId, Schedule, TaskKind};
use crate::solver::metropolis_accept;

/// Per-depot ordered task lists, indexed like [`Instance::depots`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationScheme {
    groups: Vec<Vec<NodeId>>,
}

impl AllocationScheme {
    pub fn from_groups(groups: Vec<Vec<NodeId>>) -> Self {
        AllocationScheme { groups }
    }

    /// The visit order implied by an existing schedule.
    pub fn from_schedule(schedule: &Schedule) -> Self {
        AllocationScheme {
            groups: schedule
                .plans()
                .iter()
                .map(|p| p.task_sequence().collect())
                .collect(),
        }
    }

    pub fn groups(&self) -> &[Vec<NodeId>] {
        &self.groups
    }

    pub fn depot_tasks(&self, depot_index: usize) -> &[NodeId] {
        &self.groups[depot_index]
    }

    pub fn num_depots(&self) -> usize {
        self.groups.len()
    }

    /// All task ids, sorted.
    pub fn task_multiset(&self) -> Vec<NodeId> {
        let mut all: Vec<NodeId> = self.groups.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    /// Depot index holding each task, for tasks `1..=c`.
    pub fn membership(&self, num_tasks: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; num_tasks];
        for (k, g) in self.groups.iter().enumerate() {
            for t in g {
                if let Some(slot) = out.get_mut(t.0.wrapping_sub(1)) {
                    *slot = Some(k);
                }
            }
        }
        out
    }
}

/// Assigns every task to its nearest depot, then shuffles each depot's list.
///
/// This is k-means with the cluster centres pinned to the depot locations: a single
/// assignment step, since the centres cannot move.
pub fn initial_allocate<R: Rng + ?Sized>(
    instance: &Instance,
    rng: &mut R,
) -> Result<AllocationScheme, ModelError> {
    instance.check_reachability()?;
    let mut groups = vec![Vec::new(); instance.num_depots()];
    for id in instance.task_ids() {
        groups[instance.nearest_depot(id)].push(id);
    }
    for g in &mut groups {
        g.shuffle(rng);
    }
    Ok(AllocationScheme { groups })
}

/// Assigns every task to a uniformly random depot able to serve it, in random order.
pub fn random_allocate<R: Rng + ?Sized>(
    instance: &Instance,
    rng: &mut R,
) -> Result<AllocationScheme, ModelError> {
    instance.check_reachability()?;
    let mut groups = vec![Vec::new(); instance.num_depots()];
    for id in instance.task_ids() {
        let options: Vec<usize> = instance.serviceable_depots(id).collect();
        let k = *options.choose(rng).expect("reachability checked above");
        groups[k].push(id);
    }
    for g in &mut groups {
        g.shuffle(rng);
    }
    Ok(AllocationScheme { groups })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    TwoExchange,
    ThreeExchange,
    Pct30Exchange,
    Relocation,
    OtherRelocation,
    Pct10Relocation,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 6] = [
        OperatorKind::TwoExchange,
        OperatorKind::ThreeExchange,
        OperatorKind::Pct30Exchange,
        OperatorKind::Relocation,
        OperatorKind::OtherRelocation,
        OperatorKind::Pct10Relocation,
    ];

    pub fn is_exchange(self) -> bool {
        matches!(
            self,
            OperatorKind::TwoExchange | OperatorKind::ThreeExchange | OperatorKind::Pct30Exchange
        )
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::TwoExchange => "2-exchange",
            OperatorKind::ThreeExchange => "3-exchange",
            OperatorKind::Pct30Exchange => "30%-exchange",
            OperatorKind::Relocation => "relocation",
            OperatorKind::OtherRelocation => "other-relocation",
            OperatorKind::Pct10Relocation => "10%-relocation",
        })
    }
}

/// Applies one neighbourhood move and returns the new scheme.
///
/// Exchanges permute positions inside one depot with enough tasks. Relocations only move a
/// task to a depot that can serve it alone. When no depot qualifies the move is a no-op
/// and the input comes back unchanged.
pub fn apply_operator<R: Rng + ?Sized>(
    kind: OperatorKind,
    scheme: &AllocationScheme,
    instance: &Instance,
    rng: &mut R,
) -> AllocationScheme {
    let mut next = scheme.clone();
    match kind {
        OperatorKind::TwoExchange => exchange(&mut next, 2, |_| 2, rng),
        OperatorKind::ThreeExchange => exchange(&mut next, 3, |_| 3, rng),
        OperatorKind::Pct30Exchange => {
            exchange(&mut next, 2, |len| percent_count(len, 0.3).max(2), rng)
        }
        OperatorKind::Relocation => {
            relocate_one(&mut next, instance, |k| k == TaskKind::Pickup, rng)
        }
        OperatorKind::OtherRelocation => {
            relocate_one(&mut next, instance, |k| k != TaskKind::Pickup, rng)
        }
        OperatorKind::Pct10Relocation => relocate_share(&mut next, instance, 0.1, rng),
    }
    next
}

/// `ceil(share * len)`.
pub fn percent_count(len: usize, share: f64) -> usize {
    (share * len as f64 - 1e-9).ceil().max(0.0) as usize
}

fn exchange<R: Rng + ?Sized>(
    scheme: &mut AllocationScheme,
    min_len: usize,
    count: impl Fn(usize) -> usize,
    rng: &mut R,
) {
    let eligible: Vec<usize> = (0..scheme.groups.len())
        .filter(|&k| scheme.groups[k].len() >= min_len)
        .collect();
    let Some(&k) = eligible.choose(rng) else {
        return;
    };
    let group = &mut scheme.groups[k];
    let n = count(group.len()).min(group.len());
    let positions = rand::seq::index::sample(rng, group.len(), n).into_vec();
    let picked: Vec<NodeId> = positions.iter().map(|&p| group[p]).collect();
    let reordered: Vec<NodeId> = match n {
        // A 2- or 3-exchange must move every selected task: use a cyclic shift.
        2 | 3 if min_len == n => {
            let shift = if n == 3 { rng.random_range(1..3) } else { 1 };
            (0..n).map(|i| picked[(i + shift) % n]).collect()
        }
        _ => {
            let mut shuffled = picked.clone();
            shuffled.shuffle(rng);
            shuffled
        }
    };
    for (&p, t) in positions.iter().zip(reordered) {
        group[p] = t;
    }
}

fn relocate_one<R: Rng + ?Sized>(
    scheme: &mut AllocationScheme,
    instance: &Instance,
    kind_ok: impl Fn(TaskKind) -> bool,
    rng: &mut R,
) {
    let m = scheme.groups.len();
    if m < 2 {
        return;
    }
    let movable = |k: usize, t: NodeId| {
        instance.task(t).is_some_and(|task| kind_ok(task.kind))
            && instance.serviceable_depots(t).any(|j| j != k)
    };
    let sources: Vec<usize> = (0..m)
        .filter(|&k| scheme.groups[k].iter().any(|&t| movable(k, t)))
        .collect();
    let Some(&from) = sources.choose(rng) else {
        return;
    };
    let candidates: Vec<usize> = (0..scheme.groups[from].len())
        .filter(|&p| movable(from, scheme.groups[from][p]))
        .collect();
    let pos = *candidates.choose(rng).expect("source has a movable task");
    let task = scheme.groups[from].remove(pos);
    let targets: Vec<usize> = instance
        .serviceable_depots(task)
        .filter(|&j| j != from)
        .collect();
    let to = *targets.choose(rng).expect("movable task has a target");
    let at = rng.random_range(0..=scheme.groups[to].len());
    scheme.groups[to].insert(at, task);
}

fn relocate_share<R: Rng + ?Sized>(
    scheme: &mut AllocationScheme,
    instance: &Instance,
    share: f64,
    rng: &mut R,
) {
    let m = scheme.groups.len();
    if m < 2 {
        return;
    }
    let sources: Vec<usize> = (0..m).filter(|&k| !scheme.groups[k].is_empty()).collect();
    let Some(&from) = sources.choose(rng) else {
        return;
    };
    let len = scheme.groups[from].len();
    let n = percent_count(len, share).min(len);
    let mut positions = rand::seq::index::sample(rng, len, n).into_vec();
    // Remove from the back so earlier positions stay valid.
    positions.sort_unstable_by(|a, b| b.cmp(a));
    let mut moving = Vec::with_capacity(n);
    for p in positions {
        let task = scheme.groups[from][p];
        if let Some(to) = nearest_other_depot(instance, task, from) {
            scheme.groups[from].remove(p);
            moving.push((task, to));
        }
    }
    moving.reverse();
    for (task, to) in moving {
        let at = rng.random_range(0..=scheme.groups[to].len());
        scheme.groups[to].insert(at, task);
    }
}

fn nearest_other_depot(instance: &Instance, task: NodeId, from: usize) -> Option<usize> {
    instance
        .serviceable_depots(task)
        .filter(|&k| k != from)
        .min_by(|&a, &b| {
            let da = instance.dist(task, instance.depot_id(a));
            let db = instance.dist(task, instance.depot_id(b));
            da.total_cmp(&db).then(a.cmp(&b))
        })
}

/// One inner iteration of [`ivnd`].
#[derive(Debug, Clone, PartialEq)]
pub struct IvndStep {
    pub operator: OperatorKind,
    pub candidate_cost: f64,
    pub incumbent_cost_before: f64,
    pub accepted: bool,
}

impl IvndStep {
    /// An accepted move that made the incumbent worse.
    pub fn uphill(&self) -> bool {
        self.accepted && self.candidate_cost > self.incumbent_cost_before
    }
}

/// Incumbent allocation, its route plan and cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub scheme: AllocationScheme,
    pub schedule: Schedule,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvndOutcome {
    pub incumbent: Incumbent,
    /// Lowest-cost state accepted during the loop, when it beat the starting cost.
    pub best: Option<Incumbent>,
    pub steps: Vec<IvndStep>,
}

/// Runs `iterations` reallocation moves at temperature `temperature`.
///
/// Every iteration draws one operator uniformly, rebuilds routes for the candidate with
/// `route_builder` and applies Metropolis acceptance against the current incumbent.
pub fn ivnd<R, B, E>(
    start: Incumbent,
    iterations: usize,
    temperature: f64,
    instance: &Instance,
    rng: &mut R,
    mut route_builder: B,
) -> Result<IvndOutcome, E>
where
    R: Rng + ?Sized,
    B: FnMut(&AllocationScheme) -> Result<Schedule, E>,
{
    let start_cost = start.cost;
    let mut current = start;
    let mut best: Option<Incumbent> = None;
    let mut steps = Vec::with_capacity(iterations);
    let weights = *instance.weights();

    for _ in 0..iterations {
        let operator = *OperatorKind::ALL.choose(rng).expect("non-empty");
        let candidate = apply_operator(operator, &current.scheme, instance, rng);
        let schedule = route_builder(&candidate)?;
        let cost = schedule.objective(&weights);
        let accepted = metropolis_accept(cost - current.cost, temperature, rng)
            .expect("temperature is positive");
        steps.push(IvndStep {
            operator,
            candidate_cost: cost,
            incumbent_cost_before: current.cost,
            accepted,
        });
        if accepted {
            current = Incumbent {
                scheme: candidate,
                schedule,
                cost,
            };
            let threshold = best.as_ref().map_or(start_cost, |b| b.cost);
            if current.cost < threshold {
                best = Some(current.clone());
            }
        }
    }
    Ok(IvndOutcome {
        incumbent: current,
        best,
        steps,
    })
}
