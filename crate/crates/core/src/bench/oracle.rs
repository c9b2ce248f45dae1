//! Exact optimum for tiny instances.
//!
//! Every task-to-depot assignment is enumerated. Per depot, sortie order does not affect
//! the cost, so the best partition of its task set into legal sorties is found by a
//! subset recursion: the lowest remaining task either flies alone or is paired with a
//! partner into a drop-then-pickup sortie.

use std::collections::HashMap;

use crate::model::{DepotPlan, Instance, ModelError, NodeId, Schedule, Sortie, TaskKind};

pub const ORACLE_MAX_TASKS: usize = 6;
pub const ORACLE_MAX_DEPOTS: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle handles at most {ORACLE_MAX_TASKS} tasks and {ORACLE_MAX_DEPOTS} depots, got {tasks} and {depots}")]
    TooLarge { tasks: usize, depots: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Cost and sorties (as task lists) of the best partition of a task subset.
type Partition = Option<(f64, Vec<Vec<NodeId>>)>;

struct DepotSolver<'a> {
    instance: &'a Instance,
    depot: NodeId,
    tasks: Vec<NodeId>,
    memo: HashMap<u32, Partition>,
}

impl DepotSolver<'_> {
    fn sortie_cost(&self, visits: &[NodeId]) -> Option<f64> {
        let sortie = Sortie::serving(self.instance, self.depot, visits).ok()?;
        if !sortie.is_feasible(self.instance) {
            return None;
        }
        let w = self.instance.weights();
        Some(w.alpha * sortie.distance_km() + w.rho)
    }

    fn best(&mut self, mask: u32) -> Partition {
        if mask == 0 {
            return Some((0.0, Vec::new()));
        }
        if let Some(hit) = self.memo.get(&mask) {
            return hit.clone();
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let ti = self.tasks[i];
        let kind = |t: NodeId| self.instance.task(t).expect("task").kind;

        let mut options: Vec<(Vec<NodeId>, u32)> = vec![(vec![ti], rest)];
        for j in 0..self.tasks.len() {
            if rest & (1 << j) == 0 {
                continue;
            }
            let tj = self.tasks[j];
            match (kind(ti), kind(tj)) {
                (TaskKind::Drop, TaskKind::Pickup) => {
                    options.push((vec![ti, tj], rest & !(1 << j)))
                }
                (TaskKind::Pickup, TaskKind::Drop) => {
                    options.push((vec![tj, ti], rest & !(1 << j)))
                }
                _ => {}
            }
        }

        let mut found: Partition = None;
        for (visits, remaining) in options {
            let Some(c) = self.sortie_cost(&visits) else {
                continue;
            };
            let Some((sub, mut sorties)) = self.best(remaining) else {
                continue;
            };
            if found.as_ref().is_none_or(|(f, _)| c + sub < *f) {
                sorties.insert(0, visits);
                found = Some((c + sub, sorties));
            }
        }
        self.memo.insert(mask, found.clone());
        found
    }
}

/// Minimum-cost schedule by exhaustive search, with its cost.
pub fn brute_force_oracle(instance: &Instance) -> Result<(f64, Schedule), OracleError> {
    let (c, m) = (instance.num_tasks(), instance.num_depots());
    if c > ORACLE_MAX_TASKS || m > ORACLE_MAX_DEPOTS {
        return Err(OracleError::TooLarge {
            tasks: c,
            depots: m,
        });
    }
    instance.check_reachability()?;
    let tasks: Vec<NodeId> = instance.task_ids().collect();
    let mut solvers: Vec<DepotSolver<'_>> = (0..m)
        .map(|k| DepotSolver {
            instance,
            depot: instance.depot_id(k),
            tasks: tasks.clone(),
            memo: HashMap::new(),
        })
        .collect();

    let mut best: Option<(f64, Vec<Vec<Vec<NodeId>>>)> = None;
    for code in 0..m.pow(c as u32) {
        let mut masks = vec![0u32; m];
        let mut rest = code;
        for bit in 0..c {
            masks[rest % m] |= 1 << bit;
            rest /= m;
        }
        let mut total = 0.0;
        let mut plans = Vec::with_capacity(m);
        for (solver, &mask) in solvers.iter_mut().zip(&masks) {
            match solver.best(mask) {
                Some((cost, sorties)) => {
                    total += cost;
                    plans.push(sorties);
                }
                None => break,
            }
        }
        if plans.len() == m && best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, plans));
        }
    }

    let (_, plans) = best.expect("a reachable instance has a feasible schedule");
    let mut out = Vec::with_capacity(m);
    for (k, sorties) in plans.into_iter().enumerate() {
        let depot = instance.depot_id(k);
        let mut plan = DepotPlan::new(depot);
        for visits in sorties {
            plan.sorties
                .push(Sortie::serving(instance, depot, &visits)?);
        }
        out.push(plan);
    }
    let schedule = Schedule::new(out);
    Ok((schedule.objective(instance.weights()), schedule))
}
