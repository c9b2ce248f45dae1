use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skyroute::allocation::{
    apply_operator, initial_allocate, ivnd, percent_count, random_allocate, AllocationScheme,
    Incumbent, OperatorKind,
};
use skyroute::bench::brute_force_oracle;
use skyroute::instances::{generate, instance_from_json, GenParams};
use skyroute::model::{
    validate_schedule, DepotPlan, Instance, InstanceBuilder, Leg, Location, NodeId,
    ObjectiveWeights, Schedule, Sortie, TaskKind, ViolationKind,
};
use skyroute::routing::{
    build_schedule, erpa, erpa_start, local_search, repair, start_seeds, RoutingError,
};
use skyroute::solver::{solve, solve_observed, solve_variant, SaConfig, Variant};

fn instance(seed: u64, tasks: usize, depots: usize) -> Instance {
    generate(&GenParams {
        num_tasks: tasks,
        num_depots: depots,
        seed,
        ..GenParams::default()
    })
    .unwrap()
}

fn quick() -> SaConfig {
    SaConfig {
        t0: 100.0,
        t_end: 0.5,
        inner_iterations: 8,
        n_starts: 4,
        ..SaConfig::default()
    }
}

fn depot_sets(scheme: &AllocationScheme) -> Vec<BTreeSet<NodeId>> {
    scheme
        .groups()
        .iter()
        .map(|g| g.iter().copied().collect())
        .collect()
}

#[test]
fn erpa_output_is_valid_on_random_instances() {
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = instance(seed, rng.random_range(1..30), rng.random_range(1..5));
        let scheme = random_allocate(&inst, &mut rng).unwrap();
        let s = erpa(&scheme, &inst, &mut rng, 3).unwrap();
        let v = validate_schedule(&inst, &s);
        assert!(v.is_empty(), "seed {seed}: {:?}", v);
        assert_eq!(
            AllocationScheme::from_schedule(&s).task_multiset(),
            scheme.task_multiset()
        );
    }
}

#[test]
fn erpa_keeps_the_best_start() {
    for seed in 0..30u64 {
        let inst = instance(seed, 25, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scheme = initial_allocate(&inst, &mut rng).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(seed + 1000);
        let mut b = a.clone();
        let best = erpa(&scheme, &inst, &mut a, 8)
            .unwrap()
            .objective(inst.weights());
        for sub in start_seeds(&mut b, 8) {
            let single = erpa_start(&scheme, &inst, &mut ChaCha8Rng::seed_from_u64(sub)).unwrap();
            assert!(best <= single.objective(inst.weights()) + 1e-12);
        }
    }
}

fn route_of(plan: &DepotPlan) -> Vec<NodeId> {
    let mut r = vec![plan.depot_id];
    for s in &plan.sorties {
        r.extend(s.visits());
        r.push(plan.depot_id);
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn repair_is_idempotent_and_order_preserving(seed in 0u64..10_000, tasks in 1usize..25) {
        let inst = instance(seed, tasks, 1);
        let depot = inst.depot_id(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<NodeId> = inst.task_ids().collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let mut raw = vec![depot];
        for &t in &order {
            raw.push(t);
            if rng.random::<f64>() < 0.3 {
                raw.push(depot);
            }
        }
        raw.push(depot);

        let once = repair(&raw, &inst).unwrap();
        let served: Vec<NodeId> = once.iter().flat_map(|s| s.visits()).collect();
        prop_assert_eq!(&served, &order);
        let plan = DepotPlan { depot_id: depot, sorties: once.clone() };
        prop_assert!(validate_schedule(&inst, &Schedule::new(vec![plan.clone()])).is_empty());
        let twice = repair(&route_of(&plan), &inst).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn operators_conserve_tasks(seed in 0u64..10_000, depots in 1usize..6, steps in 1usize..40) {
        let inst = instance(seed, 30, depots);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scheme = random_allocate(&inst, &mut rng).unwrap();
        let expected = scheme.task_multiset();
        for _ in 0..steps {
            let kind = *OperatorKind::ALL.choose(&mut rng).unwrap();
            let next = apply_operator(kind, &scheme, &inst, &mut rng);
            prop_assert_eq!(next.task_multiset(), expected.clone());
            let before = scheme.membership(inst.num_tasks());
            let after = next.membership(inst.num_tasks());
            let moved: Vec<usize> = (0..before.len()).filter(|&i| before[i] != after[i]).collect();
            if kind.is_exchange() {
                prop_assert_eq!(depot_sets(&next), depot_sets(&scheme));
            } else {
                let limit = match kind {
                    OperatorKind::Pct10Relocation => {
                        scheme.groups().iter().map(|g| percent_count(g.len(), 0.1)).max().unwrap_or(0)
                    }
                    _ => 1,
                };
                prop_assert!(moved.len() <= limit);
                for &i in &moved {
                    let task = NodeId(i + 1);
                    let kind_of = inst.task(task).unwrap().kind;
                    match kind {
                        OperatorKind::Relocation => prop_assert_eq!(kind_of, TaskKind::Pickup),
                        OperatorKind::OtherRelocation => prop_assert_ne!(kind_of, TaskKind::Pickup),
                        _ => {}
                    }
                    prop_assert!(inst.serviceable(task, after[i].unwrap()));
                }
            }
            scheme = next;
        }
    }

    #[test]
    fn local_search_never_hurts(seed in 0u64..10_000) {
        let inst = instance(seed, 30, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scheme = initial_allocate(&inst, &mut rng).unwrap();
        let s = erpa_start(&scheme, &inst, &mut rng).unwrap();
        let t = local_search(&s, &inst, &mut rng);
        prop_assert!(t.sortie_count() <= s.sortie_count());
        prop_assert!(t.sortie_count() + 1 >= s.sortie_count());
        prop_assert!(validate_schedule(&inst, &t).is_empty());
        prop_assert!(t.objective(inst.weights()) <= s.objective(inst.weights()) + 1e-9);
    }

    #[test]
    fn cached_and_recomputed_costs_agree(seed in 0u64..10_000) {
        let inst = instance(seed, 40, 3);
        let report = solve(&inst, &quick().with_seed(seed)).unwrap();
        let recomputed = report.best_schedule.recompute_distance(&inst).unwrap();
        let w = inst.weights();
        let full = w.alpha * recomputed + w.rho * report.best_schedule.sortie_count() as f64;
        prop_assert!((full - report.best_cost).abs() < 1e-9);
    }

    #[test]
    fn validator_flags_single_mutations(seed in 0u64..10_000) {
        let inst = instance(seed, 12, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scheme = initial_allocate(&inst, &mut rng).unwrap();
        let good = build_schedule(&scheme, &inst).unwrap();
        prop_assert!(validate_schedule(&inst, &good).is_empty());

        let loaded = good
            .plans()
            .iter()
            .enumerate()
            .find_map(|(p, plan)| plan.sorties.iter().position(|s| s.legs()[0].payload_kg > 0.0).map(|s| (p, s)));
        prop_assume!(loaded.is_some());
        let (p, s) = loaded.unwrap();
        let mutate = |f: &dyn Fn(&mut Vec<Leg>)| {
            let mut plans = good.plans().to_vec();
            let old = &plans[p].sorties[s];
            let mut legs = old.legs().to_vec();
            f(&mut legs);
            plans[p].sorties[s] = Sortie::new(&inst, old.depot_id(), legs, old.pattern()).unwrap();
            let kinds: HashSet<ViolationKind> = validate_schedule(&inst, &Schedule::new(plans))
                .into_iter()
                .map(|v| v.kind)
                .collect();
            kinds
        };
        prop_assert_eq!(mutate(&|l| l[0].payload_kg = 9.0), HashSet::from([ViolationKind::Capacity]));
        prop_assert_eq!(mutate(&|l| l[0].payload_kg *= 0.5), HashSet::from([ViolationKind::Pattern]));

        let last = *good.plans()[p].sorties[s].legs().last().unwrap();
        let other_depot = inst.depot_id(1 - p);
        let hop = inst.distance(last.from, other_depot).unwrap();
        if hop <= inst.drone().effective_range(last.payload_kg).unwrap() {
            prop_assert_eq!(
                mutate(&|l| { let n = l.len(); l[n - 1].to = other_depot; }),
                HashSet::from([ViolationKind::DepotAnchor])
            );
        }

        // shrink the range until exactly the most demanding leg no longer fits
        let need = good
            .sorties()
            .flat_map(|s| s.legs())
            .map(|l| inst.distance(l.from, l.to).unwrap() * inst.drone().payload_penalty(l.payload_kg).unwrap())
            .fold(0.0, f64::max);
        let mut drone = *inst.drone();
        drone.max_range_km = need * 0.999;
        let tighter = Instance::new(
            "tighter",
            inst.coordinate_system(),
            drone,
            *inst.weights(),
            inst.depots().to_vec(),
            inst.tasks().to_vec(),
        )
        .unwrap();
        let kinds: HashSet<ViolationKind> =
            validate_schedule(&tighter, &good).into_iter().map(|v| v.kind).collect();
        prop_assert_eq!(kinds, HashSet::from([ViolationKind::Range]));
    }

    #[test]
    fn objective_scales_and_adds(seed in 0u64..10_000, k in 0.1f64..10.0) {
        let inst = instance(seed, 20, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = erpa_start(&initial_allocate(&inst, &mut rng).unwrap(), &inst, &mut rng).unwrap();
        let w = ObjectiveWeights::new(0.7, 0.3).unwrap();
        let d = s.total_distance_km();
        let n = s.sortie_count() as f64;
        prop_assert!((s.objective(&w) - (0.7 * d + 0.3 * n)).abs() < 1e-9);

        let scale = |loc: Location| match loc {
            Location::Planar { x, y } => Location::planar(k * x, k * y),
            other => other,
        };
        let mut depots = inst.depots().to_vec();
        depots.iter_mut().for_each(|d| d.location = scale(d.location));
        let mut tasks = inst.tasks().to_vec();
        tasks.iter_mut().for_each(|t| t.location = scale(t.location));
        let scaled = Instance::new("scaled", inst.coordinate_system(), *inst.drone(), w, depots, tasks).unwrap();
        let mut plans = Vec::new();
        for plan in s.plans() {
            let mut p = DepotPlan::new(plan.depot_id);
            for sortie in &plan.sorties {
                let visits: Vec<NodeId> = sortie.visits().collect();
                p.sorties.push(Sortie::serving(&scaled, plan.depot_id, &visits).unwrap());
            }
            plans.push(p);
        }
        let scaled_distance_term = Schedule::new(plans).objective(&w) - 0.3 * n;
        prop_assert!((scaled_distance_term - k * 0.7 * d).abs() < 1e-9 * (1.0 + k * d));

        let mut plans = s.plans().to_vec();
        let extra = plans[0].sorties.first().cloned();
        if let Some(extra) = extra {
            plans[0].sorties.push(extra.clone());
            let bigger = Schedule::new(plans);
            prop_assert!((bigger.objective(&w) - s.objective(&w) - (0.3 + 0.7 * extra.distance_km())).abs() < 1e-9);
        }
    }
}

#[test]
fn payloads_rederive_from_weights() {
    for seed in 0..50 {
        let inst = instance(seed, 20, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = erpa(
            &initial_allocate(&inst, &mut rng).unwrap(),
            &inst,
            &mut rng,
            2,
        )
        .unwrap();
        for plan in s.plans() {
            for sortie in &plan.sorties {
                let visits: Vec<NodeId> = sortie.visits().collect();
                let rebuilt = Sortie::serving(&inst, plan.depot_id, &visits).unwrap();
                assert_eq!(rebuilt.legs(), sortie.legs());
            }
        }
    }
}

#[test]
fn objective_of_three_sortie_fixture() {
    // depot at origin; drop at (3,4); pickup at (6,8); pick-drop at (0,-5); drop at (-8,6)
    let inst = InstanceBuilder::planar("fixture")
        .weights(ObjectiveWeights::new(0.6, 0.4).unwrap())
        .depot(0.0, 0.0)
        .drop(3.0, 4.0, 2.0)
        .pickup(6.0, 8.0, 3.0)
        .pick_drop(0.0, -5.0, 1.0, 1.5)
        .drop(-8.0, 6.0, 4.0)
        .build()
        .unwrap();
    let d = inst.depot_id(0);
    let plan = DepotPlan {
        depot_id: d,
        sorties: vec![
            Sortie::serving(&inst, d, &[NodeId(1), NodeId(2)]).unwrap(),
            Sortie::serving(&inst, d, &[NodeId(3)]).unwrap(),
            Sortie::serving(&inst, d, &[NodeId(4)]).unwrap(),
        ],
    };
    let s = Schedule::new(vec![plan]);
    assert!(validate_schedule(&inst, &s).is_empty());
    // legs: 5 + 5 + 10, then 5 + 5, then 10 + 10 = 50 km
    assert!((s.objective(inst.weights()) - (0.6 * 50.0 + 0.4 * 3.0)).abs() < 1e-9);
    assert!((s.objective(&ObjectiveWeights::new(1.0, 0.0).unwrap()) - 50.0).abs() < 1e-9);
}

#[test]
fn ivnd_is_deterministic_and_builds_exactly_l_times() {
    let inst = instance(3, 40, 4);
    let run = |seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scheme = initial_allocate(&inst, &mut rng).unwrap();
        let schedule = build_schedule(&scheme, &inst).unwrap();
        let cost = schedule.objective(inst.weights());
        let mut builds = 0;
        let out = ivnd(
            Incumbent {
                scheme,
                schedule,
                cost,
            },
            37,
            5.0,
            &inst,
            &mut rng,
            |g: &AllocationScheme| {
                builds += 1;
                build_schedule(g, &inst)
            },
        )
        .unwrap();
        (out, builds)
    };
    let (a, builds) = run(9);
    let (b, _) = run(9);
    assert_eq!(builds, 37);
    assert_eq!(a.steps.len(), 37);
    assert_eq!(a.incumbent.scheme, b.incumbent.scheme);
    assert_eq!(a.incumbent.schedule, b.incumbent.schedule);
    assert_eq!(a.incumbent.cost.to_bits(), b.incumbent.cost.to_bits());

    let mut current = a.steps[0].incumbent_cost_before;
    for step in &a.steps {
        assert_eq!(step.incumbent_cost_before, current);
        if step.accepted {
            assert!(step.candidate_cost <= current || step.uphill());
            current = step.candidate_cost;
        }
    }
    assert_eq!(current, a.incumbent.cost);
}

#[test]
fn ivnd_single_task_keeps_scheme() {
    let inst = InstanceBuilder::planar("one")
        .depot(0.0, 0.0)
        .pickup(1.0, 1.0, 2.0)
        .build()
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let scheme = initial_allocate(&inst, &mut rng).unwrap();
    let schedule = build_schedule(&scheme, &inst).unwrap();
    let cost = schedule.objective(inst.weights());
    let out = ivnd(
        Incumbent {
            scheme: scheme.clone(),
            schedule,
            cost,
        },
        50,
        10.0,
        &inst,
        &mut rng,
        |g: &AllocationScheme| -> Result<Schedule, RoutingError> { build_schedule(g, &inst) },
    )
    .unwrap();
    assert_eq!(out.incumbent.scheme, scheme);
}

#[test]
fn solver_is_deterministic() {
    let inst = instance(21, 50, 4);
    let a = solve(&inst, &quick().with_seed(5)).unwrap();
    let b = solve(&inst, &quick().with_seed(5)).unwrap();
    assert_eq!(a.best_schedule, b.best_schedule);
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.best_cost.to_bits(), b.best_cost.to_bits());
    let c = solve(&inst, &quick().with_seed(6)).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn incumbent_is_valid_after_every_outer_step_and_ls_is_elitist() {
    let inst = instance(8, 40, 3);
    let config = quick().with_seed(2);
    let mut steps = 0;
    let report = solve_observed(&inst, &config, Variant::Full, |step| {
        steps += 1;
        assert!(
            validate_schedule(&inst, step.incumbent).is_empty(),
            "step {}",
            step.iteration
        );
        assert!(step.incumbent_cost <= step.cost_before_ls);
        assert_eq!(step.ls_accepted, step.incumbent_cost < step.cost_before_ls);
        assert_eq!(step.inner_iterations, config.inner_iterations);
        assert!(step.best_cost <= step.incumbent_cost);
    })
    .unwrap();
    assert_eq!(steps, config.outer_iterations());
    assert_eq!(report.outer_iterations, config.outer_iterations());
    assert_eq!(
        report.route_builds,
        config.outer_iterations() * config.inner_iterations + config.n_starts
    );
    assert!(report.best_cost <= report.initial_cost);
    assert_eq!(report.trace.len(), config.outer_iterations() + 1);
    for (k, w) in report.trace.windows(2).enumerate() {
        assert!(w[1].best_cost <= w[0].best_cost);
        assert!(w[1].temperature < w[0].temperature || k == 0);
    }
}

#[test]
fn erpa_only_has_a_single_trace_row() {
    let inst = instance(4, 30, 3);
    let r = solve_variant(&inst, &quick().with_seed(1), Variant::ErpaOnly).unwrap();
    assert_eq!(r.trace.len(), 1);
    assert_eq!(r.best_cost, r.initial_cost);
    assert_eq!(r.route_builds, quick().n_starts);
}

#[test]
fn random_init_differs_from_nearest_depot_on_clusters() {
    let mut b = InstanceBuilder::planar("clusters")
        .depot(0.0, 0.0)
        .depot(12.0, 0.0);
    for i in 0..10 {
        b = b
            .drop(5.0 + 0.1 * i as f64, 1.0, 1.0)
            .pickup(7.0 - 0.1 * i as f64, -1.0, 1.0);
    }
    let inst = b.build().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let nearest = depot_sets(&initial_allocate(&inst, &mut rng).unwrap());
    let random = depot_sets(&random_allocate(&inst, &mut rng).unwrap());
    assert_ne!(nearest, random);
}

#[test]
fn small_instances_reach_the_oracle() {
    for seed in 0..10u64 {
        let inst = generate(&GenParams {
            num_tasks: 4,
            num_depots: 1,
            area_km: 25.0,
            seed: 40 + seed,
            ..GenParams::default()
        })
        .unwrap();
        let (opt, _) = brute_force_oracle(&inst).unwrap();
        let r = solve(&inst, &SaConfig::default().with_seed(seed)).unwrap();
        assert!(r.best_cost >= opt - 1e-9);
        assert!(
            r.best_cost <= 1.02 * opt,
            "seed {seed}: {} vs {opt}",
            r.best_cost
        );
    }
}

#[test]
fn distinct_generation_seeds_differ() {
    let insts: Vec<Instance> = (0..100).map(|s| instance(s, 10, 2)).collect();
    for i in 0..insts.len() {
        for j in i + 1..insts.len() {
            assert_ne!(insts[i], insts[j]);
        }
    }
}

#[test]
fn geographic_instance_solves_end_to_end() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let (lat0, lon0) = (28.2, 112.9);
    let mut depots = Vec::new();
    for k in 0..5 {
        let lat = lat0 + rng.random_range(-0.1..0.1);
        let lon = lon0 + rng.random_range(-0.1..0.1);
        depots.push(format!(
            r#"{{"id": {}, "lat": {lat}, "lon": {lon}}}"#,
            81 + k
        ));
    }
    let mut tasks = Vec::new();
    for id in 1..=80 {
        let lat = lat0 + rng.random_range(-0.1..0.1);
        let lon = lon0 + rng.random_range(-0.1..0.1);
        let w = rng.random_range(1.0..8.0);
        let body = match id % 3 {
            0 => format!(r#""kind": "drop", "drop_weight": {w}"#),
            1 => format!(r#""kind": "pickup", "pickup_weight": {w}"#),
            _ => format!(
                r#""kind": "pick_drop", "drop_weight": {w}, "pickup_weight": {}"#,
                9.0 - w
            ),
        };
        tasks.push(format!(
            r#"{{"id": {id}, "lat": {lat}, "lon": {lon}, {body}}}"#
        ));
    }
    let text = format!(
        r#"{{"name": "changsha", "coordinate_system": "geographic",
            "drone": {{"max_range_km": 30, "max_capacity_kg": 8, "beta_max": 2}},
            "weights": {{"alpha": 0.9, "rho": 0.1}},
            "depots": [{}], "tasks": [{}]}}"#,
        depots.join(","),
        tasks.join(",")
    );
    let inst = instance_from_json(&text).unwrap();
    assert_eq!((inst.num_tasks(), inst.num_depots()), (80, 5));
    let r = solve(&inst, &SaConfig::default().with_seed(3)).unwrap();
    assert!(validate_schedule(&inst, &r.best_schedule).is_empty());
    assert!(r.best_cost < r.initial_cost);
}
