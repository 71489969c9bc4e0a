use dynants::classify::ClassifierKind;
use dynants::colony::{self, Params, PheromoneField, TourRecord, Variant, DEFAULT_FLOOR};
use dynants::engine::{self, Colony, RunConfig, Termination};
use dynants::report;
use dynants::tsplib::{self, EdgeWeightKind, Instance};
use dynants::update::{self, EliteTarget};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bays29() -> Instance {
    tsplib::bundled("bays29").unwrap()
}

fn config(inst: &Instance, variant: Variant, kind: Option<ClassifierKind>, iters: usize) -> RunConfig {
    let mut c = RunConfig::new(inst, variant, kind);
    c.params.max_iterations = iters;
    c
}

#[test]
fn strongly_marked_cycle_is_followed() {
    let coords: Vec<(f64, f64)> = (0..10)
        .map(|k| {
            let a = k as f64 * std::f64::consts::TAU / 10.0;
            (100.0 * a.cos(), 100.0 * a.sin())
        })
        .collect();
    let inst = Instance::from_coords("ring", EdgeWeightKind::Euc2d, coords).unwrap();
    let n = inst.dimension();
    let cycle = [3, 7, 1, 9, 4, 0, 6, 2, 8, 5];
    let mut tau = PheromoneField::uniform(n, 0.01, DEFAULT_FLOOR);
    for k in 0..n {
        tau.set(cycle[k], cycle[(k + 1) % n], 100.0);
    }
    let params = Params {
        alpha: 1.0,
        beta: 0.0,
        ..Params::default()
    };
    let reference = inst.tour_length(&cycle).unwrap();
    let on_cycle = |t: &TourRecord| {
        let mut edges: Vec<(usize, usize)> = t.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
        let mut want: Vec<(usize, usize)> = (0..n)
            .map(|k| {
                let (a, b) = (cycle[k], cycle[(k + 1) % n]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        want.sort_unstable();
        edges == want
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let hits = (0..1000)
        .filter(|k| {
            let t = colony::construct_tour(&mut rng, k % n, &tau, &inst, &params).unwrap();
            on_cycle(&t) && t.length == reference
        })
        .count();
    assert!(hits >= 950, "only {hits} of 1000 tours followed the cycle");
}

#[test]
fn dynamic_elitist_with_single_best_matches_static_bonus() {
    let inst = bays29();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tours: Vec<TourRecord> = (0..6)
        .map(|k| colony::construct_tour(&mut rng, k, &PheromoneField::uniform(29, 1.0, DEFAULT_FLOOR), &inst, &Params::default()).unwrap())
        .collect();
    let best = tours.iter().min_by_key(|t| t.length).unwrap();
    let base = PheromoneField::uniform(29, 0.5, DEFAULT_FLOOR);
    let mut dynamic = base.clone();
    update::dynamic_elitist_update(&mut dynamic, &[best], 100.0, EliteTarget::OwnTour, best);
    let mut fixed = base.clone();
    update::elitist_bonus_static(&mut fixed, best, 1, 100.0);
    assert_eq!(dynamic, fixed);
}

#[test]
fn identical_seeds_give_identical_traces() {
    let inst = bays29();
    let c = config(&inst, Variant::Dea, Some(ClassifierKind::Mts), 100);
    let a = engine::run(&inst, &c).unwrap();
    let b = engine::run(&inst, &c).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.best_tour, b.best_tour);
    let other = engine::run(&inst, &RunConfig { seed: 1, ..c }).unwrap();
    assert_ne!(a.trace, other.trace);
}

#[test]
fn run_invariants_hold_for_every_variant() {
    let inst = bays29();
    for variant in Variant::ALL {
        let kinds: Vec<Option<ClassifierKind>> = if variant.is_dynamic() {
            vec![Some(ClassifierKind::Mrts), Some(ClassifierKind::Mts), Some(ClassifierKind::Mets)]
        } else {
            vec![None]
        };
        for kind in kinds {
            let r = engine::run(&inst, &config(&inst, variant, kind, 200)).unwrap();
            assert_eq!(r.iterations, 200);
            assert_eq!(r.termination, Termination::MaxIterations);
            let m = r.config.params.num_ants;
            for pair in r.trace.windows(2) {
                assert!(pair[1].best_so_far <= pair[0].best_so_far);
            }
            assert_eq!(r.best_length, r.trace.iter().map(|s| s.best).min().unwrap());
            assert_eq!(inst.tour_length(&r.best_tour).unwrap(), r.best_length);
            for s in &r.trace {
                assert!((1..=m).contains(&s.elite_count), "{variant} {:?}", s);
                assert_eq!(s.threshold.is_some(), variant.is_dynamic());
            }
        }
    }
}

#[test]
fn single_iteration_run() {
    let inst = bays29();
    let r = engine::run(&inst, &config(&inst, Variant::Dra, Some(ClassifierKind::Mets), 1)).unwrap();
    assert_eq!(r.trace.len(), 1);
}

#[test]
fn stop_at_optimum_ends_early() {
    let tri = Instance::from_matrix("tri", &[vec![0, 3, 4], vec![3, 0, 5], vec![4, 5, 0]])
        .unwrap()
        .with_optimum(Some(12));
    let mut c = config(&tri, Variant::As, None, 50);
    c.stop_at_optimum = true;
    let r = engine::run(&tri, &c).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.termination, Termination::OptimumReached);
    c.stop_at_optimum = false;
    assert_eq!(engine::run(&tri, &c).unwrap().iterations, 50);
}

#[test]
fn elite_counts_vary_over_a_window() {
    let inst = tsplib::bundled("st70").unwrap();
    for variant in [Variant::Dea, Variant::Dra, Variant::DeaPun, Variant::DraPun] {
        for kind in [ClassifierKind::Mrts, ClassifierKind::Mts, ClassifierKind::Mets] {
            let r = engine::run(&inst, &config(&inst, variant, Some(kind), 1000)).unwrap();
            let counts = r.elite_counts();
            assert!(counts.iter().any(|&c| c != counts[0]), "{variant} {kind}: constant trace");
        }
    }
}

#[test]
fn mmas_respects_bounds_each_iteration() {
    let inst = bays29();
    let mut colony = Colony::new(&inst, config(&inst, Variant::Mmas, None, 300)).unwrap();
    for _ in 0..300 {
        let stats = colony.run_iteration().unwrap();
        let (lo, hi) = colony.pheromone().bounds().unwrap();
        assert!(colony.pheromone().min_off_diagonal() >= lo);
        assert!(colony.pheromone().max_off_diagonal() <= hi);
        assert!(stats.branching.is_some());
    }
}

#[test]
fn sweep_keeps_order_and_purity() {
    let inst = bays29();
    let base = config(&inst, Variant::Dea, Some(ClassifierKind::Mrts), 30);
    let configs = engine::seeded(&base, 10, 100);
    let results: Vec<_> = engine::sweep(&inst, &configs).into_iter().map(Result::unwrap).collect();
    assert_eq!(results.len(), 10);
    for (k, r) in results.iter().enumerate() {
        assert_eq!(r.config.seed, 100 + k as u64);
        assert_eq!(r.trace, engine::run(&inst, &configs[k]).unwrap().trace);
    }
    let twins = vec![base.clone(), base.clone()];
    let out: Vec<_> = engine::sweep(&inst, &twins).into_iter().map(Result::unwrap).collect();
    assert_eq!(out[0].trace, out[1].trace);
}

#[test]
fn sweep_errors_stay_local() {
    let inst = bays29();
    let good = config(&inst, Variant::Ea, None, 5);
    let mut bad = good.clone();
    bad.variant = Variant::Ra;
    bad.params.sigma_fixed = Some(99);
    let out = engine::sweep(&inst, &[good.clone(), bad, good]);
    assert!(out[0].is_ok());
    assert!(out[1].is_err());
    assert!(out[2].is_ok());
}

#[test]
fn parameter_grid_has_hundred_points() {
    let inst = bays29();
    let base = config(&inst, Variant::Dea, Some(ClassifierKind::Mts), 10);
    let grid = engine::param_grid(&base, &[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 4.0, 5.0], &[0.7, 0.8, 0.9, 1.0]);
    assert_eq!(grid.len(), 100);
    assert!(grid.iter().all(|c| c.validate().is_ok()));
}

#[test]
fn saved_runs_replay_to_identical_rows() {
    let inst = bays29();
    let base = config(&inst, Variant::DraPun, Some(ClassifierKind::Mts), 120);
    let results: Vec<_> = engine::seeded(&base, 3, 0)
        .iter()
        .map(|c| engine::run(&inst, c).unwrap())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    for r in &results {
        report::save_run(dir.path(), r).unwrap();
    }
    let loaded = report::load_runs(dir.path()).unwrap();
    assert_eq!(loaded.len(), 3);
    let direct = report::summarize(&results, report::DEFAULT_WINDOW).unwrap();
    let replayed = report::summarize(&loaded, report::DEFAULT_WINDOW).unwrap();
    assert_eq!(direct, replayed);
    assert_eq!(
        report::quartile_rows(&results).unwrap(),
        report::quartile_rows(&loaded).unwrap()
    );
}

#[test]
fn bays29_dea_mets_reaches_two_percent() {
    let inst = bays29();
    for seed in [0, 7] {
        let mut c = config(&inst, Variant::Dea, Some(ClassifierKind::Mets), 5000);
        c.seed = seed;
        let r = engine::run(&inst, &c).unwrap();
        assert!(r.best_length as f64 <= 2020.0 * 1.02, "seed {seed}: {}", r.best_length);
    }
}
