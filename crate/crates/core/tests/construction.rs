use fracdim::construction::{
    is_antichain, orbit, stopping_set, validate_osc, Address, ModelSpec, OrbitTarget, Realization,
    RealizationExport, Semantics, Truncation,
};
use fracdim::models::{self, ln_endpoint_gap, ln_inf_gap, ln_vn_example1, ln_vn_example2, PMode, RatioLaw};
use proptest::prelude::*;

fn zoo() -> Vec<(ModelSpec, usize, Truncation)> {
    let t = Truncation::from_eps(1e-12).unwrap();
    vec![
        (models::cantor(1.0 / 3.0, 2).unwrap(), 8, t),
        (models::cantor(0.2, 4).unwrap(), 6, t),
        (models::homogeneous_random(RatioLaw::Uniform { lo: 0.2, hi: 0.3 }, 3, 0.8).unwrap(), 7, t),
        (models::example1(PMode::Random).unwrap(), 3, t),
        (models::example1(PMode::Fixed(1.5)).unwrap(), 3, t),
        (models::example2(), 3, Truncation::from_eps(1e-20).unwrap()),
    ]
}

#[test]
fn sampling_is_deterministic_per_seed() {
    for (model, depth, t) in zoo() {
        let a = Realization::sample(&model, 42, depth, t, Semantics::Recursive).export();
        let b = Realization::sample(&model, 42, depth, t, Semantics::Recursive).export();
        assert_eq!(a, b, "{}", model.name());
    }
    let m = models::homogeneous_random(RatioLaw::Uniform { lo: 0.2, hi: 0.3 }, 2, 1.0).unwrap();
    let t = Truncation::none();
    let a = Realization::sample(&m, 1, 4, t, Semantics::Recursive).export();
    let b = Realization::sample(&m, 2, 4, t, Semantics::Recursive).export();
    assert_ne!(a.nodes, b.nodes);
}

#[test]
fn cells_nest_and_have_disjoint_interiors() {
    for (model, depth, t) in zoo() {
        for seed in 0..100 {
            let rz = Realization::sample(&model, seed, depth.min(4), t, Semantics::Recursive);
            for k in 1..=rz.max_depth() {
                for (i, node) in rz.level(k).iter().enumerate() {
                    let id = fracdim::construction::NodeId { level: k, index: i };
                    let parent = rz.node(rz.parent(id).unwrap());
                    assert!(parent.interval.contains_interval(&node.interval), "{} seed {seed}", model.name());
                    // Endpoints are stored globally, so tiny cells are resolved only to a few ulps of 1.
                    assert!((node.interval.length() - node.diameter()).abs() <= 1e-14);
                }
                let osc = validate_osc(&rz, k);
                assert!(osc.ok, "{} seed {seed} level {k}: {:?}", model.name(), osc);
            }
        }
    }
}

#[test]
fn diameters_decay_geometrically() {
    for (model, depth, t) in zoo() {
        let rz = Realization::sample(&model, 9, depth, t, Semantics::Recursive);
        let stats = rz.stats();
        let q = model.law().max_ratio();
        for (k, &d) in stats.sup_diam_per_level.iter().enumerate() {
            assert!(d <= q.powi(k as i32) * (1.0 + 1e-12), "{} level {k}: {d}", model.name());
        }
    }
}

#[test]
fn recursive_and_fractal_agree_on_every_cell() {
    for (model, depth, t) in zoo() {
        for seed in 0..10 {
            let rec = Realization::sample(&model, seed, depth, t, Semantics::Recursive);
            let frac = Realization::sample(&model, seed, depth, t, Semantics::Fractal);
            assert_eq!(rec.export().nodes, frac.export().nodes, "{} seed {seed}", model.name());
            assert!(frac.draws() >= rec.draws());
        }
    }
}

#[test]
fn fractal_semantics_draws_under_dead_cells() {
    let m = models::homogeneous_random(RatioLaw::Uniform { lo: 0.2, hi: 0.3 }, 2, 0.5).unwrap();
    let extra = (0..50).any(|seed| {
        let rec = Realization::sample(&m, seed, 4, Truncation::none(), Semantics::Recursive);
        let frac = Realization::sample(&m, seed, 4, Truncation::none(), Semantics::Fractal);
        frac.draws() > rec.draws()
    });
    assert!(extra);
}

#[test]
fn export_round_trips_through_json() {
    let rz = Realization::sample(&models::example2(), 3, 2, Truncation::from_eps(1e-30).unwrap(), Semantics::Recursive);
    let exp = rz.export();
    let text = serde_json::to_string(&exp).unwrap();
    let back: RealizationExport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, exp);
    assert_eq!(exp.globals.len(), 1);
    assert!((1.0..=4.0).contains(&exp.globals[0]));
}

#[test]
fn depth_zero_is_the_root_alone() {
    let rz = Realization::sample(&models::cantor(1.0 / 3.0, 2).unwrap(), 0, 0, Truncation::none(), Semantics::Recursive);
    let exp = rz.export();
    assert_eq!(exp.nodes.len(), 1);
    assert_eq!((exp.nodes[0].left, exp.nodes[0].right), (0.0, 1.0));
    assert!(exp.nodes[0].address.is_empty());
}

#[test]
fn first_example_places_children_at_inverse_powers() {
    for p in [1.0, 1.5, 2.0] {
        let m = models::example1(PMode::Fixed(p)).unwrap();
        let rz = Realization::sample(&m, 5, 2, Truncation::from_eps(1e-6).unwrap(), Semantics::Recursive);
        let level = rz.level(1);
        // V_4 < 1e-6 < V_3 for these lengths.
        assert_eq!(level.len(), 3);
        for node in level {
            let n = node.digit() as f64;
            assert!((node.interval.hi - n.powf(-p)).abs() < 1e-15, "p = {p}, n = {n}");
            assert!((node.ln_diam - ln_vn_example1(node.digit() as u64)).abs() < 1e-12);
            assert!(node.diameter() >= 1e-6);
        }
    }
}

#[test]
fn second_example_uses_the_deep_exponent_below_level_one() {
    let rz = Realization::sample(&models::example2(), 8, 2, Truncation::from_eps(1e-40).unwrap(), Semantics::Recursive);
    let p = rz.globals()[0];
    for node in rz.level(1) {
        let n = node.digit() as f64;
        assert!((node.interval.hi - n.powf(-p)).abs() < 1e-15);
    }
    let first = rz.find(&"1".parse().unwrap()).unwrap();
    for child in rz.children(first) {
        let node = rz.node(child);
        let n = node.digit() as f64;
        assert!((node.local.image().hi - n.powf(-models::DEEP_EXPONENT)).abs() < 1e-15);
    }
}

#[test]
fn addresses_round_trip() {
    let rz = Realization::sample(&models::cantor(0.25, 3).unwrap(), 0, 4, Truncation::none(), Semantics::Recursive);
    for k in 0..=4 {
        for i in 0..rz.level(k).len() {
            let id = fracdim::construction::NodeId { level: k, index: i };
            let addr = rz.address(id);
            assert_eq!(addr.len(), k);
            assert_eq!(rz.find(&addr), Some(id));
            assert_eq!(addr.to_string().parse::<Address>().unwrap(), addr);
        }
    }
    assert_eq!(rz.find(&"4".parse().unwrap()), None);
}

#[test]
fn truncation_is_reported() {
    let m = models::example1(PMode::Fixed(1.0)).unwrap();
    let rz = Realization::sample(&m, 0, 2, Truncation::from_eps(1e-8).unwrap(), Semantics::Recursive);
    let stats = rz.stats();
    assert!(stats.truncation.iter().all(|lt| lt.truncated_parents > 0));
    assert!(!rz.tail_hulls(1).is_empty());
    let cantor = Realization::sample(&models::cantor(1.0 / 3.0, 2).unwrap(), 0, 7, Truncation::from_eps(1e-3).unwrap(), Semantics::Recursive);
    assert_eq!(cantor.level(7).iter().filter(|n| n.is_alive()).count(), 0);
    assert!(cantor.is_extinct());
}

#[test]
fn point_orbits_stay_in_the_base_cell() {
    let rz = Realization::sample(&models::cantor(1.0 / 3.0, 2).unwrap(), 0, 4, Truncation::none(), Semantics::Recursive);
    let base: Address = "2.1".parse().unwrap();
    let cell = rz.node(rz.find(&base).unwrap()).interval;
    let o = orbit(&rz, &base, 0.5, &OrbitTarget::LevelOffset(2)).unwrap();
    assert_eq!(o.points.len(), 4);
    assert!(o.points.intervals().iter().all(|iv| cell.contains_interval(iv)));
    assert!(orbit(&rz, &base, 1.5, &OrbitTarget::LevelOffset(1)).is_err());
}

#[test]
fn stopping_sets_are_antichains_of_small_cells() {
    let m = models::homogeneous_random(RatioLaw::Uniform { lo: 0.2, hi: 0.3 }, 2, 1.0).unwrap();
    let rz = Realization::sample(&m, 4, 8, Truncation::none(), Semantics::Recursive);
    let s = stopping_set(&rz, &Address::root(), 1, 0.01).unwrap();
    let members: Vec<Address> = s.antichain.members().cloned().collect();
    assert!(is_antichain(&members));
    assert!(s.ln_diams.iter().all(|&l| l <= 0.01f64.ln() + 1e-12));
    // A complete antichain of a binary tree covers the root: Σ of 2^-depth is 1.
    let mass: f64 = members.iter().map(|a| 0.5f64.powi(a.len() as i32)).sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn inner_infimum_matches_a_dense_grid() {
    for &(n, a, b) in &[(1u64, 1.0, 2.0), (2, 1.0, 2.0), (7, 1.0, 2.0), (100, 1.0, 2.0), (3, 1.0, 4.0), (50, 1.0, 4.0)] {
        let grid = (0..=100_000)
            .map(|i| ln_endpoint_gap(n, a + (b - a) * i as f64 / 100_000.0))
            .fold(f64::INFINITY, f64::min);
        let fast = ln_inf_gap(n, a, b);
        assert!(fast <= grid + 1e-12, "n = {n}: {fast} vs {grid}");
        assert!(grid - fast < 1e-9, "n = {n}: {fast} vs {grid}");
    }
}

#[test]
fn child_lengths_leave_room_for_every_exponent() {
    for n in 1..400u64 {
        let (v1, v2) = (ln_vn_example1(n), ln_vn_example2(n));
        for i in 0..=20 {
            let p1 = 1.0 + i as f64 / 20.0;
            let p2 = 1.0 + 3.0 * i as f64 / 20.0;
            assert!(v1 < ln_endpoint_gap(n, p1));
            assert!(v2 < ln_endpoint_gap(n, p2));
        }
        assert!((v1 - (ln_inf_gap(n, 1.0, 2.0) - n as f64 * 16f64.ln())).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn level_unions_shrink_towards_the_deepest(seed in any::<u64>(), keep in 0.6..1.0f64) {
        let m = models::homogeneous_random(RatioLaw::Uniform { lo: 0.1, hi: 0.45 }, 2, keep).unwrap();
        let rz = Realization::sample(&m, seed, 6, Truncation::none(), Semantics::Recursive);
        prop_assume!(!rz.is_extinct());
        let stats = rz.stats();
        let last = rz.level_union(6, true).unwrap();
        for k in 0..6 {
            let uk = rz.level_union(k, true).unwrap();
            prop_assert!(last.is_subset_of(&uk));
            let d = fracdim::geometry::hausdorff_distance(&uk, &last).unwrap();
            prop_assert!(d <= stats.sup_diam_per_level[k] + stats.sup_diam_per_level[6] + 1e-12);
        }
    }

    #[test]
    fn ratio_draws_stay_in_range(seed in any::<u64>()) {
        let m = models::homogeneous_random(RatioLaw::Uniform { lo: 0.2, hi: 0.3 }, 3, 1.0).unwrap();
        let rz = Realization::sample(&m, seed, 2, Truncation::none(), Semantics::Recursive);
        for node in rz.level(1).iter().chain(rz.level(2)) {
            let r = node.local.ratio();
            prop_assert!((0.2..=0.3).contains(&r));
        }
    }
}
