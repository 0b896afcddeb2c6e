use geocut::isometry::random_isometry_with;
use geocut::planner::{
    build_decomposition, continuity_probe, frontier_clearance, gc_ledger, piece_is_empty, plan_with, random_pair,
    sample_in_piece, transform_plan, velocity_of, PieceKind, PROBE_CLEARANCE,
};
use geocut::{LiftScalar, ModelManifold, StratumTag, Tolerances};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn manifolds() -> Vec<ModelManifold> {
    vec![
        ModelManifold::Sphere(2),
        ModelManifold::Sphere(3),
        ModelManifold::Sphere(4),
        ModelManifold::Sphere(5),
        ModelManifold::ComplexProjective(1),
        ModelManifold::ComplexProjective(2),
        ModelManifold::QuaternionicProjective(1),
        ModelManifold::QuaternionicProjective(2),
        ModelManifold::Lens(3),
        ModelManifold::Lens(4),
        ModelManifold::Lens(5),
        ModelManifold::Lens(7),
    ]
}

#[test]
fn random_pairs_fall_in_exactly_one_piece() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for m in manifolds() {
        let d = build_decomposition(&m).unwrap();
        for _ in 0..10_000 {
            let (x, y) = random_pair(&m, &mut rng);
            assert_eq!(d.accepting(&x, &y, &tol).unwrap().len(), 1, "{m}");
        }
    }
}

#[test]
fn every_section_lands_on_its_pair() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(405);
    for m in manifolds() {
        let d = build_decomposition(&m).unwrap();
        assert_eq!(d.pieces.len(), d.ledger.constructed_count);
        let nonempty = d.pieces.iter().filter(|p| !piece_is_empty(&m, p.kind)).count();
        assert_eq!(nonempty, d.ledger.nonempty_count);
        for piece in d.pieces.iter().filter(|p| !piece_is_empty(&m, p.kind)) {
            for _ in 0..1_000 {
                let (x, y) = sample_in_piece(&m, piece.kind, &mut rng).unwrap();
                assert_eq!(d.accepting(&x, &y, &tol).unwrap(), vec![piece.id]);
                let plan = plan_with(&d, &x, &y, 16, &tol).unwrap();
                let dist = m.distance(&x, &y).unwrap();
                assert!((plan.segment.length - dist).abs() < 1e-9);
                assert!(m.distance(plan.samples.last().unwrap(), &y).unwrap() < 1e-9, "{m} {:?}", piece.kind);
                assert!(m.distance(&plan.samples[0], &x).unwrap() < 1e-9);
                // Sections may start from another lift of x; enumerate from that lift.
                let start = geocut::ManifoldPoint { manifold: m, lift: plan.segment.start.clone() };
                let e = m.minimal_geodesics(&start, &y).unwrap();
                assert!(e.contains_velocity(&plan.segment.initial_velocity.vec, 1e-9), "{m} {:?}", piece.kind);
                assert!((velocity_of(&plan).norm() - dist).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn ledgers() {
    for p in [3u32, 4, 5, 7, 11] {
        let l = gc_ledger(&ModelManifold::Lens(p)).unwrap();
        assert_eq!((l.lower, l.upper_known), (6, 7));
        assert!(l.upper_constructed <= 7);
    }
    for n in 1..=5u32 {
        for m in [ModelManifold::ComplexProjective(n), ModelManifold::QuaternionicProjective(n)] {
            let l = gc_ledger(&m).unwrap();
            let k = 2 * n as usize;
            assert_eq!((l.lower, l.upper_constructed, l.upper_known), (k + 1, k + 2, k + 1));
            assert!(l.consistent);
        }
    }
    let l = gc_ledger(&ModelManifold::Sphere(2)).unwrap();
    assert_eq!((l.lower, l.upper_constructed, l.upper_known), (3, 3, 3));
}

#[test]
fn probes_scale_linearly_on_every_piece() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(406);
    for m in manifolds() {
        let d = build_decomposition(&m).unwrap();
        for piece in d.pieces.iter().filter(|p| !piece_is_empty(&m, p.kind)) {
            if piece.kind == PieceKind::AntipodalPole {
                continue;
            }
            let (x, y) = loop {
                let (x, y) = sample_in_piece(&m, piece.kind, &mut rng).unwrap();
                if frontier_clearance(&d, piece.id, &x, &y, &tol).unwrap() >= PROBE_CLEARANCE {
                    break (x, y);
                }
            };
            let mut prev = None;
            for r in [1e-3, 2e-3, 4e-3] {
                let rep = continuity_probe(&d, piece.id, &x, &y, r, 200, 7, &tol).unwrap();
                assert!(rep.accepted_samples > 0, "{m} {:?}", piece.kind);
                assert!(rep.max_velocity_deviation <= 10.0 * r, "{m} {:?} {rep:?}", piece.kind);
                if let Some(p) = prev {
                    assert!(rep.max_velocity_deviation <= 2.0 * p + 5.0 * r, "{m} {:?}", piece.kind);
                }
                prev = Some(rep.max_velocity_deviation);
            }
        }
    }
}

#[test]
fn off_cut_clearance_is_the_classification_margin() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(407);
    for m in manifolds() {
        let d = build_decomposition(&m).unwrap();
        for _ in 0..100 {
            let (x, y) = sample_in_piece(&m, PieceKind::OffCut, &mut rng).unwrap();
            let c = frontier_clearance(&d, 0, &x, &y, &tol).unwrap();
            assert_eq!(c, m.classify_pair_with(&x, &y, &tol).unwrap().margin);
        }
        for piece in d.pieces.iter().filter(|p| !piece_is_empty(&m, p.kind)) {
            let (x, y) = sample_in_piece(&m, piece.kind, &mut rng).unwrap();
            assert!(frontier_clearance(&d, piece.id, &x, &y, &tol).unwrap() > 0.0, "{m} {:?}", piece.kind);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lens_plans_do_not_depend_on_lifts(p in prop::sample::select(vec![3u32, 4, 5, 7]), seed: u64, j in 1u32..7, k in 1u32..7, pick in 0usize..4) {
        let m = ModelManifold::Lens(p);
        let d = build_decomposition(&m).unwrap();
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = d.pieces[[0, 1, 2 + rng.random_range(0..4), 2][pick]].kind;
        let (x, y) = sample_in_piece(&m, kind, &mut rng).unwrap();
        let a = plan_with(&d, &x, &y, 24, &tol).unwrap();
        let x2 = x.relifted(LiftScalar::Deck(j % p)).unwrap();
        let y2 = y.relifted(LiftScalar::Deck(k % p)).unwrap();
        let b = plan_with(&d, &x2, &y2, 24, &tol).unwrap();
        prop_assert_eq!(a.piece_id, b.piece_id);
        for (s, t) in a.samples.iter().zip(&b.samples) {
            prop_assert!(m.distance(s, t).unwrap() < 1e-9);
        }
    }

    #[test]
    fn off_cut_planning_commutes_with_isometries(m in prop::sample::select(manifolds()), seed: u64) {
        let d = build_decomposition(&m).unwrap();
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = geocut::sampling::stratum_pair(&m, StratumTag::OffCut, &mut rng).unwrap();
        let g = random_isometry_with(&m, &mut rng);
        let a = plan_with(&d, &x, &y, 24, &tol).unwrap();
        let moved = transform_plan(&m, &g, &a).unwrap();
        let b = plan_with(&d, &g.act(&m, &x).unwrap(), &g.act(&m, &y).unwrap(), 24, &tol).unwrap();
        prop_assert_eq!(b.piece_id, 0);
        for (s, t) in moved.iter().zip(&b.samples) {
            prop_assert!(m.distance(s, t).unwrap() < 1e-9);
        }
    }

    #[test]
    fn path_spacing_is_uniform(m in prop::sample::select(manifolds()), seed: u64, n in 2usize..80) {
        let d = build_decomposition(&m).unwrap();
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_pair(&m, &mut rng);
        let plan = plan_with(&d, &x, &y, n, &tol).unwrap();
        prop_assert_eq!(plan.samples.len(), n);
        let step = plan.segment.length / (n - 1) as f64;
        for w in plan.samples.windows(2) {
            prop_assert!(m.distance(&w[0], &w[1]).unwrap() <= step + 1e-9);
        }
    }
}
