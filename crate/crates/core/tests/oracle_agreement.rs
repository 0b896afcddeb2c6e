use geocut::oracle::{brute_force_minimizers, compare_with_closed_form};
use geocut::sampling::stratum_pair;
use geocut::tol::{LAND_TOL, ORACLE_GRID};
use geocut::{ModelManifold, StratumTag};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sweep(m: ModelManifold, tags: &[StratumTag], pairs: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &tag in tags {
        for i in 0..pairs {
            let (x, y) = stratum_pair(&m, tag, &mut rng).unwrap();
            let r = brute_force_minimizers(&m, &x, &y, ORACLE_GRID, LAND_TOL).unwrap();
            for c in &r.clusters {
                assert!((c.length - r.distance).abs() < 1e-8, "{m} {tag:?} #{i}");
            }
            let c = compare_with_closed_form(&m, &x, &y, &r).unwrap();
            assert!(c.count_match, "{m} {tag:?} #{i}: {c:?}");
            if !c.closed_form_family {
                assert!(c.velocity_max_err < 1e-6, "{m} {tag:?} #{i}: {c:?}");
            }
        }
    }
}

#[test]
fn lens_spaces() {
    for p in [3, 4, 5, 7] {
        sweep(
            ModelManifold::Lens(p),
            &[StratumTag::OffCut, StratumTag::LensC1, StratumTag::LensCpMinus1],
            200,
            u64::from(p),
        );
    }
}

#[test]
fn projective_spaces_and_spheres() {
    sweep(ModelManifold::ComplexProjective(1), &[StratumTag::OffCut, StratumTag::ProjectiveCut], 200, 1);
    sweep(ModelManifold::ComplexProjective(2), &[StratumTag::OffCut, StratumTag::ProjectiveCut], 40, 2);
    sweep(ModelManifold::QuaternionicProjective(1), &[StratumTag::OffCut], 40, 3);
    sweep(ModelManifold::Sphere(2), &[StratumTag::OffCut, StratumTag::SphereAntipodal], 200, 4);
    sweep(ModelManifold::Sphere(3), &[StratumTag::OffCut, StratumTag::SphereAntipodal], 40, 5);
}
