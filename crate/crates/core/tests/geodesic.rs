use std::f64::consts::{E, FRAC_PI_2};

use isodense::geodesic::*;
use isodense::{Density, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn path_length_examples() {
    let p = Path::new(vec![[0.0, 0.0], [1.0, 0.0]], &Density::constant(2.0, 2), 0.01).unwrap();
    assert!((path_length(&p, &Density::constant(2.0, 2)) - 2.0).abs() < 1e-12);

    let d = Density::exp_growth(1.0, 2);
    let p = Path::new(vec![[1.0, 0.0], [2.0, 0.0]], &d, 1e-3).unwrap();
    assert!((path_length(&p, &d) - (E * E - E)).abs() < 1e-6);

    let arc: Vec<[f64; 2]> = (0..=2000).map(|k| {
        let t = FRAC_PI_2 * k as f64 / 2000.0;
        [t.cos(), t.sin()]
    }).collect();
    let one = Density::constant(1.0, 2);
    let p = Path::new(arc, &one, 1e-3).unwrap();
    assert!((path_length(&p, &one) - FRAC_PI_2).abs() < 1e-6);
    assert_eq!(p.weighted_length, path_length(&p, &one));
    assert!(Path::new(vec![[0.0, 0.0]], &one, 0.1).is_err());
}

#[test]
fn euclidean_geodesic_is_a_segment() {
    let one = Density::constant(1.0, 2);
    let (p, q) = ([0.3, -0.7], [1.9, 0.4]);
    let h = 0.02;
    let path = shortest_path(p, q, &one, h).unwrap();
    let l = (q[0] - p[0]).hypot(q[1] - p[1]);
    assert!((path.weighted_length / l - 1.0).abs() < 0.005);
    let r = triangle_containment_check(&path, p, q).unwrap();
    assert!(r.holds, "{r:?}");
    for v in &path.vertices {
        let s = ((v[0] - p[0]) * (q[1] - p[1]) - (v[1] - p[1]) * (q[0] - p[0])).abs() / l;
        assert!(s <= h);
    }
}

#[test]
fn radial_segment_for_nondecreasing_density() {
    let d = Density::power_tail(2.0, 2);
    let p = [1.2, 0.9];
    let q = [2.4, 1.8];
    let path = shortest_path(p, q, &d, 0.01).unwrap();
    let straight = Path::new(vec![p, q], &d, 0.01).unwrap();
    assert!((path.weighted_length / straight.weighted_length - 1.0).abs() < 0.005);
    let r = triangle_containment_check(&path, p, q).unwrap();
    assert!(r.degenerate && r.holds, "{r:?}");
}

#[test]
fn exponential_density_bends_towards_the_origin() {
    let d = Density::exp_growth(1.0, 2);
    let (p, q) = ([1.0, 0.0], [0.0, 1.0]);
    let mut violations = Vec::new();
    for h in [0.02, 0.01] {
        let path = shortest_path(p, q, &d, h).unwrap();
        let straight = Path::new(vec![p, q], &d, h).unwrap();
        assert!(path.weighted_length < straight.weighted_length);
        let mid = path.vertices[path.vertices.len() / 2];
        assert!(mid[0] + mid[1] < 1.0);
        let r = triangle_containment_check(&path, p, q).unwrap();
        assert!(r.holds, "{r:?}");
        violations.push(r.max_violation);
    }
    assert!(violations[1] <= violations[0] + 1e-12);
}

#[test]
fn endpoints_outside_the_box_are_rejected() {
    let one = Density::constant(1.0, 2);
    let r = shortest_path_in([0.0, 0.0], [5.0, 0.0], &one, 0.1, ([-1.0, -1.0], [1.0, 1.0]));
    assert!(matches!(r, Err(Error::Config(_))));
}

#[test]
fn grid_refinement_does_not_lengthen_paths() {
    let d = Density::exp_growth(0.5, 2);
    let (p, q) = ([1.0, -0.5], [-0.3, 1.2]);
    let coarse = shortest_path(p, q, &d, 0.04).unwrap();
    let fine = shortest_path(p, q, &d, 0.02).unwrap();
    assert!(fine.weighted_length <= 1.01 * coarse.weighted_length);
}

#[test]
fn paths_stay_on_the_origin_side_for_nondecreasing_densities() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 0.04;
    for d in [Density::power_tail(1.0, 2), Density::exp_growth(1.0, 2)] {
        for _ in 0..20 {
            let p: [f64; 2] = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let q = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            if (p[0] - q[0]).hypot(p[1] - q[1]) < 0.3 {
                continue;
            }
            let path = shortest_path(p, q, &d, h).unwrap();
            assert!(half_plane_violation(&path, p, q) <= 2.0 * h, "{p:?} {q:?}");
        }
    }
}

#[test]
fn path_rows_accumulate_length() {
    let d = Density::exp_growth(1.0, 2);
    let path = shortest_path([1.0, 0.0], [0.0, 1.0], &d, 0.05).unwrap();
    let rows = path.rows(&d);
    assert_eq!(rows.len(), path.vertices.len());
    assert!((rows.last().unwrap()[2] - path.weighted_length).abs() < 1e-12);
}

proptest! {
    #[test]
    fn projection_onto_disks_is_a_contraction(
        x in prop::array::uniform2(-5.0f64..5.0), y in prop::array::uniform2(-5.0f64..5.0),
        c in prop::array::uniform2(-2.0f64..2.0), r in 0.1f64..3.0,
    ) {
        let (px, py) = (project_to_disk(x, c, r), project_to_disk(y, c, r));
        let d = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
        prop_assert!(d(px, py) <= d(x, y) + 1e-12);
    }
}
