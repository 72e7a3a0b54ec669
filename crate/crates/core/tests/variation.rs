use std::f64::consts::{E, PI};

use isodense::conditions::profile_upper_bound;
use isodense::measure::{PolarGraph, Region};
use isodense::variation::*;
use isodense::{Density, Error};
use proptest::prelude::*;

#[test]
fn curvature_of_circles_and_segments() {
    let c = Curve::circle([0.0, 0.0], 1.0, 256).unwrap();
    c.validate().unwrap();
    for i in 0..c.unique_len() {
        assert!((euclidean_curvature(&c, i).unwrap() - 1.0).abs() < 1e-6);
    }
    let pts: Vec<[f64; 2]> = (0..200).map(|k| {
        let t = std::f64::consts::TAU * k as f64 / 200.0;
        [2.0 + 3.0 * t.cos(), -1.0 + 3.0 * t.sin()]
    }).collect();
    let c = Curve::from_points(&pts, true).unwrap();
    c.validate().unwrap();
    for i in [0, 17, 199] {
        assert!((euclidean_curvature(&c, i).unwrap() - 1.0 / 3.0).abs() < 1e-6);
    }
    let rev: Vec<[f64; 2]> = pts.iter().rev().copied().collect();
    let c = Curve::from_points(&rev, true).unwrap();
    assert!((euclidean_curvature(&c, 5).unwrap() - 1.0 / 3.0).abs() < 1e-6);

    let seg: Vec<[f64; 2]> = (0..10).map(|k| [k as f64 * 0.1, 0.5 * k as f64 * 0.1]).collect();
    let c = Curve::from_points(&seg, false).unwrap();
    assert!(euclidean_curvature(&c, 4).unwrap().abs() < 1e-12);
    assert!(euclidean_curvature(&c, 0).is_err());
}

#[test]
fn curvature_of_parabola_at_vertex() {
    assert_eq!(graph_curvature(0.0, 1.0), 1.0);
    let pts: Vec<[f64; 2]> = (-50..=50).map(|k| {
        let x = k as f64 * 1e-3;
        [x, 0.5 * x * x]
    }).collect();
    let c = Curve::from_points(&pts, false).unwrap();
    // Right-hand normal of a rightward curve points down, away from the bend.
    assert!((euclidean_curvature(&c, 50).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn coincident_samples_are_rejected() {
    let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    assert!(matches!(Curve::from_points(&pts, true), Err(Error::Geometry(_))));
}

#[test]
fn generalized_curvature_examples() {
    let c = Curve::circle([0.0, 0.0], 1.0, 128).unwrap();
    assert!((generalized_curvature(&c, 3, &Density::constant(1.0, 2)).unwrap() - 1.0).abs() < 1e-9);
    for r in [0.5, 1.0, 2.0] {
        let c = Curve::circle([0.0, 0.0], r, 128).unwrap();
        let h = generalized_curvature(&c, 7, &Density::gaussian_like(2)).unwrap();
        assert!((h - (1.0 / r + 2.0 * r)).abs() < 1e-8);
        let h = generalized_curvature(&c, 7, &Density::exp_growth(0.7, 2)).unwrap();
        assert!((h - (1.0 / r + 0.7)).abs() < 1e-8);
    }
}

#[test]
fn first_variation_examples() {
    let disk = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
    let eps = [1e-2, 1e-3, 1e-4];
    let ones = vec![1.0; 64];
    let r = first_variation_check(&disk, &Density::constant(1.0, 2), &ones, &eps).unwrap();
    assert!((r.dv_predicted - 2.0 * PI).abs() < 1e-10 && (r.dp_predicted - 2.0 * PI).abs() < 1e-10);
    assert!(r.rows[2].dv_mismatch < 1e-4 && r.rows[2].dp_mismatch < 1e-4, "{r:?}");

    let r = first_variation_check(&disk, &Density::gaussian_like(2), &ones, &eps).unwrap();
    assert!((r.dv_predicted - 2.0 * PI * E).abs() < 1e-9);
    assert!((r.dp_predicted - 6.0 * PI * E).abs() < 1e-9);
    assert!(r.rows[2].dv_mismatch < 1e-3 && r.rows[2].dp_mismatch < 1e-3, "{r:?}");

    let cos: Vec<f64> = (0..64).map(|k| (std::f64::consts::TAU * k as f64 / 64.0).cos()).collect();
    let r = first_variation_check(&disk, &Density::constant(1.0, 2), &cos, &eps).unwrap();
    assert!(r.dv_predicted.abs() < 1e-12 && r.dp_predicted.abs() < 1e-12);
    assert!(r.rows.iter().all(|x| x.dv_mismatch <= x.eps && x.dp_mismatch <= x.eps), "{r:?}");
}

#[test]
fn first_variation_on_a_polar_graph_with_a_non_radial_density() {
    let g = PolarGraph::from_fn([0.3, -0.2], 48, |t| 1.0 + 0.2 * (2.0 * t).cos()).unwrap();
    let d = Density::from_json(&serde_json::json!({"model": "piecewise", "params": {"kind": "bumpy", "bumps": [
        {"center": [1.0, 0.0], "radius": 0.8, "amplitude": 0.5}]}}))
    .unwrap();
    let u: Vec<f64> = (0..48).map(|k| 1.0 + 0.5 * (std::f64::consts::TAU * k as f64 / 48.0).sin()).collect();
    let r = first_variation_check(&Region::PolarGraph(g), &d, &u, &[4e-3, 2e-3, 1e-3, 5e-4]).unwrap();
    assert!(r.dv_order.unwrap() >= 0.9 && r.dp_order.unwrap() >= 0.9, "{r:?}");
}

#[test]
fn self_intersecting_deformation_is_an_error() {
    let disk = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
    let u: Vec<f64> = (0..64).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let r = first_variation_check(&disk, &Density::constant(1.0, 2), &u, &[5.0]);
    assert!(matches!(r, Err(Error::Geometry(_))));
}

#[test]
fn shooting_examples() {
    let one = Density::constant(1.0, 2);
    let s = shoot_constant_curvature(&one, 1.0, 1.0).unwrap();
    assert!(s.closure_residual < 1e-8);
    assert!((s.enclosed_volume - PI).abs() < 1e-8 && (s.perimeter - 2.0 * PI).abs() < 1e-8);
    assert!(s.h_deviation < 1e-6, "{}", s.h_deviation);
    s.curve.validate().unwrap();
    // Off-centre launch: still a unit circle.
    let s = shoot_constant_curvature(&one, 1.0, 3.0).unwrap();
    assert!((s.enclosed_volume - PI).abs() < 1e-8);

    let g = Density::gaussian_like(2);
    for r in [0.3, 1.0, 1.7] {
        let s = shoot_constant_curvature(&g, 1.0 / r + 2.0 * r, r).unwrap();
        assert!(s.closure_residual < 1e-8, "{r}: {}", s.closure_residual);
        assert!(s.h_deviation < 1e-6, "{r}: {}", s.h_deviation);
        assert!((s.enclosed_volume - PI * (r * r).exp_m1()).abs() < 1e-8 * s.enclosed_volume);
    }

    assert!(matches!(shoot_constant_curvature(&one, 0.0, 1.0), Err(Error::NonClosing { .. })));
    assert!(matches!(shoot_constant_curvature(&one, 1.0, -1.0), Err(Error::Domain(_))));
}

#[test]
fn profile_of_the_plane() {
    let one = Density::constant(1.0, 2);
    let b = ProfileBudget::default();
    for v in [PI, 0.5, 7.0] {
        let pt = estimate_profile(&one, v, &b).unwrap();
        assert!((pt.i_estimate - 2.0 * (PI * v).sqrt()).abs() < 1e-7, "{pt:?}");
        assert!((pt.h - (PI / v).sqrt()).abs() < 1e-7);
        assert!(pt.convexity_flag);
        assert!(pt.i_estimate <= pt.upper_bound.unwrap() + 1e-6);
    }
}

#[test]
fn gaussian_profile_sandwich_and_convexity() {
    let g = Density::gaussian_like(2);
    let b = ProfileBudget::default();
    let v = 2.0;
    let pt = estimate_profile(&g, v, &b).unwrap();
    assert_eq!(pt.source, CandidateSource::Centered);
    assert!(pt.convexity_flag);
    assert!(pt.h_deviation < 1e-6);
    let lo = estimate_profile(&g, 0.99 * v, &b).unwrap();
    let hi = estimate_profile(&g, 1.01 * v, &b).unwrap();
    let slope = (hi.i_estimate - lo.i_estimate) / (0.02 * v);
    assert!((slope - pt.h).abs() <= 0.02 * pt.h, "{slope} vs {}", pt.h);
}

#[test]
fn power_tail_profile_stays_below_the_bound() {
    let d = Density::power_tail(1.0, 2);
    let b = ProfileBudget::default();
    let pt = estimate_profile(&d, 1.0, &b).unwrap();
    assert!(pt.i_estimate <= profile_upper_bound(1.0, &d).unwrap() + 1e-6, "{pt:?}");
    assert!(pt.closure_residual < 1e-7 || pt.source == CandidateSource::DistantBall);
}

#[test]
fn profile_needs_a_radial_planar_density() {
    let b = ProfileBudget::default();
    assert!(estimate_profile(&Density::constant(1.0, 3), 1.0, &b).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn centred_gaussian_circles_close(r in 0.2f64..2.0) {
        let s = shoot_constant_curvature(&Density::gaussian_like(2), 1.0 / r + 2.0 * r, r).unwrap();
        prop_assert!(s.closure_residual < 1e-8);
        prop_assert!(s.h_deviation < 1e-6);
        prop_assert!(s.min_h0 > 0.0);
    }

    #[test]
    fn first_variation_mismatch_decays_linearly(a in 0.0f64..0.4, k in 1usize..4, c in 0.2f64..1.5) {
        let disk = Region::ball(vec![0.2, -0.1], 0.8).unwrap();
        let u: Vec<f64> = (0..64).map(|j| 1.0 + a * (k as f64 * std::f64::consts::TAU * j as f64 / 64.0).cos()).collect();
        let r = first_variation_check(&disk, &Density::exp_growth(c, 2), &u, &[4e-3, 2e-3, 1e-3, 5e-4]).unwrap();
        prop_assert!(r.dv_order.unwrap() >= 0.9 && r.dp_order.unwrap() >= 0.9, "{:?}", r);
    }
}
