use std::f64::consts::PI;

use isodense::constructions::*;
use isodense::density::{classify, BrickGeometry, SamplingSpec, Verdict};
use isodense::measure::{measure, Region};
use isodense::{Density, Error};
use proptest::prelude::*;

const RES: usize = 64;

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn ray_spec(max_r: f64) -> SamplingSpec {
    let k = 3000;
    let mut radii = vec![0.0];
    radii.extend((0..k).map(|i| 1e-2 * (max_r / 1e-2).powf(i as f64 / (k - 1) as f64)));
    SamplingSpec { rays: 64, radii, seed: 3, r_tail: max_r / 10.0, axes: true }
}

#[test]
fn brick_geometry_at_a_tenth() {
    let g = BrickGeometry::new(0.1).unwrap();
    assert!((g.r1 - 100.0).abs() < 1e-10);
    assert!((g.r2 - 110.0).abs() < 1e-10);
    assert!((g.phi0.sin() - 0.1f64.powf(5.0 / 3.0) / 110.0).abs() < 1e-12 * g.phi0.sin());
    let (region, d) = build_brick(&BrickSpec { eps: 0.1, n: 1.0, m: 10.0, w: 100.0 }).unwrap();
    assert!(matches!(region, Region::Axisymmetric(_)));
    assert_eq!(d.dim(), 3);
}

#[test]
fn degenerate_bricks_are_rejected() {
    assert!(build_brick(&BrickSpec { eps: 1.0, n: 1.0, m: 10.0, w: 100.0 }).is_err());
    assert!(build_brick(&BrickSpec { eps: 0.1, n: 0.0, m: 10.0, w: 100.0 }).is_err());
    assert!(build_brick(&BrickSpec { eps: 0.1, n: 10.0, m: 1.0, w: 100.0 }).is_err());
}

#[test]
fn constant_weight_brick_perimeter_is_its_euclidean_area() {
    for eps in [0.1, 0.05, 0.02] {
        let (region, d) = build_brick(&BrickSpec { eps, n: 1.0, m: 1.0, w: 1.0 }).unwrap();
        let r = measure(&region, &d, RES).unwrap();
        let areas: f64 = brick_boundary_areas(eps).unwrap().iter().sum();
        assert!((r.perimeter / areas - 1.0).abs() < 1e-3, "{eps}: {} vs {areas}", r.perimeter);
    }
}

#[test]
fn brick_volume_tracks_its_weighted_cone_volume() {
    // The region is a thin cone sector of solid angle ~ π φ0²; its volume is
    // close to π M ε^{7/3}.
    let (region, d) = build_brick(&BrickSpec { eps: 0.05, n: 1.0, m: 10.0, w: 100.0 }).unwrap();
    let r = measure(&region, &d, RES).unwrap();
    let g = BrickGeometry::new(0.05).unwrap();
    let sector = 2.0 * PI * (1.0 - g.phi0.cos()) * (g.r2.powi(3) - g.r1.powi(3)) / 3.0;
    assert!((r.volume / (10.0 * sector) - 1.0).abs() < 0.05, "{} vs {}", r.volume, 10.0 * sector);
    assert!((r.volume / (PI * 10.0 * 0.05f64.powf(7.0 / 3.0)) - 1.0).abs() < 0.1);
}

#[test]
fn brick_boundary_pieces_carry_the_lower_weight() {
    let (n, m, w) = (1.0, 10.0, 100.0);
    let (_, d) = build_brick(&BrickSpec { eps: 0.1, n, m, w }).unwrap();
    let g = BrickGeometry::new(0.1).unwrap();
    for k in 0..=20 {
        let t = k as f64 / 20.0;
        let phi = t * g.phi0;
        assert_eq!(d.value_axisym(g.gamma(phi), phi), n, "cap at {phi}");
        assert_eq!(d.value_axisym(g.r1 + t * (g.r2 - g.r1), g.phi0), n, "cone wall");
        if k < 20 {
            assert_eq!(d.value_axisym(g.r2, phi), m, "outer patch at {phi}");
        }
    }
    assert_eq!(d.value_axisym(0.5 * (g.r1 + g.r2), 0.5 * g.phi0), m);
    assert_eq!(d.value_axisym(2.0 * g.r2, 0.0), w);
}

#[test]
fn brick_density_is_nondecreasing_along_rays() {
    let (_, d) = build_brick(&BrickSpec { eps: 0.1, n: 1.0, m: 10.0, w: 100.0 }).unwrap();
    let rep = classify(&d, &ray_spec(1e3)).unwrap();
    assert_eq!(rep.nondecreasing_verdict, Verdict::Pass, "{:?}", rep.decrease_witness);
}

#[test]
fn scaling_report_rows_and_degenerate_lists() {
    let r = brick_scaling_report(&[0.1, 0.05, 0.02], |_| 1.0, |_| 1.0, RES).unwrap();
    assert_eq!(r.rows.len(), 3);
    for row in &r.rows {
        assert!((row.predicted_volume - row.m * row.eps.powf(7.0 / 3.0)).abs() < 1e-15);
        assert!((row.volume_ratio * row.predicted_volume - row.volume).abs() < 1e-12 * row.volume);
    }
    // Ratios drift towards π, not 1.
    assert!(r.rows.iter().all(|x| x.volume_ratio > 2.5 && x.volume_ratio < PI));

    let single = brick_scaling_report(&[0.05], |_| 1.0, |_| 1.0, RES).unwrap();
    assert_eq!(single.rows.len(), 1);
    assert_eq!(single.trending, None);

    assert!(brick_scaling_report(&[0.05, 0.1], |_| 1.0, |_| 1.0, RES).is_err());
    assert!(brick_scaling_report(&[], |_| 1.0, |_| 1.0, RES).is_err());
}

#[test]
fn nonexistence_sequence_has_unit_volumes_and_shrinking_perimeters() {
    let s = build_nonexistence_sequence(&[0.1, 0.01, 0.001], RES).unwrap();
    assert_eq!(s.regions.len(), 3);
    for v in &s.volumes {
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }
    assert!(s.perimeters.windows(2).all(|w| w[1] < w[0]), "{:?}", s.perimeters);
    for (j, b) in s.bricks.iter().enumerate() {
        assert!((b.n - b.eps.powf(-1.0 / 3.0)).abs() < 1e-9 * b.n);
        if j + 1 < s.bricks.len() {
            assert_eq!(b.w, s.bricks[j + 1].n);
        }
    }
    // Each brick's measured volume, re-measured independently.
    for r in &s.regions {
        assert!((measure(r, &s.density, RES).unwrap().volume - 1.0).abs() < 1e-6);
    }
}

#[test]
fn insufficient_spacing_is_rejected() {
    assert!(matches!(build_nonexistence_sequence(&[0.2, 0.19], RES), Err(Error::Spacing(_))));
    assert!(build_nonexistence_sequence(&[0.01, 0.1], RES).is_err());
}

#[test]
fn rapidly_decreasing_sequence_gives_a_nondecreasing_density() {
    let s = build_nonexistence_sequence(&[0.2, 1e-5], RES).unwrap();
    assert!(s.monotone, "{:?}", s.bricks);
    let rep = classify(&s.density, &ray_spec(1e11)).unwrap();
    assert_eq!(rep.nondecreasing_verdict, Verdict::Pass, "{:?}", rep.decrease_witness);

    let slow = build_nonexistence_sequence(&[0.1, 0.01], RES).unwrap();
    assert!(!slow.monotone);
}

#[test]
fn decaying_ball_family_scalings() {
    let ds = [100.0, 400.0, 1600.0];
    let fam = build_decaying_ball_family(&Density::inverse_tail(2), 1.0, &ds, RES).unwrap();
    for (b, d) in fam.iter().zip(ds) {
        assert!((b.volume - 1.0).abs() < 1e-8);
        let isodense::measure::Region::Ball(ball) = &b.ball else { panic!() };
        assert!((ball.radius / (d / PI).sqrt() - 1.0).abs() < 0.05, "{}", ball.radius);
    }
    let p: Vec<f64> = fam.iter().map(|b| b.perimeter).collect();
    assert!((log_slope(&ds, &p) + 0.5).abs() < 0.1);

    let flat = build_decaying_ball_family(&Density::constant(1.0, 2), 1.0, &ds, RES).unwrap();
    let p: Vec<f64> = flat.iter().map(|b| b.perimeter).collect();
    assert!(log_slope(&ds, &p).abs() < 0.02);
}

#[test]
fn decaying_ball_reaching_the_origin_is_a_numeric_error() {
    let r = build_decaying_ball_family(&Density::inverse_tail(2), 1.0, &[1.0], RES);
    assert!(matches!(r, Err(Error::Numeric(_))), "{r:?}");
}

#[test]
fn bumpy_balls_hit_their_targets() {
    let c = build_bumpy_diverging(6, 2, RES).unwrap();
    assert_eq!(c.balls.len(), 6);
    let mut vol = 0.0;
    let mut per = 0.0;
    for b in c.balls.iter().filter(|b| b.index >= 3) {
        let i = b.index as f64;
        assert!((b.perimeter - 1.0 / (i * i)).abs() < 1e-6);
        assert!((b.volume - 1.0 / i).abs() < 1e-6);
        assert!(b.weight >= 0.0);
        // Independent re-measure of the placed ball.
        let m = measure(&Region::Ball(b.ball.clone()), &c.density, RES).unwrap();
        assert!((m.volume - 1.0 / i).abs() < 1e-6 && (m.perimeter - 1.0 / (i * i)).abs() < 1e-6);
        vol += m.volume;
        per += m.perimeter;
    }
    let target: f64 = (3..=6).map(|i| 1.0 / i as f64).sum();
    assert!((vol - target).abs() < 1e-5);
    assert!(per < PI * PI / 6.0);
    assert!(matches!(build_bumpy_diverging(2, 2, RES), Err(Error::Precondition(_))));
}

#[test]
fn bumpy_density_is_nondecreasing_off_the_bumps() {
    let c = build_bumpy_diverging(4, 2, RES).unwrap();
    // Bumps sit on the positive x axis; sample the other half plane.
    let mut spec = ray_spec(1e4);
    spec.axes = false;
    for k in 0..32 {
        let t = PI / 2.0 + PI * k as f64 / 31.0;
        let dir = [t.cos(), t.sin()];
        let mut prev = 0.0;
        for &r in &spec.radii {
            let v = c.density.value(&[r * dir[0], r * dir[1]]);
            assert!(v >= prev);
            prev = v;
        }
    }
}

#[test]
fn steepest_ingredients_are_unit_balls_with_thin_perimeters() {
    let c = build_steepest_ingredients(4, 2, RES).unwrap();
    for b in &c.balls {
        let i = b.index as f64;
        assert!((b.volume - 1.0).abs() < 1e-6, "{b:?}");
        assert!((b.perimeter - 1.0 / i).abs() < 1e-6, "{b:?}");
    }
    let json = c.density.to_json();
    assert_eq!(json["model"], "piecewise");
}

#[test]
fn constructed_densities_round_trip_through_json() {
    let c = build_bumpy_diverging(3, 2, RES).unwrap();
    let back = Density::from_json(&c.density.to_json()).unwrap();
    assert_eq!(back.value(&[4.0, 0.01]), c.density.value(&[4.0, 0.01]));
    let s = build_nonexistence_sequence(&[0.2, 1e-5], RES).unwrap();
    let back = Density::from_json(&s.density.to_json()).unwrap();
    assert_eq!(back.value_axisym(30.0, 0.0), s.density.value_axisym(30.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn brick_relations_hold(eps in 0.01f64..0.2) {
        let g = BrickGeometry::new(eps).unwrap();
        prop_assert!((g.r1 * eps * eps - 1.0).abs() < 1e-12);
        prop_assert!(((g.r2 - g.r1) * eps - 1.0).abs() < 1e-9);
        prop_assert!((g.r2 * g.phi0.sin() / eps.powf(5.0 / 3.0) - 1.0).abs() < 1e-12);
        prop_assert!(g.phi0 > 0.0 && g.phi0 < PI / 2.0);
    }
}
