use std::f64::consts::{PI, TAU};

use isodense::measure::{
    exterior_volume_bound_check, mean_density, measure, slice_area, slice_integral, truncate_compare, IndicatorGrid,
    PolarGraph, Region,
};
use isodense::{Density, Error};

fn ball(c: &[f64], r: f64) -> Region {
    Region::ball(c.to_vec(), r).unwrap()
}

#[test]
fn unit_disk_constant_density() {
    let m = measure(&ball(&[0.0, 0.0], 1.0), &Density::constant(1.0, 2), 64).unwrap();
    assert!((m.volume - PI).abs() < 1e-8);
    assert!((m.perimeter - TAU).abs() < 1e-8);
}

#[test]
fn unit_disk_linear_density_closed_form() {
    // ∫₀¹ (1 + r) 2πr dr = 2π(1/2 + 1/3).
    let d = Density::linear(1.0, 1.0, 2);
    let m = measure(&ball(&[0.0, 0.0], 1.0), &d, 64).unwrap();
    assert!((m.volume - 5.0 * PI / 3.0).abs() < 1e-10);
    assert!((m.perimeter - 4.0 * PI).abs() < 1e-10);
}

#[test]
fn linear_density_off_centre_matches_polar_oracle() {
    // Independent oracle: brute polar integration about the ball centre.
    let d = Density::linear(1.0, 1.0, 2);
    let c = [0.7, -0.4];
    let m = measure(&ball(&c, 0.9), &d, 128).unwrap();
    let (nr, nt) = (2000, 2000);
    let mut v = 0.0;
    for i in 0..nr {
        let s = (i as f64 + 0.5) / nr as f64 * 0.9;
        for j in 0..nt {
            let t = (j as f64) / nt as f64 * TAU;
            let x = [c[0] + s * t.cos(), c[1] + s * t.sin()];
            v += (1.0 + x[0].hypot(x[1])) * s;
        }
    }
    v *= 0.9 / nr as f64 * TAU / nt as f64;
    assert!((m.volume - v).abs() < 1e-5, "{} vs {v}", m.volume);
}

#[test]
fn distant_ball_in_inverse_density() {
    let d = Density::inverse_tail(2);
    let (r, dist) = (1.0, 100.0);
    let m = measure(&ball(&[dist, 0.0], r), &d, 64).unwrap();
    assert!((m.volume / (PI * r * r / dist) - 1.0).abs() < 2.0 * r / dist);
    assert!((m.perimeter / (TAU * r / dist) - 1.0).abs() < 2.0 * r / dist);
}

#[test]
fn doubling_resolution_within_four_errors() {
    let d = Density::power_tail(2.0, 2);
    let e = ball(&[1.5, 0.5], 1.0);
    let a = measure(&e, &d, 32).unwrap();
    let b = measure(&e, &d, 64).unwrap();
    assert!((a.volume - b.volume).abs() <= 4.0 * a.quadrature_error);
    assert!((a.perimeter - b.perimeter).abs() <= 4.0 * a.quadrature_error);
}

#[test]
fn slices_of_the_unit_disk() {
    let d = Density::constant(1.0, 2);
    let e = ball(&[0.0, 0.0], 1.0);
    assert_eq!(slice_area(&e, &d, 2.0).unwrap(), 0.0);
    assert!((slice_area(&e, &d, 0.5).unwrap() - PI).abs() < 1e-12);
}

#[test]
fn half_plane_grid_slice_is_half_circle() {
    let g = IndicatorGrid::from_predicate(vec![0.0, -2.0], 1.0 / 32.0, vec![64, 128], |_| true);
    let s = slice_area(&Region::IndicatorGrid(g), &Density::constant(1.0, 2), 1.0).unwrap();
    assert!((s - PI).abs() < 1e-9, "{s}");
}

#[test]
fn slices_integrate_to_volume() {
    let d = Density::linear(1.0, 0.5, 2);
    let e = ball(&[0.8, 0.3], 1.1);
    let m = measure(&e, &d, 64).unwrap();
    let (s, err) = slice_integral(&e, &d, 64).unwrap();
    assert!((s - m.volume).abs() <= 2.0 * (err + m.volume_error).max(1e-9), "{s} {}", m.volume);
}

#[test]
fn mean_density_in_constant_density() {
    let d = Density::constant(2.5, 3);
    let s = mean_density(&ball(&[1.0, 2.0, -1.0], 0.7), &d, 32).unwrap();
    assert!((s.mean_density - 2.5).abs() < 1e-8);
}

#[test]
fn mean_density_linear_oracle_and_sandwich() {
    let d = Density::linear(1.0, 1.0, 2);
    let s = mean_density(&ball(&[0.0, 0.0], 1.0), &d, 64).unwrap();
    assert!((s.mean_density - 2.4).abs() < 1e-9, "{}", s.mean_density);
    assert!((s.rho_min - 1.0).abs() < 1e-12 && (s.rho_sup - 2.0).abs() < 1e-12);
    let (lo, hi) = s.bounds();
    assert!((lo - 0.5).abs() < 1e-12 && (hi - 4.0).abs() < 1e-12);
    assert!(lo <= s.mean_density && s.mean_density <= hi);
}

#[test]
fn far_ball_in_power_tail_has_mean_density_below_limit() {
    let d = Density::power_tail(2.0, 2);
    let s = mean_density(&ball(&[50.0, 0.0], 0.5), &d, 64).unwrap();
    assert!(s.mean_density <= 1.0);
}

#[test]
fn truncating_a_centred_disk() {
    let d = Density::constant(1.0, 2);
    let t = truncate_compare(&ball(&[0.0, 0.0], 2.0), &d, 1.0, 64).unwrap();
    assert!((t.perimeter - 4.0 * PI).abs() < 1e-6 && (t.truncated_perimeter - TAU).abs() < 1e-6);
    assert!(t.strict_drop);
}

#[test]
fn truncating_a_limacon_like_graph() {
    let g = PolarGraph::from_fn([0.0, 0.0], 512, |t| 2.0 + t.cos()).unwrap();
    let t = truncate_compare(&Region::PolarGraph(g), &Density::linear(1.0, 1.0, 2), 2.0, 64).unwrap();
    assert!(t.strict_drop, "{t:?}");
}

#[test]
fn truncating_an_off_centre_ball_in_exponential_density() {
    let t = truncate_compare(&ball(&[1.5, 0.5], 1.0), &Density::exp_growth(1.0, 2), 1.6, 64).unwrap();
    assert!(t.strict_drop, "{t:?}");
    let t3 = truncate_compare(&ball(&[1.5, 0.5, 0.0], 1.0), &Density::exp_growth(1.0, 3), 1.6, 64).unwrap();
    assert!(t3.strict_drop, "{t3:?}");
}

#[test]
fn truncation_that_changes_nothing_is_an_error() {
    let r = truncate_compare(&ball(&[0.0, 0.0], 1.0), &Density::constant(1.0, 2), 2.0, 64);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

fn shell_grid(h: f64, r_in: f64, r_out: f64) -> IndicatorGrid {
    let ext = r_out + 2.0 * h;
    let (o, s) = IndicatorGrid::covering(&[-ext; 3], &[ext; 3], h);
    IndicatorGrid::from_predicate(o, h, s, |x| {
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        n > r_in && n <= r_out
    })
}

#[test]
fn exterior_bound_for_thin_shell_in_3d() {
    let r_out = (1.0 + 0.5 * 3.0 / (4.0 * PI)).cbrt();
    let g = shell_grid(1.0 / 48.0, 1.0, r_out);
    let rep = exterior_volume_bound_check(&g, 1.0).unwrap();
    assert!(rep.holds, "{rep:?}");
    assert!((rep.lhs - 0.5).abs() < 0.03);
}

#[test]
fn exterior_bound_for_tangent_ball_in_3d() {
    let b = (0.1 * 3.0 / (4.0 * PI)).cbrt();
    let e = ball(&[1.0 + b, 0.0, 0.0], b);
    let g = e.rasterize(1.0 / 32.0);
    let rep = exterior_volume_bound_check(&g, 1.0).unwrap();
    assert!(rep.holds, "{rep:?}");
}

#[test]
fn exterior_bound_for_empty_set() {
    let g = IndicatorGrid::new(vec![2.0, 2.0], 0.1, vec![2, 2], vec![false; 4]).unwrap();
    let rep = exterior_volume_bound_check(&g, 1.0).unwrap();
    assert!(rep.holds && rep.lhs == 0.0 && rep.rhs == 0.0);
}

#[test]
fn exterior_bound_rejects_sets_inside_the_ball() {
    let g = IndicatorGrid::from_predicate(vec![-0.5, -0.5], 0.1, vec![10, 10], |_| true);
    assert!(matches!(exterior_volume_bound_check(&g, 1.0), Err(Error::Precondition(_))));
}

#[test]
fn representations_agree_on_a_disk() {
    let d = Density::power_tail(1.0, 2);
    let r = 1.0;
    let b = measure(&ball(&[0.0, 0.0], r), &d, 64).unwrap();
    let g = PolarGraph::from_fn([0.0, 0.0], 64, |_| r).unwrap();
    let p = measure(&Region::PolarGraph(g), &d, 64).unwrap();
    let h = r / 128.0;
    let grid = ball(&[0.0, 0.0], r).rasterize(h);
    let q = measure(&Region::IndicatorGrid(grid), &d, 64).unwrap();
    assert!((b.volume - p.volume).abs() < 1e-10);
    assert!((b.volume - q.volume).abs() < 3.0 * h * b.perimeter);
}

#[test]
fn brick_like_axisymmetric_slab() {
    // A spherical shell sector between radii 1 and 2, φ < 0.5.
    let a = isodense::measure::Axisymmetric::new(vec![[1.0, 0.0], [2.0, 0.0], [2.0, 0.5], [1.0, 0.5]]).unwrap();
    let m = measure(&Region::Axisymmetric(a), &Density::constant(1.0, 3), 64).unwrap();
    let cap = TAU * (1.0 - 0.5f64.cos());
    assert!((m.volume - cap * 7.0 / 3.0).abs() < 1e-12);
    // Two spherical caps plus the cone wall of slant length 1.
    let wall = PI * 0.5f64.sin() * (4.0 - 1.0);
    assert!((m.perimeter - (cap * 5.0 + wall)).abs() < 1e-12, "{}", m.perimeter);
}

#[test]
fn mask_file_round_trip() {
    let g = ball(&[0.0, 0.0], 0.5).rasterize(0.05);
    let bytes = g.to_mask_bytes();
    assert_eq!(IndicatorGrid::from_mask_bytes(&bytes).unwrap(), g);
}
