use std::f64::consts::PI;

use isodense::conditions::*;
use isodense::measure::{mean_density, measure, Ball, Region};
use isodense::{Density, Error, Verdict};

fn budget() -> Budget {
    Budget::default()
}

#[test]
fn profile_bound_examples() {
    let b = profile_upper_bound(PI, &Density::constant(1.0, 2)).unwrap();
    assert!((b - 2.0 * PI).abs() < 1e-12);
    let b = profile_upper_bound(4.0 * PI / 3.0, &Density::constant(1.0, 3)).unwrap();
    assert!((b - 4.0 * PI).abs() < 1e-12);
    let b = profile_upper_bound(1.0, &Density::constant(0.25, 2)).unwrap();
    assert!((b - PI.sqrt()).abs() < 1e-12);
    assert!(matches!(profile_upper_bound(1.0, &Density::gaussian_like(2)), Err(Error::Inapplicable(_))));
}

#[test]
fn far_ball_perimeter_approaches_the_profile_bound() {
    // Quadrature perimeter of a far ball of volume 1 in a = 0.25.
    let d = Density::constant(0.25, 2);
    let r = (1.0 / (0.25 * PI)).sqrt();
    let m = measure(&Region::ball(vec![1e3, 0.0], r).unwrap(), &d, 64).unwrap();
    assert!((m.perimeter - PI.sqrt()).abs() < 1e-9);
}

#[test]
fn distant_ball_search() {
    let d = Density::constant(2.0, 2);
    let s = find_distant_low_density_ball(&d, 1.0, 5.0).unwrap().unwrap();
    assert!((s.mean_density - 2.0).abs() < 1e-9);
    if let Region::Ball(b) = &s.ball {
        assert!(((b.center[0].powi(2) + b.center[1].powi(2)).sqrt() - 5.0).abs() < 1e-12);
    }
    let d = Density::power_tail(2.0, 2);
    let s = find_distant_low_density_ball(&d, 1.0, 10.0).unwrap().unwrap();
    assert!(s.mean_density <= 1.0 + 1e-9);
    assert!((s.volume - 1.0).abs() < 1e-9);
    assert!(matches!(find_distant_low_density_ball(&Density::gaussian_like(2), 1.0, 1.0), Err(Error::Inapplicable(_))));
}

#[test]
fn slow_growth_ball_examples() {
    let r = check_slow_growth_ball(&Density::constant(1.0, 2), 1.0, 10.0, &budget()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check_slow_growth_ball(&Density::power_tail(1.0, 2), 1.0, 10.0, &budget()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check_slow_growth_ball(&Density::exp_tail(1.0, 3), 1.0, 50.0, &budget()).unwrap();
    assert_ne!(r.verdict, Verdict::Pass);
}

#[test]
fn radial_slow_growth_examples() {
    let r = check_radial_slow_growth(&Density::constant(1.0, 3), 0.7, 10.0, 1e5).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(matches!(r.witness, Some(Witness::Radius { r, .. }) if r == 10.0));
    let r = check_radial_slow_growth(&Density::power_tail(2.0, 2), 1.0, 10.0, 1e5).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check_radial_slow_growth(&Density::exp_tail(1.0, 3), 1.0, 100.0, 1e5).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let bumpy = Density::from_json(&serde_json::json!({"model": "piecewise", "params": {"kind": "bumpy", "bumps": [
        {"center": [3.0, 0.0], "radius": 0.5, "amplitude": 1.0}]}}));
    if let Ok(b) = bumpy {
        assert!(!check_radial_slow_growth(&b, 1.0, 10.0, 1e3).unwrap().applicable);
    }
}

#[test]
fn exponential_gap_examples() {
    let r = check_exponential_gap(&Density::power_tail(1.0, 2), 1.0, 5.0, 1e5).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(matches!(r.witness, Some(Witness::Radius { r, .. }) if r == 5.0));
    let r = check_exponential_gap(&Density::exp_tail(2.0, 2), 1.0, 5.0, 1e5).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let r = check_exponential_gap(&Density::constant(1.0, 2), 1.0, 5.0, 1e5).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn derivative_condition_examples() {
    let grid = derivative_grid((10.0, 1e4), 301);
    let r = check_derivative_condition(&Density::power_tail(2.0, 2), &grid).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    // Closed form: ratio = α/R.
    assert!(matches!(r.witness, Some(Witness::Ratio { ratio, .. }) if (ratio - 2e-4).abs() < 1e-9));
    let r = check_derivative_condition(&Density::exp_tail(1.0, 2), &grid).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(matches!(r.witness, Some(Witness::Ratio { ratio, .. }) if (ratio - 1.0).abs() < 1e-6));
    let r = check_derivative_condition(&Density::constant(1.0, 2), &grid).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn mean_inequality_examples() {
    let b = Ball::new(vec![3.0, -1.0], 0.8).unwrap();
    let r = check_mean_inequality(&Density::constant(1.5, 2), &b).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let b = Ball::new(vec![20.0, 0.0, 0.0], 1.0).unwrap();
    let r = check_mean_inequality(&Density::exp_tail(1.0, 3), &b).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    assert!(!check_mean_inequality(&Density::gaussian_like(2), &Ball::new(vec![0.0, 0.0], 1.0).unwrap()).unwrap().applicable);
}

#[test]
fn superharmonic_examples() {
    let r = check_superharmonic(&Density::exp_tail(1.0, 3), 2.0, 100.0).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check_superharmonic(&Density::power_tail(0.5, 3), 2.0, 100.0).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(matches!(check_superharmonic(&Density::exp_tail(1.0, 3), 0.0, 2.0), Err(Error::Precondition(_))));
}

#[test]
fn linear_density_is_not_superharmonic() {
    // 1 + r has radial Laplacian 1/r in the plane; no finite limit, so check the sign directly.
    let p = Density::linear(1.0, 1.0, 2);
    let (_, d1, d2) = p.profile().unwrap().eval3(3.0);
    assert!((d2 + d1 / 3.0 - 1.0 / 3.0).abs() < 1e-15);
    assert!(!check_superharmonic(&p, 1.0, 2.0).unwrap().applicable);
}

fn verdicts(d: &Density) -> [Verdict; 4] {
    let rep = existence_report(d, 1.0, &budget()).unwrap();
    let v = &rep.verdicts;
    [v.slow_growth_radial.verdict, v.exponential_gap.verdict, v.derivative_condition.verdict, v.superharmonic.verdict]
}

#[test]
fn classification_table() {
    use Verdict::*;
    let rows = [
        (Density::constant(1.0, 3), [Pass, Fail, Inconclusive, Pass]),
        (Density::power_tail(1.0, 3), [Pass, Pass, Pass, Pass]),
        (Density::power_tail(2.0, 3), [Pass, Pass, Pass, Pass]),
        (Density::power_tail(0.5, 3), [Pass, Pass, Pass, Fail]),
        (Density::exp_tail(1.0, 3), [Fail, Fail, Fail, Pass]),
        (Density::double_exp_tail(3), [Fail, Fail, Fail, Pass]),
    ];
    for (d, want) in rows {
        assert_eq!(verdicts(&d), want, "{}", d.name());
    }
}

#[test]
fn existence_reports() {
    let rep = existence_report(&Density::power_tail(1.0, 2), 1.0, &budget()).unwrap();
    assert!(rep.certified);
    assert!(rep.certified_by().contains(&Condition::ExponentialGap));
    assert_eq!(rep.exit_code(), 0);

    let rep = existence_report(&Density::exp_tail(1.0, 3), 1.0, &budget()).unwrap();
    assert!(rep.certified);
    assert_eq!(rep.verdicts.superharmonic.verdict, Verdict::Pass);
    assert_eq!(rep.verdicts.slow_growth_ball.verdict, Verdict::Fail);
    assert_eq!(rep.verdicts.slow_growth_radial.verdict, Verdict::Fail);

    let rep = existence_report(&Density::gaussian_like(2), 1.0, &budget()).unwrap();
    assert!(!rep.certified);
    assert!(isodense::conditions::Condition::ALL.iter().all(|c| !rep.verdicts.get(*c).applicable));
    assert!(rep.notes.iter().any(|n| n.contains("diverging")));
    assert_eq!(rep.exit_code(), 4);
}

#[test]
fn passing_witnesses_reverify() {
    let b = budget();
    for d in [Density::power_tail(1.0, 2), Density::exp_tail(1.0, 3), Density::constant(1.0, 2), Density::two_phase(0.5, 2)] {
        let rep = existence_report(&d, 1.0, &b).unwrap();
        for c in rep.certified_by() {
            let w = rep.verdicts.get(c).witness.as_ref().unwrap();
            assert!(reverify(&d, c, w, &b).unwrap(), "{} {}", d.name(), c.name());
        }
    }
}

#[test]
fn passing_ball_conditions_imply_low_mean_density() {
    let b = budget();
    for d in [Density::power_tail(1.0, 2), Density::power_tail(2.0, 3), Density::exp_tail(1.0, 3), Density::constant(2.0, 2)] {
        let a = d.limit().unwrap();
        for c in [check_slow_growth_ball(&d, 1.0, 10.0, &b).unwrap(), search_mean_inequality(&d, 1.0, &b).unwrap()] {
            if let (Verdict::Pass, Some(Witness::Ball { ball, .. })) = (c.verdict, &c.witness) {
                let s = mean_density(&Region::Ball(ball.clone()), &d, 64).unwrap();
                assert!(s.mean_density <= a + 1e-9 + s.quadrature_error, "{} {}", d.name(), s.mean_density);
            }
        }
    }
}

#[test]
fn declared_limit_mismatch_is_an_error() {
    let d = Density::from_json(&serde_json::json!({"model": "radial_table", "r": [0, 1, 1000, 1e6], "f": [1, 1, 1, 2]})).unwrap();
    assert!(matches!(resolve_limit(&d), Err(Error::Config(_))));
}
