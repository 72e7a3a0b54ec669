use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use super::ode::{next_step, step, Tolerance};
use super::{generalized_curvature, Curve, CurveSample};
use crate::conditions::{find_distant_low_density_ball, profile_upper_bound};
use crate::density::{Density, Profile};
use crate::error::{Error, Result};
use crate::measure::Region;

/// Closure is accepted below this residual.
pub const CLOSURE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    pub tol: f64,
    /// Overrides the default length budget `64·r_start + 8π/|H|`.
    pub max_length: Option<f64>,
    /// Accepted steps recorded per half curve (roughly).
    pub samples: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_length: None, samples: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootingResult {
    pub h: f64,
    pub r_start: f64,
    pub curve: Curve,
    pub closure_residual: f64,
    pub enclosed_volume: f64,
    pub perimeter: f64,
    /// Minimum Euclidean curvature along the curve.
    pub min_h0: f64,
    /// Max |H_f − H| re-evaluated on the returned curve.
    pub h_deviation: f64,
}

/// State `[x, y, φ, P, V]` of the upper half curve.
type State = [f64; 5];

fn rhs(p: &Profile, h: f64, y: &State, vol: bool) -> State {
    let r = y[0].hypot(y[1]);
    let (sn, cs) = y[2].sin_cos();
    let nx = y[0] * sn - y[1] * cs;
    let (dphi, dv) = if r > 0.0 {
        (h - p.log_derivative(r) * nx / r, if vol { p.moment1(r) / (r * r) * nx } else { 0.0 })
    } else {
        (h, 0.0)
    };
    [cs, sn, dphi, p.value(r), dv]
}

struct Half {
    end: State,
    length: f64,
    /// Unwrapped `φ_end − 3π/2`.
    g: f64,
    residual: f64,
}

struct Shooter<'a> {
    p: &'a Profile,
    h: f64,
    r0: f64,
    tol: Tolerance,
    budget: f64,
    vol: bool,
}

impl<'a> Shooter<'a> {
    fn new(p: &'a Profile, h: f64, r0: f64, opts: &ShootOptions, vol: bool) -> Self {
        let ell = if h != 0.0 { 1.0 / h.abs() } else { r0 };
        let budget = opts.max_length.unwrap_or(64.0 * r0 + if h != 0.0 { 8.0 * PI / h.abs() } else { 0.0 });
        let tol = Tolerance { atol: opts.tol, rtol: opts.tol, max_step: ell * PI / 64.0 };
        Self { p, h, r0, tol, budget, vol }
    }

    /// Integrates to the first return to the x-axis, pushing `(s, state)`
    /// after each accepted step when `rec` is given.
    fn run(&self, mut rec: Option<&mut Vec<(f64, State)>>) -> Result<Half> {
        let f = |_s: f64, y: &State| rhs(self.p, self.h, y, self.vol);
        let mut y: State = [self.r0, 0.0, FRAC_PI_2, 0.0, 0.0];
        let mut s = 0.0;
        let mut hs = self.tol.max_step * 1e-2;
        let floor = 1e-14 * self.tol.max_step.max(self.r0);
        if let Some(r) = rec.as_deref_mut() {
            r.push((0.0, y));
        }
        loop {
            if s > self.budget {
                let partial = match rec {
                    Some(r) => r.iter().map(|(_, st)| [st[0], st[1]]).collect(),
                    None => vec![[y[0], y[1]]],
                };
                return Err(Error::NonClosing { budget: self.budget, travelled: s, partial });
            }
            let hh = hs.min(self.tol.max_step);
            let (yn, mut err) = step(&f, s, &y, hh, &self.tol);
            if yn.iter().any(|v| !v.is_finite()) {
                err = f64::INFINITY;
            }
            if err <= 1.0 {
                if y[1] > 0.0 && yn[1] <= 0.0 {
                    let (tau, ye) = self.locate(&f, s, &y, hh, yn[1]);
                    if let Some(r) = rec.as_deref_mut() {
                        // Drop a sample crowding the endpoint; it would spoil finite differences.
                        if tau < 0.25 * hh && r.len() > 2 {
                            r.pop();
                        }
                        r.push((s + tau, ye));
                    }
                    let g = ye[2] - 1.5 * PI;
                    return Ok(Half { end: ye, length: s + tau, g, residual: g.abs() + ye[1].abs() });
                }
                s += hh;
                y = yn;
                if let Some(r) = rec.as_deref_mut() {
                    r.push((s, y));
                }
            } else if hh < floor {
                return Err(Error::Numeric(format!("step size underflow at s = {s}")));
            }
            hs = if err.is_finite() { next_step(hh, err) } else { 0.2 * hh };
        }
    }

    /// Regula falsi (Illinois) on the step length for `y = 0`.
    fn locate(&self, f: &impl Fn(f64, &State) -> State, s: f64, y: &State, hh: f64, y_b: f64) -> (f64, State) {
        let (mut a, mut fa) = (0.0, y[1]);
        let (mut b, mut fb) = (hh, y_b);
        let mut best = (hh, step(f, s, y, hh, &self.tol).0);
        let mut side = 0;
        for _ in 0..80 {
            let c = if fa != fb { (a * fb - b * fa) / (fb - fa) } else { 0.5 * (a + b) };
            let c = if c > a && c < b { c } else { 0.5 * (a + b) };
            let yc = step(f, s, y, c, &self.tol).0;
            best = (c, yc);
            let fc = yc[1];
            if fc.abs() <= 1e-15 * self.r0.max(1.0) || b - a <= 1e-16 * hh.max(s) {
                break;
            }
            if fc > 0.0 {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        best
    }
}

fn radial_profile(d: &Density) -> Result<&Profile> {
    if d.dim() != 2 {
        return Err(Error::Config("shooting is implemented in the plane".into()));
    }
    d.profile().ok_or_else(|| Error::Precondition(format!("{} is not radial", d.name())))
}

fn check_start(h: f64, r_start: f64) -> Result<()> {
    if !(r_start.is_finite() && r_start > 0.0) {
        return Err(Error::Domain(format!("r_start must be positive, got {r_start}")));
    }
    if !h.is_finite() {
        return Err(Error::Domain(format!("H must be finite, got {h}")));
    }
    Ok(())
}

/// Signed half-curve angle error, used as the closure function in searches.
fn closure_error(p: &Profile, h: f64, r0: f64, opts: &ShootOptions) -> Option<f64> {
    Shooter::new(p, h, r0, opts, false).run(None).ok().map(|x| x.g)
}

fn closed_measures(p: &Profile, h: f64, r0: f64, opts: &ShootOptions) -> Result<(Half, f64, f64)> {
    let half = Shooter::new(p, h, r0, opts, true).run(None)?;
    let (v, per) = (2.0 * half.end[4], 2.0 * half.end[3]);
    Ok((half, v, per))
}

pub fn shoot_constant_curvature(d: &Density, h: f64, r_start: f64) -> Result<ShootingResult> {
    shoot_with(d, h, r_start, &ShootOptions::default())
}

/// Launches from `(r_start, 0)` with tangent `(0, 1)` and integrates the
/// constant-`H_f` curve to its next crossing of the x-axis. The closed curve is
/// the half curve and its mirror image; closure requires a perpendicular crossing.
pub fn shoot_with(d: &Density, h: f64, r_start: f64, opts: &ShootOptions) -> Result<ShootingResult> {
    let p = radial_profile(d)?;
    check_start(h, r_start)?;
    let sh = Shooter::new(p, h, r_start, opts, true);
    let first = sh.run(None)?;
    let mut fine = Shooter::new(p, h, r_start, opts, true);
    fine.tol.max_step = fine.tol.max_step.min(first.length / opts.samples.max(16) as f64);
    fine.budget = fine.budget.max(2.0 * first.length);
    let mut rec = Vec::new();
    let half = fine.run(Some(&mut rec))?;

    let mut samples = Vec::with_capacity(2 * rec.len());
    let mut min_h0 = f64::INFINITY;
    for (s, st) in &rec {
        let (sn, cs) = st[2].sin_cos();
        samples.push(CurveSample { s: *s, point: [st[0], st[1]], tangent: [cs, sn], normal: [sn, -cs] });
        min_h0 = min_h0.min(rhs(p, h, st, false)[2]);
    }
    let total = 2.0 * half.length;
    for (s, st) in rec.iter().rev().skip(1) {
        let (sn, cs) = st[2].sin_cos();
        samples.push(CurveSample { s: total - s, point: [st[0], -st[1]], tangent: [-cs, sn], normal: [sn, cs] });
    }
    let curve = Curve { samples, closed: true };
    let mut h_deviation = 0.0f64;
    for i in 0..curve.unique_len() {
        h_deviation = h_deviation.max((generalized_curvature(&curve, i, d)? - h).abs());
    }
    Ok(ShootingResult {
        h,
        r_start,
        curve,
        closure_residual: half.residual,
        enclosed_volume: 2.0 * half.end[4],
        perimeter: 2.0 * half.end[3],
        min_h0,
        h_deviation,
    })
}

/// Radius `r` with `2π∫₀^r f(s) s ds = V`.
pub fn centered_radius(d: &Density, v: f64) -> Result<f64> {
    let p = radial_profile(d)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Domain(format!("volume must be positive, got {v}")));
    }
    let vol = |r: f64| TAU * p.moment1(r);
    let mut hi = 1.0;
    while vol(hi) < v {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Numeric(format!("no centred disk of volume {v}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if vol(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Centered,
    OffCentre,
    DistantBall,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub source: CandidateSource,
    pub h: f64,
    pub r_start: f64,
    pub volume: f64,
    pub perimeter: f64,
    pub closure_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub v: f64,
    pub i_estimate: f64,
    pub h: f64,
    pub min_h0: f64,
    pub convexity_flag: bool,
    pub closure_residual: f64,
    pub r_start: f64,
    pub h_deviation: f64,
    pub upper_bound: Option<f64>,
    pub source: CandidateSource,
    /// A distant ball beats every closed shooting curve.
    pub distant_ball_better: bool,
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileBudget {
    pub r_points: usize,
    pub h_points: usize,
    /// Launch radii span `[lo·r_c, hi·r_c]` about the centred radius `r_c`.
    pub r_span: (f64, f64),
    pub bisections: usize,
    pub distant_ball: bool,
    pub shoot: ShootOptions,
}

impl Default for ProfileBudget {
    fn default() -> Self {
        Self { r_points: 16, h_points: 12, r_span: (0.25, 4.0), bisections: 80, distant_ball: true, shoot: ShootOptions::default() }
    }
}

#[derive(Debug, Clone, Copy)]
struct Closed {
    r0: f64,
    h: f64,
    v: f64,
    p: f64,
    residual: f64,
}

/// Root of `g` in `[a, b]` given opposite signs at the ends.
fn bisect_root(mut a: f64, mut ga: f64, mut b: f64, iters: usize, g: impl Fn(f64) -> Option<f64>) -> Option<f64> {
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        let gm = g(m)?;
        if gm == 0.0 {
            return Some(m);
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
        if (b - a).abs() <= 1e-15 * a.abs().max(b.abs()) {
            break;
        }
    }
    Some(0.5 * (a + b))
}

/// Closed curves launched at `r0`: sign changes of the angle error over an
/// H grid, or a volume solve when every curve closes.
fn scan_launch(p: &Profile, v: f64, r0: f64, b: &ProfileBudget) -> Vec<Closed> {
    let ell = (v / (PI * p.value(r0))).sqrt();
    let slope = p.log_derivative(r0);
    let k = b.h_points.max(2);
    let hs: Vec<f64> = (0..k).map(|i| slope + 2f64.powf(-1.5 + 3.0 * i as f64 / (k - 1) as f64) / ell).collect();
    let gs: Vec<Option<f64>> = hs.iter().map(|h| closure_error(p, *h, r0, &b.shoot)).collect();
    let mut out = Vec::new();
    let finish = |h: f64, out: &mut Vec<Closed>| {
        if let Ok((half, vv, pp)) = closed_measures(p, h, r0, &b.shoot) {
            if half.residual < CLOSURE_TOL {
                out.push(Closed { r0, h, v: vv, p: pp, residual: half.residual });
            }
        }
    };
    if gs.iter().all(|g| matches!(g, Some(x) if x.abs() < CLOSURE_TOL)) {
        // Every launch closes (locally constant density): match the volume instead.
        let vol = |h: f64| closed_measures(p, h, r0, &b.shoot).ok().map(|(_, vv, _)| vv - v);
        let dv: Vec<Option<f64>> = hs.iter().map(|h| vol(*h)).collect();
        for i in 0..k - 1 {
            if let (Some(a), Some(c)) = (dv[i], dv[i + 1]) {
                if a * c <= 0.0 {
                    if let Some(h) = bisect_root(hs[i], a, hs[i + 1], b.bisections, vol) {
                        finish(h, &mut out);
                    }
                }
            }
        }
        return out;
    }
    for i in 0..k - 1 {
        if let (Some(a), Some(c)) = (gs[i], gs[i + 1]) {
            if a * c <= 0.0 && (a - c).abs() < PI {
                if let Some(h) = bisect_root(hs[i], a, hs[i + 1], b.bisections, |h| closure_error(p, h, r0, &b.shoot)) {
                    finish(h, &mut out);
                }
            }
        }
    }
    out
}

/// Closing `H` at launch radius `r0` near `guess`.
fn closing_h(p: &Profile, r0: f64, guess: f64, b: &ProfileBudget) -> Option<f64> {
    let g0 = closure_error(p, guess, r0, &b.shoot)?;
    if g0.abs() < 1e-12 {
        return Some(guess);
    }
    let mut delta = 0.02 * guess.abs().max(1e-3);
    for _ in 0..8 {
        for cand in [guess - delta, guess + delta] {
            if let Some(gc) = closure_error(p, cand, r0, &b.shoot) {
                if gc * g0 <= 0.0 && (gc - g0).abs() < PI {
                    let (lo, glo, hi) = if cand < guess { (cand, gc, guess) } else { (guess, g0, cand) };
                    return bisect_root(lo, glo, hi, b.bisections, |h| closure_error(p, h, r0, &b.shoot));
                }
            }
        }
        delta *= 2.0;
    }
    None
}

/// Follows the branch between two closed curves whose volumes bracket `v`.
fn refine_branch(p: &Profile, v: f64, a: Closed, c: Closed, b: &ProfileBudget) -> Option<Closed> {
    let (mut lo, mut hi) = (a, c);
    for _ in 0..b.bisections {
        if (lo.v - v).abs() <= 1e-7 * v {
            return Some(lo);
        }
        if (hi.v - v).abs() <= 1e-7 * v {
            return Some(hi);
        }
        let r0 = 0.5 * (lo.r0 + hi.r0);
        let guess = 0.5 * (lo.h + hi.h);
        let h = closing_h(p, r0, guess, b)?;
        let (half, vv, pp) = closed_measures(p, h, r0, &b.shoot).ok()?;
        let m = Closed { r0, h, v: vv, p: pp, residual: half.residual };
        if (m.v - v) * (lo.v - v) > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
        if (hi.r0 - lo.r0).abs() <= 1e-14 * r0 {
            break;
        }
    }
    [lo, hi].into_iter().find(|m| (m.v - v).abs() <= 1e-6 * v)
}

fn distant_candidate(d: &Density, v: f64, r0: f64) -> Option<(Candidate, f64)> {
    let stats = find_distant_low_density_ball(d, v, r0).ok()??;
    let Region::Ball(ball) = &stats.ball else { return None };
    let p = d.profile()?;
    let (c, rho) = ([ball.center[0], ball.center[1]], ball.radius);
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..1024 {
        let (sn, cs) = (TAU * k as f64 / 1024.0).sin_cos();
        let x = [c[0] + rho * cs, c[1] + rho * sn];
        let r = x[0].hypot(x[1]);
        let f = p.value(r);
        let radial_dot = if r > 0.0 { (x[0] * cs + x[1] * sn) / r } else { 0.0 };
        num += (1.0 / rho + p.log_derivative(r) * radial_dot) * f;
        den += f;
    }
    let cand = Candidate {
        source: CandidateSource::DistantBall,
        h: num / den,
        r_start: c[0].hypot(c[1]) + rho,
        volume: stats.volume,
        perimeter: stats.perimeter,
        closure_residual: 0.0,
    };
    Some((cand, 1.0 / rho))
}

/// Upper estimate of the profile at `V` from closed constant-curvature curves
/// (centred disk, off-centre launches) and, with a finite limit, distant balls.
pub fn estimate_profile(d: &Density, v: f64, budget: &ProfileBudget) -> Result<ProfilePoint> {
    let p = radial_profile(d)?;
    let rc = centered_radius(d, v)?;
    let mut closed: Vec<(CandidateSource, Closed)> = Vec::new();

    let hc = 1.0 / rc + p.log_derivative(rc);
    if let Ok((half, vv, pp)) = closed_measures(p, hc, rc, &budget.shoot) {
        if half.residual < CLOSURE_TOL && (vv - v).abs() <= 1e-6 * v {
            closed.push((CandidateSource::Centered, Closed { r0: rc, h: hc, v: vv, p: pp, residual: half.residual }));
        }
    }

    let n = budget.r_points.max(2);
    let (a, b) = budget.r_span;
    let radii: Vec<f64> = (0..n).map(|i| rc * a * (b / a).powf(i as f64 / (n - 1) as f64)).collect();
    let scans: Vec<Vec<Closed>> = radii.par_iter().map(|r0| scan_launch(p, v, *r0, budget)).collect();
    for list in &scans {
        for c in list {
            if (c.v - v).abs() <= 1e-6 * v {
                closed.push((CandidateSource::OffCentre, *c));
            }
        }
    }
    let pairs: Vec<(Closed, Closed)> = scans
        .windows(2)
        .flat_map(|w| {
            let mut out = Vec::new();
            for x in &w[0] {
                for y in &w[1] {
                    let close = (x.h - y.h).abs() <= 0.5 * x.h.abs().max(y.h.abs());
                    if close && (x.v - v) * (y.v - v) < 0.0 {
                        out.push((*x, *y));
                    }
                }
            }
            out
        })
        .collect();
    let refined: Vec<Option<Closed>> = pairs.par_iter().map(|(x, y)| refine_branch(p, v, *x, *y, budget)).collect();
    closed.extend(refined.into_iter().flatten().map(|c| (CandidateSource::OffCentre, c)));

    let mut candidates: Vec<Candidate> = closed
        .iter()
        .map(|(src, c)| Candidate { source: *src, h: c.h, r_start: c.r0, volume: c.v, perimeter: c.p, closure_residual: c.residual })
        .collect();
    let best_shot = candidates.iter().map(|c| c.perimeter).fold(f64::INFINITY, f64::min);
    let mut distant_h0 = None;
    if budget.distant_ball && p.limit().is_some() {
        if let Some((c, h0)) = distant_candidate(d, v, (4.0 * rc).max(10.0)) {
            distant_h0 = Some(h0);
            candidates.push(c);
        }
    }
    if candidates.is_empty() {
        return Err(Error::EstimationFailed(format!(
            "no closed curve of volume {v} found ({} closed launches off target)",
            scans.iter().map(Vec::len).sum::<usize>()
        )));
    }

    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let b = &candidates[best];
        let tie = (c.perimeter - b.perimeter).abs() <= 1e-9 * b.perimeter;
        if (!tie && c.perimeter < b.perimeter) || (tie && c.r_start < b.r_start && c.source != CandidateSource::DistantBall) {
            best = i;
        }
    }
    let chosen = candidates[best].clone();
    let distant_ball_better = candidates.iter().any(|c| c.source == CandidateSource::DistantBall && c.perimeter < best_shot);
    let (min_h0, h_deviation) = if chosen.source == CandidateSource::DistantBall {
        (distant_h0.unwrap_or(f64::NAN), 0.0)
    } else {
        let s = shoot_with(d, chosen.h, chosen.r_start, &budget.shoot)?;
        (s.min_h0, s.h_deviation)
    };
    Ok(ProfilePoint {
        v,
        i_estimate: chosen.perimeter,
        h: chosen.h,
        min_h0,
        convexity_flag: min_h0 >= -1e-8,
        closure_residual: chosen.closure_residual,
        r_start: chosen.r_start,
        h_deviation,
        upper_bound: profile_upper_bound(v, d).ok(),
        source: chosen.source,
        distant_ball_better,
        candidates,
    })
}

/// [`estimate_profile`] over several volumes, in input order.
pub fn profile_sweep(d: &Density, volumes: &[f64], budget: &ProfileBudget) -> Vec<Result<ProfilePoint>> {
    volumes.par_iter().map(|v| estimate_profile(d, *v, budget)).collect()
}
