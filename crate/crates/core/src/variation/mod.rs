//! Planar curves, generalized curvature, first variation, and constant
//! generalized-curvature shooting for radial densities.

pub mod ode;
mod shooting;

use std::f64::consts::TAU;

use serde::Serialize;

pub use shooting::{
    centered_radius, estimate_profile, profile_sweep, shoot_constant_curvature, shoot_with, Candidate, CandidateSource, CLOSURE_TOL,
    ProfileBudget, ProfilePoint, ShootOptions, ShootingResult,
};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::measure::{PolarGraph, Region};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    /// Arc length from the first sample.
    pub s: f64,
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    /// Unit outward normal.
    pub normal: [f64; 2],
}

/// Arc-length samples of a planar curve. Closed curves repeat the first
/// sample at the end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub samples: Vec<CurveSample>,
    pub closed: bool,
}

fn right_normal(t: [f64; 2]) -> [f64; 2] {
    [t[1], -t[0]]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn len(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Arc of the circle through three points subtending a chord `c`, given the
/// Menger curvature `k`.
fn arc_from_chord(c: f64, k: f64) -> f64 {
    let x = 0.5 * k * c;
    if x.abs() < 1e-8 {
        c
    } else {
        2.0 * x.clamp(-1.0, 1.0).asin() / k
    }
}

fn menger(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let d = len(sub(b, a)) * len(sub(c, b)) * len(sub(c, a));
    if d == 0.0 {
        0.0
    } else {
        2.0 * cross(sub(b, a), sub(c, b)).abs() / d
    }
}

impl Curve {
    /// Circle about `center`, counter-clockwise from angle 0, with exact
    /// arc lengths, tangents and normals.
    pub fn circle(center: [f64; 2], radius: f64, samples: usize) -> Result<Self> {
        if !(radius > 0.0) || samples < 4 {
            return Err(Error::Geometry("circle needs a positive radius and at least 4 samples".into()));
        }
        let s = (0..=samples)
            .map(|k| {
                let t = TAU * (k % samples) as f64 / samples as f64;
                let (sn, cs) = t.sin_cos();
                CurveSample {
                    s: radius * TAU * k as f64 / samples as f64,
                    point: [center[0] + radius * cs, center[1] + radius * sn],
                    tangent: [-sn, cs],
                    normal: [cs, sn],
                }
            })
            .collect();
        Ok(Self { samples: s, closed: true })
    }

    /// Curve through `points` (without a repeated endpoint for closed curves).
    /// Tangents come from the circle through each point and its neighbours;
    /// closed curves get the outward normal, open ones the right-hand normal.
    pub fn from_points(points: &[[f64; 2]], closed: bool) -> Result<Self> {
        let n = points.len();
        if n < 3 {
            return Err(Error::Geometry("a curve needs at least 3 points".into()));
        }
        let at = |k: isize| -> [f64; 2] { points[k.rem_euclid(n as isize) as usize] };
        let segs = if closed { n } else { n - 1 };
        let mut arcs = Vec::with_capacity(segs);
        for k in 0..segs {
            let (a, b) = (at(k as isize), at(k as isize + 1));
            let c = len(sub(b, a));
            if c == 0.0 {
                return Err(Error::Geometry(format!("coincident samples at index {k}")));
            }
            let mut ks = Vec::new();
            if closed || k > 0 {
                ks.push(menger(at(k as isize - 1), a, b));
            }
            if closed || k + 2 < n {
                ks.push(menger(a, b, at(k as isize + 2)));
            }
            let kk = ks.iter().sum::<f64>() / ks.len().max(1) as f64;
            arcs.push(arc_from_chord(c, kk));
        }
        let area: f64 = (0..n).map(|k| cross(at(k as isize), at(k as isize + 1))).sum();
        let flip = closed && area < 0.0;
        let mut samples = Vec::with_capacity(n + 1);
        let mut s = 0.0;
        for k in 0..n {
            let t = if !closed && k == 0 {
                unit(sub(points[1], points[0]))
            } else if !closed && k == n - 1 {
                unit(sub(points[n - 1], points[n - 2]))
            } else {
                let (u, w) = (sub(at(k as isize), at(k as isize - 1)), sub(at(k as isize + 1), at(k as isize)));
                let (au, aw) = (u[1].atan2(u[0]), w[1].atan2(w[0]));
                let mut dw = aw - au;
                dw -= TAU * (dw / TAU).round();
                let (lu, lw) = (len(u), len(w));
                let a = au + dw * lu / (lu + lw);
                [a.cos(), a.sin()]
            };
            let nrm = right_normal(t);
            let nrm = if flip { [-nrm[0], -nrm[1]] } else { nrm };
            samples.push(CurveSample { s, point: points[k], tangent: t, normal: nrm });
            if k < segs {
                s += arcs[k];
            }
        }
        if closed {
            let first = samples[0];
            samples.push(CurveSample { s, ..first });
        }
        Ok(Self { samples, closed })
    }

    pub fn length(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.s)
    }

    /// Samples without the repeated endpoint of a closed curve.
    pub fn unique_len(&self) -> usize {
        if self.closed {
            self.samples.len() - 1
        } else {
            self.samples.len()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.samples.iter().enumerate() {
            let (t, nu) = (s.tangent, s.normal);
            if (len(t) - 1.0).abs() > 1e-10 || (len(nu) - 1.0).abs() > 1e-10 || dot(t, nu).abs() > 1e-10 {
                return Err(Error::Geometry(format!("sample {i}: tangent and normal must be orthonormal")));
            }
        }
        if self.closed {
            let (a, b) = (self.samples[0].point, self.samples[self.samples.len() - 1].point);
            if len(sub(a, b)) >= 1e-8 * self.length() {
                return Err(Error::Geometry("closed curve does not close".into()));
            }
        }
        Ok(())
    }
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let l = len(v);
    [v[0] / l, v[1] / l]
}

/// `τ″ / (1 + τ′²)^{3/2}` for a graph `y = τ(x)`.
pub fn graph_curvature(d1: f64, d2: f64) -> f64 {
    d2 / (1.0 + d1 * d1).powf(1.5)
}

/// Signed curvature at sample `i`, positive when the curve bends away from
/// its normal (1 on the unit circle with outward normal). Turning rate of the
/// tangent from a five-point (three at the ends) Lagrange derivative in arc length.
pub fn euclidean_curvature(c: &Curve, i: usize) -> Result<f64> {
    let m = c.unique_len();
    if i >= m {
        return Err(Error::Geometry(format!("sample index {i} out of range")));
    }
    let total = c.length();
    let offsets: &[isize] = if c.closed && m >= 5 || !c.closed && i >= 2 && i + 2 < m {
        &[-2, -1, 0, 1, 2]
    } else if c.closed && m >= 3 || !c.closed && i >= 1 && i + 1 < m {
        &[-1, 0, 1]
    } else {
        return Err(Error::Geometry("curvature needs three consecutive samples".into()));
    };
    let ti = c.samples[i].tangent;
    let mut xs = Vec::with_capacity(offsets.len());
    let mut ys = Vec::with_capacity(offsets.len());
    for &o in offsets {
        let j = i as isize + o;
        let (k, wrap) = if c.closed {
            (j.rem_euclid(m as isize) as usize, (j.div_euclid(m as isize)) as f64)
        } else {
            (j as usize, 0.0)
        };
        let sk = c.samples[k].s + wrap * total - c.samples[i].s;
        let tk = c.samples[k].tangent;
        xs.push(sk);
        ys.push(cross(ti, tk).atan2(dot(ti, tk)));
    }
    let ctr = offsets.len() / 2;
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Geometry(format!("degenerate samples around index {i}")));
    }
    // Derivative of the Lagrange interpolant at xs[ctr] = 0.
    let mut rate = 0.0;
    for k in 0..xs.len() {
        if k == ctr {
            continue;
        }
        let mut w = 1.0 / (xs[k] - xs[ctr]);
        for j in 0..xs.len() {
            if j != k && j != ctr {
                w *= (xs[ctr] - xs[j]) / (xs[k] - xs[j]);
            }
        }
        rate += w * ys[k];
    }
    let left = [-ti[1], ti[0]];
    Ok(-rate * dot(left, c.samples[i].normal))
}

/// `H₀ + ∇v·ν` at sample `i`.
pub fn generalized_curvature(c: &Curve, i: usize, d: &Density) -> Result<f64> {
    let h0 = euclidean_curvature(c, i)?;
    let s = &c.samples[i];
    let g = d.eval_log_gradient(&s.point)?;
    Ok(h0 + g[0] * s.normal[0] + g[1] * s.normal[1])
}

/// Periodic trigonometric interpolant of equally spaced samples.
struct Trig {
    t0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    even: bool,
}

impl Trig {
    fn new(t0: f64, g: &[f64]) -> Self {
        let m = g.len();
        let jm = m / 2;
        let mut a = vec![0.0; jm + 1];
        let mut b = vec![0.0; jm + 1];
        for j in 0..=jm {
            for (k, gk) in g.iter().enumerate() {
                let (s, c) = (TAU * (j * k % m) as f64 / m as f64).sin_cos();
                a[j] += 2.0 / m as f64 * gk * c;
                b[j] += 2.0 / m as f64 * gk * s;
            }
        }
        Self { t0, a, b, even: m.is_multiple_of(2) }
    }

    /// `(g, g′, g″)` at `t`.
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let x = t - self.t0;
        let (mut v, mut d1, mut d2) = (0.5 * self.a[0], 0.0, 0.0);
        let last = self.a.len() - 1;
        for j in 1..=last {
            let w = if self.even && j == last { 0.5 } else { 1.0 };
            let jf = j as f64;
            let (s, c) = (jf * x).sin_cos();
            let (a, b) = (w * self.a[j], w * self.b[j]);
            v += a * c + b * s;
            d1 += jf * (b * c - a * s);
            d2 -= jf * jf * (a * c + b * s);
        }
        (v, d1, d2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstVariationRow {
    pub eps: f64,
    pub dv_measured: f64,
    pub dp_measured: f64,
    pub dv_mismatch: f64,
    pub dp_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstVariationReport {
    /// `∫ u f dH¹`.
    pub dv_predicted: f64,
    /// `∫ H_f u f dH¹`.
    pub dp_predicted: f64,
    pub rows: Vec<FirstVariationRow>,
    /// Log-log slope of the mismatch against `ε` (`None` below two usable points).
    pub dv_order: Option<f64>,
    pub dp_order: Option<f64>,
}

/// Boundary of a star-shaped region as `pole + r(θ)e(θ)` with smooth `r`.
struct SmoothBoundary {
    pole: [f64; 2],
    r: Trig,
    t0: f64,
    m: usize,
}

fn smooth_boundary(e: &Region, m: usize) -> Result<SmoothBoundary> {
    match e {
        Region::Ball(b) if b.dim() == 2 => {
            let r = vec![b.radius; m];
            Ok(SmoothBoundary { pole: [b.center[0], b.center[1]], r: Trig::new(0.0, &r), t0: 0.0, m })
        }
        Region::PolarGraph(g) => {
            g.validate()?;
            let k = g.theta.len() - 1;
            if k != m {
                return Err(Error::Config(format!("u has {m} samples, the polar graph has {k} nodes")));
            }
            let step = TAU / k as f64;
            if g.theta.iter().enumerate().any(|(i, t)| (t - g.theta[0] - step * i as f64).abs() > 1e-9) {
                return Err(Error::Config("first variation needs equally spaced polar nodes".into()));
            }
            Ok(SmoothBoundary { pole: g.pole, r: Trig::new(g.theta[0], &g.r[..k]), t0: g.theta[0], m })
        }
        _ => Err(Error::InvalidRegion("first variation supports planar balls and polar graphs".into())),
    }
}

struct BoundaryPoint {
    x: [f64; 2],
    dx: [f64; 2],
    speed: f64,
    nu: [f64; 2],
    t: [f64; 2],
    h0: f64,
}

impl SmoothBoundary {
    fn at(&self, th: f64) -> BoundaryPoint {
        let (r, r1, r2) = self.r.eval(th);
        let (s, c) = th.sin_cos();
        let (e, ep) = ([c, s], [-s, c]);
        let x = [self.pole[0] + r * e[0], self.pole[1] + r * e[1]];
        let dx = [r1 * e[0] + r * ep[0], r1 * e[1] + r * ep[1]];
        let ddx = [(r2 - r) * e[0] + 2.0 * r1 * ep[0], (r2 - r) * e[1] + 2.0 * r1 * ep[1]];
        let speed = len(dx);
        let t = [dx[0] / speed, dx[1] / speed];
        BoundaryPoint { x, dx, speed, nu: right_normal(t), t, h0: cross(dx, ddx) / speed.powi(3) }
    }
}

/// `∫_{x_ref}^{x₁} f(t, x₂) dt` by Gauss–Legendre panels.
fn strip(d: &Density, gl: &GaussLegendre, x_ref: f64, x: [f64; 2]) -> f64 {
    gl.integrate(x_ref, x[0], 8, |t| d.value(&[t, x[1]]))
}

/// Weighted volume and perimeter of the closed parametric curve `pts`
/// (counter-clockwise, equally spaced in the parameter, `dpts` = derivatives).
fn curve_measures(d: &Density, pole: [f64; 2], pts: &[[f64; 2]], dpts: &[[f64; 2]]) -> (f64, f64) {
    let m = pts.len();
    let dt = TAU / m as f64;
    let (mut v, mut p) = (0.0, 0.0);
    let radial = d.profile();
    let gl = GaussLegendre::new(8);
    for (x, dx) in pts.iter().zip(dpts) {
        p += d.value(x) * len(*dx);
        v += match radial {
            Some(pr) => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                if r2 == 0.0 {
                    0.0
                } else {
                    pr.moment1(r2.sqrt()) / r2 * cross(*x, *dx)
                }
            }
            None => strip(d, &gl, pole[0], *x) * dx[1],
        };
    }
    (v * dt, p * dt)
}

fn simple_polygon(pole: [f64; 2], pts: &[[f64; 2]]) -> bool {
    let m = pts.len();
    let star = (0..m).all(|k| cross(sub(pts[k], pole), sub(pts[(k + 1) % m], pole)) > 0.0);
    if star {
        return true;
    }
    let seg_hit = |a: [f64; 2], b: [f64; 2], c: [f64; 2], e: [f64; 2]| {
        let d1 = cross(sub(b, a), sub(c, a));
        let d2 = cross(sub(b, a), sub(e, a));
        let d3 = cross(sub(e, c), sub(a, c));
        let d4 = cross(sub(e, c), sub(b, c));
        d1 * d2 < 0.0 && d3 * d4 < 0.0
    };
    for i in 0..m {
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            if seg_hit(pts[i], pts[(i + 1) % m], pts[j], pts[(j + 1) % m]) {
                return false;
            }
        }
    }
    true
}

fn loglog_slope(eps: &[f64], err: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = eps.iter().zip(err).filter(|(_, e)| **e > 1e-14).map(|(x, e)| (x.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Deforms `∂E` by `ε u ν` for each `ε`, measures the forward-difference
/// responses of weighted volume and perimeter, and compares them with
/// `∫ u f` and `∫ H_f u f`. `u` holds one value per equally spaced boundary
/// node (polar nodes, or angles `2πk/m` about a ball's centre).
pub fn first_variation_check(e: &Region, d: &Density, u: &[f64], eps: &[f64]) -> Result<FirstVariationReport> {
    if d.dim() != 2 {
        return Err(Error::Config("first variation is implemented in the plane".into()));
    }
    if u.len() < 4 || u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("u needs at least 4 finite samples".into()));
    }
    if eps.is_empty() || eps.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::Config("eps grid must be positive".into()));
    }
    let b = smooth_boundary(e, u.len())?;
    let ut = Trig::new(b.t0, u);
    let q = (8 * b.m).max(2048);
    let dt = TAU / q as f64;
    let thetas: Vec<f64> = (0..q).map(|k| b.t0 + dt * k as f64).collect();
    let base: Vec<BoundaryPoint> = thetas.iter().map(|t| b.at(*t)).collect();
    let uu: Vec<(f64, f64)> = thetas.iter().map(|t| {
        let (v, d1, _) = ut.eval(*t);
        (v, d1)
    }).collect();

    let (mut dv, mut dp, mut sv, mut sp) = (0.0, 0.0, 0.0, 0.0);
    for (bp, (uv, _)) in base.iter().zip(&uu) {
        let f = d.value(&bp.x);
        let g = d.eval_log_gradient(&bp.x)?;
        let hf = bp.h0 + g[0] * bp.nu[0] + g[1] * bp.nu[1];
        dv += uv * f * bp.speed;
        dp += hf * uv * f * bp.speed;
        sv += uv.abs() * f * bp.speed;
        sp += (hf * uv).abs() * f * bp.speed;
    }
    let (dv, dp, sv, sp) = (dv * dt, dp * dt, sv * dt, (sp * dt).max(sv * dt));

    let deformed = |ep: f64| -> Result<(f64, f64)> {
        let mut pts = Vec::with_capacity(q);
        let mut dpts = Vec::with_capacity(q);
        for (bp, (uv, u1)) in base.iter().zip(&uu) {
            pts.push([bp.x[0] + ep * uv * bp.nu[0], bp.x[1] + ep * uv * bp.nu[1]]);
            // ν′ = |x′| H₀ t along a counter-clockwise parametrisation.
            let k = bp.speed * bp.h0;
            dpts.push([
                bp.dx[0] + ep * (u1 * bp.nu[0] + uv * k * bp.t[0]),
                bp.dx[1] + ep * (u1 * bp.nu[1] + uv * k * bp.t[1]),
            ]);
        }
        if ep != 0.0 && !simple_polygon(b.pole, &pts) {
            return Err(Error::Geometry(format!("deformation with ε = {ep} self-intersects")));
        }
        Ok(curve_measures(d, b.pole, &pts, &dpts))
    };
    let (v0, p0) = deformed(0.0)?;
    let mut rows = Vec::with_capacity(eps.len());
    for &ep in eps {
        let (v1, p1) = deformed(ep)?;
        let (mv, mp) = ((v1 - v0) / ep, (p1 - p0) / ep);
        rows.push(FirstVariationRow {
            eps: ep,
            dv_measured: mv,
            dp_measured: mp,
            dv_mismatch: (mv - dv).abs() / sv,
            dp_mismatch: (mp - dp).abs() / sp,
        });
    }
    let es: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let dv_order = loglog_slope(&es, &rows.iter().map(|r| r.dv_mismatch).collect::<Vec<_>>());
    let dp_order = loglog_slope(&es, &rows.iter().map(|r| r.dp_mismatch).collect::<Vec<_>>());
    Ok(FirstVariationReport { dv_predicted: dv, dp_predicted: dp, rows, dv_order, dp_order })
}

/// Polar graph of the circle `|x − c| = radius` with `nodes` equal angular steps about `c`.
pub fn circle_graph(center: [f64; 2], radius: f64, nodes: usize) -> Result<PolarGraph> {
    PolarGraph::from_fn(center, nodes, |_| radius)
}
