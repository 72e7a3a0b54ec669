//! Star-shaped planar regions `{pole + s·u(θ) : 0 ≤ s ≤ r(θ)}` with `r`
//! piecewise linear in `θ`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::ball::{gl8, radial_breaks};
use crate::density::{Density, Model};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarGraph {
    #[serde(default)]
    pub pole: [f64; 2],
    pub theta: Vec<f64>,
    pub r: Vec<f64>,
}

impl PolarGraph {
    pub fn new(pole: [f64; 2], theta: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        let g = Self { pole, theta, r };
        g.validate()?;
        Ok(g)
    }

    /// `nodes` equal segments with `r(θ) = radius(θ)`.
    pub fn from_fn<F: Fn(f64) -> f64>(pole: [f64; 2], nodes: usize, radius: F) -> Result<Self> {
        let nodes = nodes.max(3);
        let theta: Vec<f64> = (0..=nodes).map(|k| TAU * k as f64 / nodes as f64).collect();
        let mut r: Vec<f64> = theta.iter().map(|t| radius(*t)).collect();
        r[nodes] = r[0];
        Self::new(pole, theta, r)
    }

    /// Circle of radius `radius` about `center`, seen from an interior `pole`.
    pub fn circle(center: [f64; 2], radius: f64, pole: [f64; 2], nodes: usize) -> Result<Self> {
        let q = [pole[0] - center[0], pole[1] - center[1]];
        if q[0].hypot(q[1]) >= radius {
            return Err(Error::InvalidRegion("pole must lie inside the circle".into()));
        }
        Self::from_fn(pole, nodes, |t| ray_exit(q, t, radius))
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.theta.len();
        if k < 4 || self.r.len() != k {
            return Err(Error::InvalidRegion("polar graph needs matching `theta` and `r` with at least 4 samples".into()));
        }
        if self.pole.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidRegion("polar graph `pole` must be finite".into()));
        }
        if self.theta.windows(2).any(|w| !(w[1] > w[0])) || self.theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidRegion("polar graph `theta` must be strictly increasing".into()));
        }
        if ((self.theta[k - 1] - self.theta[0]) - TAU).abs() > 1e-9 {
            return Err(Error::InvalidRegion("polar graph `theta` must span exactly 2π".into()));
        }
        if self.r.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidRegion("polar graph `r` must be positive".into()));
        }
        if (self.r[0] - self.r[k - 1]).abs() > 1e-12 * self.r[0] {
            return Err(Error::InvalidRegion("polar graph `r` must be periodic (first = last)".into()));
        }
        Ok(())
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.theta.len() - 1).map(|i| (self.theta[i], self.theta[i + 1], self.r[i], self.r[i + 1]))
    }

    /// Interpolated radius at angle `t` (any real).
    pub fn radius_at(&self, t: f64) -> f64 {
        let t0 = self.theta[0];
        let t = t0 + (t - t0).rem_euclid(TAU);
        let k = self.theta.partition_point(|x| *x <= t).clamp(1, self.theta.len() - 1);
        let (a, b) = (self.theta[k - 1], self.theta[k]);
        let s = ((t - a) / (b - a)).clamp(0.0, 1.0);
        self.r[k - 1] + s * (self.r[k] - self.r[k - 1])
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let q = [x[0] - self.pole[0], x[1] - self.pole[1]];
        let s = q[0].hypot(q[1]);
        s == 0.0 || s <= self.radius_at(q[1].atan2(q[0]))
    }

    pub fn point(&self, t: f64, s: f64) -> [f64; 2] {
        [self.pole[0] + s * t.cos(), self.pole[1] + s * t.sin()]
    }

    /// Largest distance from the origin over the curve, by dense sampling.
    pub fn max_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (t0, t1, r0, r1) in self.segments() {
            for j in 0..=16 {
                let s = j as f64 / 16.0;
                let p = self.point(t0 + s * (t1 - t0), r0 + s * (r1 - r0));
                m = m.max(p[0].hypot(p[1]));
            }
        }
        m
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = self.pole;
        let mut hi = self.pole;
        for (t0, t1, r0, r1) in self.segments() {
            for j in 0..=8 {
                let s = j as f64 / 8.0;
                let p = self.point(t0 + s * (t1 - t0), r0 + s * (r1 - r0));
                for q in 0..2 {
                    lo[q] = lo[q].min(p[q]);
                    hi[q] = hi[q].max(p[q]);
                }
            }
        }
        (lo, hi)
    }

    fn pole_at_origin(&self) -> bool {
        self.pole == [0.0, 0.0]
    }

    /// `(volume, perimeter)` at the given resolution.
    pub(crate) fn measures(&self, d: &Density, res: usize) -> (f64, f64) {
        let gl = gl8();
        let radial = match d.model() {
            Model::Radial(p) => Some(p),
            _ => None,
        };
        let breaks = radial_breaks(d);
        let rad_panels = (res / 8).max(1);
        let mut vol = 0.0;
        let mut per = 0.0;
        for (t0, t1, r0, r1) in self.segments() {
            let panels = ((res as f64) * (t1 - t0) / TAU).ceil().max(1.0) as usize;
            let slope = (r1 - r0) / (t1 - t0);
            vol += gl.integrate(t0, t1, panels, |t| {
                let rt = r0 + slope * (t - t0);
                match radial {
                    Some(p) if self.pole_at_origin() => p.moment1(rt),
                    _ => self.ray_integral(d, &breaks, t, rt, rad_panels),
                }
            });
            per += gl.integrate(t0, t1, panels, |t| {
                let rt = r0 + slope * (t - t0);
                d.value(&self.point(t, rt)) * (rt * rt + slope * slope).sqrt()
            });
        }
        (vol, per)
    }

    /// `∫₀^{rt} f(pole + s·u(t)) s ds`, split where `|x|` crosses a breakpoint.
    fn ray_integral(&self, d: &Density, breaks: &[f64], t: f64, rt: f64, panels: usize) -> f64 {
        let (st, ct) = t.sin_cos();
        let pu = self.pole[0] * ct + self.pole[1] * st;
        let pp = self.pole[0] * self.pole[0] + self.pole[1] * self.pole[1];
        let mut cuts = vec![0.0, rt];
        for bp in breaks {
            let disc = pu * pu - pp + bp * bp;
            if disc > 0.0 {
                for s in [-pu - disc.sqrt(), -pu + disc.sqrt()] {
                    if s > 0.0 && s < rt {
                        cuts.push(s);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let gl = gl8();
        cuts.windows(2)
            .map(|w| gl.integrate(w[0], w[1], panels, |s| s * d.value(&[self.pole[0] + s * ct, self.pole[1] + s * st])))
            .sum()
    }

    /// Angular intervals of `S(r)` inside the region, with `S(r)` centred at the origin.
    pub(crate) fn slice_intervals(&self, r: f64, res: usize) -> Vec<(f64, f64)> {
        if self.pole_at_origin() {
            let mut out: Vec<(f64, f64)> = Vec::new();
            for (t0, t1, r0, r1) in self.segments() {
                let iv = match (r0 >= r, r1 >= r) {
                    (true, true) => Some((t0, t1)),
                    (false, false) => None,
                    (a, _) => {
                        let tc = t0 + (r - r0) / (r1 - r0) * (t1 - t0);
                        Some(if a { (t0, tc) } else { (tc, t1) })
                    }
                };
                if let Some((a, b)) = iv {
                    match out.last_mut() {
                        Some(last) if last.1 == a => last.1 = b,
                        _ => out.push((a, b)),
                    }
                }
            }
            return out;
        }
        let inside = |a: f64| self.contains(&[r * a.cos(), r * a.sin()]);
        angular_intervals(&inside, (4 * res).max(512))
    }
}

/// Distance from `q` (relative to a circle centre) to the circle of radius
/// `radius` along direction `t`; `q` must be inside.
pub(crate) fn ray_exit(q: [f64; 2], t: f64, radius: f64) -> f64 {
    let (s, c) = t.sin_cos();
    let qu = q[0] * c + q[1] * s;
    let qq = q[0] * q[0] + q[1] * q[1];
    -qu + (qu * qu - qq + radius * radius).max(0.0).sqrt()
}

/// Intervals of `[0, 2π)` where `inside` holds: uniform sampling, then bisection of
/// every transition.
pub(crate) fn angular_intervals(inside: &dyn Fn(f64) -> bool, samples: usize) -> Vec<(f64, f64)> {
    let da = TAU / samples as f64;
    let flags: Vec<bool> = (0..samples).map(|k| inside(k as f64 * da)).collect();
    if flags.iter().all(|f| *f) {
        return vec![(0.0, TAU)];
    }
    if flags.iter().all(|f| !*f) {
        return Vec::new();
    }
    let refine = |mut a: f64, mut b: f64, a_in: bool| -> f64 {
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if inside(m) == a_in {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-14 {
                break;
            }
        }
        0.5 * (a + b)
    };
    // Start from an outside sample so every interval closes.
    let start = flags.iter().position(|f| !*f).unwrap();
    let mut out = Vec::new();
    let mut open: Option<f64> = None;
    for j in 0..samples {
        let k = (start + j) % samples;
        let k1 = (k + 1) % samples;
        let a = (start + j) as f64 * da;
        if flags[k] != flags[k1] {
            let x = refine(a, a + da, flags[k]);
            if flags[k1] {
                open = Some(x);
            } else if let Some(o) = open.take() {
                out.push((o, x));
            }
        }
    }
    out
}

/// Weighted length of the arcs of `S(r)` given by angular intervals.
pub(crate) fn arc_weight(d: &Density, r: f64, intervals: &[(f64, f64)], res: usize) -> f64 {
    let gl = gl8();
    intervals
        .iter()
        .map(|(a, b)| {
            let panels = ((res as f64) * (b - a) / TAU).ceil().max(1.0) as usize;
            gl.integrate(*a, *b, panels, |t| d.value(&[r * t.cos(), r * t.sin()])) * r
        })
        .sum()
}

/// `E ∩ B(r)` for a graph whose pole lies inside `B(r)`.
pub(crate) fn truncate(g: &PolarGraph, radius: f64) -> Result<PolarGraph> {
    let p = g.pole;
    if p[0].hypot(p[1]) >= radius {
        return Err(Error::Precondition("truncation needs the pole inside B(r)".into()));
    }
    let ball = |t: f64| ray_exit(p, t, radius);
    let exact = g.pole_at_origin();
    let mut theta = Vec::new();
    let mut r = Vec::new();
    let push = |theta: &mut Vec<f64>, r: &mut Vec<f64>, t: f64, v: f64| {
        if theta.last().map(|l| t > *l + 1e-15).unwrap_or(true) {
            theta.push(t);
            r.push(v);
        }
    };
    for (t0, t1, r0, r1) in g.segments() {
        let lin = |t: f64| r0 + (r1 - r0) * (t - t0) / (t1 - t0);
        let sub = if exact { 1 } else { 16 };
        let mut pts: Vec<f64> = (0..=sub).map(|j| t0 + (t1 - t0) * j as f64 / sub as f64).collect();
        let mut roots = Vec::new();
        for w in pts.windows(2) {
            let (fa, fb) = (lin(w[0]) - ball(w[0]), lin(w[1]) - ball(w[1]));
            if fa * fb < 0.0 {
                let (mut a, mut b) = (w[0], w[1]);
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    if (lin(m) - ball(m)) * fa > 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        pts.extend(roots);
        pts.sort_by(f64::total_cmp);
        pts.pop();
        for t in pts {
            push(&mut theta, &mut r, t, lin(t).min(ball(t)));
        }
    }
    let t_end = theta[0] + TAU;
    theta.push(t_end);
    r.push(r[0]);
    PolarGraph::new(p, theta, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_about_origin_is_exact() {
        let g = PolarGraph::from_fn([0.0, 0.0], 64, |_| 1.0).unwrap();
        let (v, p) = g.measures(&Density::constant(1.0, 2), 64);
        assert!((v - PI).abs() < 1e-12 && (p - TAU).abs() < 1e-12);
    }

    #[test]
    fn off_pole_circle_converges() {
        let g = PolarGraph::circle([0.3, -0.2], 1.0, [0.1, 0.1], 2048).unwrap();
        let (v, p) = g.measures(&Density::constant(1.0, 2), 64);
        assert!((v / PI - 1.0).abs() < 1e-5, "{v}");
        assert!((p / TAU - 1.0).abs() < 1e-5, "{p}");
    }

    #[test]
    fn rejects_non_periodic_graphs() {
        let bad = PolarGraph { pole: [0.0, 0.0], theta: vec![0.0, 1.0, 2.0, TAU], r: vec![1.0, 1.0, 1.0, 2.0] };
        assert!(bad.validate().is_err());
        let short = PolarGraph { pole: [0.0, 0.0], theta: vec![0.0, 1.0, 2.0, 5.0], r: vec![1.0; 4] };
        assert!(short.validate().is_err());
    }

    #[test]
    fn truncation_of_origin_graph() {
        let g = PolarGraph::from_fn([0.0, 0.0], 256, |t| 2.0 + t.cos()).unwrap();
        let tr = truncate(&g, 2.0).unwrap();
        for k in 0..100 {
            let t = k as f64 * 0.0628;
            assert!((tr.radius_at(t) - g.radius_at(t).min(2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn intervals_by_sampling_match_exact() {
        let g = PolarGraph::from_fn([0.0, 0.0], 512, |t| 2.0 + t.cos()).unwrap();
        let exact: f64 = g.slice_intervals(2.0, 64).iter().map(|(a, b)| b - a).sum();
        let shifted = PolarGraph { pole: [1e-300, 0.0], ..g.clone() };
        let sampled: f64 = shifted.slice_intervals(2.0, 64).iter().map(|(a, b)| b - a).sum();
        assert!((exact - PI).abs() < 1e-3 && (exact - sampled).abs() < 1e-9, "{exact} {sampled}");
    }
}
