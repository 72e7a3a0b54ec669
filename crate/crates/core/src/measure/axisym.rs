//! Regions of revolution about the `x₁` axis, given by a closed polygon in
//! the `(ρ, φ)` half-plane (`φ` measured from `+x₁`).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::ball::{gl8, radial_breaks};
use crate::density::Density;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axisymmetric {
    /// Vertices `[ρ, φ]`; the closing edge is implicit.
    pub boundary: Vec<[f64; 2]>,
}

fn seg_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let on = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on(a, b, c)) || (o2 == 0.0 && on(a, b, d)) || (o3 == 0.0 && on(c, d, a)) || (o4 == 0.0 && on(c, d, b))
}

impl Axisymmetric {
    pub fn new(mut boundary: Vec<[f64; 2]>) -> Result<Self> {
        if boundary.len() > 1 && boundary.first() == boundary.last() {
            boundary.pop();
        }
        let a = Self { boundary };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.boundary;
        let k = v.len();
        if k < 3 {
            return Err(Error::InvalidRegion("axisymmetric `boundary` needs at least 3 vertices".into()));
        }
        for p in v {
            if !(p[0].is_finite() && p[1].is_finite() && p[0] >= 0.0 && p[1] >= 0.0 && p[1] <= PI) {
                return Err(Error::InvalidRegion(format!("axisymmetric vertex {p:?} outside ρ ≥ 0, 0 ≤ φ ≤ π")));
            }
        }
        for i in 0..k {
            for j in i + 1..k {
                if j == i + 1 || (i == 0 && j == k - 1) {
                    continue;
                }
                if seg_intersect(v[i], v[(i + 1) % k], v[j], v[(j + 1) % k]) {
                    return Err(Error::InvalidRegion(format!("axisymmetric `boundary` is not simple (edges {i} and {j})")));
                }
            }
        }
        if self.area_rho_phi().abs() <= 0.0 {
            return Err(Error::InvalidRegion("axisymmetric `boundary` encloses no area".into()));
        }
        Ok(())
    }

    fn area_rho_phi(&self) -> f64 {
        let v = &self.boundary;
        (0..v.len())
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % v.len()]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            / 2.0
    }

    fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let k = self.boundary.len();
        (0..k).map(move |i| (self.boundary[i], self.boundary[(i + 1) % k]))
    }

    /// Even-odd membership of `(ρ, φ)`.
    pub fn contains_rho_phi(&self, rho: f64, phi: f64) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > phi) != (b[1] > phi) {
                let r = a[0] + (phi - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if rho < r {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (rho, phi) = crate::density::spherical(x);
        self.contains_rho_phi(rho, phi)
    }

    pub fn max_rho(&self) -> f64 {
        self.boundary.iter().map(|p| p[0]).fold(0.0, f64::max)
    }

    pub fn min_rho(&self) -> f64 {
        self.boundary.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min)
    }

    /// `(volume, perimeter)` at the given resolution.
    pub(crate) fn measures(&self, d: &Density, res: usize) -> (f64, f64) {
        let gl = gl8();
        let breaks = radial_breaks(d);
        let rho_panels = (res / 8).max(1);
        let phi_panels = (res / 16).max(1);
        let mut phis: Vec<f64> = self.boundary.iter().map(|p| p[1]).collect();
        phis.sort_by(f64::total_cmp);
        phis.dedup();
        let mut vol = 0.0;
        for w in phis.windows(2) {
            let (p0, p1) = (w[0], w[1]);
            let mid = 0.5 * (p0 + p1);
            // Edges spanning the slab, in ρ order at mid-slab.
            let mut spans: Vec<([f64; 2], [f64; 2])> = self
                .edges()
                .filter(|(a, b)| a[1].min(b[1]) <= p0 && a[1].max(b[1]) >= p1)
                .collect();
            let at = |e: &([f64; 2], [f64; 2]), phi: f64| e.0[0] + (phi - e.0[1]) / (e.1[1] - e.0[1]) * (e.1[0] - e.0[0]);
            spans.sort_by(|x, y| at(x, mid).total_cmp(&at(y, mid)));
            vol += gl.integrate(p0, p1, phi_panels, |phi| {
                let mut s = 0.0;
                for pair in spans.chunks_exact(2) {
                    let (lo, hi) = (at(&pair[0], phi), at(&pair[1], phi));
                    s += radial_piece(d, &breaks, phi, lo, hi, rho_panels);
                }
                s * phi.sin()
            });
        }
        vol *= TAU;
        (vol, self.perimeter(d, res))
    }

    fn perimeter(&self, d: &Density, res: usize) -> f64 {
        let gl = gl8();
        let breaks = radial_breaks(d);
        let panels = (res / 8).max(1);
        let mut per = 0.0;
        let mut arcs: Vec<(f64, f64, f64)> = Vec::new();
        for (a, b) in self.edges() {
            if a[0] == b[0] {
                if a[1] != b[1] {
                    arcs.push((a[0], a[1].min(b[1]), a[1].max(b[1])));
                }
                continue;
            }
            let (dr, dp) = (b[0] - a[0], b[1] - a[1]);
            let mut cuts = vec![0.0, 1.0];
            cuts.extend(breaks.iter().map(|bp| (bp - a[0]) / dr).filter(|t| *t > 0.0 && *t < 1.0));
            cuts.sort_by(f64::total_cmp);
            for w in cuts.windows(2) {
                per += gl.integrate(w[0], w[1], panels, |t| {
                    let rho = a[0] + t * dr;
                    let phi = a[1] + t * dp;
                    rho * phi.sin() * d.value_axisym(rho, phi) * (dr * dr + rho * rho * dp * dp).sqrt()
                });
            }
        }
        // Arcs of constant ρ: overlapping pieces cancel in pairs (clipping seams).
        arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut i = 0;
        while i < arcs.len() {
            let rho = arcs[i].0;
            let mut j = i;
            let mut events = Vec::new();
            while j < arcs.len() && arcs[j].0 == rho {
                events.push(arcs[j].1);
                events.push(arcs[j].2);
                j += 1;
            }
            events.sort_by(f64::total_cmp);
            // Parity coverage: intervals between consecutive events alternate when
            // every arc start/end toggles the parity.
            let mut odd = false;
            for w in events.windows(2) {
                odd = !odd;
                if odd && w[1] > w[0] {
                    per += rho * rho * gl.integrate(w[0], w[1], panels, |phi| phi.sin() * d.value_axisym(rho, phi));
                }
            }
            i = j;
        }
        TAU * per
    }

    /// Weighted area of `S(r) ∩ E`.
    pub(crate) fn slice(&self, d: &Density, r: f64, res: usize) -> f64 {
        let mut xs: Vec<f64> = self
            .edges()
            .filter(|(a, b)| a[0] != b[0] && r >= a[0].min(b[0]) && r < a[0].max(b[0]))
            .map(|(a, b)| a[1] + (r - a[0]) / (b[0] - a[0]) * (b[1] - a[1]))
            .collect();
        xs.sort_by(f64::total_cmp);
        let gl = gl8();
        let panels = (res / 8).max(1);
        xs.chunks_exact(2)
            .map(|w| gl.integrate(w[0], w[1], panels, |phi| phi.sin() * d.value_axisym(r, phi)))
            .sum::<f64>()
            * TAU
            * r
            * r
    }

    /// Exact `E ∩ B(r)` by clipping the polygon against `ρ ≤ r`.
    pub(crate) fn truncate(&self, r: f64) -> Result<Self> {
        let v = &self.boundary;
        let k = v.len();
        let mut out: Vec<[f64; 2]> = Vec::new();
        for i in 0..k {
            let (a, b) = (v[i], v[(i + 1) % k]);
            let (ain, bin) = (a[0] <= r, b[0] <= r);
            if ain {
                out.push(a);
            }
            if ain != bin {
                let t = (r - a[0]) / (b[0] - a[0]);
                out.push([r, a[1] + t * (b[1] - a[1])]);
            }
        }
        out.dedup();
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        if out.len() < 3 {
            return Err(Error::Precondition("E ∩ B(r) is empty".into()));
        }
        let a = Self { boundary: out };
        if a.area_rho_phi().abs() <= 0.0 {
            return Err(Error::Precondition("E ∩ B(r) is empty".into()));
        }
        Ok(a)
    }

    /// Ball `B(D·e₁, b)` as a polygon with `nodes` boundary vertices.
    pub fn ball(dist: f64, b: f64, nodes: usize) -> Result<Self> {
        let nodes = nodes.max(8);
        let mut pts: Vec<[f64; 2]> = (0..=nodes)
            .map(|k| {
                let s = PI * k as f64 / nodes as f64;
                let (x1, x2) = (dist + b * s.cos(), b * s.sin());
                [x1.hypot(x2), x2.atan2(x1).abs()]
            })
            .collect();
        pts[nodes] = [(dist - b).abs(), if dist >= b { 0.0 } else { PI }];
        if dist < b {
            pts.push([0.0, PI]);
            pts.push([0.0, 0.0]);
        } else if dist == b {
            pts[nodes] = [0.0, 0.0];
        }
        pts.dedup();
        Self::new(pts)
    }

    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        let r = self.max_rho();
        let (mut lo1, mut hi1) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut max_sin: f64 = 0.0;
        for (a, b) in self.edges() {
            for j in 0..=16 {
                let t = j as f64 / 16.0;
                let rho = a[0] + t * (b[0] - a[0]);
                let phi = a[1] + t * (b[1] - a[1]);
                lo1 = lo1.min(rho * phi.cos());
                hi1 = hi1.max(rho * phi.cos());
                max_sin = max_sin.max(rho * phi.sin());
            }
        }
        let lat = max_sin.min(r) * 1.001;
        ([lo1, -lat, -lat], [hi1, lat, lat])
    }
}

/// `∫_{lo}^{hi} f(ρ, φ) ρ² dρ` split at radial breakpoints.
fn radial_piece(d: &Density, breaks: &[f64], phi: f64, lo: f64, hi: f64, panels: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let gl = gl8();
    let mut cuts = vec![lo, hi];
    cuts.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| gl.integrate(w[0], w[1], panels, |rho| rho * rho * d.value_axisym(rho, phi)))
        .sum()
}
