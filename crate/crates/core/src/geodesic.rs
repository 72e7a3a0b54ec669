//! Shortest paths in the plane for the conformal length `∫ f(τ)|τ′|`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::density::Density;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub vertices: Vec<[f64; 2]>,
    pub weighted_length: f64,
    /// Grid step; [`path_length`] subdivides segments to `h/4`.
    pub h: f64,
}

impl Path {
    pub fn new(vertices: Vec<[f64; 2]>, d: &Density, h: f64) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Config("a path needs at least 2 vertices".into()));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Config(format!("grid step must be positive, got {h}")));
        }
        let weighted_length = polyline_length(&vertices, d, h);
        Ok(Self { vertices, weighted_length, h })
    }

    /// `(x, y, cumulative weighted length)` per vertex.
    pub fn rows(&self, d: &Density) -> Vec<[f64; 3]> {
        let mut acc = 0.0;
        let mut out = vec![[self.vertices[0][0], self.vertices[0][1], 0.0]];
        for w in self.vertices.windows(2) {
            acc += segment_length(w[0], w[1], d, self.h);
            out.push([w[1][0], w[1][1], acc]);
        }
        out
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Midpoint rule on pieces no longer than `h/4`.
fn segment_length(a: [f64; 2], b: [f64; 2], d: &Density, h: f64) -> f64 {
    let l = dist(a, b);
    if l == 0.0 {
        return 0.0;
    }
    let k = (4.0 * l / h).ceil().max(1.0) as usize;
    let step = 1.0 / k as f64;
    let mut s = 0.0;
    for i in 0..k {
        let t = (i as f64 + 0.5) * step;
        s += d.value(&[a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
    s * l * step
}

fn polyline_length(v: &[[f64; 2]], d: &Density, h: f64) -> f64 {
    v.windows(2).map(|w| segment_length(w[0], w[1], d, h)).sum()
}

/// Weighted length of `p` (midpoint density times Euclidean length, segments
/// split to `h/4`).
pub fn path_length(p: &Path, d: &Density) -> f64 {
    polyline_length(&p.vertices, d, p.h)
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

const STENCIL: [(i64, i64); 16] = [
    (1, 0), (-1, 0), (0, 1), (0, -1),
    (1, 1), (1, -1), (-1, 1), (-1, -1),
    (1, 2), (2, 1), (-1, 2), (-2, 1),
    (1, -2), (2, -1), (-1, -2), (-2, -1),
];

/// Axis-aligned search box `[lo, hi]`.
pub type SearchBox = ([f64; 2], [f64; 2]);

/// Square of side three times the extent of `{P, Q, O}`, about its centre.
pub fn auto_box(p: [f64; 2], q: [f64; 2]) -> SearchBox {
    let xs = [p[0], q[0], 0.0];
    let ys = [p[1], q[1], 0.0];
    let lo = [xs.iter().copied().fold(f64::INFINITY, f64::min), ys.iter().copied().fold(f64::INFINITY, f64::min)];
    let hi = [xs.iter().copied().fold(f64::NEG_INFINITY, f64::max), ys.iter().copied().fold(f64::NEG_INFINITY, f64::max)];
    let half = 1.5 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    ([c[0] - half, c[1] - half], [c[0] + half, c[1] + half])
}

pub fn shortest_path(p: [f64; 2], q: [f64; 2], d: &Density, h: f64) -> Result<Path> {
    shortest_path_in(p, q, d, h, auto_box(p, q))
}

/// 16-neighbour grid Dijkstra followed by shortcutting and vertex relaxation.
pub fn shortest_path_in(p: [f64; 2], q: [f64; 2], d: &Density, h: f64, bx: SearchBox) -> Result<Path> {
    if d.dim() != 2 {
        return Err(Error::Config("geodesics are computed in the plane".into()));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Config(format!("grid step must be positive, got {h}")));
    }
    if p == q {
        return Err(Error::Config("endpoints coincide".into()));
    }
    let (lo, hi) = bx;
    let inside = |x: [f64; 2]| (0..2).all(|i| x[i] >= lo[i] && x[i] <= hi[i]);
    if !inside(p) || !inside(q) {
        return Err(Error::Config("endpoint outside the search box".into()));
    }
    let nx = ((hi[0] - lo[0]) / h).round() as i64 + 1;
    let ny = ((hi[1] - lo[1]) / h).round() as i64 + 1;
    if nx * ny > 50_000_000 {
        return Err(Error::Config(format!("grid of {nx}×{ny} nodes is too large; raise h")));
    }
    let node = |i: i64, j: i64| [lo[0] + i as f64 * h, lo[1] + j as f64 * h];
    let snap = |x: [f64; 2]| -> (i64, i64) {
        (((x[0] - lo[0]) / h).round().clamp(0.0, (nx - 1) as f64) as i64, ((x[1] - lo[1]) / h).round().clamp(0.0, (ny - 1) as f64) as i64)
    };
    let (si, sj) = snap(p);
    let (ti, tj) = snap(q);
    let idx = |i: i64, j: i64| (j * nx + i) as usize;
    let mut best = vec![f64::INFINITY; (nx * ny) as usize];
    let mut prev = vec![usize::MAX; (nx * ny) as usize];
    let mut heap = BinaryHeap::new();
    let start = idx(si, sj);
    let target = idx(ti, tj);
    best[start] = 0.0;
    heap.push(Item(0.0, start));
    while let Some(Item(c, k)) = heap.pop() {
        if k == target {
            break;
        }
        if c > best[k] {
            continue;
        }
        let (i, j) = (k as i64 % nx, k as i64 / nx);
        let x = node(i, j);
        for (di, dj) in STENCIL {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= nx || b >= ny {
                continue;
            }
            let y = node(a, b);
            let w = d.value(&[0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])]) * dist(x, y);
            let m = idx(a, b);
            if c + w < best[m] {
                best[m] = c + w;
                prev[m] = k;
                heap.push(Item(c + w, m));
            }
        }
    }
    if !best[target].is_finite() {
        return Err(Error::Numeric("target unreachable on the grid".into()));
    }
    let mut chain = vec![target];
    while *chain.last().unwrap() != start {
        chain.push(prev[*chain.last().unwrap()]);
    }
    chain.reverse();
    let mut v: Vec<[f64; 2]> = Vec::with_capacity(chain.len() + 2);
    v.push(p);
    for k in &chain[1..chain.len().saturating_sub(1)] {
        v.push(node(*k as i64 % nx, *k as i64 / nx));
    }
    v.push(q);
    let v = shortcut(v, d, h);
    let v = relax(v, d, h);
    Path::new(v, d, h)
}

/// Greedy shortcutting: from each kept vertex jump to the furthest vertex
/// whose direct segment is no longer than the path it replaces.
fn shortcut(v: Vec<[f64; 2]>, d: &Density, h: f64) -> Vec<[f64; 2]> {
    let mut out = vec![v[0]];
    let mut i = 0;
    while i < v.len() - 1 {
        let mut best = i + 1;
        let mut along = 0.0;
        for k in i + 1..v.len().min(i + 256) {
            along += segment_length(v[k - 1], v[k], d, h);
            if segment_length(v[i], v[k], d, h) <= along * (1.0 + 1e-12) {
                best = k;
            }
        }
        out.push(v[best]);
        i = best;
    }
    out
}

/// Subdivides to pieces of at most `4h` and moves interior vertices along the
/// local normal while that lowers the weighted length.
fn relax(v: Vec<[f64; 2]>, d: &Density, h: f64) -> Vec<[f64; 2]> {
    let mut pts = vec![v[0]];
    for w in v.windows(2) {
        let k = (dist(w[0], w[1]) / (4.0 * h)).ceil().max(1.0) as usize;
        for s in 1..=k {
            let t = s as f64 / k as f64;
            pts.push([w[0][0] + t * (w[1][0] - w[0][0]), w[0][1] + t * (w[1][1] - w[0][1])]);
        }
    }
    let local = |a: [f64; 2], x: [f64; 2], b: [f64; 2]| segment_length(a, x, d, h) + segment_length(x, b, d, h);
    for _ in 0..40 {
        let mut moved = 0.0f64;
        for i in 1..pts.len().saturating_sub(1) {
            let (a, b) = (pts[i - 1], pts[i + 1]);
            let t = [b[0] - a[0], b[1] - a[1]];
            let l = t[0].hypot(t[1]);
            if l == 0.0 {
                continue;
            }
            let n = [-t[1] / l, t[0] / l];
            let x0 = pts[i];
            let at = |s: f64| [x0[0] + s * n[0], x0[1] + s * n[1]];
            let f0 = local(a, x0, b);
            // Golden-section search on [−h, h].
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut lo, mut hi) = (-h, h);
            let (mut c, mut e) = (hi - g * (hi - lo), lo + g * (hi - lo));
            let (mut fc, mut fe) = (local(a, at(c), b), local(a, at(e), b));
            for _ in 0..30 {
                if fc < fe {
                    hi = e;
                    e = c;
                    fe = fc;
                    c = hi - g * (hi - lo);
                    fc = local(a, at(c), b);
                } else {
                    lo = c;
                    c = e;
                    fc = fe;
                    e = lo + g * (hi - lo);
                    fe = local(a, at(e), b);
                }
            }
            let s = 0.5 * (lo + hi);
            if local(a, at(s), b) < f0 {
                pts[i] = at(s);
                moved = moved.max(s.abs());
            }
        }
        if moved < 1e-6 * h {
            break;
        }
    }
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub max_violation: f64,
    pub holds: bool,
    /// O, P, Q collinear; the segment PQ stands in for the triangle.
    pub degenerate: bool,
}

fn point_segment(x: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if l2 == 0.0 { 0.0 } else { (((x[0] - a[0]) * ab[0] + (x[1] - a[1]) * ab[1]) / l2).clamp(0.0, 1.0) };
    dist(x, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Distance from `x` to the closed triangle `abc` (zero inside).
fn outside_triangle(x: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let s = cross(a, b, c).signum();
    let inside = [(a, b), (b, c), (c, a)].iter().all(|(u, v)| cross(*u, *v, x) * s >= 0.0);
    if inside {
        0.0
    } else {
        point_segment(x, a, b).min(point_segment(x, b, c)).min(point_segment(x, c, a))
    }
}

/// Largest distance of path vertices outside the triangle `OPQ`; holds when
/// at most `2h`.
pub fn triangle_containment_check(path: &Path, p: [f64; 2], q: [f64; 2]) -> Result<ContainmentReport> {
    let (first, last) = (path.vertices[0], *path.vertices.last().unwrap());
    if dist(first, p) > path.h || dist(last, q) > path.h {
        return Err(Error::Precondition("path endpoints must be P and Q".into()));
    }
    let o = [0.0, 0.0];
    let scale = dist(o, p).max(dist(o, q)).max(dist(p, q));
    let degenerate = cross(o, p, q).abs() <= 1e-12 * scale * scale;
    let max_violation = path
        .vertices
        .iter()
        .map(|x| if degenerate { point_segment(*x, p, q) } else { outside_triangle(*x, o, p, q) })
        .fold(0.0, f64::max);
    Ok(ContainmentReport { max_violation, holds: max_violation <= 2.0 * path.h, degenerate })
}

/// Largest distance of path vertices beyond the line `PQ` on the side away
/// from the origin.
pub fn half_plane_violation(path: &Path, p: [f64; 2], q: [f64; 2]) -> f64 {
    let l = dist(p, q);
    let side = cross(p, q, [0.0, 0.0]);
    path.vertices
        .iter()
        .map(|x| {
            let s = cross(p, q, *x) / l;
            if side >= 0.0 { (-s).max(0.0) } else { s.max(0.0) }
        })
        .fold(0.0, f64::max)
}

/// Nearest point of the closed disk `B(c, r)`.
pub fn project_to_disk(x: [f64; 2], c: [f64; 2], r: f64) -> [f64; 2] {
    let l = dist(x, c);
    if l <= r {
        x
    } else {
        let s = r / l;
        [c[0] + s * (x[0] - c[0]), c[1] + s * (x[1] - c[1])]
    }
}
