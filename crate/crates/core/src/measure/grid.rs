//! Indicator grids: cell sums for volume, marching squares / marching
//! tetrahedra on the vertex-averaged field for the interface.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{Error, Result};

/// Boolean cells on a regular lattice, `x` index fastest. Cell `(i, j, k)`
/// covers `origin + h·[i, i+1] × [j, j+1] × [k, k+1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorGrid {
    pub dim: usize,
    pub origin: Vec<f64>,
    pub h: f64,
    pub shape: Vec<usize>,
    #[serde(with = "cells_serde")]
    pub cells: Vec<bool>,
}

mod cells_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(cells: &[bool], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<u8> = cells.iter().map(|c| *c as u8).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let v: Vec<u8> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|c| c != 0).collect())
    }
}

/// One interface element: a segment (2D) or triangle (3D).
#[derive(Debug, Clone, Copy)]
pub struct Facet {
    pub point: [f64; 3],
    pub measure: f64,
}

#[derive(Serialize, Deserialize)]
struct MaskHeader {
    dims: Vec<usize>,
    h: f64,
    origin: Vec<f64>,
}

impl IndicatorGrid {
    pub fn new(origin: Vec<f64>, h: f64, shape: Vec<usize>, cells: Vec<bool>) -> Result<Self> {
        let g = Self { dim: shape.len(), origin, h, shape, cells };
        g.check_layout()?;
        Ok(g)
    }

    fn check_layout(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidRegion(format!("grid dimension must be 2 or 3, got {}", self.dim)));
        }
        if self.origin.len() != self.dim {
            return Err(Error::InvalidRegion("grid `origin` length differs from `shape` length".into()));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidRegion("grid `h` must be positive".into()));
        }
        if self.shape.contains(&0) {
            return Err(Error::InvalidRegion("grid `shape` entries must be positive".into()));
        }
        let n: usize = self.shape.iter().product();
        if n != self.cells.len() {
            return Err(Error::InvalidRegion(format!("grid has {} cells, shape implies {n}", self.cells.len())));
        }
        Ok(())
    }

    /// Layout checks plus the non-empty requirement of a region.
    pub fn validate(&self) -> Result<()> {
        self.check_layout()?;
        if !self.cells.iter().any(|c| *c) {
            return Err(Error::InvalidRegion("grid has no true cell".into()));
        }
        Ok(())
    }

    /// Grid whose cells are on where `pred(centre)` holds.
    pub fn from_predicate<F>(origin: Vec<f64>, h: f64, shape: Vec<usize>, pred: F) -> Self
    where
        F: Fn(&[f64]) -> bool + Sync,
    {
        let dim = shape.len();
        let nx = shape[0];
        let rows: usize = shape[1..].iter().product();
        let mut cells = vec![false; nx * rows];
        cells.par_chunks_mut(nx).enumerate().for_each(|(row, chunk)| {
            let mut x = vec![0.0; dim];
            let mut rem = row;
            for d in 1..dim {
                let i = rem % shape[d];
                rem /= shape[d];
                x[d] = origin[d] + (i as f64 + 0.5) * h;
            }
            for (i, c) in chunk.iter_mut().enumerate() {
                x[0] = origin[0] + (i as f64 + 0.5) * h;
                *c = pred(&x);
            }
        });
        Self { dim, origin, h, shape, cells }
    }

    /// Smallest lattice with step `h` covering the box `[lo, hi]`.
    pub fn covering(lo: &[f64], hi: &[f64], h: f64) -> (Vec<f64>, Vec<usize>) {
        let shape = lo.iter().zip(hi).map(|(a, b)| (((b - a) / h).ceil() as usize).max(1)).collect();
        (lo.to_vec(), shape)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|c| *c)
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn euclidean_volume(&self) -> f64 {
        self.count() as f64 * self.cell_volume()
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for d in 0..self.dim {
            out[d] = idx % self.shape[d];
            idx /= self.shape[d];
        }
        out
    }

    pub fn linear_index(&self, m: &[usize]) -> usize {
        let mut idx = 0;
        for d in (0..self.dim).rev() {
            idx = idx * self.shape[d] + m[d];
        }
        idx
    }

    pub fn center(&self, idx: usize) -> Vec<f64> {
        let m = self.multi_index(idx);
        (0..self.dim).map(|d| self.origin[d] + (m[d] as f64 + 0.5) * self.h).collect()
    }

    /// Cell containing `x`, if inside the lattice.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let mut m = [0usize; 3];
        for d in 0..self.dim {
            let t = ((x[d] - self.origin[d]) / self.h).floor();
            if t < 0.0 || t >= self.shape[d] as f64 {
                return None;
            }
            m[d] = t as usize;
        }
        Some(self.linear_index(&m[..self.dim]))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.cell_of(x).map(|i| self.cells[i]).unwrap_or(false)
    }

    /// Bounding box `(lo, hi)` of the lattice.
    pub fn extent(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = (0..self.dim).map(|d| self.origin[d] + self.shape[d] as f64 * self.h).collect();
        (self.origin.clone(), hi)
    }

    /// Same cells on a lattice enlarged by whole cells so that it covers `[lo, hi]`.
    pub fn padded_to_cover(&self, lo: &[f64], hi: &[f64]) -> Self {
        let mut before = vec![0usize; self.dim];
        let mut shape = self.shape.clone();
        let mut origin = self.origin.clone();
        for d in 0..self.dim {
            let b = ((self.origin[d] - lo[d]) / self.h).ceil().max(0.0) as usize;
            let top = self.origin[d] + self.shape[d] as f64 * self.h;
            let a = ((hi[d] - top) / self.h).ceil().max(0.0) as usize;
            before[d] = b;
            shape[d] += a + b;
            origin[d] -= b as f64 * self.h;
        }
        let mut out = Self { dim: self.dim, origin, h: self.h, shape, cells: vec![false; 0] };
        out.cells = vec![false; out.shape.iter().product()];
        for (i, c) in self.cells.iter().enumerate() {
            if *c {
                let m = self.multi_index(i);
                let mut mm = [0usize; 3];
                for d in 0..self.dim {
                    mm[d] = m[d] + before[d];
                }
                let j = out.linear_index(&mm[..self.dim]);
                out.cells[j] = true;
            }
        }
        out
    }

    /// Twice-coarser grid; a coarse cell is on when at least half of its
    /// existing sub-cells are on.
    pub fn coarsen(&self) -> Self {
        let shape: Vec<usize> = self.shape.iter().map(|s| s.div_ceil(2)).collect();
        let n: usize = shape.iter().product();
        let mut on = vec![0u8; n];
        let mut tot = vec![0u8; n];
        for (i, c) in self.cells.iter().enumerate() {
            let m = self.multi_index(i);
            let mut idx = 0;
            for d in (0..self.dim).rev() {
                idx = idx * shape[d] + m[d] / 2;
            }
            tot[idx] += 1;
            on[idx] += *c as u8;
        }
        let cells = on.iter().zip(&tot).map(|(a, t)| *a > 0 && 2 * *a >= *t).collect();
        Self { dim: self.dim, origin: self.origin.clone(), h: 2.0 * self.h, shape, cells }
    }

    /// Cell-wise union; both grids must share the lattice.
    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_lattice(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(a, b)| *a || *b).collect();
        Ok(Self { cells, ..self.clone() })
    }

    pub fn same_lattice(&self, other: &Self) -> Result<()> {
        let close = self.origin.iter().zip(&other.origin).all(|(a, b)| (a - b).abs() <= 1e-9 * self.h);
        if self.shape != other.shape || (self.h - other.h).abs() > 1e-12 * self.h || !close {
            return Err(Error::InvalidRegion("grids do not share a lattice".into()));
        }
        Ok(())
    }

    /// `Σ f(centre)·hⁿ` over the on cells, reduced in a fixed order.
    pub fn weighted_volume(&self, d: &Density) -> f64 {
        let nx = self.shape[0];
        let cv = self.cell_volume();
        let partial: Vec<f64> = self
            .cells
            .par_chunks(nx)
            .enumerate()
            .map(|(row, chunk)| {
                let mut s = 0.0;
                let mut x = vec![0.0; self.dim];
                let base = row * nx;
                for (i, c) in chunk.iter().enumerate() {
                    if *c {
                        let m = self.multi_index(base + i);
                        for k in 0..self.dim {
                            x[k] = self.origin[k] + (m[k] as f64 + 0.5) * self.h;
                        }
                        s += d.value(&x);
                    }
                }
                s
            })
            .collect();
        partial.iter().sum::<f64>() * cv
    }

    /// Padded cell occupancy with a one-cell empty margin.
    fn padded(&self) -> (Vec<u8>, [usize; 3]) {
        let mut ps = [1usize; 3];
        for d in 0..self.dim {
            ps[d] = self.shape[d] + 2;
        }
        let mut out = vec![0u8; ps[0] * ps[1] * ps[2]];
        for (i, c) in self.cells.iter().enumerate() {
            if *c {
                let m = self.multi_index(i);
                let (a, b, cc) = (m[0] + 1, m[1] + 1, if self.dim == 3 { m[2] + 1 } else { 0 });
                out[(cc * ps[1] + b) * ps[0] + a] = 1;
            }
        }
        (out, ps)
    }

    /// Vertex counts: number of on cells among the `2ⁿ` cells around each
    /// vertex of the padded lattice. Vertex `v` sits at `origin + (v − 1)·h`.
    fn vertex_counts(&self) -> (Vec<u8>, [usize; 3]) {
        let (p, ps) = self.padded();
        let mut vs = [1usize; 3];
        for d in 0..self.dim {
            vs[d] = ps[d] + 1;
        }
        let at = |a: isize, b: isize, c: isize| -> u8 {
            if a < 0 || b < 0 || c < 0 || a as usize >= ps[0] || b as usize >= ps[1] || c as usize >= ps[2] {
                0
            } else {
                p[(c as usize * ps[1] + b as usize) * ps[0] + a as usize]
            }
        };
        let mut v = vec![0u8; vs[0] * vs[1] * vs[2]];
        let dz: &[isize] = if self.dim == 3 { &[-1, 0] } else { &[0] };
        v.par_chunks_mut(vs[0]).enumerate().for_each(|(row, chunk)| {
            let j = (row % vs[1]) as isize;
            let k = (row / vs[1]) as isize;
            for (i, out) in chunk.iter_mut().enumerate() {
                let i = i as isize;
                let mut s = 0;
                for &c in dz {
                    for b in [-1, 0] {
                        for a in [-1, 0] {
                            s += at(i + a, j + b, k + c);
                        }
                    }
                }
                *out = s;
            }
        });
        (v, vs)
    }

    /// Interface elements of the reconstructed boundary.
    pub fn facets(&self) -> Vec<Facet> {
        match self.dim {
            2 => self.facets_2d(),
            _ => self.facets_3d(),
        }
    }

    fn facets_2d(&self) -> Vec<Facet> {
        let (v, vs) = self.vertex_counts();
        let (p, ps) = self.padded();
        let h = self.h;
        let (ox, oy) = (self.origin[0] - h, self.origin[1] - h);
        let full = 4u8;
        let rows: Vec<Vec<Facet>> = (0..ps[1])
            .into_par_iter()
            .map(|j| {
                let mut out = Vec::new();
                for i in 0..ps[0] {
                    let c = [
                        v[j * vs[0] + i],
                        v[j * vs[0] + i + 1],
                        v[(j + 1) * vs[0] + i + 1],
                        v[(j + 1) * vs[0] + i],
                    ];
                    let inside = c.map(|x| 2 * x >= full);
                    if inside.iter().all(|b| *b) || inside.iter().all(|b| !*b) {
                        continue;
                    }
                    let pos = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                    let mut cross = [[0.0f64; 2]; 4];
                    let mut has = [false; 4];
                    for e in 0..4 {
                        let (a, b) = (e, (e + 1) % 4);
                        if inside[a] != inside[b] {
                            let (va, vb) = (c[a] as f64 / full as f64, c[b] as f64 / full as f64);
                            let t = (0.5 - va) / (vb - va);
                            let pa = [ox + pos[a].0 as f64 * h, oy + pos[a].1 as f64 * h];
                            let pb = [ox + pos[b].0 as f64 * h, oy + pos[b].1 as f64 * h];
                            cross[e] = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                            has[e] = true;
                        }
                    }
                    let n = has.iter().filter(|b| **b).count();
                    let mut push = |e0: usize, e1: usize| {
                        let (a, b) = (cross[e0], cross[e1]);
                        let len = (a[0] - b[0]).hypot(a[1] - b[1]);
                        if len > 0.0 {
                            out.push(Facet { point: [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, 0.0], measure: len });
                        }
                    };
                    if n == 2 {
                        let e: Vec<usize> = (0..4).filter(|e| has[*e]).collect();
                        push(e[0], e[1]);
                    } else {
                        // Saddle: decided by the cell itself.
                        let centre_in = p[j * ps[0] + i] == 1;
                        if inside[0] == centre_in {
                            push(0, 1);
                            push(2, 3);
                        } else {
                            push(3, 0);
                            push(1, 2);
                        }
                    }
                }
                out
            })
            .collect();
        rows.into_iter().flatten().collect()
    }

    fn facets_3d(&self) -> Vec<Facet> {
        let (v, vs) = self.vertex_counts();
        let (_, ps) = self.padded();
        let h = self.h;
        let o = [self.origin[0] - h, self.origin[1] - h, self.origin[2] - h];
        let full = 8u8;
        // Kuhn subdivision: tetrahedra along the main diagonal, one per axis order.
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let slabs: Vec<Vec<Facet>> = (0..ps[2])
            .into_par_iter()
            .map(|k| {
                let mut out = Vec::new();
                let vid = |a: usize, b: usize, c: usize| (c * vs[1] + b) * vs[0] + a;
                for j in 0..ps[1] {
                    for i in 0..ps[0] {
                        let mut cmin = u8::MAX;
                        let mut cmax = 0u8;
                        for dc in 0..2 {
                            for db in 0..2 {
                                for da in 0..2 {
                                    let x = v[vid(i + da, j + db, k + dc)];
                                    cmin = cmin.min(x);
                                    cmax = cmax.max(x);
                                }
                            }
                        }
                        if 2 * cmax < full || 2 * cmin >= full {
                            continue;
                        }
                        for perm in PERMS {
                            let mut corner = [[0usize; 3]; 4];
                            let mut cur = [i, j, k];
                            corner[0] = cur;
                            for (s, ax) in perm.iter().enumerate() {
                                cur[*ax] += 1;
                                corner[s + 1] = cur;
                            }
                            let vals = corner.map(|c| v[vid(c[0], c[1], c[2])]);
                            let pts = corner.map(|c| [o[0] + c[0] as f64 * h, o[1] + c[1] as f64 * h, o[2] + c[2] as f64 * h]);
                            tet_facets(&vals, &pts, full, &mut out);
                        }
                    }
                }
                out
            })
            .collect();
        slabs.into_iter().flatten().collect()
    }

    /// Weighted interface measure `Σ f(centre)·|facet|`.
    pub fn weighted_perimeter(&self, d: &Density) -> f64 {
        let facets = self.facets();
        let partial: Vec<f64> = facets
            .par_chunks(4096)
            .map(|ch| ch.iter().map(|f| f.measure * d.value(&f.point[..self.dim])).sum::<f64>())
            .collect();
        partial.iter().sum()
    }

    pub fn euclidean_perimeter(&self) -> f64 {
        let facets = self.facets();
        facets.iter().map(|f| f.measure).sum()
    }

    /// Gaussian-blurred indicator, used only for interface normals.
    pub fn blurred(&self, sigma_cells: f64) -> Vec<f64> {
        let rad = (4.0 * sigma_cells).ceil() as isize;
        let kernel: Vec<f64> = (-rad..=rad).map(|i| (-(i * i) as f64 / (2.0 * sigma_cells * sigma_cells)).exp()).collect();
        let ks: f64 = kernel.iter().sum();
        let kernel: Vec<f64> = kernel.iter().map(|k| k / ks).collect();
        let mut field: Vec<f64> = self.cells.iter().map(|c| *c as u8 as f64).collect();
        let mut stride = 1usize;
        for d in 0..self.dim {
            let n = self.shape[d];
            let mut out = vec![0.0; field.len()];
            for (idx, o) in out.iter_mut().enumerate() {
                let m = (idx / stride) % n;
                let mut s = 0.0;
                for (q, kv) in kernel.iter().enumerate() {
                    let mm = m as isize + q as isize - rad;
                    if mm >= 0 && (mm as usize) < n {
                        let j = idx as isize + (mm - m as isize) * stride as isize;
                        s += kv * field[j as usize];
                    }
                }
                *o = s;
            }
            field = out;
            stride *= n;
        }
        field
    }

    /// Multilinear interpolation of a cell-centred field at `x`.
    pub fn interpolate(&self, field: &[f64], x: &[f64]) -> f64 {
        let mut base = [0isize; 3];
        let mut frac = [0.0f64; 3];
        for d in 0..self.dim {
            let t = (x[d] - self.origin[d]) / self.h - 0.5;
            let b = t.floor();
            base[d] = b as isize;
            frac[d] = t - b;
        }
        let corners = 1usize << self.dim;
        let mut s = 0.0;
        for c in 0..corners {
            let mut w = 1.0;
            let mut m = [0usize; 3];
            let mut ok = true;
            for d in 0..self.dim {
                let bit = (c >> d) & 1;
                let idx = base[d] + bit as isize;
                w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                if idx < 0 || idx as usize >= self.shape[d] {
                    ok = false;
                } else {
                    m[d] = idx as usize;
                }
            }
            if ok && w != 0.0 {
                s += w * field[self.linear_index(&m[..self.dim])];
            }
        }
        s
    }

    /// Value of the vertex-averaged field (the field the interface is drawn
    /// from) at `x`, by multilinear interpolation between lattice vertices.
    pub fn vertex_field_sampler(&self) -> VertexSampler {
        let (v, vs) = self.vertex_counts();
        VertexSampler {
            dim: self.dim,
            origin: (0..self.dim).map(|d| self.origin[d] - self.h).collect(),
            h: self.h,
            vs,
            v,
            full: if self.dim == 2 { 4.0 } else { 8.0 },
        }
    }

    /// Flat mask: one JSON header line, `\n`, then one byte per cell.
    pub fn to_mask_bytes(&self) -> Vec<u8> {
        let header = MaskHeader { dims: self.shape.clone(), h: self.h, origin: self.origin.clone() };
        let mut out = serde_json::to_vec(&header).expect("mask header serializes");
        out.push(b'\n');
        out.extend(self.cells.iter().map(|c| *c as u8));
        out
    }

    pub fn from_mask_bytes(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|b| *b == b'\n')
            .ok_or_else(|| Error::InvalidRegion("mask file: missing header line".into()))?;
        let header: MaskHeader = serde_json::from_slice(&bytes[..nl])
            .map_err(|e| Error::InvalidRegion(format!("mask header: {e}")))?;
        let cells: Vec<bool> = bytes[nl + 1..].iter().map(|b| *b != 0).collect();
        Self::new(header.origin, header.h, header.dims, cells)
    }
}

/// Interpolates the vertex-averaged indicator (values in `[0, 1]`).
pub struct VertexSampler {
    dim: usize,
    origin: Vec<f64>,
    h: f64,
    vs: [usize; 3],
    v: Vec<u8>,
    full: f64,
}

impl VertexSampler {
    pub fn value(&self, x: &[f64]) -> f64 {
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for d in 0..self.dim {
            let t = (x[d] - self.origin[d]) / self.h;
            if t < 0.0 || t >= (self.vs[d] - 1) as f64 {
                return 0.0;
            }
            let b = t.floor();
            base[d] = b as usize;
            frac[d] = t - b;
        }
        let mut s = 0.0;
        for c in 0..(1usize << self.dim) {
            let mut w = 1.0;
            let mut idx = 0usize;
            for d in (0..self.dim).rev() {
                let bit = (c >> d) & 1;
                w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                idx = idx * self.vs[d] + base[d] + bit;
            }
            if w != 0.0 {
                s += w * self.v[idx] as f64;
            }
        }
        s / self.full
    }

    /// `value(x) ≥ ½` for a two-dimensional field.
    #[inline]
    pub fn inside_2d(&self, x: f64, y: f64) -> bool {
        let tx = (x - self.origin[0]) / self.h;
        let ty = (y - self.origin[1]) / self.h;
        if !(tx >= 0.0 && ty >= 0.0 && tx < (self.vs[0] - 1) as f64 && ty < (self.vs[1] - 1) as f64) {
            return false;
        }
        let (bx, by) = (tx as usize, ty as usize);
        let (fx, fy) = (tx - bx as f64, ty - by as f64);
        let i = by * self.vs[0] + bx;
        let v = &self.v;
        let row0 = v[i] as f64 * (1.0 - fx) + v[i + 1] as f64 * fx;
        let row1 = v[i + self.vs[0]] as f64 * (1.0 - fx) + v[i + self.vs[0] + 1] as f64 * fx;
        2.0 * (row0 * (1.0 - fy) + row1 * fy) >= self.full
    }
}

fn tet_facets(vals: &[u8; 4], pts: &[[f64; 3]; 4], full: u8, out: &mut Vec<Facet>) {
    let inside = vals.map(|x| 2 * x >= full);
    let n_in = inside.iter().filter(|b| **b).count();
    if n_in == 0 || n_in == 4 {
        return;
    }
    let cross = |a: usize, b: usize| -> [f64; 3] {
        let (va, vb) = (vals[a] as f64 / full as f64, vals[b] as f64 / full as f64);
        let t = (0.5 - va) / (vb - va);
        [
            pts[a][0] + t * (pts[b][0] - pts[a][0]),
            pts[a][1] + t * (pts[b][1] - pts[a][1]),
            pts[a][2] + t * (pts[b][2] - pts[a][2]),
        ]
    };
    let ins: Vec<usize> = (0..4).filter(|i| inside[*i]).collect();
    let outs: Vec<usize> = (0..4).filter(|i| !inside[*i]).collect();
    let mut tri = |a: [f64; 3], b: [f64; 3], c: [f64; 3]| {
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let cr = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
        let area = 0.5 * (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
        if area > 0.0 {
            let p = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0, (a[2] + b[2] + c[2]) / 3.0];
            out.push(Facet { point: p, measure: area });
        }
    };
    match n_in {
        1 | 3 => {
            let (s, others) = if n_in == 1 { (ins[0], outs) } else { (outs[0], ins) };
            tri(cross(s, others[0]), cross(s, others[1]), cross(s, others[2]));
        }
        _ => {
            let (a0, a1, b0, b1) = (ins[0], ins[1], outs[0], outs[1]);
            let p00 = cross(a0, b0);
            let p01 = cross(a0, b1);
            let p11 = cross(a1, b1);
            let p10 = cross(a1, b0);
            tri(p00, p01, p11);
            tri(p00, p11, p10);
        }
    }
}
