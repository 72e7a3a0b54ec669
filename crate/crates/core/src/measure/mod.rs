//! Weighted volume, perimeter, slices and mean density over four region
//! representations.

mod axisym;
mod ball;
mod grid;
mod polar;

pub use axisym::Axisymmetric;
pub use ball::{cap_measure, sphere_area};
pub use grid::{Facet, IndicatorGrid, VertexSampler};
pub use polar::PolarGraph;

pub(crate) use ball::{ball_samples, gl8, radial_breaks};
pub(crate) use polar::{angular_intervals, arc_weight};

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::density::{classify, Density, SamplingSpec, Verdict};
use crate::error::{Error, Result};
use crate::quadrature::{dist, error_estimate, norm, sphere_directions, unit_ball_volume};

/// Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        let b = Self { center, radius };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.center.len() < 2 || self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidRegion("ball `center` must be a finite point of dimension ≥ 2".into()));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidRegion(format!("ball `radius` must be positive, got {}", self.radius)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn euclidean_volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32)
    }

    pub fn euclidean_perimeter(&self) -> f64 {
        sphere_area(self.dim()) * self.radius.powi(self.dim() as i32 - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Ball(Ball),
    PolarGraph(PolarGraph),
    Axisymmetric(Axisymmetric),
    #[serde(alias = "grid")]
    IndicatorGrid(IndicatorGrid),
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ok(Region::Ball(Ball::new(center, radius)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball(b) => b.dim(),
            Region::PolarGraph(_) => 2,
            Region::Axisymmetric(_) => 3,
            Region::IndicatorGrid(g) => g.dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Ball(b) => b.validate(),
            Region::PolarGraph(g) => g.validate(),
            Region::Axisymmetric(a) => a.validate(),
            Region::IndicatorGrid(g) => g.validate(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Region::Ball(_) => "ball",
            Region::PolarGraph(_) => "polar_graph",
            Region::Axisymmetric(_) => "axisymmetric",
            Region::IndicatorGrid(_) => "indicator_grid",
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball(b) => dist(x, &b.center) <= b.radius,
            Region::PolarGraph(g) => g.contains(x),
            Region::Axisymmetric(a) => a.contains(x),
            Region::IndicatorGrid(g) => g.contains(x),
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Ball(b) => (
                b.center.iter().map(|c| c - b.radius).collect(),
                b.center.iter().map(|c| c + b.radius).collect(),
            ),
            Region::PolarGraph(g) => {
                let (lo, hi) = g.bounding_box();
                (lo.to_vec(), hi.to_vec())
            }
            Region::Axisymmetric(a) => {
                let (lo, hi) = a.bounding_box();
                (lo.to_vec(), hi.to_vec())
            }
            Region::IndicatorGrid(g) => g.extent(),
        }
    }

    /// Cell-centre rasterisation on a lattice of step `h` covering the region.
    pub fn rasterize(&self, h: f64) -> IndicatorGrid {
        if let Region::IndicatorGrid(g) = self {
            return g.clone();
        }
        let (lo, hi) = self.bounding_box();
        let lo: Vec<f64> = lo.iter().map(|v| v - 2.0 * h).collect();
        let hi: Vec<f64> = hi.iter().map(|v| v + 2.0 * h).collect();
        let (origin, shape) = IndicatorGrid::covering(&lo, &hi, h);
        IndicatorGrid::from_predicate(origin, h, shape, |x| self.contains(x))
    }

    /// Largest distance from the origin to a point of the region.
    fn max_norm(&self) -> f64 {
        match self {
            Region::Ball(b) => norm(&b.center) + b.radius,
            Region::PolarGraph(g) => g.max_norm(),
            Region::Axisymmetric(a) => a.max_rho(),
            Region::IndicatorGrid(g) => g
                .cells
                .iter()
                .enumerate()
                .filter(|(_, c)| **c)
                .map(|(i, _)| norm(&g.center(i)))
                .fold(0.0, f64::max),
        }
    }

    /// Region of points within `r` of the origin, if non-empty.
    fn min_norm_bound(&self) -> f64 {
        match self {
            Region::Ball(b) => (norm(&b.center) - b.radius).max(0.0),
            Region::Axisymmetric(a) => a.min_rho(),
            _ => 0.0,
        }
    }
}

/// Weighted volume and perimeter with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureReport {
    pub volume: f64,
    pub perimeter: f64,
    /// Larger of the volume and perimeter error estimates.
    pub quadrature_error: f64,
    pub volume_error: f64,
    pub perimeter_error: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallStats {
    pub ball: Region,
    pub volume: f64,
    pub perimeter: f64,
    pub mean_density: f64,
    pub rho_min: f64,
    pub rho_sup: f64,
    pub quadrature_error: f64,
}

impl BallStats {
    /// The sandwich bounds `(ρ_min^n/ρ_sup^{n-1}, ρ_sup^n/ρ_min^{n-1})`.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.ball.dim() as i32;
        (sandwich(self.rho_min, self.rho_sup, n), sandwich(self.rho_sup, self.rho_min, n))
    }
}

/// `x·(x/y)^{n-1}`; monotone in `x` and `y` under rounding.
fn sandwich(x: f64, y: f64, n: i32) -> f64 {
    x * (x / y).powi(n - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceProfile {
    pub radii: Vec<f64>,
    pub areas: Vec<f64>,
}

impl SliceProfile {
    /// Trapezoid integral of the profile over its radii.
    pub fn trapezoid(&self) -> f64 {
        self.radii
            .windows(2)
            .zip(self.areas.windows(2))
            .map(|(r, a)| 0.5 * (r[1] - r[0]) * (a[0] + a[1]))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    pub perimeter: f64,
    pub truncated_perimeter: f64,
    pub volume: f64,
    pub truncated_volume: f64,
    pub tolerance: f64,
    pub strict_drop: bool,
    /// Sampled monotonicity verdict of the density (the caller's precondition).
    pub nondecreasing: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExteriorReport {
    pub lhs: f64,
    pub rhs: f64,
    pub c: f64,
    /// `H^{n-1}(∂F ∖ S(r))`.
    pub free_boundary: f64,
    /// `H^{n-1}(∂F ∩ S(r))`.
    pub contact_boundary: f64,
    pub tolerance: f64,
    pub holds: bool,
}

pub const MIN_RES: usize = 16;

fn check_inputs(e: &Region, d: &Density, res: usize) -> Result<()> {
    e.validate()?;
    if e.dim() != d.dim() {
        return Err(Error::InvalidRegion(format!("region has dimension {}, density {}", e.dim(), d.dim())));
    }
    if res < MIN_RES {
        return Err(Error::Config(format!("res must be at least {MIN_RES}, got {res}")));
    }
    if let Region::Axisymmetric(_) = e {
        if !d.is_axisymmetric() {
            return Err(Error::Config("axisymmetric regions need a density symmetric about the x₁ axis".into()));
        }
    }
    Ok(())
}

fn raw_measures(e: &Region, d: &Density, res: usize) -> Result<(f64, f64)> {
    Ok(match e {
        Region::Ball(b) => ball::ball_measures(&b.center, b.radius, d, res)?,
        Region::PolarGraph(g) => g.measures(d, res),
        Region::Axisymmetric(a) => a.measures(d, res),
        Region::IndicatorGrid(g) => (g.weighted_volume(d), g.weighted_perimeter(d)),
    })
}

/// Weighted volume and perimeter. Quadrature regions are compared against
/// `res/2`; grids against a twice-coarser grid for the interface and the
/// cell-midpoint bound `(h/2)·P_f` for the volume.
pub fn measure(e: &Region, d: &Density, res: usize) -> Result<MeasureReport> {
    check_inputs(e, d, res)?;
    let (volume, perimeter) = raw_measures(e, d, res)?;
    let (volume_error, perimeter_error, resolution) = match e {
        Region::IndicatorGrid(g) => {
            let coarse = g.coarsen();
            let pc = coarse.weighted_perimeter(d);
            let floor = perimeter * 1e-3;
            (
                (0.5 * g.h * perimeter).max(error_estimate(volume, volume)),
                error_estimate(perimeter, pc).max(floor),
                *g.shape.iter().max().unwrap(),
            )
        }
        _ => {
            let (vc, pc) = raw_measures(e, d, res / 2)?;
            (error_estimate(volume, vc), error_estimate(perimeter, pc), res)
        }
    };
    if !(volume.is_finite() && perimeter.is_finite()) {
        return Err(Error::Numeric(format!("non-finite measure (volume {volume}, perimeter {perimeter})")));
    }
    Ok(MeasureReport {
        volume,
        perimeter,
        quadrature_error: volume_error.max(perimeter_error),
        volume_error,
        perimeter_error,
        resolution,
    })
}

pub fn weighted_volume(e: &Region, d: &Density, res: usize) -> Result<MeasureReport> {
    measure(e, d, res)
}

pub fn weighted_perimeter(e: &Region, d: &Density, res: usize) -> Result<MeasureReport> {
    measure(e, d, res)
}

/// Default resolution used where callers do not choose one.
pub const DEFAULT_RES: usize = 64;

/// Weighted `H^{n-1}` measure of `E ∩ S(r)`.
pub fn slice_area(e: &Region, d: &Density, r: f64) -> Result<f64> {
    slice_area_res(e, d, r, DEFAULT_RES)
}

pub fn slice_area_res(e: &Region, d: &Density, r: f64, res: usize) -> Result<f64> {
    check_inputs(e, d, res.max(MIN_RES))?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Config(format!("slice radius must be positive, got {r}")));
    }
    Ok(match e {
        Region::Ball(b) => ball::ball_slice(&b.center, b.radius, d, r, res),
        Region::PolarGraph(g) => polar::arc_weight(d, r, &g.slice_intervals(r, res), res),
        Region::Axisymmetric(a) => a.slice(d, r, res),
        Region::IndicatorGrid(g) => grid_slice(g, d, r, res),
    })
}

fn grid_slice(g: &IndicatorGrid, d: &Density, r: f64, res: usize) -> f64 {
    if g.dim == 2 {
        let samples = ((8.0 * TAU * r / g.h).ceil() as usize).max(4 * res).max(256);
        let iv = angular_intervals(&|a: f64| g.contains(&[r * a.cos(), r * a.sin()]), samples);
        return arc_weight(d, r, &iv, res);
    }
    let count = ((16.0 * 4.0 * PI * r * r / (g.h * g.h)).ceil() as usize).clamp(4096, 2_000_000);
    let dirs = sphere_directions(3, count);
    let s: f64 = dirs
        .iter()
        .map(|u| {
            let x = [r * u[0], r * u[1], r * u[2]];
            if g.contains(&x) {
                d.value(&x)
            } else {
                0.0
            }
        })
        .sum();
    s * 4.0 * PI * r * r / count as f64
}

/// Slice areas on the given radii.
pub fn slice_profile(e: &Region, d: &Density, radii: &[f64], res: usize) -> Result<SliceProfile> {
    let areas = radii.iter().map(|r| slice_area_res(e, d, *r, res)).collect::<Result<Vec<_>>>()?;
    Ok(SliceProfile { radii: radii.to_vec(), areas })
}

/// `∫ S(r) dr` by Gauss–Legendre in `r` between the region's radial extent,
/// with the `res/2` comparison as error estimate.
pub fn slice_integral(e: &Region, d: &Density, res: usize) -> Result<(f64, f64)> {
    check_inputs(e, d, res)?;
    let lo = e.min_norm_bound().max(1e-12);
    let hi = e.max_norm();
    let mut cuts = vec![lo, hi];
    cuts.extend(radial_breaks(d).into_iter().filter(|b| *b > lo && *b < hi));
    if let Region::Ball(b) = e {
        let c = norm(&b.center);
        cuts.extend([c, b.radius - c].into_iter().filter(|x| *x > lo && *x < hi));
    }
    cuts.sort_by(f64::total_cmp);
    let run = |panels: usize| -> Result<f64> {
        let gl = gl8();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            for (x, wt) in gl.mapped(w[0], w[1], panels) {
                total += wt * slice_area_res(e, d, x, res)?;
            }
        }
        Ok(total)
    };
    let fine = run((res / 4).max(2))?;
    let coarse = run((res / 8).max(1))?;
    Ok((fine, error_estimate(fine, coarse)))
}

/// Mean density of a ball with sampled bounds.
pub fn mean_density(b: &Region, d: &Density, res: usize) -> Result<BallStats> {
    let ball = match b {
        Region::Ball(ball) => ball,
        _ => return Err(Error::InvalidRegion("mean density is defined for balls".into())),
    };
    let m = measure(b, d, res)?;
    if !(m.volume > 0.0 && m.perimeter > 0.0) {
        return Err(Error::InvalidRegion(format!("degenerate ball measures: volume {}", m.volume)));
    }
    let n = ball.dim() as i32;
    let samples = ball_samples(&ball.center, ball.radius, 4096);
    let (lo, hi) = samples
        .iter()
        .map(|x| d.value(x))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    // Averages of f over the sphere and the solid ball, kept inside the sampled range.
    let p_avg = (m.perimeter / ball.euclidean_perimeter()).clamp(lo, hi);
    let v_avg = (m.volume / ball.euclidean_volume()).clamp(lo, hi);
    Ok(BallStats {
        ball: b.clone(),
        volume: m.volume,
        perimeter: m.perimeter,
        mean_density: sandwich(p_avg, v_avg, n),
        rho_min: lo,
        rho_sup: hi,
        quadrature_error: m.quadrature_error,
    })
}

/// Mean density directly from a volume and perimeter of a ball.
pub fn mean_density_from(perimeter: f64, volume: f64, n: usize) -> f64 {
    perimeter.powi(n as i32) / ((n as f64).powi(n as i32) * unit_ball_volume(n) * volume.powi(n as i32 - 1))
}

fn truncation_pair(e: &Region, d: &Density, r: f64, res: usize) -> Result<(Region, Region)> {
    let n = e.dim();
    match e {
        Region::Ball(b) => {
            let c = norm(&b.center);
            if c + b.radius <= r {
                return Err(Error::Precondition("E ⊆ B(r): truncation is a no-op".into()));
            }
            if c - b.radius >= r {
                return Err(Error::Precondition("E ∩ B(r) is empty".into()));
            }
            let nodes = 16 * res;
            if n == 2 {
                let pole = if c < b.radius {
                    [0.0, 0.0]
                } else {
                    let s = (c - b.radius + r) / 2.0 / c;
                    [s * b.center[0], s * b.center[1]]
                };
                let g = PolarGraph::circle([b.center[0], b.center[1]], b.radius, pole, nodes)?;
                let t = polar::truncate(&g, r)?;
                Ok((Region::PolarGraph(g), Region::PolarGraph(t)))
            } else if n == 3 && d.is_radial() {
                let a = Axisymmetric::ball(c, b.radius, nodes)?;
                let t = a.truncate(r)?;
                Ok((Region::Axisymmetric(a), Region::Axisymmetric(t)))
            } else {
                let h = b.radius / 64.0;
                truncation_pair(&Region::IndicatorGrid(e.rasterize(h)), d, r, res)
            }
        }
        Region::PolarGraph(g) => {
            if g.max_norm() <= r {
                return Err(Error::Precondition("E ⊆ B(r): truncation is a no-op".into()));
            }
            Ok((e.clone(), Region::PolarGraph(polar::truncate(g, r)?)))
        }
        Region::Axisymmetric(a) => {
            if a.max_rho() <= r {
                return Err(Error::Precondition("E ⊆ B(r): truncation is a no-op".into()));
            }
            Ok((e.clone(), Region::Axisymmetric(a.truncate(r)?)))
        }
        Region::IndicatorGrid(g) => {
            let mut t = g.clone();
            let mut changed = false;
            for i in 0..t.cells.len() {
                if t.cells[i] && norm(&t.center(i)) > r {
                    t.cells[i] = false;
                    changed = true;
                }
            }
            if !changed {
                return Err(Error::Precondition("E ⊆ B(r): truncation is a no-op".into()));
            }
            if t.is_empty() {
                return Err(Error::Precondition("E ∩ B(r) is empty".into()));
            }
            Ok((e.clone(), Region::IndicatorGrid(t)))
        }
    }
}

/// Compares `P(E)` with `P(E ∩ B(r))`. The density's monotonicity is the
/// caller's responsibility; a sampled verdict is recorded.
pub fn truncate_compare(e: &Region, d: &Density, r: f64, res: usize) -> Result<TruncationReport> {
    check_inputs(e, d, res)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Config(format!("truncation radius must be positive, got {r}")));
    }
    let (full, cut) = truncation_pair(e, d, r, res)?;
    let a = measure(&full, d, res)?;
    let b = measure(&cut, d, res)?;
    let spec = SamplingSpec { rays: 16, ..SamplingSpec::default() };
    let verdict = classify(d, &spec)?.nondecreasing_verdict;
    let tolerance = a.perimeter_error + b.perimeter_error;
    Ok(TruncationReport {
        perimeter: a.perimeter,
        truncated_perimeter: b.perimeter,
        volume: a.volume,
        truncated_volume: b.volume,
        tolerance,
        strict_drop: b.perimeter < a.perimeter - tolerance,
        nondecreasing: verdict,
    })
}

/// `c(r) = (rⁿ + 1/ω_n)^{1/n} / (n − 1)`.
pub fn exterior_constant(r: f64, n: usize) -> f64 {
    (r.powi(n as i32) + 1.0 / unit_ball_volume(n)).powf(1.0 / n as f64) / (n - 1) as f64
}

/// Checks `|F| ≤ c(r)·(H^{n-1}(∂F ∖ S(r)) − H^{n-1}(∂F ∩ S(r)))` for a grid set
/// outside `B(r)` with Euclidean volume at most one.
pub fn exterior_volume_bound_check(f: &IndicatorGrid, r: f64) -> Result<ExteriorReport> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Config(format!("radius must be positive, got {r}")));
    }
    let n = f.dim;
    let lhs = f.euclidean_volume();
    if lhs > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("|F| = {lhs} exceeds 1")));
    }
    for i in 0..f.cells.len() {
        if f.cells[i] && norm(&f.center(i)) <= r {
            return Err(Error::Precondition(format!("F meets B(r) at cell centre {:?}", f.center(i))));
        }
    }
    let c = exterior_constant(r, n);
    if f.is_empty() {
        return Ok(ExteriorReport {
            lhs: 0.0,
            rhs: 0.0,
            c,
            free_boundary: 0.0,
            contact_boundary: 0.0,
            tolerance: 0.0,
            holds: true,
        });
    }
    let lo = vec![-r - 2.0 * f.h; n];
    let hi = vec![r + 2.0 * f.h; n];
    let big = f.padded_to_cover(&lo, &hi);
    let ball = IndicatorGrid::from_predicate(big.origin.clone(), big.h, big.shape.clone(), |x| norm(x) <= r);
    let both = big.union(&ball)?;
    let (pf, pb, pu) = (big.euclidean_perimeter(), ball.euclidean_perimeter(), both.euclidean_perimeter());
    let contact = ((pf + pb - pu) / 2.0).max(0.0);
    let free = pf - contact;
    let rhs = c * (pu - pb);
    let err = |g: &IndicatorGrid, p: f64| (p - g.coarsen().euclidean_perimeter()).abs();
    let tolerance = c * (err(&both, pu) + err(&ball, pb));
    Ok(ExteriorReport {
        lhs,
        rhs,
        c,
        free_boundary: free,
        contact_boundary: contact,
        tolerance,
        holds: lhs <= rhs + tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_json_round_trip() {
        let e = Region::ball(vec![1.0, 2.0], 0.5).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains("\"kind\":\"ball\""));
        assert_eq!(serde_json::from_str::<Region>(&s).unwrap(), e);
        let g: Region = serde_json::from_str(
            r#"{"kind":"grid","dim":2,"origin":[0,0],"h":0.5,"shape":[2,1],"cells":[1,0]}"#,
        )
        .unwrap();
        assert_eq!(g.dim(), 2);
    }

    #[test]
    fn small_res_is_rejected() {
        let e = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(matches!(measure(&e, &Density::constant(1.0, 2), 8), Err(Error::Config(_))));
    }

    #[test]
    fn dimension_mismatch_is_invalid_region() {
        let e = Region::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        assert!(matches!(measure(&e, &Density::constant(1.0, 2), 32), Err(Error::InvalidRegion(_))));
    }

    #[test]
    fn exterior_constant_value() {
        let c = exterior_constant(1.0, 2);
        assert!((c - (1.0 + 1.0 / PI).sqrt()).abs() < 1e-15);
    }
}
