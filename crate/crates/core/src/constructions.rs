//! Counterexample densities and the regions that exhibit their scalings.

use rayon::prelude::*;
use serde::Serialize;

use crate::density::{BrickDensity, BrickParams, Bump, BumpyDensity, Density, Model, Shell, ShellDensity, StitchedDensity};
use crate::error::{Error, Result};
use crate::measure::{mean_density, measure, Axisymmetric, Ball, BallStats, Region};

/// Default ratio between consecutive centre distances of placed balls.
pub const SPACING: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrickSpec {
    pub eps: f64,
    pub n: f64,
    pub m: f64,
    pub w: f64,
}

fn brick_density(b: BrickDensity) -> Result<Density> {
    Density::new("piecewise_brick", 3, Model::Brick(b))
}

fn brick_region(b: &BrickDensity) -> Result<Region> {
    Ok(Region::Axisymmetric(Axisymmetric::new(b.geometry.boundary())?))
}

/// The brick region (cone wall, outer sphere patch and cap) with its six-zone density.
pub fn build_brick(spec: &BrickSpec) -> Result<(Region, Density)> {
    let b = BrickDensity::new(spec.eps, spec.n, spec.m, spec.w)?;
    Ok((brick_region(&b)?, brick_density(b)?))
}

/// Euclidean areas of the cone wall, outer sphere patch and cap of the brick
/// with eps `eps` (exact cap, not its polyline).
pub fn brick_boundary_areas(eps: f64) -> Result<[f64; 3]> {
    use std::f64::consts::PI;
    let g = crate::density::BrickGeometry::new(eps)?;
    let (s, c) = g.phi0.sin_cos();
    let cone = PI * s * (g.r2 * g.r2 - g.r1 * g.r1);
    let outer = 2.0 * PI * g.r2 * g.r2 * (1.0 - c);
    let cap = 2.0 * PI * (g.r1 * c - (g.cap_centre - 1.0));
    Ok([cone, outer, cap])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub n: f64,
    pub m: f64,
    pub volume: f64,
    pub perimeter: f64,
    /// `M ε^{7/3}`.
    pub predicted_volume: f64,
    /// `N ε^{2/3} + M ε^{10/3}`.
    pub predicted_perimeter: f64,
    pub volume_ratio: f64,
    pub perimeter_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Every ratio lies in `[0.5, 2]`.
    pub in_range: bool,
    /// Last ratios closer to 1 than the first ones (`None` for a single row).
    pub trending: Option<bool>,
}

impl ScalingReport {
    pub fn holds(&self) -> bool {
        self.in_range && self.trending.unwrap_or(true)
    }
}

/// Measures bricks over a decreasing `ε` list with weights `N(ε)`, `M(ε)`
/// (and `W = M`) and compares with the predicted scalings.
pub fn brick_scaling_report(
    eps: &[f64],
    n: impl Fn(f64) -> f64 + Sync,
    m: impl Fn(f64) -> f64 + Sync,
    res: usize,
) -> Result<ScalingReport> {
    if eps.is_empty() {
        return Err(Error::InvalidSpec("empty eps list".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidSpec("eps list must be strictly decreasing".into()));
    }
    let rows = eps
        .par_iter()
        .map(|&e| {
            let (nn, mm) = (n(e), m(e));
            let (region, d) = build_brick(&BrickSpec { eps: e, n: nn, m: mm, w: mm })?;
            let r = measure(&region, &d, res)?;
            let pv = mm * e.powf(7.0 / 3.0);
            let pp = nn * e.powf(2.0 / 3.0) + mm * e.powf(10.0 / 3.0);
            Ok(ScalingRow {
                eps: e,
                n: nn,
                m: mm,
                volume: r.volume,
                perimeter: r.perimeter,
                predicted_volume: pv,
                predicted_perimeter: pp,
                volume_ratio: r.volume / pv,
                perimeter_ratio: r.perimeter / pp,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let in_range = rows.iter().all(|r| (0.5..=2.0).contains(&r.volume_ratio) && (0.5..=2.0).contains(&r.perimeter_ratio));
    let trending = (rows.len() >= 2).then(|| {
        let (a, b) = (&rows[0], &rows[rows.len() - 1]);
        (b.volume_ratio - 1.0).abs() < (a.volume_ratio - 1.0).abs() && (b.perimeter_ratio - 1.0).abs() < (a.perimeter_ratio - 1.0).abs()
    });
    Ok(ScalingReport { rows, in_range, trending })
}

/// Root of an increasing `g` on `[lo, hi]` by Illinois bisection.
fn illinois(mut lo: f64, mut hi: f64, tol: f64, g: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (mut glo, mut ghi) = (g(lo)?, g(hi)?);
    if glo > 0.0 || ghi < 0.0 {
        return Err(Error::Numeric(format!("bracket [{lo}, {hi}] does not straddle the target ({glo}, {ghi})")));
    }
    let mut side = 0;
    for _ in 0..200 {
        let x = if ghi != glo { (lo * ghi - hi * glo) / (ghi - glo) } else { 0.5 * (lo + hi) };
        let x = if x > lo && x < hi { x } else { 0.5 * (lo + hi) };
        let gx = g(x)?;
        if gx.abs() <= tol || hi - lo <= 1e-15 * hi.abs() {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
            glo = gx;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            ghi = gx;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Increasing `g` with `g(a) < 0`: grows `b` geometrically until `g(b) ≥ 0`.
fn bracket_up(a: f64, g: &impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut b = 2.0 * a;
    for _ in 0..200 {
        if g(b)? >= 0.0 {
            return Ok(b);
        }
        b *= 2.0;
    }
    Err(Error::Numeric("no bracket found".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonexistenceSequence {
    #[serde(skip)]
    pub density: Density,
    pub regions: Vec<Region>,
    pub bricks: Vec<BrickParams>,
    pub volumes: Vec<f64>,
    pub perimeters: Vec<f64>,
    /// The stitched density never jumps down between shells.
    pub monotone: bool,
}

/// Bricks with `N_j = ε_j^{−1/3}` and `M_j` scaled from `ε_j^{−7/3}` until
/// the weighted volume is 1, stitched radially with `W_j = N_{j+1}`.
pub fn build_nonexistence_sequence(eps: &[f64], res: usize) -> Result<NonexistenceSequence> {
    if eps.is_empty() || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidSpec("eps list must be non-empty and strictly decreasing".into()));
    }
    let geoms = eps.iter().map(|e| crate::density::BrickGeometry::new(*e)).collect::<Result<Vec<_>>>()?;
    for (j, w) in geoms.windows(2).enumerate() {
        if w[0].r2 >= w[1].cap[0].1 || w[0].r2 >= w[1].r1 {
            return Err(Error::Spacing(format!(
                "brick {} reaches R2 = {} but brick {} starts at {}",
                j + 1,
                w[0].r2,
                j + 2,
                w[1].cap[0].1
            )));
        }
    }
    let ns: Vec<f64> = eps.iter().map(|e| e.powf(-1.0 / 3.0)).collect();
    let ms = eps
        .par_iter()
        .zip(&ns)
        .map(|(&e, &n)| {
            let base = e.powf(-7.0 / 3.0);
            let vol = |s: f64| -> Result<f64> {
                let b = BrickDensity::with_weights(e, n, s * base, s * base)?;
                Ok(measure(&brick_region(&b)?, &brick_density(b)?, res)?.volume - 1.0)
            };
            let lo = 1e-6;
            let hi = bracket_up(lo, &vol)?;
            Ok(illinois(lo, hi, 1e-10, vol)? * base)
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = eps.len();
    let bricks = (0..k)
        .map(|j| {
            let w = if j + 1 < k { ns[j + 1] } else { ms[j] };
            BrickDensity::with_weights(eps[j], ns[j], ms[j], w)
        })
        .collect::<Result<Vec<_>>>()?;
    let regions = bricks.iter().map(brick_region).collect::<Result<Vec<_>>>()?;
    let params = bricks.iter().map(BrickDensity::params).collect();
    let stitched = StitchedDensity::new(bricks)?;
    let monotone = stitched.bricks.iter().all(|b| b.n <= b.m) && stitched.is_nondecreasing();
    let density = Density::new("piecewise_stitched", 3, Model::Stitched(stitched))?;
    let measured = regions.iter().map(|r| measure(r, &density, res)).collect::<Result<Vec<_>>>()?;
    Ok(NonexistenceSequence {
        density,
        regions,
        bricks: params,
        volumes: measured.iter().map(|m| m.volume).collect(),
        perimeters: measured.iter().map(|m| m.perimeter).collect(),
        monotone,
    })
}

/// Balls at distance `D` along `e₁` whose weighted volume is `V` under `d`
/// (normally `inverse_tail`), one per `D`.
pub fn build_decaying_ball_family(d: &Density, v: f64, ds: &[f64], res: usize) -> Result<Vec<BallStats>> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Domain(format!("volume must be positive, got {v}")));
    }
    let n = d.dim();
    ds.par_iter()
        .map(|&dd| {
            if !(dd.is_finite() && dd > 0.0) {
                return Err(Error::Domain(format!("distance must be positive, got {dd}")));
            }
            let mut c = vec![0.0; n];
            c[0] = dd;
            let vol = |s: f64| -> Result<f64> { Ok(measure(&Region::ball(c.clone(), s)?, d, res)?.volume - v) };
            let lo = 1e-9 * dd;
            let hi = bracket_up(lo, &vol)?;
            if hi >= dd {
                return Err(Error::Numeric(format!("ball of volume {v} at distance {dd} reaches the origin")));
            }
            let s = illinois(lo, hi, 1e-10 * v, vol)?;
            mean_density(&Region::ball(c.clone(), s)?, d, res)
        })
        .collect()
}

/// Ball centre `SPACING^i·e₁`.
fn place(dim: usize, index: usize) -> Vec<f64> {
    let mut c = vec![0.0; dim];
    c[0] = SPACING.powi(index as i32);
    c
}

fn check_disjoint(balls: &[(Vec<f64>, f64)]) -> Result<()> {
    for (k, w) in balls.windows(2).enumerate() {
        let gap = crate::quadrature::dist(&w[0].0, &w[1].0);
        if gap <= w[0].1 + w[1].1 {
            return Err(Error::Spacing(format!("balls {k} and {} overlap", k + 1)));
        }
    }
    if let Some((c, r)) = balls.first() {
        if crate::quadrature::norm(c) <= *r {
            return Err(Error::Spacing("first ball contains the origin".into()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedBall {
    pub index: usize,
    pub ball: Ball,
    /// Bump amplitude (bumpy) or shell weight `Kᵢ` (steepest).
    pub weight: f64,
    pub volume: f64,
    pub perimeter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallConstruction {
    #[serde(skip)]
    pub density: Density,
    pub balls: Vec<PlacedBall>,
}

/// Radius with `P(B(c, s)) = target` under `d`.
fn radius_for_perimeter(d: &Density, c: &[f64], target: f64, res: usize) -> Result<f64> {
    let per = |s: f64| -> Result<f64> { Ok(measure(&Region::ball(c.to_vec(), s)?, d, res)?.perimeter - target) };
    let lo = 1e-12;
    let hi = bracket_up(lo, &per)?;
    illinois(lo, hi, 1e-13 * target, per)
}

/// Base `1 + ln(1 + r)` with balls `Bᵢ` (i = 1..=i_max) of perimeter `1/i²`
/// whose volume is pumped to `1/i` by an interior bump supported in `Bᵢ`.
pub fn build_bumpy_diverging(i_max: usize, dim: usize, res: usize) -> Result<BallConstruction> {
    if i_max < 3 {
        return Err(Error::Precondition(format!("i_max must be at least 3, got {i_max}")));
    }
    let base = Density::new("piecewise_bumpy", dim, Model::Bumpy(BumpyDensity { bumps: Vec::new() }))?;
    let placed = (1..=i_max)
        .into_par_iter()
        .map(|i| {
            let c = place(dim, i);
            let s = radius_for_perimeter(&base, &c, 1.0 / (i * i) as f64, res)?;
            Ok((c, s))
        })
        .collect::<Result<Vec<_>>>()?;
    check_disjoint(&placed)?;
    let bumps = placed
        .par_iter()
        .enumerate()
        .map(|(k, (c, s))| {
            let i = k + 1;
            let ball = Region::ball(c.clone(), *s)?;
            let unit = Density::new(
                "bump",
                dim,
                Model::Bumpy(BumpyDensity { bumps: vec![Bump { center: c.clone(), radius: *s, amplitude: 1.0 }] }),
            )?;
            let v0 = measure(&ball, &base, res)?.volume;
            let v1 = measure(&ball, &unit, res)?.volume;
            let a = (1.0 / i as f64 - v0) / (v1 - v0);
            if a < 0.0 {
                return Err(Error::Numeric(format!("ball {i} already exceeds volume 1/{i}")));
            }
            Ok(Bump { center: c.clone(), radius: *s, amplitude: a })
        })
        .collect::<Result<Vec<_>>>()?;
    let density = Density::new("piecewise_bumpy", dim, Model::Bumpy(BumpyDensity { bumps: bumps.clone() }))?;
    let balls = bumps
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let ball = Ball::new(b.center.clone(), b.radius)?;
            let m = measure(&Region::Ball(ball.clone()), &density, res)?;
            Ok(PlacedBall { index: k + 1, ball, weight: b.amplitude, volume: m.volume, perimeter: m.perimeter })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BallConstruction { density, balls })
}

/// Ingredients of the steepest-profile example: base `2 + ln(1 + r)`, balls
/// `Bᵢ` with `P(Bᵢ) = 1/i`, and weights `Kᵢ` on `B(xᵢ, √rᵢ)` (off the sphere
/// `∂Bᵢ`) making `|Bᵢ| = 1`.
pub fn build_steepest_ingredients(i_max: usize, dim: usize, res: usize) -> Result<BallConstruction> {
    if i_max < 1 {
        return Err(Error::Precondition("need at least one ball".into()));
    }
    let base = Density::new("piecewise_shells", dim, Model::Shells(ShellDensity { shells: Vec::new() }))?;
    let placed = (1..=i_max)
        .into_par_iter()
        .map(|i| {
            let c = place(dim, i);
            let s = radius_for_perimeter(&base, &c, 1.0 / i as f64, res)?;
            if s >= 1.0 {
                return Err(Error::Numeric(format!("ball {i} has radius {s} ≥ 1")));
            }
            Ok((c, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let outer: Vec<(Vec<f64>, f64)> = placed.iter().map(|(c, s)| (c.clone(), s.sqrt())).collect();
    check_disjoint(&outer)?;
    let shells = placed
        .par_iter()
        .map(|(c, s)| {
            let ball = Region::ball(c.clone(), *s)?;
            let v0 = measure(&ball, &base, res)?.volume;
            let eucl = Ball::new(c.clone(), *s)?.euclidean_volume();
            let k = (1.0 - v0) / eucl;
            if k <= 0.0 {
                return Err(Error::Numeric("ball already has volume above 1".into()));
            }
            Ok(Shell { center: c.clone(), inner: *s, outer: s.sqrt(), weight: k })
        })
        .collect::<Result<Vec<_>>>()?;
    let density = Density::new("piecewise_shells", dim, Model::Shells(ShellDensity { shells: shells.clone() }))?;
    let balls = shells
        .iter()
        .enumerate()
        .map(|(k, sh)| {
            let ball = Ball::new(sh.center.clone(), sh.inner)?;
            let m = measure(&Region::Ball(ball.clone()), &density, res)?;
            Ok(PlacedBall { index: k + 1, ball, weight: sh.weight, volume: m.volume, perimeter: m.perimeter })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BallConstruction { density, balls })
}
