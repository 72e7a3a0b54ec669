//! Existence conditions for densities with a finite limit at infinity:
//! profile bound, distant low-density balls, growth and averaging criteria.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{classify, Density, Profile, SamplingSpec, Verdict};
use crate::error::{Error, Result};
use crate::measure::{ball_samples, mean_density, measure, Ball, BallStats, Region, DEFAULT_RES};
use crate::quadrature::unit_ball_volume;

/// Relative slack on the slow-growth inequalities.
pub const SLOW_GROWTH_SLACK: f64 = 1e-12;
/// Threshold on the radial Laplacian.
pub const LAPLACIAN_TOL: f64 = 1e-10;
/// Ratio `f′/(a − f)` must end below this.
pub const DERIVATIVE_RATIO: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    SlowGrowthBall,
    SlowGrowthRadial,
    ExponentialGap,
    DerivativeCondition,
    MeanInequality,
    Superharmonic,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::SlowGrowthBall,
        Condition::SlowGrowthRadial,
        Condition::ExponentialGap,
        Condition::DerivativeCondition,
        Condition::MeanInequality,
        Condition::Superharmonic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::SlowGrowthBall => "slow_growth_ball",
            Condition::SlowGrowthRadial => "slow_growth_radial",
            Condition::ExponentialGap => "exponential_gap",
            Condition::DerivativeCondition => "derivative_condition",
            Condition::MeanInequality => "mean_inequality",
            Condition::Superharmonic => "superharmonic",
        }
    }
}

/// Evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `lhs ≤ rhs` was tested on this ball.
    Ball { ball: Ball, lhs: f64, rhs: f64, tolerance: f64 },
    /// `lhs ≤ rhs` was tested at radius `r`.
    Radius { r: f64, lhs: f64, rhs: f64 },
    /// One radius per rate of the exponential-gap ladder.
    Ladder { rates: Vec<f64>, radii: Vec<f64> },
    /// Ratio `f′/(a − f)` at the end of the grid.
    Ratio { r: f64, ratio: f64, decreasing: bool },
    /// Largest radial Laplacian on the sampled interval.
    Laplacian { lo: f64, hi: f64, r: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub verdict: Verdict,
    pub applicable: bool,
    pub witness: Option<Witness>,
    /// Candidates (balls or radii) examined.
    pub evaluated: usize,
    pub note: String,
}

impl ConditionResult {
    fn inapplicable(note: impl Into<String>) -> Self {
        Self { verdict: Verdict::Inconclusive, applicable: false, witness: None, evaluated: 0, note: note.into() }
    }

    fn new(verdict: Verdict, witness: Option<Witness>, evaluated: usize, note: impl Into<String>) -> Self {
        Self { verdict, applicable: true, witness, evaluated, note: note.into() }
    }
}

/// Search and scan budgets shared by the checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    pub r0: f64,
    pub doublings: usize,
    pub directions: usize,
    pub tau: f64,
    pub r_max: f64,
    pub gap_rates: Vec<f64>,
    pub gap_rho: f64,
    pub derivative_range: (f64, f64),
    pub derivative_points: usize,
    pub superharmonic_interval: (f64, f64),
    pub res: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            r0: 10.0,
            doublings: 20,
            directions: 64,
            tau: 1.0,
            r_max: 1e5,
            gap_rates: vec![1.0, 0.1, 0.01],
            gap_rho: 10.0,
            derivative_range: (10.0, 1e4),
            derivative_points: 301,
            superharmonic_interval: (2.0, 100.0),
            res: DEFAULT_RES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    pub slow_growth_ball: ConditionResult,
    pub slow_growth_radial: ConditionResult,
    pub exponential_gap: ConditionResult,
    pub derivative_condition: ConditionResult,
    pub mean_inequality: ConditionResult,
    pub superharmonic: ConditionResult,
}

impl Verdicts {
    pub fn get(&self, c: Condition) -> &ConditionResult {
        match c {
            Condition::SlowGrowthBall => &self.slow_growth_ball,
            Condition::SlowGrowthRadial => &self.slow_growth_radial,
            Condition::ExponentialGap => &self.exponential_gap,
            Condition::DerivativeCondition => &self.derivative_condition,
            Condition::MeanInequality => &self.mean_inequality,
            Condition::Superharmonic => &self.superharmonic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub density: String,
    pub dim: usize,
    pub a: Option<f64>,
    pub volume: f64,
    pub verdicts: Verdicts,
    pub certified: bool,
    pub budget: Budget,
    pub notes: Vec<String>,
}

impl ExistenceReport {
    /// Conditions that passed.
    pub fn certified_by(&self) -> Vec<Condition> {
        Condition::ALL.into_iter().filter(|c| self.verdicts.get(*c).verdict == Verdict::Pass).collect()
    }

    /// 0 certified, 3 some applicable check failed, 4 nothing decided.
    pub fn exit_code(&self) -> i32 {
        if self.certified {
            0
        } else if Condition::ALL.iter().any(|c| {
            let r = self.verdicts.get(*c);
            r.applicable && r.verdict == Verdict::Fail
        }) {
            3
        } else {
            4
        }
    }
}

/// The limit `a`: declared metadata cross-checked against the sampled tail,
/// or the sampled tail alone when it is tight.
pub fn resolve_limit(d: &Density) -> Result<f64> {
    let rep = classify(d, &SamplingSpec::default())?;
    match (d.limit(), rep.limit_estimate, rep.limit_interval) {
        (Some(a), Some(est), _) => {
            if (est - a).abs() > 0.01 * a && !tail_approaches(d, a) {
                return Err(Error::Config(format!(
                    "declared limit {a} disagrees with the sampled tail estimate {est} by more than 1%"
                )));
            }
            Ok(a)
        }
        (Some(a), None, _) => Ok(a),
        (None, Some(est), Some((lo, hi))) if est > 0.0 && hi - lo <= 0.01 * est => Ok(est),
        _ => Err(Error::Inapplicable(format!("density `{}` has no finite positive limit", d.name()))),
    }
}

/// Slow tails such as `1 − r^{−1/2}` are still far from `a` at the sampled
/// radii; they are accepted when the distance to `a` keeps shrinking.
fn tail_approaches(d: &Density, a: f64) -> bool {
    let spec = SamplingSpec::default();
    let dirs = spec.directions(d.dim());
    let dev = |r: f64| {
        dirs.iter().map(|u| (d.value(&u.iter().map(|x| r * x).collect::<Vec<_>>()) - a).abs()).fold(0.0, f64::max)
    };
    let mut radii = (0..6).map(|k| spec.r_tail * 4f64.powi(k));
    let mut prev = dev(radii.next().expect("non-empty"));
    for r in radii {
        let cur = dev(r);
        if !(cur < prev) {
            return false;
        }
        prev = cur;
    }
    true
}

/// `n (ω_n a)^{1/n} V^{(n−1)/n}`.
pub fn profile_upper_bound(v: f64, d: &Density) -> Result<f64> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Domain(format!("volume must be positive, got {v}")));
    }
    let a = resolve_limit(d)?;
    Ok(bound_with(v, a, d.dim()))
}

pub(crate) fn bound_with(v: f64, a: f64, n: usize) -> f64 {
    let nf = n as f64;
    nf * (unit_ball_volume(n) * a).powf(1.0 / nf) * v.powf((nf - 1.0) / nf)
}

/// Radius of the ball centred at `center` whose weighted volume is `v`.
pub fn radius_for_volume(d: &Density, center: &[f64], v: f64, res: usize) -> Result<f64> {
    let vol = |r: f64| -> Result<f64> { Ok(measure(&Region::ball(center.to_vec(), r)?, d, res)?.volume) };
    let n = center.len();
    let f0 = d.value(center);
    let mut hi = (v / (unit_ball_volume(n) * f0)).powf(1.0 / n as f64);
    if !(hi.is_finite() && hi > 0.0) {
        return Err(Error::Numeric(format!("radius bisection: bad initial radius {hi} at f = {f0}")));
    }
    let mut lo = hi;
    let mut steps = 0;
    while vol(hi)? < v {
        hi *= 2.0;
        steps += 1;
        if steps > 80 || !hi.is_finite() {
            return Err(Error::Numeric(format!("radius bisection diverged: volume at radius {hi} still below {v}")));
        }
    }
    steps = 0;
    while vol(lo)? > v {
        lo *= 0.5;
        steps += 1;
        if steps > 80 {
            return Err(Error::Numeric(format!("radius bisection: volume at radius {lo} still above {v}")));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * hi {
            break;
        }
        if vol(mid)? < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

enum Step<T> {
    Accept(T),
    Next,
    Stop,
}

/// Walks the ball ladder (distances `R0·2^k`, `dirs` directions, radius for
/// volume `v`) until `f` accepts a ball. Returns the first hit and the count.
fn search_balls<T>(
    d: &Density,
    v: f64,
    r0: f64,
    budget: &Budget,
    mut f: impl FnMut(&Ball) -> Result<Step<T>>,
) -> Result<(Option<T>, usize)> {
    if !(v.is_finite() && v > 0.0) || !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::Domain(format!("volume and start radius must be positive (V = {v}, R0 = {r0})")));
    }
    let n = d.dim();
    // Radial densities look the same in every direction.
    let rays = if d.is_radial() { 1 } else { budget.directions };
    let dirs = SamplingSpec { rays, seed: 0, ..SamplingSpec::default() }.directions(n);
    let mut count = 0;
    for k in 0..=budget.doublings {
        let dist = r0 * 2f64.powi(k as i32);
        for u in &dirs {
            let c: Vec<f64> = u.iter().map(|x| dist * x).collect();
            let b = radius_for_volume(d, &c, v, budget.res)?;
            count += 1;
            match f(&Ball::new(c, b)?)? {
                Step::Accept(t) => return Ok((Some(t), count)),
                Step::Stop => return Ok((None, count)),
                Step::Next => {}
            }
        }
    }
    Ok((None, count))
}

/// First ball on the ladder with weighted volume `v` and mean density at most `a`.
pub fn find_distant_low_density_ball(d: &Density, v: f64, r0: f64) -> Result<Option<BallStats>> {
    find_distant_low_density_ball_with(d, v, r0, &Budget::default())
}

pub fn find_distant_low_density_ball_with(d: &Density, v: f64, r0: f64, budget: &Budget) -> Result<Option<BallStats>> {
    let a = resolve_limit(d)?;
    let (hit, _) = search_balls(d, v, r0, budget, |b| {
        let s = mean_density(&Region::Ball(b.clone()), d, budget.res)?;
        Ok(if s.mean_density <= a + 1e-9 { Step::Accept(s) } else { Step::Next })
    })?;
    Ok(hit)
}

/// `ln(−ln(1 − e^{L}/a))`, the log of `−ln(f/a)` for a point with log-gap `L`.
fn log_deficit(l: f64, ln_a: f64) -> f64 {
    let t = l - ln_a;
    if t < -700.0 {
        t
    } else {
        (-(-t.exp()).ln_1p()).ln()
    }
}

/// Slow-growth inequality `f_hi ≤ a^{1/n} f_lo^{(n−1)/n}` from log-gaps:
/// `l_small` belongs to the larger density value, `l_large` to the smaller.
/// Returns `(holds, lhs, rhs)` with the sides in density units.
fn slow_growth(l_small: f64, l_large: f64, a: f64, n: usize) -> (bool, f64, f64) {
    let q = (n as f64 - 1.0) / n as f64;
    let f_hi = a - l_small.exp();
    let f_lo = a - l_large.exp();
    let rhs = a.powf(1.0 / n as f64) * f_lo.max(0.0).powf(q);
    let holds = if l_large == f64::NEG_INFINITY {
        true
    } else if l_small == f64::NEG_INFINITY || l_small.is_nan() || l_large.is_nan() {
        false
    } else {
        let ln_a = a.ln();
        log_deficit(l_small, ln_a) >= q.ln() + log_deficit(l_large, ln_a) - SLOW_GROWTH_SLACK
    };
    (holds, f_hi, rhs)
}

/// Analytic tails whose gap never vanishes: a `−∞` log-gap there is overflow.
fn gap_never_vanishes(d: &Density) -> bool {
    matches!(d.profile(), Some(Profile::PowerTail { .. } | Profile::ExpTail { .. } | Profile::DoubleExpTail))
}

fn underflowed(d: &Density, l: f64) -> bool {
    l == f64::NEG_INFINITY && gap_never_vanishes(d)
}

/// `None` when a log-gap on the ball is no longer representable.
fn slow_growth_on_ball(d: &Density, b: &Ball, a: f64, samples: usize) -> Option<(bool, f64, f64)> {
    let (mut lmin, mut lmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in ball_samples(&b.center, b.radius, samples) {
        let l = d.log_gap(&x).unwrap_or(f64::NAN);
        if underflowed(d, l) {
            return None;
        }
        lmin = lmin.min(l);
        lmax = lmax.max(l);
    }
    Some(slow_growth(lmin, lmax, a, d.dim()))
}

fn require_limit(d: &Density) -> std::result::Result<f64, ConditionResult> {
    resolve_limit(d).map_err(|e| ConditionResult::inapplicable(e.to_string()))
}

/// Slow growth on a ball: `sup_B f ≤ a^{1/n}(inf_B f)^{(n−1)/n}` for some ball
/// of volume `v` on the distance ladder from `r0`.
pub fn check_slow_growth_ball(d: &Density, v: f64, r0: f64, budget: &Budget) -> Result<ConditionResult> {
    let a = match require_limit(d) {
        Ok(a) => a,
        Err(r) => return Ok(r),
    };
    let mut last = None;
    let mut stopped = false;
    let (hit, count) = search_balls(d, v, r0, budget, |b| {
        let Some((ok, lhs, rhs)) = slow_growth_on_ball(d, b, a, 4096) else {
            stopped = true;
            return Ok(Step::Stop);
        };
        let w = Witness::Ball { ball: b.clone(), lhs, rhs, tolerance: SLOW_GROWTH_SLACK };
        if ok {
            Ok(Step::Accept(w))
        } else {
            last = Some(w);
            Ok(Step::Next)
        }
    })?;
    let tail = if stopped { " (the gap underflows farther out)" } else { "" };
    Ok(match hit {
        Some(w) => ConditionResult::new(Verdict::Pass, Some(w), count, "inequality holds on the witness ball"),
        None if last.is_some() => ConditionResult::new(
            Verdict::Fail,
            last,
            count,
            format!("inequality violated on every ball of the search ladder{tail}"),
        ),
        None => ConditionResult::new(Verdict::Inconclusive, None, count, format!("no ball decided{tail}")),
    })
}

fn radial_profile_gap(d: &Density) -> std::result::Result<(f64, &crate::density::Profile), ConditionResult> {
    let Some(p) = d.profile() else {
        return Err(ConditionResult::inapplicable("needs a radial density"));
    };
    let a = require_limit(d)?;
    Ok((a, p))
}

fn geometric(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let k = ((hi / lo).log10() * per_decade as f64).ceil().max(1.0) as usize;
    (0..=k).map(|i| lo * (hi / lo).powf(i as f64 / k as f64)).collect()
}

/// `f(R + τ) ≤ a^{1/n} f(R)^{(n−1)/n}` for some `R` in `[R0, Rmax]`.
pub fn check_radial_slow_growth(d: &Density, tau: f64, r0: f64, r_max: f64) -> Result<ConditionResult> {
    if !(tau > 0.0 && r0 > 0.0 && r_max >= r0) {
        return Err(Error::Domain(format!("need τ > 0 and 0 < R0 ≤ Rmax (τ = {tau}, R0 = {r0}, Rmax = {r_max})")));
    }
    let (a, p) = match radial_profile_gap(d) {
        Ok(v) => v,
        Err(r) => return Ok(r),
    };
    let n = d.dim();
    let grid = geometric(r0, r_max, 64);
    let mut last = None;
    for (i, &r) in grid.iter().enumerate() {
        let (lf, ln) = (p.log_gap(r + tau).unwrap_or(f64::NAN), p.log_gap(r).unwrap_or(f64::NAN));
        if underflowed(d, lf) {
            let v = if last.is_some() { Verdict::Fail } else { Verdict::Inconclusive };
            return Ok(ConditionResult::new(v, last, i, format!("violated on every R < {r}; the gap underflows beyond")));
        }
        let (ok, lhs, rhs) = slow_growth(lf, ln, a, n);
        let w = Witness::Radius { r, lhs, rhs };
        if ok {
            return Ok(ConditionResult::new(Verdict::Pass, Some(w), i + 1, format!("holds at R = {r}")));
        }
        last = Some(w);
    }
    Ok(ConditionResult::new(Verdict::Fail, last, grid.len(), format!("violated on every scanned R ≤ {r_max}")))
}

/// `f(R) ≤ a − e^{−cR}` for some `R` in `[ρ, Rmax]`, compared as `ln(a − f) ≥ −cR`.
pub fn check_exponential_gap(d: &Density, c: f64, rho: f64, r_max: f64) -> Result<ConditionResult> {
    if !(c > 0.0 && rho > 0.0 && r_max >= rho) {
        return Err(Error::Domain(format!("need c > 0 and 0 < ρ ≤ Rmax (c = {c}, ρ = {rho}, Rmax = {r_max})")));
    }
    let (_, p) = match radial_profile_gap(d) {
        Ok(v) => v,
        Err(r) => return Ok(r),
    };
    let grid = geometric(rho, r_max, 64);
    let mut last = None;
    for (i, &r) in grid.iter().enumerate() {
        let l = p.log_gap(r).unwrap_or(f64::NEG_INFINITY);
        if underflowed(d, l) {
            let v = if last.is_some() { Verdict::Fail } else { Verdict::Inconclusive };
            return Ok(ConditionResult::new(v, last, i, format!("gap below e^(-cR) for every R < {r}; it underflows beyond")));
        }
        let w = Witness::Radius { r, lhs: l, rhs: -c * r };
        if l >= -c * r {
            return Ok(ConditionResult::new(Verdict::Pass, Some(w), i + 1, format!("gap exceeds e^(-cR) at R = {r}")));
        }
        last = Some(w);
    }
    Ok(ConditionResult::new(Verdict::Fail, last, grid.len(), format!("gap below e^(-cR) for every scanned R ≤ {r_max}")))
}

/// The exponential-gap check for every rate of a ladder; passes only if each rate passes.
pub fn check_exponential_gap_ladder(d: &Density, rates: &[f64], rho: f64, r_max: f64) -> Result<ConditionResult> {
    let mut radii = Vec::with_capacity(rates.len());
    let mut evaluated = 0;
    for &c in rates {
        let r = check_exponential_gap(d, c, rho, r_max)?;
        evaluated += r.evaluated;
        if !r.applicable || r.verdict != Verdict::Pass {
            return Ok(ConditionResult { note: format!("rate c = {c}: {}", r.note), evaluated, ..r });
        }
        match r.witness {
            Some(Witness::Radius { r, .. }) => radii.push(r),
            _ => unreachable!("a passing gap check carries a radius"),
        }
    }
    let w = Witness::Ladder { rates: rates.to_vec(), radii };
    Ok(ConditionResult::new(Verdict::Pass, Some(w), evaluated, "gap exceeds e^(-cR) for every rate of the ladder"))
}

/// `k` geometrically spaced radii spanning `range`.
pub fn derivative_grid(range: (f64, f64), k: usize) -> Vec<f64> {
    let (lo, hi) = range;
    let k = k.max(2);
    (0..k).map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64)).collect()
}

/// `f′(R)/(a − f(R)) → 0`, read as: below 0.01 at the end of the grid and
/// non-increasing over its last decade. The ratio is `−d/dR ln(a − f)`.
pub fn check_derivative_condition(d: &Density, grid: &[f64]) -> Result<ConditionResult> {
    if grid.len() < 2 || grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("derivative grid must be positive and strictly increasing".into()));
    }
    let (_, p) = match radial_profile_gap(d) {
        Ok(v) => v,
        Err(r) => return Ok(r),
    };
    let mut ratios = Vec::with_capacity(grid.len());
    for &r in grid {
        let h = 1e-4 * r;
        let (lp, lm) = (p.log_gap(r + h).unwrap_or(f64::NAN), p.log_gap(r - h).unwrap_or(f64::NAN));
        if !(lp.is_finite() && lm.is_finite()) {
            break;
        }
        ratios.push(-(lp - lm) / (2.0 * h));
    }
    let m = ratios.len();
    if m == 0 {
        return Ok(ConditionResult::new(
            Verdict::Inconclusive,
            None,
            0,
            "degenerate: the density reaches its limit on the grid",
        ));
    }
    let r_end = grid[m - 1];
    let start = grid[..m].iter().position(|r| *r >= r_end / 10.0).unwrap_or(0);
    let tail = &ratios[start..];
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let end = ratios[m - 1];
    let w = Witness::Ratio { r: r_end, ratio: end, decreasing };
    let note = format!("ratio f'/(a-f) = {end:.3e} at R = {r_end}; criterion: < {DERIVATIVE_RATIO} and decreasing over the last decade");
    if m < grid.len() {
        // The gap underflowed part-way; a ratio already large and growing is a failure.
        let growing = tail.windows(2).all(|w| w[1] >= w[0]);
        let v = if end >= DERIVATIVE_RATIO && growing { Verdict::Fail } else { Verdict::Inconclusive };
        return Ok(ConditionResult::new(v, Some(w), m, format!("{note} (gap underflows beyond R = {r_end})")));
    }
    let v = if end < DERIVATIVE_RATIO && decreasing { Verdict::Pass } else { Verdict::Fail };
    Ok(ConditionResult::new(v, Some(w), m, note))
}

/// Boundary and solid averages on `b`: `⨍_∂B f ≤ a^{1/n} (⨍_B f)^{(n−1)/n}`.
pub fn check_mean_inequality(d: &Density, b: &Ball) -> Result<ConditionResult> {
    check_mean_inequality_res(d, b, DEFAULT_RES)
}

pub fn check_mean_inequality_res(d: &Density, b: &Ball, res: usize) -> Result<ConditionResult> {
    b.validate()?;
    let a = match require_limit(d) {
        Ok(a) => a,
        Err(r) => return Ok(r),
    };
    let (ok, w) = mean_inequality_sides(d, b, a, res)?;
    let v = if ok { Verdict::Pass } else { Verdict::Fail };
    Ok(ConditionResult::new(v, Some(w), 1, "boundary average against solid average"))
}

fn mean_inequality_sides(d: &Density, b: &Ball, a: f64, res: usize) -> Result<(bool, Witness)> {
    let n = b.dim() as f64;
    let m = measure(&Region::Ball(b.clone()), d, res)?;
    let (area, vol) = (b.euclidean_perimeter(), b.euclidean_volume());
    let lhs = m.perimeter / area;
    let rhs = a.powf(1.0 / n) * (m.volume / vol).powf((n - 1.0) / n);
    let tol = m.perimeter_error / area + m.volume_error / vol;
    Ok((lhs <= rhs + tol, Witness::Ball { ball: b.clone(), lhs, rhs, tolerance: tol }))
}

/// Mean inequality on the first ball of the distance ladder that satisfies it.
pub fn search_mean_inequality(d: &Density, v: f64, budget: &Budget) -> Result<ConditionResult> {
    let a = match require_limit(d) {
        Ok(a) => a,
        Err(r) => return Ok(r),
    };
    let mut last = None;
    let (hit, count) = search_balls(d, v, budget.r0, budget, |b| {
        let (ok, w) = mean_inequality_sides(d, b, a, budget.res)?;
        if ok {
            Ok(Step::Accept(w))
        } else {
            last = Some(w);
            Ok(Step::Next)
        }
    })?;
    Ok(match hit {
        Some(w) => ConditionResult::new(Verdict::Pass, Some(w), count, "mean inequality holds on the witness ball"),
        None => ConditionResult::new(Verdict::Fail, last, count, "mean inequality violated on every ball of the ladder"),
    })
}

/// `f″ + (n−1) f′/r ≤ 1e−10` on 512 points of `[lo, hi]`.
pub fn check_superharmonic(d: &Density, lo: f64, hi: f64) -> Result<ConditionResult> {
    check_superharmonic_points(d, lo, hi, 512)
}

fn check_superharmonic_points(d: &Density, lo: f64, hi: f64, points: usize) -> Result<ConditionResult> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::Domain(format!("interval [{lo}, {hi}] is empty")));
    }
    if lo <= 0.0 {
        return Err(Error::Precondition(format!("interval [{lo}, {hi}] touches the singular origin")));
    }
    let Some(p) = d.profile() else {
        return Ok(ConditionResult::inapplicable("needs a radial density"));
    };
    if let Err(r) = require_limit(d) {
        return Ok(r);
    }
    let nm1 = d.dim() as f64 - 1.0;
    let (mut worst_r, mut worst) = (lo, f64::NEG_INFINITY);
    for i in 0..points {
        let r = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let (_, d1, d2) = p.eval3(r);
        let lap = d2 + nm1 * d1 / r;
        if lap > worst {
            worst = lap;
            worst_r = r;
        }
    }
    let w = Witness::Laplacian { lo, hi, r: worst_r, value: worst };
    let v = if worst <= LAPLACIAN_TOL { Verdict::Pass } else { Verdict::Fail };
    Ok(ConditionResult::new(v, Some(w), points, format!("max radial Laplacian {worst:.3e} at r = {worst_r}")))
}

/// Re-checks a passing witness in isolation at doubled resolution.
pub fn reverify(d: &Density, c: Condition, w: &Witness, budget: &Budget) -> Result<bool> {
    let a = resolve_limit(d)?;
    let n = d.dim();
    Ok(match (c, w) {
        (Condition::SlowGrowthBall, Witness::Ball { ball, .. }) => {
            slow_growth_on_ball(d, ball, a, 8192).is_some_and(|r| r.0)
        }
        (Condition::MeanInequality, Witness::Ball { ball, .. }) => mean_inequality_sides(d, ball, a, 2 * budget.res)?.0,
        (Condition::SlowGrowthRadial, Witness::Radius { r, .. }) => {
            let p = d.profile().ok_or_else(|| Error::Inapplicable("needs a radial density".into()))?;
            let (lf, ln) = (p.log_gap(r + budget.tau).unwrap_or(f64::NAN), p.log_gap(*r).unwrap_or(f64::NAN));
            slow_growth(lf, ln, a, n).0
        }
        (Condition::ExponentialGap, Witness::Ladder { rates, radii }) => {
            let p = d.profile().ok_or_else(|| Error::Inapplicable("needs a radial density".into()))?;
            rates.iter().zip(radii).all(|(c, r)| p.log_gap(*r).is_some_and(|l| l >= -c * r))
        }
        (Condition::ExponentialGap, Witness::Radius { r, rhs, .. }) => {
            let p = d.profile().ok_or_else(|| Error::Inapplicable("needs a radial density".into()))?;
            p.log_gap(*r).is_some_and(|l| l >= *rhs)
        }
        (Condition::DerivativeCondition, Witness::Ratio { .. }) => {
            let grid = derivative_grid(budget.derivative_range, 2 * budget.derivative_points.max(2) - 1);
            check_derivative_condition(d, &grid)?.verdict == Verdict::Pass
        }
        (Condition::Superharmonic, Witness::Laplacian { lo, hi, .. }) => {
            check_superharmonic_points(d, *lo, *hi, 1024)?.verdict == Verdict::Pass
        }
        _ => return Err(Error::Config(format!("witness does not belong to condition {}", c.name()))),
    })
}

/// Runs every applicable checker and aggregates the verdicts.
pub fn existence_report(d: &Density, v: f64, budget: &Budget) -> Result<ExistenceReport> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Domain(format!("volume must be positive, got {v}")));
    }
    let limit = resolve_limit(d);
    let mut notes = Vec::new();
    let a = match &limit {
        Ok(a) => Some(*a),
        Err(Error::Inapplicable(msg)) => {
            notes.push(msg.clone());
            if d.profile().is_some_and(|p| p.diverges()) {
                notes.push(
                    "radial density diverging to infinity: existence for every volume follows from the diverging-radial theorem (informational, not checked)".into(),
                );
            }
            None
        }
        Err(_) => return Err(limit.unwrap_err()),
    };
    let run = |c: Condition| -> Result<ConditionResult> {
        if a.is_none() {
            return Ok(ConditionResult::inapplicable("no finite positive limit at infinity"));
        }
        match c {
            Condition::SlowGrowthBall => check_slow_growth_ball(d, v, budget.r0, budget),
            Condition::SlowGrowthRadial => check_radial_slow_growth(d, budget.tau, budget.r0, budget.r_max),
            Condition::ExponentialGap => check_exponential_gap_ladder(d, &budget.gap_rates, budget.gap_rho, budget.r_max),
            Condition::DerivativeCondition => {
                check_derivative_condition(d, &derivative_grid(budget.derivative_range, budget.derivative_points))
            }
            Condition::MeanInequality => search_mean_inequality(d, v, budget),
            Condition::Superharmonic => {
                let (lo, hi) = budget.superharmonic_interval;
                check_superharmonic(d, lo, hi)
            }
        }
    };
    let results: Vec<ConditionResult> =
        Condition::ALL.par_iter().map(|c| run(*c)).collect::<Result<Vec<_>>>()?;
    let mut it = results.into_iter();
    let mut next = || it.next().expect("one result per condition");
    let verdicts = Verdicts {
        slow_growth_ball: next(),
        slow_growth_radial: next(),
        exponential_gap: next(),
        derivative_condition: next(),
        mean_inequality: next(),
        superharmonic: next(),
    };
    let certified = Condition::ALL.iter().any(|c| verdicts.get(*c).verdict == Verdict::Pass);
    if verdicts.derivative_condition.applicable {
        notes.push(format!(
            "derivative condition read as ratio < {DERIVATIVE_RATIO} and decreasing over the last decade of radii"
        ));
    }
    Ok(ExistenceReport {
        density: d.name().to_string(),
        dim: d.dim(),
        a,
        volume: v,
        verdicts,
        certified,
        budget: budget.clone(),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_deficit_matches_direct_form() {
        for l in [-5.0, -1.0] {
            let direct = (-(1.0 - f64::exp(l)).ln()).ln();
            assert!((log_deficit(l, 0.0) - direct).abs() < 1e-8 * direct.abs().max(1.0));
        }
        // -ln(1 - x) = x(1 + x/2 + x²/3 + ...) for tiny x.
        let x = f64::exp(-30.0);
        assert!((log_deficit(-30.0, 0.0) - (-30.0 + (x / 2.0).ln_1p())).abs() < 1e-14);
    }

    #[test]
    fn slow_growth_far_tail_does_not_pass_by_underflow() {
        // e^{-R} gaps below any absolute slack still decide correctly.
        let (ok, _, _) = slow_growth(-1001.0, -1000.0, 1.0, 3);
        assert!(!ok);
        let (ok, _, _) = slow_growth(-1000.1, -1000.0, 1.0, 3);
        assert!(ok);
    }
}
