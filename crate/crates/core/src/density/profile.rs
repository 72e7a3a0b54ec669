//! Radial profiles `r ↦ f(r)` used by the radial density models.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Differentiability class of a density model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    AnalyticWithGradient,
    FiniteDifferenceOnly,
    PiecewiseConstant,
}

/// Knot table interpolated by a monotone cubic (Fritsch–Carlson slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTable {
    r: Vec<f64>,
    f: Vec<f64>,
    m: Vec<f64>,
}

impl RadialTable {
    pub fn new(r: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if r.len() != f.len() {
            return Err(Error::Config(format!(
                "radial_table: `r` has {} knots but `f` has {}",
                r.len(),
                f.len()
            )));
        }
        if r.len() < 2 {
            return Err(Error::Config("radial_table: need at least 2 knots in `r`".into()));
        }
        if r.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config("radial_table: `r` must be finite and non-negative".into()));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("radial_table: `r` must be strictly increasing".into()));
        }
        if f.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Config("radial_table: `f` must be finite and positive".into()));
        }
        let k = r.len();
        let delta: Vec<f64> = (0..k - 1).map(|i| (f[i + 1] - f[i]) / (r[i + 1] - r[i])).collect();
        let mut m = vec![0.0; k];
        m[0] = delta[0];
        m[k - 1] = delta[k - 2];
        for i in 1..k - 1 {
            m[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                (delta[i - 1] + delta[i]) / 2.0
            };
        }
        for i in 0..k - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[i] = t * a * delta[i];
                m[i + 1] = t * b * delta[i];
            }
        }
        Ok(Self { r, f, m })
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.r, &self.f)
    }

    fn locate(&self, x: f64) -> Option<usize> {
        let k = self.r.len();
        if x <= self.r[0] || x >= self.r[k - 1] {
            return None;
        }
        Some(self.r.partition_point(|v| *v <= x) - 1)
    }

    /// Value and first two derivatives.
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        let k = self.r.len();
        let Some(i) = self.locate(x) else {
            let v = if x <= self.r[0] { self.f[0] } else { self.f[k - 1] };
            return (v, 0.0, 0.0);
        };
        let h = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / h;
        let (y0, y1, m0, m1) = (self.f[i], self.f[i + 1], self.m[i] * h, self.m[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dv = (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1;
        let ddv = (12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * m1;
        (v, dv / h, ddv / (h * h))
    }
}

/// A radial profile. All variants are positive on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant { a: f64 },
    /// `1 − r^{−α}` for `r ≥ 2`, joined C¹ to a positive quadratic `A + B r²` inside.
    PowerTail { alpha: f64 },
    /// `1 − e^{−k r}` for `r ≥ 1`, joined C¹ to a positive quadratic inside.
    ExpTail { rate: f64 },
    DoubleExpTail,
    GaussianLike,
    /// `λ` inside the ball of the given radius, `outer` outside, lower value on the sphere.
    TwoPhase { lambda: f64, outer: f64, radius: f64 },
    /// `1` on `[0,1]`, monotone cubic on `[1,2]`, `1/r` beyond.
    InverseTail,
    Linear { base: f64, slope: f64 },
    ExpGrowth { c: f64 },
    /// `1 + ln(1 + r)`.
    LogGrowth,
    Table(RadialTable),
}

const POWER_JOIN: f64 = 2.0;
const EXP_JOIN: f64 = 1.0;

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::Config(format!("parameter `{field}` {msg}")));
        match self {
            Profile::Constant { a } if !(a.is_finite() && *a > 0.0) => bad("a", "must be positive"),
            Profile::PowerTail { alpha } if !(alpha.is_finite() && *alpha > 0.0) => bad("alpha", "must be positive"),
            Profile::ExpTail { rate } if !(rate.is_finite() && *rate > 0.0) => bad("rate", "must be positive"),
            Profile::TwoPhase { lambda, outer, radius } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    bad("lambda", "must be positive")
                } else if !(outer.is_finite() && *outer > 0.0) {
                    bad("outer", "must be positive")
                } else if !(radius.is_finite() && *radius > 0.0) {
                    bad("radius", "must be positive")
                } else {
                    Ok(())
                }
            }
            Profile::Linear { base, slope } => {
                if !(base.is_finite() && *base > 0.0) {
                    bad("base", "must be positive")
                } else if !(slope.is_finite() && *slope >= 0.0) {
                    bad("slope", "must be non-negative")
                } else {
                    Ok(())
                }
            }
            Profile::ExpGrowth { c } if !c.is_finite() => bad("c", "must be finite"),
            _ => Ok(()),
        }
    }

    fn power_patch(alpha: f64) -> (f64, f64) {
        let f2 = 1.0 - POWER_JOIN.powf(-alpha);
        let d2 = alpha * POWER_JOIN.powf(-alpha - 1.0);
        let b = d2 / (2.0 * POWER_JOIN);
        (f2 - b * POWER_JOIN * POWER_JOIN, b)
    }

    fn exp_patch(k: f64) -> (f64, f64) {
        let f1 = -(-k * EXP_JOIN).exp_m1();
        let d1 = k * (-k * EXP_JOIN).exp();
        let b = d1 / (2.0 * EXP_JOIN);
        (f1 - b * EXP_JOIN * EXP_JOIN, b)
    }

    // Hermite cubic on [1, 2] through (1, 1, 0) and (2, 1/2, -1/4).
    fn inverse_mid(r: f64) -> (f64, f64, f64) {
        let t = r - 1.0;
        let (y0, y1, m0, m1) = (1.0, 0.5, 0.0, -0.25);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let dv = (6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1;
        let ddv = (12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * m1;
        (v, dv, ddv)
    }

    /// `(f, f′, f″)` at radius `r ≥ 0`. Derivatives of piecewise-constant
    /// profiles are zero away from the interface.
    pub fn eval3(&self, r: f64) -> (f64, f64, f64) {
        match self {
            Profile::Constant { a } => (*a, 0.0, 0.0),
            Profile::PowerTail { alpha } => {
                let al = *alpha;
                if r >= POWER_JOIN {
                    let p = r.powf(-al);
                    (1.0 - p, al * p / r, -al * (al + 1.0) * p / (r * r))
                } else {
                    let (a, b) = Self::power_patch(al);
                    (a + b * r * r, 2.0 * b * r, 2.0 * b)
                }
            }
            Profile::ExpTail { rate } => {
                let k = *rate;
                if r >= EXP_JOIN {
                    let e = (-k * r).exp();
                    (-(-k * r).exp_m1(), k * e, -k * k * e)
                } else {
                    let (a, b) = Self::exp_patch(k);
                    (a + b * r * r, 2.0 * b * r, 2.0 * b)
                }
            }
            Profile::DoubleExpTail => {
                let er = r.exp();
                let g = (-er).exp();
                (-(-er).exp_m1(), er * g, (er - er * er) * g)
            }
            Profile::GaussianLike => {
                let v = (r * r).exp();
                (v, 2.0 * r * v, (2.0 + 4.0 * r * r) * v)
            }
            Profile::TwoPhase { lambda, outer, radius } => {
                if r < *radius {
                    (*lambda, 0.0, 0.0)
                } else if r > *radius {
                    (*outer, 0.0, 0.0)
                } else {
                    (lambda.min(*outer), 0.0, 0.0)
                }
            }
            Profile::InverseTail => {
                if r <= 1.0 {
                    (1.0, 0.0, 0.0)
                } else if r < 2.0 {
                    Self::inverse_mid(r)
                } else {
                    (1.0 / r, -1.0 / (r * r), 2.0 / (r * r * r))
                }
            }
            Profile::Linear { base, slope } => (base + slope * r, *slope, 0.0),
            Profile::ExpGrowth { c } => {
                let v = (c * r).exp();
                (v, c * v, c * c * v)
            }
            Profile::LogGrowth => (1.0 + r.ln_1p(), 1.0 / (1.0 + r), -1.0 / ((1.0 + r) * (1.0 + r))),
            Profile::Table(t) => t.eval3(r),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Profile::Constant { a } => *a,
            Profile::GaussianLike => (r * r).exp(),
            _ => self.eval3(r).0,
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        self.eval3(r).1
    }

    pub fn d2(&self, r: f64) -> f64 {
        self.eval3(r).2
    }

    /// `v′(r) = f′(r)/f(r)`, evaluated without overflow for the growing models.
    pub fn log_derivative(&self, r: f64) -> f64 {
        match self {
            Profile::GaussianLike => 2.0 * r,
            Profile::ExpGrowth { c } => *c,
            _ => {
                let (f, d, _) = self.eval3(r);
                d / f
            }
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self {
            Profile::TwoPhase { .. } => Smoothness::PiecewiseConstant,
            Profile::Table(_) => Smoothness::FiniteDifferenceOnly,
            _ => Smoothness::AnalyticWithGradient,
        }
    }

    /// True when `∇f` has a cone singularity at the origin (`f′(0) ≠ 0`).
    pub fn singular_at_origin(&self) -> bool {
        match self {
            Profile::Linear { slope, .. } => *slope != 0.0,
            Profile::ExpGrowth { c } => *c != 0.0,
            Profile::LogGrowth | Profile::DoubleExpTail => true,
            Profile::Table(t) => t.eval3(0.0).1 != 0.0,
            _ => false,
        }
    }

    /// Radii where the profile is not smooth (quadrature breakpoints).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::PowerTail { .. } => vec![POWER_JOIN],
            Profile::ExpTail { .. } => vec![EXP_JOIN],
            Profile::TwoPhase { radius, .. } => vec![*radius],
            Profile::InverseTail => vec![1.0, 2.0],
            Profile::Table(t) => t.r.clone(),
            _ => Vec::new(),
        }
    }

    /// Radii where the profile jumps.
    pub fn interfaces(&self) -> Vec<f64> {
        match self {
            Profile::TwoPhase { lambda, outer, radius } if lambda != outer => vec![*radius],
            _ => Vec::new(),
        }
    }

    /// Declared finite positive limit at infinity.
    pub fn limit(&self) -> Option<f64> {
        match self {
            Profile::Constant { a } => Some(*a),
            Profile::PowerTail { .. } | Profile::ExpTail { .. } | Profile::DoubleExpTail => Some(1.0),
            Profile::TwoPhase { outer, .. } => Some(*outer),
            Profile::Table(t) => t.f.last().copied(),
            _ => None,
        }
    }

    /// True when the profile is known to diverge to `+∞`.
    pub fn diverges(&self) -> bool {
        match self {
            Profile::GaussianLike | Profile::LogGrowth => true,
            Profile::Linear { slope, .. } => *slope > 0.0,
            Profile::ExpGrowth { c } => *c > 0.0,
            _ => false,
        }
    }

    /// `a − f(r)` without cancellation, when a finite limit is declared.
    pub fn gap(&self, r: f64) -> Option<f64> {
        let a = self.limit()?;
        Some(match self {
            Profile::Constant { .. } => 0.0,
            Profile::PowerTail { alpha } if r >= POWER_JOIN => r.powf(-alpha),
            Profile::ExpTail { rate } if r >= EXP_JOIN => (-rate * r).exp(),
            Profile::DoubleExpTail => (-r.exp()).exp(),
            _ => a - self.value(r),
        })
    }

    /// `ln(a − f(r))`, finite even where the gap underflows. `−∞` for a zero gap.
    pub fn log_gap(&self, r: f64) -> Option<f64> {
        self.limit()?;
        Some(match self {
            Profile::PowerTail { alpha } if r >= POWER_JOIN => -alpha * r.ln(),
            Profile::ExpTail { rate } if r >= EXP_JOIN => -rate * r,
            Profile::DoubleExpTail => -r.exp(),
            _ => {
                let g = self.gap(r).unwrap_or(0.0);
                if g > 0.0 {
                    g.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        })
    }

    /// `Φ(r) = ∫₀^r s f(s) ds`, the 2D weighted area of the disc of radius `r` over `2π`.
    pub fn moment1(&self, r: f64) -> f64 {
        match self {
            Profile::Constant { a } => a * r * r / 2.0,
            Profile::Linear { base, slope } => base * r * r / 2.0 + slope * r * r * r / 3.0,
            Profile::GaussianLike => (r * r).exp_m1() / 2.0,
            Profile::TwoPhase { lambda, outer, radius } => {
                if r <= *radius {
                    lambda * r * r / 2.0
                } else {
                    lambda * radius * radius / 2.0 + outer * (r * r - radius * radius) / 2.0
                }
            }
            _ => self.integrate(r, |s, f| s * f),
        }
    }

    /// `∫₀^r s^{n-1} f(s) ds` (radial mass over `|S^{n-1}|`).
    pub fn moment(&self, n: usize, r: f64) -> f64 {
        if n == 2 {
            return self.moment1(r);
        }
        match self {
            Profile::Constant { a } => a * r.powi(n as i32) / n as f64,
            _ => self.integrate(r, |s, f| s.powi(n as i32 - 1) * f),
        }
    }

    fn integrate<F: Fn(f64, f64) -> f64>(&self, r: f64, g: F) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let gl = gl16();
        let mut cuts = vec![0.0];
        cuts.extend(self.breakpoints().into_iter().filter(|b| *b > 0.0 && *b < r));
        cuts.push(r);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let panels = ((w[1] - w[0]) * 2.0).ceil().clamp(1.0, 256.0) as usize;
            total += gl.integrate(w[0], w[1], panels, |s| g(s, self.value(s)));
        }
        total
    }
}

fn gl16() -> &'static GaussLegendre {
    use std::sync::OnceLock;
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(16))
}
