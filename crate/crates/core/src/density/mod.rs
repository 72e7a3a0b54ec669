//! Density models on ℝⁿ: evaluation, log-gradient, JSON specs and classification.

mod classify;
mod piecewise;
mod profile;

pub use classify::{classify, ClassificationReport, SamplingSpec, Verdict};
pub use piecewise::{
    bump, bump_d1, BrickDensity, BrickGeometry, BrickParams, Bump, BumpyDensity, Shell, ShellDensity, StitchedDensity,
    CAP_SEGMENTS, ZONE_TOL,
};
pub use profile::{Profile, RadialTable, Smoothness};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::quadrature::norm;

/// The concrete weight function behind a [`Density`].
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Radial(Profile),
    Brick(BrickDensity),
    Stitched(StitchedDensity),
    Bumpy(BumpyDensity),
    Shells(ShellDensity),
}

/// A positive weight on ℝⁿ. Immutable; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    dim: usize,
    model: Model,
    name: String,
}

impl Density {
    pub fn new(name: impl Into<String>, dim: usize, model: Model) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Config(format!("dimension must be at least 2, got {dim}")));
        }
        match &model {
            Model::Radial(p) => p.validate()?,
            Model::Brick(_) | Model::Stitched(_) if dim != 3 => {
                return Err(Error::Config("brick densities live in dimension 3".into()));
            }
            Model::Bumpy(b) if b.bumps.iter().any(|bb| bb.center.len() != dim) => {
                return Err(Error::Config("bump centre dimension mismatch".into()));
            }
            Model::Shells(s) if s.shells.iter().any(|sh| sh.center.len() != dim) => {
                return Err(Error::Config("shell centre dimension mismatch".into()));
            }
            _ => {}
        }
        Ok(Self { dim, model, name: name.into() })
    }

    pub fn radial(name: impl Into<String>, dim: usize, profile: Profile) -> Result<Self> {
        Self::new(name, dim, Model::Radial(profile))
    }

    pub fn constant(a: f64, dim: usize) -> Self {
        Self::radial("constant", dim, Profile::Constant { a }).expect("constant density parameters")
    }

    pub fn power_tail(alpha: f64, dim: usize) -> Self {
        Self::radial("power_tail", dim, Profile::PowerTail { alpha }).expect("power_tail parameters")
    }

    pub fn exp_tail(rate: f64, dim: usize) -> Self {
        Self::radial("exp_tail", dim, Profile::ExpTail { rate }).expect("exp_tail parameters")
    }

    pub fn double_exp_tail(dim: usize) -> Self {
        Self::radial("double_exp_tail", dim, Profile::DoubleExpTail).expect("double_exp_tail")
    }

    pub fn gaussian_like(dim: usize) -> Self {
        Self::radial("gaussian_like", dim, Profile::GaussianLike).expect("gaussian_like")
    }

    pub fn two_phase(lambda: f64, dim: usize) -> Self {
        Self::radial("two_phase", dim, Profile::TwoPhase { lambda, outer: 1.0, radius: 1.0 }).expect("two_phase")
    }

    pub fn inverse_tail(dim: usize) -> Self {
        Self::radial("inverse_tail", dim, Profile::InverseTail).expect("inverse_tail")
    }

    pub fn linear(base: f64, slope: f64, dim: usize) -> Self {
        Self::radial("linear", dim, Profile::Linear { base, slope }).expect("linear parameters")
    }

    pub fn exp_growth(c: f64, dim: usize) -> Self {
        Self::radial("exp_growth", dim, Profile::ExpGrowth { c }).expect("exp_growth parameters")
    }

    pub fn log_growth(dim: usize) -> Self {
        Self::radial("log_growth", dim, Profile::LogGrowth).expect("log_growth")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Copy of this density in another dimension (radial models only).
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.name.clone(), dim, self.model.clone())
    }

    pub fn profile(&self) -> Option<&Profile> {
        match &self.model {
            Model::Radial(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.model, Model::Radial(_))
    }

    /// True when the model is invariant under rotations about the `x₁` axis.
    pub fn is_axisymmetric(&self) -> bool {
        matches!(self.model, Model::Radial(_) | Model::Brick(_) | Model::Stitched(_))
    }

    /// Declared finite limit at infinity.
    pub fn limit(&self) -> Option<f64> {
        match &self.model {
            Model::Radial(p) => p.limit(),
            Model::Brick(b) => Some(b.w),
            _ => None,
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match &self.model {
            Model::Radial(p) => p.smoothness(),
            Model::Bumpy(_) => Smoothness::AnalyticWithGradient,
            _ => Smoothness::PiecewiseConstant,
        }
    }

    /// Unchecked evaluation; `x` must have the right dimension.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.model {
            Model::Radial(p) => p.value(norm(x)),
            Model::Brick(b) => {
                let (rho, phi) = spherical(x);
                b.zone(rho, phi)
            }
            Model::Stitched(s) => {
                let (rho, phi) = spherical(x);
                s.zone(rho, phi)
            }
            Model::Bumpy(b) => b.value(x),
            Model::Shells(s) => s.value(x),
        }
    }

    /// Evaluation at spherical coordinates `(ρ, φ)` about the `x₁` axis, without
    /// the round-off of a Cartesian detour for the brick models.
    pub fn value_axisym(&self, rho: f64, phi: f64) -> f64 {
        match &self.model {
            Model::Radial(p) => p.value(rho),
            Model::Brick(b) => b.zone(rho, phi),
            Model::Stitched(s) => s.zone(rho, phi),
            _ => {
                let mut x = vec![0.0; self.dim];
                x[0] = rho * phi.cos();
                x[1] = rho * phi.sin();
                self.value(&x)
            }
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Domain(format!("point has dimension {}, density has {}", x.len(), self.dim)));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {x:?}")));
        }
        Ok(())
    }

    /// `f(x)`, with interfaces taking the lower one-sided limit.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.value(x))
    }

    /// `∇ log f(x)`.
    pub fn eval_log_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let r = norm(x);
        let h = (1e-6 * r).max(1e-6);
        let nondiff = || Error::NonDifferentiable { point: x.to_vec() };
        match &self.model {
            Model::Radial(p) => match p.smoothness() {
                Smoothness::AnalyticWithGradient => {
                    if r == 0.0 {
                        return if p.singular_at_origin() { Err(nondiff()) } else { Ok(vec![0.0; self.dim]) };
                    }
                    let s = p.log_derivative(r) / r;
                    Ok(x.iter().map(|v| v * s).collect())
                }
                Smoothness::PiecewiseConstant => {
                    if p.interfaces().iter().any(|i| (r - i).abs() <= h) {
                        Err(nondiff())
                    } else {
                        Ok(vec![0.0; self.dim])
                    }
                }
                Smoothness::FiniteDifferenceOnly => {
                    if r == 0.0 && p.singular_at_origin() {
                        return Err(nondiff());
                    }
                    Ok(self.fd_log_gradient(x, h))
                }
            },
            Model::Bumpy(b) => {
                if r == 0.0 {
                    return Err(nondiff());
                }
                Ok(b.log_gradient(x))
            }
            Model::Shells(s) => {
                if s.interface_distance(x) <= h || r == 0.0 {
                    return Err(nondiff());
                }
                let sc = 1.0 / ((1.0 + r) * self.value(x) * r);
                Ok(x.iter().map(|v| v * sc).collect())
            }
            Model::Brick(_) | Model::Stitched(_) => {
                let f0 = self.value(x);
                let mut y = x.to_vec();
                for i in 0..self.dim {
                    for d in [-h, h] {
                        y[i] = x[i] + d;
                        if self.value(&y) != f0 {
                            return Err(nondiff());
                        }
                    }
                    y[i] = x[i];
                }
                Ok(vec![0.0; self.dim])
            }
        }
    }

    /// Central finite differences of `log f` with step `h` per axis.
    pub fn fd_log_gradient(&self, x: &[f64], h: f64) -> Vec<f64> {
        let mut y = x.to_vec();
        (0..x.len())
            .map(|i| {
                y[i] = x[i] + h;
                let fp = self.value(&y).ln();
                y[i] = x[i] - h;
                let fm = self.value(&y).ln();
                y[i] = x[i];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    /// `a − f(x)` for densities with a declared limit, computed without
    /// cancellation for the analytic tails.
    pub fn gap(&self, x: &[f64]) -> Option<f64> {
        match &self.model {
            Model::Radial(p) => p.gap(norm(x)),
            _ => self.limit().map(|a| a - self.value(x)),
        }
    }

    /// `ln(a − f(x))`; `−∞` where the gap is exactly zero.
    pub fn log_gap(&self, x: &[f64]) -> Option<f64> {
        match &self.model {
            Model::Radial(p) => p.log_gap(norm(x)),
            _ => self.gap(x).map(|g| if g > 0.0 { g.ln() } else { f64::NEG_INFINITY }),
        }
    }

    /// JSON spec understood by [`Density::from_json`].
    pub fn to_json(&self) -> Value {
        let mut v = match &self.model {
            Model::Radial(p) => profile_json(p),
            Model::Brick(b) => json!({"model": "piecewise", "params": {"kind": "brick", "brick": b.params()}}),
            Model::Stitched(s) => {
                let shells: Vec<_> = s.bricks.iter().map(|b| b.params()).collect();
                json!({"model": "piecewise", "params": {"kind": "stitched", "shells": shells}})
            }
            Model::Bumpy(b) => json!({"model": "piecewise", "params": {"kind": "bumpy", "bumps": b.bumps}}),
            Model::Shells(s) => json!({"model": "piecewise", "params": {"kind": "shells", "shells": s.shells}}),
        };
        v["dim"] = json!(self.dim);
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Config("density spec must be a JSON object".into()))?;
        let model = obj
            .get("model")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("density spec: missing string field `model`".into()))?;
        let dim = match obj.get("dim") {
            None => 2,
            Some(d) => d
                .as_u64()
                .ok_or_else(|| Error::Config("density spec: field `dim` must be a positive integer".into()))?
                as usize,
        };
        let empty = Value::Object(Default::default());
        let params = obj.get("params").unwrap_or(&empty);
        if !params.is_object() {
            return Err(Error::Config("density spec: field `params` must be an object".into()));
        }
        let num = |key: &str, default: Option<f64>| -> Result<f64> {
            match params.get(key) {
                Some(x) => x
                    .as_f64()
                    .ok_or_else(|| Error::Config(format!("density spec: `params.{key}` must be a number"))),
                None => default.ok_or_else(|| Error::Config(format!("density spec: missing `params.{key}`"))),
            }
        };
        let profile = match model {
            "constant" => Profile::Constant { a: num("a", Some(1.0))? },
            "power_tail" => Profile::PowerTail { alpha: num("alpha", None)? },
            "exp_tail" => Profile::ExpTail { rate: num("rate", Some(1.0))? },
            "double_exp_tail" => Profile::DoubleExpTail,
            "gaussian_like" => Profile::GaussianLike,
            "two_phase" => Profile::TwoPhase {
                lambda: num("lambda", None)?,
                outer: num("outer", Some(1.0))?,
                radius: num("radius", Some(1.0))?,
            },
            "inverse_tail" => Profile::InverseTail,
            "linear" => Profile::Linear { base: num("base", Some(1.0))?, slope: num("slope", Some(1.0))? },
            "exp_growth" => Profile::ExpGrowth { c: num("c", Some(1.0))? },
            "log_growth" => Profile::LogGrowth,
            "radial_table" => {
                let arr = |key: &str| -> Result<Vec<f64>> {
                    let src = obj.get(key).or_else(|| params.get(key)).ok_or_else(|| {
                        Error::Config(format!("density spec: radial_table needs array field `{key}`"))
                    })?;
                    serde_json::from_value(src.clone())
                        .map_err(|_| Error::Config(format!("density spec: `{key}` must be an array of numbers")))
                };
                Profile::Table(RadialTable::new(arr("r")?, arr("f")?)?)
            }
            "piecewise" => return Self::piecewise_from_json(params, dim),
            other => return Err(Error::Config(format!("density spec: unknown `model` \"{other}\""))),
        };
        Self::radial(model, dim, profile)
    }

    fn piecewise_from_json(params: &Value, dim: usize) -> Result<Self> {
        let kind = params
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("density spec: piecewise model needs `params.kind`".into()))?;
        let field = |key: &str| {
            params
                .get(key)
                .cloned()
                .ok_or_else(|| Error::Config(format!("density spec: piecewise `{kind}` needs `params.{key}`")))
        };
        let bad = |key: &str, e: serde_json::Error| Error::Config(format!("density spec: `params.{key}`: {e}"));
        let model = match kind {
            "brick" => {
                let p: BrickParams = serde_json::from_value(field("brick")?).map_err(|e| bad("brick", e))?;
                Model::Brick(BrickDensity::with_weights(p.eps, p.n, p.m, p.w)?)
            }
            "stitched" => {
                let ps: Vec<BrickParams> = serde_json::from_value(field("shells")?).map_err(|e| bad("shells", e))?;
                let bricks = ps
                    .iter()
                    .map(|p| BrickDensity::with_weights(p.eps, p.n, p.m, p.w))
                    .collect::<Result<Vec<_>>>()?;
                Model::Stitched(StitchedDensity::new(bricks)?)
            }
            "bumpy" => Model::Bumpy(BumpyDensity {
                bumps: serde_json::from_value(field("bumps")?).map_err(|e| bad("bumps", e))?,
            }),
            "shells" => Model::Shells(ShellDensity {
                shells: serde_json::from_value(field("shells")?).map_err(|e| bad("shells", e))?,
            }),
            other => return Err(Error::Config(format!("density spec: unknown piecewise kind \"{other}\""))),
        };
        Self::new(format!("piecewise_{kind}"), dim, model)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&serde_json::from_str(&text)?)
    }
}

fn profile_json(p: &Profile) -> Value {
    match p {
        Profile::Constant { a } => json!({"model": "constant", "params": {"a": a}}),
        Profile::PowerTail { alpha } => json!({"model": "power_tail", "params": {"alpha": alpha}}),
        Profile::ExpTail { rate } => json!({"model": "exp_tail", "params": {"rate": rate}}),
        Profile::DoubleExpTail => json!({"model": "double_exp_tail"}),
        Profile::GaussianLike => json!({"model": "gaussian_like"}),
        Profile::TwoPhase { lambda, outer, radius } => {
            json!({"model": "two_phase", "params": {"lambda": lambda, "outer": outer, "radius": radius}})
        }
        Profile::InverseTail => json!({"model": "inverse_tail"}),
        Profile::Linear { base, slope } => json!({"model": "linear", "params": {"base": base, "slope": slope}}),
        Profile::ExpGrowth { c } => json!({"model": "exp_growth", "params": {"c": c}}),
        Profile::LogGrowth => json!({"model": "log_growth"}),
        Profile::Table(t) => {
            let (r, f) = t.knots();
            json!({"model": "radial_table", "r": r, "f": f})
        }
    }
}

/// `(ρ, φ)` with `φ` the angle from the positive `x₁` axis.
pub fn spherical(x: &[f64]) -> (f64, f64) {
    let rho = norm(x);
    let perp = x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    (rho, perp.atan2(x[0]))
}

/// The standard examples, with their default parameters, in dimension `dim`.
pub fn builtin_catalog(dim: usize) -> Vec<Density> {
    vec![
        Density::constant(1.0, dim),
        Density::power_tail(2.0, dim),
        Density::exp_tail(1.0, dim),
        Density::double_exp_tail(dim),
        Density::gaussian_like(dim),
        Density::two_phase(0.5, dim),
        Density::inverse_tail(dim),
        Density::linear(1.0, 1.0, dim),
        Density::exp_growth(1.0, dim),
        Density::log_growth(dim),
    ]
}

/// Look up a catalog density by name.
pub fn catalog_density(name: &str, dim: usize) -> Option<Density> {
    builtin_catalog(dim).into_iter().find(|d| d.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(Density::constant(1.0, 2).eval(&[3.0, 4.0]).unwrap(), 1.0);
        let v = Density::power_tail(2.0, 2).eval(&[3.0, 0.0]).unwrap();
        assert!((v - (1.0 - 1.0 / 9.0)).abs() < 1e-15);
        assert_eq!(Density::two_phase(0.5, 2).eval(&[0.0, 1.0]).unwrap(), 0.5);
        assert!(matches!(Density::constant(1.0, 2).eval(&[f64::NAN, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(Density::constant(1.0, 2).eval(&[0.0, 0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn gradient_examples() {
        let g = Density::constant(1.0, 3).eval_log_gradient(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g, vec![0.0; 3]);
        let g = Density::gaussian_like(2).eval_log_gradient(&[1.0, 0.0]).unwrap();
        assert_eq!(g, vec![2.0, 0.0]);
        let d = Density::power_tail(1.0, 2);
        let g = d.eval_log_gradient(&[2.0, 0.0]).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15 && g[1] == 0.0);
        let fd = d.fd_log_gradient(&[2.0, 0.0], 1e-6);
        assert!((fd[0] - 0.5).abs() < 1e-6 * 0.5);
        assert!(matches!(
            Density::two_phase(0.5, 2).eval_log_gradient(&[1.0, 0.0]),
            Err(Error::NonDifferentiable { .. })
        ));
    }

    #[test]
    fn catalog_metadata() {
        let cat = builtin_catalog(2);
        let exp = cat.iter().find(|d| d.name() == "exp_tail").unwrap();
        assert_eq!(exp.limit(), Some(1.0));
        assert!(cat.iter().any(|d| d.name() == "double_exp_tail"));
        let c = cat.iter().find(|d| d.name() == "constant").unwrap();
        assert_eq!(c.eval_log_gradient(&[0.3, -2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(catalog_density("gaussian_like", 2).unwrap().limit(), None);
        for name in ["constant", "power_tail", "exp_tail", "double_exp_tail", "gaussian_like", "two_phase", "inverse_tail"] {
            assert!(catalog_density(name, 3).is_some(), "{name}");
        }
    }

    #[test]
    fn json_round_trip() {
        for d in builtin_catalog(3) {
            let back = Density::from_json(&d.to_json()).unwrap();
            assert_eq!(back.to_json(), d.to_json());
            assert_eq!(back.dim(), 3);
        }
        let t = Density::from_json(&json!({"model": "radial_table", "r": [0, 1, 2], "f": [1, 2, 2.5]})).unwrap();
        assert_eq!(t.eval(&[5.0, 0.0]).unwrap(), 2.5);
        let b = Density::new("b", 3, Model::Brick(BrickDensity::new(0.1, 1.0, 2.0, 3.0).unwrap())).unwrap();
        assert_eq!(Density::from_json(&b.to_json()).unwrap().to_json(), b.to_json());
    }

    #[test]
    fn json_errors_name_the_field() {
        let e = Density::from_json(&json!({"model": "nope"})).unwrap_err();
        assert!(e.to_string().contains("nope"));
        let e = Density::from_json(&json!({"model": "power_tail"})).unwrap_err();
        assert!(e.to_string().contains("alpha"));
        let e = Density::from_json(&json!({"model": "constant", "params": {"a": "x"}})).unwrap_err();
        assert!(e.to_string().contains("params.a"));
        let e = Density::from_json(&json!({"model": "radial_table", "r": [0, 1]})).unwrap_err();
        assert!(e.to_string().contains("`f`"));
    }
}
