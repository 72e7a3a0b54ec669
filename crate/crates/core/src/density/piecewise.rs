//! Non-radial and piecewise density models produced by the constructions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when deciding which side of an interface a point is on.
/// Points within this slack of an interface take the lower (interface) value.
pub const ZONE_TOL: f64 = 1e-12;

/// Number of polyline segments used to represent the radius-1 cap.
pub const CAP_SEGMENTS: usize = 64;

/// Geometry of the fundamental brick in spherical coordinates `(ρ, φ)` about
/// the positive `x₁` axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BrickGeometry {
    pub eps: f64,
    pub r1: f64,
    pub r2: f64,
    pub phi0: f64,
    /// Distance from the origin to the centre of the unit sphere carrying the cap.
    pub cap_centre: f64,
    /// Cap polyline `(φ, ρ)` with `φ` increasing from `0` to `φ0`.
    pub cap: Vec<(f64, f64)>,
}

impl BrickGeometry {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0 && eps <= 0.2) {
            return Err(Error::InvalidSpec(format!("eps must lie in (0, 0.2], got {eps}")));
        }
        let r1 = 1.0 / (eps * eps);
        let r2 = r1 + 1.0 / eps;
        let phi0 = (eps.powf(5.0 / 3.0) / r2).asin();
        let s = r1 * phi0.sin();
        if s >= 1.0 {
            return Err(Error::InvalidSpec("cap circle wider than the unit cap".into()));
        }
        let cap_centre = r1 * phi0.cos() + (1.0 - s * s).sqrt();
        let mut cap: Vec<(f64, f64)> = (0..=CAP_SEGMENTS)
            .map(|k| {
                let phi = phi0 * k as f64 / CAP_SEGMENTS as f64;
                (phi, Self::cap_exact(cap_centre, phi))
            })
            .collect();
        cap[CAP_SEGMENTS] = (phi0, r1);
        let g = Self { eps, r1, r2, phi0, cap_centre, cap };
        g.check()?;
        Ok(g)
    }

    fn cap_exact(c: f64, phi: f64) -> f64 {
        let cs = c * phi.sin();
        c * phi.cos() - (1.0 - cs * cs).sqrt()
    }

    /// Exact cap radius `γ(φ)` on the unit sphere.
    pub fn gamma_exact(&self, phi: f64) -> f64 {
        Self::cap_exact(self.cap_centre, phi)
    }

    /// Cap radius of the polyline representation.
    pub fn gamma(&self, phi: f64) -> f64 {
        let phi = phi.clamp(0.0, self.phi0);
        let k = self.cap.partition_point(|p| p.0 <= phi).clamp(1, self.cap.len() - 1);
        let (p0, r0) = self.cap[k - 1];
        let (p1, r1) = self.cap[k];
        if p1 == p0 {
            return r0;
        }
        let t = (phi - p0) / (p1 - p0);
        r0 + t * (r1 - r0)
    }

    fn check(&self) -> Result<()> {
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        if !(self.r1 < self.r2 && self.phi0 > 0.0 && self.phi0 < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidSpec("brick geometry out of range".into()));
        }
        let eps = self.eps;
        if rel(self.r1, 1.0 / (eps * eps)) > 1e-12
            || rel(self.r2 - self.r1, 1.0 / eps) > 1e-9
            || rel(self.r2 * self.phi0.sin(), eps.powf(5.0 / 3.0)) > 1e-12
        {
            return Err(Error::InvalidSpec("brick relations violated".into()));
        }
        Ok(())
    }

    /// Boundary polyline of the brick region in the `(ρ, φ)` half-plane.
    pub fn boundary(&self) -> Vec<[f64; 2]> {
        let mut pts = vec![[self.cap[0].1, 0.0], [self.r2, 0.0], [self.r2, self.phi0], [self.r1, self.phi0]];
        for &(phi, rho) in self.cap.iter().rev().skip(1) {
            if phi > 0.0 {
                pts.push([rho, phi]);
            }
        }
        pts
    }
}

/// The six-zone piecewise-constant brick density.
#[derive(Debug, Clone, PartialEq)]
pub struct BrickDensity {
    pub geometry: BrickGeometry,
    pub n: f64,
    pub m: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrickParams {
    pub eps: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "W")]
    pub w: f64,
}

impl BrickDensity {
    /// Brick with ordered weights `N ≤ M ≤ W`.
    pub fn new(eps: f64, n: f64, m: f64, w: f64) -> Result<Self> {
        if !(n <= m && m <= w) {
            return Err(Error::InvalidSpec(format!("weights must satisfy N ≤ M ≤ W, got {n}, {m}, {w}")));
        }
        Self::with_weights(eps, n, m, w)
    }

    /// Brick with arbitrary positive weights (used for stitched shells, where
    /// the outer weight is dictated by the next shell).
    pub fn with_weights(eps: f64, n: f64, m: f64, w: f64) -> Result<Self> {
        for (name, v) in [("N", n), ("M", m), ("W", w)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSpec(format!("weight {name} must be positive")));
            }
        }
        Ok(Self { geometry: BrickGeometry::new(eps)?, n, m, w })
    }

    pub fn params(&self) -> BrickParams {
        BrickParams { eps: self.geometry.eps, n: self.n, m: self.m, w: self.w }
    }

    /// Zone value at spherical coordinates; interfaces take the lower value.
    pub fn zone(&self, rho: f64, phi: f64) -> f64 {
        let g = &self.geometry;
        if rho > g.r2 * (1.0 + ZONE_TOL) {
            return self.w;
        }
        if phi > g.phi0 * (1.0 + ZONE_TOL) {
            return if rho <= g.r1 * (1.0 + ZONE_TOL) { self.n } else { self.m };
        }
        if phi >= g.phi0 * (1.0 - ZONE_TOL) {
            return self.n;
        }
        if rho <= g.gamma(phi) * (1.0 + ZONE_TOL) {
            self.n
        } else {
            self.m
        }
    }
}

/// Bricks stitched along the radius: shell `j` is `B(R₂,ⱼ) ∖ B(R₂,ⱼ₋₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StitchedDensity {
    pub bricks: Vec<BrickDensity>,
}

impl StitchedDensity {
    pub fn new(bricks: Vec<BrickDensity>) -> Result<Self> {
        if bricks.is_empty() {
            return Err(Error::InvalidSpec("stitched density needs at least one brick".into()));
        }
        for (j, w) in bricks.windows(2).enumerate() {
            if w[0].geometry.r2 >= w[1].geometry.cap[0].1 {
                return Err(Error::Spacing(format!(
                    "brick {} (R2 = {}) overlaps brick {} (cap starts at {})",
                    j + 1,
                    w[0].geometry.r2,
                    j + 2,
                    w[1].geometry.cap[0].1
                )));
            }
        }
        Ok(Self { bricks })
    }

    pub fn zone(&self, rho: f64, phi: f64) -> f64 {
        for b in &self.bricks {
            if rho <= b.geometry.r2 * (1.0 + ZONE_TOL) {
                return b.zone(rho, phi);
            }
        }
        self.bricks.last().map(|b| b.w).unwrap_or(1.0)
    }

    /// True when every shell joins its neighbour without a downward jump.
    pub fn is_nondecreasing(&self) -> bool {
        self.bricks.windows(2).all(|w| w[0].m <= w[1].n && w[0].w == w[1].n)
    }
}

/// Smooth compactly supported bump with `b(0) = 1`, `b(t) = 0` for `|t| ≥ 1`.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

pub fn bump_d1(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - t * t;
        bump(t) * (-2.0 * t / (q * q))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

/// `f₀(|x|)·(1 + Aᵢ b(|x − xᵢ|/rᵢ))` with `f₀ = 1 + ln(1 + r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpyDensity {
    pub bumps: Vec<Bump>,
}

impl BumpyDensity {
    pub fn base(r: f64) -> f64 {
        1.0 + r.ln_1p()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r = crate::quadrature::norm(x);
        let mut factor = 1.0;
        for b in &self.bumps {
            let t = crate::quadrature::dist(x, &b.center) / b.radius;
            if t < 1.0 {
                factor += b.amplitude * bump(t);
            }
        }
        Self::base(r) * factor
    }

    pub fn log_gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = crate::quadrature::norm(x);
        let mut g: Vec<f64> = if r > 0.0 {
            let s = 1.0 / ((1.0 + r) * Self::base(r) * r);
            x.iter().map(|v| v * s).collect()
        } else {
            vec![0.0; x.len()]
        };
        for b in &self.bumps {
            let d = crate::quadrature::dist(x, &b.center);
            let t = d / b.radius;
            if t < 1.0 && d > 0.0 {
                let s = b.amplitude * bump_d1(t) / (b.radius * (1.0 + b.amplitude * bump(t)) * d);
                for (gi, (xi, ci)) in g.iter_mut().zip(x.iter().zip(&b.center)) {
                    *gi += s * (xi - ci);
                }
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub center: Vec<f64>,
    pub inner: f64,
    pub outer: f64,
    pub weight: f64,
}

/// `f₀ = 2 + ln(1 + r)` plus `Kᵢ` on `B(xᵢ, rᵢ⁺)` except the sphere `|x − xᵢ| = rᵢ`
/// (within [`ZONE_TOL`] relative to the shell's inner radius plus centre norm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellDensity {
    pub shells: Vec<Shell>,
}

impl ShellDensity {
    pub fn base(r: f64) -> f64 {
        2.0 + r.ln_1p()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = Self::base(crate::quadrature::norm(x));
        for s in &self.shells {
            let d = crate::quadrature::dist(x, &s.center);
            let tol = ZONE_TOL * (s.inner + crate::quadrature::norm(&s.center));
            if d < s.outer && (d - s.inner).abs() > tol {
                v += s.weight;
            }
        }
        v
    }

    /// Distance from `x` to the nearest interface sphere.
    pub fn interface_distance(&self, x: &[f64]) -> f64 {
        self.shells
            .iter()
            .map(|s| {
                let d = crate::quadrature::dist(x, &s.center);
                (d - s.inner).abs().min((d - s.outer).abs())
            })
            .fold(f64::INFINITY, f64::min)
    }
}
