//! Ball quadrature. Radial densities reduce to one-dimensional integrals over
//! the distance to the origin; other densities use product rules about the centre.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::density::{Density, Model};
use crate::error::{Error, Result};
use crate::quadrature::{norm, radical_inverse, unit_ball_volume, GaussLegendre};

pub(crate) fn gl8() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(8))
}

/// `|S^{n-1}|`.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// `∫₀ᵗ sinᵏ s ds`.
fn sin_power_integral(k: usize, t: f64) -> f64 {
    match k {
        0 => t,
        1 => {
            let h = (t / 2.0).sin();
            2.0 * h * h
        }
        _ => {
            let kf = k as f64;
            -t.sin().powi(k as i32 - 1) * t.cos() / kf + (kf - 1.0) / kf * sin_power_integral(k - 2, t)
        }
    }
}

/// Measure of the geodesic cap of angular radius `t` on the unit sphere `S^{n-1}`.
pub fn cap_measure(n: usize, t: f64) -> f64 {
    if t >= PI {
        return sphere_area(n);
    }
    (n - 1) as f64 * unit_ball_volume(n - 1) * sin_power_integral(n - 2, t)
}

/// Angular radius of `S(ρ) ∩ B(c, b)` seen from the origin, `|c| = dist > 0`.
pub(crate) fn cap_angle(rho: f64, dist: f64, b: f64) -> f64 {
    if rho + dist <= b {
        return PI;
    }
    let s2 = (b - rho + dist) * (b + rho - dist) / (4.0 * rho * dist);
    if s2 <= 0.0 {
        0.0
    } else if s2 >= 1.0 {
        PI
    } else {
        2.0 * s2.sqrt().asin()
    }
}

/// Radii at which the density is not smooth, for splitting radial integrals.
pub(crate) fn radial_breaks(d: &Density) -> Vec<f64> {
    match d.model() {
        Model::Radial(p) => p.breakpoints(),
        Model::Brick(b) => vec![b.geometry.cap[0].1, b.geometry.r1, b.geometry.r2],
        Model::Stitched(s) => s
            .bricks
            .iter()
            .flat_map(|b| [b.geometry.cap[0].1, b.geometry.r1, b.geometry.r2])
            .collect(),
        _ => Vec::new(),
    }
}

fn unit_frame(dir: &[f64]) -> [[f64; 3]; 3] {
    let e = [dir[0], dir[1], dir[2]];
    let helper = if e[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = helper[0] * e[0] + helper[1] * e[1] + helper[2] * e[2];
    let mut u = [helper[0] - dot * e[0], helper[1] - dot * e[1], helper[2] - dot * e[2]];
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u = [u[0] / nu, u[1] / nu, u[2] / nu];
    let v = [e[1] * u[2] - e[2] * u[1], e[2] * u[0] - e[0] * u[2], e[0] * u[1] - e[1] * u[0]];
    [e, u, v]
}

/// `(volume, perimeter)` of `B(center, b)` at the given resolution.
pub(crate) fn ball_measures(center: &[f64], b: f64, d: &Density, res: usize) -> Result<(f64, f64)> {
    let n = d.dim();
    let panels = (res / 8).max(1);
    let gl = gl8();
    if let Model::Radial(p) = d.model() {
        let dist = norm(center);
        let breaks = radial_breaks(d);
        if dist <= 1e-14 * b {
            return Ok((sphere_area(n) * p.moment(n, b), sphere_area(n) * b.powi(n as i32 - 1) * p.value(b)));
        }
        let mut vol = 0.0;
        if b > dist {
            vol += sphere_area(n) * p.moment(n, b - dist);
        }
        let (lo, hi) = ((dist - b).abs(), dist + b);
        let (m, w) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        let mut cuts = vec![0.0, PI];
        cuts.extend(breaks.iter().filter(|bp| **bp > lo && **bp < hi).map(|bp| ((m - bp) / w).clamp(-1.0, 1.0).acos()));
        cuts.sort_by(f64::total_cmp);
        for c in cuts.windows(2) {
            vol += gl.integrate(c[0], c[1], panels, |psi| {
                let rho = m - w * psi.cos();
                if rho <= 0.0 {
                    return 0.0;
                }
                let t = cap_angle(rho, dist, b);
                p.value(rho) * rho.powi(n as i32 - 1) * cap_measure(n, t) * w * psi.sin()
            });
        }
        // Boundary: angle s from the outward direction of the centre.
        let mut cuts = vec![0.0, PI];
        for bp in &breaks {
            let c = (bp * bp - dist * dist - b * b) / (2.0 * dist * b);
            if c > -1.0 && c < 1.0 {
                cuts.push(c.acos());
            }
        }
        cuts.sort_by(f64::total_cmp);
        let sphere_ring = (n - 1) as f64 * unit_ball_volume(n - 1);
        let mut per = 0.0;
        for c in cuts.windows(2) {
            per += gl.integrate(c[0], c[1], panels, |s| {
                let r2 = dist * dist + b * b + 2.0 * dist * b * s.cos();
                p.value(r2.max(0.0).sqrt()) * s.sin().powi(n as i32 - 2)
            });
        }
        per *= sphere_ring * b.powi(n as i32 - 1);
        return Ok((vol, per));
    }
    match n {
        2 => {
            let k = 4 * res;
            let dt = 2.0 * PI / k as f64;
            let dirs: Vec<[f64; 2]> = (0..k).map(|i| [(i as f64 * dt).cos(), (i as f64 * dt).sin()]).collect();
            let ring = |s: f64| -> f64 {
                dirs.iter().map(|u| d.value(&[center[0] + s * u[0], center[1] + s * u[1]])).sum::<f64>() * dt
            };
            let vol = gl.integrate(0.0, b, panels, |s| s * ring(s));
            let per = b * ring(b);
            Ok((vol, per))
        }
        3 => {
            let c = norm(center);
            let axis = if c > 0.0 { [center[0] / c, center[1] / c, center[2] / c] } else { [1.0, 0.0, 0.0] };
            let [e, u, v] = unit_frame(&axis);
            let k = 2 * res;
            let dpsi = 2.0 * PI / k as f64;
            let trig: Vec<(f64, f64)> = (0..k).map(|i| ((i as f64 * dpsi).cos(), (i as f64 * dpsi).sin())).collect();
            let shell = |s: f64| -> f64 {
                gl.integrate(0.0, PI, panels, |t| {
                    let (st, ct) = t.sin_cos();
                    let mut acc = 0.0;
                    for (cp, sp) in &trig {
                        let mut x = [0.0; 3];
                        for q in 0..3 {
                            x[q] = center[q] + s * (ct * e[q] + st * (cp * u[q] + sp * v[q]));
                        }
                        acc += d.value(&x);
                    }
                    acc * dpsi * st
                })
            };
            let vol = gl.integrate(0.0, b, panels, |s| s * s * shell(s));
            let per = b * b * shell(b);
            Ok((vol, per))
        }
        _ => Err(Error::Config(format!("non-radial ball quadrature supports n = 2 or 3, got {n}"))),
    }
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic sample of the closed ball: low-discrepancy interior points,
/// boundary points, the centre and the points nearest to and farthest from
/// the origin (the origin itself when it lies inside).
pub(crate) fn ball_samples(center: &[f64], b: f64, count: usize) -> Vec<Vec<f64>> {
    let n = center.len();
    let boundary = count / 4;
    let mut pts = Vec::with_capacity(count + 4);
    pts.push(center.to_vec());
    let dist = norm(center);
    if dist <= b {
        pts.push(vec![0.0; n]);
    }
    let dir: Vec<f64> = if dist > 0.0 { center.iter().map(|c| c / dist).collect() } else { unit(n, 0) };
    pts.push(center.iter().zip(&dir).map(|(c, e)| c - b * e).collect());
    pts.push(center.iter().zip(&dir).map(|(c, e)| c + b * e).collect());
    let mut i = 1u64;
    let mut on_sphere = 0;
    while on_sphere < boundary {
        let g: Vec<f64> = (0..n).map(|q| 2.0 * radical_inverse(i, PRIMES[q % PRIMES.len()]) - 1.0).collect();
        i += 1;
        let r = norm(&g);
        if r > 1e-3 && r <= 1.0 {
            pts.push(center.iter().zip(&g).map(|(c, gq)| c + b * gq / r).collect());
            on_sphere += 1;
        }
    }
    let mut i = 1u64;
    while pts.len() < count {
        let g: Vec<f64> = (0..n).map(|q| 2.0 * radical_inverse(i, PRIMES[q % PRIMES.len()]) - 1.0).collect();
        i += 1;
        if norm(&g) <= 1.0 {
            pts.push(center.iter().zip(&g).map(|(c, gq)| c + b * gq).collect());
        }
    }
    pts
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// Weighted measure of `S(r) ∩ B(center, b)`.
pub(crate) fn ball_slice(center: &[f64], b: f64, d: &Density, r: f64, res: usize) -> f64 {
    let n = d.dim();
    let dist = norm(center);
    let t = if dist <= 1e-14 * b {
        if r <= b {
            PI
        } else {
            0.0
        }
    } else {
        cap_angle(r, dist, b)
    };
    if t <= 0.0 {
        return 0.0;
    }
    if let Model::Radial(p) = d.model() {
        return p.value(r) * r.powi(n as i32 - 1) * cap_measure(n, t);
    }
    let gl = gl8();
    let panels = (res / 8).max(2);
    let axis: Vec<f64> = if dist > 0.0 { center.iter().map(|c| c / dist).collect() } else { unit(n, 0) };
    match n {
        2 => {
            let a0 = axis[1].atan2(axis[0]);
            gl.integrate(a0 - t, a0 + t, panels, |a| d.value(&[r * a.cos(), r * a.sin()])) * r
        }
        _ => {
            let [e, u, v] = unit_frame(&axis);
            let k = 2 * res;
            let dpsi = 2.0 * PI / k as f64;
            gl.integrate(0.0, t, panels, |s| {
                let (st, ct) = s.sin_cos();
                let mut acc = 0.0;
                for i in 0..k {
                    let (sp, cp) = (i as f64 * dpsi).sin_cos();
                    let mut x = [0.0; 3];
                    for q in 0..3 {
                        x[q] = r * (ct * e[q] + st * (cp * u[q] + sp * v[q]));
                    }
                    acc += d.value(&x);
                }
                acc * dpsi * st
            }) * r
                * r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_measures() {
        assert!((cap_measure(2, 0.3) - 0.6).abs() < 1e-15);
        assert!((cap_measure(3, PI / 2.0) - 2.0 * PI).abs() < 1e-12);
        assert!((cap_measure(4, PI / 2.0) - sphere_area(4) / 2.0).abs() < 1e-12);
        assert!((cap_measure(5, PI) - sphere_area(5)).abs() < 1e-12);
    }

    #[test]
    fn off_centre_constant_ball() {
        let d = Density::constant(1.0, 3);
        let (v, p) = ball_measures(&[3.0, 0.5, 0.0], 1.2, &d, 64).unwrap();
        assert!((v - 4.0 / 3.0 * PI * 1.2f64.powi(3)).abs() < 1e-10, "{v}");
        assert!((p - 4.0 * PI * 1.44).abs() < 1e-10);
        let d2 = Density::constant(2.0, 2);
        let (v, p) = ball_measures(&[0.3, 0.1], 1.0, &d2, 64).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-10 && (p - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn samples_fill_requested_count() {
        let s = ball_samples(&[1.0, 2.0], 0.5, 4096);
        assert_eq!(s.len(), 4096);
        assert!(s.iter().all(|x| crate::quadrature::dist(x, &[1.0, 2.0]) <= 0.5 + 1e-12));
    }
}
