use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Density;
use crate::error::{Error, Result};

/// Three-valued outcome of a sampled or budgeted check. `Pass` means no
/// violation was found within the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Rays and radii sampled by [`classify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingSpec {
    pub rays: usize,
    pub radii: Vec<f64>,
    pub seed: u64,
    pub r_tail: f64,
    /// Start with the `±eᵢ` coordinate directions before the random rays.
    pub axes: bool,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        let mut radii = vec![0.0];
        let k = 400;
        radii.extend((0..k).map(|i| 1e-2 * 1e6f64.powf(i as f64 / (k - 1) as f64)));
        Self { rays: 64, radii, seed: 0, r_tail: 100.0, axes: true }
    }
}

impl SamplingSpec {
    /// The first `rays` sampling directions; a prefix of any larger budget.
    pub fn directions(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.rays);
        if self.axes {
            'axes: for i in 0..dim {
                for s in [1.0, -1.0] {
                    if out.len() == self.rays {
                        break 'axes;
                    }
                    let mut e = vec![0.0; dim];
                    e[i] = s;
                    out.push(e);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        while out.len() < self.rays {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = crate::quadrature::norm(&v);
            if n > 1e-12 {
                out.push(v.into_iter().map(|c| c / n).collect());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub radial_verdict: Verdict,
    pub nondecreasing_verdict: Verdict,
    /// Strict increase along every sampled ray (reported separately from the weak property).
    pub strictly_increasing: bool,
    pub limit_estimate: Option<f64>,
    pub limit_interval: Option<(f64, f64)>,
    pub diverging_verdict: Verdict,
    pub samples_used: usize,
    /// First ray and radii pair witnessing a decrease, if any.
    pub decrease_witness: Option<(Vec<f64>, f64, f64)>,
}

/// Sampled classification of a density: radial symmetry, monotonicity along
/// rays, and behaviour at infinity.
pub fn classify(d: &Density, spec: &SamplingSpec) -> Result<ClassificationReport> {
    if spec.rays == 0 || spec.radii.is_empty() {
        return Err(Error::Config("sampling spec needs at least one ray and one radius".into()));
    }
    if spec.radii.iter().any(|r| !r.is_finite() || *r < 0.0) || !(spec.r_tail > 0.0) {
        return Err(Error::Config("sampling radii must be finite and non-negative".into()));
    }
    let dim = d.dim();
    let dirs = spec.directions(dim);
    let mut radii = spec.radii.clone();
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let mut samples = 0usize;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dirs.len());
    let mut nondecreasing = true;
    let mut strict = true;
    let mut witness = None;
    let mut x = vec![0.0; dim];
    for dir in &dirs {
        let mut col = Vec::with_capacity(radii.len());
        let mut running = f64::NEG_INFINITY;
        let mut running_r = 0.0;
        let mut prev = f64::NEG_INFINITY;
        for &r in &radii {
            for (xi, di) in x.iter_mut().zip(dir) {
                *xi = r * di;
            }
            let v = d.value(&x);
            samples += 1;
            if running > v + 1e-12 && nondecreasing {
                nondecreasing = false;
                witness = Some((dir.clone(), running_r, r));
            }
            if v <= prev {
                strict = false;
            }
            if v > running {
                running = v;
                running_r = r;
            }
            prev = v;
            col.push(v);
        }
        columns.push(col);
    }

    let mut radial = true;
    for k in 0..radii.len() {
        let vals = columns.iter().map(|c| c[k]);
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let spread = if hi.is_finite() { hi - lo > 1e-12 * hi.abs().max(1.0) } else { lo.is_finite() };
        if spread {
            radial = false;
        }
    }

    let tails = [spec.r_tail, 2.0 * spec.r_tail, 4.0 * spec.r_tail];
    let mut tail = [Vec::new(), Vec::new(), Vec::new()];
    for dir in &dirs {
        for (k, &r) in tails.iter().enumerate() {
            for (xi, di) in x.iter_mut().zip(dir) {
                *xi = r * di;
            }
            tail[k].push(d.value(&x));
            samples += 1;
        }
    }
    let all: Vec<f64> = tail.iter().flatten().copied().collect();
    let finite = all.iter().all(|v| v.is_finite());
    let (lo, hi) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let min_far = tail[2].iter().copied().fold(f64::INFINITY, f64::min);
    let max_near = tail[0].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Overflow to +∞ counts as evidence of divergence.
    let diverging = if min_far == f64::INFINITY || min_far > 1.1 * max_near {
        Verdict::Pass
    } else if finite && hi - lo <= 0.05 * mean.abs() {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    let (limit_estimate, limit_interval) = if finite && diverging != Verdict::Pass {
        (Some(mean), Some((lo, hi)))
    } else {
        (None, None)
    };

    Ok(ClassificationReport {
        radial_verdict: if radial { Verdict::Pass } else { Verdict::Fail },
        nondecreasing_verdict: if nondecreasing { Verdict::Pass } else { Verdict::Fail },
        strictly_increasing: nondecreasing && strict,
        limit_estimate,
        limit_interval,
        diverging_verdict: diverging,
        samples_used: samples,
        decrease_witness: witness,
    })
}
