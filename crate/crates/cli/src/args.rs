use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "isodense", version, about = "Weighted isoperimetric experiments in R^n with density")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// CSV output path; a `<out>.json` sidecar is written next to it. Stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Quadrature resolution (Gauss–Legendre nodes per panel direction).
    #[arg(long, global = true, default_value_t = 64)]
    pub res: usize,
    /// Seed for every sampled choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArg {
    /// Density JSON file, or a catalog name such as `power_tail`.
    #[arg(long)]
    pub density: String,
    /// Dimension used with a catalog name.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Weighted volume and perimeter of a region.
    Measure {
        #[command(flatten)]
        density: DensityArg,
        /// Region JSON (`{"kind": "ball", ...}`) or grid mask file.
        #[arg(long)]
        region: PathBuf,
    },
    /// Mean density of a ball with its sampled extrema and sandwich bounds.
    MeanDensity {
        #[command(flatten)]
        density: DensityArg,
        #[arg(long)]
        region: PathBuf,
    },
    /// Existence conditions and classification of a density.
    Check {
        #[command(flatten)]
        density: DensityArg,
        #[arg(long, default_value_t = 1.0)]
        volume: f64,
        #[command(flatten)]
        budget: CheckBudget,
    },
    /// Isoperimetric profile by constant-curvature shooting (planar radial densities).
    Profile {
        #[command(flatten)]
        density: DensityArg,
        /// `lo:hi:count`.
        #[arg(long)]
        volumes: String,
        /// Evenly spaced volumes instead of the geometric default.
        #[arg(long)]
        linear: bool,
        #[command(flatten)]
        budget: ProfileArgs,
    },
    /// Spherical symmetrization of a grid region.
    Symmetrize {
        #[command(flatten)]
        density: DensityArg,
        #[arg(long)]
        region: PathBuf,
        /// Grid step used to rasterize non-grid regions.
        #[arg(long, default_value_t = 1.0 / 128.0)]
        h: f64,
        /// Write the symmetrized set as a mask file.
        #[arg(long)]
        mask_out: Option<PathBuf>,
    },
    /// Shortest weighted path between two points in the plane.
    Geodesic {
        #[command(flatten)]
        density: DensityArg,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        from: [f64; 2],
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        to: [f64; 2],
        /// Grid step.
        #[arg(long, default_value_t = 0.01)]
        h: f64,
    },
    /// Compare measured first variations with the predicted integrals.
    ValidateVariation {
        #[command(flatten)]
        density: DensityArg,
        #[arg(long)]
        region: PathBuf,
        /// Boundary samples of `u` (ball regions); polar graphs use their own nodes.
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        /// `u = 1 + amplitude·cos(mode·θ)`.
        #[arg(long, default_value_t = 0)]
        mode: u32,
        #[arg(long, default_value_t = 0.0)]
        amplitude: f64,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
        eps: Vec<f64>,
        /// Minimum observed convergence order.
        #[arg(long, default_value_t = 0.9)]
        min_order: f64,
    },
    /// Counterexample constructions.
    #[command(subcommand)]
    Construct(Construct),
}

#[derive(Debug, Args, Serialize)]
pub struct CheckBudget {
    #[arg(long, default_value_t = 10.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 20)]
    pub doublings: usize,
    #[arg(long, default_value_t = 64)]
    pub directions: usize,
    #[arg(long, default_value_t = 1e5)]
    pub r_max: f64,
    /// Rays sampled by the classification.
    #[arg(long, default_value_t = 64)]
    pub rays: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    #[arg(long, default_value_t = 16)]
    pub r_points: usize,
    #[arg(long, default_value_t = 12)]
    pub h_points: usize,
    #[arg(long, default_value_t = 80)]
    pub bisections: usize,
    /// Integrator tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub shoot_tol: f64,
    /// Skip the distant-ball candidate.
    #[arg(long)]
    pub no_distant_ball: bool,
}

#[derive(Debug, Clone, Copy)]
pub enum Spacing {
    Geometric,
    Linear,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construct {
    /// One brick with its six-zone density.
    Brick {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        n: f64,
        #[arg(long, default_value_t = 10.0)]
        m: f64,
        #[arg(long, default_value_t = 100.0)]
        w: f64,
        #[arg(long)]
        density_out: Option<PathBuf>,
    },
    /// Measured against predicted brick volume and perimeter over a decreasing eps list.
    Scaling {
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.02")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        n: f64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
    },
    /// Unit-volume bricks with shrinking perimeters, stitched into one density.
    Nonexistence {
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
        eps: Vec<f64>,
        #[arg(long)]
        density_out: Option<PathBuf>,
    },
    /// Balls of fixed volume pushed away from the origin.
    DecayingBalls {
        /// Defaults to `inverse_tail` in the plane.
        #[arg(long)]
        density: Option<String>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        volume: f64,
        #[arg(long, value_delimiter = ',', default_value = "100,400,1600")]
        distances: Vec<f64>,
    },
    /// Balls with perimeter 1/i² whose volume is pumped to 1/i.
    Bumpy {
        #[arg(long, default_value_t = 6)]
        i_max: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        density_out: Option<PathBuf>,
    },
    /// Unit-volume balls with perimeter 1/i inside weighted shells.
    Steepest {
        #[arg(long, default_value_t = 4)]
        i_max: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        density_out: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [x, y] if x.is_finite() && y.is_finite() => Ok([*x, *y]),
        _ => Err(format!("expected `x,y`, got `{s}`")),
    }
}

/// Parses `lo:hi:count` into `count` volumes.
pub fn parse_sweep(s: &str, spacing: Spacing) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("--volumes: expected `lo:hi:count`, got `{s}`"));
    };
    let lo: f64 = lo.trim().parse().map_err(|e| format!("--volumes lo: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("--volumes hi: {e}"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("--volumes count: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) || n == 0 {
        return Err(format!("--volumes: need 0 < lo ≤ hi and count ≥ 1, got `{s}`"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            match spacing {
                Spacing::Geometric => lo * (hi / lo).powf(t),
                Spacing::Linear => lo + t * (hi - lo),
            }
        })
        .collect())
}
