use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use isodense::conditions::{existence_report, Budget, Condition};
use isodense::constructions::{
    brick_boundary_areas, brick_scaling_report, build_brick, build_bumpy_diverging, build_decaying_ball_family,
    build_nonexistence_sequence, build_steepest_ingredients, BallConstruction, BrickSpec,
};
use isodense::density::{catalog_density, BrickGeometry};
use isodense::geodesic::{shortest_path, triangle_containment_check};
use isodense::measure::{mean_density, measure, IndicatorGrid, Region};
use isodense::symmetry::symmetrization_check;
use isodense::variation::{first_variation_check, profile_sweep, ProfileBudget, ShootOptions};
use isodense::{classify, Density, SamplingSpec};
use serde_json::{json, Value};

use crate::args::{parse_sweep, Cli, Command, Construct, DensityArg, Spacing};
use crate::output::{emit, num, opt, Table};
use crate::{Failure, EXIT_INCONCLUSIVE, EXIT_NOT_CERTIFIED, EXIT_OK};

fn read(path: &Path, what: &str) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::validation(format!("{what} file {}: {e}", path.display())))
}

fn load_density(a: &DensityArg) -> Result<Density, Failure> {
    let p = Path::new(&a.density);
    if p.is_file() {
        let v: Value = serde_json::from_slice(&read(p, "density")?)
            .map_err(|e| Failure::validation(format!("density file {}: {e}", p.display())))?;
        return Density::from_json(&v).map_err(|e| Failure::validation(format!("density file {}: {e}", p.display())));
    }
    catalog_density(&a.density, a.dim)
        .ok_or_else(|| Failure::validation(format!("--density: no file or catalog density named `{}`", a.density)))
}

fn load_region(path: &Path) -> Result<Region, Failure> {
    let bytes = read(path, "region")?;
    let region = match serde_json::from_slice::<Region>(&bytes) {
        Ok(r) => r,
        Err(json_err) => match IndicatorGrid::from_mask_bytes(&bytes) {
            Ok(g) => Region::IndicatorGrid(g),
            Err(_) => return Err(Failure::validation(format!("region file {}: {json_err}", path.display()))),
        },
    };
    region
        .validate()
        .map_err(|e| Failure::validation(format!("region file {}: {e}", path.display())))?;
    Ok(region)
}

fn write_density(d: &Density, path: Option<&Path>) -> Result<(), Failure> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(&d.to_json()).expect("density serializes");
        fs::write(p, text + "\n").map_err(|e| Failure::io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Measure { .. } => "measure",
        Command::MeanDensity { .. } => "mean-density",
        Command::Check { .. } => "check",
        Command::Profile { .. } => "profile",
        Command::Symmetrize { .. } => "symmetrize",
        Command::Geodesic { .. } => "geodesic",
        Command::ValidateVariation { .. } => "validate-variation",
        Command::Construct(_) => "construct",
    }
}

pub fn run(cli: &Cli) -> Result<u8, Failure> {
    let res = cli.common.res;
    let (table, code) = match &cli.command {
        Command::Measure { density, region } => (measure_cmd(&load_density(density)?, &load_region(region)?, res)?, EXIT_OK),
        Command::MeanDensity { density, region } => {
            (mean_density_cmd(&load_density(density)?, &load_region(region)?, res)?, EXIT_OK)
        }
        Command::Check { density, volume, budget } => {
            let d = load_density(density)?;
            let b = Budget {
                r0: budget.r0,
                doublings: budget.doublings,
                directions: budget.directions,
                r_max: budget.r_max,
                res,
                ..Budget::default()
            };
            check_cmd(&d, *volume, &b, budget.rays, cli.common.seed)?
        }
        Command::Profile { density, volumes, linear, budget } => {
            let d = load_density(density)?;
            let vols = parse_sweep(volumes, if *linear { Spacing::Linear } else { Spacing::Geometric })
                .map_err(Failure::validation)?;
            let def = ProfileBudget::default();
            let b = ProfileBudget {
                r_points: budget.r_points,
                h_points: budget.h_points,
                bisections: budget.bisections,
                distant_ball: !budget.no_distant_ball,
                shoot: ShootOptions { tol: budget.shoot_tol, ..def.shoot },
                ..def
            };
            (profile_cmd(&d, &vols, &b)?, EXIT_OK)
        }
        Command::Symmetrize { density, region, h, mask_out } => {
            symmetrize_cmd(&load_density(density)?, &load_region(region)?, *h, mask_out.as_deref())?
        }
        Command::Geodesic { density, from, to, h } => (geodesic_cmd(&load_density(density)?, *from, *to, *h)?, EXIT_OK),
        Command::ValidateVariation { density, region, nodes, mode, amplitude, eps, min_order } => {
            let d = load_density(density)?;
            let e = load_region(region)?;
            variation_cmd(&d, &e, *nodes, *mode, *amplitude, eps, *min_order)?
        }
        Command::Construct(c) => construct_cmd(c, res)?,
    };
    let config = serde_json::to_value(cli).expect("config serializes");
    emit(&table, cli.common.out.as_deref(), name(&cli.command), &config)?;
    Ok(code)
}

fn measure_cmd(d: &Density, e: &Region, res: usize) -> Result<Table, Failure> {
    let r = measure(e, d, res)?;
    let mut t = Table::new(vec!["kind", "dim", "volume", "perimeter", "volume_error", "perimeter_error", "resolution"]);
    t.push(vec![
        e.kind().into(),
        e.dim().to_string(),
        num(r.volume),
        num(r.perimeter),
        num(r.volume_error),
        num(r.perimeter_error),
        r.resolution.to_string(),
    ]);
    t.summary = json!({"density": d.name(), "region": e.kind()});
    Ok(t)
}

fn mean_density_cmd(d: &Density, e: &Region, res: usize) -> Result<Table, Failure> {
    let s = mean_density(e, d, res)?;
    let (lo, hi) = s.bounds();
    let mut t = Table::new(vec![
        "volume",
        "perimeter",
        "mean_density",
        "rho_min",
        "rho_sup",
        "lower_bound",
        "upper_bound",
        "quadrature_error",
    ]);
    t.push(
        [s.volume, s.perimeter, s.mean_density, s.rho_min, s.rho_sup, lo, hi, s.quadrature_error]
            .into_iter()
            .map(num)
            .collect(),
    );
    t.summary = json!({"density": d.name(), "within_bounds": lo <= s.mean_density && s.mean_density <= hi});
    Ok(t)
}

fn check_cmd(d: &Density, v: f64, b: &Budget, rays: usize, seed: u64) -> Result<(Table, u8), Failure> {
    let rep = existence_report(d, v, b)?;
    let cls = classify(d, &SamplingSpec { rays, seed, ..SamplingSpec::default() })?;
    let mut t = Table::new(vec!["condition", "applicable", "verdict", "evaluated", "note"]);
    for c in Condition::ALL {
        let r = rep.verdicts.get(c);
        t.push(vec![c.name().into(), r.applicable.to_string(), r.verdict.to_string(), r.evaluated.to_string(), r.note.clone()]);
    }
    let by: Vec<&str> = rep.certified_by().iter().map(|c| c.name()).collect();
    t.summary = json!({
        "density": d.name(),
        "dim": d.dim(),
        "volume": v,
        "limit": rep.a,
        "certified": rep.certified,
        "certified_by": by,
        "notes": rep.notes,
        "classification": cls,
        "verdicts": rep.verdicts,
    });
    t.tolerances = serde_json::to_value(&rep.budget).expect("budget serializes");
    let code = match rep.exit_code() {
        0 => EXIT_OK,
        3 => EXIT_NOT_CERTIFIED,
        _ => EXIT_INCONCLUSIVE,
    };
    Ok((t, code))
}

fn profile_cmd(d: &Density, vols: &[f64], b: &ProfileBudget) -> Result<Table, Failure> {
    let mut t = Table::new(vec![
        "V",
        "I_estimate",
        "H",
        "min_H0",
        "closure_residual",
        "upper_bound",
        "source",
        "convex",
        "h_deviation",
        "r_start",
    ]);
    for p in profile_sweep(d, vols, b) {
        let p = p?;
        let source = serde_json::to_value(p.source).expect("source serializes");
        t.push(vec![
            num(p.v),
            num(p.i_estimate),
            num(p.h),
            num(p.min_h0),
            num(p.closure_residual),
            opt(p.upper_bound),
            source.as_str().unwrap_or_default().into(),
            p.convexity_flag.to_string(),
            num(p.h_deviation),
            num(p.r_start),
        ]);
    }
    t.summary = json!({"density": d.name(), "points": vols.len()});
    t.tolerances = json!({
        "shoot_tol": b.shoot.tol,
        "samples": b.shoot.samples,
        "r_points": b.r_points,
        "h_points": b.h_points,
        "r_span": [b.r_span.0, b.r_span.1],
        "bisections": b.bisections,
        "distant_ball": b.distant_ball,
    });
    Ok(t)
}

fn symmetrize_cmd(d: &Density, e: &Region, h: f64, mask_out: Option<&Path>) -> Result<(Table, u8), Failure> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Failure::validation(format!("--h must be positive, got {h}")));
    }
    let grid = e.rasterize(h);
    let (star, rep) = symmetrization_check(&grid, d)?;
    if let Some(p) = mask_out {
        fs::write(p, star.to_mask_bytes()).map_err(|err| Failure::io(format!("{}: {err}", p.display())))?;
    }
    let mut t = Table::new(vec![
        "volume_before",
        "volume_after",
        "perimeter_before",
        "perimeter_after",
        "volume_tolerance",
        "perimeter_tolerance",
        "tangential_fraction",
        "strict_decrease",
    ]);
    t.push(vec![
        num(rep.volume_before),
        num(rep.volume_after),
        num(rep.perimeter_before),
        num(rep.perimeter_after),
        num(rep.volume_tolerance),
        num(rep.perimeter_tolerance),
        num(rep.tangential_boundary_fraction),
        rep.strict_decrease().to_string(),
    ]);
    let ok = rep.volume_preserved() && rep.perimeter_non_increasing();
    t.summary = json!({"density": d.name(), "h": grid.h, "report": rep, "holds": ok});
    Ok((t, if ok { EXIT_OK } else { EXIT_NOT_CERTIFIED }))
}

fn geodesic_cmd(d: &Density, p: [f64; 2], q: [f64; 2], h: f64) -> Result<Table, Failure> {
    let path = shortest_path(p, q, d, h)?;
    let mut t = Table::new(vec!["x", "y", "cumulative"]);
    for r in path.rows(d) {
        t.push(r.iter().map(|v| num(*v)).collect());
    }
    let containment = triangle_containment_check(&path, p, q).ok();
    t.summary = json!({
        "density": d.name(),
        "weighted_length": path.weighted_length,
        "vertices": path.vertices.len(),
        "triangle_containment": containment,
    });
    t.tolerances = json!({"h": h, "containment_slack": 2.0 * h});
    Ok(t)
}

fn variation_cmd(
    d: &Density,
    e: &Region,
    nodes: usize,
    mode: u32,
    amplitude: f64,
    eps: &[f64],
    min_order: f64,
) -> Result<(Table, u8), Failure> {
    let (m, t0) = match e {
        Region::PolarGraph(g) => (g.theta.len() - 1, g.theta[0]),
        _ => (nodes, 0.0),
    };
    let u: Vec<f64> = (0..m)
        .map(|k| 1.0 + amplitude * (mode as f64 * (t0 + TAU * k as f64 / m as f64)).cos())
        .collect();
    let rep = first_variation_check(e, d, &u, eps)?;
    let mut t = Table::new(vec!["eps", "dv_measured", "dp_measured", "dv_mismatch", "dp_mismatch"]);
    for r in &rep.rows {
        t.push(vec![num(r.eps), num(r.dv_measured), num(r.dp_measured), num(r.dv_mismatch), num(r.dp_mismatch)]);
    }
    let ok = [rep.dv_order, rep.dp_order].iter().flatten().all(|o| *o >= min_order);
    t.summary = json!({
        "density": d.name(),
        "dv_predicted": rep.dv_predicted,
        "dp_predicted": rep.dp_predicted,
        "dv_order": rep.dv_order,
        "dp_order": rep.dp_order,
        "holds": ok,
    });
    t.tolerances = json!({"min_order": min_order});
    Ok((t, if ok { EXIT_OK } else { EXIT_NOT_CERTIFIED }))
}

fn balls_table(c: &BallConstruction) -> Table {
    let mut t = Table::new(vec!["i", "center_distance", "radius", "weight", "volume", "perimeter"]);
    for b in &c.balls {
        t.push(vec![
            b.index.to_string(),
            num(b.ball.center[0]),
            num(b.ball.radius),
            num(b.weight),
            num(b.volume),
            num(b.perimeter),
        ]);
    }
    t
}

fn construct_cmd(c: &Construct, res: usize) -> Result<(Table, u8), Failure> {
    match c {
        Construct::Brick { eps, n, m, w, density_out } => {
            let (region, d) = build_brick(&BrickSpec { eps: *eps, n: *n, m: *m, w: *w })?;
            let g = BrickGeometry::new(*eps)?;
            let r = measure(&region, &d, res)?;
            write_density(&d, density_out.as_deref())?;
            let mut t = Table::new(vec!["eps", "R1", "R2", "phi0", "N", "M", "W", "volume", "perimeter"]);
            t.push([*eps, g.r1, g.r2, g.phi0, *n, *m, *w, r.volume, r.perimeter].into_iter().map(num).collect());
            let areas = brick_boundary_areas(*eps)?;
            t.summary = json!({
                "region": region,
                "euclidean_areas": {"cone": areas[0], "outer": areas[1], "cap": areas[2]},
            });
            Ok((t, EXIT_OK))
        }
        Construct::Scaling { eps, n, m } => {
            let (n, m) = (*n, *m);
            let rep = brick_scaling_report(eps, move |_| n, move |_| m, res)?;
            let mut t = Table::new(vec![
                "eps",
                "N",
                "M",
                "volume",
                "perimeter",
                "predicted_volume",
                "predicted_perimeter",
                "volume_ratio",
                "perimeter_ratio",
            ]);
            for r in &rep.rows {
                t.push(
                    [r.eps, r.n, r.m, r.volume, r.perimeter, r.predicted_volume, r.predicted_perimeter, r.volume_ratio, r.perimeter_ratio]
                        .into_iter()
                        .map(num)
                        .collect(),
                );
            }
            t.summary = json!({"in_range": rep.in_range, "trending": rep.trending, "holds": rep.holds()});
            t.tolerances = json!({"ratio_range": [0.5, 2.0]});
            Ok((t, if rep.holds() { EXIT_OK } else { EXIT_NOT_CERTIFIED }))
        }
        Construct::Nonexistence { eps, density_out } => {
            let s = build_nonexistence_sequence(eps, res)?;
            write_density(&s.density, density_out.as_deref())?;
            let mut t = Table::new(vec!["j", "eps", "N", "M", "W", "volume", "perimeter"]);
            for (j, b) in s.bricks.iter().enumerate() {
                let mut row = vec![(j + 1).to_string()];
                row.extend([b.eps, b.n, b.m, b.w, s.volumes[j], s.perimeters[j]].into_iter().map(num));
                t.push(row);
            }
            let decreasing = s.perimeters.windows(2).all(|w| w[1] < w[0]);
            t.summary = json!({"monotone_density": s.monotone, "perimeters_decreasing": decreasing});
            t.tolerances = json!({"volume": 1e-10});
            Ok((t, EXIT_OK))
        }
        Construct::DecayingBalls { density, dim, volume, distances } => {
            let d = match density {
                Some(name) => load_density(&DensityArg { density: name.clone(), dim: *dim })?,
                None => Density::inverse_tail(*dim),
            };
            let fam = build_decaying_ball_family(&d, *volume, distances, res)?;
            let mut t = Table::new(vec!["D", "radius", "volume", "perimeter", "mean_density"]);
            for (s, dist) in fam.iter().zip(distances) {
                let Region::Ball(b) = &s.ball else { unreachable!("family members are balls") };
                t.push([*dist, b.radius, s.volume, s.perimeter, s.mean_density].into_iter().map(num).collect());
            }
            t.summary = json!({"density": d.name()});
            t.tolerances = json!({"volume_relative": 1e-10});
            Ok((t, EXIT_OK))
        }
        Construct::Bumpy { i_max, dim, density_out } => {
            let c = build_bumpy_diverging(*i_max, *dim, res)?;
            write_density(&c.density, density_out.as_deref())?;
            let mut t = balls_table(&c);
            let vol: f64 = c.balls.iter().map(|b| b.volume).sum();
            let per: f64 = c.balls.iter().map(|b| b.perimeter).sum();
            t.summary = json!({"volume_sum": vol, "perimeter_sum": per});
            Ok((t, EXIT_OK))
        }
        Construct::Steepest { i_max, dim, density_out } => {
            let c = build_steepest_ingredients(*i_max, *dim, res)?;
            write_density(&c.density, density_out.as_deref())?;
            Ok((balls_table(&c), EXIT_OK))
        }
    }
}
