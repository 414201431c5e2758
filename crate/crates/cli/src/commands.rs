use std::io::Write;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde_json::json;

use torusct::analysis::{
    cutoff_error, recon_error, rotation_average, strategy_bound, support_mask, verify_strategy, NormKind,
    ReportParams, StrategyParams,
};
use torusct::forward::{direction_angles, ray_angle, DEFAULT_QUADRATURE_TOL, DEFAULT_RAYS};
use torusct::io;
use torusct::phantom::Constant;
use torusct::*;

use crate::config::{required, ExperimentConfig};

const DEFAULT_GRID: usize = 256;

fn theta_rad(cfg: &ExperimentConfig) -> f64 {
    cfg.theta.unwrap_or(0.0).to_radians()
}

/// The phantom named in the config as a closed-form function.
fn analytic(cfg: &ExperimentConfig) -> Result<Box<dyn AnalyticPhantom>> {
    let name = required(&cfg.name, "name")?;
    Ok(match name.as_str() {
        "flag" => Box::new(Flag::new(theta_rad(cfg))),
        "gaussian" => Box::new(PeriodicGaussian::standard()),
        "constant" => Box::new(Constant(1.0)),
        "shepp-logan" => bail!("--name shepp-logan is a pixel phantom; use --model A1"),
        other => bail!("unknown phantom --name {other:?} (expected flag, shepp-logan, gaussian or constant)"),
    })
}

/// The phantom named in the config, rasterized at `n`.
fn phantom_grid(cfg: &ExperimentConfig, n: usize) -> Result<(PixelPhantom, String)> {
    let name = required(&cfg.name, "name")?;
    if name == "shepp-logan" {
        let grid = rotate_grid(&shepp_logan(n)?, theta_rad(cfg));
        return Ok((grid, format!("shepp-logan(theta={})", cfg.theta.unwrap_or(0.0))));
    }
    let p = analytic(cfg)?;
    Ok((rasterize(p.as_ref(), n)?, p.tag()))
}

/// A grid read from `--input`, or the phantom spec rasterized at `--n`.
fn input_grid(cfg: &ExperimentConfig) -> Result<PixelPhantom> {
    match &cfg.input {
        Some(path) => Ok(io::read_grid(path)?),
        None => Ok(phantom_grid(cfg, cfg.n.unwrap_or(DEFAULT_GRID))?.0),
    }
}

fn write_image(path: &Path, p: &PixelPhantom) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => io::write_pgm(path, p)?,
        Some("csv") => io::write_grid_csv(path, p)?,
        _ => bail!("image output {} must end in .pgm or .csv", path.display()),
    }
    Ok(())
}

fn print_json(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => io::write_json(path, value)?,
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn direction_radius(cfg: &ExperimentConfig) -> Result<i64> {
    let r = required(&cfg.r, "r")?;
    ensure!(r >= 1.0 && r.fract() == 0.0, "--r must be a positive integer for direction sets, got {r}");
    Ok(r as i64)
}

fn noise(cfg: &ExperimentConfig) -> Result<Option<NoiseSpec>> {
    let sigma = cfg.sigma.unwrap_or(0.0);
    if sigma == 0.0 {
        return Ok(None);
    }
    let seed = cfg.seed.context("--seed is required when --sigma > 0")?;
    Ok(Some(NoiseSpec::new(sigma, seed)?))
}

pub fn phantom(cfg: &ExperimentConfig) -> Result<()> {
    let n = cfg.n.unwrap_or(DEFAULT_GRID);
    let out = required(&cfg.out, "out")?;
    let (grid, tag) = phantom_grid(cfg, n)?;
    write_image(&out, &grid)?;
    let (min, max) = grid.min_max();
    print_json(
        &json!({ "name": cfg.name, "theta": cfg.theta.unwrap_or(0.0), "n": n, "tag": tag, "min": min, "max": max, "out": out }),
        None,
    )
}

pub fn forward(cfg: &ExperimentConfig) -> Result<()> {
    let model = required(&cfg.model, "model")?;
    let r = direction_radius(cfg)?;
    let out = required(&cfg.out, "out")?;
    let dirs = direction_set(r)?;
    if model.eq_ignore_ascii_case("radon") {
        let grid = input_grid(cfg)?;
        let mut sino = radon_simulate(&grid, &direction_angles(&dirs), cfg.rays.unwrap_or(DEFAULT_RAYS))?;
        if let Some(spec) = noise(cfg)? {
            sino = sino.with_noise(spec)?;
        }
        io::write_sinogram(&out, &sino)?;
        return print_json(&json!({ "model": "radon", "angles": dirs.len(), "out": out }), None);
    }
    let allow = cfg.allow_aliasing.unwrap_or(false);
    let n_d = cfg.n_d.unwrap_or_else(|| (2 * r as usize + 1).next_power_of_two());
    ensure!(
        allow || n_d as i64 > 2 * r,
        "--n-d {n_d} cannot resolve radius {r} (need n_d >= 2r + 1, or --allow-aliasing)"
    );
    let rule: Rule = cfg.rule.as_deref().unwrap_or("left").parse()?;
    let data = match model.to_ascii_uppercase().as_str() {
        "A1" => acquire(ForwardModel::Pixel(&input_grid(cfg)?), &dirs, n_d, rule)?,
        "A2" => {
            let p = analytic(cfg)?;
            let tol = cfg.tol.unwrap_or(DEFAULT_QUADRATURE_TOL);
            acquire(ForwardModel::Quadrature { phantom: p.as_ref(), tol }, &dirs, n_d, rule)?
        }
        "AT2" => {
            let path = required(&cfg.sinogram, "sinogram").context("model AT2 reads a parallel-beam sinogram")?;
            let sino = io::read_sinogram(&path)?;
            acquire(ForwardModel::TorusProjection(&sino), &dirs, n_d, rule)?
        }
        other => bail!("unknown --model {other:?} (expected A1, A2, AT2 or radon)"),
    };
    let data = match noise(cfg)? {
        Some(spec) => add_noise(&data, spec)?,
        None => data,
    };
    io::write_samples(&out, &data)?;
    print_json(&json!({ "model": model, "directions": dirs.len(), "n_d": n_d, "rows": data.len(), "out": out }), None)
}

pub fn reconstruct(cfg: &ExperimentConfig) -> Result<()> {
    let input = required(&cfg.input, "input")?;
    let r = required(&cfg.r, "r")?;
    let out = required(&cfg.out, "out")?;
    let data = io::read_samples(&input)?;
    let mut table = reconstruct_table(&data, r, cfg.allow_aliasing.unwrap_or(false))?;
    let alpha = cfg.alpha.unwrap_or(0.0);
    if alpha != 0.0 {
        let s = cfg.s.context("--s is required when --alpha is non-zero")?;
        table = tikhonov_filter(&table, alpha, s)?;
    }
    io::write_table(&out, &table)?;
    if let Some(path) = &cfg.image {
        write_image(path, &evaluate_grid(&table, cfg.n_eval.unwrap_or(DEFAULT_GRID))?)?;
    }
    print_json(&json!({ "coefficients": table.len(), "r": r, "alpha": alpha, "out": out }), None)
}

pub fn metrics(cfg: &ExperimentConfig) -> Result<()> {
    let metric = cfg.metric.as_deref().unwrap_or("error");
    match metric {
        "error" => {
            let table = io::read_table(&required(&cfg.table, "table")?)?;
            let reference = match &cfg.reference {
                Some(path) => io::read_grid(path)?,
                None => phantom_grid(cfg, cfg.n_eval.unwrap_or(DEFAULT_GRID))?.0,
            };
            let p: NormKind = cfg.p.as_deref().unwrap_or("2").parse()?;
            let mask = cfg.mask.unwrap_or(false).then(|| support_mask(&reference));
            let mut report = recon_error(&reference, &table, p, mask.as_deref())?;
            report.params = ReportParams {
                alpha: cfg.alpha,
                s: cfg.s,
                r: Some(table.radius()),
                sigma: cfg.sigma,
                seed: cfg.seed,
            };
            print_json(&serde_json::to_value(&report)?, cfg.out.as_deref())
        }
        "cutoff" => {
            let r = required(&cfg.r, "r")?;
            let grid = input_grid(cfg)?;
            let value = cutoff_error(&grid, r)?;
            print_json(&json!({ "metric": "cutoff", "r": r, "value": value, "grid": grid.n() }), cfg.out.as_deref())
        }
        other => bail!("unknown --metric {other:?} (expected error or cutoff)"),
    }
}

pub fn bound(cfg: &ExperimentConfig) -> Result<()> {
    let s = required(&cfg.s, "s")?;
    let delta = required(&cfg.delta, "delta")?;
    let eps = required(&cfg.eps, "eps")?;
    if let Some(trials) = cfg.trials {
        let params = StrategyParams {
            alpha: cfg.alpha,
            ..StrategyParams::new(cfg.r.unwrap_or(0.0), s, delta, cfg.t.unwrap_or(0.0), eps, cfg.seed.unwrap_or(0))
        };
        let report = verify_strategy(trials, params)?;
        return print_json(&serde_json::to_value(&report)?, cfg.out.as_deref());
    }
    let value = strategy_bound(required(&cfg.alpha, "alpha")?, s, delta, eps, required(&cfg.fnorm, "fnorm")?)?;
    println!("{value}");
    Ok(())
}

pub fn directions(cfg: &ExperimentConfig) -> Result<()> {
    let dirs = direction_set(direction_radius(cfg)?)?;
    if cfg.count.unwrap_or(false) {
        println!("{}", dirs.len());
        return Ok(());
    }
    if cfg.angles.unwrap_or(false) {
        let list: Vec<_> = dirs
            .iter()
            .map(|&d| json!({ "a": d.a(), "b": d.b(), "angle_deg": ray_angle(d.into()).to_degrees() }))
            .collect();
        return print_json(&json!({ "count": dirs.len(), "directions": list }), cfg.out.as_deref());
    }
    match &cfg.out {
        Some(path) => io::write_directions(path, &dirs)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "a,b")?;
            for d in dirs.iter() {
                writeln!(stdout, "{},{}", d.a(), d.b())?;
            }
        }
    }
    Ok(())
}

pub fn rotate_average(cfg: &ExperimentConfig) -> Result<()> {
    let paths = required(&cfg.tables, "tables")?;
    let thetas = cfg.thetas.clone().unwrap_or_else(|| vec![0.0; paths.len()]);
    ensure!(
        thetas.len() == paths.len(),
        "--thetas has {} angles for {} tables",
        thetas.len(),
        paths.len()
    );
    let out = required(&cfg.out, "out")?;
    let recs = paths
        .iter()
        .zip(&thetas)
        .map(|(p, th)| Ok((io::read_table(p)?, th.to_radians())))
        .collect::<Result<Vec<_>>>()?;
    let avg = rotation_average(&recs, cfg.n_eval.unwrap_or(DEFAULT_GRID))?;
    write_image(&out, &avg)?;
    print_json(&json!({ "tables": paths.len(), "n": avg.n(), "out": out }), None)
}
