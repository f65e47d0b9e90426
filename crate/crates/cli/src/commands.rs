use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use statrs::distribution::{ContinuousCDF, Normal};

use qspread_core::algebra::EvolutionSpec;
use qspread_core::gaussian::{skew_profile, variance};
use qspread_core::pricer::{implied_vol_smile, price_gaussian, price_spread};
use qspread_core::spread::{lattice_law, moment, sample_moment, sample_paths};
use qspread_core::validate::{run_validation, CheckKind, ValidationSetup};
use qspread_core::ModelError;

use crate::config::{ModelChoice, ScenarioConfig};
use crate::output::{write_csv, write_json, Cell};
use crate::Preset;

/// Result of one command: files written, pass/fail and a one-line summary.
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub passed: bool,
    pub summary: String,
}

impl Outcome {
    fn ok(outputs: Vec<PathBuf>, summary: impl Into<String>) -> Self {
        Outcome {
            outputs,
            passed: true,
            summary: summary.into(),
        }
    }
}

fn core<T>(r: qspread_core::Result<T>) -> Result<T> {
    r.map_err(|e: ModelError| anyhow::anyhow!(e))
}

pub fn derive(cfg: &ScenarioConfig, preset: Option<Preset>) -> Result<Outcome> {
    let (name, spec) = match (preset, cfg.operators()?) {
        (Some(Preset::Classical), _) => ("classical", EvolutionSpec::classical()),
        (Some(Preset::Extended), _) => ("extended", EvolutionSpec::extended(cfg.rotation_angle())),
        (Some(Preset::Spread), _) => ("spread", EvolutionSpec::spread()),
        (None, Some(spec)) => ("operators", spec),
        (None, None) => bail!("derive needs --preset NAME or an [operators] section"),
    };
    let g = spec.generator_coeffs();
    println!("theta_drift = {}", g.theta_drift.to_compact_string());
    println!("alpha = {}", g.alpha.to_compact_string());
    println!("alpha_dag = {}", g.alpha_dag.to_compact_string());
    println!("lambda = {}", g.lambda.to_compact_string());
    Ok(Outcome::ok(Vec::new(), format!("coefficients for {name}")))
}

pub fn moments(cfg: &ScenarioConfig, dir: &Path, seed: u64) -> Result<Outcome> {
    let p = cfg.spread_params()?;
    let samples = core(sample_paths(&p, cfg.output.mc_samples, seed))?;
    let law = if p.eps > 0.0 { Some(core(lattice_law(&p))?) } else { None };
    let mut rows = Vec::new();
    for k in 2..=cfg.output.k_max {
        let analytic = core(moment(k, &p))?;
        // with eps = 0 the terminal law is normal and the analytic value is exact
        let lattice = law.as_ref().map_or(analytic, |l| l.moment_about(k, p.x0));
        let mc = sample_moment(&samples, k, p.x0).value;
        rows.push(vec![
            Cell::Int(i64::from(k)),
            Cell::Num(analytic),
            Cell::Num(lattice),
            Cell::Num(mc),
        ]);
    }
    let path = dir.join("moments.csv");
    write_csv(&path, &["k", "analytic", "lattice", "monte_carlo"], &rows)?;
    Ok(Outcome::ok(vec![path], format!("moments k = 2..{}", cfg.output.k_max)))
}

pub fn density(cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let p = cfg.spread_params()?;
    let rows: Vec<Vec<Cell>> = if p.eps > 0.0 {
        core(lattice_law(&p))?
            .atoms()
            .map(|(n, x, pr)| vec![Cell::Int(n), Cell::Num(x), Cell::Num(pr)])
            .collect()
    } else {
        eprintln!("notice: eps = 0, writing the normal limit as a table of cell masses");
        normal_cell_masses(p.x0, p.variance().sqrt(), cfg.output.grid_size)
            .into_iter()
            .map(|(n, x, pr)| vec![Cell::Int(n), Cell::Num(x), Cell::Num(pr)])
            .collect()
    };
    let path = dir.join("density.csv");
    write_csv(&path, &["n", "x", "p"], &rows)?;
    Ok(Outcome::ok(vec![path], format!("{} rows", rows.len())))
}

pub fn price(cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let pricing = cfg
        .pricing
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("configuration needs a [pricing] section"))?;
    let payoff = core(cfg.payoff())?;
    let report = match pricing.model {
        ModelChoice::Spread => core(price_spread(&payoff, &cfg.spread_params()?))?,
        ModelChoice::Gaussian => {
            let g = cfg.gaussian_params()?;
            let state = cfg.market_state()?;
            let var = variance(&g, &state);
            let sigma = if g.t > 0.0 { (var / g.t).sqrt() } else { 0.0 };
            core(price_gaussian(&payoff, sigma, g.t, state.packet_o.x_mid, cfg.drift_mode()))?
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    let path = dir.join("price.json");
    write_json(&path, &report)?;
    Ok(Outcome::ok(vec![path], format!("price {:.16e}", report.price)))
}

pub fn smile(cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let p = cfg.spread_params()?;
    let strikes = cfg
        .pricing
        .as_ref()
        .and_then(|s| s.strikes.clone())
        .unwrap_or_else(|| {
            let sd = p.variance().sqrt();
            (-8..=8).map(|i| p.x0 + i as f64 * sd / 4.0).collect()
        });
    let smile = core(implied_vol_smile(&p, &strikes))?;
    let mut missing = 0;
    let rows: Vec<Vec<Cell>> = smile
        .iter()
        .map(|pt| {
            let vol = match pt.implied_vol {
                Some(v) => Cell::Num(v),
                None => {
                    missing += 1;
                    eprintln!("warning: no implied volatility at strike {} (price below intrinsic)", pt.strike);
                    Cell::Empty
                }
            };
            vec![Cell::Num(pt.strike), vol]
        })
        .collect();
    let path = dir.join("smile.csv");
    write_csv(&path, &["strike", "implied_vol"], &rows)?;
    Ok(Outcome::ok(
        vec![path],
        format!("{} strikes, {missing} without a root", strikes.len()),
    ))
}

pub fn skew(cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let g = cfg.gaussian_params()?;
    let state = cfg.market_state()?;
    let rows: Vec<Vec<Cell>> = skew_profile(&g, &state, &cfg.skew_angles())
        .into_iter()
        .map(|pt| vec![Cell::Num(pt.theta), Cell::Num(pt.variance)])
        .collect();
    let path = dir.join("skew.csv");
    write_csv(&path, &["theta", "variance"], &rows)?;
    Ok(Outcome::ok(vec![path], format!("{} angles", rows.len())))
}

pub fn validate(cfg: &ScenarioConfig, dir: &Path, seed: u64) -> Result<Outcome> {
    let mut setup = ValidationSetup {
        mc_samples: cfg.output.mc_samples,
        seed,
        ..ValidationSetup::default()
    };
    if cfg.spread.is_some() {
        setup.spread = cfg.spread_params()?;
    }
    if cfg.gaussian.is_some() {
        setup.gaussian = cfg.gaussian_params()?;
    }
    if cfg.market.is_some() {
        setup.state = cfg.market_state()?;
    }
    let rows = core(run_validation(&setup))?;
    for r in &rows {
        let tag = match (r.kind, r.passed) {
            (CheckKind::Info, _) => "INFO",
            (CheckKind::Check, true) => "PASS",
            (CheckKind::Check, false) => "FAIL",
        };
        println!("{tag} {}: {:.3e} ({})", r.name, r.measured, r.detail);
    }
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::Text(r.name.clone()),
                Cell::Text(if r.kind == CheckKind::Info { "info" } else { "check" }.into()),
                Cell::Num(r.measured),
                Cell::Num(r.tolerance),
                Cell::Text(r.passed.to_string()),
                Cell::Text(r.detail.clone()),
            ]
        })
        .collect();
    let path = dir.join("validate.csv");
    write_csv(&path, &["name", "kind", "measured", "tolerance", "passed", "detail"], &table)?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    let checks = rows.iter().filter(|r| r.kind == CheckKind::Check).count();
    Ok(Outcome {
        outputs: vec![path],
        passed: failed == 0,
        summary: format!("{} of {checks} checks passed", checks - failed),
    })
}

/// Masses of `N(mean, sd²)` on `n` equal cells spanning ±8 sd, as
/// `(index, cell centre, mass)`.
fn normal_cell_masses(mean: f64, sd: f64, n: usize) -> Vec<(i64, f64, f64)> {
    let Ok(normal) = Normal::new(mean, sd) else {
        return vec![(0, mean, 1.0)];
    };
    if sd == 0.0 || n == 0 {
        return vec![(0, mean, 1.0)];
    }
    let width = 16.0 * sd / n as f64;
    let half = n as i64 / 2;
    (0..n as i64)
        .map(|i| {
            let lo = mean + (i - half) as f64 * width;
            let mass = normal.cdf(lo + width) - normal.cdf(lo);
            (i - half, lo + width / 2.0, mass)
        })
        .collect()
}
