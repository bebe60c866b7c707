//! Scripted experiments with CSV outputs:
//! E1 degree-tail dichotomy, E2 knob sweeps, E3 one-graph parameter
//! recovery, E5 native tuning vs degree-preserving rewiring.

use crate::calibration::{self, fit_lambda};
use crate::copula::{CopulaFamily, WeightMarginal};
use crate::error::{Error, Result};
use crate::generator::{self, GenConfig, Graph, Regime};
use crate::io;
use crate::limits::LimitModel;
use crate::rewiring;
use crate::rng::child_seed;
use crate::stats;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    E1,
    E2,
    E3,
    E5,
    Custom,
}

/// One experiment run, fully determined by this config. Round-trippable
/// through TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub dim: usize,
    pub rho: f64,
    pub theta: f64,
    pub regime: Regime,
    pub replicates: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub target_mean_degree: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub theta_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha_grid: Option<Vec<f64>>,
    /// Locality knob levels: values of rho (equivalently the epsilon scale).
    #[serde(default)]
    pub geo_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

fn default_threads() -> usize {
    1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Parameter("replicates must be >= 1".into()));
        }
        if self.n == 0 || self.dim == 0 {
            return Err(Error::Parameter("n and dim must be >= 1".into()));
        }
        if !(self.rho > 0.0) {
            return Err(Error::Parameter(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Parameter(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if self.threads == 0 {
            return Err(Error::Parameter("threads must be >= 1".into()));
        }
        if self.lambda.is_none() && self.target_mean_degree.is_none() {
            return Err(Error::Parameter("need either lambda or target_mean_degree".into()));
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn save_config(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    let text = toml::to_string_pretty(cfg)
        .map_err(|e| Error::Parse(format!("serializing config: {e}")))?;
    io::write_string(path, &text)
}

/// Run `count` independent jobs over up to `threads` workers; results come
/// back ordered by job index regardless of completion order.
pub fn run_replicates<T: Send>(
    count: usize,
    threads: usize,
    f: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let threads = threads.max(1).min(count);
    if threads == 1 {
        return (0..count).map(f).collect();
    }
    let mut slots: Vec<Option<Result<T>>> = (0..count).map(|_| None).collect();
    let chunk = count.div_ceil(threads);
    std::thread::scope(|scope| {
        for (c, slab) in slots.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (k, slot) in slab.iter_mut().enumerate() {
                    *slot = Some(f(c * chunk + k));
                }
            });
        }
    });
    slots.into_iter().map(|o| o.expect("worker filled every slot")).collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    match cfg.experiment {
        ExperimentKind::E1 => run_e1(cfg),
        ExperimentKind::E2 => run_e2(cfg),
        ExperimentKind::E3 => run_e3(cfg),
        ExperimentKind::E5 => run_e5(cfg),
        ExperimentKind::Custom => run_custom(cfg),
    }
}

fn base_gen(cfg: &ExperimentConfig, regime: Regime, marginal: WeightMarginal, lambda: f64, seed: u64) -> GenConfig {
    GenConfig::new(
        cfg.n,
        cfg.rho,
        lambda,
        regime,
        CopulaFamily::fgm(cfg.theta, cfg.dim),
        marginal,
        seed,
    )
}

/// Calibrate lambda to the mean-degree target for an arbitrary regime via
/// simulated bisection.
fn lambda_for_target(cfg: &ExperimentConfig, template: &GenConfig, target: f64, sim_seeds: usize) -> Result<f64> {
    let model = LimitModel::new(
        template.lambda,
        cfg.rho,
        template.family.effective_theta(),
        template.dim(),
        template.regime,
        template.marginal,
    )?;
    if model.dim() == 1
        && template.regime == Regime::FixedRangeLinear
        && template.marginal == WeightMarginal::UnitUniform
    {
        return fit_lambda(target, &model, None);
    }
    fit_lambda(target, &model, Some((template, sim_seeds)))
}

struct RepStats {
    mean_degree: f64,
    transitivity: f64,
    assortativity: f64,
    hill: f64,
}

fn rep_stats(g: &Graph) -> RepStats {
    let mv = stats::motif_vector(g);
    let degrees: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    RepStats {
        mean_degree: g.mean_degree(),
        transitivity: stats::transitivity(&mv),
        assortativity: stats::assortativity(&mv),
        hill: stats::hill_estimate_default(&degrees, 1.0)
            .map(|t| t.alpha_hat_median)
            .unwrap_or(f64::NAN),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// E1: tail dichotomy. Fixed-range vs tail-inheriting at matched mean
/// degree, with degree CCDFs and Hill paths.
fn run_e1(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let alpha = cfg.alpha.unwrap_or(2.5);
    let target = cfg
        .target_mean_degree
        .ok_or_else(|| Error::Parameter("tail-dichotomy run needs target_mean_degree".into()))?;
    let marginal = WeightMarginal::pareto(alpha);
    let mut files = Vec::new();
    let mut rows = String::from("regime,replicate,lambda,mean_degree,hill_alpha_median,transitivity,assortativity\n");
    let mut summary = String::from("regime,lambda,mean_degree_mean,hill_alpha_median\n");

    for (tag, regime) in [("fixed_range", Regime::FixedRangeExp), ("heavy_tail", Regime::HeavyTail)] {
        let template = base_gen(cfg, regime, marginal, 1.0, child_seed(cfg.seed, 0xca11));
        let lambda = lambda_for_target(cfg, &template, target, 3)?;
        let reps = run_replicates(cfg.replicates, cfg.threads, |rep| {
            let mut gc = template.clone();
            gc.lambda = lambda;
            gc.seed = child_seed(cfg.seed, 100 + rep as u64);
            let g = generator::generate(&gc)?;
            Ok((rep_stats(&g), if rep == 0 { Some(g) } else { None }))
        })?;
        let mut hills = Vec::new();
        let mut degs = Vec::new();
        for (rep, (s, g)) in reps.iter().enumerate() {
            let _ = writeln!(
                rows,
                "{tag},{rep},{lambda:.6},{:.6},{:.6},{:.6},{:.6}",
                s.mean_degree, s.hill, s.transitivity, s.assortativity
            );
            hills.push(s.hill);
            degs.push(s.mean_degree);
            if let Some(g) = g {
                let ccdf = io::curve_csv(("degree", "ccdf"), &stats::degree_ccdf(g));
                let p = cfg.output_dir.join(format!("e1_{tag}_degree_ccdf.csv"));
                io::write_string(&p, &ccdf)?;
                files.push(p);
                let d: Vec<f64> = g.degrees().iter().map(|&x| x as f64).collect();
                if let Ok(t) = stats::hill_estimate_default(&d, 1.0) {
                    let pts: Vec<(usize, f64)> = t.alpha_hat_path.clone();
                    let p = cfg.output_dir.join(format!("e1_{tag}_hill_path.csv"));
                    io::write_string(&p, &io::curve_csv(("k", "alpha_hat"), &pts))?;
                    files.push(p);
                }
            }
        }
        let _ = writeln!(summary, "{tag},{lambda:.6},{:.6},{:.6}", mean(&degs), median(hills));
    }
    // weight tail for reference (one mark sample)
    let marks = crate::copula::sample_marks(
        cfg.n,
        CopulaFamily::fgm(cfg.theta, cfg.dim),
        marginal,
        child_seed(cfg.seed, 0x3e1),
    )?;
    let mut w = marks.weights.clone();
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut wtail = String::from("rank,weight\n");
    for (i, v) in w.iter().enumerate() {
        let _ = writeln!(wtail, "{},{v:.6e}", i + 1);
    }
    for (name, content) in [
        ("e1_rows.csv", rows),
        ("e1_summary.csv", summary),
        ("e1_weight_tail.csv", wtail),
    ] {
        let p = cfg.output_dir.join(name);
        io::write_string(&p, &content)?;
        files.push(p);
    }
    Ok(files)
}

/// E2: one-knob sweeps (tail alpha, locality rho, dependence theta) with
/// per-level lambda re-fit to the mean-degree target.
fn run_e2(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let target = cfg
        .target_mean_degree
        .ok_or_else(|| Error::Parameter("knob sweeps need target_mean_degree".into()))?;
    let mut rows =
        String::from("knob,level,replicate,lambda,mean_degree,transitivity,assortativity,hill_alpha_median\n");
    let mut slopes = String::from("knob,statistic,standardized_slope\n");

    let knobs: Vec<(&str, Vec<f64>)> = [
        ("alpha", cfg.alpha_grid.clone()),
        ("geo", cfg.geo_grid.clone()),
        ("theta", cfg.theta_grid.clone()),
    ]
    .into_iter()
    .filter_map(|(k, g)| g.map(|g| (k, g)))
    .collect();
    if knobs.is_empty() {
        return Err(Error::Parameter(
            "knob sweep needs at least one of alpha_grid, geo_grid, theta_grid".into(),
        ));
    }

    let mut files = Vec::new();
    for (knob, levels) in &knobs {
        let mut level_means: Vec<(f64, RepStats)> = Vec::new();
        for (li, &level) in levels.iter().enumerate() {
            let mut sub = cfg.clone();
            let marginal = match *knob {
                "alpha" => WeightMarginal::pareto(level),
                _ => match cfg.alpha {
                    Some(a) => WeightMarginal::pareto(a),
                    None => WeightMarginal::UnitUniform,
                },
            };
            match *knob {
                "geo" => sub.rho = level,
                "theta" => sub.theta = level,
                _ => {}
            }
            let template =
                base_gen(&sub, cfg.regime, marginal, 1.0, child_seed(cfg.seed, 0xe2 + li as u64));
            let lambda = lambda_for_target(&sub, &template, target, 2)?;
            let reps = run_replicates(cfg.replicates, cfg.threads, |rep| {
                let mut gc = template.clone();
                gc.lambda = lambda;
                gc.seed = child_seed(cfg.seed, (li as u64) << 16 | rep as u64);
                Ok(rep_stats(&generator::generate(&gc)?))
            })?;
            let agg = RepStats {
                mean_degree: mean(&reps.iter().map(|s| s.mean_degree).collect::<Vec<_>>()),
                transitivity: mean(&reps.iter().map(|s| s.transitivity).collect::<Vec<_>>()),
                assortativity: mean(&reps.iter().map(|s| s.assortativity).collect::<Vec<_>>()),
                hill: median(reps.iter().map(|s| s.hill).collect()),
            };
            for (rep, s) in reps.iter().enumerate() {
                let _ = writeln!(
                    rows,
                    "{knob},{level:.6},{rep},{lambda:.6},{:.6},{:.6},{:.6},{:.6}",
                    s.mean_degree, s.transitivity, s.assortativity, s.hill
                );
            }
            level_means.push((level, agg));
        }
        // standardized slope per statistic: least squares of stat on
        // (level - mean)/sd
        let xs: Vec<f64> = level_means.iter().map(|(l, _)| *l).collect();
        let mx = mean(&xs);
        let sx = (xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>() / xs.len() as f64).sqrt();
        for (stat, pick) in [
            ("transitivity", 0usize),
            ("assortativity", 1),
            ("hill_alpha_median", 2),
        ] {
            let ys: Vec<f64> = level_means
                .iter()
                .map(|(_, s)| match pick {
                    0 => s.transitivity,
                    1 => s.assortativity,
                    _ => s.hill,
                })
                .collect();
            let my = mean(&ys);
            let slope = if sx > 0.0 {
                xs.iter().zip(&ys).map(|(x, y)| (x - mx) / sx * (y - my)).sum::<f64>()
                    / xs.len() as f64
            } else {
                0.0
            };
            let _ = writeln!(slopes, "{knob},{stat},{slope:.6}");
        }
    }
    for (name, content) in [("e2_rows.csv", rows), ("e2_slopes.csv", slopes)] {
        let p = cfg.output_dir.join(name);
        io::write_string(&p, &content)?;
        files.push(p);
    }
    Ok(files)
}

/// E3: one-graph recovery of (lambda, theta) across n, with an MSE-by-n
/// table and a log-log slope fit.
fn run_e3(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let lambda_star = cfg.lambda.ok_or_else(|| Error::Parameter("recovery run needs lambda".into()))?;
    let theta_star = cfg.theta;
    let n_grid = cfg.n_grid.clone().unwrap_or_else(|| vec![600, 5_000]);
    let mut rows = String::from("n,replicate,lambda_hat,theta_hat,lambda_err,theta_abs_err\n");
    let mut table = String::from("n,mse_lambda,median_theta_abs_err\n");
    let mut mse_points = Vec::new();

    for &n in &n_grid {
        let reps = run_replicates(cfg.replicates, cfg.threads, |rep| {
            let gc = GenConfig::new(
                n,
                cfg.rho,
                lambda_star,
                Regime::FixedRangeLinear,
                CopulaFamily::fgm(theta_star, 1),
                WeightMarginal::UnitUniform,
                child_seed(cfg.seed, (n as u64) << 8 | rep as u64),
            );
            let g = generator::generate(&gc)?;
            let (fit, _) = calibration::calibrate_point(&g, cfg.rho)?;
            Ok((fit.lambda_hat, fit.theta_hat))
        })?;
        let mut sq = Vec::new();
        let mut terr = Vec::new();
        for (rep, (lh, th)) in reps.iter().enumerate() {
            let le = lh - lambda_star;
            let te = (th - theta_star).abs();
            let _ = writeln!(rows, "{n},{rep},{lh:.6},{th:.6},{le:.6},{te:.6}");
            sq.push(le * le);
            terr.push(te);
        }
        let mse = mean(&sq);
        let _ = writeln!(table, "{n},{mse:.6},{:.6}", median(terr));
        mse_points.push((n as f64, mse));
    }
    let mut slope_csv = String::from("n_lo,n_hi,loglog_slope\n");
    for w in mse_points.windows(2) {
        let slope = ((w[1].1.max(1e-300)).ln() - (w[0].1.max(1e-300)).ln())
            / (w[1].0.ln() - w[0].0.ln());
        let _ = writeln!(slope_csv, "{},{},{slope:.4}", w[0].0 as usize, w[1].0 as usize);
    }
    let mut files = Vec::new();
    for (name, content) in [
        ("e3_rows.csv", rows),
        ("e3_mse_by_n.csv", table),
        ("e3_loglog_slope.csv", slope_csv),
    ] {
        let p = cfg.output_dir.join(name);
        io::write_string(&p, &content)?;
        files.push(p);
    }
    Ok(files)
}

/// E5: native dependence tuning vs greedy degree-preserving rewiring toward
/// the same assortativity target.
fn run_e5(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let target = cfg
        .target_mean_degree
        .ok_or_else(|| Error::Parameter("comparison run needs target_mean_degree".into()))?;
    let marginal = match cfg.alpha {
        Some(a) => WeightMarginal::pareto(a),
        None => WeightMarginal::UnitUniform,
    };
    let template = base_gen(cfg, cfg.regime, marginal, 1.0, child_seed(cfg.seed, 0xe5));
    let lambda = lambda_for_target(cfg, &template, target, 3)?;

    // reference graph: observed targets
    let mut gc = template.clone();
    gc.lambda = lambda;
    gc.seed = child_seed(cfg.seed, 1);
    let data = generator::generate(&gc)?;
    let obs = rep_stats(&data);

    let mut rows = String::from(
        "method,replicate,transitivity,assortativity,abs_dc,abs_dr,reached_target,swaps_accepted\n",
    );
    for rep in 0..cfg.replicates {
        let mut gc = template.clone();
        gc.lambda = lambda;
        gc.seed = child_seed(cfg.seed, 1_000 + rep as u64);
        let g = generator::generate(&gc)?;
        let s = rep_stats(&g);
        let _ = writeln!(
            rows,
            "native,{rep},{:.6},{:.6},{:.6},{:.6},true,0",
            s.transitivity,
            s.assortativity,
            (s.transitivity - obs.transitivity).abs(),
            (s.assortativity - obs.assortativity).abs()
        );
    }
    for rep in 0..cfg.replicates {
        let mut gc = template.clone();
        gc.lambda = lambda;
        gc.family.theta = 0.0;
        gc.seed = child_seed(cfg.seed, 2_000 + rep as u64);
        let g0 = generator::generate(&gc)?;
        let res = rewiring::rewire_to_target_r(
            &g0,
            obs.assortativity,
            250_000,
            0.01,
            child_seed(cfg.seed, 3_000 + rep as u64),
        )?;
        let s = rep_stats(&res.graph);
        let _ = writeln!(
            rows,
            "rewired,{rep},{:.6},{:.6},{:.6},{:.6},{},{}",
            s.transitivity,
            s.assortativity,
            (s.transitivity - obs.transitivity).abs(),
            (s.assortativity - obs.assortativity).abs(),
            res.reached_target,
            res.swaps_accepted
        );
    }
    let mut files = Vec::new();
    let obs_csv = format!(
        "transitivity,assortativity,mean_degree\n{:.6},{:.6},{:.6}\n",
        obs.transitivity, obs.assortativity, obs.mean_degree
    );
    for (name, content) in [("e5_observed.csv", obs_csv), ("e5_comparison.csv", rows)] {
        let p = cfg.output_dir.join(name);
        io::write_string(&p, &content)?;
        files.push(p);
    }
    Ok(files)
}

/// Custom: generate replicates at the literal config and dump stats rows.
fn run_custom(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let lambda = cfg.lambda.ok_or_else(|| Error::Parameter("custom run needs lambda".into()))?;
    let marginal = match cfg.alpha {
        Some(a) => WeightMarginal::pareto(a),
        None => WeightMarginal::UnitUniform,
    };
    let template = base_gen(cfg, cfg.regime, marginal, lambda, cfg.seed);
    let reps = run_replicates(cfg.replicates, cfg.threads, |rep| {
        let mut gc = template.clone();
        gc.seed = child_seed(cfg.seed, rep as u64);
        Ok(rep_stats(&generator::generate(&gc)?))
    })?;
    let mut rows =
        String::from("replicate,mean_degree,transitivity,assortativity,hill_alpha_median\n");
    for (rep, s) in reps.iter().enumerate() {
        let _ = writeln!(
            rows,
            "{rep},{:.6},{:.6},{:.6},{:.6}",
            s.mean_degree, s.transitivity, s.assortativity, s.hill
        );
    }
    let p = cfg.output_dir.join("custom_rows.csv");
    io::write_string(&p, &rows)?;
    Ok(vec![p])
}
