//! One-graph calibration: lambda from the observed mean degree, theta by
//! minimum-distance matching of (C_n, r_n) to the closed-form limits, plus
//! sandwich confidence intervals from a parametric bootstrap.

use crate::error::{Error, Result};
use crate::generator::{self, GenConfig, Graph, Regime};
use crate::limits::{self, LimitModel};
use crate::rng::child_seed;
use crate::stats;

/// Full calibration output.
#[derive(Clone, Debug)]
pub struct FitReport {
    pub lambda_hat: f64,
    pub theta_hat: f64,
    /// Minimized squared distance in (C, r) space.
    pub residual: f64,
    pub observed: (f64, f64),
    pub predicted: (f64, f64),
    /// G = d(C, r)/dtheta at theta_hat.
    pub jacobian: [f64; 2],
    /// Covariance of sqrt(n) (C_n, r_n), symmetric PSD.
    pub sigma: [[f64; 2]; 2],
    pub se_theta: f64,
    pub ci_theta: (f64, f64),
    pub boundary: bool,
    pub plateau: bool,
    pub truncation_warnings: u64,
}

impl FitReport {
    fn partial(lambda_hat: f64, theta_hat: f64, residual: f64, observed: (f64, f64), predicted: (f64, f64)) -> FitReport {
        FitReport {
            lambda_hat,
            theta_hat,
            residual,
            observed,
            predicted,
            jacobian: [0.0; 2],
            sigma: [[0.0; 2]; 2],
            se_theta: f64::NAN,
            ci_theta: (theta_hat, theta_hat),
            boundary: theta_hat <= 1e-9 || theta_hat >= 1.0 - 1e-9,
            plateau: false,
            truncation_warnings: 0,
        }
    }
}

/// Closed-form limiting transitivity, plain f64 Horner evaluation (the
/// coefficients are exactly representable; used inside optimization loops).
fn c_of_theta(lambda: f64, rho: f64, theta: f64) -> f64 {
    let t = theta * theta;
    2.25 * lambda / rho * (t + 4.0) / (4.0 * t + 27.0)
}

fn r_of_theta(lambda: f64, rho: f64, theta: f64) -> f64 {
    let t = theta * theta;
    let num = 15.0 * lambda * (((2.0 * rho * t - 36.0 * rho + 45.0) * t + 810.0 * rho + 1395.0) * t + 4860.0);
    let den = rho
        * ((((27.0 * lambda * t - 581.0 * lambda + 1200.0) * t + 13905.0 * lambda + 40500.0) * t)
            + 18225.0 * lambda
            + 218700.0);
    num / den
}

/// lambda from a mean-degree target. In the closed-form regime this is the
/// exact inversion d / (kappa2 M(theta)); otherwise a monotone bisection on
/// lambda against the simulated mean degree (1% relative tolerance, bracket
/// auto-expansion, `sim_seeds` seeds averaged) using `sim` as the template.
pub fn fit_lambda(
    target_mean_degree: f64,
    model: &LimitModel,
    sim: Option<(&GenConfig, usize)>,
) -> Result<f64> {
    if !(target_mean_degree > 0.0) {
        return Err(Error::Parameter(format!(
            "mean-degree target must be > 0, got {target_mean_degree}"
        )));
    }
    // the inversion d / (kappa2 M(theta)) does not involve lambda itself,
    // so it applies whenever the linear-link closed forms do
    if model.dim() == 1
        && model.regime == Regime::FixedRangeLinear
        && model.marginal == crate::copula::WeightMarginal::UnitUniform
    {
        let m = limits::fgm_mean_degree_scalar(model.theta);
        return Ok(target_mean_degree / (model.constants.kappa2 * m));
    }
    let (template, sim_seeds) = sim.ok_or_else(|| {
        Error::Unsupported(
            "no closed form for this regime; supply a simulation template for bisection".into(),
        )
    })?;
    let mean_at = |lambda: f64| -> Result<f64> {
        let mut acc = 0.0;
        for s in 0..sim_seeds {
            let mut cfg = template.clone();
            cfg.lambda = lambda;
            cfg.seed = child_seed(template.seed, s as u64);
            acc += generator::generate(&cfg)?.mean_degree();
        }
        Ok(acc / sim_seeds as f64)
    };
    // bracket the target
    let mut hi = template.lambda.max(1e-3);
    let mut f_hi = mean_at(hi)?;
    while f_hi < target_mean_degree {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Calibration(format!(
                "mean degree {f_hi:.3} still below target {target_mean_degree} at lambda = 1e6"
            )));
        }
        f_hi = mean_at(hi)?;
    }
    let mut lo = hi / 2.0;
    let mut f_lo = mean_at(lo)?;
    while f_lo > target_mean_degree {
        lo /= 2.0;
        if lo < 1e-9 {
            return Err(Error::Calibration(format!(
                "mean degree {f_lo:.3} still above target {target_mean_degree} at lambda = 1e-9"
            )));
        }
        f_lo = mean_at(lo)?;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        let f_mid = mean_at(mid)?;
        if (f_mid - target_mean_degree).abs() <= 0.01 * target_mean_degree || (hi - lo) < 1e-9 * hi
        {
            return Ok(mid);
        }
        if f_mid < target_mean_degree {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn golden_section(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > 1e-10 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Minimum-distance theta fit: grid scan of
/// (C(theta)-c_obs)^2 + (r(theta)-r_obs)^2 refined by golden-section search
/// in the winning cell; ties broken toward smaller theta.
pub fn fit_theta_minimum_distance(
    c_obs: f64,
    r_obs: f64,
    model: &LimitModel,
    grid: usize,
) -> Result<FitReport> {
    model.closed_form_regime()?;
    if grid < 101 {
        return Err(Error::Parameter(format!("need grid >= 101, got {grid}")));
    }
    let objective = |theta: f64| {
        let dc = c_of_theta(model.lambda, model.rho, theta) - c_obs;
        let dr = r_of_theta(model.lambda, model.rho, theta) - r_obs;
        dc * dc + dr * dr
    };
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..grid {
        let theta = i as f64 / (grid - 1) as f64;
        let q = objective(theta);
        if q < best {
            best = q;
            best_i = i;
        }
        worst = worst.max(q);
    }
    let step = 1.0 / (grid - 1) as f64;
    let a = (best_i as f64 * step - step).max(0.0);
    let b = (best_i as f64 * step + step).min(1.0);
    let theta_hat = golden_section(a, b, objective);
    let residual = objective(theta_hat);
    let predicted = (
        c_of_theta(model.lambda, model.rho, theta_hat),
        r_of_theta(model.lambda, model.rho, theta_hat),
    );
    let mut report =
        FitReport::partial(model.lambda, theta_hat, residual, (c_obs, r_obs), predicted);
    report.plateau = worst - best < 1e-14;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetStat {
    Transitivity,
    Assortativity,
}

/// Unique theta* with f(theta*) = target for a strictly monotone limit f,
/// by bisection to 1e-10. Endpoint hits within 1e-12 return the endpoint.
pub fn invert_monotone(target: f64, which: TargetStat, model: &LimitModel) -> Result<f64> {
    model.closed_form_regime()?;
    let f = |theta: f64| match which {
        TargetStat::Transitivity => c_of_theta(model.lambda, model.rho, theta),
        TargetStat::Assortativity => r_of_theta(model.lambda, model.rho, theta),
    };
    let (f0, f1) = (f(0.0), f(1.0));
    if (target - f0).abs() <= 1e-12 {
        return Ok(0.0);
    }
    if (target - f1).abs() <= 1e-12 {
        return Ok(1.0);
    }
    if target <= f0 || target >= f1 {
        return Err(Error::OutOfRange(format!(
            "target {target} outside the attainable open interval ({f0:.6}, {f1:.6})"
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// theta variance from the sandwich (G'G)^{-1} G' Sigma G (G'G)^{-1} / n;
/// split out so a degenerate Sigma can be injected in tests.
pub fn wald_from_sigma(
    theta_hat: f64,
    jacobian: [f64; 2],
    sigma: [[f64; 2]; 2],
    n: usize,
) -> Result<(f64, (f64, f64))> {
    let gtg = jacobian[0] * jacobian[0] + jacobian[1] * jacobian[1];
    if gtg.sqrt() < 1e-8 {
        return Err(Error::Calibration(
            "jacobian vanishes at theta_hat: locally non-identifiable".into(),
        ));
    }
    let gsg = jacobian[0] * (sigma[0][0] * jacobian[0] + sigma[0][1] * jacobian[1])
        + jacobian[1] * (sigma[1][0] * jacobian[0] + sigma[1][1] * jacobian[1]);
    let var = gsg.max(0.0) / (gtg * gtg) / n as f64;
    let se = var.sqrt();
    let ci = ((theta_hat - 1.96 * se).max(0.0), (theta_hat + 1.96 * se).min(1.0));
    Ok((se, ci))
}

/// Delta-method uncertainty for theta_hat: jacobian by central differences
/// (h = 1e-4) of the closed forms, Sigma by parametric bootstrap
/// regeneration at the fitted parameters.
pub fn wald_uncertainty(
    graph: &Graph,
    theta_hat: f64,
    model: &LimitModel,
    bootstrap_reps: usize,
    seed: u64,
) -> Result<FitReport> {
    model.closed_form_regime()?;
    if bootstrap_reps < 50 {
        return Err(Error::Parameter(format!("need bootstrap_reps >= 50, got {bootstrap_reps}")));
    }
    let h = 1e-4;
    let (tl, tr) = ((theta_hat - h).max(0.0), (theta_hat + h).min(1.0));
    let span = tr - tl;
    let jacobian = [
        (c_of_theta(model.lambda, model.rho, tr) - c_of_theta(model.lambda, model.rho, tl)) / span,
        (r_of_theta(model.lambda, model.rho, tr) - r_of_theta(model.lambda, model.rho, tl)) / span,
    ];

    let n = graph.n;
    let base = graph.config.clone().unwrap_or_else(|| {
        GenConfig::new(
            n,
            model.rho,
            model.lambda,
            model.regime,
            model.family,
            model.marginal,
            seed,
        )
    });
    let mut samples = Vec::with_capacity(bootstrap_reps);
    for rep in 0..bootstrap_reps {
        let mut cfg = base.clone();
        cfg.lambda = model.lambda;
        cfg.family.theta = theta_hat;
        cfg.seed = child_seed(seed, rep as u64);
        let g = generator::generate(&cfg)?;
        let mv = stats::motif_vector(&g);
        samples.push((stats::transitivity(&mv), stats::assortativity(&mv)));
    }
    let m = samples.len() as f64;
    let mean_c = samples.iter().map(|s| s.0).sum::<f64>() / m;
    let mean_r = samples.iter().map(|s| s.1).sum::<f64>() / m;
    let mut sigma = [[0.0; 2]; 2];
    for (c, r) in &samples {
        let dc = c - mean_c;
        let dr = r - mean_r;
        sigma[0][0] += dc * dc;
        sigma[0][1] += dc * dr;
        sigma[1][1] += dr * dr;
    }
    sigma[0][0] *= n as f64 / (m - 1.0);
    sigma[0][1] *= n as f64 / (m - 1.0);
    sigma[1][1] *= n as f64 / (m - 1.0);
    sigma[1][0] = sigma[0][1];

    let (se, ci) = wald_from_sigma(theta_hat, jacobian, sigma, n)?;

    let mv = stats::motif_vector(graph);
    let observed = (stats::transitivity(&mv), stats::assortativity(&mv));
    let predicted = (
        c_of_theta(model.lambda, model.rho, theta_hat),
        r_of_theta(model.lambda, model.rho, theta_hat),
    );
    let residual = (observed.0 - predicted.0).powi(2) + (observed.1 - predicted.1).powi(2);
    let mut report = FitReport::partial(model.lambda, theta_hat, residual, observed, predicted);
    report.jacobian = jacobian;
    report.sigma = sigma;
    report.se_theta = se;
    report.ci_theta = ci;
    report.truncation_warnings = graph.truncation_warnings;
    Ok(report)
}

/// Point estimates only: lambda from the mean degree, theta by minimum
/// distance, with one lambda refinement pass at theta_hat (the mean degree
/// depends on theta only through M(theta), so one pass suffices).
pub fn calibrate_point(graph: &Graph, rho: f64) -> Result<(FitReport, LimitModel)> {
    let mean_degree = graph.mean_degree();
    if mean_degree <= 0.0 {
        return Err(Error::Calibration("graph has no edges; nothing to calibrate".into()));
    }
    let mv = stats::motif_vector(graph);
    let (c_obs, r_obs) = (stats::transitivity(&mv), stats::assortativity(&mv));

    let mut model = LimitModel::new(
        1.0,
        rho,
        0.0,
        1,
        Regime::FixedRangeLinear,
        crate::copula::WeightMarginal::UnitUniform,
    )?;
    model.lambda = fit_lambda(mean_degree, &model, None)?.min(rho);
    let theta_hat = fit_theta_minimum_distance(c_obs, r_obs, &model, 201)?.theta_hat;
    model.theta = theta_hat;
    model.lambda = fit_lambda(mean_degree, &model, None)?.min(rho);
    let mut report = fit_theta_minimum_distance(c_obs, r_obs, &model, 201)?;
    model.theta = report.theta_hat;
    report.lambda_hat = model.lambda;
    report.truncation_warnings = graph.truncation_warnings;
    Ok((report, model))
}

/// Full one-graph pipeline: point estimates plus bootstrap uncertainty.
pub fn calibrate_graph(
    graph: &Graph,
    rho: f64,
    bootstrap_reps: usize,
    seed: u64,
) -> Result<FitReport> {
    let (point, model) = calibrate_point(graph, rho)?;
    let mut report = wald_uncertainty(graph, point.theta_hat, &model, bootstrap_reps, seed)?;
    report.lambda_hat = model.lambda;
    report.plateau = point.plateau;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{CopulaFamily, WeightMarginal};

    fn linear_model(lambda: f64, rho: f64, theta: f64) -> LimitModel {
        LimitModel::new(lambda, rho, theta, 1, Regime::FixedRangeLinear, WeightMarginal::UnitUniform)
            .unwrap()
    }

    fn linear_config(n: usize, lambda: f64, theta: f64, seed: u64) -> GenConfig {
        GenConfig::new(
            n,
            1.0,
            lambda,
            Regime::FixedRangeLinear,
            CopulaFamily::fgm(theta, 1),
            WeightMarginal::UnitUniform,
            seed,
        )
    }

    #[test]
    fn closed_forms_match_exact_evaluators() {
        for &theta in &[0.0, 0.3, 0.7, 1.0] {
            let m = linear_model(0.8, 1.0, theta);
            assert!((c_of_theta(0.8, 1.0, theta) - limits::fgm_limit_c(&m).unwrap()).abs() < 1e-12);
            assert!((r_of_theta(0.8, 1.0, theta) - limits::fgm_limit_r(&m).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_lambda_closed_form_examples() {
        let m = linear_model(1.0, 1.0, 0.0);
        assert!((fit_lambda(0.4, &m, None).unwrap() - 0.8).abs() < 1e-12);
        assert!((fit_lambda(6.0, &m, None).unwrap() - 12.0).abs() < 1e-12);
        assert!(fit_lambda(0.0, &m, None).is_err());
    }

    #[test]
    fn fit_lambda_round_trip_on_simulated_graph() {
        let lambda_star = 0.8;
        let cfg = linear_config(20_000, lambda_star, 0.0, 77);
        let g = generator::generate(&cfg).unwrap();
        let m = linear_model(1.0, 1.0, 0.0);
        let lambda_hat = fit_lambda(g.mean_degree(), &m, None).unwrap();
        assert!(
            (lambda_hat - lambda_star).abs() / lambda_star <= 0.05,
            "lambda_hat {lambda_hat}"
        );
    }

    #[test]
    fn fit_lambda_simulated_bisection_recovers() {
        // exponential link has no closed form; bisection against simulation
        let target = 0.35;
        let template = GenConfig::new(
            4_000,
            1.0,
            1.0,
            Regime::FixedRangeExp,
            CopulaFamily::fgm(0.0, 1),
            WeightMarginal::UnitUniform,
            19,
        );
        let mut m = linear_model(1.0, 1.0, 0.0);
        m.regime = Regime::FixedRangeExp;
        let lambda_hat = fit_lambda(target, &m, Some((&template, 10))).unwrap();
        // verify: regenerate at the fitted lambda, mean degree near target
        let mut acc = 0.0;
        for s in 0..10 {
            let mut cfg = template.clone();
            cfg.lambda = lambda_hat;
            cfg.seed = child_seed(999, s);
            acc += generator::generate(&cfg).unwrap().mean_degree();
        }
        let mean = acc / 10.0;
        assert!((mean - target).abs() / target < 0.07, "mean {mean} target {target}");
    }

    #[test]
    fn fit_lambda_bracket_failure() {
        // linear link saturates: mean degree can never reach 10 at rho = 1
        let template = linear_config(2_000, 1.0, 0.0, 5);
        let mut m = linear_model(1.0, 1.0, 0.0);
        m.marginal = WeightMarginal::pareto(2.5); // leave the closed-form regime
        let mut template = template;
        template.marginal = WeightMarginal::pareto(2.5);
        template.regime = Regime::FixedRangeExp;
        m.regime = Regime::FixedRangeExp;
        let err = fit_lambda(50.0, &m, Some((&template, 2))).unwrap_err();
        assert!(matches!(err, Error::Calibration(_)), "{err}");
    }

    #[test]
    fn fit_theta_self_consistent_on_grid() {
        for k in 1..=9 {
            let theta = k as f64 / 10.0;
            let m = linear_model(0.8, 1.0, 0.0);
            let c = c_of_theta(0.8, 1.0, theta);
            let r = r_of_theta(0.8, 1.0, theta);
            let fit = fit_theta_minimum_distance(c, r, &m, 201).unwrap();
            assert!((fit.theta_hat - theta).abs() < 1e-6, "theta {theta} -> {}", fit.theta_hat);
            assert!(fit.residual < 1e-18);
            assert!(!fit.boundary);
        }
    }

    #[test]
    fn fit_theta_boundary_flag() {
        let m = linear_model(0.8, 1.0, 0.0);
        let fit = fit_theta_minimum_distance(0.9, 0.9, &m, 201).unwrap();
        assert!((fit.theta_hat - 1.0).abs() < 1e-9);
        assert!(fit.boundary);
        assert!(fit.residual > 0.0);
        let fit = fit_theta_minimum_distance(0.0, 0.0, &m, 201).unwrap();
        assert!(fit.theta_hat < 1e-9);
        assert!(fit.boundary);
        assert!(fit_theta_minimum_distance(0.3, 0.3, &m, 50).is_err());
    }

    #[test]
    fn invert_monotone_round_trips() {
        let m = linear_model(1.0, 1.0, 0.0);
        for which in [TargetStat::Transitivity, TargetStat::Assortativity] {
            let f = |theta: f64| match which {
                TargetStat::Transitivity => c_of_theta(1.0, 1.0, theta),
                TargetStat::Assortativity => r_of_theta(1.0, 1.0, theta),
            };
            for k in 1..=20 {
                let theta = k as f64 / 21.0;
                let target = f(theta);
                let back = invert_monotone(target, which, &m).unwrap();
                assert!((f(back) - target).abs() < 1e-9, "{which:?} theta {theta}");
            }
        }
        // endpoint acceptance and out-of-range
        assert_eq!(invert_monotone(1.0 / 3.0, TargetStat::Transitivity, &m).unwrap(), 0.0);
        let t = invert_monotone(0.335, TargetStat::Assortativity, &m).unwrap();
        assert!(t > 0.0 && t < 1.0);
        assert!((r_of_theta(1.0, 1.0, t) - 0.335).abs() < 1e-9);
        assert!(matches!(
            invert_monotone(0.9, TargetStat::Transitivity, &m),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn degenerate_sigma_gives_zero_width_ci() {
        let (se, ci) = wald_from_sigma(0.4, [0.01, 0.05], [[0.0; 2]; 2], 5_000).unwrap();
        assert_eq!(se, 0.0);
        assert_eq!(ci, (0.4, 0.4));
        assert!(wald_from_sigma(0.4, [1e-10, 1e-10], [[1.0, 0.0], [0.0, 1.0]], 100).is_err());
    }

    #[test]
    fn wald_ci_contains_theta_hat_and_sigma_is_psd() {
        let cfg = linear_config(5_000, 0.8, 0.5, 101);
        let g = generator::generate(&cfg).unwrap();
        let m = linear_model(0.8, 1.0, 0.5);
        let rep = wald_uncertainty(&g, 0.5, &m, 50, 7).unwrap();
        assert!(rep.ci_theta.0 <= rep.theta_hat && rep.theta_hat <= rep.ci_theta.1);
        assert!(rep.sigma[0][0] >= 0.0 && rep.sigma[1][1] >= 0.0);
        let det = rep.sigma[0][0] * rep.sigma[1][1] - rep.sigma[0][1] * rep.sigma[1][0];
        assert!(det >= -1e-9 * rep.sigma[0][0].max(rep.sigma[1][1]).powi(2));
        assert!((rep.sigma[0][1] - rep.sigma[1][0]).abs() < 1e-15);
        assert!(wald_uncertainty(&g, 0.5, &m, 10, 7).is_err());
    }

    #[test]
    fn lambda_mse_decreases_with_n() {
        let lambda_star = 0.8;
        let mse_at = |n: usize| -> f64 {
            let mut acc = 0.0;
            let reps = 10;
            for rep in 0..reps {
                let cfg = linear_config(n, lambda_star, 0.5, 40_000 + rep);
                let g = generator::generate(&cfg).unwrap();
                let m = linear_model(1.0, 1.0, 0.5);
                let lambda_hat = fit_lambda(g.mean_degree(), &m, None).unwrap();
                acc += (lambda_hat - lambda_star).powi(2);
            }
            acc / reps as f64
        };
        let coarse = mse_at(600);
        let fine = mse_at(5_000);
        assert!(fine < coarse, "MSE {fine} at n=5000 not below {coarse} at n=600");
    }

    #[test]
    fn ci_width_scales_like_sqrt_n() {
        let width_at = |n: usize, seed0: u64| -> f64 {
            let reps = 8;
            let mut acc = 0.0;
            for rep in 0..reps {
                let cfg = linear_config(n, 0.8, 0.5, seed0 + rep);
                let g = generator::generate(&cfg).unwrap();
                let m = linear_model(0.8, 1.0, 0.5);
                let r = wald_uncertainty(&g, 0.5, &m, 50, 900 + rep).unwrap();
                acc += r.se_theta;
            }
            acc / reps as f64
        };
        let wide = width_at(4_000, 60_000);
        let narrow = width_at(16_000, 70_000);
        let ratio = wide / narrow;
        assert!((1.4..=2.8).contains(&ratio), "CI width ratio {ratio}");
    }

    #[test]
    fn coverage_of_wald_interval() {
        let theta_star = 0.5;
        let mut covered = 0;
        let runs = 50;
        for run in 0..runs {
            let cfg = linear_config(5_000, 0.8, theta_star, 80_000 + run);
            let g = generator::generate(&cfg).unwrap();
            let rep = calibrate_graph(&g, 1.0, 50, 91_000 + run).unwrap();
            if rep.ci_theta.0 <= theta_star && theta_star <= rep.ci_theta.1 {
                covered += 1;
            }
        }
        assert!(covered >= 40, "covered {covered}/{runs}");
    }
}
