//! Large-graph limit formulas: degree intensities, mixed-Poisson degree
//! laws, the FGM closed forms for transitivity and assortativity, the
//! constant-clustering curve, tail-inheriting intensities and tail
//! constants, and generic Monte-Carlo limit evaluators.
//!
//! The rational closed forms carry large integer coefficients, so they are
//! evaluated exactly over `BigRational` and only converted to `f64` at the
//! boundary.

use crate::copula::{fgm_conditional_inverse, CopulaFamily, WeightMarginal};
use crate::error::{Error, Result};
use crate::generator::Regime;
use crate::geometry::{ball_volume, kernel_constants, Kernel, KernelConstants};
use crate::rng::{KeyedRng, Stream};
use num::{BigInt, BigRational, ToPrimitive};

/// Everything needed to evaluate limit formulas for one parameterization.
#[derive(Clone, Debug)]
pub struct LimitModel {
    pub lambda: f64,
    pub rho: f64,
    pub theta: f64,
    pub regime: Regime,
    pub kernel: Kernel,
    pub constants: KernelConstants,
    pub family: CopulaFamily,
    pub marginal: WeightMarginal,
}

impl LimitModel {
    pub fn new(
        lambda: f64,
        rho: f64,
        theta: f64,
        dim: usize,
        regime: Regime,
        marginal: WeightMarginal,
    ) -> Result<LimitModel> {
        if !(lambda > 0.0) {
            return Err(Error::Parameter(format!("lambda must be > 0, got {lambda}")));
        }
        if !(rho > 0.0) {
            return Err(Error::Parameter(format!("rho must be > 0, got {rho}")));
        }
        let family = CopulaFamily::fgm(theta, dim);
        family.validate()?;
        marginal.validate()?;
        let kernel = Kernel::default();
        let constants = kernel_constants(kernel, dim, 200_000)?;
        Ok(LimitModel { lambda, rho, theta, regime, kernel, constants, family, marginal })
    }

    pub fn dim(&self) -> usize {
        self.family.dim
    }

    /// The exact closed forms hold for d = 1, unit-radius indicator kernel,
    /// unit-uniform weights, linear link, and lambda in (0, rho].
    pub fn closed_form_regime(&self) -> Result<()> {
        let ok = self.dim() == 1
            && (self.kernel.radius - 1.0).abs() < 1e-12
            && self.marginal == WeightMarginal::UnitUniform
            && self.regime == Regime::FixedRangeLinear
            && self.lambda <= self.rho;
        if ok {
            Ok(())
        } else {
            Err(Error::Unsupported(
                "closed forms need d=1, unit indicator kernel, unit-uniform weights, linear \
                 link, lambda <= rho; use the Monte-Carlo evaluator instead"
                    .into(),
            ))
        }
    }
}

fn br(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}

fn br_f64(x: f64, name: &str) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::Numeric(format!("{name} = {x} is not a finite number")))
}

/// Exact limiting transitivity C(theta) = (9 lambda / 4 rho)(t+4)/(4t+27),
/// t = theta^2, for the linear-link closed-form regime.
pub fn fgm_limit_c_exact(lambda: &BigRational, rho: &BigRational, theta: &BigRational) -> BigRational {
    let t = theta * theta;
    br(9) * lambda / (br(4) * rho) * (&t + br(4)) / (br(4) * &t + br(27))
}

/// Exact limiting assortativity r(theta) in t = theta^2.
pub fn fgm_limit_r_exact(lambda: &BigRational, rho: &BigRational, theta: &BigRational) -> BigRational {
    let t = theta * theta;
    let t2 = &t * &t;
    let t3 = &t2 * &t;
    let num = br(15)
        * lambda
        * (br(2) * rho * &t3 - br(36) * rho * &t2 + br(810) * rho * &t
            + br(45) * &t2
            + br(1395) * &t
            + br(4860));
    let den = rho
        * (br(27) * lambda * &t3 - br(581) * lambda * &t2
            + br(13905) * lambda * &t
            + br(18225) * lambda
            + br(1200) * &t2
            + br(40500) * &t
            + br(218700));
    num / den
}

/// Exact constant-clustering curve lambda_c = (4 c rho / 9)(4t+27)/(t+4).
pub fn lambda_c_exact(c: &BigRational, theta: &BigRational, rho: &BigRational) -> BigRational {
    let t = theta * theta;
    br(4) * c * rho / br(9) * (br(4) * &t + br(27)) / (&t + br(4))
}

/// Assortativity along the constant-clustering curve, by substituting
/// lambda_c(theta) into the exact assortativity form.
pub fn r_along_curve_exact(c: &BigRational, theta: &BigRational, rho: &BigRational) -> BigRational {
    let lam = lambda_c_exact(c, theta, rho);
    fgm_limit_r_exact(&lam, rho, theta)
}

/// Limiting transitivity C(theta) for the closed-form regime.
pub fn fgm_limit_c(model: &LimitModel) -> Result<f64> {
    model.closed_form_regime()?;
    let v = fgm_limit_c_exact(
        &br_f64(model.lambda, "lambda")?,
        &br_f64(model.rho, "rho")?,
        &br_f64(model.theta, "theta")?,
    );
    Ok(v.to_f64().unwrap())
}

/// Limiting assortativity r(theta) for the closed-form regime.
pub fn fgm_limit_r(model: &LimitModel) -> Result<f64> {
    model.closed_form_regime()?;
    let v = fgm_limit_r_exact(
        &br_f64(model.lambda, "lambda")?,
        &br_f64(model.rho, "rho")?,
        &br_f64(model.theta, "theta")?,
    );
    Ok(v.to_f64().unwrap())
}

fn check_curve_inputs(c: f64, theta: f64, rho: f64) -> Result<()> {
    if !(c > 0.0 && c <= 1.0 / 3.0) {
        return Err(Error::Parameter(format!("target clustering level must lie in (0, 1/3], got {c}")));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Parameter(format!("theta must lie in [0, 1], got {theta}")));
    }
    if !(rho > 0.0) {
        return Err(Error::Parameter(format!("rho must be > 0, got {rho}")));
    }
    Ok(())
}

/// lambda_c(theta): the lambda keeping the limiting transitivity at `c`.
pub fn lambda_c_curve(c: f64, theta: f64, rho: f64) -> Result<f64> {
    check_curve_inputs(c, theta, rho)?;
    let v = lambda_c_exact(&br_f64(c, "c")?, &br_f64(theta, "theta")?, &br_f64(rho, "rho")?);
    Ok(v.to_f64().unwrap())
}

/// r(lambda_c(theta), theta): assortativity along the constant-clustering
/// curve.
pub fn r_along_curve(c: f64, theta: f64, rho: f64) -> Result<f64> {
    check_curve_inputs(c, theta, rho)?;
    let v = r_along_curve_exact(&br_f64(c, "c")?, &br_f64(theta, "theta")?, &br_f64(rho, "rho")?);
    Ok(v.to_f64().unwrap())
}

/// Mean-degree scalar M(theta) = E[m_{1,theta}(X)^2] = 1/4 + theta^2/108 for
/// unit-uniform weights; the limiting mean degree is lambda kappa2 M(theta).
pub fn fgm_mean_degree_scalar(theta: f64) -> f64 {
    0.25 + theta * theta / 108.0
}

/// Bernoulli success probability of the chosen link at raw exponent `t`.
fn link_prob(regime: Regime, t: f64) -> f64 {
    match regime {
        Regime::FixedRangeExp | Regime::HeavyTail => 1.0 - (-t).exp(),
        Regime::FixedRangeLinear => t.min(1.0),
    }
}

/// E[e^{-s W'} | X = x] for unit-uniform weights under the FGM tilt
/// 1 + c(1 - 2w), c = theta (1 - 2x).
fn uniform_tilted_laplace(s: f64, c: f64) -> f64 {
    if s < 1e-6 {
        // series to O(s^2): 1 - s m1 + s^2/2 m2
        let m1 = 0.5 - c / 6.0;
        let m2 = 1.0 / 3.0 - c / 6.0;
        return 1.0 - s * m1 + 0.5 * s * s * m2;
    }
    let e = (-s).exp();
    (1.0 + c) * (1.0 - e) / s - 2.0 * c * (1.0 - (1.0 + s) * e) / (s * s)
}

/// E[min(s W', 1) | X = x] for unit-uniform weights under the FGM tilt.
fn uniform_tilted_linear(s: f64, c: f64) -> f64 {
    let m1 = 0.5 - c / 6.0;
    if s <= 1.0 {
        return s * m1;
    }
    let t = 1.0 / s;
    let below = s * (t * t / 2.0 + c * (t * t / 2.0 - 2.0 * t * t * t / 3.0));
    let above = (1.0 - t) * (1.0 - c * t);
    below + above
}

/// Limiting degree intensity for the fixed-range regimes,
/// Lambda_theta(w, x) = rho Int E[1 - exp{-(lambda/rho) w W' k(u)} | X = x] du,
/// with the unit-uniform fast path evaluated in closed form and everything
/// else by refined trapezoid quadrature over the weight rank.
pub fn intensity_fixed(model: &LimitModel, w: f64, x: f64, quad_points: usize) -> Result<f64> {
    if model.regime == Regime::HeavyTail {
        return Err(Error::Unsupported("fixed-range intensity asked for the tail-inheriting regime".into()));
    }
    if quad_points < 64 {
        return Err(Error::Parameter(format!("need quad_points >= 64, got {quad_points}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0, 1], got {x}")));
    }
    if !(w >= 0.0) {
        return Err(Error::Domain(format!("w must be >= 0, got {w}")));
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    let vol = ball_volume(model.dim(), model.kernel.radius);
    let s = model.lambda / model.rho * w;
    let c = model.theta * (1.0 - 2.0 * x);
    let mean = if model.marginal == WeightMarginal::UnitUniform {
        match model.regime {
            Regime::FixedRangeExp => 1.0 - uniform_tilted_laplace(s, c),
            Regime::FixedRangeLinear => uniform_tilted_linear(s, c),
            Regime::HeavyTail => unreachable!(),
        }
    } else {
        intensity_quad_mean(model, s, c, quad_points)?
    };
    Ok((model.rho * vol * mean).min(model.rho * vol))
}

/// The generic quadrature path of [`intensity_fixed`]: mean link probability
/// against the tilted weight-rank density, any marginal. Public so the
/// closed-form fast path can be cross-checked against it.
pub fn intensity_quad_mean(model: &LimitModel, s: f64, c: f64, quad_points: usize) -> Result<f64> {
    let f = |u: f64| -> f64 {
        let u = u.clamp(1e-12, 1.0 - 1e-12);
        let wq = model.marginal.quantile(u).unwrap();
        link_prob(model.regime, s * wq) * (1.0 + c * (1.0 - 2.0 * u))
    };
    let trapezoid = |m: usize| -> f64 {
        let h = 1.0 / m as f64;
        let mut acc = 0.5 * (f(0.0) + f(1.0));
        for i in 1..m {
            acc += f(i as f64 * h);
        }
        acc * h
    };
    let mut m = quad_points;
    let mut prev = trapezoid(m);
    loop {
        m *= 2;
        let next = trapezoid(m);
        if (next - prev).abs() <= 1e-8 * next.abs().max(1e-12) {
            return Ok(next);
        }
        if m > 1 << 20 {
            return Err(Error::Numeric(format!(
                "intensity quadrature did not converge within 2^20 points (last rel change {:.2e})",
                (next - prev).abs() / next.abs().max(1e-300)
            )));
        }
        prev = next;
    }
}

/// Monte-Carlo estimate of the limiting transitivity
/// C = 2 E[tau(W, X)] / E[Lambda(W, X)^2], returned with a delta-method
/// standard error for the ratio.
pub fn clustering_limit_mc(model: &LimitModel, mc_samples: usize, seed: u64) -> Result<(f64, f64)> {
    if model.regime == Regime::HeavyTail {
        return Err(Error::Unsupported("clustering limit is evaluated for the fixed-range regimes".into()));
    }
    if mc_samples < 10_000 {
        return Err(Error::Parameter(format!("need mc_samples >= 10^4, got {mc_samples}")));
    }
    let d = model.dim();
    let r = model.kernel.radius;
    let a = model.lambda / model.rho;
    let box_vol = (2.0 * r).powi(d as i32);
    let theta = model.family.effective_theta();

    let mut sum_n = 0.0;
    let mut sum_d = 0.0;
    let mut sum_nn = 0.0;
    let mut sum_dd = 0.0;
    let mut sum_nd = 0.0;
    let mut u = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut diff = vec![0.0; d];
    for j in 0..mc_samples {
        let mut rng = KeyedRng::new(seed, Stream::MonteCarlo, j as u64);
        let x = rng.uniform();
        let b = theta * (1.0 - 2.0 * x);
        let draw_w = |rng: &mut KeyedRng| -> f64 {
            model.marginal.quantile(fgm_conditional_inverse(rng.uniform(), b)).unwrap()
        };
        let w = draw_w(&mut rng);
        let (w1, w2) = (draw_w(&mut rng), draw_w(&mut rng));
        for i in 0..d {
            u[i] = (2.0 * rng.uniform() - 1.0) * r;
            v[i] = (2.0 * rng.uniform() - 1.0) * r;
            diff[i] = u[i] - v[i];
        }
        let q1 = link_prob(model.regime, a * w * w1 * model.kernel.evaluate(&u));
        let q2 = link_prob(model.regime, a * w * w2 * model.kernel.evaluate(&v));
        let q12 = link_prob(model.regime, a * w1 * w2 * model.kernel.evaluate(&diff));
        let tau = model.rho * model.rho / 2.0 * box_vol * box_vol * q1 * q2 * q12;

        // unbiased Lambda^2 via two independent one-point estimates
        let (w3, w4) = (draw_w(&mut rng), draw_w(&mut rng));
        let mut l1 = 0.0;
        let mut l2 = 0.0;
        for i in 0..d {
            u[i] = (2.0 * rng.uniform() - 1.0) * r;
            v[i] = (2.0 * rng.uniform() - 1.0) * r;
        }
        l1 += link_prob(model.regime, a * w * w3 * model.kernel.evaluate(&u));
        l2 += link_prob(model.regime, a * w * w4 * model.kernel.evaluate(&v));
        let lam2 = (model.rho * box_vol).powi(2) * l1 * l2;

        sum_n += tau;
        sum_d += lam2;
        sum_nn += tau * tau;
        sum_dd += lam2 * lam2;
        sum_nd += tau * lam2;
    }
    let m = mc_samples as f64;
    let mean_n = sum_n / m;
    let mean_d = sum_d / m;
    if mean_d <= 0.0 {
        return Err(Error::Numeric("degenerate estimate: E[Lambda^2] <= 0".into()));
    }
    let var_n = (sum_nn / m - mean_n * mean_n).max(0.0);
    let var_d = (sum_dd / m - mean_d * mean_d).max(0.0);
    let cov = sum_nd / m - mean_n * mean_d;
    let ratio = mean_n / mean_d;
    let var_ratio = (var_n - 2.0 * ratio * cov + ratio * ratio * var_d).max(0.0) / (mean_d * mean_d * m);
    Ok((2.0 * ratio, 2.0 * var_ratio.sqrt()))
}

/// kappa2^(lambda) = Int (1 - e^{-(lambda/rho) k(u)}) du; for the indicator
/// kernel this is |S| (1 - e^{-lambda/rho}).
pub fn ht_kappa2_lambda(model: &LimitModel) -> f64 {
    ball_volume(model.dim(), model.kernel.radius) * (1.0 - (-model.lambda / model.rho).exp())
}

/// Tail-inheriting degree intensity rho kappa2^(lambda) w m_{1,theta}(x).
pub fn ht_intensity(model: &LimitModel, w: f64, x: f64) -> Result<f64> {
    if model.regime != Regime::HeavyTail {
        return Err(Error::Unsupported("tail-inheriting intensity asked for a fixed-range regime".into()));
    }
    if !(w >= 0.0) {
        return Err(Error::Domain(format!("w must be >= 0, got {w}")));
    }
    let m1 = model.marginal.conditional_moment(1, model.theta, x)?;
    Ok(model.rho * ht_kappa2_lambda(model) * w * m1)
}

/// Copula density at the weight-rank upper endpoint: the tilt of the
/// conditional weight tail given X = x. For FGM: 1 + theta (2x - 1).
pub fn ht_tail_multiplier(theta: f64, x: f64) -> f64 {
    1.0 + theta * (2.0 * x - 1.0)
}

/// Degree-tail constant E[l_theta(X) (rho kappa2^(lambda) m_{1,theta}(X))^alpha]
/// by Monte Carlo over the position coordinate.
pub fn ht_tail_constant(model: &LimitModel, mc_samples: usize, seed: u64) -> Result<f64> {
    let alpha = match model.marginal {
        WeightMarginal::Pareto { alpha, .. } => alpha,
        _ => {
            return Err(Error::Unsupported("degree-tail constant requires the Pareto weight marginal".into()))
        }
    };
    if mc_samples == 0 {
        return Err(Error::Parameter("need mc_samples >= 1".into()));
    }
    let k2l = ht_kappa2_lambda(model);
    let mut rng = KeyedRng::new(seed, Stream::MonteCarlo, 0x7a11);
    let mut acc = 0.0;
    for _ in 0..mc_samples {
        let x = rng.uniform();
        let m1 = model.marginal.conditional_moment(1, model.theta, x)?;
        acc += ht_tail_multiplier(model.theta, x) * (model.rho * k2l * m1).powf(alpha);
    }
    Ok(acc / mc_samples as f64)
}

/// Mixed-Poisson degree law estimate.
#[derive(Clone, Debug)]
pub struct MixedPoissonPmf {
    /// P(D = k) for k = 0 ..= k_max.
    pub pmf: Vec<f64>,
    /// Mass beyond k_max.
    pub tail_mass: f64,
    pub mean_intensity: f64,
}

/// Average Poisson pmf over an explicit intensity sample.
pub fn mixed_poisson_from_intensities(intensities: &[f64], k_max: usize) -> Result<MixedPoissonPmf> {
    if intensities.is_empty() {
        return Err(Error::Parameter("need at least one intensity draw".into()));
    }
    let mut pmf = vec![0.0; k_max + 1];
    for &lam in intensities {
        let mut term = (-lam).exp();
        for (k, slot) in pmf.iter_mut().enumerate() {
            *slot += term;
            term *= lam / (k as f64 + 1.0);
        }
    }
    let m = intensities.len() as f64;
    for slot in &mut pmf {
        *slot /= m;
    }
    let total: f64 = pmf.iter().sum();
    Ok(MixedPoissonPmf {
        pmf,
        tail_mass: (1.0 - total).max(0.0),
        mean_intensity: intensities.iter().sum::<f64>() / m,
    })
}

/// Mixed-Poisson limit pmf: draw (W, X) from the copula, evaluate the
/// regime's limiting intensity, and average Poisson masses.
pub fn mixed_poisson_pmf(
    model: &LimitModel,
    k_max: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<MixedPoissonPmf> {
    if mc_samples < 10_000 {
        return Err(Error::Parameter(format!("need mc_samples >= 10^4, got {mc_samples}")));
    }
    let theta = model.family.effective_theta();
    let mut intensities = Vec::with_capacity(mc_samples);
    for j in 0..mc_samples {
        let mut rng = KeyedRng::new(seed, Stream::MonteCarlo, j as u64);
        let x = rng.uniform();
        let b = theta * (1.0 - 2.0 * x);
        let w = model.marginal.quantile(fgm_conditional_inverse(rng.uniform(), b))?;
        let lam = match model.regime {
            Regime::FixedRangeExp | Regime::FixedRangeLinear => intensity_fixed(model, w, x, 64)?,
            Regime::HeavyTail => ht_intensity(model, w, x)?,
        };
        intensities.push(lam);
    }
    mixed_poisson_from_intensities(&intensities, k_max)
}
