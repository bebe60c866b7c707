//! Copula-coupled node marks.
//!
//! Each node carries a popularity weight `W` and a torus position `X`.
//! The weight marginal and the position marginals are fixed; a copula with
//! parameter `theta` controls how popularity aligns with the first position
//! coordinate. Positions are marginally uniform for every `theta`.

use crate::error::{Error, Result};
use crate::rng::{KeyedRng, Stream};
use serde::{Deserialize, Serialize};

/// Copula family coupling the weight rank to the first position coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CopulaKind {
    Product,
    Fgm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopulaFamily {
    pub kind: CopulaKind,
    /// Dependence parameter in [0, 1]; ignored for `Product`.
    pub theta: f64,
    /// Position dimension d >= 1. For d >= 2 the FGM coupling acts between
    /// the weight rank and the first coordinate only; remaining coordinates
    /// are independent uniforms.
    pub dim: usize,
}

impl CopulaFamily {
    pub fn product(dim: usize) -> Self {
        CopulaFamily { kind: CopulaKind::Product, theta: 0.0, dim }
    }

    pub fn fgm(theta: f64, dim: usize) -> Self {
        CopulaFamily { kind: CopulaKind::Fgm, theta, dim }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Parameter("copula dimension must be >= 1".into()));
        }
        if let CopulaKind::Fgm = self.kind {
            if !(0.0..=1.0).contains(&self.theta) || !self.theta.is_finite() {
                return Err(Error::Parameter(format!(
                    "FGM theta must lie in [0, 1], got {}",
                    self.theta
                )));
            }
        }
        Ok(())
    }

    /// Effective dependence parameter: 0 for the product family.
    pub fn effective_theta(&self) -> f64 {
        match self.kind {
            CopulaKind::Product => 0.0,
            CopulaKind::Fgm => self.theta,
        }
    }
}

/// Marginal law of the popularity weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightMarginal {
    /// W = U, uniform on (0, 1).
    UnitUniform,
    /// Pareto with tail index `alpha` > 1 and scale `x_min` > 0.
    Pareto { alpha: f64, x_min: f64 },
}

impl WeightMarginal {
    pub fn pareto(alpha: f64) -> Self {
        WeightMarginal::Pareto { alpha, x_min: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if let WeightMarginal::Pareto { alpha, x_min } = self {
            if !(*alpha > 1.0) {
                return Err(Error::Parameter(format!("Pareto alpha must be > 1, got {alpha}")));
            }
            if !(*x_min > 0.0) {
                return Err(Error::Parameter(format!("Pareto x_min must be > 0, got {x_min}")));
            }
        }
        Ok(())
    }

    /// Quantile function F_W^{-1}(u), strictly increasing on (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile argument must lie in (0, 1), got {u}")));
        }
        Ok(match self {
            WeightMarginal::UnitUniform => u,
            WeightMarginal::Pareto { alpha, x_min } => x_min * (1.0 - u).powf(-1.0 / alpha),
        })
    }

    /// E[W^p]; errors when the moment is infinite.
    pub fn moment(&self, p: u32) -> Result<f64> {
        match self {
            WeightMarginal::UnitUniform => Ok(1.0 / (p as f64 + 1.0)),
            WeightMarginal::Pareto { alpha, x_min } => {
                let p = p as f64;
                if p >= *alpha {
                    return Err(Error::Unsupported(format!(
                        "Pareto moment p={p} infinite for alpha={alpha}"
                    )));
                }
                Ok(x_min.powf(p) * alpha / (alpha - p))
            }
        }
    }

    /// Conditional moment m_{p,theta}(x) = E[W^p | X_1 = x] under the FGM
    /// coupling with this marginal. Analytic for both built-in marginals.
    pub fn conditional_moment(&self, p: u32, theta: f64, x: f64) -> Result<f64> {
        let g = 1.0 - 2.0 * x;
        match self {
            WeightMarginal::UnitUniform => {
                let pf = p as f64;
                Ok(1.0 / (pf + 1.0) - theta * g * pf / ((pf + 1.0) * (pf + 2.0)))
            }
            WeightMarginal::Pareto { alpha, x_min } => {
                let pf = p as f64;
                if pf >= *alpha {
                    return Err(Error::Unsupported(format!(
                        "Pareto conditional moment p={p} infinite for alpha={alpha}"
                    )));
                }
                // E[W^p] + theta g(x) * x_min^p * Int_0^1 (1-u)^{-p/a} (1-2u) du
                let mean = self.moment(p)?;
                let q = pf / alpha;
                let j = x_min.powf(pf) * (2.0 / (2.0 - q) - 1.0 / (1.0 - q));
                Ok(mean + theta * g * j)
            }
        }
    }
}

/// Conditional moment m_{p,theta}(x) for the unit-uniform marginal,
/// m_{p,theta}(x) = 1/(p+1) - theta (1-2x) p / ((p+1)(p+2)).
pub fn conditional_moment(p: u32, theta: f64, x: f64) -> Result<f64> {
    if !(1..=3).contains(&p) {
        return Err(Error::Unsupported(format!("conditional_moment supports p in 1..=3, got {p}")));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Parameter(format!("theta must lie in [0, 1], got {theta}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0, 1], got {x}")));
    }
    WeightMarginal::UnitUniform.conditional_moment(p, theta, x)
}

/// Sampled node marks together with the configuration that produced them.
#[derive(Clone, Debug)]
pub struct MarkSet {
    pub n: usize,
    pub d: usize,
    pub weights: Vec<f64>,
    /// Flat row-major positions: node i occupies `positions[i*d .. (i+1)*d]`.
    pub positions: Vec<f64>,
    pub family: CopulaFamily,
    pub marginal: WeightMarginal,
    pub seed: u64,
}

impl MarkSet {
    #[inline]
    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.d..(i + 1) * self.d]
    }
}

/// Invert the FGM conditional CDF F(u | x) = u + b u(1-u), b = theta (1-2x),
/// by its closed-form quadratic root in [0, 1].
#[inline]
pub fn fgm_conditional_inverse(v: f64, b: f64) -> f64 {
    if b == 0.0 {
        return v;
    }
    // b u^2 - (1+b) u + v = 0; the root inside [0, 1].
    let s = 1.0 + b;
    let disc = s * s - 4.0 * b * v;
    let u = (s - disc.sqrt()) / (2.0 * b);
    u.clamp(f64::EPSILON, 1.0 - f64::EPSILON)
}

/// Sample `n` copula-coupled marks. Pure function of its arguments; mark `i`
/// depends only on `(seed, i)`, so regeneration is bit-identical and
/// per-node parallel generation would produce the same output.
pub fn sample_marks(
    n: usize,
    family: CopulaFamily,
    marginal: WeightMarginal,
    seed: u64,
) -> Result<MarkSet> {
    sample_marks_with_cap(n, family, marginal, seed, None)
}

/// As [`sample_marks`], with an optional truncation cap W <= tau applied
/// after the quantile transform.
pub fn sample_marks_with_cap(
    n: usize,
    family: CopulaFamily,
    marginal: WeightMarginal,
    seed: u64,
    cap: Option<f64>,
) -> Result<MarkSet> {
    if n == 0 {
        return Err(Error::Parameter("need n >= 1 marks".into()));
    }
    family.validate()?;
    marginal.validate()?;
    if let Some(tau) = cap {
        if !(tau > 0.0) {
            return Err(Error::Parameter(format!("weight cap must be > 0, got {tau}")));
        }
    }
    let d = family.dim;
    let theta = family.effective_theta();
    let mut weights = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n * d);
    for i in 0..n {
        let mut rng = KeyedRng::new(seed, Stream::Marks, i as u64);
        let x_first = rng.uniform();
        positions.push(x_first);
        for _ in 1..d {
            positions.push(rng.uniform());
        }
        let v = rng.uniform();
        let u = fgm_conditional_inverse(v, theta * (1.0 - 2.0 * x_first));
        let mut w = marginal.quantile(u)?;
        if let Some(tau) = cap {
            w = w.min(tau);
        }
        weights.push(w);
    }
    Ok(MarkSet { n, d, weights, positions, family, marginal, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoid quadrature oracle, independent of the analytic formulas.
    fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
        let h = (hi - lo) / steps as f64;
        let mut acc = 0.5 * (f(lo) + f(hi));
        for i in 1..steps {
            acc += f(lo + i as f64 * h);
        }
        acc * h
    }

    fn spearman(a: &[f64], b: &[f64]) -> f64 {
        let rank = |v: &[f64]| {
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap());
            let mut r = vec![0.0; v.len()];
            for (pos, &i) in idx.iter().enumerate() {
                r[i] = pos as f64;
            }
            r
        };
        let ra = rank(a);
        let rb = rank(b);
        let n = a.len() as f64;
        let ma = (n - 1.0) / 2.0;
        let mut cov = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for i in 0..a.len() {
            cov += (ra[i] - ma) * (rb[i] - ma);
            va += (ra[i] - ma) * (ra[i] - ma);
            vb += (rb[i] - ma) * (rb[i] - ma);
        }
        cov / (va.sqrt() * vb.sqrt())
    }

    #[test]
    fn determinism_and_shape() {
        let fam = CopulaFamily::product(2);
        let a = sample_marks(4, fam, WeightMarginal::UnitUniform, 7).unwrap();
        let b = sample_marks(4, fam, WeightMarginal::UnitUniform, 7).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.positions, b.positions);
        assert_eq!(a.weights.len(), 4);
        assert_eq!(a.positions.len(), 8);
    }

    #[test]
    fn fgm_theta_zero_matches_product() {
        let a = sample_marks(500, CopulaFamily::fgm(0.0, 2), WeightMarginal::UnitUniform, 11).unwrap();
        let b = sample_marks(500, CopulaFamily::product(2), WeightMarginal::UnitUniform, 11).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.positions, b.positions);
    }

    #[test]
    fn n_zero_and_bad_theta_rejected() {
        assert!(sample_marks(0, CopulaFamily::product(1), WeightMarginal::UnitUniform, 1).is_err());
        assert!(sample_marks(4, CopulaFamily::fgm(1.5, 1), WeightMarginal::UnitUniform, 1).is_err());
        assert!(sample_marks(4, CopulaFamily::fgm(-0.1, 1), WeightMarginal::UnitUniform, 1).is_err());
    }

    #[test]
    fn spearman_matches_fgm_theory() {
        // FGM Spearman rho is theta/3; numerical double-integration oracle:
        // rho_S = 12 Int C(u,v) du dv - 3 with C(u,v) = uv + theta uv(1-u)(1-v).
        let theta = 1.0;
        let m = 400;
        let mut acc = 0.0;
        for i in 0..m {
            let u = (i as f64 + 0.5) / m as f64;
            for j in 0..m {
                let v = (j as f64 + 0.5) / m as f64;
                acc += u * v + theta * u * v * (1.0 - u) * (1.0 - v);
            }
        }
        let oracle = 12.0 * acc / (m * m) as f64 - 3.0;
        assert!((oracle - theta / 3.0).abs() < 1e-3, "oracle {oracle}");

        let marks =
            sample_marks(200_000, CopulaFamily::fgm(theta, 1), WeightMarginal::UnitUniform, 3).unwrap();
        let xs: Vec<f64> = (0..marks.n).map(|i| marks.position(i)[0]).collect();
        let rho = spearman(&marks.weights, &xs);
        assert!((rho - theta / 3.0).abs() < 0.01, "spearman {rho}");
    }

    #[test]
    fn dependence_monotone_in_theta() {
        let mut prev = f64::NEG_INFINITY;
        for &theta in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let marks =
                sample_marks(100_000, CopulaFamily::fgm(theta, 1), WeightMarginal::UnitUniform, 9)
                    .unwrap();
            let xs: Vec<f64> = (0..marks.n).map(|i| marks.position(i)[0]).collect();
            let rho = spearman(&marks.weights, &xs);
            assert!(rho >= prev, "spearman not nondecreasing at theta={theta}: {rho} < {prev}");
            prev = rho;
        }
    }

    #[test]
    fn marginals_stay_uniform() {
        // KS statistic of X_1 and of U = F_W(W) against Uniform(0,1).
        let n = 100_000;
        let marks = sample_marks(n, CopulaFamily::fgm(1.0, 1), WeightMarginal::UnitUniform, 13).unwrap();
        let ks = |mut v: Vec<f64>| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let m = v.len() as f64;
            v.iter()
                .enumerate()
                .map(|(i, &x)| {
                    let lo = (x - i as f64 / m).abs();
                    let hi = (x - (i + 1) as f64 / m).abs();
                    lo.max(hi)
                })
                .fold(0.0f64, f64::max)
        };
        let bound = 1.5 / (n as f64).sqrt();
        let xs: Vec<f64> = (0..n).map(|i| marks.position(i)[0]).collect();
        assert!(ks(xs) <= bound);
        // UnitUniform: W itself is the rank.
        assert!(ks(marks.weights.clone()) <= bound);
    }

    #[test]
    fn conditional_moment_closed_form() {
        assert!((conditional_moment(1, 0.0, 0.3).unwrap() - 0.5).abs() < 1e-15);
        assert!((conditional_moment(1, 1.0, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((conditional_moment(2, 1.0, 0.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(conditional_moment(4, 0.5, 0.5).is_err());
    }

    #[test]
    fn conditional_moment_matches_quadrature() {
        let cases = [
            (1, 0.3, 0.1),
            (2, 0.3, 0.9),
            (3, 0.7, 0.25),
            (1, 1.0, 0.5),
            (2, 0.05, 0.0),
            (3, 1.0, 1.0),
            (1, 0.6, 0.8),
            (2, 0.9, 0.4),
            (3, 0.2, 0.6),
            (1, 0.45, 0.33),
        ];
        for (p, theta, x) in cases {
            let g = 1.0 - 2.0 * x;
            let oracle = integrate(
                |w| w.powi(p as i32) * (1.0 + theta * (1.0 - 2.0 * w) * g),
                0.0,
                1.0,
                1 << 16,
            );
            let got = conditional_moment(p, theta, x).unwrap();
            assert!((got - oracle).abs() < 1e-8, "p={p} theta={theta} x={x}: {got} vs {oracle}");
        }
    }

    #[test]
    fn pareto_conditional_moment_matches_quadrature() {
        let marg = WeightMarginal::pareto(2.5);
        let alpha = 2.5;
        let theta = 0.8;
        let x = 0.2;
        let g = 1.0 - 2.0 * x;
        // substitute 1 - u = z^5 to flatten the endpoint singularity:
        // integrand becomes 5 z^4 (z^5)^{-1/alpha} (1 + theta g (2 z^5 - 1))
        let oracle = integrate(
            |z| {
                5.0 * z.powi(4)
                    * z.powf(-5.0 / alpha)
                    * (1.0 + theta * g * (2.0 * z.powi(5) - 1.0))
            },
            1e-12,
            1.0,
            1 << 16,
        );
        let got = marg.conditional_moment(1, theta, x).unwrap();
        assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
    }

    #[test]
    fn quantiles() {
        let p = WeightMarginal::Pareto { alpha: 2.0, x_min: 1.0 };
        assert!((p.quantile(0.75).unwrap() - 2.0).abs() < 1e-12);
        assert!((WeightMarginal::UnitUniform.quantile(0.42).unwrap() - 0.42).abs() < 1e-15);
        let p25 = WeightMarginal::pareto(2.5);
        assert!((p25.quantile(1e-12).unwrap() - 1.0).abs() < 1e-9);
        assert!(p25.quantile(0.0).is_err());
        assert!(p25.quantile(1.0).is_err());
    }

    #[test]
    fn quantile_strictly_increasing() {
        for marg in [WeightMarginal::UnitUniform, WeightMarginal::pareto(1.7)] {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..200 {
                let u = i as f64 / 200.0;
                let q = marg.quantile(u).unwrap();
                assert!(q > prev);
                prev = q;
            }
        }
    }

    #[test]
    fn weight_cap_applies() {
        let marks = sample_marks_with_cap(
            5_000,
            CopulaFamily::product(1),
            WeightMarginal::pareto(1.5),
            21,
            Some(3.0),
        )
        .unwrap();
        assert!(marks.weights.iter().all(|&w| w <= 3.0));
    }
}
