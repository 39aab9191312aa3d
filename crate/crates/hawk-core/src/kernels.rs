//! Probability distributions backing delay and reset kernels.
//!
//! Kernel parameters are expressions evaluated at the sampling instant,
//! which is how state-dependent kernels enter the model: the distribution
//! family is fixed, its parameters read the current valuation.

use std::fmt;

use crate::expr::{Expr, Valuation};
use crate::rng::RngStream;
use crate::stats::{erf, norm_quantile};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Distribution {
    /// Point mass at an expression value. `Dirac(var)` is the identity
    /// reset that keeps a variable unchanged.
    Dirac(Expr),
    /// Uniform on `[lo, hi]`.
    Uniform(Expr, Expr),
    /// Normal with mean and variance parameters.
    Normal(Expr, Expr),
    /// |N(0, variance)|: nonnegative, used for stochastic delays.
    FoldedNormal(Expr),
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum KernelError {
    #[error("uniform bounds inverted at sampling state: lo = {lo}, hi = {hi}")]
    UniformBounds { lo: f64, hi: f64 },
    #[error("variance must be positive at sampling state, got {variance}")]
    NonPositiveVariance { variance: f64 },
}

impl Distribution {
    /// Draws one value. Dirac consumes no randomness, every other variant
    /// consumes exactly one uniform, so replay alignment is independent of
    /// which Dirac kernels a model spells out explicitly.
    pub fn sample(&self, v: &Valuation, rng: &mut RngStream) -> Result<f64, KernelError> {
        match self {
            Distribution::Dirac(p) => Ok(p.eval(v)),
            Distribution::Uniform(lo, hi) => {
                let (lo, hi) = (lo.eval(v), hi.eval(v));
                if lo > hi {
                    return Err(KernelError::UniformBounds { lo, hi });
                }
                Ok(lo + rng.unit() * (hi - lo))
            }
            Distribution::Normal(mean, var) => {
                let (mean, var) = (mean.eval(v), var.eval(v));
                if var <= 0.0 {
                    return Err(KernelError::NonPositiveVariance { variance: var });
                }
                Ok(mean + var.sqrt() * norm_quantile(rng.unit_open()))
            }
            Distribution::FoldedNormal(var) => {
                let var = var.eval(v);
                if var <= 0.0 {
                    return Err(KernelError::NonPositiveVariance { variance: var });
                }
                Ok((var.sqrt() * norm_quantile(rng.unit_open())).abs())
            }
        }
    }

    /// Support membership of `x` under the parameters at `v`.
    pub fn support_contains(&self, x: f64, v: &Valuation, tol: f64) -> bool {
        match self {
            Distribution::Dirac(p) => (x - p.eval(v)).abs() <= tol,
            Distribution::Uniform(lo, hi) => {
                x >= lo.eval(v) - tol && x <= hi.eval(v) + tol
            }
            Distribution::Normal(_, _) => true,
            Distribution::FoldedNormal(_) => x >= -tol,
        }
    }

    /// Cumulative distribution function at `x`; test oracle.
    pub fn cdf(&self, x: f64, v: &Valuation) -> Result<f64, KernelError> {
        match self {
            Distribution::Dirac(p) => Ok(if x >= p.eval(v) { 1.0 } else { 0.0 }),
            Distribution::Uniform(lo, hi) => {
                let (lo, hi) = (lo.eval(v), hi.eval(v));
                if lo > hi {
                    return Err(KernelError::UniformBounds { lo, hi });
                }
                if x < lo {
                    Ok(0.0)
                } else if x >= hi {
                    Ok(1.0)
                } else {
                    Ok((x - lo) / (hi - lo))
                }
            }
            Distribution::Normal(mean, var) => {
                let (mean, var) = (mean.eval(v), var.eval(v));
                if var <= 0.0 {
                    return Err(KernelError::NonPositiveVariance { variance: var });
                }
                Ok(0.5 * crate::stats::erfc(-(x - mean) / (var.sqrt() * std::f64::consts::SQRT_2)))
            }
            Distribution::FoldedNormal(var) => {
                let var = var.eval(v);
                if var <= 0.0 {
                    return Err(KernelError::NonPositiveVariance { variance: var });
                }
                if x < 0.0 {
                    Ok(0.0)
                } else {
                    Ok(erf(x / (var.sqrt() * std::f64::consts::SQRT_2)))
                }
            }
        }
    }

    /// True when the support is certainly nonnegative for all states
    /// (required of delay kernels). Conservative: expression-valued
    /// parameters that cannot be bounded statically return false unless
    /// the family guarantees nonnegativity.
    pub fn nonnegative_support(&self) -> bool {
        match self {
            Distribution::FoldedNormal(_) => true,
            Distribution::Normal(_, _) => false,
            Distribution::Dirac(p) => {
                p.as_constant().map(|c| c >= crate::num::q_int(0)).unwrap_or(false)
            }
            Distribution::Uniform(lo, _) => {
                lo.as_constant().map(|c| c >= crate::num::q_int(0)).unwrap_or(false)
            }
        }
    }

    /// The identity reset `Dirac(var)`.
    pub fn identity_reset(var: &str) -> Distribution {
        Distribution::Dirac(Expr::var(var))
    }

    pub fn is_identity_reset(&self, var: &str) -> bool {
        matches!(self, Distribution::Dirac(e) if *e == Expr::var(var))
    }

    pub fn rename_vars(&self, map: &std::collections::BTreeMap<String, String>) -> Distribution {
        match self {
            Distribution::Dirac(p) => Distribution::Dirac(p.rename_vars(map)),
            Distribution::Uniform(a, b) => {
                Distribution::Uniform(a.rename_vars(map), b.rename_vars(map))
            }
            Distribution::Normal(a, b) => {
                Distribution::Normal(a.rename_vars(map), b.rename_vars(map))
            }
            Distribution::FoldedNormal(a) => Distribution::FoldedNormal(a.rename_vars(map)),
        }
    }

    pub fn param_vars(&self) -> std::collections::BTreeSet<String> {
        match self {
            Distribution::Dirac(p) | Distribution::FoldedNormal(p) => p.vars(),
            Distribution::Uniform(a, b) | Distribution::Normal(a, b) => {
                let mut s = a.vars();
                s.extend(b.vars());
                s
            }
        }
    }

    pub fn params_affine(&self) -> bool {
        match self {
            Distribution::Dirac(p) | Distribution::FoldedNormal(p) => p.is_affine(),
            Distribution::Uniform(a, b) | Distribution::Normal(a, b) => {
                a.is_affine() && b.is_affine()
            }
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Dirac(p) => write!(f, "dirac({p})"),
            Distribution::Uniform(a, b) => write!(f, "uniform({a}, {b})"),
            Distribution::Normal(a, b) => write!(f, "normal({a}, {b})"),
            Distribution::FoldedNormal(a) => write!(f, "foldednormal({a})"),
        }
    }
}

/// Convenience constructors over rational constants.
pub fn dirac_q(x: crate::num::Q) -> Distribution {
    Distribution::Dirac(Expr::constant(x))
}

pub fn uniform_q(lo: crate::num::Q, hi: crate::num::Q) -> Distribution {
    Distribution::Uniform(Expr::constant(lo), Expr::constant(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{parse_q, q_int, Q};
    use std::collections::BTreeMap;

    fn empty() -> Valuation {
        BTreeMap::new()
    }

    fn dist_u(lo: i64, hi: i64) -> Distribution {
        uniform_q(q_int(lo), q_int(hi))
    }

    #[test]
    fn dirac_is_point_mass() {
        let d = dirac_q(q_int(5));
        let mut rng = RngStream::new(0, 0);
        assert_eq!(d.sample(&empty(), &mut rng).unwrap(), 5.0);
        assert!(d.support_contains(5.0, &empty(), 0.0));
        assert!(!d.support_contains(5.1, &empty(), 1e-9));
        assert_eq!(d.cdf(2.9, &empty()).unwrap(), 0.0);
        assert_eq!(d.cdf(3.0, &empty()).unwrap(), 0.0);
        assert_eq!(d.cdf(5.0, &empty()).unwrap(), 1.0);
    }

    #[test]
    fn uniform_affine_transform_of_unit_draw() {
        // find a stream position whose unit draw we know, then check the
        // affine mapping directly against it
        let mut rng = RngStream::new(9, 3);
        let u = {
            let mut probe = RngStream::new(9, 3);
            probe.unit()
        };
        let d = dist_u(10, 20);
        let x = d.sample(&empty(), &mut rng).unwrap();
        assert!((x - (10.0 + 10.0 * u)).abs() < 1e-12);
        assert!(d.support_contains(x, &empty(), 0.0));
        assert!(!d.support_contains(25.0, &empty(), 1e-9));
        assert_eq!(d.cdf(15.0, &empty()).unwrap(), 0.5);
    }

    #[test]
    fn uniform_rejects_inverted_bounds() {
        let d = uniform_q(q_int(3), q_int(1));
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(
            d.sample(&empty(), &mut rng),
            Err(KernelError::UniformBounds { .. })
        ));
    }

    #[test]
    fn folded_normal_nonnegative_and_mean() {
        let d = Distribution::FoldedNormal(Expr::int(1));
        let mut rng = RngStream::new(7, 0);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = d.sample(&empty(), &mut rng).unwrap();
            assert!(x >= 0.0);
            sum += x;
        }
        // E|N(0,1)| = sqrt(2/pi), cross-checked by quadrature below
        let mean = sum / n as f64;
        let oracle = folded_mean_by_quadrature();
        assert!((oracle - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-10);
        assert!((mean - oracle).abs() < 0.01, "sample mean {mean} vs {oracle}");
    }

    /// Midpoint-rule integration of |x| * phi(x) over [-12, 12].
    fn folded_mean_by_quadrature() -> f64 {
        let n = 2_000_000usize;
        let (a, b) = (-12.0f64, 12.0f64);
        let h = (b - a) / n as f64;
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        (0..n)
            .map(|i| {
                let x = a + (i as f64 + 0.5) * h;
                x.abs() * phi(x) * h
            })
            .sum()
    }

    #[test]
    fn folded_normal_cdf_known_point() {
        // P(|N(0,1)| <= 1) = 2*Phi(1) - 1 =~ 0.6827
        let d = Distribution::FoldedNormal(Expr::int(1));
        let got = d.cdf(1.0, &empty()).unwrap();
        assert!((got - 0.6826894921370859).abs() < 1e-12);
        assert!(!d.support_contains(-0.1, &empty(), 1e-9));
    }

    #[test]
    fn normal_cdf_and_sampling_consistency() {
        let d = Distribution::Normal(Expr::int(2), Expr::constant(Q::new(9, 1)));
        // cdf at mean is 1/2
        assert!((d.cdf(2.0, &empty()).unwrap() - 0.5).abs() < 1e-14);
        // one-sigma band
        assert!((d.cdf(5.0, &empty()).unwrap() - 0.8413447460685429).abs() < 1e-12);
        let mut rng = RngStream::new(3, 1);
        let n = 50_000;
        let mean: f64 = (0..n)
            .map(|_| d.sample(&empty(), &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 2.0).abs() < 0.05);
    }

    #[test]
    fn state_dependent_parameters() {
        let d = Distribution::Uniform(Expr::var("a"), Expr::var("b"));
        let mut v = empty();
        v.insert("a".into(), 1.0);
        v.insert("b".into(), 2.0);
        let mut rng = RngStream::new(11, 0);
        for _ in 0..100 {
            let x = d.sample(&v, &mut rng).unwrap();
            assert!((1.0..2.0).contains(&x));
        }
        v.insert("b".into(), 0.0);
        assert!(d.sample(&v, &mut rng).is_err());
    }

    #[test]
    fn empirical_cdf_close_to_cdf() {
        // Kolmogorov-Smirnov sanity bound on U(0,1)
        let d = dist_u(0, 1);
        let mut rng = RngStream::new(5, 0);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| d.sample(&empty(), &mut rng).unwrap())
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut sup = 0.0f64;
        for (i, x) in xs.iter().enumerate() {
            let ecdf_hi = (i + 1) as f64 / n as f64;
            let ecdf_lo = i as f64 / n as f64;
            let c = d.cdf(*x, &empty()).unwrap();
            sup = sup.max((ecdf_hi - c).abs()).max((ecdf_lo - c).abs());
        }
        assert!(sup < 0.01, "KS statistic {sup}");
    }

    #[test]
    fn support_closed_under_sampling() {
        // property: every draw lands in the support, all variants
        let variants = vec![
            dirac_q(parse_q("2.5").unwrap()),
            dist_u(10, 20),
            Distribution::Normal(Expr::int(0), Expr::int(4)),
            Distribution::FoldedNormal(Expr::int(2)),
        ];
        let mut rng = RngStream::new(13, 2);
        for d in &variants {
            for _ in 0..10_000 {
                let x = d.sample(&empty(), &mut rng).unwrap();
                assert!(d.support_contains(x, &empty(), 1e-12), "{d} produced {x}");
            }
        }
    }
}
