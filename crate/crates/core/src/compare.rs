//! Baselines that cut a Pareto tail at `H` non-smoothly: hard truncation
//! (renormalize on `[L, H]`) and an absorbing barrier (all mass beyond `H`
//! sits at `H`), plus the ratio `r` of the truncated mean to the shadow mean.
//!
//! The underlying density is `f(x) = (1/sigma) (1 + (x - L)/(alpha sigma))^(-alpha-1)`
//! on `[L, inf)`. Moments are computed by quadrature in
//! `tau = log(1 + (x - L)/(alpha sigma))`, where `f(x) dx = alpha e^(-alpha tau) dtau`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::{generalized_exponential_integral, Integrator};
use crate::shadow::ShadowModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoSpec {
    pub alpha: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ParetoSpec {
    /// `upper == lower` is accepted and describes a point mass at `lower`.
    pub fn new(alpha: f64, sigma: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return domain(format!("alpha must be positive, got {alpha}"));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return domain(format!("sigma must be positive, got {sigma}"));
        }
        if !lower.is_finite() || !upper.is_finite() || !(upper >= lower) {
            return domain(format!("need finite L <= H, got [{lower}, {upper}]"));
        }
        Ok(Self {
            alpha,
            sigma,
            lower,
            upper,
        })
    }

    fn scale(&self) -> f64 {
        self.alpha * self.sigma
    }

    /// Untruncated survival `1 - F(x)` for `x >= L`.
    pub fn survival(&self, x: f64) -> f64 {
        let w = (x - self.lower).max(0.0);
        (-self.alpha * (w / self.scale()).ln_1p()).exp()
    }

    /// Untruncated density.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x >= self.lower) {
            return domain(format!("x = {x} below L = {}", self.lower));
        }
        let w = x - self.lower;
        Ok((-(self.alpha + 1.0) * (w / self.scale()).ln_1p()).exp() / self.sigma)
    }

    /// Probability mass of `[L, H]`: `1 - (alpha sigma)^alpha (alpha sigma + H - L)^(-alpha)`.
    pub fn mass_below_upper(&self) -> f64 {
        let t = ((self.upper - self.lower) / self.scale()).ln_1p();
        -(-self.alpha * t).exp_m1()
    }

    pub fn truncated_pdf(&self, x: f64) -> Result<f64> {
        if !(x >= self.lower && x <= self.upper) {
            return domain(format!("x = {x} outside [{}, {}]", self.lower, self.upper));
        }
        if self.upper == self.lower {
            return domain("truncated density of a point mass is undefined");
        }
        Ok(self.pdf(x)? / self.mass_below_upper())
    }

    /// `int_L^H x^p f(x) dx`, unnormalized.
    fn partial_moment(&self, p: f64) -> Result<f64> {
        let (a, lo, s) = (self.alpha, self.lower, self.scale());
        let top = ((self.upper - lo) / s).ln_1p();
        let integrand = |tau: f64| a * (lo + s * tau.exp_m1()).powf(p) * (-a * tau).exp();
        let integrator = Integrator {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            ..Integrator::default()
        };
        Ok(integrator.integrate(integrand, 0.0, top)?.value)
    }

    /// Moment of order `p >= 1` of the Pareto renormalized on `[L, H]`.
    pub fn truncated_moment(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return domain(format!("moment order must be >= 1, got {p}"));
        }
        if self.upper == self.lower {
            return Ok(self.lower.powf(p));
        }
        Ok(self.partial_moment(p)? / self.mass_below_upper())
    }

    /// Mean when every realization above `H` is recorded as `H`.
    pub fn absorbing_barrier_mean(&self) -> Result<f64> {
        if self.upper == self.lower {
            return Ok(self.lower);
        }
        Ok(self.partial_moment(1.0)? + self.upper * self.survival(self.upper))
    }
}

/// `r`: hard-truncated mean over shadow mean for the same `(alpha, sigma, L, H)`.
///
/// Below 1 when `alpha < 1`: the cliff at `H` keeps more mass near the top
/// than the smooth transform does.
pub fn soft_to_truncated_ratio(alpha: f64, sigma: f64, lower: f64, upper: f64, threshold: f64) -> Result<f64> {
    Ok(compare_at(alpha, sigma, lower, upper, threshold)?.ratio)
}

/// Closed form of `r` for `sigma = 1`, `L = u = 0`, `alpha != 1`.
///
/// Only a cross-check for [`soft_to_truncated_ratio`]; it loses accuracy
/// once `(1 + H/alpha)^alpha` swamps `H + 1`.
pub fn ratio_closed_form(alpha: f64, upper: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha == 1.0 || !(upper > 0.0) {
        return domain(format!("closed-form ratio needs alpha > 0, alpha != 1, H > 0; got {alpha}, {upper}"));
    }
    let (a, h) = (alpha, upper);
    let x = a / h;
    let num = (-x).exp() * x.powf(a) * (h + 1.0 - ((a + h) / a).powf(a));
    let den = (a - 1.0) * (x.powf(a) - ((a + h) / h).powf(a)) * generalized_exponential_integral(a, x)?;
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub upper: f64,
    pub truncated_mean: f64,
    pub absorbing_mean: f64,
    pub shadow_mean: f64,
    pub ratio: f64,
}

/// All three means and their ratio at one upper bound.
pub fn compare_at(alpha: f64, sigma: f64, lower: f64, upper: f64, threshold: f64) -> Result<Comparison> {
    let spec = ParetoSpec::new(alpha, sigma, lower, upper)?;
    let truncated_mean = spec.truncated_moment(1.0)?;
    let shadow_mean = ShadowModel::new(alpha, sigma, lower, upper, threshold)?.mean()?;
    Ok(Comparison {
        upper,
        truncated_mean,
        absorbing_mean: spec.absorbing_barrier_mean()?,
        shadow_mean,
        ratio: truncated_mean / shadow_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Truncated mean in closed form, `alpha != 1`.
    fn truncated_mean_closed(s: &ParetoSpec) -> f64 {
        let (a, c, k) = (s.alpha, s.upper - s.lower, s.alpha * s.sigma);
        let surv_c = (1.0 + c / k).powf(-a);
        let int_surv = k / (1.0 - a) * ((1.0 + c / k).powf(1.0 - a) - 1.0);
        s.lower + (int_surv - c * surv_c) / (1.0 - surv_c)
    }

    #[test]
    fn truncated_mean_matches_closed_form() {
        for &(a, sigma, l, h) in &[(0.7, 1.0, 0.0, 100.0), (2.0, 1.5, 3.0, 1e4), (0.3, 2.0, 1.0, 1e6)] {
            let s = ParetoSpec::new(a, sigma, l, h).unwrap();
            let q = s.truncated_moment(1.0).unwrap();
            let c = truncated_mean_closed(&s);
            assert!((q - c).abs() <= 1e-10 * c, "{a} {h}: {q} vs {c}");
        }
    }

    #[test]
    fn truncated_density_at_lower_bound_exceeds_untruncated() {
        let s = ParetoSpec::new(0.7, 1.0, 0.0, 100.0).unwrap();
        let g = s.truncated_pdf(0.0).unwrap();
        assert!(g > 1.0);
        assert!((g - 1.0 / s.mass_below_upper()).abs() < 1e-14);
        assert!(s.truncated_pdf(100.5).is_err());
    }

    #[test]
    fn point_mass_limits() {
        let s = ParetoSpec::new(0.7, 1.0, 4.0, 4.0).unwrap();
        assert_eq!(s.absorbing_barrier_mean().unwrap(), 4.0);
        assert_eq!(s.truncated_moment(1.0).unwrap(), 4.0);
        let near = ParetoSpec::new(0.7, 1.0, 4.0, 4.0 + 1e-9).unwrap();
        assert!((near.truncated_moment(1.0).unwrap() - 4.0).abs() < 1e-8);
    }

    #[test]
    fn moment_order_precondition() {
        let s = ParetoSpec::new(0.7, 1.0, 0.0, 100.0).unwrap();
        assert!(s.truncated_moment(0.5).is_err());
        assert!(ParetoSpec::new(0.7, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn compare_row_is_consistent() {
        let c = compare_at(0.7, 1.0, 0.0, 100.0, 0.0).unwrap();
        assert!((c.ratio - c.truncated_mean / c.shadow_mean).abs() < 1e-15);
        assert!(c.absorbing_mean >= c.truncated_mean);
        assert!(c.ratio < 1.0);
    }

    #[test]
    fn ratio_agrees_with_closed_form() {
        for &(a, h) in &[(0.3, 1e4), (0.7, 100.0), (2.0, 100.0), (1.5, 1e3)] {
            let q = soft_to_truncated_ratio(a, 1.0, 0.0, h, 0.0).unwrap();
            let c = ratio_closed_form(a, h).unwrap();
            assert!((q - c).abs() <= 1e-9 * c, "{a} {h}: {q} vs {c}");
        }
        assert!(ratio_closed_form(1.0, 10.0).is_err());
    }
}
