//! Risk measures of the bounded variable `Y` implied by a GPD tail on its dual.
//!
//! Above the threshold `u`, the dual excess `phi(Y) - phi(u)` is GPD with
//! shape `1/alpha` and scale `sigma`. Pushing that law back through
//! `phi^-1` gives, with `x0 = alpha sigma / H` and
//! `l(y) = log((H - u) / (H - y))`:
//!
//! ```text
//! f(y)      = H / (sigma (H - y)) * (1 + l(y) / x0)^(-alpha - 1)
//! F(y)      = 1 - (1 + l(y) / x0)^(-alpha)
//! Q(p)      = H - (H - u) exp(-x0 ((1 - p)^(-1/alpha) - 1))
//! E[Y|Y>u]  = (H - u) e^x0 x0^alpha Gamma(1 - alpha, x0) + u
//! e(v)      = (H - v) e^x1 x1^alpha Gamma(1 - alpha, x1),  x1 = x0 + l(v)
//! ```
//!
//! The mean exists for every `alpha > 0`, including `alpha <= 1` where the
//! dual mean is infinite. `e(v)` is the same mean formula restarted at `v`
//! with the threshold-stable scale `sigma + (phi(v) - phi(u)) / alpha`.

use serde::{Deserialize, Serialize};

use crate::dual::DualTransform;
use crate::error::{domain, Result};
use crate::gpd::GpdParams;
use crate::numerics::{scaled_upper_gamma, Integrator};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowModel {
    pub alpha: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
    /// Tail threshold in data units.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskMeasures {
    pub shadow_mean: f64,
    pub var_levels: Vec<(f64, f64)>,
    pub es_levels: Vec<(f64, f64)>,
    /// Whether the dual GPD itself has a finite mean (`alpha > 1`).
    pub dual_mean_finite: bool,
}

impl ShadowModel {
    pub fn new(alpha: f64, sigma: f64, lower: f64, upper: f64, threshold: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return domain(format!("tail index must be positive and finite, got {alpha}"));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return domain(format!("scale must be positive and finite, got {sigma}"));
        }
        DualTransform::new(lower, upper)?;
        if !(threshold >= lower && threshold < upper) {
            return domain(format!("threshold {threshold} must lie in [{lower}, {upper})"));
        }
        Ok(Self {
            alpha,
            sigma,
            lower,
            upper,
            threshold,
        })
    }

    /// Builds the model from a fitted dual tail; requires `xi > 0`.
    pub fn from_gpd(params: GpdParams, lower: f64, upper: f64, threshold: f64) -> Result<Self> {
        match params.alpha() {
            Some(alpha) => Self::new(alpha, params.sigma, lower, upper, threshold),
            None => domain(format!("shadow model needs a heavy dual tail (xi > 0), got xi = {}", params.xi)),
        }
    }

    pub fn xi(&self) -> f64 {
        1.0 / self.alpha
    }

    pub fn transform(&self) -> DualTransform {
        DualTransform::new(self.lower, self.upper).expect("validated at construction")
    }

    /// The dual-excess law `phi(Y) - phi(u) | Y > u`.
    pub fn dual_gpd(&self) -> GpdParams {
        GpdParams {
            xi: 1.0 / self.alpha,
            sigma: self.sigma,
        }
    }

    /// `alpha sigma / H`.
    pub fn x0(&self) -> f64 {
        self.alpha * self.sigma / self.upper
    }

    fn check_tail(&self, y: f64) -> Result<()> {
        if !(y >= self.threshold && y < self.upper) {
            return domain(format!("y = {y} outside the tail [{}, {})", self.threshold, self.upper));
        }
        Ok(())
    }

    /// `log((H - u) / (H - y))` for `y` in the tail.
    fn log_gap_ratio(&self, y: f64) -> f64 {
        let (u, h) = (self.threshold, self.upper);
        if y - u < h - y {
            -((u - y) / (h - u)).ln_1p()
        } else {
            // H - y is exact here; the ln_1p form would round its argument to -1 next to H.
            ((h - u) / (h - y)).ln()
        }
    }

    /// Density at `y = H - gap`, for `0 < gap <= H - u`. Lets callers reach
    /// the part of the tail that lies within one ulp of `H`.
    pub fn pdf_at_gap(&self, gap: f64) -> Result<f64> {
        let span = self.upper - self.threshold;
        if !(gap > 0.0 && gap <= span) {
            return domain(format!("gap {gap} outside (0, {span}]"));
        }
        let l = (span / gap).ln();
        let log_core = -(self.alpha + 1.0) * (l / self.x0()).ln_1p();
        Ok(self.upper / (self.sigma * gap) * log_core.exp())
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        self.check_tail(y)?;
        let l = self.log_gap_ratio(y);
        let log_core = -(self.alpha + 1.0) * (l / self.x0()).ln_1p();
        Ok(self.upper / (self.sigma * (self.upper - y)) * log_core.exp())
    }

    /// `P(Y > y | Y > u)`.
    pub fn survival(&self, y: f64) -> Result<f64> {
        self.check_tail(y)?;
        let l = self.log_gap_ratio(y);
        Ok((-self.alpha * (l / self.x0()).ln_1p()).exp())
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        self.check_tail(y)?;
        let l = self.log_gap_ratio(y);
        Ok(-(-self.alpha * (l / self.x0()).ln_1p()).exp_m1())
    }

    /// CDF at log-gap `t = log((H - u) / (H - y))`, `t >= 0`.
    ///
    /// Together with [`Self::quantile_log_gap`] this reaches levels whose
    /// quantile lies closer to `H` than any `f64` does.
    pub fn cdf_at_log_gap(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return domain(format!("log-gap must be non-negative, got {t}"));
        }
        Ok(-(-self.alpha * (t / self.x0()).ln_1p()).exp_m1())
    }

    /// `log((H - u) / (H - Q(p)))`.
    pub fn quantile_log_gap(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return domain(format!("quantile level must lie in [0, 1), got {p}"));
        }
        Ok(self.x0() * (-(-p).ln_1p() / self.alpha).exp_m1())
    }

    /// Tail quantile; the result is clamped to the last representable value below `H`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return domain(format!("quantile level must lie in [0, 1), got {p}"));
        }
        Ok(self.y_at_log_gap(self.quantile_log_gap(p)?))
    }

    /// `y = H - (H - u) e^(-t)`, clamped to `[u, next_down(H)]`.
    pub fn y_at_log_gap(&self, t: f64) -> f64 {
        let (u, span) = (self.threshold, self.upper - self.threshold);
        // Measure from whichever end is closer to avoid cancellation.
        let y = if t < std::f64::consts::LN_2 {
            u - span * (-t).exp_m1()
        } else {
            self.upper - span * (-t).exp()
        };
        y.clamp(u, self.upper.next_down())
    }

    /// Conditional mean `E[Y | Y > u]`.
    pub fn mean(&self) -> Result<f64> {
        let span = self.upper - self.threshold;
        Ok(span * scaled_upper_gamma(1.0 - self.alpha, self.x0())? + self.threshold)
    }

    /// Mean excess `E[Y - v | Y > v]` for `v` in the tail.
    pub fn mean_excess(&self, v: f64) -> Result<f64> {
        self.check_tail(v)?;
        let x1 = self.x0() + self.log_gap_ratio(v);
        Ok((self.upper - v) * scaled_upper_gamma(1.0 - self.alpha, x1)?)
    }

    /// `ES_p = VaR_p + e(VaR_p)`.
    pub fn expected_shortfall(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("expected shortfall level must lie in (0, 1), got {p}"));
        }
        // Work from the log-gap of VaR rather than from VaR itself, which may be clamped below H.
        let t = self.quantile_log_gap(p)?;
        let var = self.y_at_log_gap(t);
        let gap = (self.upper - self.threshold) * (-t).exp();
        let remaining = 1.0 - scaled_upper_gamma(1.0 - self.alpha, self.x0() + t)?;
        let es = self.upper - gap * remaining;
        Ok(es.clamp(var, self.upper.next_down()))
    }

    /// `E[Y^order | Y > u]` by quadrature.
    ///
    /// Integrates in `tau = log(1 + (phi(y) - phi(u)) / (alpha sigma))`, where
    /// the density becomes `alpha e^(-alpha tau)` and the integrand is smooth.
    pub fn moment(&self, order: u32) -> Result<f64> {
        if order == 0 {
            return domain("moment order must be at least 1");
        }
        let (u, h, a, x0) = (self.threshold, self.upper, self.alpha, self.x0());
        let y_of = |tau: f64| h - (h - u) * (-x0 * tau.exp_m1()).exp();
        let integrand = |tau: f64| a * y_of(tau).powi(order as i32) * (-a * tau).exp();
        let integrator = Integrator {
            abs_tol: 0.0,
            ..Integrator::default()
        };
        Ok(integrator.integrate(integrand, 0.0, f64::INFINITY)?.value)
    }

    /// `sum log f(y_i)` over tail observations; `-inf` if any lies outside `[u, H)`.
    pub fn log_likelihood(&self, ys: &[f64]) -> f64 {
        let (h, u, x0) = (self.upper, self.threshold, self.x0());
        let log_scale = (h / self.sigma).ln();
        if ys.iter().any(|&y| !(y >= u && y < h)) {
            return f64::NEG_INFINITY;
        }
        par::sum_by_blocks(ys, |&y| {
            let l = -((u - y) / (h - u)).ln_1p();
            log_scale - (h - y).ln() - (self.alpha + 1.0) * (l / x0).ln_1p()
        })
    }

    pub fn risk_measures(&self, var_levels: &[f64], es_levels: &[f64]) -> Result<RiskMeasures> {
        let var_levels = var_levels
            .iter()
            .map(|&p| {
                if !(p > 0.0 && p < 1.0) {
                    return domain(format!("VaR level must lie in (0, 1), got {p}"));
                }
                Ok((p, self.quantile(p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let es_levels = es_levels
            .iter()
            .map(|&p| Ok((p, self.expected_shortfall(p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RiskMeasures {
            shadow_mean: self.mean()?,
            var_levels,
            es_levels,
            dual_mean_finite: self.dual_gpd().moment_exists(1.0)?,
        })
    }
}

/// Shadow mean as a function of the upper bound, one entry per grid point.
pub fn h_sensitivity(alpha: f64, sigma: f64, lower: f64, threshold: f64, h_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(bad) = h_grid.iter().find(|&&h| !(h > threshold)) {
        return domain(format!("every upper bound must exceed the threshold {threshold}, got {bad}"));
    }
    par::map_slice(h_grid, |&h| {
        let m = ShadowModel::new(alpha, sigma, lower, h, threshold)?;
        Ok((h, m.mean()?))
    })
    .into_iter()
    .collect()
}
