//! Generalized Pareto distribution for threshold excesses.
//!
//! ```text
//! G(w; xi, sigma) = 1 - (1 + xi w / sigma)^(-1/xi)    xi != 0
//!                 = 1 - exp(-w / sigma)               xi == 0
//! ```
//!
//! with `w >= 0` and, for `xi < 0`, `w <= -sigma / xi`. Moments of order `p`
//! exist iff `xi < 1/p`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::optim::{self, derivatives, fd_step, invert_2x2};
use crate::par;

/// Below this `|xi|` the exponential branch is used.
pub const XI_ZERO: f64 = 1e-8;

/// Shape range searched by the maximum-likelihood fit.
pub const XI_MIN: f64 = -0.99;
pub const XI_MAX: f64 = 10.0;

/// Minimum number of excesses for each fitter.
pub const MIN_EXCESSES_MLE: usize = 5;
pub const MIN_EXCESSES_MOMENTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    pub xi: f64,
    pub sigma: f64,
}

impl GpdParams {
    pub fn new(xi: f64, sigma: f64) -> Result<Self> {
        if !xi.is_finite() {
            return domain(format!("GPD shape must be finite, got {xi}"));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return domain(format!("GPD scale must be positive, got {sigma}"));
        }
        Ok(Self { xi, sigma })
    }

    /// Tail index `1 / xi`, defined for `xi > 0`.
    pub fn alpha(&self) -> Option<f64> {
        (self.xi > 0.0).then(|| 1.0 / self.xi)
    }

    pub fn right_endpoint(&self) -> f64 {
        if self.xi >= 0.0 {
            f64::INFINITY
        } else {
            -self.sigma / self.xi
        }
    }

    fn is_exponential(&self) -> bool {
        self.xi.abs() < XI_ZERO
    }

    fn check_support(&self, w: f64) -> Result<()> {
        if !(w >= 0.0) {
            return domain(format!("GPD argument must be >= 0, got {w}"));
        }
        if w > self.right_endpoint() {
            return domain(format!("GPD argument {w} beyond right endpoint {}", self.right_endpoint()));
        }
        Ok(())
    }

    pub fn cdf(&self, w: f64) -> Result<f64> {
        self.check_support(w)?;
        if w.is_infinite() {
            return Ok(1.0);
        }
        Ok(if self.is_exponential() {
            -(-w / self.sigma).exp_m1()
        } else {
            -(-(self.xi * w / self.sigma).ln_1p() / self.xi).exp_m1()
        })
    }

    pub fn survival(&self, w: f64) -> Result<f64> {
        self.check_support(w)?;
        Ok(if self.is_exponential() {
            (-w / self.sigma).exp()
        } else {
            (-(self.xi * w / self.sigma).ln_1p() / self.xi).exp()
        })
    }

    pub fn pdf(&self, w: f64) -> Result<f64> {
        self.check_support(w)?;
        Ok(self.log_pdf_unchecked(w).exp())
    }

    /// Log-density without support checks; `-inf` off the support.
    pub fn log_pdf_unchecked(&self, w: f64) -> f64 {
        if w < 0.0 {
            return f64::NEG_INFINITY;
        }
        if self.is_exponential() {
            return -self.sigma.ln() - w / self.sigma;
        }
        let t = self.xi * w / self.sigma;
        if t <= -1.0 {
            return f64::NEG_INFINITY;
        }
        -self.sigma.ln() - (1.0 / self.xi + 1.0) * t.ln_1p()
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return domain(format!("GPD quantile level must lie in [0, 1), got {q}"));
        }
        let log_tail = (-q).ln_1p();
        Ok(if self.is_exponential() {
            -self.sigma * log_tail
        } else {
            self.sigma * (-self.xi * log_tail).exp_m1() / self.xi
        })
    }

    /// Whether the moment of the given order is finite: `xi < 1 / order`.
    pub fn moment_exists(&self, order: f64) -> Result<bool> {
        if !(order > 0.0) {
            return domain(format!("moment order must be positive, got {order}"));
        }
        Ok(self.xi < 1.0 / order)
    }

    /// Mean excess over the GPD origin, `sigma / (1 - xi)` when finite.
    pub fn mean(&self) -> Option<f64> {
        (self.xi < 1.0).then(|| self.sigma / (1.0 - self.xi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Mle,
    Moments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpdFit {
    pub params: GpdParams,
    /// Threshold in data units; zero unless set by the caller.
    pub threshold: f64,
    pub n_excesses: usize,
    /// `-inf` for a moment fit whose support excludes some excess.
    pub log_likelihood: f64,
    pub method: FitMethod,
    /// Standard errors of `(xi, sigma)` from the observed information.
    pub std_errors: Option<(f64, f64)>,
    /// Moment fit with `xi >= 1/2`, where the variance it matches does not exist.
    pub unreliable: bool,
}

impl GpdFit {
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }
}

/// `sum log g(w_i; xi, sigma)`; `-inf` when any excess falls off the support.
pub fn log_likelihood(excesses: &[f64], params: GpdParams) -> f64 {
    if params.xi < 0.0 {
        let endpoint = params.right_endpoint();
        if excesses.iter().any(|&w| w >= endpoint) {
            return f64::NEG_INFINITY;
        }
    }
    par::sum_by_blocks(excesses, |&w| params.log_pdf_unchecked(w))
}

fn sorted_excesses(excesses: &[f64], min: usize) -> Result<Vec<f64>> {
    if excesses.len() < min {
        return Err(Error::TooFewExceedances {
            needed: min,
            found: excesses.len(),
        });
    }
    if let Some(bad) = excesses.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return domain(format!("excesses must be positive and finite, found {bad}"));
    }
    let mut sorted = excesses.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

fn mean_and_variance(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn moment_estimates(mean: f64, var: f64) -> (f64, f64) {
    let ratio = mean * mean / var;
    (0.5 * (1.0 - ratio), 0.5 * mean * (ratio + 1.0))
}

/// Method-of-moments fit: `xi = (1 - m^2/s^2) / 2`, `sigma = m (m^2/s^2 + 1) / 2`.
pub fn fit_moments(excesses: &[f64]) -> Result<GpdFit> {
    let sorted = sorted_excesses(excesses, MIN_EXCESSES_MOMENTS)?;
    let (mean, var) = mean_and_variance(&sorted);
    if !(var > 0.0) {
        return Err(Error::DegenerateSample("excesses have zero variance".into()));
    }
    let (xi, sigma) = moment_estimates(mean, var);
    let params = GpdParams::new(xi, sigma)?;
    Ok(GpdFit {
        params,
        threshold: 0.0,
        n_excesses: sorted.len(),
        log_likelihood: log_likelihood(&sorted, params),
        method: FitMethod::Moments,
        std_errors: None,
        unreliable: xi >= 0.5,
    })
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Scale matching the sample median for a given shape.
fn scale_from_median(xi: f64, med: f64) -> f64 {
    if xi.abs() < XI_ZERO {
        med / std::f64::consts::LN_2
    } else {
        xi * med / (xi * std::f64::consts::LN_2).exp_m1()
    }
}

/// Maximum-likelihood fit over `(log sigma, xi)`, `xi` restricted to `(-0.99, 10]`.
///
/// The result does not depend on the order of `excesses`.
pub fn fit_mle(excesses: &[f64]) -> Result<GpdFit> {
    let sorted = sorted_excesses(excesses, MIN_EXCESSES_MLE)?;
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateSample("all excesses are equal".into()));
    }
    let (mean, var) = mean_and_variance(&sorted);
    let (xi_mom, _) = moment_estimates(mean, var);
    let med = median(&sorted);
    let max = sorted[sorted.len() - 1];

    let objective = |p: [f64; 2]| {
        let (log_sigma, xi) = (p[0], p[1]);
        if !(xi > XI_MIN && xi <= XI_MAX) || !log_sigma.is_finite() {
            return f64::NEG_INFINITY;
        }
        let sigma = log_sigma.exp();
        if xi < 0.0 && max >= -sigma / xi {
            return f64::NEG_INFINITY;
        }
        let params = GpdParams { xi, sigma };
        par::sum_by_blocks(&sorted, |&w| params.log_pdf_unchecked(w))
    };

    let shapes = [xi_mom.clamp(-0.45, 5.0), -0.25, 0.25, 0.75, 1.5];
    let starts: Vec<[f64; 2]> = shapes
        .iter()
        .map(|&xi| {
            let mut sigma = scale_from_median(xi, med);
            if xi < 0.0 {
                // keep the largest excess inside the support
                sigma = sigma.max(-xi * max * 1.05);
            }
            [sigma.ln(), xi]
        })
        .collect();

    let best = optim::maximize(&objective, &starts)?;
    let params = GpdParams::new(best.x[1], best.x[0].exp())?;
    let std_errors = if params.xi > -0.5 {
        standard_errors(&sorted, params)
    } else {
        None
    };
    Ok(GpdFit {
        params,
        threshold: 0.0,
        n_excesses: sorted.len(),
        log_likelihood: best.value,
        method: FitMethod::Mle,
        std_errors,
        unreliable: false,
    })
}

/// Square roots of the diagonal of the inverse observed information in `(xi, sigma)`.
pub fn standard_errors(excesses: &[f64], params: GpdParams) -> Option<(f64, f64)> {
    let ll = |p: [f64; 2]| {
        if !(p[1] > 0.0) {
            return f64::NEG_INFINITY;
        }
        log_likelihood(excesses, GpdParams { xi: p[0], sigma: p[1] })
    };
    let x = [params.xi, params.sigma];
    let (_, hess) = derivatives(&ll, x, [fd_step(x[0]), fd_step(x[1])]);
    let info = [[-hess[0][0], -hess[0][1]], [-hess[1][0], -hess[1][1]]];
    let cov = invert_2x2(info)?;
    (cov[0][0] > 0.0 && cov[1][1] > 0.0).then(|| (cov[0][0].sqrt(), cov[1][1].sqrt()))
}

/// Empirical mean excess `(u, mean(x - u | x > u))` for each threshold with at
/// least two exceedances. `sample` must be sorted ascending.
pub fn empirical_mean_excess(sample: &[f64], thresholds: &[f64]) -> Vec<(f64, f64)> {
    let n = sample.len();
    // tail_spread[j] = sum_{i > j} (x_i - x_j); every term is non-negative.
    let mut tail_spread = vec![0.0; n];
    for j in (0..n.saturating_sub(1)).rev() {
        tail_spread[j] = tail_spread[j + 1] + (n - j - 1) as f64 * (sample[j + 1] - sample[j]);
    }
    thresholds
        .iter()
        .filter_map(|&u| {
            let j = sample.partition_point(|&x| x <= u);
            let k = n - j;
            if k < 2 {
                return None;
            }
            let total = tail_spread[j] + k as f64 * (sample[j] - u);
            Some((u, total / k as f64))
        })
        .collect()
}
