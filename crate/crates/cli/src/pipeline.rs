//! From raw observations to a fitted shadow model.

use shadowtail::dual::DualTransform;
use shadowtail::gpd::{self, GpdFit, XI_MAX};
use shadowtail::optim;
use shadowtail::shadow::ShadowModel;
use shadowtail::simulate::{sample_quantile, MIN_EXCEEDANCES};
use shadowtail::{Error, Result};

use crate::input::TailSample;

pub const DEFAULT_THRESHOLD_QUANTILE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    Value(f64),
    /// Type-7 sample quantile.
    Quantile(f64),
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        Self::Quantile(DEFAULT_THRESHOLD_QUANTILE)
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub threshold: f64,
    /// Observations above the threshold, ascending.
    pub exceedances: Vec<f64>,
    pub fit: GpdFit,
    /// `None` when the fitted dual shape is not positive.
    pub model: Option<ShadowModel>,
    pub warnings: Vec<String>,
}

/// Rejects observations outside `[L, H)`, naming their lines.
pub fn check_bounds(sample: &TailSample, lower: f64, upper: f64) -> Result<()> {
    DualTransform::new(lower, upper)?;
    let above: Vec<usize> = sample
        .values
        .iter()
        .zip(&sample.lines)
        .filter(|(v, _)| **v >= upper)
        .map(|(_, l)| *l)
        .collect();
    if !above.is_empty() {
        return Err(Error::BoundViolation { bound: upper, rows: above });
    }
    let below: Vec<usize> = sample
        .values
        .iter()
        .zip(&sample.lines)
        .filter(|(v, _)| **v < lower)
        .map(|(_, l)| *l)
        .collect();
    if !below.is_empty() {
        return Err(Error::Domain(format!(
            "{} observation(s) below the lower bound {lower} on line(s) {below:?}",
            below.len()
        )));
    }
    Ok(())
}

pub fn resolve_threshold(sample: &TailSample, spec: ThresholdSpec) -> Result<f64> {
    match spec {
        ThresholdSpec::Value(u) => Ok(u),
        ThresholdSpec::Quantile(q) => {
            if !(0.0..1.0).contains(&q) {
                return Err(Error::InvalidConfig(format!("threshold quantile must lie in [0, 1), got {q}")));
            }
            let mut sorted = sample.values.clone();
            sorted.sort_by(f64::total_cmp);
            Ok(sample_quantile(&sorted, q))
        }
    }
}

/// Transforms the exceedances of `u`, fits a GPD to the dual excesses and
/// plugs the estimates into the shadow model.
pub fn fit_shadow_model(sample: &TailSample, lower: f64, upper: f64, spec: ThresholdSpec) -> Result<FitOutcome> {
    check_bounds(sample, lower, upper)?;
    let u = resolve_threshold(sample, spec)?;
    if !(u >= lower && u < upper) {
        return Err(Error::Domain(format!("threshold {u} must lie in [{lower}, {upper})")));
    }
    let mut exceedances: Vec<f64> = sample.values.iter().copied().filter(|&y| y > u).collect();
    exceedances.sort_by(f64::total_cmp);
    if exceedances.len() < MIN_EXCEEDANCES {
        return Err(Error::TooFewExceedances {
            needed: MIN_EXCEEDANCES,
            found: exceedances.len(),
        });
    }
    let t = DualTransform::new(lower, upper)?;
    let excesses = exceedances.iter().map(|&y| t.dual_excess(u, y)).collect::<Result<Vec<_>>>()?;
    let fit = gpd::fit_mle(&excesses)?.with_threshold(u);

    let mut warnings = Vec::new();
    let model = match ShadowModel::from_gpd(fit.params, lower, upper, u) {
        Ok(m) => Some(m),
        Err(_) => {
            warnings.push(format!(
                "fitted dual shape xi = {} is not positive: the tail does not behave as a power law, \
                 so no shadow model or risk measures are reported",
                fit.params.xi
            ));
            None
        }
    };
    if fit.std_errors.is_none() {
        warnings.push("standard errors unavailable (observed information not invertible or xi <= -0.5)".into());
    }
    Ok(FitOutcome {
        threshold: u,
        exceedances,
        fit,
        model,
        warnings,
    })
}

/// Maximum of the likelihood built from the shadow density on the raw tail observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YSpaceFit {
    pub alpha: f64,
    pub sigma: f64,
    pub log_likelihood: f64,
}

/// Fits `(alpha, sigma)` directly in data space, without forming dual excesses.
///
/// Starting values come from the raw excesses `y - u`, not from a dual fit.
pub fn fit_y_space(exceedances: &[f64], lower: f64, upper: f64, u: f64) -> Result<YSpaceFit> {
    if exceedances.len() < MIN_EXCEEDANCES {
        return Err(Error::TooFewExceedances {
            needed: MIN_EXCEEDANCES,
            found: exceedances.len(),
        });
    }
    DualTransform::new(lower, upper)?;
    let objective = |p: [f64; 2]| {
        let (log_sigma, xi) = (p[0], p[1]);
        if !(xi > 0.0 && xi <= XI_MAX) || !log_sigma.is_finite() {
            return f64::NEG_INFINITY;
        }
        match ShadowModel::new(1.0 / xi, log_sigma.exp(), lower, upper, u) {
            Ok(m) => m.log_likelihood(exceedances),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let mut raw: Vec<f64> = exceedances.iter().map(|y| y - u).collect();
    raw.sort_by(f64::total_cmp);
    let med = sample_quantile(&raw, 0.5);
    let starts: Vec<[f64; 2]> = [0.25, 0.5, 1.0, 2.0]
        .iter()
        .map(|&xi: &f64| [(xi * med / (xi * std::f64::consts::LN_2).exp_m1()).ln(), xi])
        .collect();
    let best = optim::maximize(&objective, &starts)?;
    Ok(YSpaceFit {
        alpha: 1.0 / best.x[1],
        sigma: best.x[0].exp(),
        log_likelihood: best.value,
    })
}
