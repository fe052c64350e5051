//! Seeded samplers and Monte Carlo checks.
//!
//! Every random draw comes from a ChaCha8 stream keyed by `(seed, purpose)`
//! and positioned by a block or replicate index, so results do not depend
//! on how work is spread over threads.

use std::collections::BTreeMap;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dual::DualTransform;
use crate::error::{Error, Result};
use crate::gpd::{self, GpdFit, GpdParams};
use crate::par;
use crate::shadow::ShadowModel;

/// Stream purposes; part of the key so different uses of one seed never share draws.
const PURPOSE_GPD: u64 = 1;
const PURPOSE_SHADOW: u64 = 2;
const PURPOSE_BOOTSTRAP_FIT: u64 = 3;
const PURPOSE_BOOTSTRAP_STATS: u64 = 4;

/// Draws per generator stream.
const DRAW_BLOCK: usize = par::BLOCK;

/// Fewest exceedances the experiment and the bootstrap accept.
pub const MIN_EXCEEDANCES: usize = 30;
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub n: usize,
    /// Observation ceiling `M`; draws above it are dropped.
    pub censor_at: Option<f64>,
}

impl SimConfig {
    pub fn new(seed: u64, n: usize) -> Self {
        Self {
            seed,
            n,
            censor_at: None,
        }
    }

    pub fn censored(mut self, m: f64) -> Self {
        self.censor_at = Some(m);
        self
    }

    fn validate(&self, bounds: Option<(f64, f64)>) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("sample size must be at least 1".into()));
        }
        if let (Some(m), Some((l, h))) = (self.censor_at, bounds) {
            if !(m > l && m < h) {
                return Err(Error::InvalidConfig(format!("censoring point {m} must lie in ({l}, {h})")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// Replicates that produced a value.
    pub replicates: usize,
}

/// Generator for one block or replicate.
pub fn stream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// `n` values `f(U)`, `U` uniform on (0, 1), generated block-wise.
fn uniform_map<F>(seed: u64, purpose: u64, n: usize, f: F) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(DRAW_BLOCK);
    let parts = par::map_indexed(blocks, |b| {
        let len = DRAW_BLOCK.min(n - b * DRAW_BLOCK);
        let mut rng = stream(seed, purpose, b as u64);
        (0..len).map(|_| f(rng.sample::<f64, _>(Open01))).collect::<Vec<_>>()
    });
    parts.concat()
}

/// Inverse-transform GPD draws.
pub fn sample_gpd(params: GpdParams, cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.validate(None)?;
    let params = GpdParams::new(params.xi, params.sigma)?;
    Ok(uniform_map(cfg.seed, PURPOSE_GPD, cfg.n, |q| {
        params.quantile(q).expect("level in (0, 1)")
    }))
}

/// Draws of `Y = phi^-1(phi(u) + W)`, `W` GPD with shape `1/alpha`.
///
/// The composition is taken through the log-gap `W / H`, which keeps the
/// draws accurate near both `u` and `H`. With `censor_at` set, draws above
/// it are dropped, so fewer than `n` values may come back.
pub fn sample_shadow_y(model: &ShadowModel, cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.validate(Some((model.lower, model.upper)))?;
    let dual = model.dual_gpd();
    let h = model.upper;
    let draws = uniform_map(cfg.seed, PURPOSE_SHADOW, cfg.n, |q| {
        let w = dual.quantile(q).expect("level in (0, 1)");
        model.y_at_log_gap(w / h)
    });
    Ok(match cfg.censor_at {
        Some(m) => draws.into_iter().filter(|&y| y <= m).collect(),
        None => draws,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApparentTail {
    /// Fit to raw excesses `y - u`, ignoring the bound.
    pub naive: GpdFit,
    /// Fit to dual excesses `phi(y) - phi(u)`.
    pub dual: GpdFit,
    /// Draws left after censoring.
    pub kept: usize,
}

impl ApparentTail {
    /// `|xi_naive - xi_dual|` in units of the combined standard error.
    pub fn shape_gap_in_se(&self) -> Option<f64> {
        let (a, b) = (self.naive.std_errors?, self.dual.std_errors?);
        Some((self.naive.params.xi - self.dual.params.xi).abs() / a.0.hypot(b.0))
    }
}

/// Censors a shadow sample at `M` and fits the tail with and without the transform.
pub fn apparent_tail_experiment(model: &ShadowModel, cfg: &SimConfig) -> Result<ApparentTail> {
    let Some(m) = cfg.censor_at else {
        return Err(Error::InvalidConfig("the apparent-tail experiment needs a censoring point".into()));
    };
    if !(m <= model.upper / 10.0) {
        return Err(Error::InvalidConfig(format!(
            "censoring point {m} must be at most H/10 = {}",
            model.upper / 10.0
        )));
    }
    if !(m > model.threshold) {
        return Err(Error::InvalidConfig(format!("censoring point {m} must exceed the threshold {}", model.threshold)));
    }
    let ys = sample_shadow_y(model, cfg)?;
    let u = model.threshold;
    let tail: Vec<f64> = ys.iter().copied().filter(|&y| y > u).collect();
    if tail.len() < MIN_EXCEEDANCES {
        return Err(Error::TooFewExceedances {
            needed: MIN_EXCEEDANCES,
            found: tail.len(),
        });
    }
    let t = model.transform();
    let raw: Vec<f64> = tail.iter().map(|y| y - u).collect();
    let dual = tail.iter().map(|&y| t.dual_excess(u, y)).collect::<Result<Vec<_>>>()?;
    Ok(ApparentTail {
        naive: gpd::fit_mle(&raw)?.with_threshold(u),
        dual: gpd::fit_mle(&dual)?.with_threshold(u),
        kept: ys.len(),
    })
}

/// Shadow mean implied by an MLE fit on the dual excesses of `tail` (all `> u`).
fn fitted_shadow_mean(t: &DualTransform, u: f64, tail: &[f64]) -> Result<f64> {
    let w = tail.iter().map(|&y| t.dual_excess(u, y)).collect::<Result<Vec<_>>>()?;
    let fit = gpd::fit_mle(&w)?;
    ShadowModel::from_gpd(fit.params, t.lower(), t.upper(), u)?.mean()
}

/// Type-7 quantile of ascending `sorted` data.
pub fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn percentile_ci(point: f64, mut values: Vec<f64>, level: f64) -> BootstrapCI {
    values.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    let lower = sample_quantile(&values, tail).min(point);
    let upper = sample_quantile(&values, 1.0 - tail).max(point);
    BootstrapCI {
        point,
        lower,
        upper,
        level,
        replicates: values.len(),
    }
}

/// Percentile bootstrap for the plug-in shadow mean.
///
/// Exceedances of `u` are resampled with the threshold held fixed; each
/// replicate refits the dual tail. Replicates whose refit fails (including
/// a non-positive shape) are dropped; more than 10% dropped is an error.
/// The interval is widened if needed so it contains the point estimate.
pub fn bootstrap_shadow_mean(
    sample: &[f64],
    lower: f64,
    upper: f64,
    u: f64,
    level: f64,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapCI> {
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidConfig(format!("need at least {MIN_REPLICATES} replicates, got {replicates}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let t = DualTransform::new(lower, upper)?;
    let mut tail: Vec<f64> = sample.iter().copied().filter(|&y| y > u).collect();
    if tail.len() < MIN_EXCEEDANCES {
        return Err(Error::TooFewExceedances {
            needed: MIN_EXCEEDANCES,
            found: tail.len(),
        });
    }
    tail.sort_by(f64::total_cmp);
    let point = fitted_shadow_mean(&t, u, &tail)?;

    let k = tail.len();
    let outcomes = par::map_indexed(replicates, |r| {
        let mut rng = stream(seed, PURPOSE_BOOTSTRAP_FIT, r as u64);
        let resample: Vec<f64> = (0..k).map(|_| tail[rng.random_range(0..k)]).collect();
        fitted_shadow_mean(&t, u, &resample).ok()
    });
    let values: Vec<f64> = outcomes.into_iter().flatten().collect();
    let dropped = replicates - values.len();
    if dropped * 10 > replicates {
        return Err(Error::BootstrapFailure { dropped, replicates });
    }
    Ok(percentile_ci(point, values, level))
}

/// Which sample summaries [`bootstrap_summaries`] estimates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummarySpec {
    /// Raw moments `E[X^k]`.
    pub moments: Vec<u32>,
    /// Type-7 quantile levels.
    pub quantiles: Vec<f64>,
    /// Mean excess `E[X - v | X > v]` at fixed `v`.
    pub mean_excess_at: Vec<f64>,
    /// Mean of the values beyond the sample `p`-quantile.
    pub shortfall_levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summaries {
    pub moments: Vec<Estimate>,
    pub quantiles: Vec<Estimate>,
    pub mean_excess: Vec<Estimate>,
    pub shortfall: Vec<Estimate>,
}

/// Summaries of the sample in ascending `sorted`, each value counted `weight(i)` times.
fn weighted_summaries<W: Fn(usize) -> u32>(sorted: &[f64], weight: W, spec: &SummarySpec) -> Vec<f64> {
    let n = sorted.len();
    let nf = n as f64;
    let mut out = Vec::new();

    let blocks = n.div_ceil(par::BLOCK);
    for &k in &spec.moments {
        let mut total = 0.0;
        for b in 0..blocks {
            let range = b * par::BLOCK..((b + 1) * par::BLOCK).min(n);
            total += range.map(|i| weight(i) as f64 * sorted[i].powi(k as i32)).sum::<f64>();
        }
        out.push(total / nf);
    }

    // Order statistic of rank r (0-based) in the weighted sample.
    let ranks: Vec<usize> = spec
        .quantiles
        .iter()
        .chain(&spec.shortfall_levels)
        .flat_map(|&p| {
            let lo = ((n - 1) as f64 * p).floor() as usize;
            [lo, (lo + 1).min(n - 1)]
        })
        .collect();
    let mut order = vec![0.0; ranks.len()];
    let mut by_rank: Vec<usize> = (0..ranks.len()).collect();
    by_rank.sort_by_key(|&j| ranks[j]);
    let mut cum = 0usize;
    let mut next = 0;
    for (i, &x) in sorted.iter().enumerate() {
        cum += weight(i) as usize;
        while next < by_rank.len() && ranks[by_rank[next]] < cum {
            order[by_rank[next]] = x;
            next += 1;
        }
        if next == by_rank.len() {
            break;
        }
    }
    let quantile_at = |j: usize, p: f64| {
        let h = (n - 1) as f64 * p;
        order[2 * j] + (h - h.floor()) * (order[2 * j + 1] - order[2 * j])
    };

    // E[X - v | X > v] for a cut at v, as (sum of excesses, count).
    let excess_beyond = |v: f64| {
        let start = sorted.partition_point(|&x| x <= v);
        let (mut sum, mut count) = (0.0, 0u64);
        for (i, &x) in sorted.iter().enumerate().skip(start) {
            let w = weight(i);
            sum += w as f64 * (x - v);
            count += w as u64;
        }
        (sum, count)
    };

    for (j, &p) in spec.quantiles.iter().enumerate() {
        out.push(quantile_at(j, p));
    }
    for &v in &spec.mean_excess_at {
        let (sum, count) = excess_beyond(v);
        out.push(sum / count as f64);
    }
    let offset = spec.quantiles.len();
    for (j, &p) in spec.shortfall_levels.iter().enumerate() {
        let var = quantile_at(offset + j, p);
        let (sum, count) = excess_beyond(var);
        out.push(var + sum / count as f64);
    }
    out
}

/// Point estimates and bootstrap standard errors of several summaries of one sample.
///
/// Each replicate is a vector of multinomial counts over the sorted sample,
/// so no resampled copy of the data is ever built.
pub fn bootstrap_summaries(sample: &[f64], spec: &SummarySpec, replicates: usize, seed: u64) -> Result<Summaries> {
    if sample.len() < 2 {
        return Err(Error::DegenerateSample("need at least two observations".into()));
    }
    if replicates < 2 {
        return Err(Error::InvalidConfig("need at least two bootstrap replicates".into()));
    }
    if let Some(p) = spec.quantiles.iter().chain(&spec.shortfall_levels).find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::InvalidConfig(format!("level {p} outside (0, 1)")));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let point = weighted_summaries(&sorted, |_| 1, spec);

    let reps = par::map_indexed_with(
        replicates,
        || vec![0u8; n],
        |counts, r| {
            let mut rng = stream(seed, PURPOSE_BOOTSTRAP_STATS, r as u64);
            // One byte per observation keeps the scatter cache-friendly; the
            // rare count past 255 spills into a map.
            counts.fill(0);
            let mut spill: BTreeMap<usize, u32> = BTreeMap::new();
            for _ in 0..n {
                let i = rng.random_range(0..n);
                match counts[i].checked_add(1) {
                    Some(c) => counts[i] = c,
                    None => *spill.entry(i).or_default() += 1,
                }
            }
            let weight = |i: usize| match counts[i] {
                u8::MAX => u8::MAX as u32 + spill.get(&i).copied().unwrap_or(0),
                c => c as u32,
            };
            weighted_summaries(&sorted, weight, spec)
        },
    );

    let b = replicates as f64;
    let estimates: Vec<Estimate> = (0..point.len())
        .map(|j| {
            let mean = reps.iter().map(|r| r[j]).sum::<f64>() / b;
            let var = reps.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (b - 1.0);
            Estimate {
                value: point[j],
                std_error: var.sqrt(),
            }
        })
        .collect();

    let mut it = estimates.into_iter();
    let mut take = |k: usize| it.by_ref().take(k).collect::<Vec<_>>();
    Ok(Summaries {
        moments: take(spec.moments.len()),
        quantiles: take(spec.quantiles.len()),
        mean_excess: take(spec.mean_excess_at.len()),
        shortfall: take(spec.shortfall_levels.len()),
    })
}
