//! The JSON risk report and its number formatting.
//!
//! Field order is the declaration order below. Every float is written with
//! 17 significant digits (`{:.16e}`), which round-trips any `f64`;
//! non-finite values become `null`.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use shadowtail::gpd::{FitMethod, GpdFit};
use shadowtail::shadow::{h_sensitivity, ShadowModel};
use shadowtail::simulate::BootstrapCI;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskReport {
    pub schema_version: u32,
    pub status: Status,
    pub warnings: Vec<String>,
    pub data: DataSummary,
    pub fit: FitSummary,
    pub model: Option<ShadowModel>,
    pub measures: Option<Measures>,
    pub naive: Naive,
    pub bootstrap: Option<BootstrapCI>,
    pub sensitivity: Option<Vec<SensitivityPoint>>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSummary {
    pub source: String,
    pub n_total: usize,
    pub n_exceedances: usize,
    pub sample_min: f64,
    pub sample_max: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub threshold: f64,
    /// Set when the threshold was given as a sample quantile.
    pub threshold_quantile: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSummary {
    pub method: FitMethod,
    pub xi: f64,
    pub sigma: f64,
    pub xi_std_error: Option<f64>,
    pub sigma_std_error: Option<f64>,
    pub log_likelihood: f64,
    pub n_excesses: usize,
}

impl From<&GpdFit> for FitSummary {
    fn from(f: &GpdFit) -> Self {
        Self {
            method: f.method,
            xi: f.params.xi,
            sigma: f.params.sigma,
            xi_std_error: f.std_errors.map(|s| s.0),
            sigma_std_error: f.std_errors.map(|s| s.1),
            log_likelihood: f.log_likelihood,
            n_excesses: f.n_excesses,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelValue {
    pub level: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measures {
    pub shadow_mean: f64,
    pub var: Vec<LevelValue>,
    pub es: Vec<LevelValue>,
    /// Whether the fitted dual GPD has a finite mean.
    pub dual_mean_finite: bool,
}

impl Measures {
    pub fn evaluate(model: &ShadowModel, var_levels: &[f64], es_levels: &[f64]) -> shadowtail::Result<Self> {
        let r = model.risk_measures(var_levels, es_levels)?;
        let pairs = |v: Vec<(f64, f64)>| v.into_iter().map(|(level, value)| LevelValue { level, value }).collect();
        Ok(Self {
            shadow_mean: r.shadow_mean,
            var: pairs(r.var_levels),
            es: pairs(r.es_levels),
            dual_mean_finite: r.dual_mean_finite,
        })
    }
}

/// What the data say when the bound is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Naive {
    pub sample_mean_above_u: f64,
    pub naive_gpd_fit_on_y: FitSummary,
    /// Whether the GPD fitted to raw excesses has a finite mean.
    pub dual_mean_finite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityPoint {
    pub upper_bound: f64,
    pub shadow_mean: f64,
}

pub fn sensitivity(model: &ShadowModel, h_grid: &[f64]) -> shadowtail::Result<Vec<SensitivityPoint>> {
    Ok(h_sensitivity(model.alpha, model.sigma, model.lower, model.threshold, h_grid)?
        .into_iter()
        .map(|(upper_bound, shadow_mean)| SensitivityPoint {
            upper_bound,
            shadow_mean,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub input_sha256: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl Provenance {
    pub fn new(input_sha256: String, seed: Option<u64>) -> Self {
        Self {
            input_sha256,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
        }
    }
}

/// UTC time in RFC 3339, taken from `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> String {
    timestamp_from(std::env::var("SOURCE_DATE_EPOCH").ok().as_deref())
}

fn timestamp_from(epoch: Option<&str>) -> String {
    let epoch = epoch.and_then(|s| s.trim().parse::<i64>().ok());
    let t = match epoch.and_then(|s| chrono::DateTime::from_timestamp(s, 0)) {
        Some(t) => t,
        None => chrono::Utc::now(),
    };
    t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

/// Pretty printer that writes floats through [`fmt_f64`].
struct FixedDigits(PrettyFormatter<'static>);

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` as pretty JSON with fixed-precision floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types always serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}
