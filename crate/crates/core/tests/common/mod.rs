//! Quadrature oracles for the shadow model, written in the log-gap
//! coordinate `t = log((H - u) / (H - y))` so the part of the tail that sits
//! within one ulp of `H` is still integrated.

#![allow(dead_code)]

use shadowtail::numerics::Integrator;
use shadowtail::shadow::ShadowModel;

pub const ALPHAS: [f64; 5] = [0.5, 0.8, 1.0, 1.5, 3.0];
pub const H_OVER_SIGMA: [f64; 3] = [1e2, 1e4, 1e8];

pub fn tight() -> Integrator {
    Integrator {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        ..Integrator::default()
    }
}

/// Density of `t`, written out from scratch: `(H / sigma) (1 + t / x0)^(-alpha - 1)`.
pub fn density_t(m: &ShadowModel, t: f64) -> f64 {
    let x0 = m.alpha * m.sigma / m.upper;
    m.upper / m.sigma * (1.0 + t / x0).powf(-m.alpha - 1.0)
}

/// Survival of `t` by inverting `w = (1 + t/x0)^(-alpha)`; used to map `[0, inf)` onto `(0, 1]`.
fn t_of_w(m: &ShadowModel, w: f64) -> f64 {
    let x0 = m.alpha * m.sigma / m.upper;
    x0 * (w.powf(-1.0 / m.alpha) - 1.0)
}

/// `int_0^inf f_t(t) dt`, plain semi-infinite quadrature.
pub fn total_mass(m: &ShadowModel) -> f64 {
    // Split at a few scales so the t^(-alpha-1) tail is resolved.
    let x0 = m.alpha * m.sigma / m.upper;
    let knots = [0.0, x0, 10.0 * x0, 100.0 * x0, 1.0];
    let mut total = 0.0;
    for w in knots.windows(2) {
        if w[1] > w[0] {
            total += tight().integrate(|t| density_t(m, t), w[0], w[1]).unwrap().value;
        }
    }
    let last = knots[4].max(100.0 * x0);
    total + tight().integrate(|t| density_t(m, t), last, f64::INFINITY).unwrap().value
}

/// `log((H - u) / (H - y))`, from the exactly representable gap `H - y` when `y` is near `H`.
fn log_gap(m: &ShadowModel, y: f64) -> f64 {
    if y >= 0.5 * m.upper {
        ((m.upper - m.threshold) / (m.upper - y)).ln()
    } else {
        -((m.threshold - y) / (m.upper - m.threshold)).ln_1p()
    }
}

/// `E[Y | Y > u]` as `u + (H - u) int_0^1 (1 - e^(-t(w))) dw`.
pub fn mean(m: &ShadowModel) -> f64 {
    let span = m.upper - m.threshold;
    let j = tight()
        .integrate(|w| if w == 0.0 { 1.0 } else { -(-t_of_w(m, w)).exp_m1() }, 0.0, 1.0)
        .unwrap()
        .value;
    m.threshold + span * j
}

/// `E[Y - v | Y > v]` by the same inverse-survival integral restricted to `t > t_v`.
pub fn mean_excess(m: &ShadowModel, v: f64) -> f64 {
    let x0 = m.alpha * m.sigma / m.upper;
    let t_v = log_gap(m, v);
    let w_v = (1.0 + t_v / x0).powf(-m.alpha);
    let j = tight()
        .integrate(
            |w| if w == 0.0 { 1.0 } else { -(-(t_of_w(m, w) - t_v)).exp_m1() },
            0.0,
            w_v,
        )
        .unwrap()
        .value;
    (m.upper - v) * j / w_v
}

/// `P(Y <= y | Y > u)` as `int_0^{t_y} f_t`.
pub fn cdf(m: &ShadowModel, y: f64) -> f64 {
    let t_y = log_gap(m, y);
    tight().integrate(|t| density_t(m, t), 0.0, t_y).unwrap().value
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
