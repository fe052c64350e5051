//! Generalized exponential integral `E_nu(x) = int_1^inf e^(-x t) t^(-nu) dt`.

use super::gamma::{gamma, upper_incomplete_gamma};
use crate::error::{domain, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn continued_fraction(nu: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + nu;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let an = -(i as f64) * (nu - 1.0 + i as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h * (-x).exp()
}

fn integer_order_series(n: i64, x: f64) -> f64 {
    if n <= 0 {
        // E_{-m}(x) = m! e^-x / x^(m+1) * sum_{k<=m} x^k / k!
        let m = (-n) as u32;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut factorial = 1.0;
        for k in 1..=m {
            term *= x / k as f64;
            sum += term;
            factorial *= k as f64;
        }
        return factorial * (-x).exp() / x.powi(m as i32 + 1) * sum;
    }
    let nm1 = n - 1;
    let mut ans = if nm1 != 0 { 1.0 / nm1 as f64 } else { -x.ln() - EULER_GAMMA };
    let mut fact = 1.0;
    for i in 1..10_000i64 {
        fact *= -x / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * f64::EPSILON * 0.5 {
            break;
        }
    }
    ans
}

fn fractional_order_series(nu: f64, x: f64) -> f64 {
    // E_nu(x) = Gamma(1-nu) x^(nu-1) - sum_k (-x)^k / (k! (1 - nu + k))
    let mut term = 1.0;
    let mut sum = 1.0 / (1.0 - nu);
    for k in 1..10_000 {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / (1.0 - nu + kf);
        sum += contrib;
        if contrib.abs() <= sum.abs() * f64::EPSILON * 0.5 {
            break;
        }
    }
    gamma(1.0 - nu) * x.powf(nu - 1.0) - sum
}

/// `E_nu(x)` for real `nu` and `x > 0`.
pub fn generalized_exponential_integral(nu: f64, x: f64) -> Result<f64> {
    if nu.is_nan() || !(x > 0.0) {
        return domain(format!("exponential integral needs x > 0, got E_{nu}({x})"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(continued_fraction(nu, x));
    }
    let nearest = nu.round();
    if nu == nearest && nearest.abs() < 1e9 {
        return Ok(integer_order_series(nearest as i64, x));
    }
    // The series cancels like 1 / |nu - nearest|; close to an integer go through Gamma(1 - nu, x).
    if (nu - nearest).abs() >= 0.25 {
        return Ok(fractional_order_series(nu, x));
    }
    Ok(x.powf(nu - 1.0) * upper_incomplete_gamma(1.0 - nu, x)?)
}
