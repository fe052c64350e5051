//! The log transform between a variable bounded on `[L, H]` and its
//! unbounded dual on `[L, inf)`:
//!
//! ```text
//! z = phi(y)     = L - H log((H - y) / (H - L))
//! y = phi^-1(z)  = (L - H) exp((L - z) / H) + H
//! ```
//!
//! `phi` is smooth and fixes `L`, and `phi(y) ~ y` while `y << H`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualTransform {
    lower: f64,
    upper: f64,
}

impl DualTransform {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return domain(format!("bounds must be finite, got [{lower}, {upper}]"));
        }
        if !(lower < upper) {
            return domain(format!("lower bound {lower} must be below upper bound {upper}"));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Largest representable value strictly below `H`.
    pub fn sup_below(&self) -> f64 {
        self.upper.next_down()
    }

    pub fn phi(&self, y: f64) -> Result<f64> {
        let (l, h) = (self.lower, self.upper);
        if !(y >= l) {
            return domain(format!("phi: y = {y} below lower bound {l}"));
        }
        if !(y < h) {
            return domain(format!("phi: y = {y} not below upper bound {h}"));
        }
        // log((H - y) / (H - L)) = log1p((L - y) / (H - L)), exact at y = L.
        Ok(l - h * ((l - y) / (h - l)).ln_1p())
    }

    /// Never returns `H` itself: values past the last representable point
    /// below `H` are reported as [`DualTransform::sup_below`].
    pub fn phi_inverse(&self, z: f64) -> Result<f64> {
        let (l, h) = (self.lower, self.upper);
        if !(z >= l) {
            return domain(format!("phi_inverse: z = {z} below lower bound {l}"));
        }
        let y = l - (h - l) * ((l - z) / h).exp_m1();
        Ok(y.clamp(l, self.sup_below()))
    }

    /// Derivative `phi'(y) = H / (H - y)`.
    pub fn phi_prime(&self, y: f64) -> Result<f64> {
        if !(y >= self.lower && y < self.upper) {
            return domain(format!("phi': y = {y} outside [{}, {})", self.lower, self.upper));
        }
        Ok(self.upper / (self.upper - y))
    }

    /// `phi(y) - phi(u) = H log((H - u) / (H - y))` without forming either value.
    pub fn dual_excess(&self, u: f64, y: f64) -> Result<f64> {
        let (l, h) = (self.lower, self.upper);
        if !(u >= l && u < h && y >= u && y < h) {
            return domain(format!("dual excess needs L <= u <= y < H, got u = {u}, y = {y}"));
        }
        Ok(-h * ((u - y) / (h - u)).ln_1p())
    }
}
