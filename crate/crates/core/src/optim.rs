//! Two-parameter maximization: Nelder–Mead from several starts, then a
//! Newton polish on central-difference derivatives.
//!
//! Infeasible points are signalled by returning `-inf` (or NaN) from the
//! objective; the simplex simply never moves onto them.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub x: [f64; 2],
    pub value: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub x_tol: f64,
    pub max_iter: usize,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            x_tol: 1e-11,
            max_iter: 5_000,
            initial_step: 0.1,
        }
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

impl NelderMead {
    pub fn maximize<F: Fn([f64; 2]) -> f64>(&self, f: &F, start: [f64; 2]) -> Optimum {
        let eval = |p: [f64; 2]| sanitize(f(p));
        let mut evaluations = 0usize;
        let mut simplex = [start, start, start];
        for d in 0..2 {
            let step = self.initial_step * start[d].abs().max(1.0);
            simplex[d + 1][d] += step;
        }
        let mut values = simplex.map(|p| {
            evaluations += 1;
            eval(p)
        });

        for _ in 0..self.max_iter {
            // Order best (largest) first.
            let mut idx = [0usize, 1, 2];
            idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
            simplex = idx.map(|i| simplex[i]);
            values = idx.map(|i| values[i]);

            let diameter = (1..3)
                .map(|i| {
                    (0..2)
                        .map(|d| (simplex[i][d] - simplex[0][d]).abs() / simplex[0][d].abs().max(1.0))
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if diameter <= self.x_tol && values[2].is_finite() {
                break;
            }

            let centroid = [
                0.5 * (simplex[0][0] + simplex[1][0]),
                0.5 * (simplex[0][1] + simplex[1][1]),
            ];
            let along = |t: f64| {
                [
                    centroid[0] + t * (simplex[2][0] - centroid[0]),
                    centroid[1] + t * (simplex[2][1] - centroid[1]),
                ]
            };

            let reflected = along(-1.0);
            let fr = eval(reflected);
            evaluations += 1;
            if fr > values[0] {
                let expanded = along(-2.0);
                let fe = eval(expanded);
                evaluations += 1;
                if fe > fr {
                    simplex[2] = expanded;
                    values[2] = fe;
                } else {
                    simplex[2] = reflected;
                    values[2] = fr;
                }
                continue;
            }
            if fr > values[1] {
                simplex[2] = reflected;
                values[2] = fr;
                continue;
            }
            // Outside contraction when the reflection beat the worst vertex, inside otherwise.
            let outside = fr > values[2];
            let contracted = along(if outside { -0.5 } else { 0.5 });
            let fc = eval(contracted);
            evaluations += 1;
            let accept = if outside { fc >= fr } else { fc > values[2] };
            if accept {
                simplex[2] = contracted;
                values[2] = fc;
                continue;
            }
            // Shrink toward the best vertex.
            let best = simplex[0];
            for i in 1..3 {
                for (coord, b) in simplex[i].iter_mut().zip(best) {
                    *coord = b + 0.5 * (*coord - b);
                }
                values[i] = eval(simplex[i]);
                evaluations += 1;
            }
        }

        let best = (0..3).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
        Optimum {
            x: simplex[best],
            value: values[best],
            evaluations,
        }
    }
}

/// Central-difference gradient and Hessian with per-coordinate step `h`.
pub fn derivatives<F: Fn([f64; 2]) -> f64>(f: &F, x: [f64; 2], h: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let shifted = |d0: f64, d1: f64| f([x[0] + d0 * h[0], x[1] + d1 * h[1]]);
    let f0 = f(x);
    let fp0 = shifted(1.0, 0.0);
    let fm0 = shifted(-1.0, 0.0);
    let fp1 = shifted(0.0, 1.0);
    let fm1 = shifted(0.0, -1.0);
    let fpp = shifted(1.0, 1.0);
    let fpm = shifted(1.0, -1.0);
    let fmp = shifted(-1.0, 1.0);
    let fmm = shifted(-1.0, -1.0);
    let grad = [(fp0 - fm0) / (2.0 * h[0]), (fp1 - fm1) / (2.0 * h[1])];
    let h00 = (fp0 - 2.0 * f0 + fm0) / (h[0] * h[0]);
    let h11 = (fp1 - 2.0 * f0 + fm1) / (h[1] * h[1]);
    let h01 = (fpp - fpm - fmp + fmm) / (4.0 * h[0] * h[1]);
    (grad, [[h00, h01], [h01, h11]])
}

/// Relative finite-difference step for coordinate value `v`.
pub fn fd_step(v: f64) -> f64 {
    1e-4 * v.abs().max(1e-2)
}

/// Inverse of a symmetric 2x2 matrix, `None` when singular.
pub fn invert_2x2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

/// Newton steps on a concave objective; each accepted step must not lower the value.
fn polish<F: Fn([f64; 2]) -> f64>(f: &F, mut best: Optimum) -> Optimum {
    for _ in 0..20 {
        let h = [fd_step(best.x[0]), fd_step(best.x[1])];
        let (g, hess) = derivatives(f, best.x, h);
        best.evaluations += 9;
        // Negative definite Hessian only.
        if !(hess[0][0] < 0.0 && hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0] > 0.0) {
            break;
        }
        let Some(inv) = invert_2x2(hess) else { break };
        let step = [
            -(inv[0][0] * g[0] + inv[0][1] * g[1]),
            -(inv[1][0] * g[0] + inv[1][1] * g[1]),
        ];
        let cand = [best.x[0] + step[0], best.x[1] + step[1]];
        let fc = sanitize(f(cand));
        best.evaluations += 1;
        if !(fc >= best.value) {
            break;
        }
        let moved = (step[0].abs() / best.x[0].abs().max(1.0)).max(step[1].abs() / best.x[1].abs().max(1.0));
        best = Optimum {
            x: cand,
            value: fc,
            evaluations: best.evaluations,
        };
        if moved < 1e-13 {
            break;
        }
    }
    best
}

/// Multi-start maximization: a coarse simplex search from every start, a
/// tight search from the best of them, then Newton polishing.
pub fn maximize<F: Fn([f64; 2]) -> f64>(f: &F, starts: &[[f64; 2]]) -> Result<Optimum> {
    let coarse = NelderMead {
        x_tol: 1e-4,
        max_iter: 1_000,
        initial_step: 0.1,
    };
    let mut evaluations = 0;
    let mut best: Option<Optimum> = None;
    for &s in starts {
        if !sanitize(f(s)).is_finite() {
            evaluations += 1;
            continue;
        }
        let o = coarse.maximize(f, s);
        evaluations += o.evaluations;
        if best.is_none_or(|b| o.value > b.value) {
            best = Some(o);
        }
    }
    let Some(rough) = best else {
        return Err(Error::OptimizerFailed("no feasible starting point".into()));
    };
    let fine = NelderMead {
        initial_step: 1e-3,
        ..NelderMead::default()
    }
    .maximize(f, rough.x);
    let fine = if fine.value >= rough.value { fine } else { rough };
    let mut out = polish(f, fine);
    out.evaluations += evaluations;
    if !out.value.is_finite() {
        return Err(Error::OptimizerFailed(format!("non-finite optimum {}", out.value)));
    }
    Ok(out)
}
