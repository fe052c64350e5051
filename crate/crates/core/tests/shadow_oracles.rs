mod common;

use common::{rel, ALPHAS, H_OVER_SIGMA};
use shadowtail::dual::DualTransform;
use shadowtail::gpd::GpdParams;
use shadowtail::shadow::{h_sensitivity, ShadowModel};

fn grid() -> impl Iterator<Item = ShadowModel> {
    ALPHAS.into_iter().flat_map(|a| {
        H_OVER_SIGMA
            .into_iter()
            .map(move |h| ShadowModel::new(a, 1.0, 1.0, h, 1.0).unwrap())
    })
}

#[test]
fn density_normalizes() {
    for m in grid() {
        let mass = common::total_mass(&m);
        assert!((mass - 1.0).abs() <= 1e-8, "{m:?}: {mass}");
    }
}

#[test]
fn closed_form_mean_matches_quadrature() {
    for m in grid() {
        let closed = m.mean().unwrap();
        let oracle = common::mean(&m);
        assert!(rel(closed, oracle) <= 1e-8, "{m:?}: {closed} vs {oracle}");
        assert!(closed > m.threshold && closed < m.upper);
    }
}

#[test]
fn closed_form_mean_excess_matches_quadrature() {
    for m in grid() {
        for frac in [0.0, 0.01, 0.3, 0.9, 0.999] {
            let v = m.threshold + frac * (m.upper - m.threshold);
            let closed = m.mean_excess(v).unwrap();
            let oracle = common::mean_excess(&m, v);
            assert!(rel(closed, oracle) <= 1e-8, "{m:?} v={v}: {closed} vs {oracle}");
        }
    }
}

#[test]
fn closed_form_cdf_matches_quadrature() {
    for m in grid() {
        for p in [0.05, 0.5, 0.9, 0.999] {
            let y = m.quantile(p).unwrap();
            let closed = m.cdf(y).unwrap();
            let oracle = common::cdf(&m, y);
            assert!(rel(closed, oracle) <= 1e-8, "{m:?} y={y}: {closed} vs {oracle}");
        }
    }
}

#[test]
fn mean_example_half_alpha() {
    let m = ShadowModel::new(0.5, 1.0, 1.0, 1000.0, 1.0).unwrap();
    let v = m.mean().unwrap();
    assert!(rel(v, common::mean(&m)) < 1e-6);
    assert!((v - 39.6).abs() < 0.05, "{v}");
    let e = m.mean_excess(500.0).unwrap();
    assert!(rel(e, common::mean_excess(&m, 500.0)) < 1e-6);
}

#[test]
fn lower_bound_threshold_mean_is_full_mean() {
    // With u = L the conditional mean is E[Y]; integrate the density over the whole support.
    let m = ShadowModel::new(0.8, 1.0, 1.0, 1e4, 1.0).unwrap();
    assert!(rel(m.mean().unwrap(), common::mean(&m)) < 1e-9);
}

#[test]
fn density_is_change_of_variables() {
    for &(a, s, h, u) in &[(2.0, 1.0, 10.0, 0.0), (0.5, 3.0, 1e4, 2.0), (1.25, 0.2, 1e6, 1.0)] {
        let lower = 0.0f64.min(u);
        let m = ShadowModel::new(a, s, lower, h, u).unwrap();
        let t = DualTransform::new(lower, h).unwrap();
        let g = GpdParams::new(1.0 / a, s).unwrap();
        for i in 0..100 {
            let y = u + (h - u) * (i as f64 / 100.0);
            let w = t.dual_excess(u, y).unwrap();
            let expect = g.pdf(w).unwrap() * t.phi_prime(y).unwrap();
            assert!(rel(m.pdf(y).unwrap(), expect) <= 1e-10, "y={y}");
        }
    }
}

#[test]
fn cdf_is_pushforward_of_gpd() {
    for &(a, s, l, h, u) in &[
        (0.5, 1.0, 1.0, 1e3, 1.0),
        (0.8, 2.0, 0.0, 1e4, 5.0),
        (1.0, 1.0, 0.0, 100.0, 0.0),
        (2.0, 0.5, -3.0, 1e6, 10.0),
        (3.0, 1.0, 1.0, 1e8, 1.0),
    ] {
        let m = ShadowModel::new(a, s, l, h, u).unwrap();
        let t = DualTransform::new(l, h).unwrap();
        let g = GpdParams::new(1.0 / a, s).unwrap();
        for i in 0..100 {
            let y = m.quantile(i as f64 / 100.0).unwrap();
            let expect = g.cdf(t.dual_excess(u, y).unwrap()).unwrap();
            assert!((m.cdf(y).unwrap() - expect).abs() <= 1e-12, "y={y}");
        }
    }
}

#[test]
fn quantile_inverts_cdf() {
    for m in grid() {
        for p in [0.01, 0.1, 0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999] {
            let t = m.quantile_log_gap(p).unwrap();
            assert!((m.cdf_at_log_gap(t).unwrap() - p).abs() <= 1e-10, "{m:?} p={p}");
            let y = m.quantile(p).unwrap();
            if y < m.upper.next_down() {
                // Rounding y to f64 moves the level by up to pdf(y) * ulp(y).
                let ulp = y.next_up() - y;
                let tol = 1e-10 + 2.0 * m.pdf(y).unwrap() * ulp;
                assert!((m.cdf(y).unwrap() - p).abs() <= tol, "{m:?} p={p}");
            } else {
                // Q(p) is within an ulp of H; the clamp can only under-state the level.
                assert!(m.cdf(y).unwrap() <= p);
            }
        }
    }
}

#[test]
fn unbounded_limit_recovers_gpd_mean() {
    for a in [1.5, 2.0, 3.0] {
        let m = ShadowModel::new(a, 1.0, 0.0, 1e12, 0.0).unwrap();
        let expect = a / (a - 1.0);
        assert!((m.mean().unwrap() - expect).abs() <= 1e-3, "{a}");
    }
    let out = h_sensitivity(2.0, 1.0, 0.0, 0.0, &[1e3, 1e15]).unwrap();
    assert!((out[1].1 - 2.0).abs() < 1e-3);
}

#[test]
fn means_grow_with_the_bound() {
    let out = h_sensitivity(0.5, 1.0, 1.0, 1.0, &[1e3, 1e4, 1e5]).unwrap();
    for w in out.windows(2) {
        assert!(w[1].1 > w[0].1);
    }
    for (h, v) in out {
        let m = ShadowModel::new(0.5, 1.0, 1.0, h, 1.0).unwrap();
        assert!(rel(v, common::mean(&m)) < 1e-8);
    }
    let m2 = |h| ShadowModel::new(0.5, 1.0, 1.0, h, 1.0).unwrap().moment(2).unwrap();
    assert!(m2(1e4) > m2(1e3));
}

#[test]
fn first_moment_by_quadrature_matches_closed_form() {
    for m in grid() {
        let q = m.moment(1).unwrap();
        assert!(rel(q, m.mean().unwrap()) <= 1e-8, "{m:?}");
    }
}
