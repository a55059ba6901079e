//! One-dimensional quadrature rules used throughout the crate.
//!
//! Two rules cover every integral here: composite Simpson for smooth
//! integrands on a fixed interval (kernel moments), and tanh-sinh for
//! integrals over `[0, 1]` whose integrands may have algebraic endpoint
//! singularities, such as `t^(2/3)` or `t^(-1/3)` arising from optimal design
//! densities.

use std::f64::consts::FRAC_PI_2;

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(2);
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..panels {
        let x = a + i as f64 * h;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

const TANH_SINH_STEP: f64 = 1.0 / 64.0;
const TANH_SINH_MAX_T: f64 = 4.0;

/// Tanh-sinh (double exponential) quadrature on `[a, b]`.
///
/// The integrand is never evaluated at the endpoints, so integrable
/// singularities there are fine. Abscissae closest to an endpoint are formed
/// from the complement `1 - tanh(u)` to keep them distinct from `a` and `b`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = FRAC_PI_2 * f(mid);
    let steps = (TANH_SINH_MAX_T / TANH_SINH_STEP) as usize;
    for k in 1..=steps {
        let t = k as f64 * TANH_SINH_STEP;
        let u = FRAC_PI_2 * t.sinh();
        // delta = 1 - tanh(u)
        let delta = 2.0 / (1.0 + (2.0 * u).exp());
        let w = FRAC_PI_2 * t.cosh() * delta * (2.0 - delta);
        if w < 1e-300 {
            break;
        }
        let lo = a + half * delta;
        let hi = b - half * delta;
        // Near an endpoint with a larger magnitude the abscissa can round onto
        // it before the other side has converged; drop only that side.
        let mut fx = 0.0;
        if lo > a {
            fx += f(lo);
        }
        if hi < b {
            fx += f(hi);
        }
        if lo <= a && hi >= b {
            break;
        }
        sum += w * fx;
    }
    sum * half * TANH_SINH_STEP
}

/// `∫₀¹ f(t) dt` by tanh-sinh.
pub fn unit_integral<F: Fn(f64) -> f64>(f: F) -> f64 {
    tanh_sinh(f, 0.0, 1.0)
}

/// Composite trapezoid weights for ordered nodes, rescaled to sum to one.
///
/// The result averages a function over the node span; multiplying by the span
/// length gives the plain trapezoid rule.
pub fn normalized_trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    match n {
        0 => return Vec::new(),
        1 => return vec![1.0],
        _ => {}
    }
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let d = 0.5 * (nodes[i + 1] - nodes[i]);
        w[i] += d;
        w[i + 1] += d;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}
