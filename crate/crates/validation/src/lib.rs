//! Independent reference computations used by the acceptance checks.
//!
//! Nothing here calls into the weight or quadrature code it is used to check;
//! each function evaluates its defining formula directly.

/// `15/16 (1 - u²)²` on `[-1, 1]`.
pub fn quadratic_kernel(u: f64) -> f64 {
    if u.abs() > 1.0 {
        return 0.0;
    }
    let a = 1.0 - u * u;
    15.0 / 16.0 * a * a
}

/// `35/32 (1 - u²)³` on `[-1, 1]`.
pub fn triweight_kernel(u: f64) -> f64 {
    if u.abs() > 1.0 {
        return 0.0;
    }
    let a = 1.0 - u * u;
    35.0 / 32.0 * a * a * a
}

/// Midpoint Riemann sum over `[-1, 1]` with `cells` cells.
pub fn riemann(f: impl Fn(f64) -> f64, cells: usize) -> f64 {
    let h = 2.0 / cells as f64;
    (0..cells).map(|i| f(-1.0 + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// `∫∫ |u - v| K(u) K(v) = 2 ∫ F (1 - F)`, with the distribution function
/// accumulated cell by cell from point values of `K`.
pub fn riemann_c_k(k: impl Fn(f64) -> f64, cells: usize) -> f64 {
    let h = 2.0 / cells as f64;
    let mut cdf = 0.0;
    let mut acc = 0.0;
    for i in 0..cells {
        let u = -1.0 + (i as f64 + 0.5) * h;
        let f_mid = cdf + 0.25 * h * (k(u - 0.375 * h) + k(u - 0.125 * h));
        acc += f_mid * (1.0 - f_mid);
        cdf += 0.5 * h * (k(u - 0.25 * h) + k(u + 0.25 * h));
    }
    2.0 * acc * h
}

/// The trapezoidal estimate written as its defining sum:
/// `1/(2n) Σ_{k=1}^{N-1} [(φ ȳ / f)(t_{x,k}) + (φ ȳ / f)(t_{x,k+1})]`, where
/// `t_{x,1} < … < t_{x,N}` are the design points in `[x - h, x + h]`.
///
/// Returns `None` when `N < 2`.
pub fn literal_trapezoid(
    points: &[f64],
    density: impl Fn(f64) -> f64,
    kernel: impl Fn(f64) -> f64,
    x: f64,
    h: f64,
    ybar: &[f64],
) -> Option<f64> {
    let n = points.len() as f64;
    let (lo, hi) = (x - h, x + h);
    let window: Vec<usize> = (0..points.len())
        .filter(|&i| points[i] >= lo && points[i] <= hi)
        .collect();
    if window.len() < 2 {
        return None;
    }
    let term = |i: usize| kernel((x - points[i]) / h) / h / density(points[i]) * ybar[i];
    let mut sum = 0.0;
    for k in 0..window.len() - 1 {
        sum += term(window[k]) + term(window[k + 1]);
    }
    Some(sum / (2.0 * n))
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
