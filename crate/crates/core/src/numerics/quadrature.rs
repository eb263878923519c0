//! Quadrature rules and the weighted-sum primitive they feed.

use crate::error::{invalid, Result};

/// Weighted dot product `Σ values[i]·weights[i]`.
pub fn integrate_samples(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return invalid(format!(
            "integrate_samples: {} values but {} weights",
            values.len(),
            weights.len()
        ));
    }
    Ok(values.iter().zip(weights).map(|(v, w)| v * w).sum())
}

/// Equispaced nodes `a + i(b−a)/(n−1)`, `i = 0..n`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + i as f64 * h })
                .collect()
        }
    }
}

/// Composite trapezoid weights on `n ≥ 2` equispaced nodes over `[a, b]`.
pub fn trapezoid_weights(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return invalid("trapezoid rule needs at least 2 nodes");
    }
    let h = (b - a) / (n - 1) as f64;
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    Ok(w)
}

/// Composite Simpson weights on an odd number `n ≥ 3` of equispaced nodes.
pub fn simpson_weights(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 3 || n % 2 == 0 {
        return invalid(format!("Simpson rule needs an odd node count ≥ 3, got {n}"));
    }
    let h = (b - a) / (n - 1) as f64;
    let mut w: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * h / 3.0)
        .collect();
    w[0] = h / 3.0;
    w[n - 1] = h / 3.0;
    Ok(w)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence; accurate to a few ulps
/// for the orders used here (up to a few hundred).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let s = 0.5 * (b - a);
    (
        x.iter().map(|t| c + s * t).collect(),
        w.iter().map(|wi| s * wi).collect(),
    )
}

const GL_ORDER: usize = 15;

/// Adaptive composite Gauss–Legendre quadrature of `f` over `[a, b]`.
///
/// Each panel is compared with the sum over its two halves and split until
/// the difference drops below `abs_tol` scaled by the panel's share of the
/// interval. Returns the integral and an error estimate.
pub fn adaptive_gauss_legendre<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> (f64, f64) {
    let (x, w) = gauss_legendre(GL_ORDER);
    let panel = |lo: f64, hi: f64| -> f64 {
        let c = 0.5 * (lo + hi);
        let s = 0.5 * (hi - lo);
        x.iter().zip(&w).map(|(t, wi)| wi * f(c + s * t)).sum::<f64>() * s
    };
    let total_len = (b - a).abs().max(f64::MIN_POSITIVE);
    let mut stack = vec![(a, b, panel(a, b), 0u32)];
    let mut sum = 0.0;
    let mut err = 0.0;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid);
        let right = panel(mid, hi);
        let diff = (left + right - whole).abs();
        let budget = abs_tol * ((hi - lo).abs() / total_len);
        if diff <= budget || depth >= 48 {
            sum += left + right;
            err += diff;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    (sum, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trapezoid_linear() {
        let n = 1001;
        let x = linspace(0.0, 1.0, n);
        let w = trapezoid_weights(0.0, 1.0, n).unwrap();
        let v = integrate_samples(&x, &w).unwrap();
        assert!((v - 0.5).abs() < 1e-6);
    }

    #[test]
    fn trapezoid_sine() {
        let n = 2001;
        let x = linspace(0.0, std::f64::consts::PI, n);
        let w = trapezoid_weights(0.0, std::f64::consts::PI, n).unwrap();
        let vals: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        assert!((integrate_samples(&vals, &w).unwrap() - 2.0).abs() < 1e-5);
    }

    #[test]
    fn simpson_exact_on_cubic() {
        let n = 11;
        let x = linspace(1.0, 2.0, n);
        let w = simpson_weights(1.0, 2.0, n).unwrap();
        let vals: Vec<f64> = x.iter().map(|r| r * r * r).collect();
        assert_relative_eq!(integrate_samples(&vals, &w).unwrap(), 3.75, epsilon = 1e-14);
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(integrate_samples(&[1.0, 2.0], &[1.0]).is_err());
        assert!(simpson_weights(0.0, 1.0, 4).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 15, 40] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            let deg = 2 * n - 1;
            let v: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((v - exact).abs() < 1e-13, "n={n}: {v} vs {exact}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let (v, _) = adaptive_gauss_legendre(|t: f64| t.sqrt(), 0.0, 1.0, 1e-13);
        assert_relative_eq!(v, 2.0 / 3.0, epsilon = 1e-11);
    }
}
