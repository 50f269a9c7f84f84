//! Quadrature rules: Gauss-Legendre nodes/weights and composite Simpson.

use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
/// iteration from the Chebyshev-like initial guess; weights are
/// `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn gl64() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| gauss_legendre(64))
}

/// 64-point Gauss-Legendre integral of `f` over `[a, b]`.
pub fn gauss64<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl64();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite 64-point Gauss-Legendre over `panels` equal subintervals.
pub fn gauss64_composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| gauss64(&f, a + i as f64 * h, a + (i + 1) as f64 * h)).sum()
}

/// Composite Simpson integral of uniformly sampled values with spacing `h`.
///
/// Handles even sample counts by a trapezoid correction on the last panel.
pub fn simpson_samples(values: &[f64], h: f64) -> f64 {
    simpson_map(values, h, |v| v)
}

/// Composite Simpson of `f(values[i])` without materializing the mapped
/// array (the solver loop integrates squares every step).
pub fn simpson_map<F: Fn(f64) -> f64>(values: &[f64], h: f64, f: F) -> f64 {
    let n = values.len();
    assert!(n >= 2);
    if n == 2 {
        return 0.5 * h * (f(values[0]) + f(values[1]));
    }
    let odd_panels = (n - 1) % 2 == 1;
    let last = if odd_panels { n - 2 } else { n - 1 };
    let mut acc = f(values[0]) + f(values[last]);
    for (k, &v) in values.iter().enumerate().take(last).skip(1) {
        acc += if k % 2 == 1 { 4.0 * f(v) } else { 2.0 * f(v) };
    }
    let mut total = acc * h / 3.0;
    if odd_panels {
        total += 0.5 * h * (f(values[n - 2]) + f(values[n - 1]));
    }
    total
}

/// Trapezoid integral of uniformly sampled values with spacing `h`.
pub fn trapezoid_samples(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 2);
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (0.5 * (values[0] + values[n - 1]) + inner)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exact_for_polynomials() {
        // degree-7 polynomial is exact under 64-node Gauss
        let f = |x: f64| 3.0 * x.powi(7) - x.powi(4) + 2.0 * x - 5.0;
        let exact = |x: f64| 3.0 / 8.0 * x.powi(8) - x.powi(5) / 5.0 + x * x - 5.0 * x;
        let want = exact(2.7) - exact(-1.3);
        let got = gauss64(f, -1.3, 2.7);
        assert!(((got - want) / want).abs() < 1e-13);
    }

    #[test]
    fn gauss_nodes_symmetric_and_weights_sum_to_two() {
        let (nodes, weights) = gauss_legendre(64);
        let s: f64 = weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
        for i in 0..32 {
            assert!((nodes[i] + nodes[63 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn simpson_converges_on_sine() {
        let n = 2001;
        let h = std::f64::consts::PI / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
        assert!((simpson_samples(&vals, h) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn simpson_even_sample_count() {
        let n = 2000;
        let h = 1.0 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(2)).collect();
        assert!((simpson_samples(&vals, h) - 1.0 / 3.0).abs() < 1e-8);
    }
}
