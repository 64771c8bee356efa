// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// `(1/(b-a)) ∫_a^b f` with an `n`-point rule.
pub fn interval_average(f: impl Fn(f64) -> f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    let sum: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(mid + half * x)).sum();
    sum / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_point_rule() {
        let rule = gauss_legendre(16);
        assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(rule.0.windows(2).all(|w| w[0] < w[1]));
        // exact through degree 31
        let integral: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * x.powi(30)).sum();
        assert!((integral - 2.0 / 31.0).abs() < 1e-14);
        let avg = interval_average(|t| t * t, 0.0, 3.0, &rule);
        assert!((avg - 3.0).abs() < 1e-13);
    }
}
