// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! Sine integral and error function.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

/// Below this the power series is used, above it the continued fraction.
const SERIES_LIMIT: f64 = 2.0;
const EPS: f64 = 1e-16;

/// `Si(x) = ∫₀ˣ sin(t)/t dt`.
pub fn si(x: f64) -> f64 {
    let t = x.abs();
    let value = if t == 0.0 {
        0.0
    } else if t <= SERIES_LIMIT {
        si_series(t)
    } else if t.is_infinite() {
        FRAC_PI_2
    } else {
        si_continued_fraction(t)
    };
    value.copysign(x)
}

/// `Σ (-1)^k t^{2k+1} / ((2k+1)(2k+1)!)`.
fn si_series(t: f64) -> f64 {
    let t2 = t * t;
    let mut term = t; // t^{2k+1}/(2k+1)!
    let mut sum = t;
    let mut k = 0u32;
    loop {
        k += 1;
        let n = f64::from(2 * k);
        term *= -t2 / (n * (n + 1.0));
        let add = term / (n + 1.0);
        sum += add;
        if add.abs() < EPS * sum.abs() {
            return sum;
        }
    }
}

/// Lentz evaluation of the continued fraction for `E₁(it)`, which gives
/// `Si(t) = π/2 + Im[e^{-it} · CF]`.
fn si_continued_fraction(t: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, t);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..10_000u32 {
        let a = -f64::from((i - 1) * (i - 1));
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    let h = Complex64::new(t.cos(), -t.sin()) * h;
    FRAC_PI_2 + h.im
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}
