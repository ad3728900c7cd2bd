//! Bessel functions of the first kind, orders 0 and 1, for non-negative
//! arguments.
//!
//! Power series below [`SERIES_LIMIT`], Hankel asymptotic expansion above.
//! Both branches are accurate to about 1e-12 absolute at the switch point.

use std::f64::consts::PI;

use crate::{Error, Result};

const SERIES_LIMIT: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Zero,
    One,
}

impl Order {
    fn nu(self) -> f64 {
        match self {
            Order::Zero => 0.0,
            Order::One => 1.0,
        }
    }
}

/// `J_n(x)` for `n ∈ {0, 1}` and `x ≥ 0`.
pub fn bessel_j(order: Order, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be finite and ≥ 0, got {x}")));
    }
    Ok(eval(order, x))
}

#[inline]
pub fn j0(x: f64) -> f64 {
    eval(Order::Zero, x)
}

#[inline]
pub fn j1(x: f64) -> f64 {
    eval(Order::One, x)
}

fn eval(order: Order, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        series(order, x)
    } else {
        asymptotic(order, x)
    }
}

fn series(order: Order, x: f64) -> f64 {
    let h = 0.5 * x;
    let q = -h * h;
    let (mut term, n) = match order {
        Order::Zero => (1.0, 0.0),
        Order::One => (h, 1.0),
    };
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + n));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > h {
            break;
        }
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    sum
}

fn asymptotic(order: Order, x: f64) -> f64 {
    let mu = 4.0 * order.nu() * order.nu();
    let chi = x - (0.5 * order.nu() + 0.25) * PI;
    // a_k = Π_{j=1..k} (mu - (2j-1)²) / (k! 8^k), P = Σ (-1)^k a_{2k} / x^{2k},
    // Q = Σ (-1)^k a_{2k+1} / x^{2k+1}
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        let term = a / x.powi(k);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        let kk = k as usize;
        let sign = if (kk / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        if kk.is_multiple_of(2) {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if last < 1e-17 {
            break;
        }
        let j = (k + 1) as f64;
        a *= (mu - (2.0 * j - 1.0).powi(2)) / (j * 8.0);
    }
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
