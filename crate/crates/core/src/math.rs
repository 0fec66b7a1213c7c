//! Float helpers routed through `libm` so results do not depend on the
//! platform's libm.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub(crate) fn powi(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// `x^(1/n)` for `x >= 0`.
#[inline]
pub(crate) fn root(x: f64, n: u32) -> f64 {
    match n {
        1 => x,
        2 => sqrt(x),
        _ => powf(x, 1.0 / n as f64),
    }
}
