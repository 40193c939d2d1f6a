//! Fourth-order central finite differences on uniform samples.

use std::ops::{Add, Mul, Sub};

pub(crate) fn d1<T>(v: &[T], i: usize, h: f64) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    (v[i - 2] - v[i + 2] + (v[i + 1] - v[i - 1]) * 8.0) * (1.0 / (12.0 * h))
}

pub(crate) fn d2<T>(v: &[T], i: usize, h: f64) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    ((v[i + 1] + v[i - 1]) * 16.0 - (v[i + 2] + v[i - 2]) - v[i] * 30.0) * (1.0 / (12.0 * h * h))
}

/// First derivative of a function from its five-point stencil around `x`.
pub(crate) fn d1_fn<T, F>(f: F, x: f64, h: f64) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let v = [f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h)];
    d1(&v, 2, h)
}

pub(crate) fn d2_fn<T, F>(f: F, x: f64, h: f64) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let v = [f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h)];
    d2(&v, 2, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quartics() {
        let f = |x: f64| x.powi(4) - 2.0 * x.powi(3) + x;
        let df = |x: f64| 4.0 * x.powi(3) - 6.0 * x * x + 1.0;
        let ddf = |x: f64| 12.0 * x * x - 12.0 * x;
        assert!((d1_fn(f, 0.7, 0.1) - df(0.7)).abs() < 1e-12);
        assert!((d2_fn(f, 0.7, 0.1) - ddf(0.7)).abs() < 1e-10);
    }
}
