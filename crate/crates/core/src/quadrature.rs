//! Uniform time grids and cumulative Simpson quadrature.
//!
//! Every `∫₀ᵗ (·) dt′` used by the invariant coefficients is tabulated once on
//! a shared [`TimeGrid`]. Each step `[t_k, t_{k+1}]` is integrated with
//! Simpson's rule using an exact midpoint sample, so tabulated values are
//! additive across nodes. Between nodes, [`CumulativeIntegral::eval`] uses
//! cubic Hermite interpolation with the integrand as the node derivative.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub const DEFAULT_STEPS: usize = 4096;

    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::Scenario(format!("time grid needs n_steps >= 2, got {n_steps}")));
        }
        if !(t_start.is_finite() && t_end.is_finite()) || t_end <= t_start {
            return Err(Error::Scenario(format!(
                "time grid needs t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Self { t_start, t_end, n_steps })
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.step()
        }
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|k| self.node(k))
    }

    pub fn contains(&self, t: f64) -> bool {
        let slack = 1e-12 * (self.t_end - self.t_start);
        t >= self.t_start - slack && t <= self.t_end + slack
    }
}

/// Tabulated running integral with the integrand kept at each node.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeIntegral {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    /// Integrand at each node (the derivative of `values`).
    pub rates: Vec<f64>,
}

impl CumulativeIntegral {
    pub fn zeros(grid: TimeGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()], rates: vec![0.0; grid.len()] }
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Value at an arbitrary time inside the grid.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let (k, s) = self.locate(t)?;
        let h = self.grid.step();
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.rates[k] * h, self.rates[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        Ok((2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1)
    }

    /// Derivative of the interpolant, i.e. the interpolated integrand.
    pub fn rate(&self, t: f64) -> Result<f64> {
        let (k, s) = self.locate(t)?;
        let h = self.grid.step();
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.rates[k] * h, self.rates[k + 1] * h);
        let s2 = s * s;
        Ok(((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h)
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let g = &self.grid;
        if !g.contains(t) {
            return Err(Error::Domain { t, lo: g.t_start, hi: g.t_end });
        }
        let x = ((t - g.t_start) / g.step()).clamp(0.0, g.n_steps as f64);
        let k = (x.floor() as usize).min(g.n_steps - 1);
        Ok((k, x - k as f64))
    }

    /// Linear map `offset + scale * self`, keeping rates consistent.
    pub fn affine(&self, offset: f64, scale: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| offset + scale * v).collect(),
            rates: self.rates.iter().map(|r| scale * r).collect(),
        }
    }
}

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    if !fm.is_finite() {
        return Err(Error::NonFinite { t: mid });
    }
    Ok((b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

fn sample<F: Fn(f64) -> f64>(f: &F, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.nodes()
        .map(|t| {
            let v = f(t);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { t })
            }
        })
        .collect()
}

/// Running integral of `integrand` from `grid.t_start` to every node.
pub fn cumulative_integral<F: Fn(f64) -> f64>(integrand: F, grid: &TimeGrid) -> Result<CumulativeIntegral> {
    let rates = sample(&integrand, grid)?;
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut acc = 0.0;
    for k in 0..grid.n_steps {
        let (a, b) = (grid.node(k), grid.node(k + 1));
        acc += simpson_step(&integrand, a, rates[k], b, rates[k + 1])?;
        values.push(acc);
    }
    Ok(CumulativeIntegral { grid: *grid, values, rates })
}

/// `∫₀ᵗ outer_weight(t′) · (∫₀^{t′} inner) dt′` on every node.
///
/// The inner running integral at each outer midpoint is the node value plus a
/// half-step Simpson panel, so no interpolation enters the outer rule.
pub fn nested_integral<F, W>(inner: F, outer_weight: W, grid: &TimeGrid) -> Result<CumulativeIntegral>
where
    F: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    let inner_cum = cumulative_integral(&inner, grid)?;
    let weights = sample(&outer_weight, grid)?;
    let rates: Vec<f64> = weights.iter().zip(&inner_cum.values).map(|(w, i)| w * i).collect();
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut acc = 0.0;
    for k in 0..grid.n_steps {
        let (a, b) = (grid.node(k), grid.node(k + 1));
        let mid = 0.5 * (a + b);
        let (fm, wm) = (inner(mid), outer_weight(mid));
        if !(fm.is_finite() && wm.is_finite()) {
            return Err(Error::NonFinite { t: mid });
        }
        let inner_mid = inner_cum.values[k] + simpson_step(&inner, a, inner_cum.rates[k], mid, fm)?;
        acc += (b - a) / 6.0 * (rates[k] + 4.0 * wm * inner_mid + rates[k + 1]);
        values.push(acc);
    }
    Ok(CumulativeIntegral { grid: *grid, values, rates })
}

/// Composite Simpson rule over uniformly spaced samples. An even sample count
/// closes with a Simpson 3/8 panel on the last four points.
pub fn simpson<T>(samples: &[T], h: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
{
    let n = samples.len();
    match n {
        0 | 1 => T::default(),
        2 => (samples[0] + samples[1]) * (0.5 * h),
        3 => (samples[0] + samples[1] * 4.0 + samples[2]) * (h / 3.0),
        _ => {
            let (body, tail) = if n % 2 == 1 { (n, 0) } else { (n - 3, 3) };
            let mut acc = samples[0] + samples[body - 1];
            for (i, &s) in samples.iter().enumerate().take(body - 1).skip(1) {
                acc = acc + s * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let mut total = acc * (h / 3.0);
            if tail == 3 {
                let s = &samples[body - 1..];
                total = total + (s[0] + s[1] * 3.0 + s[2] * 3.0 + s[3]) * (3.0 * h / 8.0);
            }
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn unit_grid(n: usize) -> TimeGrid {
        TimeGrid::new(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn constant_integrand() {
        let c = cumulative_integral(|_| 1.0, &unit_grid(1000)).unwrap();
        assert!((c.last() - 1.0).abs() <= 1e-10);
        assert_eq!(c.values[0], 0.0);
    }

    #[test]
    fn cosine_integrand() {
        let c = cumulative_integral(f64::cos, &unit_grid(1000)).unwrap();
        assert!((c.last() - 1f64.sin()).abs() <= 1e-10);
    }

    #[test]
    fn inverse_square_integrand() {
        let c = cumulative_integral(|t| 1.0 / (2.0 * (2.0 - t).powi(2)), &unit_grid(1000)).unwrap();
        assert!((c.last() - 0.25).abs() <= 1e-9);
    }

    #[test]
    fn non_finite_reports_node() {
        let err = cumulative_integral(|t| 1.0 / (t - 0.5), &unit_grid(4)).unwrap_err();
        assert_eq!(err, Error::NonFinite { t: 0.5 });
    }

    #[test]
    fn nested_cosine() {
        let n = nested_integral(f64::cos, |_| 1.0, &unit_grid(1000)).unwrap();
        assert!((n.last() - (1.0 - 1f64.cos())).abs() <= 1e-9);
        assert_eq!(n.values[0], 0.0);
    }

    #[test]
    fn nested_zero_inner() {
        let n = nested_integral(|_| 0.0, |t| 1.0 + t * t, &unit_grid(64)).unwrap();
        assert!(n.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nested_constant_inner_matches_moment() {
        let grid = TimeGrid::new(0.0, 2.0, 512).unwrap();
        let w = |t: f64| (0.3 * t).exp();
        let n = nested_integral(|_| 1.7, w, &grid).unwrap();
        let m = cumulative_integral(|t| t * w(t), &grid).unwrap();
        for (a, b) in n.values.iter().zip(&m.values) {
            assert!((a - 1.7 * b).abs() <= 1e-12);
        }
    }

    #[test]
    fn halving_step_gains_order_three() {
        let f = |t: f64| (2.0 * t).sin() * (-t).exp();
        let exact = {
            // ∫₀^3 e^{-t} sin 2t dt
            let t = 3.0f64;
            (2.0 - (-t).exp() * ((2.0 * t).sin() + 2.0 * (2.0 * t).cos())) / 5.0
        };
        let e1 = (cumulative_integral(f, &TimeGrid::new(0.0, 3.0, 16).unwrap()).unwrap().last() - exact).abs();
        let e2 = (cumulative_integral(f, &TimeGrid::new(0.0, 3.0, 32).unwrap()).unwrap().last() - exact).abs();
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn additive_over_subgrids() {
        let grid = TimeGrid::new(0.0, 2.0, 200).unwrap();
        let f = |t: f64| t.exp() * (3.0 * t).cos();
        let full = cumulative_integral(f, &grid).unwrap();
        let j = 70;
        let sub = TimeGrid::new(grid.node(j), 2.0, 200 - j).unwrap();
        let part = cumulative_integral(f, &sub).unwrap();
        for (i, v) in part.values.iter().enumerate() {
            assert!((full.values[j + i] - full.values[j] - v).abs() <= 1e-13);
        }
    }

    #[test]
    fn hermite_interpolation_between_nodes() {
        let c = cumulative_integral(f64::cos, &TimeGrid::new(0.0, 2.0, 256).unwrap()).unwrap();
        for t in [0.0, 0.0031, 0.5, 1.2345, 2.0] {
            assert!((c.eval(t).unwrap() - t.sin()).abs() <= 1e-11);
            assert!((c.rate(t).unwrap() - t.cos()).abs() <= 1e-7);
        }
        assert!(c.eval(2.1).is_err());
    }

    #[test]
    fn simpson_on_samples() {
        let h = 0.01;
        for n in [101usize, 102] {
            let xs: Vec<f64> = (0..n).map(|i| (i as f64 * h).exp()).collect();
            let exact = ((n - 1) as f64 * h).exp() - 1.0;
            assert!((simpson(&xs, h) - exact).abs() < 1e-9);
        }
        let zs: Vec<Complex64> = (0..201).map(|i| Complex64::new(0.0, i as f64 * 0.01).exp()).collect();
        let exact = (Complex64::new(0.0, 2.0).exp() - 1.0) / Complex64::i();
        assert!((simpson(&zs, 0.01) - exact).norm() < 1e-9);
    }
}
