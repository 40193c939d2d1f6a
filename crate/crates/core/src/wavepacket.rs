//! Invariant eigenfunctions, the Lewis–Riesenfeld phase, and the Gaussian
//! wave packet built from them.
//!
//! The packet is evaluated in closed form and, independently, as the
//! λ-integral `∫ g(λ) e^{iμ_λ} φ_λ dλ`. The Dyson map
//! `ρ = η^{1/2} = e^{iαβ/8} e^{βx/2} e^{−αp/2}` carries both to the Hermitian
//! picture, where `e^{−αp/2}` acts as the complex shift `x → x + iα/2`. All
//! formulas here are entire in x, so the shift is applied to the argument of
//! the closed form rather than to sampled data.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::invariant::{
    build_coefficients, build_metric, classical_trajectory, ClassicalTrajectory, InvariantCoefficients,
    MetricParams, Scenario,
};
use crate::quadrature::{cumulative_integral, simpson, CumulativeIntegral};
use crate::stencil;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Gaussian weight parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    /// Sharpness of the λ-envelope.
    pub d: f64,
    pub d0: f64,
    /// Mean invariant eigenvalue.
    pub i0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl SpaceGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 5 || !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Scenario(format!(
                "invalid space grid [{x_min}, {x_max}] with {n_points} points"
            )));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Grid on `center ± half_width`.
    pub fn centered(center: f64, half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(center - half_width, center + half_width, n_points)
    }

    /// Grid with the requested spacing (the upper edge is extended to fit).
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        let n = ((x_max - x_min) / dx).ceil() as usize + 1;
        Self::new(x_min, x_min + (n - 1) as f64 * dx, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }
}

/// Complex amplitude sampled on a space grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: SpaceGrid,
    pub t: f64,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn from_fn<F>(grid: SpaceGrid, t: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<Complex64> + Sync,
    {
        let values = (0..grid.n_points)
            .into_par_iter()
            .map(|i| f(grid.x(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, t, values })
    }

    pub fn norm_sqr(&self) -> f64 {
        let d: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        simpson(&d, self.grid.dx())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `‖a − b‖₂ / ‖b‖₂` over a common grid.
    pub fn l2_relative_error(&self, reference: &ComplexField) -> f64 {
        let diff: Vec<f64> = self.values.iter().zip(&reference.values).map(|(a, b)| (a - b).norm_sqr()).collect();
        (simpson(&diff, self.grid.dx()) / reference.norm_sqr()).sqrt()
    }
}

/// Real Lewis–Riesenfeld phase `μ_λ(t)` with `μ_λ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LRPhase {
    pub lambda: f64,
    pub t: f64,
    pub mu: f64,
}

/// Which terms of `μ̇_λ` enter the phase. Dropping the metric term is a
/// deliberately wrong solution used as a negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseTerms {
    #[default]
    Full,
    DropMetricTerm,
}

/// Time-dependent quantities of the closed forms at one instant.
#[derive(Debug, Clone, Copy)]
pub struct Instant {
    pub t: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `∫₀ᵗ dt′/m`.
    pub mass_int: f64,
    /// `∫₀ᵗ dt′/(2mb²)`.
    pub spread: f64,
    /// `(1/4)∫₀ᵗ (β̇α + β²/2m) dt′`.
    pub metric_phase: f64,
}

/// Scenario plus every tabulated integral the closed forms need.
#[derive(Debug, Clone)]
pub struct Solution {
    pub scenario: Scenario,
    pub coeffs: InvariantCoefficients,
    pub metric: MetricParams,
    pub trajectory: ClassicalTrajectory,
    /// `∫₀ᵗ dt′/(2m b²)`.
    pub spread_integral: CumulativeIntegral,
    /// `(1/4)∫₀ᵗ (β̇α + β²/2m) dt′`.
    pub metric_phase_integral: CumulativeIntegral,
    phase_terms: PhaseTerms,
}

impl Solution {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let coeffs = build_coefficients(scenario)?;
        let metric = build_metric(scenario)?;
        let trajectory = classical_trajectory(scenario)?;
        let mass = &scenario.mass;
        let spread_integral = cumulative_integral(
            |t| match coeffs.b(t) {
                Ok(b) => 1.0 / (2.0 * mass.value(t) * b * b),
                Err(_) => f64::NAN,
            },
            &scenario.grid,
        )?;
        let metric_phase_integral = cumulative_integral(
            |t| match (metric.alpha(t), metric.beta(t), metric.beta_dot(t)) {
                (Ok(a), Ok(b), Ok(db)) => 0.25 * (db * a + b * b / (2.0 * mass.value(t))),
                _ => f64::NAN,
            },
            &scenario.grid,
        )?;
        Ok(Self {
            scenario: scenario.clone(),
            coeffs,
            metric,
            trajectory,
            spread_integral,
            metric_phase_integral,
            phase_terms: PhaseTerms::Full,
        })
    }

    pub fn with_phase_terms(mut self, terms: PhaseTerms) -> Self {
        self.phase_terms = terms;
        self
    }

    pub fn phase_terms(&self) -> PhaseTerms {
        self.phase_terms
    }

    pub fn packet_params(&self) -> &PacketParams {
        &self.scenario.packet
    }

    pub fn instant(&self, t: f64) -> Result<Instant> {
        Ok(Instant {
            t,
            b: self.coeffs.b_nonsingular(t)?,
            alpha: self.metric.alpha(t)?,
            beta: self.metric.beta(t)?,
            mass_int: self.coeffs.mass_integral.eval(t)?,
            spread: self.spread_integral.eval(t)?,
            metric_phase: match self.phase_terms {
                PhaseTerms::Full => self.metric_phase_integral.eval(t)?,
                PhaseTerms::DropMetricTerm => 0.0,
            },
        })
    }

    pub fn lr_phase(&self, lambda: f64, t: f64) -> Result<LRPhase> {
        let at = self.instant(t)?;
        Ok(LRPhase { lambda, t, mu: mu_at(lambda, self.coeffs.c0, &at) })
    }

    /// Closed-form packet `Ψ^H(x, t)` in the non-Hermitian picture.
    pub fn packet(&self, x: f64, t: f64) -> Result<Complex64> {
        let at = self.instant(t)?;
        Ok(self.packet_at(Complex64::new(x, 0.0), &at))
    }

    /// Closed form at a complex argument.
    pub fn packet_at(&self, z: Complex64, at: &Instant) -> Complex64 {
        self.packet_log(z, at).exp()
    }

    /// `ln Ψ` of the closed form (principal log of the prefactor).
    pub fn packet_log(&self, z: Complex64, at: &Instant) -> Complex64 {
        let PacketParams { d, d0, i0 } = *self.packet_params();
        let (a0, b0, c0) = (self.coeffs.a0, self.coeffs.b0, self.coeffs.c0);
        let b = at.b;
        let q = i0 - c0;
        let u = z - I * (0.5 * at.alpha);
        let spread_den = Complex64::new(d, at.spread);
        let prefactor = (Complex64::from(d.sqrt() / (2.0 * PI).sqrt()) / (spread_den * b)).sqrt();
        let center = b * (2.0 * q * at.spread + d0 / b0);
        let exponent = -I * (q * q * at.spread)
            - I * (i0 * d0 / (2.0 * b0))
            - I * at.metric_phase
            + (I / (2.0 * b)) * ((Complex64::new(2.0 * q, at.beta * b)) * u - a0 * u * u)
            - (u - center).powi(2) / (4.0 * b * b * spread_den);
        prefactor.ln() + exponent
    }

    /// Mean and standard deviation of `|Ψ(x, t)|²` in the non-Hermitian
    /// picture. `ln|Ψ|` is exactly quadratic in x, so three samples fix it.
    pub fn raw_profile(&self, t: f64) -> Result<(f64, f64)> {
        let at = self.instant(t)?;
        let c = self.density_center(t)?;
        let l = |x: f64| self.packet_log(Complex64::new(x, 0.0), &at).re;
        let (lm, l0, lp) = (l(c - 1.0), l(c), l(c + 1.0));
        let curvature = lm - 2.0 * l0 + lp;
        let slope = 0.5 * (lp - lm);
        if !(curvature < 0.0) {
            return Err(Error::Singular { t, b: at.b });
        }
        // |Ψ|² ∝ exp(curvature (x−c)² + 2 slope (x−c))
        let mean = c - slope / curvature;
        let sd = (-1.0 / (2.0 * curvature)).sqrt();
        Ok((mean, sd))
    }

    /// Numerical λ-integral of unit-normalized weight × `e^{iμ_λ}` × `φ_λ`.
    ///
    /// The integrand is entire in λ with Gaussian decay, so the real axis is
    /// moved to the parallel line through the saddle point `λ_s(x, t)`. On
    /// the real axis the integrand cancels down to results up to `e^{−11}`
    /// smaller than its modulus late in the window; on the shifted line its
    /// modulus is a plain Gaussian of width `1/√(2d)`.
    pub fn packet_quadrature(&self, x: f64, t: f64, window: &LambdaWindow) -> Result<Complex64> {
        let at = self.instant(t)?;
        let params = *self.packet_params();
        let (b0, c0) = (self.coeffs.b0, self.coeffs.c0);
        let norm = weight_normalization(b0);
        let z = Complex64::new(x, 0.0);
        let u = z - I * (0.5 * at.alpha);
        let saddle = (2.0 * params.d * params.i0 + I * (2.0 * at.spread * c0) + I * (u / at.b - params.d0 / b0))
            / (2.0 * Complex64::new(params.d, at.spread));
        let half = window.half_span(&params);
        let n = window.nodes + 1 - window.nodes % 2;
        let h = 2.0 * half / (n - 1) as f64;
        let samples: Vec<Complex64> = (0..n)
            .map(|k| {
                let lambda = saddle + (k as f64 * h - half);
                let mu = -(lambda - c0).powi(2) * at.spread - at.metric_phase;
                weight_at(lambda, &params, b0) * norm * (I * mu).exp() * eigen_at(lambda, z, self.coeffs.a0, c0, &at)
            })
            .collect();
        let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.norm()));
        let edge = samples[0].norm().max(samples[n - 1].norm());
        if peak > 0.0 && edge > 1e-10 * peak {
            return Err(Error::WindowTooSmall { ratio: edge / peak });
        }
        Ok(simpson(&samples, h))
    }

    /// Hermitian-picture packet `(ρΨ)(x)`.
    pub fn hermitian_packet(&self, x: f64, t: f64) -> Result<Complex64> {
        let at = self.instant(t)?;
        Ok(self.hermitian_packet_at(x, &at))
    }

    fn hermitian_packet_at(&self, x: f64, at: &Instant) -> Complex64 {
        dyson_factor(x, at) * self.packet_at(Complex64::new(x, 0.5 * at.alpha), at)
    }

    /// `|ρΨ^H(x, t)|²`.
    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.hermitian_packet(x, t)?.norm_sqr())
    }

    /// Centre of the density, `b(d0/b0 − ∫(c−I0)/(mb²))`; equals
    /// `x0 + p0∫dt/m` when the consistency relations hold.
    pub fn density_center(&self, t: f64) -> Result<f64> {
        let at = self.instant(t)?;
        let PacketParams { d0, i0, .. } = *self.packet_params();
        Ok(at.b * (2.0 * (i0 - self.coeffs.c0) * at.spread + d0 / self.coeffs.b0))
    }

    /// Position width `Δx = (b/√d)√(d² + (∫dt/2mb²)²)`.
    pub fn width(&self, t: f64) -> Result<f64> {
        let at = self.instant(t)?;
        Ok(width_at(self.packet_params().d, &at))
    }

    /// Squared modulus of the closed-form prefactor.
    pub fn density_amplitude(&self, t: f64) -> Result<f64> {
        let at = self.instant(t)?;
        let d = self.packet_params().d;
        Ok(d.sqrt() / ((2.0 * PI).sqrt() * at.b.abs() * Complex64::new(d, at.spread).norm()))
    }

    pub fn sample(&self, t: f64, grid: SpaceGrid) -> Result<ComplexField> {
        let at = self.instant(t)?;
        ComplexField::from_fn(grid, t, |x| Ok(self.packet_at(Complex64::new(x, 0.0), &at)))
    }

    /// Maps a closed-form source to the Hermitian picture on `grid`.
    pub fn dyson_transform(&self, source: PacketSource<'_>, t: f64, grid: SpaceGrid) -> Result<ComplexField> {
        let at = self.instant(t)?;
        match source {
            PacketSource::Packet => ComplexField::from_fn(grid, t, |x| Ok(self.hermitian_packet_at(x, &at))),
            PacketSource::Eigenfunction(lambda) => ComplexField::from_fn(grid, t, |x| {
                Ok(dyson_factor(x, &at)
                    * eigen_at(lambda, Complex64::new(x, 0.5 * at.alpha), self.coeffs.a0, self.coeffs.c0, &at))
            }),
            PacketSource::Sampled(_) => Err(Error::Unsupported(
                "the Dyson map needs an analytic model; sampled fields cannot be shifted into the complex plane"
                    .into(),
            )),
        }
    }
}

pub enum PacketSource<'a> {
    Packet,
    Eigenfunction(f64),
    Sampled(&'a ComplexField),
}

/// λ-integration window: `half_width/√(2d)` on either side of the saddle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaWindow {
    pub half_width: f64,
    pub nodes: usize,
}

impl Default for LambdaWindow {
    fn default() -> Self {
        Self { half_width: 10.0, nodes: 4096 }
    }
}

impl LambdaWindow {
    pub fn half_span(&self, p: &PacketParams) -> f64 {
        self.half_width / (2.0 * p.d).sqrt()
    }
}

fn dyson_factor(x: f64, at: &Instant) -> Complex64 {
    Complex64::from_polar((0.5 * at.beta * x).exp(), at.alpha * at.beta / 8.0)
}

fn width_at(d: f64, at: &Instant) -> f64 {
    at.b.abs() / d.sqrt() * (d * d + at.spread * at.spread).sqrt()
}

pub(crate) fn mu_at(lambda: f64, c0: f64, at: &Instant) -> f64 {
    -(lambda - c0).powi(2) * at.spread - at.metric_phase
}

fn eigen_at(lambda: impl Into<Complex64>, z: Complex64, a0: f64, c0: f64, at: &Instant) -> Complex64 {
    let b = at.b;
    let u = z - I * (0.5 * at.alpha);
    let linear = 2.0 * (lambda.into() - c0) + I * (at.beta * b);
    let exponent = (I / (2.0 * b)) * (linear * u - a0 * u * u);
    Complex64::from(2.0 * PI * b).sqrt().inv() * exponent.exp()
}

/// `√(2π b0)`: the paper's weight has `∫|g|² dλ = 1/(2π b0)`.
pub fn weight_normalization(b0: f64) -> f64 {
    (2.0 * PI * b0).sqrt()
}

/// Invariant eigenfunction `φ_λ(x, t)`.
pub fn eigenfunction(
    lambda: f64,
    x: f64,
    t: f64,
    coeffs: &InvariantCoefficients,
    metric: &MetricParams,
) -> Result<Complex64> {
    let at = Instant {
        t,
        b: coeffs.b_nonsingular(t)?,
        alpha: metric.alpha(t)?,
        beta: metric.beta(t)?,
        mass_int: coeffs.mass_integral.eval(t)?,
        spread: 0.0,
        metric_phase: 0.0,
    };
    Ok(eigen_at(lambda, Complex64::new(x, 0.0), coeffs.a0, coeffs.c0, &at))
}

/// Hermitian-picture eigenfunction `(ρφ_λ)(x, t)`.
pub fn hermitian_eigenfunction(
    lambda: f64,
    x: f64,
    t: f64,
    coeffs: &InvariantCoefficients,
    metric: &MetricParams,
) -> Result<Complex64> {
    let at = Instant {
        t,
        b: coeffs.b_nonsingular(t)?,
        alpha: metric.alpha(t)?,
        beta: metric.beta(t)?,
        mass_int: 0.0,
        spread: 0.0,
        metric_phase: 0.0,
    };
    Ok(dyson_factor(x, &at) * eigen_at(lambda, Complex64::new(x, 0.5 * at.alpha), coeffs.a0, coeffs.c0, &at))
}

/// `max |(I − λ)φ| / max |φ|` over interior nodes, with `p = −i ∂x` by
/// fourth-order central differences.
pub fn eigen_residual(
    lambda: f64,
    field: &ComplexField,
    coeffs: &InvariantCoefficients,
    metric: &MetricParams,
) -> Result<f64> {
    let t = field.t;
    let b = coeffs.b_nonsingular(t)?;
    let alpha = metric.alpha(t)?;
    let beta = metric.beta(t)?;
    let h = field.grid.dx();
    let v = &field.values;
    let mut worst: f64 = 0.0;
    for i in 2..v.len() - 2 {
        let x = field.grid.x(i);
        let p_phi = -I * stencil::d1(v, i, h);
        let applied = coeffs.a0 * Complex64::new(x, -0.5 * alpha) * v[i]
            + b * (p_phi - I * (0.5 * beta) * v[i])
            + (coeffs.c0 - lambda) * v[i];
        worst = worst.max(applied.norm());
    }
    Ok(worst / field.max_abs())
}

/// Weight `g(λ) = √(√d/(π√(2π)b0))·e^{−d(λ−I0)²}·e^{−i(d0/b0)(λ−I0/2)}`.
pub fn weight(lambda: f64, params: &PacketParams, b0: f64) -> Complex64 {
    weight_at(Complex64::from(lambda), params, b0)
}

fn weight_at(lambda: Complex64, params: &PacketParams, b0: f64) -> Complex64 {
    let PacketParams { d, d0, i0 } = *params;
    let amplitude = (d.sqrt() / (PI * (2.0 * PI).sqrt() * b0)).sqrt();
    amplitude * (-d * (lambda - i0).powi(2) - I * (d0 / b0) * (lambda - 0.5 * i0)).exp()
}
