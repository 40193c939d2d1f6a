//! Overlap kernels between invariant eigenfunctions.
//!
//! The PT kernel `∫φ_{λ′}φ_λ dx` is a Fresnel integral with λ-independent
//! modulus. The η kernel `∫(ρφ_{λ′})*(ρφ_λ) dx` is `δ(λ − λ′)`. Both are
//! tested against a narrow Gaussian in λ′.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::invariant::{InvariantCoefficients, MetricParams};
use crate::quadrature::simpson;
use crate::wavepacket::hermitian_eigenfunction;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Regularization strengths `ε` in `e^{−ε(x − x_s)²}`.
pub const EPSILON_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Largest smeared deviation (in units of `G_σ(0)`) still called delta-like.
pub const DELTA_TOLERANCE: f64 = 1e-6;
/// Smallest smeared deviation that counts as a clear failure of the delta test.
pub const NON_DELTA_THRESHOLD: f64 = 0.5;

const SMEAR_HALF_WIDTH: f64 = 10.0;
const SMEAR_NODES: usize = 801;
const OVERLAP_X_WIDTHS: f64 = 8.6;
const OVERLAP_X_NODES: usize = 4001;
const REGULARIZED_DECAY: f64 = 40.0;
const EXTRAPOLATION_SPREAD_LIMIT: f64 = 1e-3;

/// Unit-mass Gaussian `G_σ(s)`.
pub fn gaussian_test_function(s: f64, sigma: f64) -> f64 {
    (-0.5 * (s / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
}

fn sum_offset(lambda_prime: f64, lambda: f64, c0: f64) -> f64 {
    lambda + lambda_prime - 2.0 * c0
}

/// Closed-form PT kernel `(2πb)⁻¹ √(πb/(i a0)) exp{i S²/(4 a0 b)}` with
/// `S = λ + λ′ − 2c0`, evaluated for the eigenfunctions with vanishing metric
/// seeds.
pub fn pt_inner_product(lambda_prime: f64, lambda: f64, t: f64, coeffs: &InvariantCoefficients) -> Result<Complex64> {
    let a0 = coeffs.a0;
    if a0 == 0.0 {
        return Err(Error::Unsupported("the PT kernel is a plain delta when a0 = 0".into()));
    }
    let b = coeffs.b_nonsingular(t)?;
    let s = sum_offset(lambda_prime, lambda, coeffs.c0);
    let fresnel = (Complex64::from(PI * b) / (I * a0)).sqrt();
    Ok(fresnel / (2.0 * PI * b) * Complex64::from_polar(1.0, s * s / (4.0 * a0 * b)))
}

/// Regularized quadrature of the PT kernel and its ε → 0 extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedValue {
    pub extrapolated: Complex64,
    pub ladder: [Complex64; 3],
    /// Relative gap between three- and two-level extrapolations.
    pub spread: f64,
}

/// `∫ e^{−ε(x − x_s)²} φ_{λ′} φ_λ dx` on the real line for each ε of the
/// ladder, with `x_s` the stationary point of the phase, then cubic
/// Richardson extrapolation to ε = 0.
pub fn pt_inner_product_regularized(
    lambda_prime: f64,
    lambda: f64,
    t: f64,
    coeffs: &InvariantCoefficients,
) -> Result<RegularizedValue> {
    let a0 = coeffs.a0;
    if a0 == 0.0 {
        return Err(Error::Unsupported("the PT kernel is a plain delta when a0 = 0".into()));
    }
    let b = coeffs.b_nonsingular(t)?;
    let s = sum_offset(lambda_prime, lambda, coeffs.c0);
    let stationary = s / (2.0 * a0);
    let norm = 1.0 / (2.0 * PI * b);
    let mut ladder = [Complex64::new(0.0, 0.0); 3];
    for (slot, &eps) in ladder.iter_mut().zip(EPSILON_LADDER.iter()) {
        let reach = (REGULARIZED_DECAY / eps).sqrt();
        let top_frequency = 2.0 * a0.abs() * (stationary.abs() + reach) / b.abs() + s.abs() / b.abs();
        let n = 2 * ((2.0 * reach * top_frequency / 0.05).ceil() as usize / 2) + 1;
        let h = 2.0 * reach / (n - 1) as f64;
        let samples: Vec<Complex64> = (0..n)
            .map(|k| {
                let x = stationary - reach + k as f64 * h;
                let y = x - stationary;
                let phase = (s * x - a0 * x * x) / b;
                Complex64::from_polar(norm * (-eps * y * y).exp(), phase)
            })
            .collect();
        *slot = simpson(&samples, h);
    }
    let [v1, v2, v4] = ladder;
    let extrapolated = (8.0 * v4 - 6.0 * v2 + v1) / 3.0;
    let two_level = 2.0 * v4 - v2;
    let spread = (extrapolated - two_level).norm() / extrapolated.norm();
    if !(spread <= EXTRAPOLATION_SPREAD_LIMIT) {
        return Err(Error::NonConvergence { spread });
    }
    Ok(RegularizedValue { extrapolated, ladder, spread })
}

fn smear_nodes(center: f64, sigma: f64) -> (Vec<f64>, f64) {
    let lo = center - SMEAR_HALF_WIDTH * sigma;
    let h = 2.0 * SMEAR_HALF_WIDTH * sigma / (SMEAR_NODES - 1) as f64;
    ((0..SMEAR_NODES).map(|k| lo + k as f64 * h).collect(), h)
}

/// `∫ dλ″ G_σ(λ″ − λ′) K_PT(λ″, λ)` with the closed-form PT kernel.
pub fn pt_smeared(
    lambda_prime: f64,
    lambda: f64,
    t: f64,
    coeffs: &InvariantCoefficients,
    sigma: f64,
) -> Result<Complex64> {
    check_sigma(sigma)?;
    let (nodes, h) = smear_nodes(lambda_prime, sigma);
    let samples = nodes
        .iter()
        .map(|&l| Ok(gaussian_test_function(l - lambda_prime, sigma) * pt_inner_product(l, lambda, t, coeffs)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(simpson(&samples, h))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Scenario(format!("smear width must be positive and finite, got {sigma}")))
    }
}

/// `∫ dx [∫ dλ″ G_σ(λ″ − λ′) ρφ_{λ″}(x)]* ρφ_λ(x)`, both integrals by
/// Simpson quadrature. The x-range is ±8.6 b/σ, where the smeared
/// eigenfunction has decayed below `e^{−37}` of its peak.
pub fn eta_overlap(
    lambda_prime: f64,
    lambda: f64,
    t: f64,
    coeffs: &InvariantCoefficients,
    metric: &MetricParams,
    sigma: f64,
) -> Result<Complex64> {
    check_sigma(sigma)?;
    let b = coeffs.b_nonsingular(t)?;
    let (nodes, h_lambda) = smear_nodes(lambda_prime, sigma);
    let weights: Vec<f64> = nodes.iter().map(|&l| gaussian_test_function(l - lambda_prime, sigma)).collect();
    let reach = OVERLAP_X_WIDTHS * b.abs() / sigma;
    let h_x = 2.0 * reach / (OVERLAP_X_NODES - 1) as f64;
    let mut column = vec![Complex64::new(0.0, 0.0); SMEAR_NODES];
    let mut integrand = Vec::with_capacity(OVERLAP_X_NODES);
    let mut smeared_edge: f64 = 0.0;
    let mut smeared_peak: f64 = 0.0;
    for k in 0..OVERLAP_X_NODES {
        let x = -reach + k as f64 * h_x;
        for ((slot, &l), &w) in column.iter_mut().zip(&nodes).zip(&weights) {
            *slot = w * hermitian_eigenfunction(l, x, t, coeffs, metric)?.conj();
        }
        let smeared = simpson(&column, h_lambda);
        let magnitude = smeared.norm();
        smeared_peak = smeared_peak.max(magnitude);
        if k == 0 || k == OVERLAP_X_NODES - 1 {
            smeared_edge = smeared_edge.max(magnitude);
        }
        integrand.push(smeared * hermitian_eigenfunction(lambda, x, t, coeffs, metric)?);
    }
    if smeared_edge > 1e-12 * smeared_peak {
        return Err(Error::WindowTooSmall { ratio: smeared_edge / smeared_peak });
    }
    Ok(simpson(&integrand, h_x))
}

/// PT and η overlaps at one (λ′, λ) with their smeared-delta verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerProductReport {
    pub lambda: f64,
    pub lambda_prime: f64,
    pub t: f64,
    pub sigma: f64,
    pub pt_value: Complex64,
    pub pt_smeared: Complex64,
    pub eta_overlap_smeared: Complex64,
    /// `G_σ(λ − λ′)`, what a delta kernel would give.
    pub target: f64,
    /// `|pt_smeared − target| / G_σ(0)`.
    pub pt_deviation: f64,
    /// `|eta_overlap_smeared − target| / G_σ(0)`.
    pub eta_deviation: f64,
    pub pt_is_delta_like: bool,
    pub eta_is_delta_like: bool,
}

pub fn inner_product_report(
    lambda_prime: f64,
    lambda: f64,
    t: f64,
    coeffs: &InvariantCoefficients,
    metric: &MetricParams,
    sigma: f64,
) -> Result<InnerProductReport> {
    let pt_value = pt_inner_product(lambda_prime, lambda, t, coeffs)?;
    let pt_smeared = pt_smeared(lambda_prime, lambda, t, coeffs, sigma)?;
    let eta_overlap_smeared = eta_overlap(lambda_prime, lambda, t, coeffs, metric, sigma)?;
    let target = gaussian_test_function(lambda - lambda_prime, sigma);
    let scale = gaussian_test_function(0.0, sigma);
    let pt_deviation = (pt_smeared - target).norm() / scale;
    let eta_deviation = (eta_overlap_smeared - target).norm() / scale;
    Ok(InnerProductReport {
        lambda,
        lambda_prime,
        t,
        sigma,
        pt_value,
        pt_smeared,
        eta_overlap_smeared,
        target,
        pt_deviation,
        eta_deviation,
        pt_is_delta_like: pt_deviation <= DELTA_TOLERANCE,
        eta_is_delta_like: eta_deviation <= DELTA_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::Scenario;
    use crate::profiles::Profile;
    use crate::wavepacket::Solution;

    fn reference() -> Solution {
        Solution::new(&Scenario::reference()).unwrap()
    }

    #[test]
    fn pt_magnitude_is_lambda_independent() {
        let s = reference();
        let expected = (1.0 / (8.0 * PI)).sqrt();
        assert!((expected - 0.199471140200716).abs() < 1e-14);
        for (lp, l) in [(1.0, 1.0), (-3.0, 2.0), (6.0, 1.0), (0.0, -4.0)] {
            let v = pt_inner_product(lp, l, 0.0, &s.coeffs).unwrap();
            assert!((v.norm() - expected).abs() < 1e-14);
        }
        let same = pt_inner_product(1.0, 1.0, 0.0, &s.coeffs).unwrap();
        let apart = pt_inner_product(-1.5, 3.5, 0.0, &s.coeffs).unwrap();
        assert!((same.norm() - apart.norm()).abs() < 1e-6);
        let later = pt_inner_product(1.0, 1.0, 1.0, &s.coeffs).unwrap();
        assert!((later.norm() - (1.0 / (4.0 * PI)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn regularized_quadrature_matches_closed_form() {
        let s = reference();
        for (lp, l, t) in [(1.0, 1.0, 0.0), (-2.0, -2.0, 0.0), (0.5, 2.0, 0.7), (1.0, -1.0, 1.5)] {
            let closed = pt_inner_product(lp, l, t, &s.coeffs).unwrap();
            let numeric = pt_inner_product_regularized(lp, l, t, &s.coeffs).unwrap();
            let rel = (closed - numeric.extrapolated).norm() / closed.norm();
            assert!(rel <= 1e-6, "({lp},{l},{t}) rel={rel}");
            let unextrapolated = (closed - numeric.ladder[2]).norm() / closed.norm();
            assert!(unextrapolated > 1e-4);
        }
    }

    #[test]
    fn pt_kernel_fails_delta_test() {
        let s = reference();
        let sigma = 0.1;
        let smeared = pt_smeared(1.0, 1.0, 0.0, &s.coeffs, sigma).unwrap();
        let g0 = gaussian_test_function(0.0, sigma);
        assert!((g0 - 3.98942280401433).abs() < 1e-12);
        assert!((smeared - g0).norm() / g0 > NON_DELTA_THRESHOLD);
    }

    #[test]
    fn eta_kernel_passes_delta_test() {
        let s = reference();
        let sigma = 0.1;
        let v = eta_overlap(1.0, 1.0, 0.0, &s.coeffs, &s.metric, sigma).unwrap();
        assert!((v - 3.98942280401433).norm() <= 1e-6 * 3.98942280401433, "{v}");
        let off = eta_overlap(1.0 + 3.0 * sigma, 1.0, 0.0, &s.coeffs, &s.metric, sigma).unwrap();
        let target = gaussian_test_function(3.0 * sigma, sigma);
        assert!((target / 3.98942280401433 - 0.0111089965382423).abs() < 1e-14);
        assert!((off - target).norm() <= 1e-6 * target, "{off} vs {target}");
    }

    #[test]
    fn eta_kernel_independent_of_metric() {
        let s = reference();
        let flat = Solution::new(&Scenario::reference().with_drive(Profile::zero())).unwrap();
        for t in [0.0, 1.2] {
            let a = eta_overlap(0.4, 0.5, t, &s.coeffs, &s.metric, 0.2).unwrap();
            let b = eta_overlap(0.4, 0.5, t, &flat.coeffs, &flat.metric, 0.2).unwrap();
            assert!((a - b).norm() <= 1e-10 * a.norm(), "t={t} {a} {b}");
        }
    }

    #[test]
    fn report_verdicts() {
        let s = reference();
        let r = inner_product_report(1.0, 1.0, 0.0, &s.coeffs, &s.metric, 0.1).unwrap();
        assert!(r.eta_is_delta_like);
        assert!(!r.pt_is_delta_like);
        assert!(r.pt_deviation > NON_DELTA_THRESHOLD);
    }

    #[test]
    fn invalid_smear_width() {
        let s = reference();
        assert!(eta_overlap(1.0, 1.0, 0.0, &s.coeffs, &s.metric, 0.0).is_err());
        assert!(pt_smeared(1.0, 1.0, 0.0, &s.coeffs, -1.0).is_err());
    }
}
