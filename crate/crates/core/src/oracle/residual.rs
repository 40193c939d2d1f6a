//! Finite-difference check that the closed-form packet solves the TDSE.

use num_complex::Complex64;

use crate::error::Result;
use crate::stencil;
use crate::wavepacket::Solution;

/// Stencil spacing in both x and t.
pub const RESIDUAL_STEP: f64 = 1e-3;

const PROBE_POINTS: usize = 41;
const PROBE_WIDTHS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// `‖i∂tΨ − HΨ‖ / ‖Ψ‖` over all probes.
    pub l2_relative_error: f64,
    /// `max |i∂tΨ − HΨ| / max |Ψ|`, worst probe time.
    pub max_pointwise_error: f64,
    pub times: Vec<f64>,
}

/// Probes `i∂tΨ − HΨ` on 41 points spanning ±4 standard deviations of `|Ψ|²`
/// at each probe time, with fourth-order differences of spacing 1e-3.
pub fn tdse_residual(solution: &Solution, probe_times: &[f64]) -> Result<ResidualReport> {
    let h = RESIDUAL_STEP;
    let mut residual_sq = 0.0;
    let mut packet_sq = 0.0;
    let mut worst: f64 = 0.0;
    for &t in probe_times {
        let at = solution.instant(t)?;
        let m = solution.scenario.mass.eval(t)?;
        let f = solution.scenario.drive.eval(t)?;
        let (mean, sd) = solution.raw_profile(t)?;
        let mut peak: f64 = 0.0;
        let mut largest: f64 = 0.0;
        for k in 0..PROBE_POINTS {
            let x = mean + PROBE_WIDTHS * sd * (2.0 * k as f64 / (PROBE_POINTS - 1) as f64 - 1.0);
            let psi = solution.packet_at(Complex64::new(x, 0.0), &at);
            let dt = stencil::d1_fn(|s| solution.packet(x, s).unwrap_or(Complex64::new(f64::NAN, 0.0)), t, h);
            let dxx = stencil::d2_fn(|y| solution.packet_at(Complex64::new(y, 0.0), &at), x, h);
            let r = Complex64::i() * dt + dxx / (2.0 * m) - Complex64::i() * (f * x) * psi;
            residual_sq += r.norm_sqr();
            packet_sq += psi.norm_sqr();
            peak = peak.max(psi.norm());
            largest = largest.max(r.norm());
        }
        worst = worst.max(largest / peak);
    }
    Ok(ResidualReport {
        l2_relative_error: (residual_sq / packet_sq).sqrt(),
        max_pointwise_error: worst,
        times: probe_times.to_vec(),
    })
}
