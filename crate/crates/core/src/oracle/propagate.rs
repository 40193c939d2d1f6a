//! Crank–Nicolson propagation of `i∂tΨ = [p²/2m(t) + i f(t) x]Ψ` with a
//! second-order Laplacian, Dirichlet walls and the Hamiltonian frozen at the
//! half step.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::quadrature::simpson;
use crate::wavepacket::{ComplexField, Solution, SpaceGrid};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative η-norm drift that aborts a run.
pub const INSTABILITY_DRIFT: f64 = 0.1;

const SPECTRAL_FLOOR: f64 = 1e-8;
const SUPPORT_WIDTHS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub dt: f64,
    /// Steps between η-norm stability checks.
    pub check_every: usize,
}

impl PropagatorConfig {
    pub fn new(dt: f64) -> Self {
        Self { dt, check_every: 1000 }
    }
}

/// Thomas solve of a tridiagonal system with constant off-diagonal `off`.
fn solve_tridiagonal(diag: &[Complex64], off: Complex64, rhs: &mut [Complex64], scratch: &mut [Complex64]) {
    let n = diag.len();
    scratch[0] = off / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - off * scratch[i - 1];
        scratch[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= scratch[i] * next;
    }
}

/// Marches `initial` forward and returns a field at each requested time.
pub fn propagate_tdse(
    initial: &ComplexField,
    solution: &Solution,
    config: &PropagatorConfig,
    output_times: &[f64],
) -> Result<Vec<ComplexField>> {
    let grid = initial.grid;
    let dx = grid.dx();
    if grid.n_points < 256 {
        return Err(Error::Scenario(format!("space grid needs >= 256 points, got {}", grid.n_points)));
    }
    if !(config.dt > 0.0) || config.dt > dx {
        return Err(Error::Scenario(format!("time step {} must lie in (0, dx = {dx}]", config.dt)));
    }
    let horizon = solution.scenario.grid.t_end;
    if output_times.iter().any(|&t| t < initial.t || t > horizon) || output_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Scenario(format!(
            "output times must be sorted inside [{}, {horizon}]",
            initial.t
        )));
    }
    let mass = &solution.scenario.mass;
    let drive = &solution.scenario.drive;
    let xs = grid.points();
    let n_in = grid.n_points - 2;
    let mut psi = initial.values.clone();
    psi[0] = Complex64::new(0.0, 0.0);
    psi[grid.n_points - 1] = Complex64::new(0.0, 0.0);
    let norm0 = eta_norm(&ComplexField { grid, t: initial.t, values: psi.clone() }, solution)?;

    let mut diag = vec![Complex64::new(0.0, 0.0); n_in];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n_in];
    let mut scratch = vec![Complex64::new(0.0, 0.0); n_in];
    let mut t = initial.t;
    let mut out = Vec::with_capacity(output_times.len());
    let mut steps_since_check = 0;
    for &target in output_times {
        let n_steps = ((target - t) / config.dt).ceil() as usize;
        let dt = if n_steps > 0 { (target - t) / n_steps as f64 } else { 0.0 };
        for step in 0..n_steps {
            let t_mid = t + (step as f64 + 0.5) * dt;
            let m = mass.eval(t_mid)?;
            let f = drive.eval(t_mid)?;
            let kinetic = 1.0 / (m * dx * dx);
            let off = I * (0.5 * dt) * (-0.5 * kinetic);
            for j in 0..n_in {
                let x = xs[j + 1];
                let h_diag = Complex64::new(kinetic, 0.0) + I * (f * x);
                diag[j] = 1.0 + I * (0.5 * dt) * h_diag;
                let explicit_diag = 1.0 - I * (0.5 * dt) * h_diag;
                rhs[j] = explicit_diag * psi[j + 1] - off * (psi[j] + psi[j + 2]);
            }
            solve_tridiagonal(&diag, off, &mut rhs, &mut scratch);
            psi[1..=n_in].copy_from_slice(&rhs);
            steps_since_check += 1;
            if steps_since_check >= config.check_every {
                steps_since_check = 0;
                let now = t + (step as f64 + 1.0) * dt;
                check_stability(&psi, grid, now, norm0, solution)?;
            }
        }
        t = target;
        check_stability(&psi, grid, t, norm0, solution)?;
        out.push(ComplexField { grid, t, values: psi.clone() });
    }
    Ok(out)
}

fn check_stability(psi: &[Complex64], grid: SpaceGrid, t: f64, norm0: f64, solution: &Solution) -> Result<()> {
    let n = eta_norm(&ComplexField { grid, t, values: psi.to_vec() }, solution)?;
    let drift = (n / norm0 - 1.0).abs();
    if !drift.is_finite() || drift > INSTABILITY_DRIFT {
        return Err(Error::Unstable { t, drift });
    }
    Ok(())
}

/// Hermitian-picture field `ρΨ` of a sampled `Ψ`, using the ordering
/// `ρ = e^{−iαβ/8} e^{−αp/2} e^{βx/2}`.
///
/// The pointwise factor goes first so the Fourier-space factor `e^{−αk/2}`
/// acts on a spectrum already centred like that of `ρΨ`. Only the band of
/// modes around the spectral peak above `1e-8` of it is kept, so round-off and
/// boundary noise are not amplified by `e^{−αk/2}`.
pub fn hermitian_samples(field: &ComplexField, solution: &Solution) -> Result<Vec<Complex64>> {
    let t = field.t;
    let alpha = solution.metric.alpha(t)?;
    let beta = solution.metric.beta(t)?;
    let n = field.values.len();
    let dx = field.grid.dx();
    // e^{βx/2}Ψ is localized like ρΨ; outside x̄ ± 12Δx it holds only
    // exponentially amplified discretization error.
    let center = solution.density_center(t)?;
    let reach = SUPPORT_WIDTHS * solution.width(t)?;
    let mut spectrum: Vec<Complex64> = field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = field.grid.x(i);
            if (x - center).abs() <= reach {
                v * (0.5 * beta * x).exp()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut spectrum);
    // Keep the contiguous band of modes around the spectral peak that stays
    // above the floor; everything outside is discretization noise.
    let (peak_at, peak) = spectrum
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |best, (j, v)| if v.norm() > best.1 { (j, v.norm()) } else { best });
    let above = |j: usize| spectrum[j % n].norm() >= SPECTRAL_FLOOR * peak;
    let mut upper = 0;
    while upper < n / 2 && above(peak_at + upper + 1) {
        upper += 1;
    }
    let mut lower = 0;
    while lower < n / 2 && above(peak_at + n - lower - 1) {
        lower += 1;
    }
    let mut band = vec![Complex64::new(0.0, 0.0); n];
    let phase = Complex64::from_polar(1.0 / n as f64, -alpha * beta / 8.0);
    for offset in -(lower as isize)..=upper as isize {
        let j = (peak_at as isize + offset).rem_euclid(n as isize) as usize;
        let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * 2.0 * PI / (n as f64 * dx);
        band[j] = spectrum[j] * phase * (-0.5 * alpha * k).exp();
    }
    let mut spectrum = band;
    planner.plan_fft_inverse(n).process(&mut spectrum);
    Ok(spectrum)
}

/// `⟨Ψ|η|Ψ⟩ = ‖ρΨ‖²` of a sampled field.
pub fn eta_norm(field: &ComplexField, solution: &Solution) -> Result<f64> {
    let rho = hermitian_samples(field, solution)?;
    let d: Vec<f64> = rho.iter().map(|v| v.norm_sqr()).collect();
    Ok(simpson(&d, field.grid.dx()))
}

/// Textbook free Gaussian for `H = p²/2m`, width `s`, mean momentum `k0`.
pub fn free_gaussian(x: f64, t: f64, x0: f64, k0: f64, s: f64, m: f64) -> Complex64 {
    let tau = t / (2.0 * m * s * s);
    let spread = Complex64::new(1.0, tau);
    let shift = x - x0 - k0 * t / m;
    let amplitude = (2.0 * PI * s * s).powf(-0.25) / spread.sqrt();
    amplitude * (-(shift * shift) / (4.0 * s * s * spread) + I * (k0 * x - 0.5 * k0 * k0 * t / m)).exp()
}

/// Space grid with spacing `dx` covering `12σ` around both the raw and the
/// Hermitian-picture packet at every sample time up to `t_end`.
pub fn covering_grid(solution: &Solution, t_end: f64, dx: f64) -> Result<SpaceGrid> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let samples = 64;
    for k in 0..=samples {
        let t = t_end * k as f64 / samples as f64;
        let (mean, sd) = solution.raw_profile(t)?;
        let c = solution.density_center(t)?;
        let w = solution.width(t)?;
        lo = lo.min(mean - 12.0 * sd).min(c - 12.0 * w);
        hi = hi.max(mean + 12.0 * sd).max(c + 12.0 * w);
    }
    SpaceGrid::with_spacing(lo.floor(), hi.ceil(), dx)
}

/// Self-convergence in dt: `‖u(dt) − u(dt/2)‖ / ‖u(dt/2) − u(dt/4)‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub dt: f64,
    pub coarse_gap: f64,
    pub fine_gap: f64,
    pub ratio: f64,
}

pub fn dt_convergence(solution: &Solution, initial: &ComplexField, t_end: f64, dt: f64) -> Result<ConvergenceReport> {
    let run = |dt: f64| -> Result<ComplexField> {
        let mut fields = propagate_tdse(initial, solution, &PropagatorConfig::new(dt), &[t_end])?;
        Ok(fields.remove(0))
    };
    let (u1, u2, u3) = (run(dt)?, run(0.5 * dt)?, run(0.25 * dt)?);
    let coarse_gap = u1.l2_relative_error(&u2);
    let fine_gap = u2.l2_relative_error(&u3);
    Ok(ConvergenceReport { dt, coarse_gap, fine_gap, ratio: coarse_gap / fine_gap })
}
