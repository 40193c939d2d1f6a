//! η-expectation values, uncertainties and normalization.
//!
//! `⟨O⟩_η = ⟨Ψ|ηO|Ψ⟩ = ⟨ρΨ|ρOρ⁻¹|ρΨ⟩` with `ρxρ⁻¹ = x + iα/2` and
//! `ρpρ⁻¹ = p + iβ/2`. Variances are taken in the ρ picture, where they are
//! real.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::simpson;
use crate::stencil;
use crate::wavepacket::{PacketSource, Solution, SpaceGrid};

/// Nodes used by the quadrature oracle by default.
pub const MOMENT_GRID_POINTS: usize = 8193;
/// Half-width of the default quadrature grid, in units of Δx.
pub const MOMENT_GRID_WIDTHS: f64 = 12.0;

const BOUNDARY_DENSITY_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub t: f64,
    pub x_eta: Complex64,
    pub p_eta: Complex64,
    pub dx: f64,
    pub dp: f64,
    pub product: f64,
    pub norm: f64,
}

/// Closed-form moments.
pub fn moments_closed_form(solution: &Solution, t: f64) -> Result<MomentReport> {
    let at = solution.instant(t)?;
    let c = &solution.coeffs;
    let d = solution.packet_params().d;
    let d0 = solution.packet_params().d0;
    let x_eta = Complex64::new(d0 - c.c0 / c.b0 * at.mass_int, 0.5 * at.alpha);
    let p_eta = Complex64::new(-c.c0 / c.b0, 0.5 * at.beta);
    let b = at.b;
    let dx = b / d.sqrt() * (d * d + at.spread * at.spread).sqrt();
    let bracket = at.mass_int / (4.0 * c.b0 * d * b) - c.a0 / b * dx * dx;
    let product = (0.25 + bracket * bracket).sqrt();
    let dp = product / dx;
    // |prefactor|² · √(2π) Δx
    let norm = solution.density_amplitude(t)? * (2.0 * std::f64::consts::PI).sqrt() * dx;
    Ok(MomentReport { t, x_eta, p_eta, dx, dp, product, norm })
}

/// Grid spanning `x̄ ± 12Δx` with the default node count.
pub fn default_moment_grid(solution: &Solution, t: f64) -> Result<SpaceGrid> {
    let c = solution.density_center(t)?;
    let w = solution.width(t)?;
    SpaceGrid::centered(c, MOMENT_GRID_WIDTHS * w, MOMENT_GRID_POINTS)
}

fn hermitian_field(solution: &Solution, t: f64, grid: SpaceGrid) -> Result<Vec<Complex64>> {
    let field = solution.dyson_transform(PacketSource::Packet, t, grid)?;
    let v = field.values;
    let boundary = v[0].norm_sqr().max(v[v.len() - 1].norm_sqr());
    if boundary > BOUNDARY_DENSITY_LIMIT {
        return Err(Error::GridCoverage { boundary });
    }
    Ok(v)
}

/// Moments by real-space quadrature of `ρΨ` with fourth-order differences
/// for p. Two boundary rows on each side are left out.
pub fn moments_quadrature(solution: &Solution, t: f64, grid: SpaceGrid) -> Result<MomentReport> {
    let at = solution.instant(t)?;
    let psi = hermitian_field(solution, t, grid)?;
    let h = grid.dx();
    let inner = 2..psi.len() - 2;
    let mut dens = Vec::with_capacity(inner.len());
    let mut x1 = Vec::with_capacity(inner.len());
    let mut x2 = Vec::with_capacity(inner.len());
    let mut p1 = Vec::with_capacity(inner.len());
    let mut p2 = Vec::with_capacity(inner.len());
    for i in inner {
        let x = grid.x(i);
        let rho = psi[i].norm_sqr();
        let dpsi = stencil::d1(&psi, i, h);
        dens.push(rho);
        x1.push(x * rho);
        x2.push(x * x * rho);
        p1.push(psi[i].conj() * (-Complex64::i() * dpsi));
        p2.push(dpsi.norm_sqr());
    }
    let norm = simpson(&dens, h);
    let mean_x = simpson(&x1, h) / norm;
    let mean_x2 = simpson(&x2, h) / norm;
    let mean_p = simpson(&p1, h) / norm;
    let mean_p2 = simpson(&p2, h) / norm;
    let dx = (mean_x2 - mean_x * mean_x).max(0.0).sqrt();
    let dp = (mean_p2 - mean_p.re * mean_p.re).max(0.0).sqrt();
    Ok(MomentReport {
        t,
        x_eta: Complex64::new(mean_x, 0.5 * at.alpha),
        p_eta: Complex64::new(mean_p.re, mean_p.im + 0.5 * at.beta),
        dx,
        dp,
        product: dx * dp,
        norm,
    })
}

/// `∫|ρΨ|² dx` by Simpson quadrature on `grid`.
pub fn normalization(solution: &Solution, t: f64, grid: SpaceGrid) -> Result<f64> {
    let psi = hermitian_field(solution, t, grid)?;
    let dens: Vec<f64> = psi.iter().map(|v| v.norm_sqr()).collect();
    Ok(simpson(&dens, grid.dx()))
}

/// Closed-form moments at each requested time.
pub fn uncertainty_series(solution: &Solution, times: &[f64]) -> Result<Vec<MomentReport>> {
    times.iter().map(|&t| moments_closed_form(solution, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::Scenario;
    use crate::profiles::Profile;

    fn reference() -> Solution {
        Solution::new(&Scenario::reference()).unwrap()
    }

    #[test]
    fn closed_form_at_start() {
        let r = moments_closed_form(&reference(), 0.0).unwrap();
        assert_eq!(r.x_eta, Complex64::new(1.0, 0.0));
        assert_eq!(r.p_eta, Complex64::new(1.0, 0.0));
        assert!((r.dx - 2.0).abs() < 1e-15);
        assert!((r.dp - 4.25f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((r.product - 17f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((r.norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_at_unit_time() {
        let r = moments_closed_form(&reference(), 1.0).unwrap();
        assert!((r.dx - 17f64.sqrt() / 4.0).abs() < 1e-10);
        assert!((r.product - 1.0625).abs() < 1e-10);
        assert!((r.x_eta - Complex64::new(2.0, -0.459697694)).norm() < 1e-9);
        assert!((r.p_eta - Complex64::new(1.0, -0.841470985)).norm() < 1e-9);
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let s = reference();
        for t in [0.0, 0.5, 1.0, 1.5, 1.8] {
            let c = moments_closed_form(&s, t).unwrap();
            let q = moments_quadrature(&s, t, default_moment_grid(&s, t).unwrap()).unwrap();
            assert!((c.x_eta - q.x_eta).norm() <= 1e-5, "t={t} x {c:?} {q:?}");
            assert!((c.p_eta - q.p_eta).norm() <= 1e-5, "t={t} p");
            assert!((c.dx - q.dx).abs() <= 1e-5, "t={t} dx");
            assert!((c.dp - q.dp).abs() <= 1e-5, "t={t} dp {} {}", c.dp, q.dp);
            assert!((c.product - q.product).abs() <= 1e-5);
            assert!(q.product >= 0.5);
        }
    }

    #[test]
    fn hermitian_limit_mean_is_real() {
        let s = Solution::new(&Scenario::reference().with_drive(Profile::zero())).unwrap();
        let q = moments_quadrature(&s, 0.0, default_moment_grid(&s, 0.0).unwrap()).unwrap();
        assert!(q.x_eta.im.abs() <= 1e-10);
    }

    #[test]
    fn normalization_inside_window() {
        let s = reference();
        for (t, tol) in [(0.0, 1e-8), (1.0, 1e-8), (1.8, 1e-7)] {
            let n = normalization(&s, t, default_moment_grid(&s, t).unwrap()).unwrap();
            assert!((n - 1.0).abs() <= tol, "t={t} norm={n}");
        }
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let s = reference();
        let grid = SpaceGrid::centered(1.0, 4.0, 1001).unwrap();
        assert!(matches!(normalization(&s, 0.0, grid), Err(Error::GridCoverage { .. })));
    }

    #[test]
    fn series_values() {
        let s = reference();
        let r = uncertainty_series(&s, &[0.0, 1.0]).unwrap();
        assert!((r[0].dx.powi(2) - 4.0).abs() < 1e-14);
        assert!((r[0].dp.powi(2) - 17.0 / 16.0).abs() < 1e-14);
        assert!((r[1].product - 1.0625).abs() < 1e-10);
        let all = uncertainty_series(&s, &s.scenario.grid.nodes().collect::<Vec<_>>()).unwrap();
        assert!(all.iter().all(|r| r.product >= 0.5 - 1e-12));
    }

    #[test]
    fn classical_correspondence_on_grid() {
        let s = reference();
        for t in s.scenario.grid.nodes() {
            let r = moments_closed_form(&s, t).unwrap();
            assert!((r.x_eta - s.trajectory.x_c(t).unwrap()).norm() <= 1e-9);
            assert!((r.p_eta - s.trajectory.p_c(t).unwrap()).norm() <= 1e-9);
        }
    }

    #[test]
    fn ehrenfest_relations() {
        let s = reference();
        let h = 1e-3;
        for t in [0.1, 0.6, 1.1, 1.6] {
            let x = |t: f64| moments_closed_form(&s, t).unwrap().x_eta;
            let p = |t: f64| moments_closed_form(&s, t).unwrap().p_eta;
            let dx = stencil::d1_fn(x, t, h);
            let dp = stencil::d1_fn(p, t, h);
            let m = s.scenario.mass.eval(t).unwrap();
            let f = s.scenario.drive.eval(t).unwrap();
            assert!((dx - p(t) / m).norm() <= 1e-6);
            assert!((dp - Complex64::new(0.0, -f)).norm() <= 1e-6);
        }
    }

    #[test]
    fn imaginary_parts_follow_metric() {
        let s = reference();
        for t in [0.3, 1.4] {
            let r = moments_closed_form(&s, t).unwrap();
            assert_eq!(r.x_eta.im, 0.5 * s.metric.alpha(t).unwrap());
            assert_eq!(r.p_eta.im, 0.5 * s.metric.beta(t).unwrap());
        }
        let free = Solution::new(&Scenario::reference().with_drive(Profile::zero())).unwrap();
        let r = moments_closed_form(&free, 1.2).unwrap();
        assert_eq!((r.x_eta.im, r.p_eta.im), (0.0, 0.0));
    }

    #[test]
    fn scaling_the_invariant_leaves_observables_unchanged() {
        let base = Scenario::reference();
        let s = 2.5;
        let mut scaled = base.clone();
        scaled.a0 *= s;
        scaled.b0 *= s;
        scaled.c0 *= s;
        scaled.packet.i0 *= s;
        scaled.packet.d /= s * s;
        let (a, b) = (Solution::new(&base).unwrap(), Solution::new(&scaled).unwrap());
        for t in [0.0, 0.9, 1.7] {
            let (ra, rb) = (moments_closed_form(&a, t).unwrap(), moments_closed_form(&b, t).unwrap());
            assert!((a.coeffs.b(t).unwrap() / 2.0 - b.coeffs.b(t).unwrap() / 5.0).abs() < 1e-12);
            assert!((ra.dx - rb.dx).abs() < 1e-12);
            assert!((ra.dp - rb.dp).abs() < 1e-12);
            assert!((ra.x_eta - rb.x_eta).norm() < 1e-12);
            assert!((a.density(1.3, t).unwrap() - b.density(1.3, t).unwrap()).abs() < 1e-12);
        }
    }
}
