//! The property suite behind `pseudoinv verify`.

use serde::Serialize;

use crate::error::Result;
use crate::invariant::constraint_residuals;
use crate::observables::{default_moment_grid, moments_closed_form, moments_quadrature, normalization};
use crate::oracle::{
    covering_grid, dt_convergence, eta_norm, inner_product_report, propagate_tdse, pt_inner_product,
    pt_inner_product_regularized, tdse_residual, PropagatorConfig, NON_DELTA_THRESHOLD,
};
use crate::profiles::Profile;
use crate::wavepacket::{eigen_residual, eigenfunction, ComplexField, LambdaWindow, Solution, SpaceGrid};

pub const REPORT_NAME: &str = "verify_report.json";

const PROBE_TIMES: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 1.8];
const RESIDUAL_TIMES: [f64; 3] = [0.25, 0.75, 1.25];
const CONVERGENCE_DT: f64 = 4e-3;
const SMEAR_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
    Above,
    Within { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub passed: bool,
    pub skipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn measure(name: &str, value: f64, threshold: f64, bound: Bound) -> Self {
        let passed = match bound {
            Bound::AtMost => value <= threshold,
            Bound::AtLeast => value >= threshold,
            Bound::Above => value > threshold,
            Bound::Within { lo, hi } => (lo..=hi).contains(&value),
        };
        Self { name: name.into(), value, threshold, bound, passed, skipped: false, detail: None }
    }

    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self::measure(name, value, threshold, Bound::AtMost)
    }

    fn skipped(name: &str, why: &str) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            threshold: f64::NAN,
            bound: Bound::AtMost,
            passed: true,
            skipped: true,
            detail: Some(why.into()),
        }
    }

    fn errored(name: &str, err: &crate::Error) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            threshold: f64::NAN,
            bound: Bound::AtMost,
            passed: false,
            skipped: false,
            detail: Some(err.to_string()),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub hermitian_limit: bool,
    pub phase_corrupted: bool,
    pub failures: Vec<String>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub propagation_dx: f64,
    pub propagation_dt: f64,
    /// Points of the x-mesh for the drive-independence density comparison.
    pub space_points: usize,
}

fn record(checks: &mut Vec<Check>, name: &str, outcome: Result<Vec<Check>>) {
    match outcome {
        Ok(mut found) => checks.append(&mut found),
        Err(e) => checks.push(Check::errored(name, &e)),
    }
}

fn probe_times(t_max: f64, candidates: &[f64]) -> Vec<f64> {
    let mut times: Vec<f64> = candidates.iter().copied().filter(|&t| t < t_max).collect();
    times.push(t_max);
    times
}

pub fn run_verification(solution: &Solution, settings: &VerifySettings) -> VerifyReport {
    let scenario = &solution.scenario;
    let t_max = scenario.grid.t_end;
    let hermitian_limit = scenario.is_hermitian_limit();
    let drive_free = scenario.drive.is_identically_zero();
    let compare_at = t_max.min(1.0);
    let nodes: Vec<f64> = scenario.grid.nodes().collect();
    let mut checks = Vec::new();

    record(&mut checks, "uncertainty_bound", (|| {
        let mut lowest = f64::INFINITY;
        for &t in &nodes {
            lowest = lowest.min(moments_closed_form(solution, t)?.product);
        }
        Ok(vec![Check::measure("uncertainty_bound", lowest, 0.5 - 1e-12, Bound::AtLeast)])
    })());

    record(&mut checks, "classical_correspondence", (|| {
        let (mut dx, mut dp) = (0.0f64, 0.0f64);
        for &t in &nodes {
            let r = moments_closed_form(solution, t)?;
            dx = dx.max((r.x_eta - solution.trajectory.x_c(t)?).norm());
            dp = dp.max((r.p_eta - solution.trajectory.p_c(t)?).norm());
        }
        Ok(vec![
            Check::at_most("classical_position", dx, 1e-9),
            Check::at_most("classical_momentum", dp, 1e-9),
        ])
    })());

    record(&mut checks, "metric_constraints", (|| {
        let (quasi, continuity) = constraint_residuals(&solution.coeffs, &solution.metric, scenario)?;
        Ok(vec![Check::at_most("metric_constraints", quasi.max(continuity), 1e-6)])
    })());

    record(&mut checks, "eigen_residual", (|| {
        let grid = SpaceGrid::new(-10.0, 10.0, 8001)?;
        let mut worst: f64 = 0.0;
        for lambda in [0.0, 1.0] {
            let field = ComplexField::from_fn(grid, 0.0, |x| {
                eigenfunction(lambda, x, 0.0, &solution.coeffs, &solution.metric)
            })?;
            worst = worst.max(eigen_residual(lambda, &field, &solution.coeffs, &solution.metric)?);
        }
        Ok(vec![Check::at_most("eigen_residual", worst, 1e-6)])
    })());

    record(&mut checks, "tdse_residual", (|| {
        let times: Vec<f64> = RESIDUAL_TIMES.iter().copied().filter(|&t| t < t_max).collect();
        let times = if times.is_empty() { vec![0.5 * t_max] } else { times };
        let r = tdse_residual(solution, &times)?;
        Ok(vec![Check::at_most("tdse_residual", r.max_pointwise_error, 1e-5)
            .with_detail(format!("probe times {:?}, l2 {:e}", r.times, r.l2_relative_error))])
    })());

    record(&mut checks, "eta_normalization", (|| {
        let mut worst: f64 = 0.0;
        for t in probe_times(t_max, &PROBE_TIMES) {
            worst = worst.max((normalization(solution, t, default_moment_grid(solution, t)?)? - 1.0).abs());
        }
        Ok(vec![Check::at_most("eta_normalization", worst, 1e-8)])
    })());

    record(&mut checks, "packet_oracle", (|| {
        let window = LambdaWindow::default();
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let t = t_max * k as f64 / 9.0;
            let (mean, sd) = solution.raw_profile(t)?;
            for j in 0..41 {
                let x = mean + 3.0 * sd * (j as f64 / 20.0 - 1.0);
                let closed = solution.packet(x, t)?;
                let quad = solution.packet_quadrature(x, t, &window)?;
                worst = worst.max((closed - quad).norm() / closed.norm());
            }
        }
        Ok(vec![Check::at_most("packet_oracle", worst, 1e-6).with_detail("41 x-points by 10 times")])
    })());

    record(&mut checks, "moment_oracle", (|| {
        let mut worst: f64 = 0.0;
        for t in probe_times(t_max, &PROBE_TIMES) {
            let c = moments_closed_form(solution, t)?;
            let q = moments_quadrature(solution, t, default_moment_grid(solution, t)?)?;
            for gap in [
                (c.x_eta - q.x_eta).norm(),
                (c.p_eta - q.p_eta).norm(),
                (c.dx - q.dx).abs(),
                (c.dp - q.dp).abs(),
                (c.product - q.product).abs(),
            ] {
                worst = worst.max(gap);
            }
        }
        Ok(vec![Check::at_most("moment_oracle", worst, 1e-5)])
    })());

    record(&mut checks, "propagation", (|| {
        let grid = covering_grid(solution, t_max, settings.propagation_dx)?;
        let initial = solution.sample(0.0, grid)?;
        let mut outputs = vec![compare_at];
        if t_max > compare_at {
            outputs.push(t_max);
        }
        let fields = propagate_tdse(&initial, solution, &PropagatorConfig::new(settings.propagation_dt), &outputs)?;
        let exact = solution.sample(compare_at, grid)?;
        let error = fields[0].l2_relative_error(&exact);
        let eta0 = eta_norm(&initial, solution)?;
        let mut drift: f64 = 0.0;
        for f in &fields {
            drift = drift.max((eta_norm(f, solution)? / eta0 - 1.0).abs());
        }
        let l2_drift = (fields[0].norm_sqr() / initial.norm_sqr() - 1.0).abs();
        let detail = format!(
            "dx {}, dt {}, compared at t = {compare_at}",
            settings.propagation_dx, settings.propagation_dt
        );
        let mut found = vec![
            Check::at_most("propagation_vs_closed_form", error, 5e-4).with_detail(detail),
            Check::at_most("eta_norm_drift", drift, 5e-3),
        ];
        if drive_free {
            found.push(Check::at_most("l2_norm_conservation", l2_drift, 5e-3));
        } else {
            found.push(Check::measure("l2_norm_drift", l2_drift, 1e-3, Bound::Above));
        }
        Ok(found)
    })());

    record(&mut checks, "time_convergence", (|| {
        let grid = covering_grid(solution, compare_at, settings.propagation_dx)?;
        let initial = solution.sample(0.0, grid)?;
        let r = dt_convergence(solution, &initial, compare_at, CONVERGENCE_DT.min(settings.propagation_dx))?;
        Ok(vec![Check::measure("time_convergence_ratio", r.ratio, f64::NAN, Bound::Within { lo: 3.5, hi: 4.5 })
            .with_detail(format!("gaps {:e}, {:e} from dt = {}", r.coarse_gap, r.fine_gap, r.dt))])
    })());

    if solution.coeffs.a0 == 0.0 {
        for name in ["pt_fresnel_agreement", "pt_magnitude", "eta_delta_like", "pt_not_delta_like"] {
            checks.push(Check::skipped(name, "a0 = 0: both kernels reduce to a plain delta"));
        }
    } else {
        record(&mut checks, "inner_products", (|| {
            let coeffs = &solution.coeffs;
            let mut fresnel: f64 = 0.0;
            for (lp, l) in [(1.0, 1.0), (-2.0, 3.0), (0.5, -1.0)] {
                let closed = pt_inner_product(lp, l, 0.0, coeffs)?;
                let numeric = pt_inner_product_regularized(lp, l, 0.0, coeffs)?;
                fresnel = fresnel.max((closed - numeric.extrapolated).norm() / closed.norm());
            }
            let expected = (1.0 / (4.0 * std::f64::consts::PI * coeffs.b0 * coeffs.a0.abs())).sqrt();
            let mut magnitude: f64 = 0.0;
            for (lp, l) in [(1.0, 1.0), (-1.5, 3.5), (6.0, -4.0)] {
                magnitude = magnitude.max((pt_inner_product(lp, l, 0.0, coeffs)?.norm() - expected).abs());
            }
            let lambda = solution.packet_params().i0;
            let r = inner_product_report(lambda, lambda, 0.0, coeffs, &solution.metric, SMEAR_WIDTH)?;
            Ok(vec![
                Check::at_most("pt_fresnel_agreement", fresnel, 1e-6),
                Check::at_most("pt_magnitude", magnitude, 1e-6)
                    .with_detail(format!("expected modulus {expected:.12}")),
                Check::at_most("eta_delta_like", r.eta_deviation, 1e-6),
                Check::measure("pt_not_delta_like", r.pt_deviation, NON_DELTA_THRESHOLD, Bound::Above),
            ])
        })());
    }

    record(&mut checks, "drive_independence", (|| {
        let free = Solution::new(&scenario.clone().with_drive(Profile::zero()))?
            .with_phase_terms(solution.phase_terms());
        let grid = crate::cli::output::display_grid(solution, t_max, settings.space_points)?;
        let mut worst: f64 = 0.0;
        for t in probe_times(t_max, &PROBE_TIMES) {
            let (a, b) = (moments_closed_form(solution, t)?, moments_closed_form(&free, t)?);
            worst = worst.max((a.dx - b.dx).abs()).max((a.dp - b.dp).abs()).max((a.product - b.product).abs());
            for x in grid.points() {
                worst = worst.max((solution.density(x, t)? - free.density(x, t)?).abs());
            }
        }
        Ok(vec![Check::at_most("drive_independence", worst, 1e-8)])
    })());

    let failures: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let mut notes = vec![
        "PT kernel: integral of phi_lambda' * phi_lambda without conjugation, evaluated with constant c = c0 and \
         vanishing metric seeds; a time-dependent c only changes its phase, not the delta verdict."
            .to_owned(),
        "The two time-reversal conventions for the PT action are not adjudicated; the kernel is evaluated as \
         defined above."
            .to_owned(),
    ];
    if hermitian_limit {
        notes.push("Hermitian limit: f = 0 and alpha0 = beta0 = 0, so the metric is the identity.".to_owned());
    }
    if drive_free {
        notes.push("Drive is identically zero: plain L2 norm conservation is checked instead of its drift.".to_owned());
    }
    VerifyReport {
        passed: failures.is_empty(),
        hermitian_limit,
        phase_corrupted: solution.phase_terms() != crate::wavepacket::PhaseTerms::Full,
        failures,
        checks,
        notes,
    }
}
