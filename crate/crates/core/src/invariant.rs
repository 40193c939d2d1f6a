//! Linear pseudo-Hermitian invariant `I(t) = a(x − iα/2) + b(p − iβ/2) + c`,
//! its metric `η = exp[βx − αp]`, and the complex classical trajectory.
//!
//! With ħ = 1 the invariant condition fixes `a = a0`, `c = c0` and
//! `b(t) = b0 − a0 ∫₀ᵗ dt′/m`. Reality of the Lewis–Riesenfeld phase forces
//! `β̇ = −2f` and `mα̇ = β`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::profiles::Profile;
use crate::quadrature::{cumulative_integral, nested_integral, CumulativeIntegral, TimeGrid};
use crate::wavepacket::PacketParams;

/// Fraction of the first root of b(t) kept as the usable horizon.
pub const WINDOW_FRACTION: f64 = 0.95;

const CONSISTENCY_TOL: f64 = 1e-12;

/// The physical problem and every constant needed to build its solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mass: Profile,
    pub drive: Profile,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub alpha0: f64,
    pub beta0: f64,
    /// Initial classical position and momentum.
    pub x0: f64,
    pub p0: f64,
    pub packet: PacketParams,
    pub grid: TimeGrid,
    /// Skip the `x0 = d0`, `p0 = −c0/b0`, `I0 = a0·d0` relations.
    pub override_consistency: bool,
}

impl Scenario {
    pub const HBAR: f64 = 1.0;
    pub const DEFAULT_HORIZON: f64 = 1.8;

    /// Figure parameters `q0 = p0 = a0 = m = d = 1`, `b0 = 2`, with drive `cos t`.
    pub fn reference() -> Self {
        Self::consistent(Profile::Constant(1.0), Profile::Cosine { amplitude: 1.0, omega: 1.0 }, 1.0, 2.0, 1.0, 1.0, 1.0)
            .expect("reference scenario is valid")
    }

    /// Builds a scenario whose derived constants satisfy the consistency
    /// relations: `d0 = x0`, `c0 = −p0·b0`, `I0 = a0·x0`, `α0 = β0 = 0`.
    pub fn consistent(mass: Profile, drive: Profile, a0: f64, b0: f64, d: f64, x0: f64, p0: f64) -> Result<Self> {
        let s = Self {
            mass,
            drive,
            a0,
            b0,
            c0: -p0 * b0,
            alpha0: 0.0,
            beta0: 0.0,
            x0,
            p0,
            packet: PacketParams { d, d0: x0, i0: a0 * x0 },
            grid: TimeGrid::new(0.0, Self::DEFAULT_HORIZON, TimeGrid::DEFAULT_STEPS)?,
            override_consistency: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_drive(mut self, drive: Profile) -> Self {
        self.drive = drive;
        self
    }

    pub fn with_horizon(mut self, t_end: f64) -> Result<Self> {
        self.grid = TimeGrid::new(0.0, t_end, self.grid.n_steps)?;
        Ok(self)
    }

    pub fn with_steps(mut self, n_steps: usize) -> Result<Self> {
        self.grid = TimeGrid::new(self.grid.t_start, self.grid.t_end, n_steps)?;
        Ok(self)
    }

    /// Free-particle limit with the reference packet.
    pub fn is_hermitian_limit(&self) -> bool {
        self.drive.is_identically_zero() && self.alpha0 == 0.0 && self.beta0 == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("a0", self.a0),
            ("b0", self.b0),
            ("c0", self.c0),
            ("alpha0", self.alpha0),
            ("beta0", self.beta0),
            ("x0", self.x0),
            ("p0", self.p0),
            ("d", self.packet.d),
            ("d0", self.packet.d0),
            ("I0", self.packet.i0),
        ];
        if let Some((name, v)) = named.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Scenario(format!("{name} = {v} is not finite")));
        }
        if self.packet.d <= 0.0 {
            return Err(Error::Scenario(format!("d must be positive, got {}", self.packet.d)));
        }
        if self.b0 <= 0.0 {
            return Err(Error::Scenario(format!("b0 must be positive, got {}", self.b0)));
        }
        let g = &self.grid;
        for (name, p) in [("mass", &self.mass), ("drive", &self.drive)] {
            let (lo, hi) = p.span();
            if g.t_start < lo || g.t_end > hi {
                return Err(Error::Scenario(format!(
                    "{name} profile covers [{lo}, {hi}] but the horizon is [{}, {}]",
                    g.t_start, g.t_end
                )));
            }
        }
        let h = g.step();
        for k in 0..=2 * g.n_steps {
            let t = g.t_start + 0.5 * k as f64 * h;
            let m = self.mass.value(t.min(g.t_end));
            if !(m > 0.0) {
                return Err(Error::Scenario(format!("mass must be positive, m({t}) = {m}")));
            }
        }
        if !self.override_consistency {
            let scale = 1.0 + self.x0.abs() + self.p0.abs() + self.packet.i0.abs();
            let checks = [
                ("x0 = d0", self.x0 - self.packet.d0),
                ("p0 = -c0/b0", self.p0 + self.c0 / self.b0),
                ("I0 = a0*d0", self.packet.i0 - self.a0 * self.packet.d0),
            ];
            for (rel, gap) in checks {
                if gap.abs() > CONSISTENCY_TOL * scale {
                    return Err(Error::Scenario(format!(
                        "consistency relation {rel} violated by {gap:e} (use the override flag to run anyway)"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `a = a0`, `c = c0`, `b(t) = b0 − a0 ∫₀ᵗ dt′/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantCoefficients {
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    /// `∫₀ᵗ dt′/m(t′)`.
    pub mass_integral: CumulativeIntegral,
}

impl InvariantCoefficients {
    pub fn b(&self, t: f64) -> Result<f64> {
        Ok(self.b0 - self.a0 * self.mass_integral.eval(t)?)
    }

    pub fn b_dot(&self, t: f64) -> Result<f64> {
        Ok(-self.a0 * self.mass_integral.rate(t)?)
    }

    /// Tabulated b on the grid nodes.
    pub fn b_nodes(&self) -> Vec<f64> {
        self.mass_integral.values.iter().map(|m| self.b0 - self.a0 * m).collect()
    }

    /// b(t), failing when it is too close to zero for the closed forms.
    pub fn b_nonsingular(&self, t: f64) -> Result<f64> {
        let b = self.b(t)?;
        if b.abs() < 1e-12 * self.b0.abs() {
            return Err(Error::Singular { t, b });
        }
        Ok(b)
    }
}

pub fn build_coefficients(scenario: &Scenario) -> Result<InvariantCoefficients> {
    let mass = &scenario.mass;
    let m_int = cumulative_integral(|t| 1.0 / mass.value(t), &scenario.grid)?;
    let coeffs = InvariantCoefficients {
        a0: scenario.a0,
        b0: scenario.b0,
        c0: scenario.c0,
        mass_integral: m_int,
    };
    if let Some(k) = coeffs.b_nodes().iter().position(|&b| b <= 0.0) {
        let grid = &scenario.grid;
        let (mut lo, mut hi) = (grid.node(k - 1), grid.node(k));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if coeffs.b(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        let t_star = 0.5 * (lo + hi);
        return Err(Error::ValidityWindow { t_star, suggested: WINDOW_FRACTION * t_star });
    }
    Ok(coeffs)
}

/// Metric `η = exp[β(t)x − α(t)p]` with `β = β0 − 2∫f` and `α = α0 + ∫β/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricParams {
    pub alpha0: f64,
    pub beta0: f64,
    /// `∫₀ᵗ f`.
    pub drive_integral: CumulativeIntegral,
    /// `∫₀ᵗ β/m`.
    pub alpha_integral: CumulativeIntegral,
    drive: Profile,
    mass: Profile,
}

impl MetricParams {
    pub fn beta(&self, t: f64) -> Result<f64> {
        Ok(self.beta0 - 2.0 * self.drive_integral.eval(t)?)
    }

    pub fn alpha(&self, t: f64) -> Result<f64> {
        Ok(self.alpha0 + self.alpha_integral.eval(t)?)
    }

    pub fn beta_dot(&self, t: f64) -> Result<f64> {
        Ok(-2.0 * self.drive.eval(t)?)
    }

    pub fn alpha_dot(&self, t: f64) -> Result<f64> {
        Ok(self.beta(t)? / self.mass.eval(t)?)
    }

    pub fn beta_nodes(&self) -> Vec<f64> {
        self.drive_integral.values.iter().map(|f| self.beta0 - 2.0 * f).collect()
    }

    pub fn alpha_nodes(&self) -> Vec<f64> {
        self.alpha_integral.values.iter().map(|a| self.alpha0 + a).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.alpha0 == 0.0 && self.beta0 == 0.0 && self.drive.is_identically_zero()
    }
}

pub fn build_metric(scenario: &Scenario) -> Result<MetricParams> {
    let grid = &scenario.grid;
    let drive = &scenario.drive;
    let mass = &scenario.mass;
    let drive_integral = cumulative_integral(|t| drive.value(t), grid)?;
    let beta0 = scenario.beta0;
    // β/m with β taken from the tabulated drive integral
    let alpha_integral = cumulative_integral(
        |t| match drive_integral.eval(t) {
            Ok(f_int) => (beta0 - 2.0 * f_int) / mass.value(t),
            Err(_) => f64::NAN,
        },
        grid,
    )?;
    Ok(MetricParams {
        alpha0: scenario.alpha0,
        beta0,
        drive_integral,
        alpha_integral,
        drive: drive.clone(),
        mass: mass.clone(),
    })
}

/// `p_c = p0 − i∫f`, `x_c = x0 + p0∫dt/m − i∫(1/m)∫f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalTrajectory {
    pub x0: f64,
    pub p0: f64,
    pub mass_integral: CumulativeIntegral,
    pub drive_integral: CumulativeIntegral,
    /// `∫₀ᵗ (1/m(t′)) ∫₀^{t′} f(τ) dτ dt′`.
    pub nested_drive: CumulativeIntegral,
}

impl ClassicalTrajectory {
    pub fn x_c(&self, t: f64) -> Result<Complex64> {
        Ok(Complex64::new(
            self.x0 + self.p0 * self.mass_integral.eval(t)?,
            -self.nested_drive.eval(t)?,
        ))
    }

    pub fn p_c(&self, t: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.p0, -self.drive_integral.eval(t)?))
    }
}

pub fn classical_trajectory(scenario: &Scenario) -> Result<ClassicalTrajectory> {
    let grid = &scenario.grid;
    let mass = &scenario.mass;
    let drive = &scenario.drive;
    Ok(ClassicalTrajectory {
        x0: scenario.x0,
        p0: scenario.p0,
        mass_integral: cumulative_integral(|t| 1.0 / mass.value(t), grid)?,
        drive_integral: cumulative_integral(|t| drive.value(t), grid)?,
        nested_drive: nested_integral(|t| drive.value(t), |t| 1.0 / mass.value(t), grid)?,
    })
}

/// Finite-difference check of `ḃ = −a0/m` and of
/// `f = −(1/2b)(α̇a0 + β̇b − βa0/m)` at interior nodes.
pub fn constraint_residuals(
    coeffs: &InvariantCoefficients,
    metric: &MetricParams,
    scenario: &Scenario,
) -> Result<(f64, f64)> {
    let grid = &scenario.grid;
    let h = grid.step();
    let b = coeffs.b_nodes();
    let alpha = metric.alpha_nodes();
    let beta = metric.beta_nodes();
    let a0 = coeffs.a0;
    let mut r_b: f64 = 0.0;
    let mut r_f: f64 = 0.0;
    for k in 1..grid.n_steps {
        let t = grid.node(k);
        let m = scenario.mass.eval(t)?;
        let f = scenario.drive.eval(t)?;
        let db = (b[k + 1] - b[k - 1]) / (2.0 * h);
        let da = (alpha[k + 1] - alpha[k - 1]) / (2.0 * h);
        let dbeta = (beta[k + 1] - beta[k - 1]) / (2.0 * h);
        r_b = r_b.max((db + a0 / m).abs());
        r_f = r_f.max((f + (da * a0 + dbeta * b[k] - beta[k] * a0 / m) / (2.0 * b[k])).abs());
    }
    Ok((r_b, r_f))
}
