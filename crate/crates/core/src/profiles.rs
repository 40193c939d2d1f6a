//! Time-dependent mass and drive profiles.
//!
//! Profiles are written in the run configuration as `kind:params`, e.g.
//! `constant:1.0`, `cosine:1.0,1.0` (amplitude, angular frequency),
//! `polynomial:c0,c1,c2` or `table:path/to/profile.csv`.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    Cosine { amplitude: f64, omega: f64 },
    /// Coefficients in ascending powers of t.
    Polynomial(Vec<f64>),
    Table(TableProfile),
}

impl Profile {
    pub fn zero() -> Self {
        Profile::Constant(0.0)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Profile::Constant(v) => Ok(*v),
            Profile::Cosine { amplitude, omega } => Ok(amplitude * (omega * t).cos()),
            Profile::Polynomial(c) => Ok(c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)),
            Profile::Table(table) => table.eval(t),
        }
    }

    /// Evaluates a profile already known to cover `t`. Out-of-domain
    /// points map to NaN, which quadrature reports as a non-finite sample.
    pub(crate) fn value(&self, t: f64) -> f64 {
        self.eval(t).unwrap_or(f64::NAN)
    }

    /// Time derivative; used for the metric constraint `beta' = -2 f`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        match self {
            Profile::Constant(_) => Ok(0.0),
            Profile::Cosine { amplitude, omega } => Ok(-amplitude * omega * (omega * t).sin()),
            Profile::Polynomial(c) => Ok(c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * t + k as f64 * ck)),
            Profile::Table(table) => table.derivative(t),
        }
    }

    /// True when the profile vanishes for every t.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            Profile::Constant(v) => *v == 0.0,
            Profile::Cosine { amplitude, .. } => *amplitude == 0.0,
            Profile::Polynomial(c) => c.iter().all(|&ci| ci == 0.0),
            Profile::Table(table) => table.values.iter().all(|&v| v == 0.0),
        }
    }

    /// Domain on which the profile may be evaluated.
    pub fn span(&self) -> (f64, f64) {
        match self {
            Profile::Table(table) => (table.times[0], *table.times.last().unwrap()),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Parses `kind:params`. Relative table paths are resolved against `base`.
    pub fn parse(spec: &str, base: Option<&Path>) -> Result<Self> {
        let (kind, params) = spec
            .split_once(':')
            .ok_or_else(|| Error::Profile(format!("expected `kind:params`, got `{spec}`")))?;
        let kind = kind.trim();
        let params = params.trim();
        match kind {
            "constant" => {
                let v = parse_list(params)?;
                match v.as_slice() {
                    [c] => Ok(Profile::Constant(*c)),
                    _ => Err(Error::Profile(format!("constant takes one value, got `{params}`"))),
                }
            }
            "cosine" => {
                let v = parse_list(params)?;
                match v.as_slice() {
                    [amplitude, omega] => Ok(Profile::Cosine { amplitude: *amplitude, omega: *omega }),
                    _ => Err(Error::Profile(format!(
                        "cosine takes amplitude,omega, got `{params}`"
                    ))),
                }
            }
            "polynomial" => {
                let v = parse_list(params)?;
                if v.is_empty() {
                    return Err(Error::Profile("polynomial needs at least one coefficient".into()));
                }
                Ok(Profile::Polynomial(v))
            }
            "table" => {
                let mut path = PathBuf::from(params);
                if path.is_relative() {
                    if let Some(base) = base {
                        path = base.join(path);
                    }
                }
                TableProfile::from_csv(&path).map(Profile::Table)
            }
            other => Err(Error::Profile(format!("unknown profile kind `{other}`"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(v) => write!(f, "constant:{v}"),
            Profile::Cosine { amplitude, omega } => write!(f, "cosine:{amplitude},{omega}"),
            Profile::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "polynomial:{}", parts.join(","))
            }
            Profile::Table(t) => match &t.source {
                Some(p) => write!(f, "table:{}", p.display()),
                None => write!(f, "table:<inline {} rows>", t.times.len()),
            },
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Profile(format!("`{p}` is not a finite real number")))
        })
        .collect()
}

/// Sampled profile with monotone (Fritsch-Carlson) cubic interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct TableProfile {
    times: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    source: Option<PathBuf>,
}

impl TableProfile {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Profile("table columns differ in length".into()));
        }
        if times.len() < 2 {
            return Err(Error::Profile("table needs at least two rows".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Profile("table times must be strictly increasing".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Profile("table contains non-finite entries".into()));
        }
        let slopes = monotone_slopes(&times, &values);
        Ok(Self { times, values, slopes, source: None })
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Profile(format!("{}: {e}", path.display())))?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Profile(format!(
                    "{}:{}: expected two columns",
                    path.display(),
                    lineno + 1
                )));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(t), Ok(v)) => {
                    times.push(t);
                    values.push(v);
                }
                // header row
                _ if times.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(Error::Profile(format!(
                        "{}:{}: cannot parse `{line}`",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        let mut table = Self::new(times, values)?;
        table.source = Some(path.to_path_buf());
        Ok(table)
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let lo = self.times[0];
        let hi = *self.times.last().unwrap();
        if !(lo..=hi).contains(&t) {
            return Err(Error::Domain { t, lo, hi });
        }
        let k = self.times.partition_point(|&s| s <= t);
        Ok(k.saturating_sub(1).min(self.times.len() - 2))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let k = self.locate(t)?;
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        Ok((2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1)
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        let k = self.locate(t)?;
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let s2 = s * s;
        Ok(((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h)
    }
}

fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let secants: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
    let mut m = vec![0.0; n];
    m[0] = secants[0];
    m[n - 1] = secants[n - 2];
    for k in 1..n - 1 {
        m[k] = if secants[k - 1] * secants[k] <= 0.0 {
            0.0
        } else {
            (secants[k - 1] + secants[k]) / 2.0
        };
    }
    for k in 0..n - 1 {
        if secants[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / secants[k];
        let b = m[k + 1] / secants[k];
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[k] = tau * a * secants[k];
            m[k + 1] = tau * b * secants[k];
        }
    }
    m
}
