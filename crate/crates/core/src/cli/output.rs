//! CSV series and sampling meshes shared by `simulate` and `figures`.

use std::fmt::Write as _;

use crate::error::Result;
use crate::observables::MomentReport;
use crate::wavepacket::{Solution, SpaceGrid};

/// Display window half-width in standard deviations of either picture.
const DISPLAY_WIDTHS: f64 = 8.0;
const DISPLAY_SAMPLES: usize = 64;

/// Builds CSV text with 17 significant digits and LF line endings.
pub struct CsvTable {
    text: String,
    columns: usize,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text, columns: header.len() }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns);
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            write!(self.text, "{v:.16e}").expect("write to String");
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// `k / rate` for `k = 0, 1, …` up to `t_max`, plus `t_max` when it falls
/// between rows.
pub fn output_mesh(t_max: f64, rate: u32) -> Vec<f64> {
    let rate = f64::from(rate.max(1));
    let last = (t_max * rate + 1e-9).floor() as u64;
    let mut times: Vec<f64> = (0..=last).map(|k| k as f64 / rate).filter(|&t| t <= t_max).collect();
    if times.last().is_none_or(|&t| t < t_max) {
        times.push(t_max);
    }
    times
}

/// x-mesh covering `±8σ` of the packet in both pictures over `[0, t_max]`.
pub fn display_grid(solution: &Solution, t_max: f64, n_points: usize) -> Result<SpaceGrid> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..=DISPLAY_SAMPLES {
        let t = t_max * k as f64 / DISPLAY_SAMPLES as f64;
        let (mean, sd) = solution.raw_profile(t)?;
        let c = solution.density_center(t)?;
        let w = solution.width(t)?;
        lo = lo.min(mean - DISPLAY_WIDTHS * sd).min(c - DISPLAY_WIDTHS * w);
        hi = hi.max(mean + DISPLAY_WIDTHS * sd).max(c + DISPLAY_WIDTHS * w);
    }
    SpaceGrid::new(lo.floor(), hi.ceil(), n_points)
}

pub fn moments_table(reports: &[MomentReport]) -> String {
    let mut table = CsvTable::new(&["t", "re_x", "im_x", "re_p", "im_p", "dx2", "dp2", "product", "norm"]);
    for r in reports {
        table.row(&[
            r.t,
            r.x_eta.re,
            r.x_eta.im,
            r.p_eta.re,
            r.p_eta.im,
            r.dx * r.dx,
            r.dp * r.dp,
            r.product,
            r.norm,
        ]);
    }
    table.into_string()
}

/// Non-Hermitian `Ψ` and the physical density `|ρΨ|²` at one time.
pub fn snapshot_table(solution: &Solution, t: f64, grid: SpaceGrid) -> Result<String> {
    let mut table = CsvTable::new(&["x", "re_psi", "im_psi", "density"]);
    for x in grid.points() {
        let psi = solution.packet(x, t)?;
        table.row(&[x, psi.re, psi.im, solution.density(x, t)?]);
    }
    Ok(table.into_string())
}

pub fn variance_table(reports: &[MomentReport]) -> String {
    let mut table = CsvTable::new(&["t", "dx2", "dp2"]);
    for r in reports {
        table.row(&[r.t, r.dx * r.dx, r.dp * r.dp]);
    }
    table.into_string()
}

pub fn product_table(reports: &[MomentReport]) -> String {
    let mut table = CsvTable::new(&["t", "product"]);
    for r in reports {
        table.row(&[r.t, r.product]);
    }
    table.into_string()
}

pub fn density_map_table(solution: &Solution, times: &[f64], grid: SpaceGrid) -> Result<String> {
    let mut table = CsvTable::new(&["t", "x", "density"]);
    for &t in times {
        for x in grid.points() {
            table.row(&[t, x, solution.density(x, t)?]);
        }
    }
    Ok(table.into_string())
}
