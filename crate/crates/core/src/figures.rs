//! Figure data (CSV) and plots (SVG) for the four standard views of the attack.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attack::attack_report;
use crate::error::{Error, Result};
use crate::plot::{LinePlot, Series};
use crate::params::{AttackScenario, ModelOptions, SystemParams};
use crate::table::Table;

/// Attenuation of the lowest-loss hollow-core fibre on record, dB/km.
pub const HOLLOW_CORE_ALPHA: f64 = 0.1419;
/// Channel length for the fixed-length figures, km.
pub const FIXED_LENGTH_KM: f64 = 20.0;

const ALPHA_GRID: (f64, f64, usize) = (0.0, 0.2, 201);
const LENGTH_GRID: (f64, f64, usize) = (0.0, 30.0, 301);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    /// Phase noise with and without the attack against `alpha_low`.
    Fig4,
    /// Information quantities against `alpha_low` at fixed length.
    Fig5,
    /// Information quantities against length for several `alpha_low`.
    Fig6,
    /// Attack efficiency against length.
    Fig7,
}

impl FigureId {
    pub const ALL: [FigureId; 4] = [FigureId::Fig4, FigureId::Fig5, FigureId::Fig6, FigureId::Fig7];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            FigureId::Fig4 => &["alpha_low", "xi_phase_no_attack", "xi_phase_attack", "xi_tole", "tole_ratio"],
            FigureId::Fig5 => &[
                "alpha_low",
                "i_ab",
                "chi_be_rpa",
                "chi_be_actual",
                "k_eff",
                "k_eff_clamped",
                "truly_secure",
                "attack_induced_insecure",
            ],
            FigureId::Fig6 => &[
                "length_km",
                "alpha_low",
                "i_ab",
                "chi_be_rpa",
                "chi_be_actual",
                "key_rate",
                "key_rate_conservative",
            ],
            FigureId::Fig7 => &["length_km", "alpha_low", "k_eff", "k_eff_clamped"],
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown figure `{s}` (expected fig4, fig5, fig6 or fig7)")))
    }
}

/// `steps` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..steps)
            .map(|i| start + i as f64 * (stop - start) / (steps - 1) as f64)
            .collect(),
    }
}

fn alpha_sets(id: FigureId) -> &'static [f64] {
    match id {
        FigureId::Fig6 => &[0.0, HOLLOW_CORE_ALPHA, 0.2],
        _ => &[0.0, HOLLOW_CORE_ALPHA],
    }
}

/// Figure data as a table; a pure function of its inputs.
pub fn figure_table(id: FigureId, params: &SystemParams, options: &ModelOptions) -> Result<Table> {
    let mut table = Table::new(id.columns().iter().copied());
    match id {
        FigureId::Fig4 | FigureId::Fig5 => {
            for alpha_low in linspace(ALPHA_GRID.0, ALPHA_GRID.1, ALPHA_GRID.2) {
                let r = attack_report(params, &AttackScenario::new(FIXED_LENGTH_KM, alpha_low), options)?;
                let kr = &r.keyrate_report;
                table.push(if id == FigureId::Fig4 {
                    let before = r.baseline_noise.xi_phase;
                    vec![alpha_low, before, kr.noise.xi_phase, r.state.xi_tole, r.state.xi_tole / before]
                } else {
                    vec![
                        alpha_low,
                        kr.i_ab,
                        kr.chi_be,
                        r.chi_be_actual,
                        r.k_eff,
                        r.k_eff_clamped,
                        r.regions.truly_secure,
                        r.regions.attack_induced_insecure,
                    ]
                });
            }
        }
        FigureId::Fig6 | FigureId::Fig7 => {
            for &alpha_low in alpha_sets(id) {
                for length_km in linspace(LENGTH_GRID.0, LENGTH_GRID.1, LENGTH_GRID.2) {
                    let r = attack_report(params, &AttackScenario::new(length_km, alpha_low), options)?;
                    let kr = &r.keyrate_report;
                    table.push(if id == FigureId::Fig6 {
                        vec![
                            length_km,
                            alpha_low,
                            kr.i_ab,
                            kr.chi_be,
                            r.chi_be_actual,
                            kr.key_rate,
                            params.beta * kr.i_ab - r.chi_be_actual,
                        ]
                    } else {
                        vec![length_km, alpha_low, r.k_eff, r.k_eff_clamped]
                    });
                }
            }
        }
    }
    Ok(table)
}

fn series_of(table: &Table, x: &str, y: &str, label: String) -> Series {
    let xs = table.column(x).unwrap_or_default();
    let ys = table.column(y).unwrap_or_default();
    Series::new(label, &xs, &ys)
}

/// Line plot rendered from a figure table.
pub fn figure_plot(id: FigureId, table: &Table) -> LinePlot {
    match id {
        FigureId::Fig4 => LinePlot::new("Phase noise at 20 km", "alpha_low (dB/km)", "xi_phase (SNU)")
            .with(series_of(table, "alpha_low", "xi_phase_no_attack", "no attack".into()))
            .with(series_of(table, "alpha_low", "xi_phase_attack", "attack".into()).dashed()),
        FigureId::Fig5 => LinePlot::new("Information at 20 km", "alpha_low (dB/km)", "bits per symbol")
            .with(series_of(table, "alpha_low", "i_ab", "I_AB".into()))
            .with(series_of(table, "alpha_low", "chi_be_rpa", "chi_BE estimated".into()).dashed())
            .with(series_of(table, "alpha_low", "chi_be_actual", "chi_BE actual".into())),
        FigureId::Fig6 => {
            let mut plot = LinePlot::new("Information against length", "length (km)", "bits per symbol");
            let first = table.filter_eq("alpha_low", alpha_sets(id)[0]);
            plot = plot
                .with(series_of(&first, "length_km", "i_ab", "I_AB".into()))
                .with(series_of(&first, "length_km", "chi_be_rpa", "chi_BE estimated".into()).dashed());
            for &a in alpha_sets(id) {
                let rows = table.filter_eq("alpha_low", a);
                plot = plot.with(series_of(&rows, "length_km", "chi_be_actual", format!("chi_BE actual, {a}")));
            }
            plot
        }
        FigureId::Fig7 => {
            let mut plot = LinePlot::new("Attack efficiency", "length (km)", "K_eff (clamped)");
            for &a in alpha_sets(id) {
                let rows = table.filter_eq("alpha_low", a);
                plot = plot.with(series_of(&rows, "length_km", "k_eff_clamped", format!("alpha_low = {a}")));
            }
            plot
        }
    }
}

/// Paths written by [`run_figure`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FigureFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Write `<id>.csv` and `<id>.svg` into `out_dir`, creating it if needed.
pub fn run_figure(
    id: FigureId,
    params: &SystemParams,
    options: &ModelOptions,
    out_dir: &Path,
) -> Result<FigureFiles> {
    let table = figure_table(id, params, options)?;
    fs::create_dir_all(out_dir)?;
    let csv = out_dir.join(format!("{id}.csv"));
    let svg = out_dir.join(format!("{id}.svg"));
    table.write_csv(fs::File::create(&csv)?)?;
    fs::write(&svg, figure_plot(id, &table).to_svg())?;
    Ok(FigureFiles { csv, svg })
}
