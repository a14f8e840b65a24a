//! One-dimensional parameter sweeps in the standard report layout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attack::attack_report;
use crate::error::{Error, Result};
use crate::figures::linspace;
use crate::params::Config;
use crate::table::{report_table, ReportRow, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    AlphaLow,
    LengthKm,
    RefAmpRatio,
    VA,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [SweepAxis::AlphaLow, SweepAxis::LengthKm, SweepAxis::RefAmpRatio, SweepAxis::VA];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::AlphaLow => "alpha_low",
            SweepAxis::LengthKm => "length_km",
            SweepAxis::RefAmpRatio => "ref_amp_ratio",
            SweepAxis::VA => "v_a",
        }
    }

    /// `config` with this axis set to `value`.
    pub fn apply(self, config: &Config, value: f64) -> Config {
        let mut c = *config;
        match self {
            SweepAxis::AlphaLow => c.scenario.alpha_low = value,
            SweepAxis::LengthKm => c.scenario.length_km = value,
            SweepAxis::RefAmpRatio => c.params.ref_amp_ratio = value,
            SweepAxis::VA => c.params.v_a = value,
        }
        c
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown sweep axis `{s}` (expected alpha_low, length_km, ref_amp_ratio or v_a)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Values of everything not being swept.
    pub config: Config,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Config(format!("a sweep needs at least 2 steps, got {}", self.steps)));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::Config(format!(
                "sweep range must satisfy start < stop, got {}..{}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.steps)
    }
}

/// Evaluate the attack report at every grid point, in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let mut table = report_table();
    for value in spec.grid() {
        let c = spec.axis.apply(&spec.config, value);
        let report = attack_report(&c.params, &c.scenario, &c.options)?;
        table.push(ReportRow::from_report(&report, c.params.beta).values());
    }
    Ok(table)
}
