//! Column-named numeric tables and the standard per-scenario CSV row.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::attack::AttackReport;
use crate::error::{Error, Result};

/// Rectangular table of `f64` with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Rows whose `key` column equals `value` exactly.
    pub fn filter_eq(&self, key: &str, value: f64) -> Table {
        let mut out = Table::new(self.columns.clone());
        if let Some(i) = self.column_index(key) {
            out.rows = self.rows.iter().filter(|r| r[i] == value).cloned().collect();
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let columns: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let mut table = Table::new(columns);
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|field| {
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad number `{field}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row);
        }
        Ok(table)
    }
}

/// Column order of [`ReportRow`]; part of the external CSV contract.
pub const REPORT_COLUMNS: [&str; 19] = [
    "length_km",
    "alpha_low",
    "i_ab",
    "chi_be",
    "chi_be_actual",
    "key_rate",
    "k_eff",
    "k_eff_clamped",
    "lambda1",
    "lambda2",
    "lambda3",
    "lambda4",
    "lambda5",
    "xi_error",
    "xi_tole",
    "chi_t",
    "key_rate_conservative",
    "xi_phase",
    "xi_total",
];

/// One operating point in the standard CSV layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub length_km: f64,
    pub alpha_low: f64,
    pub i_ab: f64,
    pub chi_be: f64,
    pub chi_be_actual: f64,
    pub key_rate: f64,
    pub k_eff: f64,
    pub k_eff_clamped: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub lambda5: f64,
    /// Baseline phase estimation error noise (before the attack).
    pub xi_error: f64,
    pub xi_tole: f64,
    pub chi_t: f64,
    pub key_rate_conservative: f64,
    /// Phase noise as estimated under the attack.
    pub xi_phase: f64,
    pub xi_total: f64,
}

impl ReportRow {
    pub fn from_report(report: &AttackReport, beta: f64) -> Self {
        let kr = &report.keyrate_report;
        let e = &kr.eigenset;
        Self {
            length_km: report.scenario.length_km,
            alpha_low: report.scenario.alpha_low,
            i_ab: kr.i_ab,
            chi_be: kr.chi_be,
            chi_be_actual: report.chi_be_actual,
            key_rate: kr.key_rate,
            k_eff: report.k_eff,
            k_eff_clamped: report.k_eff_clamped,
            lambda1: e.lambda1,
            lambda2: e.lambda2,
            lambda3: e.lambda3,
            lambda4: e.lambda4,
            lambda5: e.lambda5,
            xi_error: report.baseline_noise.xi_error,
            xi_tole: report.state.xi_tole,
            chi_t: kr.noise.chi_total,
            key_rate_conservative: beta * kr.i_ab - report.chi_be_actual,
            xi_phase: kr.noise.xi_phase,
            xi_total: kr.noise.xi_total,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        vec![
            self.length_km,
            self.alpha_low,
            self.i_ab,
            self.chi_be,
            self.chi_be_actual,
            self.key_rate,
            self.k_eff,
            self.k_eff_clamped,
            self.lambda1,
            self.lambda2,
            self.lambda3,
            self.lambda4,
            self.lambda5,
            self.xi_error,
            self.xi_tole,
            self.chi_t,
            self.key_rate_conservative,
            self.xi_phase,
            self.xi_total,
        ]
    }
}

/// Empty table with the standard report header.
pub fn report_table() -> Table {
    Table::new(REPORT_COLUMNS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_values() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![0.1, 1e-300]);
        t.push(vec![f64::INFINITY, -2.5]);
        let text = t.to_csv_string().unwrap();
        assert!(text.starts_with("a,b\n"));
        let back = Table::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn column_lookup() {
        let mut t = Table::new(["x", "y"]);
        t.push(vec![1.0, 2.0]);
        t.push(vec![3.0, 4.0]);
        assert_eq!(t.column("y").unwrap(), vec![2.0, 4.0]);
        assert!(t.column("z").is_none());
        assert_eq!(t.filter_eq("x", 3.0).rows, vec![vec![3.0, 4.0]]);
    }
}
