//! System constants, attack geometry and the JSON configuration document.
//!
//! Every variance in the crate is expressed in shot-noise units (SNU), with
//! the vacuum quadrature variance `n0` pinned to 1.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Name of the built-in parameter preset.
pub const PAPER2017: &str = "paper2017";

/// Protocol and device constants of one LLO-CVQKD link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Alice's Gaussian modulation variance (SNU).
    pub v_a: f64,
    /// Reconciliation efficiency.
    pub beta: f64,
    /// Detector efficiency.
    pub eta: f64,
    /// Electronic noise variance (SNU).
    pub v_ele: f64,
    /// Baseline excess noise attributed to Eve (SNU).
    pub xi_e: f64,
    /// Repetition rate (Hz).
    pub f_rep: f64,
    /// Linewidth of Alice's laser (Hz).
    pub dnu_a: f64,
    /// Linewidth of Bob's laser (Hz).
    pub dnu_b: f64,
    /// Reference pulse intensity relative to the modulation variance, `E_ref^2 / V_A`.
    pub ref_amp_ratio: f64,
    /// Attenuation of the signal fibre (dB/km).
    pub alpha_std: f64,
    /// Shot-noise unit. Always 1.
    pub n0: f64,
}

impl SystemParams {
    /// V_A = 4, beta = 0.97, eta = 0.5, V_ele = 0.01, xi_e = 0.01, 100 MHz,
    /// 1.9 kHz linewidths, E_ref^2 / V_A = 100, 0.2 dB/km.
    pub const fn paper2017() -> Self {
        Self {
            v_a: 4.0,
            beta: 0.97,
            eta: 0.5,
            v_ele: 0.01,
            xi_e: 0.01,
            f_rep: 100e6,
            dnu_a: 1.9e3,
            dnu_b: 1.9e3,
            ref_amp_ratio: 100.0,
            alpha_std: 0.2,
            n0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(bool, &str); 11] = [
            (self.v_a > 0.0, "v_a must be > 0"),
            (self.beta > 0.0 && self.beta <= 1.0, "beta must lie in (0, 1]"),
            (self.eta > 0.0 && self.eta <= 1.0, "eta must lie in (0, 1]"),
            (self.v_ele >= 0.0, "v_ele must be >= 0"),
            (self.xi_e >= 0.0, "xi_e must be >= 0"),
            (self.f_rep > 0.0, "f_rep must be > 0"),
            (self.dnu_a >= 0.0, "dnu_a must be >= 0"),
            (self.dnu_b >= 0.0, "dnu_b must be >= 0"),
            (self.ref_amp_ratio > 0.0, "ref_amp_ratio must be > 0"),
            (self.alpha_std >= 0.0, "alpha_std must be >= 0"),
            (self.n0 == 1.0, "n0 is fixed to 1 (shot-noise units)"),
        ];
        for (ok, msg) in checks {
            // NaN fails every comparison above, so it lands here too.
            if !ok {
                return Err(domain(msg));
            }
        }
        Ok(())
    }

    /// Reference pulse intensity `E_ref^2` in SNU.
    pub fn e_ref_sq(&self) -> f64 {
        self.ref_amp_ratio * self.v_a
    }

    /// Transmittance of the signal fibre over `length_km`.
    pub fn signal_transmittance(&self, length_km: f64) -> Result<f64> {
        transmittance(self.alpha_std, length_km)
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::paper2017()
    }
}

/// One attack configuration: both legs have length `length_km`, the
/// reference leg is rerouted through a fibre of attenuation `alpha_low`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    pub length_km: f64,
    pub alpha_low: f64,
}

impl AttackScenario {
    pub fn new(length_km: f64, alpha_low: f64) -> Self {
        Self {
            length_km,
            alpha_low,
        }
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        if !(self.length_km >= 0.0) || !self.length_km.is_finite() {
            return Err(domain(format!(
                "length_km must be finite and >= 0, got {}",
                self.length_km
            )));
        }
        if !(self.alpha_low >= 0.0) {
            return Err(domain(format!(
                "alpha_low must be >= 0, got {}",
                self.alpha_low
            )));
        }
        if self.alpha_low > params.alpha_std {
            return Err(domain(format!(
                "alpha_low ({}) exceeds alpha_std ({})",
                self.alpha_low, params.alpha_std
            )));
        }
        Ok(())
    }

    pub fn t_std(&self, params: &SystemParams) -> Result<f64> {
        transmittance(params.alpha_std, self.length_km)
    }

    pub fn t_low(&self) -> Result<f64> {
        transmittance(self.alpha_low, self.length_km)
    }
}

impl Default for AttackScenario {
    fn default() -> Self {
        Self::new(20.0, 0.0)
    }
}

/// How the self-referential total noise is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiTMode {
    /// Iterate the total noise to its fixed point.
    #[default]
    FixedPoint,
    /// Single refinement starting from the drift-only phase noise.
    OneShot,
}

/// Denominator of the attack efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeffDenominator {
    /// `I_AB - chi_BE`.
    AsPrinted,
    /// `beta * I_AB - chi_BE`, the estimated secret key rate.
    #[default]
    Reconciled,
}

impl std::str::FromStr for ChiTMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_point" => Ok(Self::FixedPoint),
            "one_shot" => Ok(Self::OneShot),
            other => Err(Error::Config(format!("unknown chi_t_mode `{other}`"))),
        }
    }
}

impl std::str::FromStr for KeffDenominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as_printed" => Ok(Self::AsPrinted),
            "reconciled" => Ok(Self::Reconciled),
            other => Err(Error::Config(format!(
                "unknown keff_denominator `{other}`"
            ))),
        }
    }
}

/// Modelling switches shared by the noise, key-rate and attack modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub chi_t_mode: ChiTMode,
    pub keff_denominator: KeffDenominator,
    /// Fraction of the available tolerance Eve spends on the signal, in [0, 1].
    pub attack_fraction: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            chi_t_mode: ChiTMode::FixedPoint,
            keff_denominator: KeffDenominator::default(),
            attack_fraction: 1.0,
        }
    }
}

impl ModelOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.attack_fraction) {
            return Err(domain(format!(
                "attack_fraction must lie in [0, 1], got {}",
                self.attack_fraction
            )));
        }
        Ok(())
    }
}

/// Transmittance `10^(-alpha * L / 10)` of a fibre of attenuation
/// `alpha_db_per_km` and length `length_km`.
pub fn transmittance(alpha_db_per_km: f64, length_km: f64) -> Result<f64> {
    if !(alpha_db_per_km >= 0.0) {
        return Err(domain(format!(
            "attenuation must be >= 0 dB/km, got {alpha_db_per_km}"
        )));
    }
    if !(length_km >= 0.0) {
        return Err(domain(format!("length must be >= 0 km, got {length_km}")));
    }
    Ok(10f64.powf(-alpha_db_per_km * length_km / 10.0))
}

/// Variance `V = V_A + 1` of Alice's emitted states.
pub fn effective_v(params: &SystemParams) -> f64 {
    params.v_a + params.n0
}

/// Fully resolved configuration: parameters, scenario and model switches.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Config {
    pub params: SystemParams,
    pub scenario: AttackScenario,
    pub options: ModelOptions,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    preset: Option<String>,
    v_a: Option<f64>,
    beta: Option<f64>,
    eta: Option<f64>,
    v_ele: Option<f64>,
    xi_e: Option<f64>,
    f_rep: Option<f64>,
    dnu_a: Option<f64>,
    dnu_b: Option<f64>,
    ref_amp_ratio: Option<f64>,
    alpha_std: Option<f64>,
    n0: Option<f64>,
    length_km: Option<f64>,
    alpha_low: Option<f64>,
    chi_t_mode: Option<ChiTMode>,
    keff_denominator: Option<KeffDenominator>,
    attack_fraction: Option<f64>,
}

impl Config {
    /// Built-in preset by name.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            PAPER2017 => Ok(Self::default()),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }

    /// Parse a JSON configuration document.
    ///
    /// Without `"preset"` every parameter and scenario field must be present.
    /// With `"preset": "paper2017"` missing fields fall back to the preset and
    /// its default scenario (L = 20 km, alpha_low = 0).
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: ConfigDoc =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let base = match doc.preset.as_deref() {
            Some(name) => Some(Self::preset(name)?),
            None => None,
        };

        let mut missing = Vec::new();
        let mut pick = |value: Option<f64>, name: &'static str, fallback: Option<f64>| {
            value.or(fallback).unwrap_or_else(|| {
                missing.push(name);
                f64::NAN
            })
        };
        let bp = base.map(|c| c.params);
        let bs = base.map(|c| c.scenario);
        let params = SystemParams {
            v_a: pick(doc.v_a, "v_a", bp.map(|p| p.v_a)),
            beta: pick(doc.beta, "beta", bp.map(|p| p.beta)),
            eta: pick(doc.eta, "eta", bp.map(|p| p.eta)),
            v_ele: pick(doc.v_ele, "v_ele", bp.map(|p| p.v_ele)),
            xi_e: pick(doc.xi_e, "xi_e", bp.map(|p| p.xi_e)),
            f_rep: pick(doc.f_rep, "f_rep", bp.map(|p| p.f_rep)),
            dnu_a: pick(doc.dnu_a, "dnu_a", bp.map(|p| p.dnu_a)),
            dnu_b: pick(doc.dnu_b, "dnu_b", bp.map(|p| p.dnu_b)),
            ref_amp_ratio: pick(doc.ref_amp_ratio, "ref_amp_ratio", bp.map(|p| p.ref_amp_ratio)),
            alpha_std: pick(doc.alpha_std, "alpha_std", bp.map(|p| p.alpha_std)),
            n0: doc.n0.unwrap_or(1.0),
        };
        let scenario = AttackScenario {
            length_km: pick(doc.length_km, "length_km", bs.map(|s| s.length_km)),
            alpha_low: pick(doc.alpha_low, "alpha_low", bs.map(|s| s.alpha_low)),
        };
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "missing fields without a preset: {}",
                missing.join(", ")
            )));
        }

        let defaults = ModelOptions::default();
        let options = ModelOptions {
            chi_t_mode: doc.chi_t_mode.unwrap_or(defaults.chi_t_mode),
            keff_denominator: doc.keff_denominator.unwrap_or(defaults.keff_denominator),
            attack_fraction: doc.attack_fraction.unwrap_or(defaults.attack_fraction),
        };

        let config = Self {
            params,
            scenario,
            options,
        };
        config.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.scenario.validate(&self.params)?;
        self.options.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn transmittance_values() {
        assert_relative_eq!(
            transmittance(0.2, 20.0).unwrap(),
            0.398_107_170_553_497_25,
            max_relative = 1e-14
        );
        assert_eq!(transmittance(0.37, 0.0).unwrap(), 1.0);
        assert_eq!(transmittance(0.0, 100.0).unwrap(), 1.0);
        assert!(matches!(transmittance(-0.1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(transmittance(0.1, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn effective_variance_convention() {
        let mut p = SystemParams::paper2017();
        assert_eq!(effective_v(&p), 5.0);
        p.v_a = 1.0;
        assert_eq!(effective_v(&p), 2.0);
        p.v_a = 0.0;
        assert_eq!(effective_v(&p), 1.0);
    }

    #[test]
    fn preset_values() {
        let p = SystemParams::paper2017();
        p.validate().unwrap();
        assert_eq!(p.e_ref_sq(), 400.0);
        assert_eq!(p.f_rep, 1e8);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = SystemParams::paper2017();
        p.beta = 1.2;
        assert!(p.validate().is_err());
        let mut p = SystemParams::paper2017();
        p.n0 = 2.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::paper2017();
        p.f_rep = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn scenario_alpha_low_bounded_by_alpha_std() {
        let p = SystemParams::paper2017();
        assert!(AttackScenario::new(20.0, 0.2).validate(&p).is_ok());
        assert!(AttackScenario::new(20.0, 0.21).validate(&p).is_err());
        assert!(AttackScenario::new(-1.0, 0.0).validate(&p).is_err());
    }

    #[test]
    fn config_with_preset_fills_missing() {
        let c = Config::from_json_str(r#"{"preset": "paper2017", "length_km": 12.5}"#).unwrap();
        assert_eq!(c.params, SystemParams::paper2017());
        assert_eq!(c.scenario.length_km, 12.5);
        assert_eq!(c.scenario.alpha_low, 0.0);
    }

    #[test]
    fn config_without_preset_requires_everything() {
        let err = Config::from_json_str(r#"{"v_a": 4}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("beta") && msg.contains("alpha_low"), "{msg}");

        let full = serde_json::json!({
            "v_a": 2.0, "beta": 0.95, "eta": 0.6, "v_ele": 0.02, "xi_e": 0.0,
            "f_rep": 5e7, "dnu_a": 100.0, "dnu_b": 200.0, "ref_amp_ratio": 50.0,
            "alpha_std": 0.18, "length_km": 5.0, "alpha_low": 0.1,
            "keff_denominator": "as_printed"
        });
        let c = Config::from_json_str(&full.to_string()).unwrap();
        assert_eq!(c.params.v_a, 2.0);
        assert_eq!(c.options.keff_denominator, KeffDenominator::AsPrinted);
    }

    #[test]
    fn config_rejects_unknown_keys_and_presets() {
        assert!(matches!(
            Config::from_json_str(r#"{"preset": "paper2017", "vA": 4}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            Config::from_json_str(r#"{"preset": "nope"}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            Config::from_json_str(r#"{"preset": "paper2017", "alpha_low": 0.3}"#),
            Err(Error::Config(_))
        ));
    }
}
