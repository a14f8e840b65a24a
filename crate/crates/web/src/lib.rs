//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a string (SVG markup or JSON) so the page needs no
//! bindings beyond `wasm-bindgen`'s string passing.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use llocv::attack::{attack_report, critical_distance, null_key_distance};
use llocv::figures::linspace;
use llocv::plot::{LinePlot, Series};
use llocv::params::{AttackScenario, ModelOptions, SystemParams};

const ALPHA_POINTS: usize = 101;
const LENGTH_POINTS: usize = 151;

fn options(keff_denominator: &str) -> llocv::Result<ModelOptions> {
    Ok(ModelOptions {
        keff_denominator: keff_denominator.parse()?,
        ..ModelOptions::default()
    })
}

fn params(ref_amp_ratio: f64) -> SystemParams {
    SystemParams {
        ref_amp_ratio,
        ..SystemParams::paper2017()
    }
}

/// Information quantities against `alpha_low` at a fixed length.
pub fn information_plot(length_km: f64, ref_amp_ratio: f64) -> llocv::Result<String> {
    let p = params(ref_amp_ratio);
    let opts = ModelOptions::default();
    let alphas = linspace(0.0, p.alpha_std, ALPHA_POINTS);
    let (mut i_ab, mut est, mut act) = (Vec::new(), Vec::new(), Vec::new());
    for &a in &alphas {
        let r = attack_report(&p, &AttackScenario::new(length_km, a), &opts)?;
        i_ab.push(p.beta * r.keyrate_report.i_ab);
        est.push(r.keyrate_report.chi_be);
        act.push(r.chi_be_actual);
    }
    Ok(LinePlot::new(
        format!("Information at {length_km:.1} km"),
        "alpha_low (dB/km)",
        "bits per symbol",
    )
    .with(Series::new("beta I_AB", &alphas, &i_ab))
    .with(Series::new("chi_BE estimated", &alphas, &est).dashed())
    .with(Series::new("chi_BE actual", &alphas, &act))
    .to_svg())
}

/// Clamped attack efficiency against length for one `alpha_low`.
pub fn efficiency_plot(alpha_low: f64, keff_denominator: &str, ref_amp_ratio: f64) -> llocv::Result<String> {
    let p = params(ref_amp_ratio);
    let opts = options(keff_denominator)?;
    let lengths = linspace(0.0, 30.0, LENGTH_POINTS);
    let mut keff = Vec::new();
    for &l in &lengths {
        keff.push(attack_report(&p, &AttackScenario::new(l, alpha_low), &opts)?.k_eff_clamped);
    }
    Ok(LinePlot::new(
        format!("Attack efficiency, alpha_low = {alpha_low:.4}"),
        "length (km)",
        "K_eff (clamped)",
    )
    .with(Series::new(keff_denominator, &lengths, &keff))
    .to_svg())
}

#[derive(Serialize)]
struct Summary {
    length_km: f64,
    alpha_low: f64,
    i_ab: f64,
    chi_be: f64,
    chi_be_actual: f64,
    key_rate: f64,
    key_rate_conservative: f64,
    xi_tole: f64,
    k_eff: f64,
    critical_km: Option<f64>,
    null_key_km: Option<f64>,
}

/// Headline numbers for one scenario, as JSON.
pub fn scenario_json(
    length_km: f64,
    alpha_low: f64,
    keff_denominator: &str,
    ref_amp_ratio: f64,
) -> llocv::Result<String> {
    let p = params(ref_amp_ratio);
    let opts = options(keff_denominator)?;
    let r = attack_report(&p, &AttackScenario::new(length_km, alpha_low), &opts)?;
    let kr = &r.keyrate_report;
    let summary = Summary {
        length_km,
        alpha_low,
        i_ab: kr.i_ab,
        chi_be: kr.chi_be,
        chi_be_actual: r.chi_be_actual,
        key_rate: kr.key_rate,
        key_rate_conservative: p.beta * kr.i_ab - r.chi_be_actual,
        xi_tole: r.state.xi_tole,
        k_eff: r.k_eff,
        critical_km: critical_distance(&p, &opts, alpha_low, 1.0)?,
        null_key_km: null_key_distance(&p, opts.chi_t_mode)?,
    };
    Ok(serde_json::to_string(&summary)?)
}

fn js(result: llocv::Result<String>) -> Result<String, JsError> {
    result.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = informationPlot)]
pub fn information_plot_js(length_km: f64, ref_amp_ratio: f64) -> Result<String, JsError> {
    js(information_plot(length_km, ref_amp_ratio))
}

#[wasm_bindgen(js_name = efficiencyPlot)]
pub fn efficiency_plot_js(alpha_low: f64, keff_denominator: &str, ref_amp_ratio: f64) -> Result<String, JsError> {
    js(efficiency_plot(alpha_low, keff_denominator, ref_amp_ratio))
}

#[wasm_bindgen(js_name = scenarioSummary)]
pub fn scenario_summary_js(
    length_km: f64,
    alpha_low: f64,
    keff_denominator: &str,
    ref_amp_ratio: f64,
) -> Result<String, JsError> {
    js(scenario_json(length_km, alpha_low, keff_denominator, ref_amp_ratio))
}
