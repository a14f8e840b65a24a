//! Excess-noise ledger of a phase-reference LLO-CVQKD link.
//!
//! The phase estimation error depends on the total added noise `chi_t`,
//! which itself contains the phase noise. [`solve_noise_budget`] resolves
//! that loop by fixed-point iteration.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::attack::AttackState;
use crate::error::{domain, Error, Result};
use crate::params::{ChiTMode, SystemParams};

pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: u32 = 100;

/// Decomposed excess-noise ledger. All noise terms in SNU referred to the
/// channel input, phase variances in rad^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    /// Signal transmittance the budget was evaluated at.
    pub transmittance: f64,
    pub v_drift: f64,
    pub v_error: f64,
    pub xi_drift: f64,
    pub xi_error: f64,
    /// `xi_error + xi_drift`.
    pub xi_phase: f64,
    /// Extra signal noise injected by the reference pulse attack.
    pub xi_attack: f64,
    /// `xi_e + xi_attack + xi_phase`.
    pub xi_total: f64,
    pub chi_line: f64,
    pub chi_het: f64,
    /// `chi_line + chi_het / transmittance`.
    pub chi_total: f64,
    pub fixed_point_iterations: u32,
}

/// Which side of the attack a budget describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetView {
    /// What Alice and Bob infer: the tolerance is credited against the phase noise.
    Estimated,
    /// What Eve actually holds: no phase credit.
    Actual,
}

/// Inter-pulse phase drift variance `2 pi (dnu_a + dnu_b) / f_rep`.
pub fn drift_variance(params: &SystemParams) -> Result<f64> {
    if !(params.f_rep > 0.0) {
        return Err(domain(format!("f_rep must be > 0, got {}", params.f_rep)));
    }
    Ok(2.0 * PI * (params.dnu_a + params.dnu_b) / params.f_rep)
}

/// Phase estimation error variance `(chi_t + 1) / E_ref^2`.
pub fn phase_error_variance(chi_t: f64, e_ref_sq: f64) -> Result<f64> {
    if !(e_ref_sq > 0.0) {
        return Err(domain(format!("E_ref^2 must be > 0, got {e_ref_sq}")));
    }
    if !(chi_t >= 0.0) {
        return Err(domain(format!("chi_t must be >= 0, got {chi_t}")));
    }
    Ok((chi_t + 1.0) / e_ref_sq)
}

/// Heterodyne detection noise `[1 + (1 - eta) + 2 V_ele] / eta`.
pub fn heterodyne_noise(params: &SystemParams) -> f64 {
    (1.0 + (1.0 - params.eta) + 2.0 * params.v_ele) / params.eta
}

struct Ledger<'a> {
    params: &'a SystemParams,
    transmittance: f64,
    v_drift: f64,
    chi_het: f64,
}

impl<'a> Ledger<'a> {
    fn new(params: &'a SystemParams, length_km: f64) -> Result<Self> {
        params.validate()?;
        let transmittance = params.signal_transmittance(length_km)?;
        if !(transmittance > 0.0) {
            return Err(domain(format!(
                "channel of {length_km} km has zero transmittance"
            )));
        }
        Ok(Self {
            params,
            transmittance,
            v_drift: drift_variance(params)?,
            chi_het: heterodyne_noise(params),
        })
    }

    fn assemble(&self, v_error: f64, xi_attack: f64, phase_credit: f64, iterations: u32) -> NoiseBudget {
        let p = self.params;
        let t = self.transmittance;
        let xi_drift = p.v_a * self.v_drift;
        let xi_error = p.v_a * v_error - phase_credit;
        let xi_phase = xi_error + xi_drift;
        let xi_total = p.xi_e + xi_attack + xi_phase;
        let chi_line = 1.0 / t - 1.0 + xi_total;
        let chi_total = chi_line + self.chi_het / t;
        NoiseBudget {
            transmittance: t,
            v_drift: self.v_drift,
            v_error: xi_error / p.v_a,
            xi_drift,
            xi_error,
            xi_phase,
            xi_attack,
            xi_total,
            chi_line,
            chi_het: self.chi_het,
            chi_total,
            fixed_point_iterations: iterations,
        }
    }

    /// Total noise when the phase noise is `xi_phase` (estimation error part
    /// is whatever remains after the drift).
    fn chi_for_phase(&self, xi_phase: f64) -> f64 {
        let v_error = (xi_phase / self.params.v_a - self.v_drift).max(0.0);
        self.assemble(v_error, 0.0, 0.0, 0).chi_total
    }

    fn refine(&self, chi: f64) -> Result<NoiseBudget> {
        let v_error = phase_error_variance(chi, self.params.e_ref_sq())?;
        Ok(self.assemble(v_error, 0.0, 0.0, 0))
    }

    fn iterate(&self, mut chi: f64) -> Result<NoiseBudget> {
        for iteration in 1..=FIXED_POINT_MAX_ITER {
            let mut next = self.refine(chi)?;
            let converged = (next.chi_total - chi).abs() <= FIXED_POINT_TOL * chi.max(1.0);
            chi = next.chi_total;
            if converged {
                next.fixed_point_iterations = iteration;
                return Ok(next);
            }
        }
        Err(Error::Numerical {
            message: format!("chi_t did not converge in {FIXED_POINT_MAX_ITER} iterations"),
            last: chi,
        })
    }
}

fn baseline(params: &SystemParams, length_km: f64, mode: ChiTMode) -> Result<(Ledger<'_>, NoiseBudget)> {
    let ledger = Ledger::new(params, length_km)?;
    let drift_only = ledger.chi_for_phase(params.v_a * ledger.v_drift);
    let budget = match mode {
        ChiTMode::FixedPoint => ledger.iterate(drift_only)?,
        ChiTMode::OneShot => {
            let mut b = ledger.refine(drift_only)?;
            b.fixed_point_iterations = 1;
            b
        }
    };
    Ok((ledger, budget))
}

/// Self-consistent noise budget at `length_km`.
///
/// With an attack the baseline phase noise is kept and the attack enters as
/// offsets: the signal gains `xi_e_rpa`, and in the estimated view the phase
/// estimation error is reduced by `xi_tole`.
pub fn solve_noise_budget(
    params: &SystemParams,
    length_km: f64,
    mode: ChiTMode,
    attack: Option<(&AttackState, BudgetView)>,
) -> Result<NoiseBudget> {
    let (ledger, base) = baseline(params, length_km, mode)?;
    let Some((state, view)) = attack else {
        return Ok(base);
    };
    let credit = match view {
        BudgetView::Estimated => state.xi_tole,
        BudgetView::Actual => 0.0,
    };
    let v_error = base.xi_error / params.v_a;
    Ok(ledger.assemble(v_error, state.xi_e_rpa, credit, base.fixed_point_iterations))
}

/// Fixed-point solve started from an arbitrary phase noise `initial_xi_phase`.
pub fn solve_noise_budget_from(
    params: &SystemParams,
    length_km: f64,
    initial_xi_phase: f64,
) -> Result<NoiseBudget> {
    let ledger = Ledger::new(params, length_km)?;
    let start = ledger.chi_for_phase(initial_xi_phase);
    ledger.iterate(start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn preset() -> SystemParams {
        SystemParams::paper2017()
    }

    // Closed-form fixed point: chi = a + b (chi + 1) with b = V_A / E_ref^2.
    fn closed_form_chi(p: &SystemParams, l: f64) -> f64 {
        let t = 10f64.powf(-p.alpha_std * l / 10.0);
        let chi_het = (2.0 - p.eta + 2.0 * p.v_ele) / p.eta;
        let drift = 2.0 * PI * (p.dnu_a + p.dnu_b) / p.f_rep;
        let b = p.v_a / p.e_ref_sq();
        let a = 1.0 / t - 1.0 + p.xi_e + p.v_a * drift + chi_het / t;
        (a + b) / (1.0 - b)
    }

    #[test]
    fn drift_variance_values() {
        assert_relative_eq!(
            drift_variance(&preset()).unwrap(),
            2.0 * PI * 3800.0 / 1e8,
            max_relative = 1e-15
        );
        assert_relative_eq!(drift_variance(&preset()).unwrap(), 2.3876e-4, max_relative = 1e-4);

        let mut p = preset();
        p.dnu_a = 0.0;
        p.dnu_b = 0.0;
        assert_eq!(drift_variance(&p).unwrap(), 0.0);

        let mut p2 = preset();
        p2.f_rep *= 2.0;
        assert_relative_eq!(
            drift_variance(&p2).unwrap(),
            drift_variance(&preset()).unwrap() / 2.0,
            max_relative = 1e-15
        );

        p2.f_rep = 0.0;
        assert!(matches!(drift_variance(&p2), Err(Error::Domain(_))));
    }

    #[test]
    fn phase_error_variance_values() {
        assert_eq!(phase_error_variance(0.0, 400.0).unwrap(), 2.5e-3);
        assert_relative_eq!(phase_error_variance(9.17, 400.0).unwrap(), 2.5425e-2, max_relative = 1e-12);
        assert!(phase_error_variance(1.0, 1e300).unwrap() < 1e-299);
        assert!(phase_error_variance(1.0, 0.0).is_err());
        assert!(phase_error_variance(1.0, -3.0).is_err());
    }

    #[test]
    fn heterodyne_noise_paper_value() {
        let b = solve_noise_budget(&preset(), 20.0, ChiTMode::FixedPoint, None).unwrap();
        assert_relative_eq!(b.chi_het, 3.04, max_relative = 1e-14);
    }

    #[test]
    fn fixed_point_matches_closed_form() {
        for l in [0.0, 5.0, 20.0, 27.6, 50.0] {
            let b = solve_noise_budget(&preset(), l, ChiTMode::FixedPoint, None).unwrap();
            assert_relative_eq!(b.chi_total, closed_form_chi(&preset(), l), max_relative = 1e-11);
        }
    }

    #[test]
    fn drift_term_is_subdominant_at_20km() {
        let b = solve_noise_budget(&preset(), 20.0, ChiTMode::FixedPoint, None).unwrap();
        let ratio = b.xi_error / b.xi_phase;
        assert!((0.985..0.995).contains(&ratio), "ratio {ratio}");
        assert_relative_eq!(b.xi_drift, 9.5504e-4, max_relative = 1e-4);
        assert!(b.fixed_point_iterations <= 30);
    }

    #[test]
    fn ledger_identities_hold_exactly() {
        let b = solve_noise_budget(&preset(), 13.0, ChiTMode::FixedPoint, None).unwrap();
        assert_eq!(b.xi_phase, b.xi_error + b.xi_drift);
        assert_eq!(b.xi_total, preset().xi_e + b.xi_attack + b.xi_phase);
        assert_eq!(b.chi_total, b.chi_line + b.chi_het / b.transmittance);
    }

    #[test]
    fn ideal_device_limit() {
        let p = SystemParams {
            eta: 1.0,
            v_ele: 0.0,
            xi_e: 0.0,
            dnu_a: 0.0,
            dnu_b: 0.0,
            ref_amp_ratio: 1e300,
            ..preset()
        };
        let b = solve_noise_budget(&p, 0.0, ChiTMode::FixedPoint, None).unwrap();
        assert_eq!(b.chi_het, 1.0);
        assert_relative_eq!(b.chi_total, 1.0, max_relative = 1e-12);
        assert!(b.xi_phase < 1e-290);
    }

    #[test]
    fn one_shot_is_close_to_fixed_point() {
        let fp = solve_noise_budget(&preset(), 20.0, ChiTMode::FixedPoint, None).unwrap();
        let os = solve_noise_budget(&preset(), 20.0, ChiTMode::OneShot, None).unwrap();
        assert_eq!(os.fixed_point_iterations, 1);
        assert!(os.chi_total < fp.chi_total);
        assert!((fp.chi_total - os.chi_total) / fp.chi_total < 1e-3);
    }

    #[test]
    fn fixed_point_is_unique() {
        for l in [1.0, 10.0, 27.0] {
            let a = solve_noise_budget_from(&preset(), l, 0.0).unwrap();
            let b = solve_noise_budget_from(&preset(), l, 10.0 * preset().v_a).unwrap();
            assert!((a.chi_total - b.chi_total).abs() < 1e-10);
        }
    }

    #[test]
    fn non_convergence_reports_last_iterate() {
        // V_A / E_ref^2 > 1 makes the map expansive.
        let p = SystemParams {
            ref_amp_ratio: 0.5,
            ..preset()
        };
        match solve_noise_budget(&p, 20.0, ChiTMode::FixedPoint, None) {
            Err(Error::Numerical { last, .. }) => assert!(last > 1e3),
            other => panic!("expected numerical error, got {other:?}"),
        }
    }

    #[test]
    fn zero_transmittance_rejected() {
        assert!(matches!(
            solve_noise_budget(&preset(), 1e6, ChiTMode::FixedPoint, None),
            Err(Error::Domain(_))
        ));
    }
}
