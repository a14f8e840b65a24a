//! Collective-attack key rate with heterodyne detection and reverse
//! reconciliation.
//!
//! Eve's information is the Holevo bound `S(E) - S(E|B)`, evaluated from the
//! symplectic eigenvalues of the purified state: `lambda_1,2` from the
//! Alice-Bob covariance matrix, `lambda_3,4,5` from the state conditioned on
//! Bob's heterodyne outcome.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::noise::{solve_noise_budget, NoiseBudget};
use crate::params::{effective_v, ChiTMode, SystemParams};

/// Slack allowed below the physical bound `lambda >= 1` and on negative
/// discriminants, relative to the discriminant scale.
pub const EIGEN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSet {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub lambda5: f64,
    pub a_term: f64,
    pub b_term: f64,
    pub c_term: f64,
    pub d_term: f64,
}

impl EigenSet {
    pub fn lambdas(&self) -> [f64; 5] {
        [self.lambda1, self.lambda2, self.lambda3, self.lambda4, self.lambda5]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub i_ab: f64,
    pub chi_be: f64,
    /// `beta * i_ab - chi_be`, bits per symbol.
    pub key_rate: f64,
    pub eigenset: EigenSet,
    pub noise: NoiseBudget,
}

/// `G(x) = (x + 1) log2(x + 1) - x log2 x`, with `G(0) = 0`.
pub fn g_entropy(x: f64) -> Result<f64> {
    if x < -EIGEN_SLACK || x.is_nan() {
        return Err(domain(format!("G(x) undefined for x = {x}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).log2() - x * x.log2())
}

/// Heterodyne mutual information `log2((V + chi_t) / (1 + chi_t))`.
pub fn mutual_information(params: &SystemParams, noise: &NoiseBudget) -> Result<f64> {
    let chi_t = noise.chi_total;
    if !(chi_t >= 0.0) {
        return Err(domain(format!("chi_t must be >= 0, got {chi_t}")));
    }
    let v = effective_v(params);
    Ok(((v + chi_t) / (1.0 + chi_t)).log2())
}

/// Symplectic pair `sqrt((s +- sqrt(s^2 - 4 p)) / 2)` for trace-like `s`
/// and determinant-like `p`.
fn symplectic_pair(s: f64, p: f64, what: &str) -> Result<(f64, f64)> {
    let disc = s * s - 4.0 * p;
    if disc < -EIGEN_SLACK * s * s {
        return Err(Error::Numerical {
            message: format!("negative discriminant for {what}"),
            last: disc,
        });
    }
    if disc <= 16.0 * f64::EPSILON * s * s {
        // Degenerate pair: the discriminant is rounding noise, and its square
        // root would perturb both eigenvalues by ~sqrt(eps).
        let lambda = p.sqrt().sqrt();
        let lambda = clamp_unit(lambda, what)?;
        return Ok((lambda, lambda));
    }
    let hi_sq = 0.5 * (s + disc.sqrt());
    // lambda_hi^2 * lambda_lo^2 = p; avoids cancellation in s - sqrt(disc).
    let lo = (p / hi_sq).sqrt();
    Ok((clamp_unit(hi_sq.sqrt(), what)?, clamp_unit(lo, what)?))
}

fn clamp_unit(lambda: f64, what: &str) -> Result<f64> {
    if lambda >= 1.0 {
        Ok(lambda)
    } else if lambda >= 1.0 - EIGEN_SLACK {
        Ok(1.0)
    } else {
        Err(Error::Numerical {
            message: format!("unphysical symplectic eigenvalue for {what}"),
            last: lambda,
        })
    }
}

/// Holevo bound on Eve's information and the eigenvalues it came from.
pub fn holevo_bound(
    params: &SystemParams,
    transmittance: f64,
    chi_line: f64,
    chi_het: f64,
    chi_t: f64,
) -> Result<(f64, EigenSet)> {
    let t = transmittance;
    if !(t > 0.0 && t <= 1.0) {
        return Err(domain(format!("transmittance must lie in (0, 1], got {t}")));
    }
    if !(chi_line >= 0.0 && chi_het >= 0.0 && chi_t >= 0.0) {
        return Err(domain("noise terms must be >= 0"));
    }
    let v = effective_v(params);

    let a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line).powi(2);
    let b = (t * (v * chi_line + 1.0)).powi(2);
    let (lambda1, lambda2) = symplectic_pair(a, b, "Alice-Bob state")?;

    let scale = (t * (v + chi_t)).powi(2);
    let sqrt_b = b.sqrt();
    let c = (a * chi_het * chi_het
        + b
        + 1.0
        + 2.0 * chi_het * (v * sqrt_b + t * (v + chi_line))
        + 2.0 * t * (v * v - 1.0))
        / scale;
    let d = (v + sqrt_b * chi_het).powi(2) / scale;
    let (lambda3, lambda4) = symplectic_pair(c, d, "conditional state")?;
    let lambda5 = 1.0;

    let g = |l: f64| g_entropy((l - 1.0) / 2.0);
    let eve = g(lambda1)? + g(lambda2)?;
    let eve_given_bob = g(lambda3)? + g(lambda4)? + g(lambda5)?;
    let chi_be = (eve - eve_given_bob).max(0.0);

    Ok((
        chi_be,
        EigenSet {
            lambda1,
            lambda2,
            lambda3,
            lambda4,
            lambda5,
            a_term: a,
            b_term: b,
            c_term: c,
            d_term: d,
        },
    ))
}

/// Mutual information, Holevo bound and key rate for an already solved budget.
pub fn key_rate_for_budget(params: &SystemParams, noise: NoiseBudget) -> Result<KeyRateReport> {
    let i_ab = mutual_information(params, &noise)?;
    let (chi_be, eigenset) = holevo_bound(
        params,
        noise.transmittance,
        noise.chi_line,
        noise.chi_het,
        noise.chi_total,
    )?;
    Ok(KeyRateReport {
        i_ab,
        chi_be,
        key_rate: params.beta * i_ab - chi_be,
        eigenset,
        noise,
    })
}

/// Key rate of the unattacked link at `length_km`.
pub fn key_rate(params: &SystemParams, length_km: f64, mode: ChiTMode) -> Result<KeyRateReport> {
    let noise = solve_noise_budget(params, length_km, mode, None)?;
    key_rate_for_budget(params, noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn g_entropy_values() {
        assert_eq!(g_entropy(0.0).unwrap(), 0.0);
        assert_relative_eq!(g_entropy(1.0).unwrap(), 2.0, max_relative = 1e-15);
        let expected = 1.5 * 1.5f64.log2() - 0.5 * 0.5f64.log2();
        assert_relative_eq!(g_entropy(0.5).unwrap(), expected, max_relative = 1e-15);
        assert_relative_eq!(g_entropy(0.5).unwrap(), 1.37744, max_relative = 1e-5);
        assert_eq!(g_entropy(-5e-10).unwrap(), 0.0);
        assert!(g_entropy(-1e-6).is_err());
        assert!(g_entropy(f64::NAN).is_err());
    }

    #[test]
    fn noiseless_mutual_information() {
        let params = SystemParams::paper2017();
        let mut noise = crate::noise::solve_noise_budget(&params, 0.0, ChiTMode::FixedPoint, None).unwrap();
        noise.chi_total = 0.0;
        assert_relative_eq!(mutual_information(&params, &noise).unwrap(), 5f64.log2(), max_relative = 1e-15);
        noise.chi_total = 1e12;
        assert!(mutual_information(&params, &noise).unwrap() < 1e-11);
    }

    #[test]
    fn identity_channel_leaks_nothing() {
        let params = SystemParams::paper2017();
        let (chi, eig) = holevo_bound(&params, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(chi, 0.0);
        assert_eq!(eig.lambda5, 1.0);
        for l in eig.lambdas() {
            assert!(l >= 1.0);
        }
    }

    #[test]
    fn ideal_lossless_key_rate() {
        let params = SystemParams {
            eta: 1.0,
            v_ele: 0.0,
            xi_e: 0.0,
            dnu_a: 0.0,
            dnu_b: 0.0,
            ref_amp_ratio: 1e300,
            ..SystemParams::paper2017()
        };
        let report = key_rate(&params, 0.0, ChiTMode::FixedPoint).unwrap();
        assert!(report.chi_be.abs() < 1e-9);
        // chi_t = chi_het = 1 for the ideal heterodyne receiver.
        assert_relative_eq!(report.i_ab, (6.0f64 / 2.0).log2(), max_relative = 1e-9);
        assert!(report.key_rate > 0.0);
    }

    #[test]
    fn bad_inputs_rejected() {
        let params = SystemParams::paper2017();
        assert!(holevo_bound(&params, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(holevo_bound(&params, 1.5, 1.0, 1.0, 1.0).is_err());
        assert!(holevo_bound(&params, 0.5, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn key_rate_identity_stored() {
        let params = SystemParams::paper2017();
        let r = key_rate(&params, 20.0, ChiTMode::FixedPoint).unwrap();
        assert_eq!(r.key_rate, params.beta * r.i_ab - r.chi_be);
        assert!(r.key_rate > 0.0);
        let far = key_rate(&params, 40.0, ChiTMode::FixedPoint).unwrap();
        assert!(far.key_rate < 0.0);
    }
}
