//! Pulse-level Monte Carlo simulation of the phase-reference receiver.
//!
//! Each pulse pair is simulated independently:
//!
//! * the reference pulse leaves Alice as `(E_ref, 0)`, is rotated by the
//!   free-running laser phase `phi_R` and detected with input-referred noise
//!   `chi_t + 1` per quadrature, at the signal-leg noise level even when
//!   Eve reroutes it;
//! * Bob estimates `phi_hat = atan2(P_B^R, X_B^R)`;
//! * the signal carries Alice's Gaussian quadratures rotated by
//!   `phi_s = phi_R + drift`, picks up shot, electronic and excess noise,
//!   and is rotated back by `-phi_hat`.
//!
//! All measured quadratures are in SNU at the detector output, where the sum
//! of every vacuum contribution of a heterodyne quadrature is exactly 1.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::attack::noise_tolerance;
use crate::error::{domain, Error, Result};
use crate::noise::{drift_variance, solve_noise_budget};
use crate::params::{AttackScenario, ModelOptions, SystemParams};

/// Generator recorded in every summary so runs can be reproduced.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = shard index";
/// Pulses drawn from one RNG stream.
pub const SHARD_SIZE: usize = 1 << 16;
/// Blocks used for batch-means standard errors.
pub const ESTIMATOR_BLOCKS: usize = 20;
/// Smallest batch accepted by the estimators.
pub const MIN_ESTIMATOR_SAMPLES: usize = 1000;

/// Physical settings of one simulated run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSetup {
    pub v_a: f64,
    pub eta: f64,
    pub v_ele: f64,
    pub t_signal: f64,
    /// Transmittance seen by the reference pulses (`t_low` under attack).
    pub t_reference: f64,
    /// Reference amplitude at Alice, `sqrt(E_ref^2)`.
    pub e_ref: f64,
    /// Input-referred total noise of the reference measurement.
    pub chi_reference: f64,
    /// Excess noise injected on each signal quadrature, `xi_e + xi_e^RPA`.
    pub xi_signal: f64,
    pub v_drift: f64,
    pub attack_on: bool,
    pub xi_e_rpa: f64,
}

impl PulseSetup {
    /// Setup for `scenario`; with `attack_on` the reference leg uses `t_low`
    /// and the signal carries Eve's extra noise.
    pub fn new(
        params: &SystemParams,
        scenario: &AttackScenario,
        options: &ModelOptions,
        attack_on: bool,
    ) -> Result<Self> {
        scenario.validate(params)?;
        let baseline = solve_noise_budget(params, scenario.length_km, options.chi_t_mode, None)?;
        let state = noise_tolerance(params, scenario, &baseline)?.with_fraction(options.attack_fraction)?;
        let xi_e_rpa = if attack_on { state.xi_e_rpa } else { 0.0 };
        Ok(Self {
            v_a: params.v_a,
            eta: params.eta,
            v_ele: params.v_ele,
            t_signal: state.t_std,
            t_reference: if attack_on { state.t_low } else { state.t_std },
            e_ref: params.e_ref_sq().sqrt(),
            chi_reference: baseline.chi_total,
            xi_signal: params.xi_e + xi_e_rpa,
            v_drift: drift_variance(params)?,
            attack_on,
            xi_e_rpa,
        })
    }

    /// Replace Eve's signal noise, e.g. to model an attack that is not
    /// compensated by the reference leg.
    pub fn with_forced_attack_noise(mut self, xi_e_rpa: f64, xi_e: f64) -> Self {
        self.attack_on = true;
        self.xi_e_rpa = xi_e_rpa;
        self.xi_signal = xi_e + xi_e_rpa;
        self
    }

    fn gain_sq(&self, transmittance: f64) -> f64 {
        self.eta * transmittance / 2.0
    }

    /// Variance of one corrected signal quadrature.
    pub fn predicted_signal_variance(&self) -> f64 {
        self.gain_sq(self.t_signal) * (self.v_a + self.xi_signal) + 1.0 + self.v_ele
    }

    /// Small-angle prediction of `var(phi_hat - phi_R)`.
    pub fn predicted_phase_error_variance(&self) -> f64 {
        self.t_signal * (self.chi_reference + 1.0) / (self.t_reference * self.e_ref * self.e_ref)
    }

    /// Reference amplitude Bob expects without an attack.
    pub fn expected_reference_amplitude(&self) -> f64 {
        self.gain_sq(self.t_signal).sqrt() * self.e_ref
    }

    /// Variance of each reference quadrature around its mean.
    pub fn reference_noise_variance(&self) -> f64 {
        self.gain_sq(self.t_signal) * (self.chi_reference + 1.0)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.v_a >= 0.0
            && self.eta > 0.0
            && self.v_ele >= 0.0
            && self.t_signal > 0.0
            && self.t_reference > 0.0
            && self.e_ref > 0.0
            && self.chi_reference >= 0.0
            && self.xi_signal >= 0.0
            && self.v_drift >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(domain(format!("invalid pulse setup {self:?}")))
        }
    }
}

/// Per-pulse record of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseBatch {
    pub n: usize,
    pub seed: u64,
    pub setup: PulseSetup,
    pub x_a: Vec<f64>,
    pub p_a: Vec<f64>,
    /// True reference phase `phi_R`.
    pub phi_ref: Vec<f64>,
    /// True signal phase `phi_s`.
    pub phi_true: Vec<f64>,
    /// Estimated phase `phi_hat_R`.
    pub phi_hat: Vec<f64>,
    /// Reference measurement `X_B^R`.
    pub x_ref: Vec<f64>,
    /// Reference measurement `P_B^R`.
    pub p_ref: Vec<f64>,
    /// Bob's phase-corrected signal quadratures.
    pub x_b: Vec<f64>,
    pub p_b: Vec<f64>,
}

impl PulseBatch {
    fn with_capacity(n: usize, seed: u64, setup: PulseSetup) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            n,
            seed,
            setup,
            x_a: v(),
            p_a: v(),
            phi_ref: v(),
            phi_true: v(),
            phi_hat: v(),
            x_ref: v(),
            p_ref: v(),
            x_b: v(),
            p_b: v(),
        }
    }

    pub fn attack_on(&self) -> bool {
        self.setup.attack_on
    }

    /// Write one pulse per row.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "x_a", "p_a", "phi_ref", "phi_true", "phi_hat", "x_ref", "p_ref", "x_b", "p_b",
        ])?;
        for i in 0..self.n {
            let row = [
                self.x_a[i],
                self.p_a[i],
                self.phi_ref[i],
                self.phi_true[i],
                self.phi_hat[i],
                self.x_ref[i],
                self.p_ref[i],
                self.x_b[i],
                self.p_b[i],
            ];
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Simulate `n` pulse pairs for `scenario`.
pub fn simulate_batch(
    params: &SystemParams,
    scenario: &AttackScenario,
    options: &ModelOptions,
    attack_on: bool,
    n: usize,
    seed: u64,
) -> Result<PulseBatch> {
    let setup = PulseSetup::new(params, scenario, options, attack_on)?;
    simulate_with_setup(&setup, n, seed)
}

/// Simulate `n` pulse pairs for an explicit setup.
pub fn simulate_with_setup(setup: &PulseSetup, n: usize, seed: u64) -> Result<PulseBatch> {
    if n == 0 {
        return Err(domain("sample count must be >= 1"));
    }
    setup.validate()?;
    let mut batch = PulseBatch::with_capacity(n, seed, *setup);

    let ref_gain = setup.gain_sq(setup.t_reference).sqrt() * setup.e_ref;
    let ref_noise = setup.reference_noise_variance().sqrt();
    let sig_gain = setup.gain_sq(setup.t_signal).sqrt();
    // Shot noise (all vacuum inputs sum to 1), electronic noise and the
    // injected excess noise, merged into one Gaussian per quadrature.
    let sig_noise = (1.0 + setup.v_ele + sig_gain * sig_gain * setup.xi_signal).sqrt();
    let mod_std = setup.v_a.sqrt();
    let drift_std = setup.v_drift.sqrt();

    for shard in 0..n.div_ceil(SHARD_SIZE) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard as u64);
        let count = SHARD_SIZE.min(n - shard * SHARD_SIZE);
        for _ in 0..count {
            let phi_ref = rng.random_range(-PI..PI);
            let phi_s = phi_ref + drift_std * normal(&mut rng);

            let x_ref = ref_gain * phi_ref.cos() + ref_noise * normal(&mut rng);
            let p_ref = ref_gain * phi_ref.sin() + ref_noise * normal(&mut rng);
            let phi_hat = p_ref.atan2(x_ref);

            let x_a = mod_std * normal(&mut rng);
            let p_a = mod_std * normal(&mut rng);
            let (sin_s, cos_s) = phi_s.sin_cos();
            let x_raw = sig_gain * (x_a * cos_s - p_a * sin_s) + sig_noise * normal(&mut rng);
            let p_raw = sig_gain * (x_a * sin_s + p_a * cos_s) + sig_noise * normal(&mut rng);
            let (sin_h, cos_h) = phi_hat.sin_cos();

            batch.x_a.push(x_a);
            batch.p_a.push(p_a);
            batch.phi_ref.push(phi_ref);
            batch.phi_true.push(phi_s);
            batch.phi_hat.push(phi_hat);
            batch.x_ref.push(x_ref);
            batch.p_ref.push(p_ref);
            batch.x_b.push(x_raw * cos_h + p_raw * sin_h);
            batch.p_b.push(-x_raw * sin_h + p_raw * cos_h);
        }
    }
    Ok(batch)
}

/// Wrap an angle difference into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Sample mean and variance with the standard errors of both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub mean_std_error: f64,
    pub variance_std_error: f64,
}

impl SampleStats {
    pub fn of<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let n = values.len();
        let nf = n.max(1) as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
        let variance = if n > 1 { m2 / (nf - 1.0) } else { 0.0 };
        Self {
            n,
            mean,
            variance,
            mean_std_error: (variance / nf).sqrt(),
            variance_std_error: ((m4 - variance * variance) / nf).max(0.0).sqrt(),
        }
    }
}

/// Statistics of `phi_hat - phi_s` (estimation error plus drift).
pub fn signal_phase_error(batch: &PulseBatch) -> SampleStats {
    SampleStats::of(
        batch
            .phi_hat
            .iter()
            .zip(&batch.phi_true)
            .map(|(h, t)| wrap_angle(h - t)),
    )
}

/// Statistics of `phi_hat - phi_R` (estimation error only).
pub fn reference_phase_error(batch: &PulseBatch) -> SampleStats {
    SampleStats::of(
        batch
            .phi_hat
            .iter()
            .zip(&batch.phi_ref)
            .map(|(h, r)| wrap_angle(h - r)),
    )
}

/// Channel parameters recovered from a batch the way Alice and Bob would.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcessNoiseEstimate {
    pub transmittance: f64,
    /// Total excess noise referred to the channel input (SNU).
    pub xi_total: f64,
    /// Batch-means standard error of `xi_total`.
    pub std_error: f64,
    pub samples: usize,
}

struct Moments {
    xx: f64,
    xy: f64,
    yy: f64,
    count: usize,
}

impl Moments {
    fn of(batch: &PulseBatch, range: std::ops::Range<usize>) -> Self {
        let mut m = Moments {
            xx: 0.0,
            xy: 0.0,
            yy: 0.0,
            count: 0,
        };
        for i in range {
            for (a, b) in [(batch.x_a[i], batch.x_b[i]), (batch.p_a[i], batch.p_b[i])] {
                m.xx += a * a;
                m.xy += a * b;
                m.yy += b * b;
                m.count += 1;
            }
        }
        m
    }

    fn estimate(&self, params: &SystemParams) -> Result<(f64, f64)> {
        if !(self.xx > 0.0) {
            return Err(Error::Numerical {
                message: "degenerate regression: Alice's quadratures have zero variance".into(),
                last: self.xx,
            });
        }
        let slope = self.xy / self.xx;
        let residual = (self.yy - slope * self.xy) / self.count as f64;
        let t_hat = 2.0 * slope * slope / params.eta;
        let xi = (residual - 1.0 - params.v_ele) / (params.eta * t_hat / 2.0);
        Ok((t_hat, xi))
    }
}

/// Regress Bob's corrected quadratures on Alice's and recover `T` and `xi_t`.
pub fn estimate_excess_noise(
    batch: &PulseBatch,
    params: &SystemParams,
    scenario: &AttackScenario,
) -> Result<ExcessNoiseEstimate> {
    scenario.validate(params)?;
    if batch.n < MIN_ESTIMATOR_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_ESTIMATOR_SAMPLES,
            got: batch.n,
        });
    }
    let (transmittance, xi_total) = Moments::of(batch, 0..batch.n).estimate(params)?;

    let block = batch.n / ESTIMATOR_BLOCKS;
    let mut xis = Vec::with_capacity(ESTIMATOR_BLOCKS);
    for b in 0..ESTIMATOR_BLOCKS {
        let (_, xi) = Moments::of(batch, b * block..(b + 1) * block).estimate(params)?;
        xis.push(xi);
    }
    let spread = SampleStats::of(xis.iter().copied());
    Ok(ExcessNoiseEstimate {
        transmittance,
        xi_total,
        std_error: spread.mean_std_error,
        samples: batch.n,
    })
}
