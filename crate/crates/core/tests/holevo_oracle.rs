//! The closed-form Holevo bound against a numerical covariance-matrix model:
//! Alice-Bob EPR state, a trusted noisy detector modelled as a beamsplitter
//! fed by one arm of a second EPR pair, heterodyne conditioning on Bob.

use llocv::keyrate::{g_entropy, holevo_bound};
use llocv::params::SystemParams;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn omega(modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Symplectic eigenvalues, ascending.
fn symplectic_eigenvalues(gamma: &DMatrix<f64>) -> Vec<f64> {
    let modes = gamma.nrows() / 2;
    let w = omega(modes);
    let root = sqrt_psd(gamma);
    let m = &root * w.transpose() * gamma * &w * &root;
    let m = (&m + m.transpose()) * 0.5;
    let mut squares: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    squares.sort_by(f64::total_cmp);
    squares.chunks(2).map(|pair| (0.5 * (pair[0] + pair[1])).sqrt()).collect()
}

fn set_block(m: &mut DMatrix<f64>, i: usize, j: usize, diag: (f64, f64)) {
    m[(2 * i, 2 * j)] = diag.0;
    m[(2 * i + 1, 2 * j + 1)] = diag.1;
    m[(2 * j, 2 * i)] = diag.0;
    m[(2 * j + 1, 2 * i + 1)] = diag.1;
}

struct Oracle {
    ab: Vec<f64>,
    conditional: Vec<f64>,
}

/// Modes: 0 Alice, 1 Bob, 2 detector input, 3 its purifying partner.
fn oracle(v: f64, t: f64, chi_line: f64, eta: f64, v_ele: f64) -> Oracle {
    let mut g = DMatrix::zeros(8, 8);
    let cab = (t * (v * v - 1.0)).sqrt();
    let vb = t * (v + chi_line);
    let vd = 1.0 + 2.0 * v_ele / (1.0 - eta);
    let cd = (vd * vd - 1.0).sqrt();
    set_block(&mut g, 0, 0, (v, v));
    set_block(&mut g, 1, 1, (vb, vb));
    set_block(&mut g, 0, 1, (cab, -cab));
    set_block(&mut g, 2, 2, (vd, vd));
    set_block(&mut g, 3, 3, (vd, vd));
    set_block(&mut g, 2, 3, (cd, -cd));

    let ab = symplectic_eigenvalues(&g.view((0, 0), (4, 4)).into_owned());

    let (s, r) = (eta.sqrt(), (1.0 - eta).sqrt());
    let mut bs = DMatrix::identity(8, 8);
    for q in 0..2 {
        bs[(2 + q, 2 + q)] = s;
        bs[(2 + q, 4 + q)] = r;
        bs[(4 + q, 2 + q)] = -r;
        bs[(4 + q, 4 + q)] = s;
    }
    let g = &bs * g * bs.transpose();

    let rest = [0, 1, 4, 5, 6, 7];
    let gamma_rest = DMatrix::from_fn(6, 6, |i, j| g[(rest[i], rest[j])]);
    let sigma = DMatrix::from_fn(6, 2, |i, j| g[(rest[i], 2 + j)]);
    let gamma_b = DMatrix::from_fn(2, 2, |i, j| g[(2 + i, 2 + j)]);
    let inv = (gamma_b + DMatrix::identity(2, 2)).try_inverse().unwrap();
    let conditioned = gamma_rest - &sigma * inv * sigma.transpose();

    Oracle {
        ab,
        conditional: symplectic_eigenvalues(&conditioned),
    }
}

fn entropy(lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|l| g_entropy(((l - 1.0) / 2.0).max(0.0)).unwrap()).sum()
}

fn compare(v_a: f64, t: f64, xi: f64, eta: f64, v_ele: f64) {
    let params = SystemParams {
        v_a,
        eta,
        v_ele,
        ..SystemParams::paper2017()
    };
    let chi_line = 1.0 / t - 1.0 + xi;
    let chi_het = (2.0 - eta + 2.0 * v_ele) / eta;
    let chi_t = chi_line + chi_het / t;
    let (chi_be, e) = holevo_bound(&params, t, chi_line, chi_het, chi_t).unwrap();

    let o = oracle(v_a + 1.0, t, chi_line, eta, v_ele);
    let mut closed_ab = [e.lambda1, e.lambda2];
    closed_ab.sort_by(f64::total_cmp);
    let mut closed_cond = [e.lambda3, e.lambda4, e.lambda5];
    closed_cond.sort_by(f64::total_cmp);
    for (a, b) in closed_ab.iter().zip(&o.ab).chain(closed_cond.iter().zip(&o.conditional)) {
        assert!((a - b).abs() <= 1e-7 * b.max(1.0), "closed {a} vs oracle {b}");
    }
    let expected = (entropy(&o.ab) - entropy(&o.conditional)).max(0.0);
    assert!((chi_be - expected).abs() <= 1e-7, "chi_be {chi_be} vs oracle {expected}");
}

#[test]
fn matches_at_standard_operating_points() {
    for (t, xi) in [(1.0, 0.01), (0.63, 0.05), (0.4, 0.11), (0.1, 0.11), (0.01, 0.2)] {
        compare(4.0, t, xi, 0.5, 0.01);
    }
}

#[test]
fn oracle_eigenvalues_are_physical() {
    let o = oracle(5.0, 0.3, 1.0 / 0.3 - 1.0 + 0.1, 0.6, 0.05);
    assert!(o.ab.iter().chain(&o.conditional).all(|&l| l >= 1.0 - 1e-9));
    // The detector purification leaves one mode pure after conditioning.
    assert!((o.conditional[0] - 1.0).abs() < 1e-8, "{:?}", o.conditional);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_across_parameter_space(
        v_a in 0.5f64..20.0,
        t in 0.02f64..1.0,
        xi in 0.0f64..0.3,
        eta in 0.3f64..0.95,
        v_ele in 0.0f64..0.2,
    ) {
        compare(v_a, t, xi, eta, v_ele);
    }
}
