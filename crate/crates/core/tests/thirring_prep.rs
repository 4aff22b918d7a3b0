mod common;

use wqpe_core::experiment::{initial_state, linear_fit, run_prep_experiment, InitialState, PrepExperiment, ThirringSetup};
use wqpe_core::stateprep::{run_preparation, PrepConfig};
use wqpe_core::thirring::{effective_hamiltonian, sigma_chi, suzuki2_step, ThirringParams, TrotterConfig};
use wqpe_core::windows::WindowKind;

fn n4() -> ThirringParams {
    ThirringParams::new(4, 1.0, 0.5).unwrap()
}

#[test]
fn cosine_epsilon_decays_geometrically() {
    // m = 4 keeps all six rounds above the rounding floor.
    let setup = ThirringSetup::new(n4(), 1).unwrap();
    let (psi, _) = initial_state(&setup, &InitialState::Reference).unwrap();
    let cfg = PrepConfig::new(4, WindowKind::Cosine, 6, setup.theta0(), setup.scaling).unwrap();
    let report = run_preparation(&psi, &setup.h_eff, &cfg).unwrap();
    let xs: Vec<f64> = report.records.iter().map(|r| r.r as f64).collect();
    let ys: Vec<f64> = report.records.iter().map(|r| r.epsilon.ln()).collect();
    let (slope, _, r2) = linear_fit(&xs, &ys).unwrap();
    assert!(slope < 0.0 && r2 > 0.9, "slope {slope}, R^2 {r2}");
}

#[test]
fn variational_cosine_sigma_chi_drops() {
    let mut exp = PrepExperiment::new(n4(), 1, 8, 4);
    exp.windows = vec![WindowKind::Cosine];
    let out = run_prep_experiment(&exp).unwrap();
    let s = out.series(WindowKind::Cosine);
    assert!(s[3].sigma_chi < s[0].sigma_chi);
    assert!(s[0].sigma_chi < out.initial_sigma_chi);
}

#[test]
fn sigma_chi_of_effective_ground_state_vanishes() {
    let setup = ThirringSetup::new(n4(), 2).unwrap();
    let ground = setup.eff_eigen.ground_state();
    for n in [1, 10, 50, 200] {
        let (_, s) = sigma_chi(&ground, &setup.u_step, n).unwrap();
        assert!(s < 1e-10, "n = {n}: {s:e}");
    }
}

#[test]
fn trotter_error_second_order_slope() {
    let setup = ThirringSetup::new(n4(), 1).unwrap();
    let lambda = setup.scaling.lambda;
    let h = &setup.model.hamiltonian;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for d in [1u32, 2, 4, 8] {
        let u = suzuki2_step(&setup.model.terms, &TrotterConfig::new(d, lambda).unwrap()).unwrap();
        let h_eff = effective_hamiltonian(&u, d, lambda).unwrap();
        let dt = 2.0 * std::f64::consts::PI * lambda / d as f64;
        xs.push(dt.ln());
        ys.push(h_eff.minus(h).unwrap().spectral_norm().unwrap().ln());
    }
    let (slope, _, _) = linear_fit(&xs, &ys).unwrap();
    assert!((slope - 2.0).abs() <= 0.3, "slope {slope}");
}

#[test]
fn experiment_reproducible() {
    let exp = PrepExperiment::new(n4(), 1, 6, 2);
    let a = run_prep_experiment(&exp).unwrap();
    let b = run_prep_experiment(&exp).unwrap();
    assert_eq!(a.rows, b.rows);
}

#[test]
fn run_index_flips_offset() {
    let mut exp = PrepExperiment::new(n4(), 1, 6, 1);
    exp.initial = InitialState::Reference;
    let even = run_prep_experiment(&exp).unwrap();
    exp.run_index = 1;
    let odd = run_prep_experiment(&exp).unwrap();
    let xi = exp.xi();
    assert!((even.theta0_est - even.theta0 - xi).abs() < 1e-15);
    assert!((odd.theta0_est - odd.theta0 + xi).abs() < 1e-15);
}

#[test]
fn cumulative_success_is_product() {
    let mut exp = PrepExperiment::new(n4(), 2, 7, 5);
    exp.initial = InitialState::Reference;
    let out = run_prep_experiment(&exp).unwrap();
    for w in WindowKind::ALL {
        let mut acc = 1.0;
        for row in out.series(w) {
            acc *= row.success_prob;
            assert!((row.cumulative_success - acc).abs() < 1e-14);
            assert!(row.success_prob > 0.0 && row.success_prob <= 1.0 + 1e-12);
        }
    }
}
