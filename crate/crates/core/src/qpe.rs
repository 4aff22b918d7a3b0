//! Windowed phase estimation: analytic outcome distributions, circuit
//! simulation, error rates, qubit counts and the circular-variance metric.

use std::f64::consts::PI;

use crate::circuit::{qpe_circuit_marginal, PhaseOracle};
use crate::error::{Error, Result};
use crate::statevector::{centered_label, QuantumState, UnitaryOperator};
use crate::windows::{cosine_error_tail_bound, filter, WindowKind};

/// Widest ancilla register for which analytic sums are evaluated.
pub const MAX_SUM_M: u32 = 24;
/// Values below this are reported as numerically zero.
pub const NUMERICAL_ZERO: f64 = 1e-25;
/// Default trapezoid node count for [`cbar_metric`].
pub const CBAR_NODES: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpeConfig {
    pub t: u32,
    pub p: u32,
    pub window: WindowKind,
    pub lambda: f64,
}

impl QpeConfig {
    pub fn new(t: u32, p: u32, window: WindowKind, lambda: f64) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidParameter("precision qubits t must be at least 1".into()));
        }
        if t + p > MAX_SUM_M {
            return Err(Error::AncillaRange { m: t + p, min: 1, max: MAX_SUM_M });
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda = {lambda}")));
        }
        Ok(Self { t, p, window, lambda })
    }

    /// All `m` ancillas counted as precision qubits.
    pub fn with_m(m: u32, window: WindowKind) -> Result<Self> {
        Self::new(m, 0, window, 1.0)
    }

    pub fn m(&self) -> u32 {
        self.t + self.p
    }
}

/// Outcome probabilities in label order `q = -2^(m-1) .. 2^(m-1) - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    m: u32,
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn from_label_order(m: u32, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != 1usize << m {
            return Err(Error::DimensionMismatch { expected: 1 << m, actual: probabilities.len() });
        }
        Ok(Self { m, probabilities })
    }

    /// Reorders a storage-indexed marginal into label order.
    pub fn from_storage_order(m: u32, storage: &[f64]) -> Result<Self> {
        let size = 1usize << m;
        if storage.len() != size {
            return Err(Error::DimensionMismatch { expected: size, actual: storage.len() });
        }
        let half = size / 2;
        let probabilities = (0..size).map(|i| storage[(i + half) % size]).collect();
        Ok(Self { m, probabilities })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn labels(&self) -> impl Iterator<Item = i64> {
        let half = 1i64 << (self.m - 1);
        -half..half
    }

    /// Probability of label `q`, reduced modulo `2^m`.
    pub fn prob(&self, q: i64) -> f64 {
        let size = 1i64 << self.m;
        let idx = (q + size / 2).rem_euclid(size);
        self.probabilities[idx as usize]
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn total_variation(&self, other: &OutcomeDistribution) -> Result<f64> {
        if other.m != self.m {
            return Err(Error::DimensionMismatch { expected: 1 << self.m, actual: 1 << other.m });
        }
        Ok(0.5 * self.probabilities.iter().zip(&other.probabilities).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// `sum_i w_i P_i` for distributions over the same register.
    pub fn mixture(parts: &[(f64, OutcomeDistribution)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let mut probabilities = vec![0.0; first.1.probabilities.len()];
        for (w, d) in parts {
            if d.m != first.1.m {
                return Err(Error::DimensionMismatch { expected: 1 << first.1.m, actual: 1 << d.m });
            }
            for (acc, p) in probabilities.iter_mut().zip(&d.probabilities) {
                *acc += w * p;
            }
        }
        Ok(Self { m: first.1.m, probabilities })
    }
}

/// Nearest grid label `z = floor(x + 1/2)` and offset `x - z` in `[-1/2, 1/2)`.
pub fn nearest_bin(x: f64) -> (i64, f64) {
    let z = (x + 0.5).floor();
    (z as i64, x - z)
}

/// `P(q) = |filter(q - 2^m theta)|^2`.
pub fn analytic_distribution(theta: f64, cfg: &QpeConfig) -> Result<OutcomeDistribution> {
    let m = cfg.m();
    let size = (1u64 << m) as f64;
    let shift = size * theta;
    let half = 1i64 << (m - 1);
    let probabilities = (-half..half).map(|q| filter(cfg.window, q as f64 - shift, m).norm_sqr()).collect();
    Ok(OutcomeDistribution { m, probabilities })
}

/// Simulates the windowed QPE circuit with repeated applications of `u`.
pub fn run_qpe_circuit(input: &QuantumState, u: &UnitaryOperator, cfg: &QpeConfig) -> Result<OutcomeDistribution> {
    run_qpe_circuit_with(input, &PhaseOracle::Repeated(u.clone()), cfg)
}

pub fn run_qpe_circuit_with(input: &QuantumState, oracle: &PhaseOracle, cfg: &QpeConfig) -> Result<OutcomeDistribution> {
    let m = cfg.m();
    let marginal = qpe_circuit_marginal(input, oracle, m, cfg.window)?;
    OutcomeDistribution::from_storage_order(m, &marginal)
}

/// Probability mass outside the `2k` outcomes `-k <= l < k` around the
/// nearest bin, `k = 2^(p-1)`, for a phase offset `delta2m = 2^m delta`.
///
/// Summed term by term over the tails, smallest terms first, so exact
/// zeros stay exact.
pub fn error_rate(t: u32, p: u32, delta2m: f64, window: WindowKind) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidParameter("extra qubits p must be at least 1".into()));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("precision qubits t must be at least 1".into()));
    }
    let m = t + p;
    if m > MAX_SUM_M {
        return Err(Error::AncillaRange { m, min: 2, max: MAX_SUM_M });
    }
    if !delta2m.is_finite() {
        return Err(Error::InvalidParameter(format!("delta2m = {delta2m}")));
    }
    let half = 1i64 << (m - 1);
    let k = 1i64 << (p - 1);
    let term = |l: i64| filter(window, l as f64 - delta2m, m).norm_sqr();
    let mut e = 0.0;
    for l in (k..half).rev() {
        e += term(l);
    }
    for l in -half..-k {
        e += term(l);
    }
    Ok(e)
}

/// Probability of the `2k` outcomes kept by the coarse-graining.
pub fn window_mass(t: u32, p: u32, delta2m: f64, window: WindowKind) -> Result<f64> {
    let m = t + p;
    if p == 0 || t == 0 || m > MAX_SUM_M {
        return Err(Error::InvalidParameter(format!("t = {t}, p = {p}")));
    }
    let k = 1i64 << (p - 1);
    Ok((-k..k).map(|l| filter(window, l as f64 - delta2m, m).norm_sqr()).sum())
}

/// Smallest `p` whose closed-form bound guarantees error rate `e_target`.
pub fn min_extra_qubits(e_target: f64, window: WindowKind) -> Result<u32> {
    if !(e_target > 0.0 && e_target < 1.0) {
        return Err(Error::InvalidParameter(format!("target error rate {e_target} not in (0, 1)")));
    }
    let arg = match window {
        WindowKind::Rectangular => 1.0 / (2.0 * e_target) + 0.5,
        WindowKind::Cosine => PI.powf(2.0 / 3.0) / (48f64.cbrt() * e_target.cbrt()) + 2.0,
    };
    Ok(arg.log2().ceil() as u32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundCheck {
    pub t: u32,
    pub p: u32,
    pub empirical_max: f64,
    pub worst_delta2m: f64,
    pub bound: f64,
}

impl TailBoundCheck {
    pub fn holds(&self) -> bool {
        self.empirical_max < self.bound
    }
}

pub const TAIL_GRID_POINTS: usize = 101;

/// Largest cosine error rate over an evenly spaced `delta2m` grid on
/// `[-1/2, 1/2]`, against `pi^2 / (48 (k-2)^3)`.
pub fn verify_tail_bound(t: u32, p: u32) -> Result<TailBoundCheck> {
    let bound = cosine_error_tail_bound(p)?;
    let mut empirical_max = f64::NEG_INFINITY;
    let mut worst_delta2m = 0.0;
    for i in 0..TAIL_GRID_POINTS {
        let d = -0.5 + i as f64 / (TAIL_GRID_POINTS - 1) as f64;
        let e = error_rate(t, p, d, WindowKind::Cosine)?;
        if e > empirical_max {
            empirical_max = e;
            worst_delta2m = d;
        }
    }
    Ok(TailBoundCheck { t, p, empirical_max, worst_delta2m, bound })
}

/// `(1/2 pi) sum_z int Pr(z|theta) sin^2((theta - 2 pi z / 2^m)/2) dtheta`
/// with the trapezoid rule on [`CBAR_NODES`] nodes over one period.
pub fn cbar_metric(cfg: &QpeConfig) -> Result<f64> {
    cbar_metric_with_nodes(cfg, CBAR_NODES)
}

pub fn cbar_metric_with_nodes(cfg: &QpeConfig, nodes: usize) -> Result<f64> {
    let m = cfg.m();
    if m > crate::statevector::MAX_QFT_QUBITS {
        return Err(Error::AncillaRange { m, min: 1, max: crate::statevector::MAX_QFT_QUBITS });
    }
    if nodes == 0 {
        return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
    }
    let size = 1usize << m;
    let sizef = size as f64;
    let h = 2.0 * PI / nodes as f64;
    let mut total = 0.0;
    for j in 0..nodes {
        let theta = -PI + h * j as f64;
        let shift = sizef * theta / (2.0 * PI);
        let mut inner = 0.0;
        for idx in 0..size {
            let z = centered_label(idx, m) as f64;
            let pr = filter(cfg.window, z - shift, m).norm_sqr();
            let s = ((theta - 2.0 * PI * z / sizef) / 2.0).sin();
            inner += pr * s * s;
        }
        total += inner;
    }
    // The integrand is 2 pi periodic, so the trapezoid rule is a plain sum.
    Ok(total * h / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::testutil::random_hermitian;
    use crate::statevector::{eig_hermitian, expi_hermitian, CMatrix, CVector, HermitianOperator, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(m: u32, window: WindowKind) -> QpeConfig {
        QpeConfig::with_m(m, window).unwrap()
    }

    #[test]
    fn on_grid_rectangular_is_deterministic() {
        let m = 6;
        for z in [-32i64, -5, 0, 7, 31] {
            let d = analytic_distribution(z as f64 / 64.0, &cfg(m, WindowKind::Rectangular)).unwrap();
            for q in d.labels() {
                let want = if q == z { 1.0 } else { 0.0 };
                assert!((d.prob(q) - want).abs() < 1e-15, "z={z} q={q}");
            }
        }
    }

    #[test]
    fn cosine_half_offset_splits_evenly() {
        let m = 10;
        for sign in [-1.0, 1.0] {
            let theta = (100.0 + sign * 0.5) / 1024.0;
            let d = analytic_distribution(theta, &cfg(m, WindowKind::Cosine)).unwrap();
            let (lo, hi) = if sign > 0.0 { (100, 101) } else { (99, 100) };
            assert!((d.prob(lo) - 0.5).abs() < 1e-12);
            assert!((d.prob(hi) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rectangular_half_offset_near_4_over_pi2() {
        let theta = 0.5 / 1024.0;
        let d = analytic_distribution(theta, &cfg(10, WindowKind::Rectangular)).unwrap();
        let p = d.prob(0);
        assert!(p >= 4.0 / (PI * PI) && p <= 4.0 / (PI * PI) + 1e-3);
        assert!((p - 0.4053).abs() < 1e-4);
    }

    #[test]
    fn nearest_bin_rounds_half_down() {
        assert_eq!(nearest_bin(2.5), (3, -0.5));
        assert_eq!(nearest_bin(-2.5), (-2, -0.5));
        assert_eq!(nearest_bin(0.49), (0, 0.49));
        let (z, d) = nearest_bin(-7.3);
        assert_eq!(z, -7);
        assert!((d + 0.3).abs() < 1e-12);
    }

    fn diagonal_system(rng: &mut ChaCha8Rng, n: usize) -> HermitianOperator {
        let diag: Vec<f64> = (0..1 << n).map(|_| rng.random_range(-1.0..1.0)).collect();
        HermitianOperator::from_real_diagonal(&diag)
    }

    #[test]
    fn circuit_matches_analytic_for_diagonal_eigenstate() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let h = diagonal_system(&mut rng, 3);
        let lambda = 0.2;
        let u = expi_hermitian(&h, 2.0 * PI * lambda).unwrap();
        let eig = eig_hermitian(&h).unwrap();
        let c = QpeConfig::new(5, 0, WindowKind::Cosine, lambda).unwrap();
        for i in 0..8 {
            let psi = eig.eigenstate(i);
            let got = run_qpe_circuit(&psi, &u, &c).unwrap();
            let want = analytic_distribution(lambda * eig.eigenvalues[i], &c).unwrap();
            assert!(got.total_variation(&want).unwrap() < 1e-10);
        }
    }

    #[test]
    fn on_grid_circuit_is_deterministic() {
        let m = 4;
        let h = HermitianOperator::from_real_diagonal(&[3.0 / 16.0, -5.0 / 16.0]);
        let u = expi_hermitian(&h, 2.0 * PI).unwrap();
        let c = QpeConfig::new(m, 0, WindowKind::Rectangular, 1.0).unwrap();
        let d = run_qpe_circuit(&QuantumState::basis(1, 1).unwrap(), &u, &c).unwrap();
        assert!((d.prob(-5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_input_is_weighted_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let h = random_hermitian(&mut rng, 4);
        let lambda = 0.1;
        let eig = eig_hermitian(&h).unwrap();
        let u = expi_hermitian(&h, 2.0 * PI * lambda).unwrap();
        let phi: Vec<C64> = (0..4).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let psi = QuantumState::from_amplitudes(&eig.eigenvectors * CVector::from_vec(phi.clone()))
            .unwrap()
            .normalized()
            .unwrap();
        let coeffs = eig.coefficients(&psi).unwrap();
        for window in WindowKind::ALL {
            let c = QpeConfig::new(5, 0, window, lambda).unwrap();
            let got = run_qpe_circuit(&psi, &u, &c).unwrap();
            let parts: Vec<_> = (0..4)
                .map(|i| (coeffs[i].norm_sqr(), analytic_distribution(lambda * eig.eigenvalues[i], &c).unwrap()))
                .collect();
            let want = OutcomeDistribution::mixture(&parts).unwrap();
            assert!(got.total_variation(&want).unwrap() < 1e-10);
        }
    }

    #[test]
    fn circuit_matches_analytic_across_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for m in 2..=6 {
            for window in WindowKind::ALL {
                for _ in 0..20 {
                    let theta: f64 = rng.random_range(-0.5..0.5);
                    let d = CVector::from_vec(vec![C64::from_polar(1.0, 2.0 * PI * theta), C64::new(1.0, 0.0)]);
                    let u = UnitaryOperator::new(CMatrix::from_diagonal(&d)).unwrap();
                    let c = QpeConfig::new(m, 0, window, 1.0).unwrap();
                    let got = run_qpe_circuit(&QuantumState::basis(1, 0).unwrap(), &u, &c).unwrap();
                    let want = analytic_distribution(theta, &c).unwrap();
                    assert!(got.total_variation(&want).unwrap() < 1e-10, "m={m} {window} theta={theta}");
                }
            }
        }
    }

    #[test]
    fn error_rate_exact_zero_cases() {
        for p in 1..=8 {
            assert!(error_rate(10, p, 0.0, WindowKind::Rectangular).unwrap() <= 1e-28);
            assert!(error_rate(10, p, -0.5, WindowKind::Cosine).unwrap() <= 1e-28);
        }
    }

    #[test]
    fn cosine_beats_rectangular_at_minus_point_three() {
        for p in 2..=8 {
            let c = error_rate(10, p, -0.3, WindowKind::Cosine).unwrap();
            let r = error_rate(10, p, -0.3, WindowKind::Rectangular).unwrap();
            assert!(c < r, "p={p}: {c} vs {r}");
        }
    }

    #[test]
    fn error_rate_reflection_symmetry() {
        // The kept window [-k, k) maps to itself under l -> -1 - l.
        for window in WindowKind::ALL {
            for p in 1..=5 {
                for i in 0..=20 {
                    let d = -0.5 + i as f64 / 20.0;
                    let a = error_rate(6, p, d, window).unwrap();
                    let b = error_rate(6, p, -1.0 - d, window).unwrap();
                    assert!((a - b).abs() < 1e-13, "{window} p={p} d={d}");
                }
            }
        }
    }

    #[test]
    fn error_rate_plus_window_mass_is_one() {
        for window in WindowKind::ALL {
            for p in 1..=6 {
                for d in [-0.5, -0.31, 0.0, 0.2, 0.5] {
                    let e = error_rate(7, p, d, window).unwrap();
                    let w = window_mass(7, p, d, window).unwrap();
                    assert!((1.0 - e - w).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn error_rate_rejects_p_zero() {
        assert!(error_rate(5, 0, 0.1, WindowKind::Cosine).is_err());
    }

    #[test]
    fn min_extra_qubit_examples() {
        assert_eq!(min_extra_qubits(0.1, WindowKind::Rectangular).unwrap(), 3);
        assert_eq!(min_extra_qubits(0.001, WindowKind::Rectangular).unwrap(), 9);
        assert_eq!(min_extra_qubits(0.001, WindowKind::Cosine).unwrap(), 3);
        let a = PI.powf(2.0 / 3.0) / (48f64.cbrt() * 0.001f64.cbrt());
        assert!((a - 5.902).abs() < 1e-3);
        assert!(min_extra_qubits(0.0, WindowKind::Cosine).is_err());
        assert!(min_extra_qubits(1.0, WindowKind::Cosine).is_err());
    }

    #[test]
    fn tail_bound_holds_for_t8() {
        for p in 3..=5 {
            let check = verify_tail_bound(8, p).unwrap();
            assert!(check.holds(), "{check:?}");
        }
        assert!(verify_tail_bound(8, 2).is_err());
    }

    #[test]
    fn cbar_m1_closed_values() {
        // Two outcomes: rect Pr = cos^2, sin^2 gives 1/4; cosine Pr = 1/2 gives 1/2.
        let r = cbar_metric(&cfg(1, WindowKind::Rectangular)).unwrap();
        let c = cbar_metric(&cfg(1, WindowKind::Cosine)).unwrap();
        assert!((r - 0.25).abs() < 1e-6);
        assert!((c - 0.5).abs() < 1e-6);
    }

    #[test]
    fn cbar_cosine_below_rectangular() {
        let r = cbar_metric(&cfg(6, WindowKind::Rectangular)).unwrap();
        let c = cbar_metric(&cfg(6, WindowKind::Cosine)).unwrap();
        assert!(c < r, "{c} vs {r}");
    }

    #[test]
    fn cbar_quadrature_converged() {
        for window in WindowKind::ALL {
            let a = cbar_metric_with_nodes(&cfg(6, window), 1 << 12).unwrap();
            let b = cbar_metric_with_nodes(&cfg(6, window), 1 << 13).unwrap();
            assert!((a - b).abs() < 1e-8);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn kinds() -> impl Strategy<Value = WindowKind> {
            prop_oneof![Just(WindowKind::Rectangular), Just(WindowKind::Cosine)]
        }

        proptest! {
            #[test]
            fn distributions_sum_to_one(m in 1u32..=12, theta in -0.5f64..0.5, window in kinds()) {
                let d = analytic_distribution(theta, &cfg(m, window)).unwrap();
                prop_assert!((d.total() - 1.0).abs() < 1e-10);
                prop_assert!(d.probabilities().iter().all(|&p| p >= 0.0));
            }

            #[test]
            fn coarsening_consistency(t in 1u32..=6, p in 1u32..=5, d in -0.5f64..=0.5, window in kinds()) {
                let e = error_rate(t, p, d, window).unwrap();
                let w = window_mass(t, p, d, window).unwrap();
                prop_assert!((1.0 - e - w).abs() < 1e-12);
            }

            #[test]
            fn reflection_symmetry(t in 1u32..=6, p in 1u32..=5, d in -0.5f64..=0.5, window in kinds()) {
                let a = error_rate(t, p, d, window).unwrap();
                let b = error_rate(t, p, -1.0 - d, window).unwrap();
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cosine_worst_case_half() {
        let m = 10;
        let c = cfg(m, WindowKind::Cosine);
        let mut worst = f64::INFINITY;
        for i in 0..201 {
            let d = -0.5 + i as f64 / 200.0;
            let theta = (17.0 + d) / 1024.0;
            let (z, _) = nearest_bin(1024.0 * theta);
            worst = worst.min(analytic_distribution(theta, &c).unwrap().prob(z));
        }
        assert!(worst >= 0.5 - 1e-12);
        assert!((worst - 0.5).abs() < 1e-12);
    }
}
