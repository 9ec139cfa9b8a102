use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sffcc::dephasing::{
    analytic_fidelity, delta_from_pz, sample_fidelity, stochastic_infidelity, t2star_requirement,
    ClusterParams,
};

/// Direct sum over every pair of M-bit strings.
fn naive_fidelity(p: &ClusterParams) -> f64 {
    let k = p.n as f64 * p.tau_round * p.delta_oh;
    let mut total = 0.0;
    for x in 0u32..1 << p.m {
        for y in 0u32..1 << p.m {
            let d = x.count_ones() as f64 - y.count_ones() as f64;
            total += (-0.5 * k * k * d * d).exp();
        }
    }
    total / 4f64.powi(p.m as i32)
}

/// A cluster survives iff every encoded qubit saw an even number of Zs.
fn exact_stochastic(p: f64, n: u32, m: usize) -> f64 {
    1.0 - ((1.0 + (1.0 - 2.0 * p).powi(n as i32)) / 2.0).powi(m as i32)
}

#[test]
fn analytic_matches_the_double_sum() {
    for m in 1..=7 {
        for (n, delta) in [(1, 0.0), (4, 0.02), (8, 0.07381), (10, 0.3)] {
            let p = ClusterParams { m, n, tau_round: 1.0, delta_oh: delta };
            let a = analytic_fidelity(&p).unwrap();
            assert!((a - naive_fidelity(&p)).abs() < 1e-12, "m={m} n={n}");
        }
    }
    let p = ClusterParams { m: 3, n: 2, tau_round: 1.0, delta_oh: 0.0 };
    assert_eq!(analytic_fidelity(&p).unwrap(), 1.0);
}

#[test]
fn matched_overhauser_width() {
    assert!((delta_from_pz(0.01, 8, 1.0).unwrap() - 0.07381).abs() < 5e-6);
    assert!((t2star_requirement(0.006, 10, 1.0).unwrap() - 27.97).abs() < 5e-3);
    assert_eq!(delta_from_pz(0.0, 8, 1.0).unwrap(), 0.0);
    assert!(t2star_requirement(0.0, 8, 1.0).unwrap().is_infinite());
    // 2Np >= 1 has no Gaussian match.
    assert!(delta_from_pz(0.07, 8, 1.0).is_err());
    assert!(delta_from_pz(0.01, 0, 1.0).is_err());
}

/// Single-qubit coherence of the Gaussian model equals the Markovian one.
#[test]
fn one_qubit_fidelity_agrees_by_construction() {
    for p_z in [0.001, 0.01, 0.03] {
        let n = 8;
        let delta = delta_from_pz(p_z, n, 1.0).unwrap();
        let a = 1.0 - analytic_fidelity(&ClusterParams { m: 1, n, tau_round: 1.0, delta_oh: delta }).unwrap();
        // M = 1: F = (1 + e^{-k²/2})/2 with e^{-k²/2} = 1 - 2Np.
        assert!((a - n as f64 * p_z).abs() < 1e-12);
    }
}

#[test]
fn sampler_matches_its_closed_form() {
    for (p, m) in [(0.01, 3), (0.03, 8)] {
        let pts = stochastic_infidelity(p, 8, &[m], 40_000, 7).unwrap();
        let exact = exact_stochastic(p, 8, m);
        assert!((pts[0].stochastic_infidelity - exact).abs() < 4.0 * pts[0].std_err, "{pts:?} {exact}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(sample_fidelity(4, 8, 0.0, &mut rng), 1.0);
    // p = 1 flips every round: even N is invisible, odd N always fails.
    assert_eq!(sample_fidelity(2, 8, 1.0, &mut rng), 1.0);
    assert_eq!(sample_fidelity(2, 7, 1.0, &mut rng), 0.0);
}

#[test]
fn small_rates_agree_within_one_sigma() {
    for p in [0.001, 0.005, 0.01] {
        for pt in stochastic_infidelity(p, 8, &[1, 2, 4, 8], 20_000, 1).unwrap() {
            assert!(pt.deviation_sigma() < 1.0, "p={p} {pt:?}");
        }
    }
}

#[test]
fn deterministic_in_the_seed() {
    let a = stochastic_infidelity(0.01, 8, &[2, 5], 1000, 3).unwrap();
    assert_eq!(a, stochastic_infidelity(0.01, 8, &[2, 5], 1000, 3).unwrap());
    assert!(stochastic_infidelity(0.01, 8, &[2], 1, 3).is_err());
}
