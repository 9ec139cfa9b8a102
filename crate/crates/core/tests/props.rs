use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sffcc::config::parse_grid;
use sffcc::decoder::blossom::min_weight_perfect_matching;
use sffcc::fusion::{run_encoded_fusion, FusionKind, PhotonPairSource, ReinitBudget, RusPolicy};
use sffcc::montecarlo::{crossing, wilson, Tally, Z95};
use sffcc::noise::{
    apply_spin_pauli, propagate_hadamard, Emitter, NoiseParams, Pauli, PauliFrame, PhotonError,
    StepKind,
};

fn pairing_dp(w: &[Vec<i64>]) -> i64 {
    let k = w.len();
    let mut best = vec![i64::MAX; 1 << k];
    best[0] = 0;
    for mask in 0..1usize << k {
        if best[mask] == i64::MAX {
            continue;
        }
        let Some(i) = (0..k).find(|&i| mask & 1 << i == 0) else { continue };
        for j in i + 1..k {
            if mask & 1 << j == 0 {
                let m = mask | 1 << i | 1 << j;
                best[m] = best[m].min(best[mask] + w[i][j]);
            }
        }
    }
    best[(1 << k) - 1]
}

fn symmetric(n: usize, vals: &[i64]) -> Vec<Vec<i64>> {
    let mut w = vec![vec![0; n]; n];
    let mut it = vals.iter().cycle();
    for i in 0..n {
        for j in i + 1..n {
            let v = *it.next().unwrap();
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    w
}

struct Random {
    loss: f64,
    z: f64,
}

impl PhotonPairSource for Random {
    fn emit_pair<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (PhotonError, PhotonError) {
        let mut ph = || PhotonError { x: 0, z: rng.gen_bool(self.z) as u8, lost: rng.gen_bool(self.loss) };
        (ph(), ph())
    }

    fn reinitialise(&mut self) {}
}

fn pauli(i: u8) -> Pauli {
    [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][i as usize % 4]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn blossom_is_optimal(half in 1usize..=6, vals in prop::collection::vec(0i64..50, 1..80)) {
        let n = 2 * half;
        let w = symmetric(n, &vals);
        let mate = min_weight_perfect_matching(n, |i, j| w[i][j]);
        let mut cost = 0;
        for i in 0..n {
            prop_assert_eq!(mate[mate[i]], i);
            prop_assert_ne!(mate[i], i);
            if i < mate[i] {
                cost += w[i][mate[i]];
            }
        }
        prop_assert_eq!(cost, pairing_dp(&w));
    }

    #[test]
    fn grids_are_inclusive_and_increasing(a in 0u32..1000, len in 0u32..40, step in 1u32..100) {
        let (a, step) = (a as f64 / 1000.0, step as f64 / 1000.0);
        let b = a + len as f64 * step;
        let g = parse_grid(&format!("{a}:{b}:{step}")).unwrap();
        prop_assert_eq!(g.len(), len as usize + 1);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        prop_assert!((g[0] - a).abs() < 1e-12 && (g[g.len() - 1] - b).abs() < 1e-9);
    }

    #[test]
    fn tally_addition_is_associative(xs in prop::collection::vec((0u64..5, 0u64..100), 1..20)) {
        let ts: Vec<Tally> = xs.iter().map(|&(f, t)| Tally {
            trials: 1, failures: f.min(1), erasures: 0, errors: 0,
            tau_sum: t, tau_sq_sum: t * t, tau_max: t,
        }).collect();
        let left = ts.iter().fold(Tally::default(), |a, &b| a + b);
        let right = ts.iter().rev().fold(Tally::default(), |a, &b| b + a);
        prop_assert_eq!(left, right);
        prop_assert_eq!(left.tau_max, xs.iter().map(|x| x.1).max().unwrap());
    }

    #[test]
    fn wilson_brackets_the_estimate(n in 1u64..5000, frac in 0.0f64..=1.0) {
        let k = (n as f64 * frac).round() as u64;
        let (lo, hi) = wilson(k, n, Z95);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }

    #[test]
    fn crossing_lies_between_grid_points(
        small in prop::collection::vec(0.0f64..1.0, 2..10),
        big in prop::collection::vec(0.0f64..1.0, 2..10),
    ) {
        let k = small.len().min(big.len());
        let x: Vec<f64> = (0..k).map(|i| i as f64).collect();
        if let Some(c) = crossing(&x, &small[..k], &big[..k]) {
            prop_assert!(c >= 0.0 && c <= (k - 1) as f64);
            let d = |i: usize| big[i] - small[i];
            let lo = c.floor() as usize;
            prop_assert!((0..=lo).any(|i| d(i) < 0.0));
        }
    }

    /// Pauli frame updates are involutions.
    #[test]
    fn frame_updates_square_to_identity(p in 0u8..4, step in 0usize..6, sx in 0u8..2, sz in 0u8..2) {
        let steps = [StepKind::ExciteEarly, StepKind::IntraBinPi, StepKind::ExciteLate,
                     StepKind::RefocusPi, StepKind::Hadamard, StepKind::BufferPi];
        let mut f = PauliFrame { spin_x: sx, spin_z: sz, photons: Vec::new() };
        let before = f.clone();
        let a = apply_spin_pauli(&mut f, pauli(p), steps[step]).bin_flip;
        let b = apply_spin_pauli(&mut f, pauli(p), steps[step]).bin_flip;
        prop_assert_eq!(a, b);
        prop_assert_eq!(&f, &before);
        propagate_hadamard(&mut f);
        propagate_hadamard(&mut f);
        prop_assert_eq!(f, before);
    }

    /// Each emission appends exactly one photon and sets its loss flag only
    /// through the documented channels.
    #[test]
    fn emitter_appends_one_photon(seed in any::<u64>(), rounds in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = NoiseParams { p_b: 0.1, p_dep: 0.1, p_z_spin: 0.1, ..NoiseParams::noiseless() };
        let mut em = Emitter::default();
        for r in 0..rounds {
            em.emit(&noise, &mut rng);
            prop_assert_eq!(em.frame.photons.len(), r + 1);
        }
        // No loss source but in-bin spin X, which also leaves both spin bits toggled.
        let clean = NoiseParams { p_b: 0.3, p_z_spin: 0.3, p_x_photon: 0.3, p_z_photon: 0.3, ..NoiseParams::noiseless() };
        let mut em = Emitter::default();
        for _ in 0..rounds {
            prop_assert!(!em.emit(&clean, &mut rng).lost);
        }
    }

    #[test]
    fn rus_respects_its_budget(
        seed in any::<u64>(), n in 1u32..12, loss in 0.0f64..0.6, z in 0.0f64..0.5,
        bias in any::<bool>(), reinit in any::<bool>(), retry in any::<bool>(), fresh in any::<bool>(),
    ) {
        let policy = RusPolicy {
            n,
            bias_after_loss: bias,
            reinit_after_zz_only: reinit,
            reattempt_after_reinit: retry,
            reinit_budget: if fresh { ReinitBudget::Fresh } else { ReinitBudget::Shared },
            ..RusPolicy::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = run_encoded_fusion(&policy, &mut Random { loss, z }, &mut rng);
        let cap = if reinit && retry && fresh { 2 * n } else { n };
        prop_assert!(r.attempts_used >= 1 && r.attempts_used <= cap);
        prop_assert_eq!(r.records.len() as u32, r.attempts_used);
        for (i, rec) in r.records.iter().enumerate() {
            prop_assert_eq!(rec.attempt_index, i as u32 + 1);
        }
        // A restart keeps the ZZ̄ already read, so its source need not be last.
        if r.zz_bar.is_some() {
            prop_assert!(r.records.iter().any(|x| matches!(x.kind, FusionKind::Success | FusionKind::BiasedZz)));
        }
        if !(reinit && retry) {
            let last = r.records.last().unwrap().kind;
            prop_assert_eq!(r.zz_bar.is_some(), matches!(last, FusionKind::Success | FusionKind::BiasedZz));
        }
        if r.xx_bar.is_some() && r.zz_bar.is_none() {
            prop_assert_eq!(r.attempts_used, n);
        }
        if !bias {
            prop_assert!(r.records.iter().all(|x| x.kind != FusionKind::BiasedZz));
        }
    }
}
