use std::collections::VecDeque;

use rand::rngs::mock::StepRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sffcc::fusion::{
    fusion_outcome, run_encoded_fusion, FusionKind, PhotonPairSource, ReinitBudget, RusPolicy,
};
use sffcc::noise::{
    apply_spin_pauli, benchmarks, propagate_cnot, propagate_hadamard, resolve_bin,
    sample_blinking, sample_branching, stationary_alive, BlinkState, Channel, Emitter,
    NoiseParams, Pauli, PauliFrame, PhotonError, StepKind, SAMPLED,
};

/// `gen::<bool>()` reads the top bit of `next_u32`.
fn always_fail() -> StepRng {
    StepRng::new(0, 0)
}

fn always_succeed() -> StepRng {
    StepRng::new(u64::MAX, 0)
}

const OK: PhotonError = PhotonError { x: 0, z: 0, lost: false };
const LOST: PhotonError = PhotonError { x: 0, z: 0, lost: true };
const ZERR: PhotonError = PhotonError { x: 0, z: SAMPLED, lost: false };

struct Script {
    pairs: VecDeque<(PhotonError, PhotonError)>,
    reinits: u32,
}

impl Script {
    fn new(pairs: &[(PhotonError, PhotonError)]) -> Self {
        Script { pairs: pairs.iter().copied().collect(), reinits: 0 }
    }
}

impl PhotonPairSource for Script {
    fn emit_pair<R: Rng + ?Sized>(&mut self, _: &mut R) -> (PhotonError, PhotonError) {
        self.pairs.pop_front().unwrap_or((OK, OK))
    }

    fn reinitialise(&mut self) {
        self.reinits += 1;
    }
}

fn kinds(r: &sffcc::fusion::EncodedFusionResult) -> Vec<FusionKind> {
    r.records.iter().map(|x| x.kind).collect()
}

#[test]
fn cnot_copies_x_and_moves_z() {
    let mut f = PauliFrame::new();
    f.spin_x = SAMPLED;
    f.spin_z = SAMPLED;
    propagate_cnot(&mut f);
    assert_eq!(*f.last_photon(), PhotonError { x: SAMPLED, z: SAMPLED, lost: false });
    assert_eq!(f.spin(), (true, false));
    propagate_hadamard(&mut f);
    assert_eq!(f.spin(), (false, true));
}

#[test]
fn branching_flips_photon_and_spin_x() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut f = PauliFrame::new();
    propagate_cnot(&mut f);
    assert!(sample_branching(&mut f, 1.0, &mut rng));
    assert!(f.last_photon().has_x() && !f.last_photon().has_z());
    assert_eq!(f.spin(), (true, false));
    assert!(!sample_branching(&mut f, 0.0, &mut rng));
}

#[test]
fn spin_x_inside_the_bin_loses_the_photon() {
    for step in [StepKind::ExciteEarly, StepKind::IntraBinPi] {
        let mut f = PauliFrame::new();
        propagate_cnot(&mut f);
        let eff = apply_spin_pauli(&mut f, Pauli::X, step);
        assert!(eff.bin_flip);
        assert_eq!(f.spin(), (false, false));
        resolve_bin(&mut f, eff.bin_flip);
        assert!(f.last_photon().lost);
        assert_eq!(f.spin(), (true, true));
    }
    // Outside the bin an X is an ordinary spin error.
    let mut f = PauliFrame::new();
    propagate_cnot(&mut f);
    let eff = apply_spin_pauli(&mut f, Pauli::Y, StepKind::RefocusPi);
    assert!(!eff.bin_flip);
    assert_eq!(f.spin(), (true, true));
    assert!(!f.last_photon().lost);
}

#[test]
fn two_flips_in_a_bin_cancel() {
    let mut f = PauliFrame::new();
    propagate_cnot(&mut f);
    let a = apply_spin_pauli(&mut f, Pauli::X, StepKind::ExciteEarly).bin_flip;
    let b = apply_spin_pauli(&mut f, Pauli::X, StepKind::IntraBinPi).bin_flip;
    resolve_bin(&mut f, a ^ b);
    assert!(!f.last_photon().lost);
    assert_eq!(f.spin(), (false, false));
}

#[test]
fn certain_distinguishability_marks_every_photon() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise = NoiseParams { p_x_photon: 1.0, ..NoiseParams::noiseless() };
    let mut em = Emitter::default();
    for _ in 0..10 {
        let ph = em.emit(&noise, &mut rng);
        assert!(ph.has_x() && !ph.has_z() && !ph.lost);
    }
    assert_eq!(em.frame.photons.len(), 10);
    assert_eq!(em.frame.spin(), (false, false));
}

#[test]
fn noiseless_emitter_is_clean() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let noise = NoiseParams::noiseless();
    let mut em = Emitter::default();
    for _ in 0..4 {
        em.hadamard(&noise, &mut rng);
        for _ in 0..3 {
            assert_eq!(em.emit(&noise, &mut rng), OK);
        }
        em.idle(&noise, &mut rng);
    }
    assert_eq!(em.frame.spin(), (false, false));
}

#[test]
fn reinitialise_clears_only_the_spin() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = NoiseParams { p_b: 1.0, ..NoiseParams::noiseless() };
    let mut em = Emitter::default();
    em.emit(&noise, &mut rng);
    assert_eq!(em.frame.spin(), (true, false));
    em.reinitialise();
    assert_eq!(em.frame.spin(), (false, false));
    assert!(em.frame.last_photon().has_x());
}

#[test]
fn blinking_chain_is_stationary() {
    for (f, s) in [(0.06, 1.0), (0.1, 0.3)] {
        let noise = NoiseParams::noiseless().with_blinking(f, s);
        assert!((noise.blink_loss() - f).abs() < 1e-12);
        assert!((noise.p_a + noise.p_d - s).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut st = BlinkState::default();
        let steps = 100_000;
        let dead = (0..steps).filter(|_| sample_blinking(&mut st, noise.p_a, noise.p_d, &mut rng)).count();
        // Two-state chain: variance of the sum is inflated by (1+λ)/(1−λ), λ = 1 − s.
        let lam = 1.0 - s;
        let sigma = (steps as f64 * f * (1.0 - f) * (1.0 + lam) / (1.0 - lam)).sqrt();
        let dev = (dead as f64 - steps as f64 * f).abs();
        assert!(dev < 3.0 * sigma, "f={f} s={s} dead={dead} sigma={sigma}");
    }
}

#[test]
fn first_emission_draws_from_the_stationary_state() {
    let (p_a, p_d) = (0.01, 0.04);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 50_000;
    let dead = (0..n)
        .filter(|_| sample_blinking(&mut BlinkState::default(), p_a, p_d, &mut rng))
        .count() as f64;
    let f = 1.0 - stationary_alive(p_a, p_d);
    assert!((f - 0.8).abs() < 1e-12);
    assert!((dead - n as f64 * f).abs() < 3.0 * (n as f64 * f * (1.0 - f)).sqrt());
    assert_eq!(stationary_alive(0.0, 0.0), 1.0);
}

#[test]
fn hardware_benchmarks() {
    assert!((benchmarks::cyclicity(0.00174) - 573.71).abs() < 0.01);
    assert!((benchmarks::t2_over_tau_rep(0.0036) - 416.67).abs() < 0.01);
    assert!((benchmarks::kappa_bar(0.0036) - 0.0108).abs() < 1e-12);
    assert!((benchmarks::hom_visibility(0.04) - 0.96).abs() < 1e-12);
    assert!((benchmarks::efficiency(0.08) - 0.92).abs() < 1e-12);
    assert!((benchmarks::blink_ratio(0.061) - 15.393).abs() < 0.001);
}

#[test]
fn params_validate_and_channels_parse() {
    assert!(NoiseParams { p_loss: 1.5, ..NoiseParams::default() }.validate().is_err());
    assert!(NoiseParams { p_dep: -0.1, ..NoiseParams::default() }.validate().is_err());
    assert!(NoiseParams::default().validate().is_ok());
    for c in Channel::ALL {
        assert_eq!(c.name().parse::<Channel>().unwrap(), c);
    }
    let mut n = NoiseParams::default();
    n.set_channel(Channel::Blinking, 0.05, 0.5);
    assert!((n.blink_loss() - 0.05).abs() < 1e-12);
    n.set_channel(Channel::Loss, 0.07, 1.0);
    assert_eq!(n.p_loss, 0.07);
}

#[test]
fn fusion_outcome_reads_the_right_parities() {
    let a = PhotonError { x: SAMPLED, z: 0, lost: false };
    let b = PhotonError { x: 0, z: SAMPLED, lost: false };
    let s = fusion_outcome(&a, &b, true, 3);
    assert_eq!((s.kind, s.xx_flipped(), s.zz_flipped()), (FusionKind::Success, Some(true), Some(true)));
    assert_eq!(s.attempt_index, 3);
    let f = fusion_outcome(&a, &a, false, 1);
    assert_eq!((f.kind, f.xx_flipped(), f.zz_flipped()), (FusionKind::Failure, Some(false), None));
    let e = fusion_outcome(&a, &LOST, true, 1);
    assert_eq!((e.kind, e.xx, e.zz), (FusionKind::Erasure, None, None));
}

#[test]
fn rus_stops_at_first_success() {
    let r = run_encoded_fusion(&RusPolicy::with_n(5), &mut Script::new(&[]), &mut always_succeed());
    assert_eq!(r.attempts_used, 1);
    assert_eq!((r.xx_bar, r.zz_bar), (Some(0), Some(0)));
}

#[test]
fn rus_exhausts_on_failures_and_accumulates_xx() {
    let mut src = Script::new(&[(ZERR, OK), (OK, OK), (OK, ZERR), (ZERR, OK)]);
    let r = run_encoded_fusion(&RusPolicy::with_n(4), &mut src, &mut always_fail());
    assert_eq!(r.attempts_used, 4);
    assert_eq!(kinds(&r), vec![FusionKind::Failure; 4]);
    assert_eq!(r.xx_bar.map(|m| m & SAMPLED), Some(1));
    assert_eq!(r.zz_bar, None);
}

#[test]
fn loss_switches_to_biased_measurement() {
    let mut src = Script::new(&[(OK, LOST), (OK, OK)]);
    let r = run_encoded_fusion(&RusPolicy::with_n(4), &mut src, &mut always_fail());
    assert_eq!(kinds(&r), vec![FusionKind::Erasure, FusionKind::BiasedZz]);
    assert!(r.zz_only());
    assert_eq!(r.attempts_used, 2);
    assert_eq!(src.reinits, 0);

    // Without the bias the loss still poisons XX̄ but ZZ̄ can come later.
    let unbiased = RusPolicy { bias_after_loss: false, ..RusPolicy::with_n(4) };
    let mut src = Script::new(&[(OK, LOST), (OK, OK)]);
    let r = run_encoded_fusion(&unbiased, &mut src, &mut always_succeed());
    assert_eq!(kinds(&r), vec![FusionKind::Erasure, FusionKind::Success]);
    assert!(r.zz_only());
}

#[test]
fn all_lost_gives_nothing() {
    let mut src = Script::new(&[(LOST, LOST); 3]);
    let r = run_encoded_fusion(&RusPolicy::with_n(3), &mut src, &mut always_fail());
    assert_eq!((r.xx_bar, r.zz_bar, r.attempts_used), (None, None, 3));
}

#[test]
fn reinit_and_reattempt() {
    let reinit = RusPolicy { reinit_after_zz_only: true, ..RusPolicy::with_n(4) };
    let mut src = Script::new(&[(LOST, OK), (OK, OK)]);
    let r = run_encoded_fusion(&reinit, &mut src, &mut always_succeed());
    assert!(r.reinitialised && r.zz_only());
    assert_eq!(src.reinits, 1);

    let retry = RusPolicy { reattempt_after_reinit: true, ..reinit };
    let mut src = Script::new(&[(LOST, OK), (OK, OK), (OK, OK)]);
    let r = run_encoded_fusion(&retry, &mut src, &mut always_succeed());
    assert_eq!(kinds(&r), vec![FusionKind::Erasure, FusionKind::BiasedZz, FusionKind::Success]);
    assert_eq!((r.xx_bar.is_some(), r.zz_bar.is_some()), (true, true));

    // A shared budget that is already spent cannot restart.
    let tight = RusPolicy { n: 2, ..retry };
    let mut src = Script::new(&[(LOST, OK), (OK, OK)]);
    let r = run_encoded_fusion(&tight, &mut src, &mut always_succeed());
    assert_eq!(r.attempts_used, 2);
    assert!(r.zz_only());

    // A fresh budget allows N more attempts after the readout.
    let fresh = RusPolicy { reinit_budget: ReinitBudget::Fresh, ..tight };
    let mut src = Script::new(&[(LOST, OK), (OK, OK), (OK, OK), (OK, OK)]);
    let r = run_encoded_fusion(&fresh, &mut src, &mut always_fail());
    assert_eq!(r.attempts_used, 4);
    assert_eq!(src.reinits, 1);
    assert_eq!(r.xx_bar, Some(0));
}

#[test]
fn zero_attempts_is_invalid() {
    assert!(RusPolicy::with_n(0).validate().is_err());
}
