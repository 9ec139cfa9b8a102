//! Amplitude-level simulation of the time-bin generation protocol, used to
//! check the Pauli-frame rules of [`crate::noise`] fault by fault.
//!
//! Conventions: spin `↑` is basis state 0 and `↓` is 1; only `↓` is optically
//! excited. The π rotation maps `↑ → ↓` and `↓ → -↑`. Photon qubits use early
//! = 0 and late = 1. A photon slot also records vacuum and double emission,
//! which are outside the qubit space and count as loss.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::{
    apply_spin_pauli, propagate_cnot, propagate_hadamard, resolve_bin, sample_branching,
    sample_laser_spin_flip, Pauli, PauliFrame, StepKind,
};

const TOL: f64 = 1e-9;

/// Emissions recorded in one photon slot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub early: u8,
    pub late: u8,
}

impl Mode {
    /// Qubit value, or `None` for vacuum and double emission.
    pub fn qubit(self) -> Option<usize> {
        match (self.early, self.late) {
            (1, 0) => Some(0),
            (0, 1) => Some(1),
            _ => None,
        }
    }
}

type Key = (u8, Vec<Mode>);

/// Unnormalised superposition over spin and photon-slot configurations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpinPhotonState {
    amps: BTreeMap<Key, Complex64>,
    photons: usize,
}

const UP: u8 = 0;
const DOWN: u8 = 1;

impl SpinPhotonState {
    /// Spin initialised in `↑`, no photons.
    pub fn initial() -> Self {
        let mut amps = BTreeMap::new();
        amps.insert((UP, Vec::new()), Complex64::new(1.0, 0.0));
        SpinPhotonState { amps, photons: 0 }
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (u8, &[Mode], Complex64)> {
        self.amps.iter().map(|((s, m), a)| (*s, m.as_slice(), *a))
    }

    fn map(&mut self, f: impl Fn(u8, &[Mode], Complex64) -> Vec<(u8, Vec<Mode>, Complex64)>) {
        let mut out: BTreeMap<Key, Complex64> = BTreeMap::new();
        for ((s, m), a) in std::mem::take(&mut self.amps) {
            for (s2, m2, a2) in f(s, &m, a) {
                *out.entry((s2, m2)).or_default() += a2;
            }
        }
        out.retain(|_, a| a.norm_sqr() > 1e-30);
        self.amps = out;
    }

    pub fn hadamard(&mut self) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        self.map(|s, m, a| {
            let sign = if s == UP { 1.0 } else { -1.0 };
            vec![(UP, m.to_vec(), a * h), (DOWN, m.to_vec(), a * h * sign)]
        });
    }

    pub fn pi_rotation(&mut self) {
        self.map(|s, m, a| {
            if s == UP {
                vec![(DOWN, m.to_vec(), a)]
            } else {
                vec![(UP, m.to_vec(), -a)]
            }
        });
    }

    /// Opens a new photon slot.
    pub fn new_photon(&mut self) {
        self.photons += 1;
        self.map(|s, m, a| {
            let mut m = m.to_vec();
            m.push(Mode::default());
            vec![(s, m, a)]
        });
    }

    /// Optical excitation: `↓` emits into the current slot.
    pub fn excite(&mut self, late: bool) {
        self.map(|s, m, a| {
            let mut m = m.to_vec();
            if s == DOWN {
                let slot = m.last_mut().expect("no open photon slot");
                if late {
                    slot.late += 1;
                } else {
                    slot.early += 1;
                }
            }
            vec![(s, m, a)]
        });
    }

    /// Excitation followed by decay through the non-cycling transition: the
    /// excited `↓` component ends in `↑` with its photon lost from the mode.
    /// Conditional on the event, the `↑` component is projected out.
    pub fn branching_excite(&mut self) {
        self.map(|s, m, a| if s == DOWN { vec![(UP, m.to_vec(), -a)] } else { Vec::new() });
    }

    pub fn spin_pauli(&mut self, p: Pauli) {
        let (x, z) = pauli_bits(p);
        self.map(|s, m, a| {
            let a = if z && s == DOWN { -a } else { a };
            vec![(if x { s ^ 1 } else { s }, m.to_vec(), a)]
        });
    }

    /// Splits into qubit-space vectors, one per configuration of the lost
    /// slots. Returns the lost slot indices and the vectors over the spin
    /// (bit 0) and the kept photons (bits 1..).
    pub fn split(&self) -> (Vec<usize>, Vec<Vec<Complex64>>) {
        let mut lost = vec![false; self.photons];
        for (_, m) in self.amps.keys() {
            for (k, mode) in m.iter().enumerate() {
                if mode.qubit().is_none() {
                    lost[k] = true;
                }
            }
        }
        let lost_idx: Vec<usize> = (0..self.photons).filter(|&k| lost[k]).collect();
        let kept: Vec<usize> = (0..self.photons).filter(|&k| !lost[k]).collect();
        let dim = 1usize << (1 + kept.len());
        let mut branches: BTreeMap<Vec<Mode>, Vec<Complex64>> = BTreeMap::new();
        for ((s, m), a) in &self.amps {
            let env: Vec<Mode> = lost_idx.iter().map(|&k| m[k]).collect();
            let mut idx = *s as usize;
            let mut in_space = true;
            for (j, &k) in kept.iter().enumerate() {
                match m[k].qubit() {
                    Some(b) => idx |= b << (j + 1),
                    None => in_space = false,
                }
            }
            debug_assert!(in_space);
            branches.entry(env).or_insert_with(|| vec![Complex64::default(); dim])[idx] += *a;
        }
        (lost_idx, branches.into_values().collect())
    }

    /// Qubit vector when no slot is lost.
    pub fn qubit_vector(&self) -> Result<Vec<Complex64>> {
        let (lost, mut b) = self.split();
        if !lost.is_empty() || b.len() != 1 {
            return Err(Error::OracleMismatch("state has lost photons".into()));
        }
        Ok(b.pop().unwrap())
    }
}

fn pauli_bits(p: Pauli) -> (bool, bool) {
    match p {
        Pauli::I => (false, false),
        Pauli::X => (true, false),
        Pauli::Y => (true, true),
        Pauli::Z => (false, true),
    }
}

/// Fault injected at one location of the generation sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultKind {
    None,
    /// Spin Pauli right after the step.
    SpinX,
    SpinY,
    SpinZ,
    /// Branching during the early excitation.
    Branching,
    /// Spin X after the early excitation and again after the intra-bin π.
    DoubleX,
    /// The intra-bin π pulse leaves the spin untouched.
    SkippedRotation,
    /// Incoherent spin flip during a rotation pulse.
    LaserFlip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Fault {
    pub kind: FaultKind,
    /// 0-based encoded qubit.
    pub block: usize,
    /// 0-based round inside the block; ignored for Hadamard faults.
    pub round: usize,
    pub step: StepKind,
}

/// Generation sequence with at most one fault. Each block is a Hadamard
/// followed by `n` rounds of excite, π, excite, π.
pub fn evolve(n: usize, m: usize, fault: Option<Fault>) -> SpinPhotonState {
    let mut st = SpinPhotonState::initial();
    let at = |b: usize, r: usize, step: StepKind| {
        fault.filter(|f| {
            f.block == b && f.step == step && (step == StepKind::Hadamard || f.round == r)
        })
    };
    let inject = |st: &mut SpinPhotonState, f: Option<Fault>| {
        let Some(f) = f else { return };
        match f.kind {
            FaultKind::SpinX | FaultKind::LaserFlip => st.spin_pauli(Pauli::X),
            FaultKind::SpinY => st.spin_pauli(Pauli::Y),
            FaultKind::SpinZ => st.spin_pauli(Pauli::Z),
            _ => {}
        }
    };
    for b in 0..m {
        st.hadamard();
        inject(&mut st, at(b, 0, StepKind::Hadamard));
        for r in 0..n {
            st.new_photon();
            let f = at(b, r, StepKind::ExciteEarly);
            if f.map(|f| f.kind) == Some(FaultKind::Branching) {
                st.branching_excite();
            } else {
                st.excite(false);
            }
            inject(&mut st, f);
            if f.map(|f| f.kind) == Some(FaultKind::DoubleX) {
                st.spin_pauli(Pauli::X);
            }
            let f = at(b, r, StepKind::IntraBinPi);
            if f.map(|f| f.kind) != Some(FaultKind::SkippedRotation) {
                st.pi_rotation();
            }
            inject(&mut st, f);
            let double = at(b, r, StepKind::ExciteEarly).map(|f| f.kind) == Some(FaultKind::DoubleX);
            if double {
                st.spin_pauli(Pauli::X);
            }
            st.excite(true);
            inject(&mut st, at(b, r, StepKind::ExciteLate));
            st.pi_rotation();
            inject(&mut st, at(b, r, StepKind::RefocusPi));
        }
    }
    st
}

/// Fault-free sequence.
pub fn evolve_ideal(n: usize, m: usize) -> SpinPhotonState {
    evolve(n, m, None)
}

/// Pauli on the final register as bit masks over (spin, photons).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FramePrediction {
    pub x: u64,
    pub z: u64,
    pub lost: Vec<usize>,
}

/// Runs the Pauli-frame rules of the noise module over the same sequence.
pub fn frame_prediction(n: usize, m: usize, fault: Option<Fault>) -> FramePrediction {
    let mut frame = PauliFrame::new();
    // p = 1 never consumes randomness.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let hit = |b: usize, r: usize, step: StepKind| {
        fault.filter(|f| {
            f.block == b && f.step == step && (step == StepKind::Hadamard || f.round == r)
        })
    };
    let apply = |frame: &mut PauliFrame, f: Option<Fault>, step: StepKind, rng: &mut ChaCha8Rng| {
        let Some(f) = f else { return false };
        match f.kind {
            FaultKind::SpinX => apply_spin_pauli(frame, Pauli::X, step).bin_flip,
            FaultKind::SpinY => apply_spin_pauli(frame, Pauli::Y, step).bin_flip,
            FaultKind::SpinZ => apply_spin_pauli(frame, Pauli::Z, step).bin_flip,
            FaultKind::LaserFlip | FaultKind::SkippedRotation => {
                sample_laser_spin_flip(frame, 1.0, step, rng).bin_flip
            }
            FaultKind::DoubleX => {
                apply_spin_pauli(frame, Pauli::X, StepKind::ExciteEarly).bin_flip
                    ^ apply_spin_pauli(frame, Pauli::X, StepKind::IntraBinPi).bin_flip
            }
            FaultKind::Branching | FaultKind::None => false,
        }
    };
    for b in 0..m {
        propagate_hadamard(&mut frame);
        apply(&mut frame, hit(b, 0, StepKind::Hadamard), StepKind::Hadamard, &mut rng);
        for r in 0..n {
            propagate_cnot(&mut frame);
            let f = hit(b, r, StepKind::ExciteEarly);
            if f.map(|f| f.kind) == Some(FaultKind::Branching) {
                sample_branching(&mut frame, 1.0, &mut rng);
            }
            let mut bin = apply(&mut frame, f, StepKind::ExciteEarly, &mut rng);
            bin ^= apply(&mut frame, hit(b, r, StepKind::IntraBinPi), StepKind::IntraBinPi, &mut rng);
            apply(&mut frame, hit(b, r, StepKind::ExciteLate), StepKind::ExciteLate, &mut rng);
            apply(&mut frame, hit(b, r, StepKind::RefocusPi), StepKind::RefocusPi, &mut rng);
            resolve_bin(&mut frame, bin);
        }
    }
    let mut p = FramePrediction::default();
    let (sx, sz) = frame.spin();
    p.x |= sx as u64;
    p.z |= sz as u64;
    for (k, ph) in frame.photons.iter().enumerate() {
        p.x |= (ph.has_x() as u64) << (k + 1);
        p.z |= (ph.has_z() as u64) << (k + 1);
        if ph.lost {
            p.lost.push(k);
        }
    }
    p
}

/// `X^x Z^z ψ` up to global phase.
fn apply_pauli(psi: &[Complex64], x: u64, z: u64) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); psi.len()];
    for (i, &a) in psi.iter().enumerate() {
        let sign = if (i as u64 & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        out[i ^ x as usize] = a * sign;
    }
    out
}

fn normalise(v: &mut [Complex64]) {
    let n: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
}

fn overlap_sqr(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// Density matrix over the kept qubits after tracing the `lost` photons.
fn reduced(psi: &[Complex64], photons: usize, lost: &[usize]) -> Vec<Vec<Complex64>> {
    let kept: Vec<usize> = (0..photons).filter(|k| !lost.contains(k)).collect();
    let dim = 1usize << (1 + kept.len());
    let mut branches: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
    for (i, &a) in psi.iter().enumerate() {
        let env: usize =
            lost.iter().enumerate().map(|(j, &k)| ((i >> (k + 1)) & 1) << j).sum();
        let mut idx = i & 1;
        for (j, &k) in kept.iter().enumerate() {
            idx |= ((i >> (k + 1)) & 1) << (j + 1);
        }
        branches.entry(env).or_insert_with(|| vec![Complex64::default(); dim])[idx] += a;
    }
    density(branches.values())
}

fn density<'a>(branches: impl Iterator<Item = &'a Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut rho: Vec<Vec<Complex64>> = Vec::new();
    for v in branches {
        if rho.is_empty() {
            rho = vec![vec![Complex64::default(); v.len()]; v.len()];
        }
        for i in 0..v.len() {
            for j in 0..v.len() {
                rho[i][j] += v[i] * v[j].conj();
            }
        }
    }
    rho
}

fn distance(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// How the oracle state relates to the frame prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    /// Faulty state equals the predicted Pauli applied to the ideal state.
    Exact,
    /// Same reduced state after tracing the lost photons.
    Loss { photons: Vec<usize> },
    /// A non-Pauli event whose state splits between the predicted Pauli and
    /// the predicted Pauli composed with a spin Z at the fault location.
    PauliWithDephasing { weight: f64, dephasing_weight: f64 },
    Mismatch { detail: String },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Mismatch { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleCheck {
    pub n: usize,
    pub m: usize,
    pub fault: Fault,
    pub prediction: FramePrediction,
    pub verdict: Verdict,
}

/// Compares the faulty evolution against a frame prediction.
pub fn compare(n: usize, m: usize, fault: Fault, pred: &FramePrediction) -> Verdict {
    let ideal = match evolve_ideal(n, m).qubit_vector() {
        Ok(mut v) => {
            normalise(&mut v);
            v
        }
        Err(e) => return Verdict::Mismatch { detail: e.to_string() },
    };
    let faulty = evolve(n, m, Some(fault));
    let (lost, branches) = faulty.split();
    if lost != pred.lost {
        return Verdict::Mismatch {
            detail: format!("oracle loses photons {lost:?}, frame loses {:?}", pred.lost),
        };
    }
    let predicted = apply_pauli(&ideal, pred.x, pred.z);
    if !lost.is_empty() {
        let norm = faulty.norm_sqr();
        let scaled: Vec<Vec<Complex64>> = branches
            .iter()
            .map(|b| b.iter().map(|a| a / norm.sqrt()).collect())
            .collect();
        let rho_f = density(scaled.iter());
        let rho_p = reduced(&predicted, n * m, &lost);
        let d = distance(&rho_f, &rho_p);
        return if d < TOL {
            Verdict::Loss { photons: lost }
        } else {
            Verdict::Mismatch { detail: format!("reduced states differ by {d:.3e}") }
        };
    }
    let mut psi = branches.into_iter().next().expect("empty state");
    normalise(&mut psi);
    let w = overlap_sqr(&predicted, &psi);
    if (w - 1.0).abs() < TOL {
        return Verdict::Exact;
    }
    if fault.kind == FaultKind::Branching {
        let zf = Fault { kind: FaultKind::SpinZ, ..fault };
        if let Ok(mut zpsi) = evolve(n, m, Some(zf)).qubit_vector() {
            normalise(&mut zpsi);
            let companion = apply_pauli(&zpsi, pred.x, pred.z);
            let wz = overlap_sqr(&companion, &psi);
            if w > TOL && (w + wz - 1.0).abs() < TOL {
                return Verdict::PauliWithDephasing { weight: w, dephasing_weight: wz };
            }
        }
    }
    Verdict::Mismatch { detail: format!("overlap with prediction {w:.6}") }
}

/// Every single-fault location of an `n`-photon, `m`-qubit sequence.
pub fn fault_locations(n: usize, m: usize) -> Vec<Fault> {
    let mut out = Vec::new();
    for b in 0..m {
        for kind in [FaultKind::SpinX, FaultKind::SpinY, FaultKind::SpinZ, FaultKind::LaserFlip] {
            out.push(Fault { kind, block: b, round: 0, step: StepKind::Hadamard });
        }
        for r in 0..n {
            let f = |kind, step| Fault { kind, block: b, round: r, step };
            for step in [
                StepKind::ExciteEarly,
                StepKind::IntraBinPi,
                StepKind::ExciteLate,
                StepKind::RefocusPi,
            ] {
                for kind in [FaultKind::SpinX, FaultKind::SpinY, FaultKind::SpinZ] {
                    out.push(f(kind, step));
                }
            }
            out.push(f(FaultKind::LaserFlip, StepKind::IntraBinPi));
            out.push(f(FaultKind::LaserFlip, StepKind::RefocusPi));
            out.push(f(FaultKind::SkippedRotation, StepKind::IntraBinPi));
            out.push(f(FaultKind::Branching, StepKind::ExciteEarly));
            out.push(f(FaultKind::DoubleX, StepKind::ExciteEarly));
        }
    }
    out
}

/// Checks every frame rule against the amplitude simulation for all
/// sequences with `1 ≤ n ≤ max_n` and `1 ≤ m ≤ max_m`.
pub fn verify_rules(max_n: usize, max_m: usize) -> Result<Vec<RuleCheck>> {
    if max_n == 0 || max_m == 0 || max_n * max_m > 6 {
        return Err(Error::InvalidParameter("need 1 <= N, 1 <= M and N*M <= 6".into()));
    }
    let mut out = Vec::new();
    for m in 1..=max_m {
        for n in 1..=max_n {
            let none = Fault { kind: FaultKind::None, block: 0, round: 0, step: StepKind::Hadamard };
            let pred = frame_prediction(n, m, None);
            out.push(RuleCheck { n, m, fault: none, verdict: compare(n, m, none, &pred), prediction: pred });
            for fault in fault_locations(n, m) {
                let pred = frame_prediction(n, m, Some(fault));
                let verdict = compare(n, m, fault, &pred);
                out.push(RuleCheck { n, m, fault, prediction: pred, verdict });
            }
        }
    }
    Ok(out)
}
