//! Trial ensembles, failure statistics and threshold extraction.
//!
//! One trial simulates a full logical cycle (all `6L` layers) of the emitter
//! lattice, decodes the fusion record and scores a failure if any selected
//! correlation surface is erased or flipped.
//!
//! The cycle is periodic in time: the spin frames at the end of the cycle are
//! the frames the cycle started with. Every frame bit carries sensitivity bits
//! to the unknown initial spin errors (bit 1 for X, bit 2 for Z, bits 3 and 4
//! for the second emitter of a pair), which are resolved against the end-of-
//! cycle frames once the cycle is complete.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chronology::tau_logical;
use crate::decoder::{Decoder, DecoderConfig};
use crate::error::{Error, Result};
use crate::fusion::{run_encoded_fusion, EmissionSchedule, PhotonPairSource, RusPolicy};
use crate::lattice::{outcome_id, LatticeSpec, OutcomeKind, SyndromeGraph};
use crate::noise::{Channel, Emitter, NoiseParams, PhotonError, SAMPLED};

const SENS_X: u8 = 2;
const SENS_Z: u8 = 4;

/// Moves the initial-spin sensitivity bits of the second emitter up by two.
fn shift_partner(m: u8) -> u8 {
    (m & SAMPLED) | ((m & (SENS_X | SENS_Z)) << 2)
}

struct Pair<'a> {
    a: &'a mut Emitter,
    b: &'a mut Emitter,
    noise: &'a NoiseParams,
}

impl PhotonPairSource for Pair<'_> {
    fn emit_pair<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (PhotonError, PhotonError) {
        let pa = self.a.emit(self.noise, rng);
        let mut pb = self.b.emit(self.noise, rng);
        pb.x = shift_partner(pb.x);
        pb.z = shift_partner(pb.z);
        (pa, pb)
    }

    fn reinitialise(&mut self) {
        self.a.reinitialise();
        self.b.reinitialise();
    }
}

fn two_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (lo, hi) = v.split_at_mut(j);
        (&mut lo[i], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(i);
        (&mut hi[0], &mut lo[j])
    }
}

/// Raw record of one simulated logical cycle.
#[derive(Clone, Debug, Default)]
pub struct CycleRecord {
    /// Indexed by global outcome id.
    pub flipped: Vec<bool>,
    pub erased: Vec<bool>,
    pub n_max: Vec<u32>,
    /// In units of τ_echo.
    pub tau_logical: u64,
}

/// Simulates logical cycles for a fixed lattice, policy and noise model.
#[derive(Clone, Debug)]
pub struct CycleSimulator<'g> {
    spec: &'g LatticeSpec,
    policy: RusPolicy,
    noise: NoiseParams,
}

impl<'g> CycleSimulator<'g> {
    pub fn new(spec: &'g LatticeSpec, policy: RusPolicy, noise: NoiseParams) -> Result<Self> {
        policy.validate()?;
        noise.validate()?;
        Ok(CycleSimulator { spec, policy, noise })
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> CycleRecord {
        let spec = self.spec;
        let n_out = 2 * spec.num_slots();
        let mut emitters = vec![Emitter::default(); spec.num_emitters()];
        for em in &mut emitters {
            em.frame.spin_x = SENS_X;
            em.frame.spin_z = SENS_Z;
        }
        // Raw masks per outcome; `None` is an erasure.
        let mut masks: Vec<Option<u8>> = vec![None; n_out];
        let mut n_max = Vec::with_capacity(spec.layers());
        let mut used = vec![0u32; spec.slots_per_layer()];
        for t in 0..spec.layers() {
            for em in &mut emitters {
                em.hadamard(&self.noise, rng);
            }
            let slots = spec.layer_slots(t);
            let base = slots.start;
            for id in slots {
                let slot = spec.slot(id);
                let (a, b) =
                    two_mut(&mut emitters, slot.emitter_a as usize, slot.emitter_b as usize);
                let mut pair = Pair { a, b, noise: &self.noise };
                let res = run_encoded_fusion(&self.policy, &mut pair, rng);
                masks[outcome_id(id, OutcomeKind::XX)] = res.xx_bar;
                masks[outcome_id(id, OutcomeKind::ZZ)] = res.zz_bar;
                used[id - base] = res.attempts_used;
            }
            let layer_max = used.iter().copied().max().unwrap_or(0);
            for (k, &u) in used.iter().enumerate() {
                let slot = spec.slot(base + k);
                for v in [slot.emitter_a, slot.emitter_b] {
                    let em = &mut emitters[v as usize];
                    match self.policy.schedule {
                        EmissionSchedule::FullBlock => {
                            for _ in u..self.policy.n {
                                em.emit(&self.noise, rng);
                            }
                        }
                        EmissionSchedule::OnDemand => {
                            for _ in u..layer_max {
                                em.idle(&self.noise, rng);
                            }
                        }
                    }
                }
            }
            let layer_max = match self.policy.schedule {
                EmissionSchedule::FullBlock => layer_max.max(self.policy.n),
                EmissionSchedule::OnDemand => layer_max,
            };
            n_max.push(layer_max);
        }
        // Close the time boundary against the end-of-cycle spin frames.
        let x0: Vec<u8> = emitters.iter().map(|e| e.frame.spin_x & SAMPLED).collect();
        let z0: Vec<u8> = emitters.iter().map(|e| e.frame.spin_z & SAMPLED).collect();
        let mut flipped = vec![false; n_out];
        let mut erased = vec![false; n_out];
        for (o, m) in masks.iter().enumerate() {
            match *m {
                None => erased[o] = true,
                Some(m) => {
                    let slot = spec.slot(o / 2);
                    let (a, b) = (slot.emitter_a as usize, slot.emitter_b as usize);
                    let bit = m
                        ^ (x0[a] & (m >> 1))
                        ^ (z0[a] & (m >> 2))
                        ^ (x0[b] & (m >> 3))
                        ^ (z0[b] & (m >> 4));
                    flipped[o] = bit & 1 == 1;
                }
            }
        }
        let tau = tau_logical(&n_max);
        CycleRecord { flipped, erased, n_max, tau_logical: tau }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one parameter point, mixed from the master seed and a key.
pub fn point_seed(master: u64, key: &[u64]) -> u64 {
    key.iter().fold(splitmix(master), |acc, &k| splitmix(acc ^ splitmix(k)))
}

/// Independent stream per trial; the result does not depend on scheduling.
pub fn trial_rng(point_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed);
    rng.set_stream(trial);
    rng
}

/// Integer tallies; addition is exact so the parallel reduction is
/// deterministic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub trials: u64,
    pub failures: u64,
    pub erasures: u64,
    pub errors: u64,
    pub tau_sum: u64,
    pub tau_sq_sum: u64,
    pub tau_max: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            failures: self.failures + o.failures,
            erasures: self.erasures + o.erasures,
            errors: self.errors + o.errors,
            tau_sum: self.tau_sum + o.tau_sum,
            tau_sq_sum: self.tau_sq_sum + o.tau_sq_sum,
            tau_max: self.tau_max.max(o.tau_max),
        }
    }
}

impl Tally {
    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.trials.max(1) as f64
    }

    pub fn mean_tau(&self) -> f64 {
        self.tau_sum as f64 / self.trials.max(1) as f64
    }

    /// Standard error of the mean τ_logical.
    pub fn tau_sem(&self) -> f64 {
        let n = self.trials as f64;
        if n < 2.0 {
            return 0.0;
        }
        let mean = self.tau_sum as f64 / n;
        let var = (self.tau_sq_sum as f64 / n - mean * mean).max(0.0) * n / (n - 1.0);
        (var / n).sqrt()
    }
}

/// Runs `trials` decoded cycles at one parameter point.
pub fn run_trials(
    decoder: &Decoder<'_>,
    policy: &RusPolicy,
    noise: &NoiseParams,
    trials: u64,
    seed: u64,
) -> Result<Tally> {
    let sim = CycleSimulator::new(decoder.graph().spec(), *policy, *noise)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let rec = sim.run(&mut rng);
            let v = decoder.decode(&rec.flipped, &rec.erased)?;
            Ok(Tally {
                trials: 1,
                failures: v.failed() as u64,
                erasures: v.logical_erasure as u64,
                errors: (v.logical_error && !v.logical_erasure) as u64,
                tau_sum: rec.tau_logical,
                tau_sq_sum: rec.tau_logical * rec.tau_logical,
                tau_max: rec.tau_logical,
            })
        })
        .try_reduce(Tally::default, |a, b| Ok(a + b))
}

/// Clock-cycle statistics without decoding.
pub fn run_clock(
    spec: &LatticeSpec,
    policy: &RusPolicy,
    noise: &NoiseParams,
    trials: u64,
    seed: u64,
) -> Result<Tally> {
    let sim = CycleSimulator::new(spec, *policy, *noise)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|t| {
            let tau = sim.run(&mut trial_rng(seed, t)).tau_logical;
            Tally { trials: 1, tau_sum: tau, tau_sq_sum: tau * tau, tau_max: tau, ..Tally::default() }
        })
        .reduce(Tally::default, |a, b| a + b))
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The bounds at 0 and n are exactly 0 and 1; the formula leaves rounding dust.
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

pub const Z95: f64 = 1.959_963_984_540_054;

fn default_blink_sum() -> f64 {
    1.0
}

fn default_bootstrap() -> usize {
    200
}

/// A sweep of one noise channel over lattice sizes and attempt budgets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub distances: Vec<usize>,
    pub attempts: Vec<u32>,
    pub channel: Channel,
    pub grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// Channels held fixed during the sweep.
    #[serde(default)]
    pub noise: NoiseParams,
    #[serde(default)]
    pub policy: RusPolicy,
    #[serde(default)]
    pub decoder: DecoderConfig,
    /// `p_a + p_d` used when sweeping blinking.
    #[serde(default = "default_blink_sum")]
    pub blink_sum: f64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.distances.is_empty() || self.distances.iter().any(|&l| l < 2) {
            return Err(Error::InvalidParameter("distances must be non-empty and at least 2".into()));
        }
        if self.attempts.is_empty() || self.attempts.contains(&0) {
            return Err(Error::InvalidParameter("attempt budgets must be non-empty and at least 1".into()));
        }
        if self.grid.is_empty() || self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("grid must be non-empty and strictly increasing".into()));
        }
        if !(self.blink_sum > 0.0 && self.blink_sum <= 1.0) {
            return Err(Error::InvalidParameter("blink_sum must lie in (0, 1]".into()));
        }
        self.policy.validate()?;
        self.noise.validate()
    }

    /// Noise model at one grid value.
    pub fn noise_at(&self, x: f64) -> NoiseParams {
        let mut n = self.noise;
        n.set_channel(self.channel, x, self.blink_sum);
        n
    }
}

/// One CSV row: a (L, N, grid point) result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub channel: Channel,
    pub l: usize,
    pub n: u32,
    pub x: f64,
    pub trials: u64,
    pub failures: u64,
    pub erasures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_tau_logical: f64,
}

/// Runs every (L, N, x) point of a plan. Rows are ordered by N, then L, then x.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<SweepRow>> {
    plan.validate()?;
    let mut rows = Vec::new();
    for &n in &plan.attempts {
        for &l in &plan.distances {
            rows.extend(run_series(plan, l, n)?);
        }
    }
    Ok(rows)
}

fn run_series(plan: &ExperimentPlan, l: usize, n: u32) -> Result<Vec<SweepRow>> {
    let graph = SyndromeGraph::new(LatticeSpec::new(l)?);
    let decoder = Decoder::new(&graph, plan.decoder);
    let policy = RusPolicy { n, ..plan.policy };
    let mut rows = Vec::with_capacity(plan.grid.len());
    for &x in &plan.grid {
        let seed = point_seed(plan.seed, &[plan.channel as u64, l as u64, n as u64, x.to_bits()]);
        let tally = run_trials(&decoder, &policy, &plan.noise_at(x), plan.trials, seed)?;
        let (lo, hi) = wilson(tally.failures, tally.trials, Z95);
        rows.push(SweepRow {
            channel: plan.channel,
            l,
            n,
            x,
            trials: tally.trials,
            failures: tally.failures,
            erasures: tally.erasures,
            rate: tally.rate(),
            ci_low: lo,
            ci_high: hi,
            mean_tau_logical: tally.mean_tau(),
        });
    }
    Ok(rows)
}

/// Failure curve of one lattice size over a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub l: usize,
    pub x: Vec<f64>,
    pub failures: Vec<u64>,
    pub trials: Vec<u64>,
}

impl Curve {
    pub fn rates(&self) -> Vec<f64> {
        self.failures.iter().zip(&self.trials).map(|(&f, &t)| f as f64 / t.max(1) as f64).collect()
    }

    /// Groups rows of one N into curves, sorted by L.
    pub fn from_rows(rows: &[SweepRow], n: u32) -> Vec<Curve> {
        let mut ls: Vec<usize> = rows.iter().filter(|r| r.n == n).map(|r| r.l).collect();
        ls.sort_unstable();
        ls.dedup();
        ls.into_iter()
            .map(|l| {
                let mut pts: Vec<&SweepRow> = rows.iter().filter(|r| r.n == n && r.l == l).collect();
                pts.sort_by(|a, b| a.x.total_cmp(&b.x));
                Curve {
                    l,
                    x: pts.iter().map(|r| r.x).collect(),
                    failures: pts.iter().map(|r| r.failures).collect(),
                    trials: pts.iter().map(|r| r.trials).collect(),
                }
            })
            .collect()
    }
}

/// First upward crossing of `big` over `small`, linearly interpolated.
/// Below threshold the larger code fails less, so the difference goes from
/// negative to positive.
pub fn crossing(x: &[f64], small: &[f64], big: &[f64]) -> Option<f64> {
    let d: Vec<f64> = big.iter().zip(small).map(|(b, s)| b - s).collect();
    let mut last_neg = None;
    for i in 0..d.len() {
        if d[i] < 0.0 {
            last_neg = Some(i);
        } else if d[i] > 0.0 {
            if let Some(j) = last_neg {
                let t = d[j] / (d[j] - d[i]);
                return Some(x[j] + t * (x[i] - x[j]));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub n: u32,
    pub l_small: usize,
    pub l_big: usize,
    pub estimate: f64,
    /// Bootstrap standard deviation; zero when no resample was drawn.
    pub std_err: f64,
    /// Fraction of bootstrap resamples with a crossing in range.
    pub resample_hit_rate: f64,
}

/// Binomial draw as a sum of Bernoulli trials.
fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    (0..n).filter(|_| rng.gen::<f64>() < p).count() as u64
}

/// Crossing of the two largest-L curves with a parametric bootstrap error.
pub fn find_threshold(curves: &[Curve], n: u32, bootstrap: usize, seed: u64) -> Result<ThresholdEstimate> {
    if curves.len() < 2 {
        return Err(Error::InvalidParameter("need at least two lattice sizes".into()));
    }
    let mut sorted: Vec<&Curve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.l);
    let (small, big) = (sorted[sorted.len() - 2], sorted[sorted.len() - 1]);
    if small.x != big.x {
        return Err(Error::InvalidParameter("curves must share a grid".into()));
    }
    let estimate =
        crossing(&small.x, &small.rates(), &big.rates()).ok_or(Error::NoThresholdInRange)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let resample = |c: &Curve, rng: &mut ChaCha8Rng| -> Vec<f64> {
        c.rates()
            .iter()
            .zip(&c.trials)
            .map(|(&p, &t)| binomial(t, p, rng) as f64 / t.max(1) as f64)
            .collect()
    };
    let mut hits = Vec::with_capacity(bootstrap);
    for _ in 0..bootstrap {
        let rs = resample(small, &mut rng);
        let rb = resample(big, &mut rng);
        if let Some(x) = crossing(&small.x, &rs, &rb) {
            hits.push(x);
        }
    }
    let std_err = if hits.len() >= 2 {
        let m = hits.iter().sum::<f64>() / hits.len() as f64;
        (hits.iter().map(|h| (h - m).powi(2)).sum::<f64>() / (hits.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(ThresholdEstimate {
        n,
        l_small: small.l,
        l_big: big.l,
        estimate,
        std_err,
        resample_hit_rate: if bootstrap == 0 { 0.0 } else { hits.len() as f64 / bootstrap as f64 },
    })
}

/// Threshold-vs-N curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NSweep {
    pub channel: Channel,
    /// `None` where the curves do not cross inside the grid.
    pub points: Vec<(u32, Option<ThresholdEstimate>)>,
    pub peak_n: Option<u32>,
}

/// Thresholds per attempt budget from an already-run set of rows.
pub fn thresholds_by_n(plan: &ExperimentPlan, rows: &[SweepRow]) -> Result<NSweep> {
    let mut points = Vec::new();
    for &n in &plan.attempts {
        let curves = Curve::from_rows(rows, n);
        let seed = point_seed(plan.seed, &[u64::MAX, n as u64]);
        match find_threshold(&curves, n, plan.bootstrap, seed) {
            Ok(t) => points.push((n, Some(t))),
            Err(Error::NoThresholdInRange) => points.push((n, None)),
            Err(e) => return Err(e),
        }
    }
    let peak_n = points
        .iter()
        .filter_map(|(n, t)| t.as_ref().map(|t| (*n, t.estimate)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(n, _)| n);
    Ok(NSweep { channel: plan.channel, points, peak_n })
}

/// Runs the plan and extracts one threshold per N.
pub fn sweep_n(plan: &ExperimentPlan) -> Result<(Vec<SweepRow>, NSweep)> {
    let rows = run_plan(plan)?;
    let sweep = thresholds_by_n(plan, &rows)?;
    Ok((rows, sweep))
}
