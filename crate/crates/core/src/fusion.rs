//! Physical fusion attempts and the repeat-until-success encoded fusion.
//!
//! Sign bits are frame masks (see [`crate::noise`]): bit 0 set means the
//! reported outcome is −1 relative to the noiseless value.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{PhotonError, SAMPLED};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FusionKind {
    Success,
    Failure,
    Erasure,
    BiasedZz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FusionRecord {
    pub kind: FusionKind,
    pub xx: Option<u8>,
    pub zz: Option<u8>,
    /// 1-based.
    pub attempt_index: u32,
}

impl FusionRecord {
    pub fn xx_flipped(&self) -> Option<bool> {
        self.xx.map(|m| m & SAMPLED != 0)
    }

    pub fn zz_flipped(&self) -> Option<bool> {
        self.zz.map(|m| m & SAMPLED != 0)
    }
}

/// Type-II fusion outcome for a given success flag. The failure basis is XX.
pub fn fusion_outcome(a: &PhotonError, b: &PhotonError, success: bool, attempt: u32) -> FusionRecord {
    let (kind, xx, zz) = if a.lost || b.lost {
        (FusionKind::Erasure, None, None)
    } else if success {
        (FusionKind::Success, Some(a.z ^ b.z), Some(a.x ^ b.x))
    } else {
        (FusionKind::Failure, Some(a.z ^ b.z), None)
    };
    FusionRecord { kind, xx, zz, attempt_index: attempt }
}

/// Linear-optics fusion: succeeds with probability 1/2 when both photons arrive.
pub fn attempt_physical_fusion<R: Rng + ?Sized>(
    a: &PhotonError,
    b: &PhotonError,
    attempt: u32,
    rng: &mut R,
) -> FusionRecord {
    if a.lost || b.lost {
        return fusion_outcome(a, b, false, attempt);
    }
    let success = rng.gen::<bool>();
    fusion_outcome(a, b, success, attempt)
}

/// Two single-photon Z measurements in place of a fusion.
pub fn attempt_biased_measurement(a: &PhotonError, b: &PhotonError, attempt: u32) -> FusionRecord {
    if a.lost || b.lost {
        FusionRecord { kind: FusionKind::Erasure, xx: None, zz: None, attempt_index: attempt }
    } else {
        FusionRecord {
            kind: FusionKind::BiasedZz,
            xx: None,
            zz: Some(a.x ^ b.x),
            attempt_index: attempt,
        }
    }
}

/// Attempt accounting for a re-attempt after a ZZ-only readout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReinitBudget {
    /// Re-attempts use what is left of the `N` attempts.
    #[default]
    Shared,
    /// A re-attempt gets a fresh budget of `N`.
    Fresh,
}

/// How many generation rounds an emitter runs per encoded qubit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmissionSchedule {
    /// Every encoded qubit runs all `N` rounds; photons past the terminating
    /// attempt are discarded but their rounds still expose the spin to noise.
    #[default]
    FullBlock,
    /// Rounds are run only for attempts actually made; emitters that finish
    /// early wait with pairs of buffer π pulses until the layer completes.
    OnDemand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RusPolicy {
    /// Maximum physical attempts per encoded fusion.
    pub n: u32,
    /// Switch to ZZ-biased measurements after a lost attempt.
    pub bias_after_loss: bool,
    /// Clear both spin frames after a ZZ-only readout.
    pub reinit_after_zz_only: bool,
    /// After a reinit, restart the encoded fusion (once) to try for both outcomes.
    pub reattempt_after_reinit: bool,
    pub reinit_budget: ReinitBudget,
    pub schedule: EmissionSchedule,
}

impl Default for RusPolicy {
    fn default() -> Self {
        RusPolicy {
            n: 8,
            bias_after_loss: true,
            reinit_after_zz_only: false,
            reattempt_after_reinit: false,
            reinit_budget: ReinitBudget::Shared,
            schedule: EmissionSchedule::FullBlock,
        }
    }
}

impl RusPolicy {
    pub fn with_n(n: u32) -> Self {
        RusPolicy { n, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EncodedFusionResult {
    pub xx_bar: Option<u8>,
    pub zz_bar: Option<u8>,
    pub attempts_used: u32,
    pub records: Vec<FusionRecord>,
    /// Spins were re-initialised during this fusion.
    pub reinitialised: bool,
}

impl EncodedFusionResult {
    pub fn zz_only(&self) -> bool {
        self.zz_bar.is_some() && self.xx_bar.is_none()
    }
}

/// Photon supply for one encoded fusion: each call emits one photon from
/// each of the two emitters.
pub trait PhotonPairSource {
    fn emit_pair<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (PhotonError, PhotonError);
    /// Both spins were projected by Z readouts.
    fn reinitialise(&mut self);
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Normal,
    Biased,
}

/// Runs the repeat-until-success state machine for one encoded fusion.
pub fn run_encoded_fusion<S: PhotonPairSource, R: Rng + ?Sized>(
    policy: &RusPolicy,
    source: &mut S,
    rng: &mut R,
) -> EncodedFusionResult {
    let mut out = EncodedFusionResult::default();
    let mut limit = policy.n;
    let mut mode = Mode::Normal;
    let mut xx_acc = 0u8;
    let mut xx_erased = false;
    let mut restarted = false;
    let mut attempt = 0;
    while attempt < limit {
        attempt += 1;
        let (a, b) = source.emit_pair(rng);
        match mode {
            Mode::Normal => {
                let rec = attempt_physical_fusion(&a, &b, attempt, rng);
                out.records.push(rec);
                match rec.kind {
                    FusionKind::Erasure => {
                        xx_erased = true;
                        if policy.bias_after_loss {
                            mode = Mode::Biased;
                        }
                    }
                    FusionKind::Failure => xx_acc ^= rec.xx.unwrap(),
                    FusionKind::Success => {
                        xx_acc ^= rec.xx.unwrap();
                        out.zz_bar = rec.zz;
                        out.xx_bar = (!xx_erased).then_some(xx_acc);
                        out.attempts_used = attempt;
                        return out;
                    }
                    FusionKind::BiasedZz => unreachable!(),
                }
            }
            Mode::Biased => {
                let rec = attempt_biased_measurement(&a, &b, attempt);
                out.records.push(rec);
                if rec.kind == FusionKind::BiasedZz {
                    out.zz_bar = rec.zz;
                    if policy.reinit_after_zz_only {
                        source.reinitialise();
                        out.reinitialised = true;
                    }
                    let retry = policy.reinit_after_zz_only
                        && policy.reattempt_after_reinit
                        && !restarted;
                    if retry {
                        restarted = true;
                        if policy.reinit_budget == ReinitBudget::Fresh {
                            limit = attempt + policy.n;
                        }
                        if attempt < limit {
                            mode = Mode::Normal;
                            xx_acc = 0;
                            xx_erased = false;
                            continue;
                        }
                    }
                    out.attempts_used = attempt;
                    return out;
                }
            }
        }
    }
    out.attempts_used = attempt;
    if mode == Mode::Normal && !xx_erased {
        out.xx_bar = Some(xx_acc);
    }
    out
}
