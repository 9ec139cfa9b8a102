//! Ground-state dephasing of encoded linear cluster states: the Gaussian
//! Overhauser envelope in closed form and a Markovian spin-Z sampler.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::montecarlo::trial_rng;
use crate::noise::flip;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusterParams {
    /// Encoded qubits.
    pub m: usize,
    /// Photons per encoded qubit.
    pub n: u32,
    pub tau_round: f64,
    /// RMS Overhauser shift as an angular frequency.
    pub delta_oh: f64,
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidParameter("M and N must be at least 1".into()));
        }
        if !(self.tau_round > 0.0) || !(self.delta_oh >= 0.0) {
            return Err(Error::InvalidParameter("need tau_round > 0 and delta_oh >= 0".into()));
        }
        Ok(())
    }
}

fn binomial_row(m: usize) -> Vec<f64> {
    let mut row = vec![1.0f64; m + 1];
    for k in 1..m {
        row[k] = row[k - 1] * (m - k + 1) as f64 / k as f64;
    }
    row
}

/// `2^{-2M} Σ_{x,y} exp(-½(NτΔ)²(σ(x)-σ(y))²)`, summed over Hamming weights.
pub fn analytic_fidelity(p: &ClusterParams) -> Result<f64> {
    p.validate()?;
    let k = p.n as f64 * p.tau_round * p.delta_oh;
    let c = binomial_row(p.m);
    let norm = 4f64.powi(p.m as i32);
    // The kernel depends only on |a - b|; accumulate per distance.
    let mut total = 0.0;
    for d in 0..=p.m {
        let pairs: f64 = (0..=p.m - d).map(|a| c[a] * c[a + d]).sum();
        let mult = if d == 0 { 1.0 } else { 2.0 };
        total += mult * pairs * (-0.5 * k * k * (d * d) as f64).exp();
    }
    Ok((total / norm).min(1.0))
}

/// Overhauser RMS giving the same single-qubit coherence as `N` rounds of
/// Markovian Z errors: `Δ² = -2 ln(1 - 2Np)/(τN)²`.
pub fn delta_from_pz(p_z: f64, n: u32, tau_round: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p_z) || n == 0 || !(tau_round > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= p_z < 1, N >= 1, tau_round > 0; got {p_z}, {n}, {tau_round}"
        )));
    }
    let coh = 1.0 - 2.0 * n as f64 * p_z;
    if coh <= 0.0 {
        return Err(Error::Domain(format!("2 N p_z = {} must be below 1", 1.0 - coh)));
    }
    let nt = n as f64 * tau_round;
    Ok((-2.0 * coh.ln()).sqrt() / nt)
}

/// `T₂* = √2/Δ` for the Δ matched to a dephasing threshold, in the units of
/// `tau_round`. Infinite at `p_z = 0`.
pub fn t2star_requirement(p_z: f64, n: u32, tau_round: f64) -> Result<f64> {
    let d = delta_from_pz(p_z, n, tau_round)?;
    Ok(if d == 0.0 { f64::INFINITY } else { std::f64::consts::SQRT_2 / d })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DephasingPoint {
    pub m: usize,
    pub analytic_infidelity: f64,
    pub stochastic_infidelity: f64,
    /// Standard deviation of the per-trial infidelity.
    pub std_dev: f64,
    /// Standard error of the stochastic mean.
    pub std_err: f64,
}

impl DephasingPoint {
    /// |stochastic - analytic| in units of the per-trial standard deviation.
    pub fn deviation_sigma(&self) -> f64 {
        let d = (self.stochastic_infidelity - self.analytic_infidelity).abs();
        if self.std_dev > 0.0 {
            d / self.std_dev
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Signed difference in units of the standard error of the mean.
    pub fn z_score(&self) -> f64 {
        let d = self.stochastic_infidelity - self.analytic_infidelity;
        if self.std_err > 0.0 {
            d / self.std_err
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }
}

/// Samples one cluster: a Z after every emission round, `N` per encoded qubit.
/// The state is a uniform superposition over the encoded basis with fixed
/// signs, so a Z pattern `e` has overlap `|2^{-M} Σ_x (-1)^{e·x}|² = [e = 0]`;
/// the trial fidelity is 1 exactly when every encoded qubit saw an even
/// number of errors.
pub fn sample_fidelity<R: Rng + ?Sized>(m: usize, n: u32, p_z: f64, rng: &mut R) -> f64 {
    let mut clean = true;
    for _ in 0..m {
        let mut parity = false;
        for _ in 0..n {
            parity ^= flip(rng, p_z);
        }
        clean &= !parity;
    }
    if clean {
        1.0
    } else {
        0.0
    }
}

/// Stochastic infidelity per `M` alongside the Gaussian model with Δ matched
/// by [`delta_from_pz`].
pub fn stochastic_infidelity(
    p_z: f64,
    n: u32,
    ms: &[usize],
    trials: u64,
    seed: u64,
) -> Result<Vec<DephasingPoint>> {
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least two trials".into()));
    }
    let delta = delta_from_pz(p_z, n, 1.0)?;
    let mut out = Vec::with_capacity(ms.len());
    for &m in ms {
        let params = ClusterParams { m, n, tau_round: 1.0, delta_oh: delta };
        let analytic = 1.0 - analytic_fidelity(&params)?;
        let key = crate::montecarlo::point_seed(seed, &[m as u64, n as u64, p_z.to_bits()]);
        let fails: u64 = (0..trials)
            .into_par_iter()
            .map(|t| (sample_fidelity(m, n, p_z, &mut trial_rng(key, t)) == 0.0) as u64)
            .sum();
        let mean = fails as f64 / trials as f64;
        let var = mean * (1.0 - mean) * trials as f64 / (trials - 1) as f64;
        out.push(DephasingPoint {
            m,
            analytic_infidelity: analytic,
            stochastic_infidelity: mean,
            std_dev: var.sqrt(),
            std_err: (var / trials as f64).sqrt(),
        });
    }
    Ok(out)
}
