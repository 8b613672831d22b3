//! Measurement sampling and exact classical optima.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Assignment, Instance};
use crate::limits::Limits;
use crate::par;
use crate::statevector::{prepare, AngleParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    /// Cost angle applied to the state, `e^{-i state_gamma C}`.
    pub state_gamma: f64,
    /// The same angle in the `W(γ)` convention, `−state_gamma`.
    pub gamma: f64,
    pub beta: f64,
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    pub mean_satisfied: f64,
    pub best_satisfied: usize,
    /// Best string, `x_0` first.
    pub best_string: String,
    /// `m/2 + ⟨C⟩` in the prepared state.
    pub predicted_mean: f64,
    /// Per-shot standard deviation of the satisfied count in the prepared state.
    pub predicted_std: f64,
}

/// Prepares `e^{-iβB} e^{-iγC}|s⟩` at the literal `params`, measures `samples` times and counts satisfied equations.
pub fn run(
    instance: &Instance,
    params: AngleParams,
    samples: usize,
    seed: u64,
    limits: &Limits,
) -> Result<SampleReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let state = prepare(instance, params, limits)?;
    let (mean_cost, var_cost) = state.cost_moments(instance)?;
    let draws = state.sample_indices(samples, seed);
    let counts = par::map_slice(&draws, |&z| instance.satisfied_count_index(z));

    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    let total: usize = counts.iter().sum();
    Ok(SampleReport {
        state_gamma: params.gamma,
        gamma: -params.gamma,
        beta: params.beta,
        m: instance.m(),
        samples,
        seed,
        mean_satisfied: total as f64 / samples as f64,
        best_satisfied: counts[best],
        best_string: Assignment::from_index(draws[best], instance.n()).to_string(),
        predicted_mean: instance.m() as f64 / 2.0 + mean_cost,
        predicted_std: var_cost.sqrt(),
    })
}

/// `⌈m ln m⌉` shots.
pub fn recommended_samples(m: usize) -> Result<usize> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "sample-size policy needs m >= 2, got {m}"
        )));
    }
    let m = m as f64;
    Ok((m * m.ln()).ceil() as usize)
}

/// Exact maximum satisfied count over all `2^n` assignments; ties go to the lowest basis index.
pub fn brute_force_max(instance: &Instance, limits: &Limits) -> Result<(usize, Assignment)> {
    let n = instance.n();
    if n > limits.brute_force_max {
        return Err(Error::TooManyQubits {
            n,
            max: limits.brute_force_max,
        });
    }
    let total = 1u64 << n;
    let chunk = par::REDUCE_CHUNK as u64;
    let chunks = total.div_ceil(chunk) as usize;
    let partial = par::map_range(chunks, |ci| {
        let start = ci as u64 * chunk;
        let end = (start + chunk).min(total);
        let mut best = (0usize, start);
        for z in start..end {
            let c = instance.satisfied_count_index(z);
            if c > best.0 {
                best = (c, z);
            }
        }
        best
    });
    let (count, index) = partial
        .into_iter()
        .fold((0usize, 0u64), |acc, b| if b.0 > acc.0 { b } else { acc });
    Ok((count, Assignment::from_index(index, n)))
}
