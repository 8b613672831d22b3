//! Typical-case behaviour over random right-hand sides.
//!
//! Fix the triples and draw every clause sign independently and uniformly.
//! The ensemble mean of a clause term is `½ sin γ · cos^{p1+p2+p3} γ`, where
//! `p_i` counts the pairs in `c_i`; summing gives `E_d[W]`, which lies between
//! `(m/2) sin γ cos^{3D} γ` and `(m/2) sin γ` on `(0, π/2)`. The ensemble
//! variance of `W` is at most `¼ m (6D+3)(D+1)`.

use serde::Serialize;

use crate::analytic::{build_neighborhoods, ConeEvaluator, EvalMode, Neighborhood};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::limits::Limits;
use crate::par;
use crate::rng::derive_seed;

/// Per-clause sample budget when a cone is too large to enumerate during ensemble runs.
const FALLBACK_SAMPLES: usize = 20_000;

/// `½ sin γ · cos^{p1+p2+p3} γ`.
pub fn clause_mean_closed_form(nbhd: &Neighborhood, gamma: f64) -> f64 {
    let p: usize = nbhd.pair_counts().iter().sum();
    0.5 * gamma.sin() * gamma.cos().powi(p as i32)
}

/// `Σ` over clauses of [`clause_mean_closed_form`]; signs of `instance` are ignored.
pub fn closed_form_mean(instance: &Instance, gamma: f64) -> f64 {
    build_neighborhoods(instance)
        .iter()
        .map(|nb| clause_mean_closed_form(nb, gamma))
        .sum()
}

/// `(m/2) sin γ cos^{3D} γ`.
pub fn mean_lower_bound(m: usize, d_bound: usize, gamma: f64) -> f64 {
    m as f64 / 2.0 * gamma.sin() * gamma.cos().powi(3 * d_bound as i32)
}

/// `(m/2) sin γ`.
pub fn mean_upper_bound(m: usize, gamma: f64) -> f64 {
    m as f64 / 2.0 * gamma.sin()
}

/// `¼ m (6D+3)(D+1)`.
pub fn variance_bound(m: usize, d_bound: usize) -> f64 {
    let d = d_bound as f64;
    0.25 * m as f64 * (6.0 * d + 3.0) * (d + 1.0)
}

fn check_d(d_bound: usize) -> Result<()> {
    if d_bound < 1 {
        return Err(Error::InvalidParameter(
            "occurrence parameter D must be at least 1".into(),
        ));
    }
    Ok(())
}

/// `γ = 1/√(3D)`.
pub fn optimal_gamma_typical(d_bound: usize) -> Result<f64> {
    check_d(d_bound)?;
    Ok(1.0 / (3.0 * d_bound as f64).sqrt())
}

/// Expected advantage over `m/2` at the typical-case angle: `m / (2√(3e)·√D)`.
pub fn typical_guarantee(m: usize, d_bound: usize) -> Result<f64> {
    check_d(d_bound)?;
    Ok(m as f64 / (2.0 * (3.0 * std::f64::consts::E).sqrt() * (d_bound as f64).sqrt()))
}

/// Large-`D` form of the per-clause lower bound at `γ = g/√D`: `½ (g/√D) e^{−3g²/2}`.
pub fn asymptotic_clause_mean(g: f64, d_bound: usize) -> f64 {
    0.5 * g / (d_bound as f64).sqrt() * (-1.5 * g * g).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleMethod {
    Exhaustive,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub n: usize,
    pub m: usize,
    pub d_bound: usize,
    pub triples: Vec<[usize; 3]>,
    pub gamma: f64,
    pub mean_w: f64,
    pub stderr: f64,
    /// Exact ensemble variance (exhaustive) or unbiased sample variance (Monte Carlo).
    pub variance: f64,
    pub closed_form_mean: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub variance_bound: f64,
    pub trials: usize,
    pub method: EnsembleMethod,
    pub seed: Option<u64>,
}

fn report_shell(instance: &Instance, gamma: f64, method: EnsembleMethod) -> EnsembleReport {
    let (m, d) = (instance.m(), instance.d_bound());
    EnsembleReport {
        n: instance.n(),
        m,
        d_bound: d,
        triples: instance.triples(),
        gamma,
        mean_w: 0.0,
        stderr: 0.0,
        variance: 0.0,
        closed_form_mean: closed_form_mean(instance, gamma),
        lower_bound: mean_lower_bound(m, d, gamma),
        upper_bound: mean_upper_bound(m, gamma),
        variance_bound: variance_bound(m, d),
        trials: 0,
        method,
        seed: None,
    }
}

fn exact_w(instance: &Instance, gamma: f64, seed: u64, limits: &Limits) -> Result<f64> {
    let mode = EvalMode::Auto {
        samples: FALLBACK_SAMPLES,
        seed,
    };
    ConeEvaluator::new(instance, mode, limits)?.w(gamma)
}

/// Averages `W(γ)` over all `2^m` sign assignments of the triples in `instance`.
pub fn ensemble_mean_exhaustive(instance: &Instance, gamma: f64, limits: &Limits) -> Result<EnsembleReport> {
    let m = instance.m();
    if m > limits.exhaustive_max_m {
        return Err(Error::InvalidParameter(format!(
            "exhaustive ensemble needs m <= {}, got {m}",
            limits.exhaustive_max_m
        )));
    }
    let count = 1usize << m;
    let values = par::map_range(count, |mask| {
        let signed = instance.with_rhs((0..m).map(|j| ((mask >> j) & 1) as u8))?;
        exact_w(&signed, gamma, mask as u64, limits)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / count as f64;
    let variance = values.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / count as f64;
    Ok(EnsembleReport {
        mean_w: mean,
        variance,
        trials: count,
        ..report_shell(instance, gamma, EnsembleMethod::Exhaustive)
    })
}

/// Averages `W(γ)` over `trials` random sign assignments; trial `t` uses sub-seed `(seed, t)`.
pub fn ensemble_mean_mc(
    instance: &Instance,
    gamma: f64,
    trials: usize,
    seed: u64,
    limits: &Limits,
) -> Result<EnsembleReport> {
    if trials < 2 {
        return Err(Error::InvalidParameter(
            "Monte Carlo ensemble needs at least 2 trials".into(),
        ));
    }
    let values = par::map_range(trials, |t| {
        let trial_seed = derive_seed(seed, t as u64);
        exact_w(&instance.resample_signs(trial_seed), gamma, trial_seed, limits)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / trials as f64;
    let variance = values.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    Ok(EnsembleReport {
        mean_w: mean,
        stderr: (variance / trials as f64).sqrt(),
        variance,
        trials,
        seed: Some(seed),
        ..report_shell(instance, gamma, EnsembleMethod::MonteCarlo)
    })
}
