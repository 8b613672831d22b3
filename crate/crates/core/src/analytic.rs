//! Exact per-clause evaluation of `W(γ) = ⟨−γ, π/4| C |−γ, π/4⟩`.
//!
//! For a focal clause with sign `d`, only the clauses sharing exactly one
//! variable with it matter. Those attached to focal variable `i` form the
//! quadratic `c_i(z) = Σ sign · z_a z_b` over the support bits, and the
//! clause's contribution is
//!
//! ```text
//! (d/8) · E_z[ sin γ(d + c1 + c2 + c3) + sin γ(d + c1 − c2 − c3)
//!            + sin γ(d − c1 + c2 − c3) + sin γ(d − c1 − c2 + c3) ]
//! ```
//!
//! with `z` uniform on `{±1}^q`. Clauses sharing two focal variables drop
//! out entirely. The cost is governed by `q ≤ 6D`, not by `n`.
//!
//! Since every `c_i` is an integer in `[-p_i, p_i]`, exact enumeration only
//! has to histogram `(c1, c2, c3)` over the `2^q` support assignments; the
//! histogram is independent of `γ`, so one pass serves any number of angles.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Clause, Instance};
use crate::limits::Limits;
use crate::par;
use crate::rng::{derive_seed, seeded};

/// The four even sign patterns applied to `(c1, c2, c3)`.
pub const SIGN_PATTERNS: [[i32; 3]; 4] = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];

/// A signed pair product `sign · z_a z_b`, with `a < b` positions in the compacted support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FormPair {
    pub a: usize,
    pub b: usize,
    pub sign: i32,
}

/// The causal cone of one focal clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Neighborhood {
    pub clause_index: usize,
    pub focal: Clause,
    /// `forms[i]` realizes `c_i`, keyed by the focal variable `focal.vars()[i]`.
    pub forms: [Vec<FormPair>; 3],
    /// Original variable indices of the support bits, ascending; position `p` is `support[p]`.
    pub support: Vec<usize>,
    /// Indices of clauses sharing two variables with the focal clause.
    pub cancelled: Vec<usize>,
    /// Occurrence parameter of the instance the cone was cut from.
    pub d_bound: usize,
}

impl Neighborhood {
    pub fn q_size(&self) -> usize {
        self.support.len()
    }

    pub fn sign(&self) -> i32 {
        self.focal.sign()
    }

    pub fn pair_counts(&self) -> [usize; 3] {
        [self.forms[0].len(), self.forms[1].len(), self.forms[2].len()]
    }

    /// Evaluates `(c1, c2, c3)` on a support assignment (`spins[p] ∈ {±1}`).
    pub fn form_values(&self, spins: &[i32]) -> [i32; 3] {
        let mut c = [0i32; 3];
        for (ci, form) in c.iter_mut().zip(&self.forms) {
            *ci = form.iter().map(|p| p.sign * spins[p.a] * spins[p.b]).sum();
        }
        c
    }
}

/// Partitions the other clauses by how many variables they share with clause `clause_index`.
pub fn build_neighborhood(instance: &Instance, clause_index: usize) -> Result<Neighborhood> {
    let clauses = instance.clauses();
    let focal = *clauses.get(clause_index).ok_or(Error::IndexOutOfRange {
        index: clause_index,
        len: clauses.len(),
    })?;
    let fv = focal.vars();

    let mut raw: [Vec<(usize, usize, i32)>; 3] = Default::default();
    let mut cancelled = Vec::new();
    for (j, cl) in clauses.iter().enumerate() {
        if j == clause_index {
            continue;
        }
        let shared: Vec<usize> = (0..3).filter(|&i| cl.contains(fv[i])).collect();
        match shared.as_slice() {
            [] => {}
            [i] => {
                let mut rest = cl.vars().into_iter().filter(|&v| v != fv[*i]);
                let (u, v) = (rest.next().unwrap(), rest.next().unwrap());
                raw[*i].push((u.min(v), u.max(v), cl.sign()));
            }
            _ => cancelled.push(j),
        }
    }

    let mut support: Vec<usize> = raw.iter().flatten().flat_map(|&(u, v, _)| [u, v]).collect();
    support.sort_unstable();
    support.dedup();
    let pos = |v: usize| support.binary_search(&v).unwrap();
    let forms = raw.map(|pairs| {
        pairs
            .into_iter()
            .map(|(u, v, sign)| FormPair {
                a: pos(u),
                b: pos(v),
                sign,
            })
            .collect()
    });

    Ok(Neighborhood {
        clause_index,
        focal,
        forms,
        support,
        cancelled,
        d_bound: instance.d_bound(),
    })
}

pub fn build_neighborhoods(instance: &Instance) -> Vec<Neighborhood> {
    par::map_range(instance.m(), |i| build_neighborhood(instance, i).unwrap())
}

/// Exact distribution of `(c1, c2, c3)` under uniform support bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeHistogram {
    q: usize,
    extent: [i32; 3],
    counts: Vec<u64>,
}

/// Below this support size a single Gray-code walk is used.
const SPLIT_THRESHOLD: usize = 16;

impl ConeHistogram {
    pub fn enumerate(nbhd: &Neighborhood, limits: &Limits) -> Result<Self> {
        let q = nbhd.q_size();
        if q > limits.q_max || q >= 63 {
            return Err(Error::SupportTooLarge { q, max: limits.q_max });
        }
        let p = nbhd.pair_counts();
        let extent = [p[0] as i32, p[1] as i32, p[2] as i32];
        let cells = p.iter().map(|&k| 2 * k + 1).product::<usize>();

        // incident[pos] lists (form, other position, sign) for every pair touching pos
        let mut incident: Vec<Vec<(usize, usize, i32)>> = vec![Vec::new(); q];
        for (f, form) in nbhd.forms.iter().enumerate() {
            for pair in form {
                incident[pair.a].push((f, pair.b, pair.sign));
                incident[pair.b].push((f, pair.a, pair.sign));
            }
        }

        let high = q.saturating_sub(SPLIT_THRESHOLD).min(10);
        let low = q - high;
        let partial = par::map_range(1usize << high, |prefix| {
            let mut counts = vec![0u64; cells];
            walk_block(nbhd, &incident, low, (prefix as u64) << low, extent, &mut counts);
            counts
        });
        let mut counts = vec![0u64; cells];
        for block in partial {
            for (c, b) in counts.iter_mut().zip(block) {
                *c += b;
            }
        }
        Ok(ConeHistogram { q, extent, counts })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `E_z[f(c1, c2, c3)]`, summed in a fixed cell order.
    pub fn expect<F: Fn(i32, i32, i32) -> f64>(&self, f: F) -> f64 {
        let [e1, e2, e3] = self.extent;
        let (w2, w3) = (2 * e2 + 1, 2 * e3 + 1);
        let scale = (-(self.q as f64)).exp2();
        let mut total = 0.0;
        for (idx, &count) in self.counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let idx = idx as i32;
            let c3 = idx % w3 - e3;
            let c2 = (idx / w3) % w2 - e2;
            let c1 = idx / (w3 * w2) - e1;
            total += count as f64 * f(c1, c2, c3);
        }
        total * scale
    }

    /// Number of support assignments producing `(c1, c2, c3)`.
    pub fn count(&self, c: [i32; 3]) -> u64 {
        if (0..3).any(|i| c[i].abs() > self.extent[i]) {
            return 0;
        }
        self.counts[cell_index(c, self.extent)]
    }
}

fn cell_index(c: [i32; 3], extent: [i32; 3]) -> usize {
    let w2 = 2 * extent[1] + 1;
    let w3 = 2 * extent[2] + 1;
    (((c[0] + extent[0]) * w2 + c[1] + extent[1]) * w3 + c[2] + extent[2]) as usize
}

/// Gray-code walk over the low `low` bits with the high bits fixed by `base`.
fn walk_block(
    nbhd: &Neighborhood,
    incident: &[Vec<(usize, usize, i32)>],
    low: usize,
    base: u64,
    extent: [i32; 3],
    counts: &mut [u64],
) {
    let spin = |bits: u64, p: usize| if (bits >> p) & 1 == 1 { -1 } else { 1 };
    let mut bits = base;
    let spins: Vec<i32> = (0..nbhd.q_size()).map(|p| spin(bits, p)).collect();
    let mut c = nbhd.form_values(&spins);
    counts[cell_index(c, extent)] += 1;
    for t in 1u64..(1u64 << low) {
        let p = t.trailing_zeros() as usize;
        let sp = spin(bits, p);
        for &(f, other, sign) in &incident[p] {
            c[f] -= 2 * sign * sp * spin(bits, other);
        }
        bits ^= 1 << p;
        counts[cell_index(c, extent)] += 1;
    }
}

/// `Σ_patterns sin γ(d + s1 c1 + s2 c2 + s3 c3)`.
#[inline]
pub fn four_sine_sum(gamma: f64, d: i32, c: [i32; 3]) -> f64 {
    SIGN_PATTERNS
        .iter()
        .map(|s| (gamma * f64::from(d + s[0] * c[0] + s[1] * c[1] + s[2] * c[2])).sin())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermMethod {
    ExactEnumeration,
    MonteCarlo,
}

/// One clause's contribution `⟨−γ, π/4| ½ d Z_a Z_b Z_c |−γ, π/4⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClauseTerm {
    pub clause: usize,
    pub value: f64,
    pub method: TermMethod,
    pub stderr: f64,
}

fn term_from_histogram(nbhd: &Neighborhood, hist: &ConeHistogram, gamma: f64) -> ClauseTerm {
    let d = nbhd.sign();
    let mean = hist.expect(|c1, c2, c3| four_sine_sum(gamma, d, [c1, c2, c3]));
    ClauseTerm {
        clause: nbhd.clause_index,
        value: f64::from(d) / 8.0 * mean,
        method: TermMethod::ExactEnumeration,
        stderr: 0.0,
    }
}

pub fn clause_term_exact(nbhd: &Neighborhood, gamma: f64, limits: &Limits) -> Result<ClauseTerm> {
    let hist = ConeHistogram::enumerate(nbhd, limits)?;
    Ok(term_from_histogram(nbhd, &hist, gamma))
}

/// Sampled estimate of the clause term; one `z` per sample feeds all four sign patterns.
pub fn clause_term_mc(nbhd: &Neighborhood, gamma: f64, samples: usize, seed: u64) -> Result<ClauseTerm> {
    if samples == 0 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least one sample".into()));
    }
    let d = nbhd.sign();
    let q = nbhd.q_size();
    let mut rng = seeded(seed);
    let mut spins = vec![1i32; q];
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for k in 0..samples {
        let mut word = 0u64;
        for (p, s) in spins.iter_mut().enumerate() {
            if p % 64 == 0 {
                word = rng.random();
            }
            *s = if (word >> (p % 64)) & 1 == 1 { -1 } else { 1 };
        }
        let x = f64::from(d) / 8.0 * four_sine_sum(gamma, d, nbhd.form_values(&spins));
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    let stderr = if samples > 1 {
        (m2 / (samples - 1) as f64).sqrt() / (samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(ClauseTerm {
        clause: nbhd.clause_index,
        value: mean,
        method: TermMethod::MonteCarlo,
        stderr,
    })
}

/// `E[cos γc1 cos γc2 cos γc3]` and `E[sin γc1 sin γc2 sin γc3]`.
///
/// The clause term equals `(d/2)·(sin(γd)·cos_product − cos(γd)·sin_product)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductForm {
    pub cos_product: f64,
    pub sin_product: f64,
}

pub fn product_form(nbhd: &Neighborhood, gamma: f64, limits: &Limits) -> Result<ProductForm> {
    let hist = ConeHistogram::enumerate(nbhd, limits)?;
    let g = |c: i32| gamma * f64::from(c);
    Ok(ProductForm {
        cos_product: hist.expect(|a, b, c| g(a).cos() * g(b).cos() * g(c).cos()),
        sin_product: hist.expect(|a, b, c| g(a).sin() * g(b).sin() * g(c).sin()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EvalMode {
    /// Enumerate every cone; fail if a support exceeds `q_max`.
    Exact,
    /// Enumerate where possible, sample the rest.
    Auto { samples: usize, seed: u64 },
    /// Sample every cone.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub gamma: f64,
    pub total: f64,
    /// Root-sum-square of the per-clause standard errors.
    pub stderr: f64,
    pub terms: Vec<ClauseTerm>,
}

enum ConePlan {
    Exact(ConeHistogram),
    Sampled { samples: usize, seed: u64 },
}

/// Precomputed cones for repeated evaluation of `W(γ)` on one instance.
pub struct ConeEvaluator {
    neighborhoods: Vec<Neighborhood>,
    plans: Vec<ConePlan>,
}

impl ConeEvaluator {
    pub fn new(instance: &Instance, mode: EvalMode, limits: &Limits) -> Result<Self> {
        let neighborhoods = build_neighborhoods(instance);
        let plans = par::map_slice(&neighborhoods, |nb| -> Result<ConePlan> {
            let sampled = |samples, seed| ConePlan::Sampled {
                samples,
                seed: derive_seed(seed, nb.clause_index as u64),
            };
            match mode {
                EvalMode::Exact => ConeHistogram::enumerate(nb, limits).map(ConePlan::Exact),
                EvalMode::Auto { samples, seed } => {
                    if nb.q_size() <= limits.q_max {
                        ConeHistogram::enumerate(nb, limits).map(ConePlan::Exact)
                    } else {
                        Ok(sampled(samples, seed))
                    }
                }
                EvalMode::MonteCarlo { samples, seed } => Ok(sampled(samples, seed)),
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(ConeEvaluator { neighborhoods, plans })
    }

    pub fn neighborhoods(&self) -> &[Neighborhood] {
        &self.neighborhoods
    }

    pub fn terms(&self, gamma: f64) -> Result<Vec<ClauseTerm>> {
        let idx: Vec<usize> = (0..self.plans.len()).collect();
        par::map_slice(&idx, |&i| match &self.plans[i] {
            ConePlan::Exact(hist) => Ok(term_from_histogram(&self.neighborhoods[i], hist, gamma)),
            ConePlan::Sampled { samples, seed } => clause_term_mc(&self.neighborhoods[i], gamma, *samples, *seed),
        })
        .into_iter()
        .collect()
    }

    pub fn report(&self, gamma: f64) -> Result<ExpectationReport> {
        let terms = self.terms(gamma)?;
        let total = terms.iter().map(|t| t.value).sum();
        let stderr = terms.iter().map(|t| t.stderr * t.stderr).sum::<f64>().sqrt();
        Ok(ExpectationReport {
            gamma,
            total,
            stderr,
            terms,
        })
    }

    /// `W(γ)`.
    pub fn w(&self, gamma: f64) -> Result<f64> {
        Ok(self.report(gamma)?.total)
    }
}

/// `W(γ) = Σ` clause terms, per clause and in total.
pub fn objective_expectation(
    instance: &Instance,
    gamma: f64,
    mode: EvalMode,
    limits: &Limits,
) -> Result<ExpectationReport> {
    ConeEvaluator::new(instance, mode, limits)?.report(gamma)
}

/// Exact low-order moments of the cone's quadratic forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub pair_counts: [usize; 3],
    /// `E[c_i]`, zero for every cone.
    pub form_means: [f64; 3],
    /// `E[c_i²]`, equal to the pair count of `c_i`.
    pub form_second_moments: [f64; 3],
    /// `E[(d + s1 c1 + s2 c2 + s3 c3)²]` for each even sign pattern.
    pub combined_second_moments: [f64; 4],
    /// `1 + 9D`.
    pub combined_bound: f64,
    pub within_bounds: bool,
}

pub fn moment_checks(nbhd: &Neighborhood, limits: &Limits) -> Result<MomentReport> {
    let hist = ConeHistogram::enumerate(nbhd, limits)?;
    let pick = |i: usize| move |c1: i32, c2: i32, c3: i32| f64::from([c1, c2, c3][i]);
    let form_means = [0, 1, 2].map(|i| hist.expect(pick(i)));
    let form_second_moments = [0, 1, 2].map(|i| hist.expect(|a, b, c| pick(i)(a, b, c).powi(2)));
    let d = nbhd.sign();
    let combined_second_moments =
        SIGN_PATTERNS.map(|s| hist.expect(|a, b, c| f64::from(d + s[0] * a + s[1] * b + s[2] * c).powi(2)));
    let combined_bound = 1.0 + 9.0 * nbhd.d_bound as f64;
    let pair_counts = nbhd.pair_counts();
    let within_bounds = form_means.iter().all(|m| m.abs() < 1e-12)
        && (0..3).all(|i| {
            form_second_moments[i] <= nbhd.d_bound as f64 + 1e-12
                && (form_second_moments[i] - pair_counts[i] as f64).abs() < 1e-12
        })
        && combined_second_moments.iter().all(|&m| m <= combined_bound + 1e-12);
    Ok(MomentReport {
        pair_counts,
        form_means,
        form_second_moments,
        combined_second_moments,
        combined_bound,
        within_bounds,
    })
}

/// `E|d + s1 c1 + s2 c2 + s3 c3|^power` for each even sign pattern.
pub fn absolute_moments(nbhd: &Neighborhood, power: i32, limits: &Limits) -> Result<[f64; 4]> {
    let hist = ConeHistogram::enumerate(nbhd, limits)?;
    let d = nbhd.sign();
    Ok(SIGN_PATTERNS.map(|s| hist.expect(|a, b, c| f64::from(d + s[0] * a + s[1] * b + s[2] * c).abs().powi(power))))
}
