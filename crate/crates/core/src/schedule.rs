//! Chebyshev-node angle grid and the worst-case guarantee.
//!
//! For occurrence parameter `D` the grid is `γ_r = cos(πr/k) / (10√D)`,
//! `r = 0..=k`, with `k` the smallest odd integer `≥ 5 ln D` (at least 3).
//! Some grid angle (or its negation) achieves
//! `W ≥ m/(20√D·k) − m·(9/10)^{k+2}`; that bound is vacuous for small `D`
//! and is reported without clamping.

use rand::Rng;
use serde::Serialize;

use crate::analytic::{ConeEvaluator, EvalMode};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::limits::Limits;
use crate::rng::seeded;

/// Slack below which a node-property check counts as a failure.
pub const NODE_SLACK_TOLERANCE: f64 = -1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSchedule {
    pub d_bound: usize,
    pub k: usize,
    pub gammas: Vec<f64>,
}

impl AngleSchedule {
    /// Largest grid magnitude, `1/(10√D)`.
    pub fn gamma_max(&self) -> f64 {
        gamma_max(self.d_bound)
    }
}

fn gamma_max(d_bound: usize) -> f64 {
    1.0 / (10.0 * (d_bound as f64).sqrt())
}

fn check_d(d_bound: usize) -> Result<()> {
    if d_bound < 1 {
        return Err(Error::InvalidParameter(
            "occurrence parameter D must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Smallest odd integer `≥ 5 ln D`, floored at 3.
pub fn grid_order(d_bound: usize) -> Result<usize> {
    check_d(d_bound)?;
    let target = 5.0 * (d_bound as f64).ln();
    let mut k = target.ceil().max(0.0) as usize;
    if k.is_multiple_of(2) {
        k += 1;
    }
    Ok(k.max(3))
}

/// `x_r = cos(πr/k)` for `r = 0..=k`.
pub fn chebyshev_nodes(k: usize) -> Vec<f64> {
    (0..=k)
        .map(|r| (std::f64::consts::PI * r as f64 / k as f64).cos())
        .collect()
}

pub fn make_schedule(d_bound: usize) -> Result<AngleSchedule> {
    let k = grid_order(d_bound)?;
    let top = gamma_max(d_bound);
    Ok(AngleSchedule {
        d_bound,
        k,
        gammas: chebyshev_nodes(k).into_iter().map(|x| top * x).collect(),
    })
}

/// Per-clause Taylor remainder bound `(9√D|γ|)^{k+2}`.
pub fn remainder_bound(d_bound: usize, k: usize, gamma: f64) -> f64 {
    (9.0 * (d_bound as f64).sqrt() * gamma.abs()).powi(k as i32 + 2)
}

/// `(k+1)^{k+2} · E[c²]^{(k+2)/2}`, an upper bound on `E|c|^{k+2}` for degree-2 `c`.
pub fn hypercontractive_bound(k: usize, second_moment: f64) -> f64 {
    let p = k as f64 + 2.0;
    (k as f64 + 1.0).powf(p) * second_moment.powf(p / 2.0)
}

/// `m/(20√D·k) − m·(9/10)^{k+2}`.
pub fn grid_bound(m: usize, d_bound: usize, k: usize) -> f64 {
    let m = m as f64;
    m / (20.0 * (d_bound as f64).sqrt() * k as f64) - m * 0.9f64.powi(k as i32 + 2)
}

/// `m/(101·√D·ln D)`; undefined for `D = 1`.
pub fn asymptotic_bound(m: usize, d_bound: usize) -> Option<f64> {
    (d_bound >= 2).then(|| m as f64 / (101.0 * (d_bound as f64).sqrt() * (d_bound as f64).ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuaranteeReport {
    pub m: usize,
    pub d_bound: usize,
    pub k: usize,
    /// Rigorous grid guarantee on the best `W`; may be negative.
    pub grid_bound: f64,
    pub grid_bound_vacuous: bool,
    /// Large-`D` simplification of the grid guarantee; `None` when `D = 1`.
    pub asymptotic_bound: Option<f64>,
    pub asymptotic_note: &'static str,
    /// `(9/10)^{k+2}`, the remainder bound at the grid's extreme angle.
    pub remainder_per_clause: f64,
}

pub fn guarantee(m: usize, d_bound: usize) -> Result<GuaranteeReport> {
    if m < 1 {
        return Err(Error::InvalidParameter("clause count m must be at least 1".into()));
    }
    let k = grid_order(d_bound)?;
    let grid = grid_bound(m, d_bound, k);
    let asymptotic = asymptotic_bound(m, d_bound);
    Ok(GuaranteeReport {
        m,
        d_bound,
        k,
        grid_bound: grid,
        grid_bound_vacuous: grid <= 0.0,
        asymptotic_bound: asymptotic,
        asymptotic_note: if asymptotic.is_some() {
            "large-D heuristic, not a finite-D guarantee"
        } else {
            "undefined: ln D = 0"
        },
        remainder_per_clause: remainder_bound(d_bound, k, gamma_max(d_bound)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub r: usize,
    pub gamma: f64,
    pub w: f64,
}

/// The best sign-corrected grid angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanBest {
    pub r: usize,
    /// `+1` if `γ_r` itself is best, `-1` if `−γ_r` is.
    pub sign: i32,
    pub gamma: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub d_bound: usize,
    pub k: usize,
    pub curve: Vec<ScanPoint>,
    pub best: ScanBest,
}

/// Evaluates `W(γ_r)` on the grid and picks the best of `±γ_r`.
///
/// `W` is odd, so `W(−γ_r) = −W(γ_r)` is not re-evaluated. Ties go to the
/// smallest `r`, then to the positive sign.
pub fn scan(instance: &Instance, schedule: &AngleSchedule, mode: EvalMode, limits: &Limits) -> Result<ScanReport> {
    let evaluator = ConeEvaluator::new(instance, mode, limits)?;
    let curve = schedule
        .gammas
        .iter()
        .enumerate()
        .map(|(r, &gamma)| {
            Ok(ScanPoint {
                r,
                gamma,
                w: evaluator.w(gamma)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        d_bound: schedule.d_bound,
        k: schedule.k,
        best: best_of(&curve),
        curve,
    })
}

fn best_of(curve: &[ScanPoint]) -> ScanBest {
    let mut best = ScanBest {
        r: 0,
        sign: 1,
        gamma: 0.0,
        w: f64::NEG_INFINITY,
    };
    for p in curve {
        for sign in [1, -1] {
            let w = f64::from(sign) * p.w;
            if w > best.w {
                best = ScanBest {
                    r: p.r,
                    sign,
                    gamma: f64::from(sign) * p.gamma,
                    w,
                };
            }
        }
    }
    if curve.is_empty() {
        best.w = 0.0;
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChebyshevCheck {
    pub k: usize,
    pub trials: usize,
    /// Minimum over trials of `max_r |p(x_r)| − 1/k`.
    pub min_slack: f64,
    pub passed: bool,
    /// Coefficients `a_2..a_k` of the trial with the smallest slack.
    pub worst_coefficients: Vec<f64>,
}

/// `max_r |x_r + a_2 x_r² + … + a_k x_r^k| − 1/k`.
pub fn node_slack(k: usize, coefficients: &[f64]) -> f64 {
    let peak = chebyshev_nodes(k)
        .into_iter()
        .map(|x| {
            // Horner on a_k x^{k-1} + … + a_2 x + 1, times x
            let inner = coefficients.iter().rev().fold(0.0, |acc, &a| acc * x + a);
            (x * (1.0 + x * inner)).abs()
        })
        .fold(0.0, f64::max);
    peak - 1.0 / k as f64
}

/// Checks the node inequality for each coefficient vector `a_2..a_k`.
pub fn chebyshev_node_property(k: usize, coefficient_sets: &[Vec<f64>]) -> Result<ChebyshevCheck> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "order k must be odd and at least 3, got {k}"
        )));
    }
    let mut min_slack = f64::INFINITY;
    let mut worst = Vec::new();
    for coeffs in coefficient_sets {
        if coeffs.len() != k - 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients a_2..a_k, got {}",
                k - 1,
                coeffs.len()
            )));
        }
        let slack = node_slack(k, coeffs);
        if slack < min_slack {
            min_slack = slack;
            worst.clone_from(coeffs);
        }
    }
    Ok(ChebyshevCheck {
        k,
        trials: coefficient_sets.len(),
        min_slack,
        passed: min_slack >= NODE_SLACK_TOLERANCE,
        worst_coefficients: worst,
    })
}

/// Node check over `trials` coefficient vectors drawn uniformly from `[-scale, scale]`.
pub fn chebyshev_node_property_random(k: usize, trials: usize, scale: f64, seed: u64) -> Result<ChebyshevCheck> {
    let mut rng = seeded(seed);
    let sets: Vec<Vec<f64>> = (0..trials)
        .map(|_| (1..k).map(|_| rng.random_range(-scale..=scale)).collect())
        .collect();
    chebyshev_node_property(k, &sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random, Clause, SignMode};

    #[test]
    fn schedule_d4() {
        let s = make_schedule(4).unwrap();
        assert_eq!(s.k, 7);
        assert_eq!(s.gammas.len(), 8);
        assert!((s.gammas[0] - 0.05).abs() < 1e-15);
        assert!((s.gammas[7] + 0.05).abs() < 1e-15);
    }

    #[test]
    fn schedule_d1_floor() {
        let s = make_schedule(1).unwrap();
        assert_eq!(s.k, 3);
        assert!((s.gammas[1] - 0.05).abs() < 1e-15);
        assert!(make_schedule(0).is_err());
    }

    #[test]
    fn schedule_orders_are_odd() {
        for d in 1..200 {
            let k = grid_order(d).unwrap();
            assert!(k % 2 == 1 && k >= 3);
            assert!(k as f64 >= 5.0 * (d as f64).ln());
            if k > 3 {
                assert!(((k - 2) as f64) < 5.0 * (d as f64).ln());
            }
        }
    }

    #[test]
    fn schedule_symmetry_and_range() {
        for d in [1, 2, 3, 4, 9, 50] {
            let s = make_schedule(d).unwrap();
            for r in 0..=s.k {
                assert!((s.gammas[s.k - r] + s.gammas[r]).abs() < 1e-15);
                assert!(s.gammas[r].abs() <= s.gamma_max());
            }
        }
    }

    #[test]
    fn remainder_examples() {
        assert_eq!(remainder_bound(4, 7, 0.0), 0.0);
        let at_edge = remainder_bound(4, 7, 0.05);
        assert!((at_edge - 0.9f64.powi(9)).abs() < 1e-14);
        assert!((remainder_bound(3, 5, 1.0 / (9.0 * 3f64.sqrt())) - 1.0).abs() < 1e-12);
        assert!(remainder_bound(3, 5, 0.02) < remainder_bound(3, 5, -0.03));
    }

    #[test]
    fn hypercontractive_examples() {
        assert_eq!(hypercontractive_bound(3, 0.0), 0.0);
        assert_eq!(hypercontractive_bound(1, 1.0), 8.0);
    }

    #[test]
    fn guarantee_d4() {
        let g = guarantee(1000, 4).unwrap();
        assert_eq!(g.k, 7);
        let expected = 1000.0 / 280.0 - 1000.0 * 0.9f64.powi(9);
        assert!((g.grid_bound - expected).abs() < 1e-9);
        assert!(g.grid_bound_vacuous);
        assert!(g.asymptotic_bound.unwrap() > 0.0);
        assert_eq!(
            g.remainder_per_clause,
            remainder_bound(4, 7, make_schedule(4).unwrap().gamma_max())
        );
        assert!(guarantee(10, 1).unwrap().asymptotic_bound.is_none());
        assert!(guarantee(10, 0).is_err());
    }

    #[test]
    fn grid_bound_increases_with_k_at_d4() {
        let b: Vec<f64> = [7, 9, 11].iter().map(|&k| grid_bound(1000, 4, k)).collect();
        assert!(b[0] < b[1] && b[1] < b[2]);
    }

    #[test]
    fn scan_single_clause() {
        let inst = Instance::new(3, vec![Clause::new(0, 1, 2, 1)]).unwrap();
        for d in [1, 4, 9] {
            let s = make_schedule(d).unwrap();
            let rep = scan(&inst, &s, EvalMode::Exact, &Limits::default()).unwrap();
            assert_eq!(rep.curve.len(), s.k + 1);
            assert!((rep.best.w - 0.5 * s.gamma_max().sin()).abs() < 1e-15);
            assert_eq!(rep.best.r, 0);
        }
    }

    #[test]
    fn scan_best_is_curve_max() {
        for seed in 0..6 {
            let inst = generate_random(24, 20, 3, SignMode::UniformRandom, seed).unwrap();
            let s = make_schedule(inst.d_bound().max(1)).unwrap();
            let rep = scan(&inst, &s, EvalMode::Exact, &Limits::default()).unwrap();
            let peak = rep.curve.iter().map(|p| p.w.abs()).fold(0.0, f64::max);
            assert_eq!(rep.best.w, peak);
            assert!(rep.best.w >= 0.0);
        }
    }

    #[test]
    fn node_property_examples() {
        let zero = chebyshev_node_property(3, &[vec![0.0, 0.0]]).unwrap();
        assert!((zero.min_slack - (1.0 - 1.0 / 3.0)).abs() < 1e-15);
        assert!(zero.passed);
        for k in [3, 5, 7] {
            assert!(chebyshev_node_property_random(k, 1000, 5.0, k as u64).unwrap().passed);
        }
        assert!(chebyshev_node_property(4, &[]).is_err());
        assert!(chebyshev_node_property(5, &[vec![1.0]]).is_err());
    }

    #[test]
    fn chebyshev_polynomial_is_extremal() {
        // T_5(x)/5 = x − 4x³ + (16/5)x⁵ attains exactly 1/5 at every node
        let c = chebyshev_node_property(5, &[vec![0.0, -4.0, 0.0, 3.2]]).unwrap();
        assert!(c.min_slack.abs() < 1e-12);
        assert!(c.passed);
    }
}
