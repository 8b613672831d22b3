//! Dense statevector reference simulator for level-1 QAOA.
//!
//! Basis index bit `v` holds `x_v`. Gate applications mutate the state in
//! place; a `QuantumState` has a single owner.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Assignment, Instance};
use crate::limits::Limits;
use crate::par;
use crate::rng::seeded;

/// QAOA angles as applied to the state: `e^{-iβB} e^{-iγC} |s⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleParams {
    pub gamma: f64,
    pub beta: f64,
}

impl AngleParams {
    pub fn new(gamma: f64, beta: f64) -> Self {
        AngleParams { gamma, beta }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    amps: Vec<Complex64>,
}

/// `C(z) = ½ Σ sign · z_a z_b z_c` for every basis index `z < 2^n`.
pub fn cost_diagonal(instance: &Instance, n: usize) -> Vec<f64> {
    let masks: Vec<(u64, f64)> = instance
        .clauses()
        .iter()
        .map(|cl| (cl.mask(), 0.5 * f64::from(cl.sign())))
        .collect();
    par::map_range(1usize << n, |z| {
        let z = z as u64;
        masks
            .iter()
            .map(
                |&(mask, half)| {
                    if (z & mask).count_ones() & 1 == 0 {
                        half
                    } else {
                        -half
                    }
                },
            )
            .sum()
    })
}

impl QuantumState {
    /// `|s⟩ = 2^{-n/2} Σ_z |z⟩`.
    pub fn uniform(n: usize, limits: &Limits) -> Result<Self> {
        if n > limits.n_max || n >= usize::BITS as usize {
            return Err(Error::TooManyQubits { n, max: limits.n_max });
        }
        let dim = 1usize << n;
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(QuantumState {
            n,
            amps: vec![amp; dim],
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize, limits: &Limits) -> Result<Self> {
        if n > limits.n_max {
            return Err(Error::TooManyQubits { n, max: limits.n_max });
        }
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        let amps = &self.amps;
        par::sum_range(amps.len(), |i| amps[i].norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        par::map_slice(&self.amps, |a| a.norm_sqr())
    }

    fn check_dims(&self, instance: &Instance) -> Result<()> {
        if instance.n() > self.n {
            return Err(Error::DimensionMismatch {
                state: self.n,
                instance: instance.n(),
            });
        }
        Ok(())
    }

    /// Multiplies `amp[z]` by `exp(-i γ C(z))`.
    pub fn apply_cost_phase(&mut self, instance: &Instance, gamma: f64) -> Result<()> {
        self.check_dims(instance)?;
        if gamma == 0.0 || instance.m() == 0 {
            return Ok(());
        }
        let diag = cost_diagonal(instance, self.n);
        par::for_each_mut(&mut self.amps, |z, a| {
            *a *= Complex64::from_polar(1.0, -gamma * diag[z]);
        });
        Ok(())
    }

    /// Applies `exp(-i β X) = cos β · I − i sin β · X` to every qubit.
    pub fn apply_mixer(&mut self, beta: f64) {
        if beta == 0.0 {
            return;
        }
        let (s, c) = beta.sin_cos();
        let minus_i_sin = Complex64::new(0.0, -s);
        for q in 0..self.n {
            let stride = 1usize << q;
            par::for_each_chunk_mut(&mut self.amps, 2 * stride, |_, block| {
                let (lo, hi) = block.split_at_mut(stride);
                for (x0, x1) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (a0, a1) = (*x0, *x1);
                    *x0 = a0 * c + a1 * minus_i_sin;
                    *x1 = a0 * minus_i_sin + a1 * c;
                }
            });
        }
    }

    /// `⟨ψ| C |ψ⟩`.
    pub fn expectation(&self, instance: &Instance) -> Result<f64> {
        Ok(self.cost_moments(instance)?.0)
    }

    /// `(⟨C⟩, ⟨C²⟩ − ⟨C⟩²)` under the state's measurement distribution.
    pub fn cost_moments(&self, instance: &Instance) -> Result<(f64, f64)> {
        self.check_dims(instance)?;
        let diag = cost_diagonal(instance, self.n);
        let amps = &self.amps;
        let mean = par::sum_range(amps.len(), |z| amps[z].norm_sqr() * diag[z]);
        let second = par::sum_range(amps.len(), |z| amps[z].norm_sqr() * diag[z] * diag[z]);
        Ok((mean, (second - mean * mean).max(0.0)))
    }

    /// Draws basis indices i.i.d. from `|amp|²`.
    pub fn sample_indices(&self, count: usize, seed: u64) -> Vec<u64> {
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        let last = self.amps.len() - 1;
        let mut rng = seeded(seed);
        (0..count)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                cumulative.partition_point(|&c| c <= u).min(last) as u64
            })
            .collect()
    }

    pub fn sample(&self, count: usize, seed: u64) -> Vec<Assignment> {
        self.sample_indices(count, seed)
            .into_iter()
            .map(|z| Assignment::from_index(z, self.n))
            .collect()
    }
}

/// `|γ, β⟩ = e^{-iβB} e^{-iγC} |s⟩` with the angles taken literally.
pub fn prepare(instance: &Instance, params: AngleParams, limits: &Limits) -> Result<QuantumState> {
    let mut state = QuantumState::uniform(instance.n(), limits)?;
    state.apply_cost_phase(instance, params.gamma)?;
    state.apply_mixer(params.beta);
    Ok(state)
}

/// `⟨−γ, π/4| C |−γ, π/4⟩` by dense simulation, the reference for the analytic evaluator.
pub fn reference_w(instance: &Instance, gamma: f64, limits: &Limits) -> Result<f64> {
    prepare(instance, AngleParams::new(-gamma, std::f64::consts::FRAC_PI_4), limits)?.expectation(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random, Clause, SignMode};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

    fn lim() -> Limits {
        Limits::default()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn uniform_amplitudes() {
        let s = QuantumState::uniform(1, &lim()).unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .all(|&a| close(a, Complex64::new(FRAC_1_SQRT_2, 0.0))));
        let s = QuantumState::uniform(2, &lim()).unwrap();
        assert!(s.amplitudes().iter().all(|&a| close(a, Complex64::new(0.5, 0.0))));
        let s = QuantumState::uniform(10, &lim()).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_rejects_oversize() {
        let l = Limits { n_max: 4, ..lim() };
        assert!(matches!(
            QuantumState::uniform(5, &l),
            Err(Error::TooManyQubits { n: 5, max: 4 })
        ));
    }

    #[test]
    fn cost_phase_identities() {
        let inst = Instance::new(3, vec![Clause::new(0, 1, 2, 0)]).unwrap();
        let s0 = QuantumState::uniform(3, &lim()).unwrap();
        let mut s = s0.clone();
        s.apply_cost_phase(&inst, 0.0).unwrap();
        assert_eq!(s, s0);
        s.apply_cost_phase(&Instance::new(3, vec![]).unwrap(), 1.3).unwrap();
        assert_eq!(s, s0);

        let mut b = QuantumState::basis(3, 0, &lim()).unwrap();
        b.apply_cost_phase(&inst, PI).unwrap();
        assert!(close(b.amplitudes()[0], Complex64::from_polar(1.0, -FRAC_PI_2)));
    }

    #[test]
    fn cost_phase_dimension_check() {
        let inst = Instance::new(4, vec![Clause::new(1, 2, 3, 0)]).unwrap();
        let mut s = QuantumState::uniform(3, &lim()).unwrap();
        assert!(matches!(
            s.apply_cost_phase(&inst, 0.1),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(s.expectation(&inst).is_err());
    }

    #[test]
    fn mixer_examples() {
        let s0 = QuantumState::basis(2, 1, &lim()).unwrap();
        let mut s = s0.clone();
        s.apply_mixer(0.0);
        assert_eq!(s, s0);

        let mut one = QuantumState::basis(1, 0, &lim()).unwrap();
        one.apply_mixer(FRAC_PI_2);
        assert!(close(one.amplitudes()[0], Complex64::new(0.0, 0.0)));
        assert!(close(one.amplitudes()[1], Complex64::new(0.0, -1.0)));

        let n = 5;
        let beta = 0.37;
        let mut u = QuantumState::uniform(n, &lim()).unwrap();
        let phase = Complex64::from_polar(1.0, -beta * n as f64);
        let expected = u.amplitudes()[0] * phase;
        u.apply_mixer(beta);
        assert!(u.amplitudes().iter().all(|&a| close(a, expected)));
    }

    #[test]
    fn zero_angles_give_uniform_state() {
        let inst = generate_random(8, 6, 2, SignMode::UniformRandom, 3).unwrap();
        let s = prepare(&inst, AngleParams::new(0.0, 0.0), &lim()).unwrap();
        assert_eq!(s, QuantumState::uniform(8, &lim()).unwrap());
    }

    #[test]
    fn single_clause_concentrates() {
        let inst = Instance::new(3, vec![Clause::new(0, 1, 2, 0)]).unwrap();
        let s = prepare(&inst, AngleParams::new(-FRAC_PI_2, FRAC_PI_4), &lim()).unwrap();
        let p_sat: f64 = s
            .probabilities()
            .iter()
            .enumerate()
            .filter(|&(z, _)| inst.satisfied_count_index(z as u64) == 1)
            .map(|(_, p)| p)
            .sum();
        assert!((p_sat - 1.0).abs() < 1e-12);
        assert!((s.expectation(&inst).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn expectation_examples() {
        let inst = generate_random(9, 8, 2, SignMode::UniformRandom, 2).unwrap();
        let u = QuantumState::uniform(9, &lim()).unwrap();
        assert!(u.expectation(&inst).unwrap().abs() < 1e-12);

        let single = Instance::new(3, vec![Clause::new(0, 1, 2, 0)]).unwrap();
        let b = QuantumState::basis(3, 0, &lim()).unwrap();
        assert_eq!(b.expectation(&single).unwrap(), 0.5);
    }

    #[test]
    fn norm_preserved_n12() {
        let inst = generate_random(12, 14, 3, SignMode::UniformRandom, 8).unwrap();
        let s = prepare(&inst, AngleParams::new(0.71, -0.3), &lim()).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn odd_in_gamma_and_zero_without_cost() {
        for seed in 0..5 {
            let inst = generate_random(10, 8, 2, SignMode::UniformRandom, seed).unwrap();
            for &(g, b) in &[(0.3, 0.4), (-0.9, 1.1), (0.05, FRAC_PI_4)] {
                let plus = prepare(&inst, AngleParams::new(g, b), &lim()).unwrap();
                let minus = prepare(&inst, AngleParams::new(-g, b), &lim()).unwrap();
                let sum = plus.expectation(&inst).unwrap() + minus.expectation(&inst).unwrap();
                assert!(sum.abs() <= 1e-12, "{sum}");
                let mixer_only = prepare(&inst, AngleParams::new(0.0, b), &lim()).unwrap();
                assert!(mixer_only.expectation(&inst).unwrap().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sampling_examples() {
        let b = QuantumState::basis(4, 0, &lim()).unwrap();
        assert!(b.sample_indices(100, 1).iter().all(|&z| z == 0));

        let u = QuantumState::uniform(1, &lim()).unwrap();
        let draws = u.sample_indices(100_000, 5);
        let frac = draws.iter().filter(|&&z| z == 1).count() as f64 / 1e5;
        assert!((0.494..=0.506).contains(&frac), "{frac}");
        assert_eq!(draws, u.sample_indices(100_000, 5));
        assert_eq!(u.sample(3, 5).len(), 3);
    }

    #[test]
    fn sample_mean_converges() {
        let inst = generate_random(10, 9, 2, SignMode::UniformRandom, 4).unwrap();
        let s = prepare(&inst, AngleParams::new(-0.4, FRAC_PI_4), &lim()).unwrap();
        let exact = s.expectation(&inst).unwrap();
        let shots = 20_000;
        let diag = cost_diagonal(&inst, 10);
        let mean = s
            .sample_indices(shots, 77)
            .iter()
            .map(|&z| diag[z as usize])
            .sum::<f64>()
            / shots as f64;
        let tol = 4.0 * (inst.m() as f64 / 2.0) / (shots as f64).sqrt();
        assert!((mean - exact).abs() <= tol);
    }
}
