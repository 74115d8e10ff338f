//! Stationary state of the full diagonal master equation on
//! {+, −} ⊗ {0, …, n_max}, without adiabatic elimination.
//!
//! States are indexed 2n + σ (σ = 0 for |+⟩, 1 for |−⟩). Transitions:
//!
//! | from     | to         | rate     |
//! |----------|------------|----------|
//! | (+, n)   | (−, n+1)   | Γ₊,ₙˢ    |
//! | (−, n)   | (+, n−1)   | Γ₋,ₙˢ    |
//! | (+, n)   | (−, n)     | Γ₋       |
//! | (−, n)   | (+, n)     | Γ₊       |
//! | (σ, n)   | (σ, n−1)   | κn       |
//!
//! Every transition moves at most three indices, so the generator is banded
//! and the Grassmann–Taksar–Heyman elimination (no subtractions, hence no
//! cancellation) runs in O(n_max).

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rates::RateTable;
use crate::steadystate::RateSource;

const BAND: usize = 3;
const WIDTH: usize = 2 * BAND + 1;

/// Stationary joint populations.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    /// Population of |+, n⟩.
    pub up: Vec<f64>,
    /// Population of |−, n⟩.
    pub down: Vec<f64>,
    /// ‖Gπ‖∞ of the normalized solution.
    pub residual: f64,
}

/// Largest admissible occupation of the n_max level.
pub const BOUNDARY_BOUND: f64 = 1e-9;

impl JointState {
    pub fn photon_marginal(&self) -> Vec<f64> {
        self.up.iter().zip(&self.down).map(|(a, b)| a + b).collect()
    }

    /// ⟨σ_z⟩ = P(+) − P(−).
    pub fn inversion(&self) -> f64 {
        self.up.iter().sum::<f64>() - self.down.iter().sum::<f64>()
    }
}

/// Off-diagonal transition rates in band storage: `rate[i][d]` is the rate
/// from state i to state i + d − 3.
#[derive(Debug, Clone)]
struct Generator {
    rate: Vec<[f64; WIDTH]>,
}

impl Generator {
    fn build(rates: &RateTable, params: &ModelParams, source: RateSource) -> Self {
        let (up_col, down_col) = match source {
            RateSource::SelfConsistent => (&rates.gamma_up_sc, &rates.gamma_down_sc),
            RateSource::GoldenRule => (&rates.gamma_ph_up, &rates.gamma_ph_down),
        };
        let n_max = rates.n_max;
        let kappa = params.kappa();
        let mut rate = vec![[0.0; WIDTH]; 2 * (n_max + 1)];
        let mut set = |from: usize, to: usize, r: f64| rate[from][to + BAND - from] += r;
        for n in 0..=n_max {
            let (up, down) = (2 * n, 2 * n + 1);
            set(up, down, rates.relaxation(params, n));
            set(down, up, rates.excitation(params, n));
            if n < n_max {
                set(up, 2 * (n + 1) + 1, up_col[n]);
            }
            if n > 0 {
                set(down, 2 * (n - 1), down_col[n]);
                let loss = kappa * n as f64;
                set(up, 2 * (n - 1), loss);
                set(down, 2 * (n - 1) + 1, loss);
            }
        }
        Self { rate }
    }

    fn len(&self) -> usize {
        self.rate.len()
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rate[i]
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0.0)
            .map(move |(d, _)| i + d - BAND)
    }

    fn predecessors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        let lo = j.saturating_sub(BAND);
        let hi = (j + BAND).min(self.len() - 1);
        (lo..=hi).filter(move |&i| i != j && self.rate[i][j + BAND - i] > 0.0)
    }

    fn max_rate(&self) -> f64 {
        self.rate.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// ‖Gπ‖∞.
    fn residual(&self, pi: &[f64]) -> f64 {
        (0..self.len())
            .map(|j| {
                let inflow: f64 = self.predecessors(j).map(|i| pi[i] * self.rate[i][j + BAND - i]).sum();
                let outflow: f64 = pi[j] * self.rate[j].iter().sum::<f64>();
                (inflow - outflow).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Strongly connected components with no outgoing edge, each as a sorted
    /// list of states (Kosaraju, iterative).
    fn closed_classes(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut stack = vec![(root, self.successors(root).collect::<Vec<_>>())];
            while let Some((v, next)) = stack.last_mut() {
                if let Some(w) = next.pop() {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push((w, self.successors(w).collect()));
                    }
                } else {
                    order.push(*v);
                    stack.pop();
                }
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &root in order.iter().rev() {
            if comp[root] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut members = vec![root];
            comp[root] = id;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for u in self.predecessors(v) {
                    if comp[u] == usize::MAX {
                        comp[u] = id;
                        members.push(u);
                        stack.push(u);
                    }
                }
            }
            classes.push(members);
        }
        classes
            .into_iter()
            .enumerate()
            .filter(|(id, members)| members.iter().all(|&v| self.successors(v).all(|w| comp[w] == *id)))
            .map(|(_, mut members)| {
                members.sort_unstable();
                members
            })
            .collect()
    }
}

/// Stationary solution restricted to an irreducible class, by banded GTH.
fn gth(generator: &Generator, class: &[usize]) -> Result<Vec<f64>> {
    let m = class.len();
    // subset distances never exceed original distances, so the band holds
    let mut q = vec![[0.0; WIDTH]; m];
    for (a, &i) in class.iter().enumerate() {
        for b in a.saturating_sub(BAND)..(a + BAND + 1).min(m) {
            let j = class[b];
            if a != b && j.abs_diff(i) <= BAND {
                q[a][b + BAND - a] = generator.rate[i][j + BAND - i];
            }
        }
    }
    let at = |a: usize, b: usize| b + BAND - a;
    let mut pivot = vec![0.0; m];
    for k in (1..m).rev() {
        let lo = k.saturating_sub(BAND);
        let s: f64 = (lo..k).map(|j| q[k][at(k, j)]).sum();
        if s <= 0.0 {
            return Err(Error::Regime(format!("state {} of a closed class cannot reach lower states", class[k])));
        }
        pivot[k] = s;
        for i in lo..k {
            let to_k = q[i][at(i, k)];
            if to_k == 0.0 {
                continue;
            }
            for j in lo..k {
                if j != i {
                    q[i][at(i, j)] += to_k * q[k][at(k, j)] / s;
                }
            }
        }
    }
    let mut pi = vec![0.0; m];
    pi[0] = 1.0;
    for k in 1..m {
        let lo = k.saturating_sub(BAND);
        pi[k] = (lo..k).map(|i| pi[i] * q[i][at(i, k)]).sum::<f64>() / pivot[k];
        if pi[k] > 1e250 {
            let scale = pi[k];
            pi[..=k].iter_mut().for_each(|p| *p /= scale);
        }
    }
    let z: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= z);
    Ok(pi)
}

/// Relative residual bound ‖Gπ‖∞ ≤ RESIDUAL_TOL · max rate.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Stationary joint populations for the photon rates selected by `source`.
///
/// Fails with [`Error::Disconnected`] when the generator has more than one
/// closed communicating class, and with [`Error::TailMass`] when the n_max
/// level holds more than [`BOUNDARY_BOUND`].
pub fn stationary_joint(rates: &RateTable, params: &ModelParams, source: RateSource) -> Result<JointState> {
    let generator = Generator::build(rates, params, source);
    let classes = generator.closed_classes();
    if classes.len() != 1 {
        return Err(Error::Disconnected {
            closed_classes: classes.len(),
            representatives: classes.iter().map(|c| label(c[0])).collect(),
        });
    }
    let local = gth(&generator, &classes[0])?;
    let mut pi = vec![0.0; generator.len()];
    for (&i, &p) in classes[0].iter().zip(&local) {
        pi[i] = p;
    }
    let residual = generator.residual(&pi);
    let bound = RESIDUAL_TOL * generator.max_rate();
    if residual > bound {
        return Err(Error::Regime(format!("joint residual {residual:e} exceeds {bound:e}")));
    }
    let n_max = rates.n_max;
    let boundary = pi[2 * n_max] + pi[2 * n_max + 1];
    if boundary > BOUNDARY_BOUND {
        return Err(Error::TailMass { n_max, tail_mass: boundary, bound: BOUNDARY_BOUND, suggested: 2 * n_max.max(1) });
    }
    Ok(JointState {
        up: pi.iter().step_by(2).copied().collect(),
        down: pi.iter().skip(1).step_by(2).copied().collect(),
        residual,
    })
}

fn label(state: usize) -> (char, usize) {
    (if state.is_multiple_of(2) { '+' } else { '-' }, state / 2)
}

/// Total-variation distance ½ Σ|p − q|; the shorter input is zero-padded.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n).map(|i| (get(p, i) - get(q, i)).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{selfconsistent_rates, RateOptions};
    use crate::steadystate::{build_chain, stationary_distribution};
    use approx::assert_relative_eq;

    fn params(edit: impl FnOnce(&mut crate::ParamValues)) -> ModelParams {
        ModelParams::default_scenario().with(edit).unwrap()
    }

    fn product_vs_joint(p: &ModelParams, n_max: usize) -> f64 {
        let rates = selfconsistent_rates(p, n_max, &RateOptions::default()).unwrap();
        let chain = build_chain(&rates, p).unwrap();
        let dist = stationary_distribution(&chain, 1e-6).unwrap();
        let joint = stationary_joint(&rates, p, RateSource::SelfConsistent).unwrap();
        total_variation(&dist.rho, &joint.photon_marginal())
    }

    #[test]
    fn uncoupled_emitter_is_thermal_and_cavity_empty() {
        let p = params(|v| v.g = 0.0);
        let rates = selfconsistent_rates(&p, 10, &RateOptions::default()).unwrap();
        let joint = stationary_joint(&rates, &p, RateSource::SelfConsistent).unwrap();
        let (ex, rel) = (rates.excitation(&p, 0), rates.relaxation(&p, 0));
        assert_relative_eq!(joint.up[0], ex / (ex + rel), max_relative = 1e-12);
        assert_relative_eq!(joint.down[0], rel / (ex + rel), max_relative = 1e-12);
        assert!(joint.up[1..].iter().chain(&joint.down[1..]).all(|&x| x == 0.0));
    }

    #[test]
    fn generator_conserves_probability() {
        let p = ModelParams::default_scenario();
        let rates = selfconsistent_rates(&p, 30, &RateOptions::default()).unwrap();
        let g = Generator::build(&rates, &p, RateSource::SelfConsistent);
        // the diagonal is the negative row sum, so columns of G sum to zero
        // iff every off-diagonal rate lands inside the state space
        for (i, row) in g.rate.iter().enumerate() {
            for (d, &r) in row.iter().enumerate() {
                if r > 0.0 {
                    assert!(i + d >= BAND && i + d - BAND < g.len());
                }
            }
        }
        let uniform = vec![1.0 / g.len() as f64; g.len()];
        let total: f64 = (0..g.len())
            .map(|j| {
                let inflow: f64 = g.predecessors(j).map(|i| uniform[i] * g.rate[i][j + BAND - i]).sum();
                inflow - uniform[j] * g.rate[j].iter().sum::<f64>()
            })
            .sum();
        assert!(total.abs() < 1e-15 * g.max_rate());
    }

    #[test]
    fn equilibrium_has_no_net_current() {
        // detailed balance on every edge when photon rates obey the same
        // Boltzmann ratio as the emitter and the cavity is lossless
        let n_max = 12;
        let (ex, rel, up, down) = (0.2, 0.6, 0.05, 0.15);
        let p = params(|v| {
            v.kappa = 0.0;
            v.pump_up = ex;
            v.pump_down = rel;
            v.eps_c = 0.0;
        });
        let rates = RateTable {
            n_max,
            gamma_ph_up: (0..=n_max).map(|n| up * (n + 1) as f64).collect(),
            gamma_ph_down: (0..=n_max).map(|n| down * n as f64).collect(),
            gamma_up_sc: (0..=n_max).map(|n| up * (n + 1) as f64).collect(),
            gamma_down_sc: (0..=n_max).map(|n| down * n as f64).collect(),
            gamma_total: vec![0.0; n_max + 1],
            gamma_decay_down: 0.0,
            gamma_decay_up: 0.0,
            decay_scale: vec![1.0; n_max + 1],
            detuning: 1.0,
            matrix_elements: Default::default(),
            selfconsistency: Default::default(),
            diverged: vec![],
        };
        let j = stationary_joint(&rates, &p, RateSource::SelfConsistent).unwrap();
        for n in 0..n_max {
            let current = j.up[n] * up * (n + 1) as f64 - j.down[n + 1] * down * (n + 1) as f64;
            assert!(current.abs() < 1e-14, "n = {n}: {current}");
            assert!((j.up[n] * rel - j.down[n] * ex).abs() < 1e-14);
        }
    }

    #[test]
    fn disconnected_generator_is_reported() {
        // no pumps, no decay, no loss: every |+,n⟩ ↔ |−,n+1⟩ pair is closed
        let p = params(|v| {
            v.kappa = 0.0;
            v.pump_up = 0.0;
            v.pump_down = 0.0;
            v.eps_c = 0.0;
        });
        let rates = selfconsistent_rates(&p, 4, &RateOptions::default()).unwrap();
        match stationary_joint(&rates, &p, RateSource::SelfConsistent) {
            Err(Error::Disconnected { closed_classes, representatives }) => {
                assert!(closed_classes > 1);
                assert_eq!(representatives.len(), closed_classes);
            }
            other => panic!("expected a disconnected generator, got {other:?}"),
        }
    }

    #[test]
    fn adiabatic_error_shrinks_with_emitter_speed() {
        let mut last = f64::INFINITY;
        for scale in [1.0, 10.0, 100.0] {
            let p = params(|v| {
                v.pump_up = 0.02 * scale;
                v.pump_down = 0.02 * scale;
                v.kappa = 1e-4 * scale;
                v.g = 0.02;
                v.eps_c = 0.0;
            });
            let tv = product_vs_joint(&p, 600);
            assert!(tv < last, "scale {scale}: {tv} !< {last}");
            last = tv;
        }
    }

    #[test]
    fn total_variation_pads() {
        assert_eq!(total_variation(&[1.0], &[0.5, 0.5]), 0.5);
        assert_eq!(total_variation(&[0.2, 0.8], &[0.2, 0.8]), 0.0);
    }
}
