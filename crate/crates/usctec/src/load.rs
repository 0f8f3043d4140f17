//! Min-max load balancing: exact water-filling over heterogeneous speeds.
//!
//! Distributes a total load `l` over the available machines so the maximum
//! load-to-speed ratio is minimized, subject to per-machine caps. Every
//! unclamped machine ends at the common level `c`; machines whose cap binds
//! are clamped and removed from the pool.

use serde::{Deserialize, Serialize};

use crate::model::SpeedRealization;
use crate::rational::{sum, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadProblem {
    /// Total load to distribute, in `[0, L+S]`.
    #[serde(rename = "l")]
    pub total: Rat,
    /// Speed realization; zero entries are unavailable machines.
    #[serde(rename = "s")]
    pub speeds: SpeedRealization,
    /// Per-machine load caps in `[0, 1]`.
    #[serde(rename = "sigma")]
    pub caps: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadSolution {
    /// Optimal per-machine loads; zero for unavailable machines.
    pub theta: Vec<Rat>,
    /// Optimal objective `c = max theta[n] / s[n]` over available machines.
    pub c: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("infeasible load problem: total load {total} exceeds available capacity {capacity}")]
    Infeasible { total: Rat, capacity: Rat },
    #[error("no available machines")]
    NoAvailableMachines,
    #[error("machine {machine} has positive load {load} but zero speed")]
    LoadOnUnavailableMachine { machine: usize, load: Rat },
}

/// Solves the capped min-max load problem by exact iterative water-filling.
///
/// Each round sets `c = remaining / sum(speeds of unclamped machines)`; any
/// machine with `c * s[n] > sigma[n]` is clamped to its cap and removed. The
/// loop runs at most once per machine. The optimizer is unique:
/// `theta[n] = min(c * s[n], sigma[n])` for every available machine.
pub fn solve_lp(problem: &LoadProblem) -> Result<LoadSolution, LoadError> {
    let speeds = &problem.speeds.speeds;
    let n = speeds.len();
    assert_eq!(problem.caps.len(), n, "cap vector length mismatch");

    let available = problem.speeds.available();
    if available.is_empty() {
        return Err(LoadError::NoAvailableMachines);
    }
    let capacity: Rat = available.iter().map(|&i| &problem.caps[i]).sum();
    if problem.total > capacity {
        return Err(LoadError::Infeasible {
            total: problem.total.clone(),
            capacity,
        });
    }

    let mut theta = vec![Rat::zero(); n];
    let mut pool = available;
    let mut remaining = problem.total.clone();
    loop {
        if pool.is_empty() {
            debug_assert!(remaining.is_zero());
            break;
        }
        let pool_speed: Rat = pool.iter().map(|&i| &speeds[i]).sum();
        let level = &remaining / &pool_speed;
        let clamped: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&i| &level * &speeds[i] > problem.caps[i])
            .collect();
        if clamped.is_empty() {
            for &i in &pool {
                theta[i] = &level * &speeds[i];
            }
            break;
        }
        for &i in &clamped {
            theta[i] = problem.caps[i].clone();
            remaining -= &problem.caps[i];
        }
        pool.retain(|i| !clamped.contains(i));
    }

    let c = objective(&theta, speeds);
    Ok(LoadSolution { theta, c })
}

fn objective(theta: &[Rat], speeds: &[Rat]) -> Rat {
    let mut c = Rat::zero();
    for (load, speed) in theta.iter().zip(speeds) {
        if speed.is_positive() {
            c = c.max(load / speed);
        }
    }
    c
}

/// Computation time of a load vector under a speed realization:
/// `max theta[n] / s[n]` over available machines.
pub fn computation_time(theta: &[Rat], speeds: &SpeedRealization) -> Result<Rat, LoadError> {
    for (i, (load, speed)) in theta.iter().zip(&speeds.speeds).enumerate() {
        if load.is_positive() && !speed.is_positive() {
            return Err(LoadError::LoadOnUnavailableMachine {
                machine: i,
                load: load.clone(),
            });
        }
    }
    Ok(objective(theta, &speeds.speeds))
}

/// Probability-weighted exact average of per-realization times.
pub fn expected_time(probabilities: &[Rat], times: &[Rat]) -> Rat {
    assert_eq!(
        probabilities.len(),
        times.len(),
        "one time per realization required"
    );
    probabilities.iter().zip(times).map(|(p, t)| p * t).sum()
}

/// Sum of loads must equal the requested total; exposed for diagnostics.
pub fn total_load(theta: &[Rat]) -> Rat {
    sum(theta)
}
