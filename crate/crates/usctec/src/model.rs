//! Shared domain types: system parameters, speed distributions, schemes.

use serde::{Deserialize, Serialize};

use crate::interval::{Interval, IntervalSet};
use crate::rational::{sum, Rat};

/// Static system description: machine count, recovery threshold, straggler
/// tolerance, and per-machine storage caps (normalized by the size of `A`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of machines `N`.
    pub machines: usize,
    /// Recovery threshold `L`: results needed to decode a group.
    pub recovery_threshold: usize,
    /// Straggler tolerance `S`: withheld results survivable per group.
    pub stragglers: usize,
    /// Storage caps `e[n]` in `[0, 1]`, one per machine.
    pub storage_caps: Vec<Rat>,
}

impl SystemParams {
    /// Replication degree `L + S`: machines assigned to every column group.
    pub fn replication(&self) -> usize {
        self.recovery_threshold + self.stragglers
    }

    pub fn with_full_storage(machines: usize, recovery_threshold: usize, stragglers: usize) -> Self {
        SystemParams {
            machines,
            recovery_threshold,
            stragglers,
            storage_caps: vec![Rat::one(); machines],
        }
    }
}

/// One speed realization: row-column multiplications per unit time for each
/// machine. A zero speed means the machine is preempted / unavailable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpeedRealization {
    pub speeds: Vec<Rat>,
}

impl SpeedRealization {
    pub fn new(speeds: Vec<Rat>) -> Self {
        SpeedRealization { speeds }
    }

    pub fn from_ints(speeds: &[i64]) -> Self {
        SpeedRealization {
            speeds: speeds.iter().map(|&v| Rat::from_int(v)).collect(),
        }
    }

    /// Indices of available machines (positive speed).
    pub fn available(&self) -> Vec<usize> {
        self.speeds
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_positive())
            .map(|(n, _)| n)
            .collect()
    }
}

/// A finite speed distribution: realizations with exact probabilities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeedDistribution {
    pub realizations: Vec<WeightedRealization>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedRealization {
    #[serde(rename = "s")]
    pub realization: SpeedRealization,
    #[serde(rename = "prob")]
    pub probability: Rat,
}

impl SpeedDistribution {
    pub fn uniform(realizations: Vec<SpeedRealization>) -> Self {
        let k = realizations.len() as i64;
        SpeedDistribution {
            realizations: realizations
                .into_iter()
                .map(|realization| WeightedRealization {
                    realization,
                    probability: Rat::new(1, k),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn probabilities(&self) -> Vec<Rat> {
        self.realizations
            .iter()
            .map(|w| w.probability.clone())
            .collect()
    }
}

/// A scheme for one speed realization: block fractions `gamma` and the load
/// division matrix `mu` (rows indexed by block, columns by machine).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scheme {
    pub gamma: Vec<Rat>,
    pub mu: Vec<Vec<Rat>>,
}

impl Scheme {
    /// Per-machine computation load, `theta = gamma · mu`.
    pub fn load_vector(&self) -> Vec<Rat> {
        let machines = self.mu.first().map_or(0, Vec::len);
        let mut theta = vec![Rat::zero(); machines];
        for (g, row) in self.mu.iter().enumerate() {
            for (n, entry) in row.iter().enumerate() {
                if !entry.is_zero() {
                    theta[n] += &self.gamma[g] * entry;
                }
            }
        }
        theta
    }

    /// Machines selected for block `g` (nonzero entries of row `g`).
    pub fn support(&self, g: usize) -> Vec<usize> {
        self.mu[g]
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(n, _)| n)
            .collect()
    }

    pub fn total_mass(&self) -> Rat {
        sum(&self.gamma)
    }

    /// Per-machine storage selection as intervals, with blocks laid out
    /// contiguously from `origin`.
    pub fn selection_intervals(&self, origin: &Rat) -> Result<Vec<IntervalSet>, ModelError> {
        let machines = self.mu.first().map_or(0, Vec::len);
        let blocks = gamma_to_intervals(&self.gamma, origin)?;
        let mut sets = vec![IntervalSet::empty(); machines];
        for (g, iv) in blocks.iter().enumerate() {
            for n in self.support(g) {
                sets[n].insert(iv.start.clone(), iv.end.clone());
            }
        }
        Ok(sets)
    }
}

/// Maps block fractions onto contiguous half-open intervals starting at
/// `origin`: block `g` covers `[origin + sum(gamma[..g]), origin + sum(gamma[..=g]))`.
pub fn gamma_to_intervals(gamma: &[Rat], origin: &Rat) -> Result<Vec<Interval>, ModelError> {
    let total = origin + sum(gamma);
    if total > Rat::one() {
        return Err(ModelError::MassOverflow { total });
    }
    let mut out = Vec::with_capacity(gamma.len());
    let mut cursor = origin.clone();
    for g in gamma {
        let next = &cursor + g;
        out.push(Interval::new(cursor, next.clone()));
        cursor = next;
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("block mass overflows the unit range: origin + sum(gamma) = {total}")]
    MassOverflow { total: Rat },
}

/// One invariant violation found during validation, with its location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Checks every type invariant of the system description and returns all
/// violations at once.
pub fn validate(params: &SystemParams, dist: &SpeedDistribution) -> Result<(), Vec<ValidationIssue>> {
    let mut issues = Vec::new();
    let mut push = |location: &str, message: String| {
        issues.push(ValidationIssue {
            location: location.to_owned(),
            message,
        });
    };

    let n = params.machines;
    let k = params.replication();
    if n == 0 {
        push("params.machines", "machine count must be positive".into());
    }
    if params.recovery_threshold == 0 {
        push("params.recovery_threshold", "L must be at least 1".into());
    }
    if k > n {
        push(
            "params",
            format!("L + S = {k} exceeds machine count {n}"),
        );
    }
    if params.storage_caps.len() != n {
        push(
            "params.storage_caps",
            format!("expected {n} entries, got {}", params.storage_caps.len()),
        );
    }
    for (i, e) in params.storage_caps.iter().enumerate() {
        if e.is_negative() || e > &Rat::one() {
            push(
                &format!("params.storage_caps[{i}]"),
                format!("cap {e} outside [0, 1]"),
            );
        }
    }

    if dist.is_empty() {
        push("dist", "at least one speed realization is required".into());
    }
    for (i, w) in dist.realizations.iter().enumerate() {
        let loc = format!("dist.realizations[{i}]");
        if w.realization.speeds.len() != n {
            push(
                &loc,
                format!("expected {n} speeds, got {}", w.realization.speeds.len()),
            );
            continue;
        }
        for (m, s) in w.realization.speeds.iter().enumerate() {
            if s.is_negative() {
                push(&format!("{loc}.s[{m}]"), format!("negative speed {s}"));
            }
        }
        let avail = w.realization.available().len();
        if avail < k {
            push(
                &loc,
                format!("only {avail} available machines < L+S={k}"),
            );
        }
        if !w.probability.is_positive() {
            push(
                &format!("{loc}.prob"),
                format!("probability {} is not positive", w.probability),
            );
        }
    }
    let total_prob: Rat = dist.realizations.iter().map(|w| &w.probability).sum();
    if !dist.is_empty() && total_prob != Rat::one() {
        push(
            "dist",
            format!("probabilities sum to {total_prob} ≠ 1"),
        );
    }

    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}
