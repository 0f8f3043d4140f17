//! Storage placement under heterogeneous caps.
//!
//! Each pass solves, per speed realization, a capped load problem followed by
//! a binary division of the remaining row mass. The per-realization storage
//! selections are unioned into a candidate placement; if any machine's cap is
//! exceeded, the placement is committed up to the first overflow location,
//! the overflowing machines are disabled, and the remaining rows are
//! reassigned with shrunken caps.

use serde::{Deserialize, Serialize};

use crate::division::{divide, DivisionError, DivisionProblem};
use crate::interval::IntervalSet;
use crate::load::{computation_time, expected_time, solve_lp, LoadError, LoadProblem};
use crate::model::{Scheme, SpeedDistribution, SpeedRealization, SystemParams};
use crate::rational::{sum, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementResult {
    /// Final storage placement `Z[n]` per machine.
    pub storage: Vec<IntervalSet>,
    /// Storage selection per realization per machine; each is a subset of the
    /// machine's storage.
    pub selections: Vec<Vec<IntervalSet>>,
    /// Final scheme (block fractions + binary division matrix) per realization.
    pub schemes: Vec<Scheme>,
    /// Computation time per realization.
    pub times: Vec<Rat>,
    pub expected_time: Rat,
    /// Passes the loop took, including the final overflow-free one.
    pub passes: usize,
    /// One entry per overflow: commit point and the machines disabled there.
    pub commits: Vec<CommitEvent>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitEvent {
    pub rho_hat: Rat,
    pub overflowed: Vec<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum PlacementError {
    #[error("pass {pass}, realization {realization}: {source}")]
    InfeasibleLoad {
        pass: usize,
        realization: usize,
        source: LoadError,
    },
    #[error(
        "pass {pass}, realization {realization}: {available} available machines < L+S = {needed}"
    )]
    TooFewAvailable {
        pass: usize,
        realization: usize,
        available: usize,
        needed: usize,
    },
    #[error("pass {pass}, realization {realization}: {source}")]
    Division {
        pass: usize,
        realization: usize,
        source: DivisionError,
    },
    #[error("placement did not settle within {0} passes")]
    PassLimit(usize),
    #[error("truncation point {rho_hat} exceeds total block mass {total}")]
    TruncationOutOfRange { rho_hat: Rat, total: Rat },
}

/// Finds the first overflow location over candidate placements: the largest
/// `y` such that every machine stores at most its cap within `[0, y)`.
/// Storing exactly the cap is allowed. Returns `None` when nothing overflows.
pub fn detect_overflow(
    candidates: &[IntervalSet],
    caps: &[Rat],
) -> Option<(Rat, Vec<usize>)> {
    let mut first: Option<Rat> = None;
    for (set, cap) in candidates.iter().zip(caps) {
        if let Some(y) = set.cap_boundary(cap) {
            first = Some(match first {
                Some(cur) => cur.min(y),
                None => y,
            });
        }
    }
    let rho_hat = first?;
    let overflowed = candidates
        .iter()
        .zip(caps)
        .enumerate()
        .filter(|(_, (set, cap))| set.cap_boundary(cap) == Some(rho_hat.clone()))
        .map(|(n, _)| n)
        .collect();
    Some((rho_hat, overflowed))
}

/// Truncates a scheme's block fractions at `rho_hat`: whole blocks are kept
/// while the running sum stays below `rho_hat`, the boundary block is split
/// (support unchanged), the rest is dropped.
pub fn truncate(
    gamma: &[Rat],
    supports: &[Vec<usize>],
    rho_hat: &Rat,
) -> Result<(Vec<Rat>, Vec<Vec<usize>>), PlacementError> {
    let total = sum(gamma);
    if rho_hat > &total {
        return Err(PlacementError::TruncationOutOfRange {
            rho_hat: rho_hat.clone(),
            total,
        });
    }
    let mut out_gamma = Vec::new();
    let mut out_supports = Vec::new();
    let mut cum = Rat::zero();
    for (g, sup) in gamma.iter().zip(supports) {
        if &cum >= rho_hat {
            break;
        }
        let next = &cum + g;
        let piece = if &next <= rho_hat {
            g.clone()
        } else {
            rho_hat - &cum
        };
        if piece.is_positive() {
            out_gamma.push(piece);
            out_supports.push(sup.clone());
        }
        cum = next;
    }
    Ok((out_gamma, out_supports))
}

/// Total stored mass across machines.
pub fn storage_size(result: &PlacementResult) -> Rat {
    result.storage.iter().map(IntervalSet::measure).sum()
}

/// One maximal stored interval of one machine, tagged by the realizations
/// whose selections cover it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeometryRow {
    pub machine: usize,
    pub start: Rat,
    pub end: Rat,
    /// `"common"` when all realizations select the interval (and there is
    /// more than one), otherwise `"s<i>+..."` with 1-based realization ids.
    pub tag: String,
}

/// Flattens a placement into CSV-ready rows describing which realizations
/// select each stored interval.
pub fn export_geometry(result: &PlacementResult) -> Vec<GeometryRow> {
    let machines = result.storage.len();
    let realizations = result.selections.len();
    let mut rows = Vec::new();
    for n in 0..machines {
        // elementary segments: cut the machine's storage at every selection
        // boundary, then merge equal-tag neighbors
        let mut cuts: Vec<Rat> = Vec::new();
        for iv in result.storage[n].intervals() {
            cuts.push(iv.start.clone());
            cuts.push(iv.end.clone());
        }
        for sel in &result.selections {
            for iv in sel[n].intervals() {
                cuts.push(iv.start.clone());
                cuts.push(iv.end.clone());
            }
        }
        cuts.sort();
        cuts.dedup();
        let mut pending: Option<GeometryRow> = None;
        for pair in cuts.windows(2) {
            let (start, end) = (&pair[0], &pair[1]);
            if !result.storage[n].contains(start) {
                if let Some(row) = pending.take() {
                    rows.push(row);
                }
                continue;
            }
            let covering: Vec<usize> = (0..realizations)
                .filter(|&i| result.selections[i][n].contains(start))
                .collect();
            let tag = if covering.len() == realizations && realizations > 1 {
                "common".to_owned()
            } else {
                covering
                    .iter()
                    .map(|i| format!("s{}", i + 1))
                    .collect::<Vec<_>>()
                    .join("+")
            };
            match &mut pending {
                Some(row) if row.end == *start && row.tag == tag => {
                    row.end = end.clone();
                }
                _ => {
                    if let Some(row) = pending.take() {
                        rows.push(row);
                    }
                    pending = Some(GeometryRow {
                        machine: n,
                        start: start.clone(),
                        end: end.clone(),
                        tag,
                    });
                }
            }
        }
        if let Some(row) = pending.take() {
            rows.push(row);
        }
    }
    rows
}

/// Runs the placement loop for a validated system.
pub fn place(
    params: &SystemParams,
    dist: &SpeedDistribution,
) -> Result<PlacementResult, PlacementError> {
    let machines = params.machines;
    let k = params.replication();
    let k_rat = Rat::from_int(k as i64);
    let realizations = dist.len();

    let mut rho_hat = Rat::zero();
    let mut committed: Vec<(Vec<Rat>, Vec<Vec<usize>>)> =
        vec![(Vec::new(), Vec::new()); realizations];
    let mut working: Vec<SpeedRealization> = dist
        .realizations
        .iter()
        .map(|w| w.realization.clone())
        .collect();
    let mut commits = Vec::new();

    let pass_limit = machines + 2;
    for pass in 1..=pass_limit {
        let pending_mass = Rat::one() - &rho_hat;
        let load = &k_rat * &pending_mass;
        let caps = vec![pending_mass.clone(); machines];

        let mut candidate = vec![IntervalSet::empty(); machines];
        let mut full: Vec<(Vec<Rat>, Vec<Vec<usize>>)> = Vec::with_capacity(realizations);
        let mut selections: Vec<Vec<IntervalSet>> = Vec::with_capacity(realizations);

        for (i, speeds) in working.iter().enumerate() {
            let available = speeds.available().len();
            if available < k {
                return Err(PlacementError::TooFewAvailable {
                    pass,
                    realization: i,
                    available,
                    needed: k,
                });
            }
            let (mut gamma, mut supports) = committed[i].clone();
            if pending_mass.is_positive() {
                let solution = solve_lp(&LoadProblem {
                    total: load.clone(),
                    speeds: speeds.clone(),
                    caps: caps.clone(),
                })
                .map_err(|source| PlacementError::InfeasibleLoad {
                    pass,
                    realization: i,
                    source,
                })?;
                let division = divide(&DivisionProblem {
                    theta: solution.theta,
                    rho: pending_mass.clone(),
                    replication: k,
                })
                .map_err(|source| PlacementError::Division {
                    pass,
                    realization: i,
                    source,
                })?;
                gamma.extend(division.gamma);
                supports.extend(division.supports);
            }

            let scheme = scheme_from(&gamma, &supports, machines);
            let sel = scheme
                .selection_intervals(&Rat::zero())
                .expect("concatenated gamma sums to 1");
            for (n, set) in sel.iter().enumerate() {
                candidate[n] = candidate[n].union(set);
            }
            selections.push(sel);
            full.push((gamma, supports));
        }

        match detect_overflow(&candidate, &params.storage_caps) {
            None => {
                let schemes: Vec<Scheme> = full
                    .iter()
                    .map(|(gamma, supports)| scheme_from(gamma, supports, machines))
                    .collect();
                let times: Vec<Rat> = schemes
                    .iter()
                    .zip(&dist.realizations)
                    .map(|(scheme, w)| {
                        computation_time(&scheme.load_vector(), &w.realization)
                            .expect("loads only on available machines")
                    })
                    .collect();
                let expected = expected_time(&dist.probabilities(), &times);
                return Ok(PlacementResult {
                    storage: candidate,
                    selections,
                    schemes,
                    times,
                    expected_time: expected,
                    passes: pass,
                    commits,
                });
            }
            Some((rho_new, overflowed)) => {
                for (i, (gamma, supports)) in full.iter().enumerate() {
                    committed[i] = truncate(gamma, supports, &rho_new)?;
                }
                for speeds in &mut working {
                    for &n in &overflowed {
                        speeds.speeds[n] = Rat::zero();
                    }
                }
                rho_hat = rho_new.clone();
                commits.push(CommitEvent {
                    rho_hat: rho_new,
                    overflowed,
                });
            }
        }
    }
    Err(PlacementError::PassLimit(pass_limit))
}

fn scheme_from(gamma: &[Rat], supports: &[Vec<usize>], machines: usize) -> Scheme {
    let mu = supports
        .iter()
        .map(|sup| {
            let mut row = vec![Rat::zero(); machines];
            for &n in sup {
                row[n] = Rat::one();
            }
            row
        })
        .collect();
    Scheme {
        gamma: gamma.to_vec(),
        mu,
    }
}
