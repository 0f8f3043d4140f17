//! Division of a load vector into block fractions with binary machine
//! supports, and the per-block computation assignments built on top of it.
//!
//! The division loop repeatedly peels a block off the remaining load: it
//! selects the machine with the smallest nonzero load together with the `k-1`
//! largest, and subtracts the largest step that keeps the remainder feasible.
//! Sorting ties break by ascending machine index, which makes the output
//! deterministic.

use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::model::Scheme;
use crate::rational::{sum, Rat};

/// Target of the division: realize `theta` as `gamma · mu` with binary `mu`
/// rows of weight `replication` and `sum(gamma) = rho`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisionProblem {
    pub theta: Vec<Rat>,
    pub rho: Rat,
    /// Replication degree `k = L + S`: ones per row of `mu`.
    #[serde(rename = "k")]
    pub replication: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisionResult {
    pub gamma: Vec<Rat>,
    /// Support set of each binary row, ascending machine indices.
    pub supports: Vec<Vec<usize>>,
    pub machines: usize,
}

impl DivisionResult {
    /// Dense binary `mu` matrix.
    pub fn mu_matrix(&self) -> Vec<Vec<Rat>> {
        self.supports
            .iter()
            .map(|sup| {
                let mut row = vec![Rat::zero(); self.machines];
                for &n in sup {
                    row[n] = Rat::one();
                }
                row
            })
            .collect()
    }

    pub fn into_scheme(self) -> Scheme {
        let mu = self.mu_matrix();
        Scheme {
            gamma: self.gamma,
            mu,
        }
    }

    /// Reconstructs `gamma · mu`; equals the input `theta` exactly.
    pub fn load_vector(&self) -> Vec<Rat> {
        let mut theta = vec![Rat::zero(); self.machines];
        for (g, sup) in self.supports.iter().enumerate() {
            for &n in sup {
                theta[n] += &self.gamma[g];
            }
        }
        theta
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DivisionError {
    #[error("malformed division problem: {0}")]
    InvalidProblem(String),
    #[error(
        "infeasible division: theta[{machine}] = {load} exceeds sum(theta)/k = {bound}"
    )]
    Infeasible {
        machine: usize,
        load: Rat,
        bound: Rat,
    },
    #[error("division failed to terminate within {0} steps")]
    NonTermination(usize),
    #[error("assignment row has no positive entries")]
    EmptyRow,
    #[error("column count {r} is not divisible by the recovery threshold {l}")]
    IndivisibleColumns { r: usize, l: usize },
}

fn check_problem(p: &DivisionProblem) -> Result<(), DivisionError> {
    if p.replication == 0 {
        return Err(DivisionError::InvalidProblem("replication degree is zero".into()));
    }
    if !p.rho.is_positive() || p.rho > Rat::one() {
        return Err(DivisionError::InvalidProblem(format!(
            "rho = {} outside (0, 1]",
            p.rho
        )));
    }
    let total = sum(&p.theta);
    let expected = Rat::from_int(p.replication as i64) * &p.rho;
    if total != expected {
        return Err(DivisionError::InvalidProblem(format!(
            "sum(theta) = {total} but k * rho = {expected}"
        )));
    }
    for (n, t) in p.theta.iter().enumerate() {
        if t.is_negative() || t > &p.rho {
            return Err(DivisionError::InvalidProblem(format!(
                "theta[{n}] = {t} outside [0, rho = {}]",
                p.rho
            )));
        }
    }
    Ok(())
}

/// Existence test for a binary division: `theta[n] <= sum(theta) / k` for all
/// machines. Necessary and sufficient.
pub fn check_feasible(theta: &[Rat], replication: usize) -> bool {
    let bound = sum(theta) / Rat::from_int(replication as i64);
    theta.iter().all(|t| t <= &bound)
}

/// Runs the division loop, producing `gamma` and binary supports with
/// `gamma · mu = theta` exactly.
pub fn divide(p: &DivisionProblem) -> Result<DivisionResult, DivisionError> {
    check_problem(p)?;
    let k = p.replication;
    if !check_feasible(&p.theta, k) {
        let bound = sum(&p.theta) / Rat::from_int(k as i64);
        let (machine, load) = p
            .theta
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1))
            .map(|(n, t)| (n, t.clone()))
            .expect("nonempty theta");
        return Err(DivisionError::Infeasible {
            machine,
            load,
            bound,
        });
    }

    let machines = p.theta.len();
    let mut theta = p.theta.clone();
    let mut gamma = Vec::new();
    let mut supports = Vec::new();
    let step_limit = 4 * machines.max(1);

    while theta.iter().any(Rat::is_positive) {
        if gamma.len() >= step_limit {
            return Err(DivisionError::NonTermination(step_limit));
        }
        let remaining: Rat = sum(&theta);
        // nonzero entries, ascending by (load, machine index)
        let mut order: Vec<usize> = (0..machines).filter(|&n| theta[n].is_positive()).collect();
        order.sort_by(|&a, &b| theta[a].cmp(&theta[b]).then(a.cmp(&b)));
        let active = order.len();
        if active < k {
            // cannot pick k distinct machines; ruled out by the feasibility
            // check, kept as a hard failure
            return Err(DivisionError::InvalidProblem(format!(
                "{active} nonzero entries remain but each block needs {k} machines"
            )));
        }

        let mut support: Vec<usize> = Vec::with_capacity(k);
        support.push(order[0]);
        support.extend_from_slice(&order[active - (k - 1)..]);
        support.sort_unstable();
        support.dedup();
        debug_assert_eq!(support.len(), k);

        let step = if active >= k + 1 {
            let headroom = &remaining / Rat::from_int(k as i64) - &theta[order[active - k]];
            headroom.min(theta[order[0]].clone())
        } else {
            theta[order[0]].clone()
        };
        debug_assert!(step.is_positive());

        for &n in &support {
            theta[n] -= &step;
            debug_assert!(!theta[n].is_negative());
        }
        gamma.push(step);
        supports.push(support);
    }

    Ok(DivisionResult {
        gamma,
        supports,
        machines,
    })
}

/// Per-block computation assignment: each piece is a fraction of the column
/// range together with the `L+S` machines responsible for it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputationAssignment {
    pub pieces: Vec<AssignmentPiece>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentPiece {
    /// Fraction of the unit column range covered by this piece.
    pub mass: Rat,
    /// Machines assigned to the piece, ascending.
    pub machines: Vec<usize>,
}

impl ComputationAssignment {
    /// Column mass assigned to one machine across all pieces; equals the
    /// corresponding `mu` row entry.
    pub fn machine_mass(&self, machine: usize) -> Rat {
        self.pieces
            .iter()
            .filter(|p| p.machines.contains(&machine))
            .map(|p| &p.mass)
            .sum()
    }

    pub fn total_mass(&self) -> Rat {
        self.pieces.iter().map(|p| &p.mass).sum()
    }
}

/// Turns one `mu` row (entries in `[0, 1]`, summing to `k`) into an
/// assignment by dividing it with `rho = 1`. Binary rows short-circuit to a
/// single piece over the whole range.
pub fn build_assignment(row: &[Rat], replication: usize) -> Result<ComputationAssignment, DivisionError> {
    let support: Vec<usize> = row
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_positive())
        .map(|(n, _)| n)
        .collect();
    if support.is_empty() {
        return Err(DivisionError::EmptyRow);
    }
    let is_binary = support.iter().all(|&n| row[n] == Rat::one());
    if is_binary && support.len() == replication {
        return Ok(ComputationAssignment {
            pieces: vec![AssignmentPiece {
                mass: Rat::one(),
                machines: support,
            }],
        });
    }
    let result = divide(&DivisionProblem {
        theta: row.to_vec(),
        rho: Rat::one(),
        replication,
    })?;
    Ok(ComputationAssignment {
        pieces: result
            .gamma
            .into_iter()
            .zip(result.supports)
            .map(|(mass, machines)| AssignmentPiece { mass, machines })
            .collect(),
    })
}

/// Converts the piece masses into contiguous integer column ranges that
/// partition `[0, r/L)`, by rounding the cumulative (normalized) boundaries.
/// Exact whenever every boundary times `r/L` is an integer.
pub fn realize_columns(
    assignment: &ComputationAssignment,
    r: usize,
    l: usize,
) -> Result<Vec<Range<usize>>, DivisionError> {
    if l == 0 || r % l != 0 {
        return Err(DivisionError::IndivisibleColumns { r, l });
    }
    let cols = r / l;
    let total = assignment.total_mass();
    let mut out = Vec::with_capacity(assignment.pieces.len());
    let mut cum = Rat::zero();
    let mut prev = 0usize;
    for piece in &assignment.pieces {
        cum += &piece.mass;
        let boundary = (&cum / &total * Rat::from_int(cols as i64))
            .round_int()
            .try_into()
            .map(|b: i64| b as usize)
            .unwrap_or(cols);
        let boundary = boundary.clamp(prev, cols);
        out.push(prev..boundary);
        prev = boundary;
    }
    if let Some(last) = out.last_mut() {
        last.end = cols;
    }
    Ok(out)
}
