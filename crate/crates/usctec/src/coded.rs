//! Lagrange-coded matrix multiplication: encoding, worker computation, and
//! straggler-tolerant decoding.
//!
//! The master encodes the column blocks of `B` as evaluations of a
//! degree-`L-1` matrix polynomial at per-machine points `alpha_n`; workers
//! multiply their stored row block against their coded columns; any `L`
//! results per group interpolate the polynomial back at the `beta_l` points,
//! recovering the plain products.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::division::{build_assignment, realize_columns, DivisionError};
use crate::field::{FieldError, Matrix, PrimeField};
use crate::model::Scheme;
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodedError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("evaluation points are not pairwise distinct")]
    DuplicatePoints,
    #[error("alpha and beta point sets intersect")]
    PointSetsIntersect,
    #[error("group (block {block}, piece {piece}) not decodable: {survivors} survivors < L = {needed}")]
    NotDecodable {
        block: usize,
        piece: usize,
        survivors: usize,
        needed: usize,
    },
    #[error("decode needs exactly {needed} contributions, got {got}")]
    WrongContributionCount { needed: usize, got: usize },
    #[error("block fraction {fraction} of block {block} does not realize an integer row count for q = {q}")]
    InexactRowCount { block: usize, fraction: Rat, q: usize },
    #[error("column masses of block {block} do not realize exact integer ranges for r/L = {cols}")]
    InexactColumnCount { block: usize, cols: usize },
    #[error(transparent)]
    Division(#[from] DivisionError),
}

/// Interpolation points: `beta_l` for the `L` column blocks and `alpha_n`
/// per machine, all distinct, with the two sets disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationPoints {
    pub betas: Vec<u64>,
    pub alphas: Vec<u64>,
}

impl EvaluationPoints {
    pub fn new(
        field: &PrimeField,
        betas: Vec<u64>,
        alphas: Vec<u64>,
    ) -> Result<Self, CodedError> {
        let betas: Vec<u64> = betas.into_iter().map(|b| field.reduce(b)).collect();
        let alphas: Vec<u64> = alphas.into_iter().map(|a| field.reduce(a)).collect();
        let beta_set: BTreeSet<u64> = betas.iter().copied().collect();
        let alpha_set: BTreeSet<u64> = alphas.iter().copied().collect();
        if beta_set.len() != betas.len() || alpha_set.len() != alphas.len() {
            return Err(CodedError::DuplicatePoints);
        }
        if !beta_set.is_disjoint(&alpha_set) {
            return Err(CodedError::PointSetsIntersect);
        }
        Ok(EvaluationPoints { betas, alphas })
    }

    /// `beta_l = l` for `l in 1..=L` and `alpha_n = L + n + 1` for machine
    /// `n` (0-based): distinct and disjoint by construction. Requires
    /// `p > N + L`.
    pub fn standard(field: &PrimeField, l: usize, machines: usize) -> Result<Self, CodedError> {
        let needed = (machines + l) as u64;
        if field.modulus() <= needed {
            return Err(FieldError::ModulusTooSmall {
                p: field.modulus(),
                needed,
            }
            .into());
        }
        let betas = (1..=l as u64).collect();
        let alphas = (0..machines as u64).map(|n| l as u64 + n + 1).collect();
        EvaluationPoints::new(field, betas, alphas)
    }

    fn lagrange_basis_over_betas(&self, field: &PrimeField, at: u64) -> Vec<u64> {
        lagrange_basis(field, &self.betas, at)
    }
}

/// Coefficients `prod_{k != l} (at - x_k) / (x_l - x_k)` for each node `x_l`.
fn lagrange_basis(field: &PrimeField, nodes: &[u64], at: u64) -> Vec<u64> {
    (0..nodes.len())
        .map(|l| {
            let mut coeff = 1u64;
            for (k, &node) in nodes.iter().enumerate() {
                if k != l {
                    let num = field.sub(at, node);
                    let den = field.sub(nodes[l], node);
                    coeff = field.mul(coeff, field.div(num, den));
                }
            }
            coeff
        })
        .collect()
}

/// Encodes the columns `assigned` of every `B` block for one machine:
/// the evaluation at `alpha_n` of the interpolating polynomial through the
/// blocks at the `beta` points.
pub fn encode(
    field: &PrimeField,
    b_blocks: &[Matrix],
    assigned: &[usize],
    points: &EvaluationPoints,
    machine: usize,
) -> Matrix {
    let basis = points.lagrange_basis_over_betas(field, points.alphas[machine]);
    let rows = b_blocks[0].rows;
    let mut out = Matrix::zeros(rows, assigned.len());
    for (block, coeff) in b_blocks.iter().zip(basis) {
        out.add_scaled(field, &block.select_columns(assigned), coeff);
    }
    out
}

/// Worker-side product for one row block: `A_g` times the coded columns at
/// `positions` (indices into the machine's encoded payload).
pub fn worker_compute(
    field: &PrimeField,
    a_block: &Matrix,
    encoded: &Matrix,
    positions: &[usize],
) -> Matrix {
    a_block.mul(field, &encoded.select_columns(positions))
}

/// Interpolates one group from exactly `L` worker contributions and
/// evaluates at `beta`: the result equals `A_g (B_l)` restricted to the
/// group's columns.
pub fn decode_block(
    field: &PrimeField,
    contributions: &[(usize, Matrix)],
    points: &EvaluationPoints,
    beta: u64,
    recovery_threshold: usize,
) -> Result<Matrix, CodedError> {
    if contributions.len() != recovery_threshold {
        return Err(CodedError::WrongContributionCount {
            needed: recovery_threshold,
            got: contributions.len(),
        });
    }
    let nodes: Vec<u64> = contributions
        .iter()
        .map(|(machine, _)| points.alphas[*machine])
        .collect();
    let basis = lagrange_basis(field, &nodes, beta);
    let (rows, cols) = {
        let m = &contributions[0].1;
        (m.rows, m.cols)
    };
    let mut out = Matrix::zeros(rows, cols);
    for ((_, m), coeff) in contributions.iter().zip(basis) {
        out.add_scaled(field, m, coeff);
    }
    Ok(out)
}

/// A scheme realized against concrete matrix dimensions: integer row ranges
/// per block and integer column ranges with machine sets per group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundPlan {
    pub row_ranges: Vec<Range<usize>>,
    /// `pieces[g][f]`: column range within `[0, r/L)` plus its `L+S` machines.
    pub pieces: Vec<Vec<RealizedPiece>>,
    pub machines: usize,
    pub recovery_threshold: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedPiece {
    pub cols: Range<usize>,
    pub machines: Vec<usize>,
}

impl RoundPlan {
    /// Columns of `[0, r/L)` assigned to `machine` within block `g`.
    pub fn block_columns(&self, g: usize, machine: usize) -> Vec<usize> {
        let mut cols = Vec::new();
        for piece in &self.pieces[g] {
            if piece.machines.contains(&machine) {
                cols.extend(piece.cols.clone());
            }
        }
        cols.sort_unstable();
        cols
    }

    /// All columns assigned to `machine` across blocks.
    pub fn machine_columns(&self, machine: usize) -> Vec<usize> {
        let mut set = BTreeSet::new();
        for g in 0..self.pieces.len() {
            set.extend(self.block_columns(g, machine));
        }
        set.into_iter().collect()
    }
}

/// Realizes a scheme against dimensions `q` (rows of `A`) and `r` (columns
/// of `B`, a multiple of `L`). Every `gamma[g] * q` and every column
/// boundary times `r/L` must be an integer.
pub fn plan_from_scheme(
    scheme: &Scheme,
    q: usize,
    r: usize,
    recovery_threshold: usize,
    replication: usize,
) -> Result<RoundPlan, CodedError> {
    let l = recovery_threshold;
    if l == 0 || r % l != 0 {
        return Err(DivisionError::IndivisibleColumns { r, l }.into());
    }
    let cols = r / l;
    let machines = scheme.mu.first().map_or(0, Vec::len);

    let mut row_ranges = Vec::with_capacity(scheme.gamma.len());
    let mut cursor = 0usize;
    for (g, fraction) in scheme.gamma.iter().enumerate() {
        let rows = fraction * Rat::from_int(q as i64);
        if !rows.denom().eq(&1.into()) {
            return Err(CodedError::InexactRowCount {
                block: g,
                fraction: fraction.clone(),
                q,
            });
        }
        let count: usize = rows.numer().try_into().expect("nonnegative row count");
        row_ranges.push(cursor..cursor + count);
        cursor += count;
    }

    let mut pieces = Vec::with_capacity(scheme.mu.len());
    for (g, row) in scheme.mu.iter().enumerate() {
        let assignment = build_assignment(row, replication)?;
        // exactness: every piece boundary must land on an integer column
        let total = assignment.total_mass();
        let mut cum = Rat::zero();
        for piece in &assignment.pieces {
            cum += &piece.mass;
            let boundary = &cum / &total * Rat::from_int(cols as i64);
            if !boundary.denom().eq(&1.into()) {
                return Err(CodedError::InexactColumnCount { block: g, cols });
            }
        }
        let ranges = realize_columns(&assignment, r, l)?;
        pieces.push(
            assignment
                .pieces
                .iter()
                .zip(ranges)
                .map(|(piece, cols)| RealizedPiece {
                    cols,
                    machines: piece.machines.clone(),
                })
                .collect(),
        );
    }

    Ok(RoundPlan {
        row_ranges,
        pieces,
        machines,
        recovery_threshold,
    })
}

/// Straggler set per `(block, piece)`, aligned with `RoundPlan::pieces`.
pub type StragglerMask = Vec<Vec<Vec<usize>>>;

pub fn no_stragglers(plan: &RoundPlan) -> StragglerMask {
    plan.pieces.iter().map(|ps| vec![Vec::new(); ps.len()]).collect()
}

/// Executes one full coded round: encode, compute on every non-straggling
/// worker, decode each group from the lexicographically first `L` survivors,
/// and assemble `A · B`.
pub fn run_round(
    field: &PrimeField,
    a: &Matrix,
    b: &Matrix,
    plan: &RoundPlan,
    points: &EvaluationPoints,
    stragglers: &StragglerMask,
) -> Result<Matrix, CodedError> {
    let l = plan.recovery_threshold;
    let cols = b.cols / l;
    let b_blocks: Vec<Matrix> = (0..l)
        .map(|i| b.select_columns(&(i * cols..(i + 1) * cols).collect::<Vec<_>>()))
        .collect();

    // per-machine encoded payloads
    let assigned: Vec<Vec<usize>> = (0..plan.machines)
        .map(|n| plan.machine_columns(n))
        .collect();
    let encoded: Vec<Option<Matrix>> = (0..plan.machines)
        .map(|n| {
            if assigned[n].is_empty() {
                None
            } else {
                Some(encode(field, &b_blocks, &assigned[n], points, n))
            }
        })
        .collect();

    let mut product = Matrix::zeros(a.rows, b.cols);
    for (g, row_range) in plan.row_ranges.iter().enumerate() {
        let a_block = a.select_rows(row_range.clone());
        // worker results for this block, restricted later per piece
        let mut results: Vec<Option<Matrix>> = vec![None; plan.machines];
        for n in 0..plan.machines {
            let block_cols = plan.block_columns(g, n);
            if block_cols.is_empty() {
                continue;
            }
            let payload = encoded[n].as_ref().expect("assigned machine has payload");
            let positions: Vec<usize> = block_cols
                .iter()
                .map(|c| assigned[n].binary_search(c).expect("assigned column"))
                .collect();
            results[n] = Some(worker_compute(field, &a_block, payload, &positions));
        }

        for (f, piece) in plan.pieces[g].iter().enumerate() {
            let survivors: Vec<usize> = piece
                .machines
                .iter()
                .copied()
                .filter(|n| !stragglers[g][f].contains(n))
                .collect();
            if survivors.len() < l {
                return Err(CodedError::NotDecodable {
                    block: g,
                    piece: f,
                    survivors: survivors.len(),
                    needed: l,
                });
            }
            let chosen = &survivors[..l];
            let contributions: Vec<(usize, Matrix)> = chosen
                .iter()
                .map(|&n| {
                    let block_cols = plan.block_columns(g, n);
                    let positions: Vec<usize> = piece
                        .cols
                        .clone()
                        .map(|c| block_cols.binary_search(&c).expect("piece column assigned"))
                        .collect();
                    (n, results[n].as_ref().unwrap().select_columns(&positions))
                })
                .collect();
            for (li, &beta) in points.betas.iter().enumerate() {
                let decoded = decode_block(field, &contributions, points, beta, l)?;
                for (ri, r_abs) in row_range.clone().enumerate() {
                    for (ci, c_rel) in piece.cols.clone().enumerate() {
                        product.set(r_abs, li * cols + c_rel, decoded.get(ri, ci));
                    }
                }
            }
        }
    }
    Ok(product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_field() -> PrimeField {
        PrimeField::new(101).unwrap()
    }

    #[test]
    fn standard_points_disjoint() {
        let f = small_field();
        let pts = EvaluationPoints::standard(&f, 2, 6).unwrap();
        assert_eq!(pts.betas, vec![1, 2]);
        assert_eq!(pts.alphas, vec![3, 4, 5, 6, 7, 8]);
        // alpha equal to a beta is rejected
        assert!(matches!(
            EvaluationPoints::new(&f, vec![1, 2], vec![1, 5]),
            Err(CodedError::PointSetsIntersect)
        ));
        let tiny = PrimeField::new(7).unwrap();
        assert!(EvaluationPoints::standard(&tiny, 2, 6).is_err());
    }

    #[test]
    fn encode_degenerate_single_block() {
        // L = 1: the empty product makes the payload the plain columns
        let f = small_field();
        let pts = EvaluationPoints::standard(&f, 1, 3).unwrap();
        let b = Matrix::from_rows(&f, vec![vec![1, 2, 3], vec![4, 5, 6]]);
        let payload = encode(&f, &[b.clone()], &[0, 2], &pts, 1);
        assert_eq!(payload, b.select_columns(&[0, 2]));
    }

    #[test]
    fn encoded_payload_interpolates_blocks() {
        // evaluating the interpolant at beta_l must recover block l
        let f = small_field();
        let pts = EvaluationPoints::standard(&f, 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let blocks = vec![
            Matrix::random(&f, 3, 4, &mut rng),
            Matrix::random(&f, 3, 4, &mut rng),
        ];
        let cols = vec![0, 1, 2, 3];
        for (l, &beta) in pts.betas.iter().enumerate() {
            let basis = lagrange_basis(&f, &pts.betas, beta);
            let mut v = Matrix::zeros(3, 4);
            for (block, coeff) in blocks.iter().zip(basis) {
                v.add_scaled(&f, &block.select_columns(&cols), coeff);
            }
            assert_eq!(v, blocks[l]);
        }
    }

    #[test]
    fn worker_identity_block() {
        let f = small_field();
        let pts = EvaluationPoints::standard(&f, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let blocks = vec![
            Matrix::random(&f, 2, 3, &mut rng),
            Matrix::random(&f, 2, 3, &mut rng),
        ];
        let payload = encode(&f, &blocks, &[0, 1, 2], &pts, 0);
        let identity = Matrix::identity(2);
        let h = worker_compute(&f, &identity, &payload, &[0, 1, 2]);
        assert_eq!(h, payload);
    }

    #[test]
    fn decode_all_l_subsets_agree() {
        let f = PrimeField::mersenne31();
        let l = 2;
        let pts = EvaluationPoints::standard(&f, l, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = Matrix::random(&f, 4, 5, &mut rng);
        let blocks = vec![
            Matrix::random(&f, 5, 6, &mut rng),
            Matrix::random(&f, 5, 6, &mut rng),
        ];
        let cols: Vec<usize> = (0..6).collect();
        let results: Vec<Matrix> = (0..3)
            .map(|n| {
                let payload = encode(&f, &blocks, &cols, &pts, n);
                a.mul(&f, &payload)
            })
            .collect();
        for (li, &beta) in pts.betas.iter().enumerate() {
            let truth = a.mul(&f, &blocks[li]);
            for pair in [[0usize, 1], [0, 2], [1, 2]] {
                let contributions: Vec<(usize, Matrix)> =
                    pair.iter().map(|&n| (n, results[n].clone())).collect();
                let decoded = decode_block(&f, &contributions, &pts, beta, l).unwrap();
                assert_eq!(decoded, truth);
            }
        }
    }

    #[test]
    fn decode_wrong_count_is_error() {
        let f = small_field();
        let pts = EvaluationPoints::standard(&f, 2, 3).unwrap();
        let m = Matrix::zeros(1, 1);
        assert!(matches!(
            decode_block(&f, &[(0, m)], &pts, 1, 2),
            Err(CodedError::WrongContributionCount { .. })
        ));
    }

    #[test]
    fn zero_matrix_round() {
        let f = PrimeField::mersenne31();
        let scheme = Scheme {
            gamma: vec![Rat::one()],
            mu: vec![vec![Rat::one(), Rat::one(), Rat::one()]],
        };
        let plan = plan_from_scheme(&scheme, 4, 6, 2, 3).unwrap();
        let pts = EvaluationPoints::standard(&f, 2, 3).unwrap();
        let a = Matrix::zeros(4, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = Matrix::random(&f, 5, 6, &mut rng);
        let product = run_round(&f, &a, &b, &plan, &pts, &no_stragglers(&plan)).unwrap();
        assert!(product.is_zero());
    }

    #[test]
    fn plan_rejects_inexact_rows() {
        let scheme = Scheme {
            gamma: vec![Rat::new(1, 3), Rat::new(2, 3)],
            mu: vec![
                vec![Rat::one(), Rat::one(), Rat::one()],
                vec![Rat::one(), Rat::one(), Rat::one()],
            ],
        };
        assert!(matches!(
            plan_from_scheme(&scheme, 4, 6, 2, 3),
            Err(CodedError::InexactRowCount { .. })
        ));
    }
}
