//! Cyclic storage baseline: uniform blocks, each machine stores `Q`
//! consecutive blocks (wrapping), per-block loads solved by water-filling.

use crate::load::{solve_lp, LoadError, LoadProblem};
use crate::model::{Scheme, SpeedRealization, SystemParams};
use crate::rational::Rat;

#[derive(Debug, thiserror::Error)]
pub enum CyclicError {
    #[error("Q = {q} outside [L+S = {min}, N = {max}]")]
    BadBlockCount { q: usize, min: usize, max: usize },
    #[error("block {block}: only {available} available storers < L+S = {needed}")]
    TooFewStorers {
        block: usize,
        available: usize,
        needed: usize,
    },
    #[error("block {block}: {source}")]
    Load { block: usize, source: LoadError },
}

/// The 1-based wrap `a % N ≜ a - floor((a-1)/N) * N`, mapping any positive
/// `a` into `1..=N`.
pub fn wrap_one_based(a: usize, n: usize) -> usize {
    a - (a - 1) / n * n
}

/// Blocks stored by `machine` (both 0-based): blocks `machine+1 ..
/// machine+q` under the 1-based wrap, returned 0-based and sorted.
pub fn stored_blocks(machine: usize, q: usize, n: usize) -> Vec<usize> {
    let mut blocks: Vec<usize> = (0..q)
        .map(|offset| wrap_one_based(machine + 1 + offset, n) - 1)
        .collect();
    blocks.sort_unstable();
    blocks
}

/// Builds the cyclic scheme for one speed realization: `gamma = (1/N, ...,
/// 1/N)` and each block's `mu` row is the water-filling solution over the
/// machines that store the block. Rows may be fractional.
pub fn build_cyclic(
    params: &SystemParams,
    q: usize,
    speeds: &SpeedRealization,
) -> Result<Scheme, CyclicError> {
    let n = params.machines;
    let k = params.replication();
    if q < k || q > n {
        return Err(CyclicError::BadBlockCount { q, min: k, max: n });
    }

    // storers per block, from the per-machine stored ranges
    let mut storers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for machine in 0..n {
        for block in stored_blocks(machine, q, n) {
            storers[block].push(machine);
        }
    }

    let gamma = vec![Rat::new(1, n as i64); n];
    let mut mu = Vec::with_capacity(n);
    for (block, machines) in storers.iter().enumerate() {
        let available = machines
            .iter()
            .filter(|&&m| speeds.speeds[m].is_positive())
            .count();
        if available < k {
            return Err(CyclicError::TooFewStorers {
                block,
                available,
                needed: k,
            });
        }
        // restrict the realization to the storing set by zeroing the rest
        let mut restricted = vec![Rat::zero(); n];
        for &m in machines {
            restricted[m] = speeds.speeds[m].clone();
        }
        let solution = solve_lp(&LoadProblem {
            total: Rat::from_int(k as i64),
            speeds: SpeedRealization::new(restricted),
            caps: vec![Rat::one(); n],
        })
        .map_err(|source| CyclicError::Load { block, source })?;
        mu.push(solution.theta);
    }

    Ok(Scheme { gamma, mu })
}

/// Total stored mass of the cyclic placement: `N * Q/N = Q`.
pub fn cyclic_storage_size(_params: &SystemParams, q: usize) -> Rat {
    Rat::from_int(q as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load::computation_time;
    use crate::rational::{sum, Rat};

    fn r(p: i64, q: i64) -> Rat {
        Rat::new(p, q)
    }

    #[test]
    fn one_based_wrap() {
        assert_eq!(wrap_one_based(1, 12), 1);
        assert_eq!(wrap_one_based(12, 12), 12);
        assert_eq!(wrap_one_based(13, 12), 1);
        // periodic over a full turn
        for a in 1..=12 {
            assert_eq!(wrap_one_based(a + 12, 12), wrap_one_based(a, 12));
        }
    }

    #[test]
    fn stored_blocks_wrap_around() {
        // last machine of six, Q = 3: blocks 6, 1, 2 (1-based)
        assert_eq!(stored_blocks(5, 3, 6), vec![0, 1, 5]);
        assert_eq!(stored_blocks(0, 2, 6), vec![0, 1]);
    }

    #[test]
    fn full_storage_uniform_water_fill() {
        // Q = N: every block sees all machines, so every row is the same
        // water-fill and c = (L+S)/sum(s)
        let params = SystemParams::with_full_storage(12, 2, 1);
        let speeds = SpeedRealization::from_ints(&[1, 1, 2, 2, 2, 3, 8, 8, 8, 8, 9, 9]);
        let scheme = build_cyclic(&params, 12, &speeds).unwrap();
        let theta = scheme.load_vector();
        let c = computation_time(&theta, &speeds).unwrap();
        assert_eq!(c, r(3, 61));
        for row in &scheme.mu {
            assert_eq!(sum(row), Rat::from_int(3));
        }
    }

    #[test]
    fn uniform_speeds_uniform_rows() {
        let params = SystemParams::with_full_storage(6, 2, 1);
        let speeds = SpeedRealization::from_ints(&[2, 2, 2, 2, 2, 2]);
        let scheme = build_cyclic(&params, 6, &speeds).unwrap();
        for row in &scheme.mu {
            for entry in row {
                assert_eq!(entry, &r(1, 2)); // (L+S)/N
            }
        }
    }

    #[test]
    fn partial_storage_support_is_storers() {
        let params = SystemParams::with_full_storage(6, 2, 1);
        let speeds = SpeedRealization::from_ints(&[3, 3, 4, 4, 5, 5]);
        let scheme = build_cyclic(&params, 4, &speeds).unwrap();
        for (block, row) in scheme.mu.iter().enumerate() {
            for (machine, entry) in row.iter().enumerate() {
                if entry.is_positive() {
                    assert!(stored_blocks(machine, 4, 6).contains(&block));
                }
            }
            assert_eq!(sum(row), Rat::from_int(3));
        }
    }

    #[test]
    fn rejects_bad_q_and_dead_storers() {
        let params = SystemParams::with_full_storage(6, 2, 1);
        let speeds = SpeedRealization::from_ints(&[3, 3, 4, 4, 5, 5]);
        assert!(matches!(
            build_cyclic(&params, 2, &speeds),
            Err(CyclicError::BadBlockCount { .. })
        ));
        // Q = L+S with a dead machine starves some block
        let dead = SpeedRealization::from_ints(&[3, 0, 4, 4, 5, 5]);
        assert!(matches!(
            build_cyclic(&params, 3, &dead),
            Err(CyclicError::TooFewStorers { .. })
        ));
    }

    #[test]
    fn storage_size_is_q() {
        let params = SystemParams::with_full_storage(12, 2, 1);
        assert_eq!(cyclic_storage_size(&params, 6), Rat::from_int(6));
        assert_eq!(cyclic_storage_size(&params, 12), Rat::from_int(12));
        assert_eq!(cyclic_storage_size(&params, 0), Rat::zero());
    }
}
