//! Oracle implementations and reusable cross-check suites shared by the
//! property and acceptance tests. Everything here is written independently
//! of the library's solvers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use usctec::coded::{no_stragglers, plan_from_scheme, run_round, EvaluationPoints};
use usctec::division::{check_feasible, divide, DivisionProblem};
use usctec::field::{Matrix, PrimeField};
use usctec::load::{solve_lp, LoadProblem};
use usctec::model::{SpeedRealization, SystemParams};
use usctec::rational::{sum, Rat};

pub fn r(p: i64, q: i64) -> Rat {
    Rat::new(p, q)
}

/// Solves the capped min-max load problem by scanning the breakpoints of the
/// piecewise-linear total-load function `f(c) = sum min(c * s[n], sigma[n])`,
/// entirely independent of the iterative water-filling in the library.
pub fn oracle_lp(total: &Rat, speeds: &[Rat], caps: &[Rat]) -> Option<Vec<Rat>> {
    let avail: Vec<usize> = (0..speeds.len())
        .filter(|&i| speeds[i].is_positive())
        .collect();
    if avail.is_empty() {
        return None;
    }
    let capacity: Rat = avail.iter().map(|&i| &caps[i]).sum();
    if total > &capacity {
        return None;
    }
    // machines sorted by breakpoint cap/speed: below its breakpoint a machine
    // rises linearly, above it the cap binds
    let mut order: Vec<usize> = avail.clone();
    order.sort_by(|&a, &b| (&caps[a] / &speeds[a]).cmp(&(&caps[b] / &speeds[b])));

    let build = |c: &Rat| -> Vec<Rat> {
        (0..speeds.len())
            .map(|i| {
                if speeds[i].is_positive() {
                    (c * &speeds[i]).min(caps[i].clone())
                } else {
                    Rat::zero()
                }
            })
            .collect()
    };

    for t in 0..=order.len() {
        let clamped: Rat = order[..t].iter().map(|&i| &caps[i]).sum();
        if t == order.len() {
            // everything at its cap; only exact saturation qualifies
            if total == &clamped {
                let c = &caps[order[t - 1]] / &speeds[order[t - 1]];
                return Some(build(&c));
            }
            continue;
        }
        let pool_speed: Rat = order[t..].iter().map(|&i| &speeds[i]).sum();
        let c = (total - &clamped) / &pool_speed;
        let lower_ok = t == 0 || c >= &caps[order[t - 1]] / &speeds[order[t - 1]];
        let upper_ok = c <= &caps[order[t]] / &speeds[order[t]];
        if !c.is_negative() && lower_ok && upper_ok {
            return Some(build(&c));
        }
    }
    unreachable!("feasible instance must hit some segment");
}

/// Runs `trials` random instances against the breakpoint oracle; returns the
/// number of feasible ones.
pub fn lp_oracle_suite(seed: u64, trials: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut feasible = 0usize;
    for _ in 0..trials {
        let n = rng.gen_range(1..=8);
        let speeds: Vec<Rat> = (0..n)
            .map(|_| r(rng.gen_range(0..=9), rng.gen_range(1..=3)))
            .collect();
        let caps: Vec<Rat> = (0..n).map(|_| r(rng.gen_range(0..=4), 4)).collect();
        let capacity: Rat = (0..n)
            .filter(|&i| speeds[i].is_positive())
            .map(|i| &caps[i])
            .sum();
        let total = &capacity * &r(rng.gen_range(0..=10), 8);
        let problem = LoadProblem {
            total: total.clone(),
            speeds: SpeedRealization::new(speeds.clone()),
            caps: caps.clone(),
        };
        match (solve_lp(&problem), oracle_lp(&total, &speeds, &caps)) {
            (Ok(solution), Some(theta)) => {
                if solution.theta != theta {
                    return Err(format!(
                        "solver/oracle disagree: speeds {speeds:?} caps {caps:?} total {total}"
                    ));
                }
                if sum(&solution.theta) != total {
                    return Err(format!("loads do not sum to {total}"));
                }
                for i in 0..n {
                    let want = if speeds[i].is_positive() {
                        (&solution.c * &speeds[i]).min(caps[i].clone())
                    } else {
                        Rat::zero()
                    };
                    if solution.theta[i] != want {
                        return Err(format!("machine {i} is neither at level nor at cap"));
                    }
                }
                feasible += 1;
            }
            (Err(_), None) => {}
            (lib, oracle) => {
                return Err(format!(
                    "feasibility disagreement: lib {lib:?} oracle {oracle:?} on speeds {speeds:?} caps {caps:?} total {total}"
                ))
            }
        }
    }
    Ok(feasible)
}

pub fn random_subset<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        all.swap(i, j);
    }
    let mut sub: Vec<usize> = all[..k].to_vec();
    sub.sort_unstable();
    sub
}

/// Random feasible loads (feasible by construction: each is itself a binary
/// combination) must be reconstructed exactly, with weight-k rows and at
/// most one block per machine.
pub fn division_reconstruction_suite(seed: u64, trials: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let n = rng.gen_range(2..=8);
        let k = rng.gen_range(1..=n);
        let rho = r(rng.gen_range(1..=8), 8);
        let groups = rng.gen_range(1..=n + 2);
        let parts: Vec<Rat> = (0..groups).map(|_| r(rng.gen_range(1..=9), 1)).collect();
        let scale = &rho / &sum(&parts);
        let mut theta = vec![Rat::zero(); n];
        for part in &parts {
            let mass = part * &scale;
            for i in random_subset(n, k, &mut rng) {
                theta[i] += &mass;
            }
        }
        if !check_feasible(&theta, k) {
            return Err(format!("constructed theta {theta:?} flagged infeasible"));
        }
        let problem = DivisionProblem {
            theta: theta.clone(),
            rho: rho.clone(),
            replication: k,
        };
        let result = divide(&problem).map_err(|e| format!("{e} on theta {theta:?} k {k}"))?;
        if result.load_vector() != theta {
            return Err(format!("reconstruction mismatch on theta {theta:?}"));
        }
        if sum(&result.gamma) != rho || !result.gamma.iter().all(Rat::is_positive) {
            return Err(format!("bad gamma {:?}", result.gamma));
        }
        if !result.supports.iter().all(|s| s.len() == k) {
            return Err(format!("row weight != {k}"));
        }
        if result.gamma.len() > n {
            return Err(format!("{} blocks for {n} machines", result.gamma.len()));
        }
    }
    Ok(())
}

/// Gauss-Jordan: solves `m x = rhs` exactly if the columns of `m` are
/// linearly independent and the system is consistent.
fn solve_unique(m: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let rows = m.len();
    let cols = m[0].len();
    let mut a: Vec<Vec<Rat>> = (0..rows)
        .map(|i| {
            let mut row: Vec<Rat> = m[i].clone();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut pivot_of_col = Vec::with_capacity(cols);
    let mut next_row = 0;
    for c in 0..cols {
        let pivot = (next_row..rows).find(|&i| !a[i][c].is_zero())?;
        a.swap(next_row, pivot);
        let inv = Rat::one() / a[next_row][c].clone();
        for v in &mut a[next_row] {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != next_row && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                for j in 0..=cols {
                    let delta = &factor * &a[next_row][j];
                    a[i][j] -= &delta;
                }
            }
        }
        pivot_of_col.push(next_row);
        next_row += 1;
    }
    if (next_row..rows).any(|i| !a[i][cols].is_zero()) {
        return None;
    }
    Some(pivot_of_col.iter().map(|&i| a[i][cols].clone()).collect())
}

/// Decides by brute force whether `theta` is a nonnegative combination of
/// binary weight-`k` columns: a feasible point exists iff some vertex does,
/// and vertex supports are linearly independent column sets.
pub fn brute_force_feasible(theta: &[Rat], k: usize) -> bool {
    let n = theta.len();
    let columns: Vec<Vec<Rat>> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| {
            (0..n)
                .map(|i| {
                    if m >> i & 1 == 1 {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    let ncols = columns.len();
    for mask in 1u32..1 << ncols {
        if mask.count_ones() as usize > n {
            continue;
        }
        let chosen: Vec<usize> = (0..ncols).filter(|&j| mask >> j & 1 == 1).collect();
        let sub: Vec<Vec<Rat>> = (0..n)
            .map(|i| chosen.iter().map(|&j| columns[j][i].clone()).collect())
            .collect();
        if let Some(gamma) = solve_unique(&sub, theta) {
            if gamma.iter().all(|g| !g.is_negative()) {
                return true;
            }
        }
    }
    false
}

fn sorted_tuples(n: usize, max: i64) -> Vec<Vec<i64>> {
    // nondecreasing tuples; feasibility is permutation-invariant
    let mut out = Vec::new();
    let mut cur = vec![0i64; n];
    fn rec(i: usize, lo: i64, max: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in lo..=max {
            cur[i] = v;
            rec(i + 1, v, max, cur, out);
        }
    }
    rec(0, 0, max, &mut cur, &mut out);
    out
}

/// Exhaustive iff-check of the existence bound `theta[n] <= sum(theta)/k`
/// against the vertex search, over every multiset of loads with the given
/// denominators, plus exact reconstruction whenever feasible.
pub fn feasibility_bound_suite(max_machines: usize, denominators: &[i64]) -> Result<usize, String> {
    let mut checked = 0usize;
    for n in 2..=max_machines {
        for &d in denominators {
            for tuple in sorted_tuples(n, d) {
                let total: i64 = tuple.iter().sum();
                if total == 0 {
                    continue;
                }
                for k in 1..=n {
                    // rho = sum(theta)/k must stay within (0, 1]
                    if total > k as i64 * d {
                        continue;
                    }
                    let theta: Vec<Rat> = tuple.iter().map(|&a| r(a, d)).collect();
                    let rho = r(total, k as i64 * d);
                    let bound = check_feasible(&theta, k);
                    let brute = brute_force_feasible(&theta, k);
                    if bound != brute {
                        return Err(format!(
                            "bound {bound} vs brute force {brute} on theta {theta:?} k {k}"
                        ));
                    }
                    if bound {
                        let result = divide(&DivisionProblem {
                            theta: theta.clone(),
                            rho,
                            replication: k,
                        })
                        .map_err(|e| format!("{e} on feasible theta {theta:?} k {k}"))?;
                        if result.load_vector() != theta {
                            return Err(format!("reconstruction mismatch on {theta:?} k {k}"));
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

/// Exhaustively verifies that the decoded product is invariant under every
/// straggler subset of size <= S in every piece (others on time), plus a
/// simultaneous worst case. Returns the number of masks exercised.
pub fn decode_invariance_suite() -> Result<usize, String> {
    let field = PrimeField::mersenne31();
    let params = SystemParams::with_full_storage(6, 2, 1);
    let speeds = SpeedRealization::from_ints(&[3, 3, 4, 4, 5, 5]);
    let solution = solve_lp(&LoadProblem {
        total: Rat::from_int(3),
        speeds: speeds.clone(),
        caps: vec![Rat::one(); 6],
    })
    .map_err(|e| e.to_string())?;
    let scheme = divide(&DivisionProblem {
        theta: solution.theta,
        rho: Rat::one(),
        replication: 3,
    })
    .map_err(|e| e.to_string())?
    .into_scheme();

    let (l, k, q, rr) = (2, 3, 8, 4);
    let plan = plan_from_scheme(&scheme, q, rr, l, k).map_err(|e| e.to_string())?;
    let points =
        EvaluationPoints::standard(&field, l, params.machines).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = Matrix::random(&field, q, 3, &mut rng);
    let b = Matrix::random(&field, 3, rr, &mut rng);
    let expected = a.mul(&field, &b);

    let mut cases = 0usize;
    for g in 0..plan.pieces.len() {
        for f in 0..plan.pieces[g].len() {
            let machines = &plan.pieces[g][f].machines;
            for mask in 0u32..1 << machines.len() {
                if mask.count_ones() as usize > params.stragglers {
                    continue;
                }
                let mut stragglers = no_stragglers(&plan);
                stragglers[g][f] = (0..machines.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| machines[i])
                    .collect();
                let product = run_round(&field, &a, &b, &plan, &points, &stragglers)
                    .map_err(|e| format!("group {g} piece {f} mask {mask:b}: {e}"))?;
                if product != expected {
                    return Err(format!("mismatch at group {g} piece {f} mask {mask:b}"));
                }
                cases += 1;
            }
        }
    }

    // worst case: one straggler in every piece simultaneously
    let mut worst = no_stragglers(&plan);
    for (g, pieces) in plan.pieces.iter().enumerate() {
        for (f, piece) in pieces.iter().enumerate() {
            worst[g][f] = vec![piece.machines[g % piece.machines.len()]];
        }
    }
    let product = run_round(&field, &a, &b, &plan, &points, &worst).map_err(|e| e.to_string())?;
    if product != expected {
        return Err("mismatch with one straggler in every piece".into());
    }
    Ok(cases + 1)
}
