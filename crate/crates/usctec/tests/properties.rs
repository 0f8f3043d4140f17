//! Randomized and exhaustive cross-checks of the solvers against
//! independently implemented oracles, plus generic invariants.

mod common;

use common::r;
use proptest::prelude::*;

use usctec::division::{build_assignment, check_feasible, divide, DivisionProblem};
use usctec::interval::IntervalSet;
use usctec::load::{solve_lp, LoadProblem};
use usctec::model::SpeedRealization;
use usctec::rational::{sum, Rat};

#[test]
fn water_filling_matches_breakpoint_oracle() {
    let feasible = common::lp_oracle_suite(7, 1000).unwrap();
    assert!(feasible > 500, "only {feasible} feasible instances sampled");
}

#[test]
fn division_reconstructs_random_feasible_loads() {
    common::division_reconstruction_suite(11, 1000).unwrap();
}

#[test]
fn feasibility_bound_matches_vertex_search_small() {
    // the full sweep runs in the acceptance suite; keep a quick slice here
    let checked = common::feasibility_bound_suite(4, &[4, 6]).unwrap();
    assert!(checked > 1000);
}

#[test]
fn decode_invariant_under_all_straggler_subsets() {
    let cases = common::decode_invariance_suite().unwrap();
    assert!(cases > 10);
}

#[test]
fn feasibility_bound_scales_with_rho() {
    // shrinking both theta and rho by the same factor preserves everything
    let theta: Vec<Rat> = vec![r(1, 4), r(1, 2), r(3, 4), r(1, 2)];
    assert!(check_feasible(&theta, 2));
    let result = divide(&DivisionProblem {
        theta: theta.clone(),
        rho: Rat::one(),
        replication: 2,
    })
    .unwrap();
    let scaled: Vec<Rat> = theta.iter().map(|t| t * &r(1, 3)).collect();
    let result_scaled = divide(&DivisionProblem {
        theta: scaled,
        rho: r(1, 3),
        replication: 2,
    })
    .unwrap();
    assert_eq!(result.supports, result_scaled.supports);
}

// ---------------------------------------------------------------------------
// proptest invariants
// ---------------------------------------------------------------------------

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-1000i64..1000, 1i64..1000).prop_map(|(p, q)| Rat::new(p, q))
}

fn arb_unit_set() -> impl Strategy<Value = IntervalSet> {
    prop::collection::vec((0i64..64, 1i64..16), 0..6).prop_map(|pairs| {
        let mut set = IntervalSet::empty();
        for (a, len) in pairs {
            set.insert(r(a, 64), r(a + len, 64));
        }
        set
    })
}

proptest! {
    #[test]
    fn rat_display_parse_round_trip(x in arb_rat()) {
        let shown = x.to_string();
        prop_assert_eq!(shown.parse::<Rat>().unwrap(), x);
    }

    #[test]
    fn rat_serde_round_trip(x in arb_rat()) {
        let json = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rat>(&json).unwrap(), x);
    }

    #[test]
    fn interval_union_laws(a in arb_unit_set(), b in arb_unit_set(), c in arb_unit_set()) {
        prop_assert_eq!(a.union(&b), b.union(&a));
        prop_assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
        prop_assert_eq!(a.union(&a), a.clone());
        prop_assert!(a.is_subset_of(&a.union(&b)));
        // measure is monotone and subadditive
        prop_assert!(a.union(&b).measure() >= a.measure());
        prop_assert!(a.union(&b).measure() <= a.measure() + b.measure());
    }

    #[test]
    fn interval_measure_below_is_monotone(a in arb_unit_set(), y1 in 0i64..80, y2 in 0i64..80) {
        let (lo, hi) = (y1.min(y2), y1.max(y2));
        prop_assert!(a.measure_below(&r(lo, 64)) <= a.measure_below(&r(hi, 64)));
    }

    #[test]
    fn lp_objective_monotone_in_total(
        speeds in prop::collection::vec(1i64..10, 2..6),
        caps in prop::collection::vec(1i64..=4, 2..6),
        u1 in 0i64..=8,
        u2 in 0i64..=8,
    ) {
        let n = speeds.len().min(caps.len());
        let speeds: Vec<Rat> = speeds[..n].iter().map(|&s| Rat::from_int(s)).collect();
        let caps: Vec<Rat> = caps[..n].iter().map(|&c| r(c, 4)).collect();
        let capacity = sum(&caps);
        let solve = |u: i64| solve_lp(&LoadProblem {
            total: &capacity * &r(u, 8),
            speeds: SpeedRealization::new(speeds.clone()),
            caps: caps.clone(),
        }).unwrap();
        let (lo, hi) = (u1.min(u2), u1.max(u2));
        prop_assert!(solve(lo).c <= solve(hi).c);
    }

    #[test]
    fn assignment_masses_match_row(
        row in prop::collection::vec(0i64..=4, 3..7),
        k in 1usize..=3,
    ) {
        // water-fill a feasible theta out of the raw row, then assign
        let n = row.len();
        let speeds: Vec<Rat> = row.iter().map(|&v| Rat::from_int(v)).collect();
        prop_assume!(speeds.iter().filter(|s| s.is_positive()).count() >= k);
        let solution = solve_lp(&LoadProblem {
            total: Rat::from_int(k as i64),
            speeds: SpeedRealization::new(speeds.clone()),
            caps: vec![Rat::one(); n],
        }).unwrap();
        let assignment = build_assignment(&solution.theta, k).unwrap();
        prop_assert_eq!(assignment.total_mass(), Rat::one());
        for (i, load) in solution.theta.iter().enumerate() {
            prop_assert_eq!(&assignment.machine_mass(i), load);
        }
        for piece in &assignment.pieces {
            prop_assert_eq!(piece.machines.len(), k);
        }
    }
}
