//! Built-in reference systems used by the CLI reproduction mode, the
//! acceptance suite, and the benchmarks.

use crate::model::{SpeedDistribution, SpeedRealization, SystemParams, WeightedRealization};
use crate::rational::Rat;

/// Six machines, full storage, one speed realization `(3,3,4,4,5,5)`,
/// `L = 2`, `S = 1`.
pub fn example1() -> (SystemParams, SpeedDistribution) {
    (
        SystemParams::with_full_storage(6, 2, 1),
        SpeedDistribution::uniform(vec![SpeedRealization::from_ints(&[3, 3, 4, 4, 5, 5])]),
    )
}

/// Six machines with storage caps `(3/5, 3/5, 4/5, 4/5, 1, 1)` and two
/// equally likely speed realizations; the placement loop overflows once.
pub fn example2() -> (SystemParams, SpeedDistribution) {
    let params = SystemParams {
        machines: 6,
        recovery_threshold: 2,
        stragglers: 1,
        storage_caps: vec![
            Rat::new(3, 5),
            Rat::new(3, 5),
            Rat::new(4, 5),
            Rat::new(4, 5),
            Rat::one(),
            Rat::one(),
        ],
    };
    let dist = SpeedDistribution::uniform(vec![
        SpeedRealization::from_ints(&[3, 3, 4, 4, 5, 5]),
        SpeedRealization::from_ints(&[3, 1, 2, 2, 3, 5]),
    ]);
    (params, dist)
}

/// Twelve machines, `L = 2`, `S = 1`, two equally likely realizations; the
/// storage caps are swept as `e = (Q/12, ..., Q/12)` by the comparison
/// harness. Returned with full storage.
pub fn table1() -> (SystemParams, SpeedDistribution) {
    let params = SystemParams::with_full_storage(12, 2, 1);
    let dist = SpeedDistribution {
        realizations: vec![
            WeightedRealization {
                realization: SpeedRealization::from_ints(&[1, 1, 2, 2, 2, 3, 8, 8, 8, 8, 9, 9]),
                probability: Rat::new(1, 2),
            },
            WeightedRealization {
                realization: SpeedRealization::from_ints(&[8, 8, 2, 3, 9, 9, 2, 1, 8, 5, 2, 8]),
                probability: Rat::new(1, 2),
            },
        ],
    };
    (params, dist)
}
