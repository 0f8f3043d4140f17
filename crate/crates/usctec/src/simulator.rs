//! End-to-end harness: build schedules, execute coded rounds, verify
//! correctness against the direct product, and compare strategies.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coded::{
    no_stragglers, plan_from_scheme, run_round, CodedError, EvaluationPoints, RoundPlan,
    StragglerMask,
};
use crate::cyclic::{build_cyclic, cyclic_storage_size, CyclicError};
use crate::field::{FieldError, Matrix, PrimeField};
use crate::load::{computation_time, expected_time, LoadError};
use crate::model::{validate, Scheme, SpeedDistribution, SystemParams, ValidationIssue};
use crate::placement::{place, storage_size, PlacementError};
use crate::rational::Rat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "usctec")]
    Usctec,
    #[serde(rename = "cyclic")]
    Cyclic(usize),
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Usctec => f.write_str("usctec"),
            Strategy::Cyclic(q) => write!(f, "cyclic({q})"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimulatorError {
    #[error("invalid system: {}", format_issues(.0))]
    Invalid(Vec<ValidationIssue>),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Cyclic(#[from] CyclicError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Coded(#[from] CodedError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("realization {realization}: dimension {dim} = {value} exceeds the scaling bound {bound}")]
    ScalingOverflow {
        realization: usize,
        dim: &'static str,
        value: BigInt,
        bound: usize,
    },
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Per-strategy evaluation: exact per-realization times, expected time, and
/// storage size, with 5-decimal renderings alongside.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemReport {
    pub strategy: String,
    pub times: Vec<Rat>,
    pub expected_time: Rat,
    pub expected_time_5dp: String,
    pub storage_size: Rat,
    pub storage_size_5dp: String,
}

pub fn render_5dp(value: &Rat) -> String {
    format!("{:.5}", value.to_f64())
}

/// Builds the per-realization schemes for a strategy.
pub fn build_schemes(
    params: &SystemParams,
    dist: &SpeedDistribution,
    strategy: &Strategy,
) -> Result<Vec<Scheme>, SimulatorError> {
    match strategy {
        Strategy::Usctec => Ok(place(params, dist)?.schemes),
        Strategy::Cyclic(q) => dist
            .realizations
            .iter()
            .map(|w| build_cyclic(params, *q, &w.realization).map_err(Into::into))
            .collect(),
    }
}

/// Evaluates expected time and storage for one strategy on a validated
/// system.
pub fn evaluate_system(
    params: &SystemParams,
    dist: &SpeedDistribution,
    strategy: &Strategy,
) -> Result<SystemReport, SimulatorError> {
    validate(params, dist).map_err(SimulatorError::Invalid)?;
    let (times, storage) = match strategy {
        Strategy::Usctec => {
            let result = place(params, dist)?;
            let storage = storage_size(&result);
            (result.times, storage)
        }
        Strategy::Cyclic(q) => {
            let mut times = Vec::with_capacity(dist.len());
            for w in &dist.realizations {
                let scheme = build_cyclic(params, *q, &w.realization)?;
                times.push(computation_time(&scheme.load_vector(), &w.realization)?);
            }
            (times, cyclic_storage_size(params, *q))
        }
    };
    let expected = expected_time(&dist.probabilities(), &times);
    Ok(SystemReport {
        strategy: strategy.to_string(),
        expected_time_5dp: render_5dp(&expected),
        storage_size_5dp: render_5dp(&storage),
        times,
        expected_time: expected,
        storage_size: storage,
    })
}

/// One row of a strategy-comparison sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub q: usize,
    pub strategy: String,
    pub storage_size: Rat,
    pub expected_time: Rat,
    pub expected_time_5dp: String,
}

/// Sweeps storage caps `e = Q/N` over the given `Q` values and evaluates
/// both strategies at each point.
pub fn compare_strategies(
    base: &SystemParams,
    dist: &SpeedDistribution,
    qs: &[usize],
) -> Result<Vec<ComparisonRow>, SimulatorError> {
    let n = base.machines;
    let mut rows = Vec::new();
    for &q in qs {
        let caps = vec![Rat::new(q as i64, n as i64); n];
        let params = SystemParams {
            storage_caps: caps,
            ..base.clone()
        };
        for strategy in [Strategy::Cyclic(q), Strategy::Usctec] {
            let report = evaluate_system(&params, dist, &strategy)?;
            rows.push(ComparisonRow {
                q,
                strategy: strategy.to_string(),
                expected_time_5dp: report.expected_time_5dp,
                storage_size: report.storage_size,
                expected_time: report.expected_time,
            });
        }
    }
    Ok(rows)
}

/// Configuration for executable coded rounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundConfig {
    pub prime: u64,
    /// Inner dimension `v` of `A (q x v)` and `B (v x r)`.
    pub inner_dim: usize,
    pub seed: u64,
    /// Upper bound on the scaled `q` and `r` dimensions.
    pub dim_bound: usize,
    /// Stragglers sampled per group, capped at `S`.
    pub stragglers_per_group: usize,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            prime: crate::field::MERSENNE31,
            inner_dim: 4,
            seed: 0,
            dim_bound: 4096,
            stragglers_per_group: usize::MAX,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundReport {
    pub realization: usize,
    pub status: RoundStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RoundStatus {
    Pass { q: usize, r: usize },
    Skipped { reason: String },
    Fail { diagnostic: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub rounds: Vec<RoundReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.rounds
            .iter()
            .all(|r| !matches!(r.status, RoundStatus::Fail { .. }))
    }
}

/// Smallest `q` such that every `gamma[g] * q` is an integer.
pub fn row_scale(scheme: &Scheme) -> BigInt {
    let mut lcm = BigInt::one();
    for g in &scheme.gamma {
        lcm = lcm.lcm(g.denom());
    }
    lcm
}

/// Smallest `r/L` such that every group boundary realizes exactly, given the
/// per-row assignments implied by the scheme.
pub fn column_scale(
    scheme: &Scheme,
    replication: usize,
) -> Result<BigInt, SimulatorError> {
    let mut lcm = BigInt::one();
    for row in &scheme.mu {
        let assignment = crate::division::build_assignment(row, replication)
            .map_err(CodedError::Division)?;
        let total = assignment.total_mass();
        let mut cum = Rat::zero();
        for piece in &assignment.pieces {
            cum += &piece.mass;
            let boundary = &cum / &total;
            lcm = lcm.lcm(boundary.denom());
        }
    }
    Ok(lcm)
}

/// Builds schedules for the strategy, scales matrix dimensions so every
/// block realizes exactly, runs one coded round per realization with
/// seeded stragglers, and compares against the direct product.
pub fn verify_round(
    params: &SystemParams,
    dist: &SpeedDistribution,
    strategy: &Strategy,
    config: &RoundConfig,
) -> Result<VerifyReport, SimulatorError> {
    validate(params, dist).map_err(SimulatorError::Invalid)?;
    let field = PrimeField::new(config.prime)?;
    let schemes = build_schemes(params, dist, strategy)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rounds = Vec::with_capacity(schemes.len());

    for (i, scheme) in schemes.iter().enumerate() {
        match prepare_round(params, scheme, config, i) {
            Err(SimulatorError::ScalingOverflow {
                dim, value, bound, ..
            }) => {
                rounds.push(RoundReport {
                    realization: i,
                    status: RoundStatus::Skipped {
                        reason: format!("{dim} would need {value} > bound {bound}"),
                    },
                });
            }
            Err(err) => return Err(err),
            Ok((plan, q, r)) => {
                let points = EvaluationPoints::standard(&field, params.recovery_threshold, params.machines)?;
                let a = Matrix::random(&field, q, config.inner_dim, &mut rng);
                let b = Matrix::random(&field, config.inner_dim, r, &mut rng);
                let mask = sample_stragglers(
                    &plan,
                    params.stragglers.min(config.stragglers_per_group),
                    &mut rng,
                );
                let status = match run_round(&field, &a, &b, &plan, &points, &mask) {
                    Ok(product) => {
                        if product == a.mul(&field, &b) {
                            RoundStatus::Pass { q, r }
                        } else {
                            RoundStatus::Fail {
                                diagnostic: "decoded product differs from direct product".into(),
                            }
                        }
                    }
                    Err(err) => RoundStatus::Fail {
                        diagnostic: err.to_string(),
                    },
                };
                rounds.push(RoundReport {
                    realization: i,
                    status,
                });
            }
        }
    }
    Ok(VerifyReport {
        seed: config.seed,
        rounds,
    })
}

/// Realizes a scheme into a plan with the smallest exact dimensions.
pub fn prepare_round(
    params: &SystemParams,
    scheme: &Scheme,
    config: &RoundConfig,
    realization: usize,
) -> Result<(RoundPlan, usize, usize), SimulatorError> {
    let q_big = row_scale(scheme);
    let q: usize =
        (&q_big)
            .try_into()
            .ok()
            .filter(|&q: &usize| q <= config.dim_bound)
            .ok_or_else(|| SimulatorError::ScalingOverflow {
                realization,
                dim: "q",
                value: q_big.clone(),
                bound: config.dim_bound,
            })?;
    let cols_big = column_scale(scheme, params.replication())?;
    let l = params.recovery_threshold;
    let r_big = &cols_big * BigInt::from(l);
    let r: usize =
        (&r_big)
            .try_into()
            .ok()
            .filter(|&r: &usize| r <= config.dim_bound)
            .ok_or_else(|| SimulatorError::ScalingOverflow {
                realization,
                dim: "r",
                value: r_big.clone(),
                bound: config.dim_bound,
            })?;
    let plan = plan_from_scheme(scheme, q, r, l, params.replication())?;
    Ok((plan, q, r))
}

/// Uniformly samples up to `max_per_group` stragglers inside every group.
pub fn sample_stragglers<R: Rng>(
    plan: &RoundPlan,
    max_per_group: usize,
    rng: &mut R,
) -> StragglerMask {
    let mut mask = no_stragglers(plan);
    for (g, pieces) in plan.pieces.iter().enumerate() {
        for (f, piece) in pieces.iter().enumerate() {
            let count = rng.gen_range(0..=max_per_group.min(piece.machines.len()));
            let mut chosen = piece.machines.clone();
            chosen.shuffle(rng);
            chosen.truncate(count);
            mask[g][f] = chosen;
        }
    }
    mask
}
