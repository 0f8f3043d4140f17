//! Elastic matrix multiplication with uncoded storage and coded
//! transmission.
//!
//! The crate schedules a distributed multiplication `A * B` across `N`
//! machines whose speeds change between rounds and whose storage for `A` is
//! capped. Rows of `A` are stored uncoded; only the column blocks of `B`
//! shipped per round are Lagrange-coded, so any `L` of the `L + S` machines
//! assigned to a column group suffice to decode it.
//!
//! Modules, bottom up:
//! - [`rational`]: exact arbitrary-precision rationals used everywhere.
//! - [`interval`]: half-open interval sets on the unit segment of `A`-rows.
//! - [`model`]: system parameters, speed distributions, schemes, validation.
//! - [`load`]: exact water-filling solver for the min-max load problem.
//! - [`division`]: splits a load vector into binary rows of weight `L + S`.
//! - [`placement`]: storage placement with overflow truncation across a
//!   speed distribution.
//! - [`cyclic`]: the cyclic-storage baseline.
//! - [`field`], [`coded`]: prime-field matrices and the Lagrange-coded
//!   round itself.
//! - [`simulator`]: end-to-end evaluation, verification, and comparison.
//!
//! Machines, realizations, and blocks are 0-based throughout.

pub mod coded;
pub mod cyclic;
pub mod demo;
pub mod division;
pub mod field;
pub mod interval;
pub mod load;
pub mod model;
pub mod placement;
pub mod rational;
pub mod simulator;

pub use coded::{EvaluationPoints, RoundPlan, StragglerMask};
pub use division::{divide, ComputationAssignment, DivisionProblem, DivisionResult};
pub use field::{Matrix, PrimeField, MERSENNE31};
pub use interval::{Interval, IntervalSet};
pub use load::{solve_lp, LoadProblem, LoadSolution};
pub use model::{
    validate, Scheme, SpeedDistribution, SpeedRealization, SystemParams, WeightedRealization,
};
pub use placement::{place, PlacementResult};
pub use rational::Rat;
pub use simulator::{evaluate_system, verify_round, Strategy, SystemReport, VerifyReport};
