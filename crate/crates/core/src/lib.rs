//! Exact algebra of Z-states (symmetric Dicke states) and the 2k-local
//! distillation protocol built on it.
//!
//! * [`combinatorics`]: big-integer binomials and rationals.
//! * [`zstate`]: symbolic block sums with split/merge (composition),
//!   tensor, inner products and bit-flip.
//! * [`dense`]: brute-force exact state vectors, used as an oracle.
//! * [`distillation`]: the projection target and one distillation step.
//! * [`protocol`]: multi-cycle plans, validation, execution and the
//!   exact, incremental and exponential schedule generators.
//! * [`document`], [`graph`]: JSON plan/report formats and DOT export.
//! * [`verify`], [`golden`]: oracle sweeps and the worked-example corpus.

pub mod combinatorics;
pub mod dense;
pub mod distillation;
pub mod document;
pub mod golden;
pub mod graph;
pub mod protocol;
pub mod verify;
pub mod zstate;

pub use combinatorics::{binom, vandermonde_holds, BigNat, Rational};
pub use dense::{dense_z, to_dense, DenseOracle, DenseState, Projection, DENSE_CAP};
pub use distillation::{
    distill_step, success_probability, x0_state, DistillError, DistillOutcome, Selection, X0Spec,
};
pub use document::{Mode, PlanDocument};
pub use protocol::{
    execute_plan, gen_exact_plan, gen_exponential_plan, gen_incremental_plan, validate_plan, Cycle,
    ExecuteOptions, ExecutionReport, Origin, ProtocolPlan, ResourceLedger, StateRef, Target, Violation,
};
pub use zstate::{AlgebraError, BlockProduct, BlockSum, Merge, RegisterId, ZBlock};
