//! Compiles pure-past temporal logic with counting and modular predicates
//! into state space models, runs them under exact, fixed-point and
//! log-precision arithmetic, and checks them against the logic's semantics.

pub mod compiler;
pub mod corpus;
pub mod error;
pub mod formula;
pub mod numeric;
pub mod semantics;
pub mod ssm;
pub mod verify;

pub use compiler::{compile, compile_over};
pub use error::{CompileError, EvalError, ModelError, NumericError, ParseError, RewriteError, VerifyError};
pub use formula::{parse, Comparator, Formula};
pub use numeric::{FixedFormat, Numeric, NumericMode, Rational};
pub use semantics::{eval, eval_at, Alphabet, Evaluator, Letter, Monitor, Trace};
pub use ssm::{accepts, run, GatePolicy, RunTrace, Ssm};
pub use verify::{check_equivalence, monotonicity_experiment, EquivalenceReport, StabilizationReport};
