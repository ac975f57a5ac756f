use thiserror::Error;

/// Errors produced while parsing formulas, traces and mode strings.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("MOD[{remainder},{modulus}] out of bounds: need modulus >= 2 and remainder < modulus")]
    ModBounds { remainder: u64, modulus: u64 },
    #[error("zero coefficient in counting term at byte {pos}")]
    ZeroCoefficient { pos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("lcm of moduli {lcm} exceeds the modulus cap {cap}")]
    ModulusCap { lcm: u64, cap: u64 },
    #[error("yesterday/since not expressible in C-RASP: {0}")]
    NotCrasp(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("MOD block requested but formula mixes moduli {0:?}; normalize first")]
    MixedModuli(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("position {pos} out of range 1..={len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("word budget exceeded: {words} words > {budget}")]
    BudgetExceeded { words: u128, budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("numeric mode mismatch: {0} vs {1}")]
    ModeMismatch(String, String),
    #[error("invalid fixed-point format I={int_bits}, F={frac_bits}: need I >= 1 and I + F <= 62")]
    BadFormat { int_bits: u32, frac_bits: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("empty trace: the model has no output on the empty word")]
    EmptyTrace,
    #[error("unknown proposition `{0}` in trace")]
    UnknownProposition(String),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("{policy} policy cannot compile `{subformula}`: {reason}")]
    Policy {
        policy: String,
        subformula: String,
        reason: String,
    },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("stabilization cap of {cap} steps exceeded without a fixed point")]
    CapExceeded { cap: u128 },
    #[error("monotonicity experiment needs {0}")]
    Precondition(String),
}
