//! Shared fixtures for the pipeline benchmarks.

use pastssm::corpus;
use pastssm::{compile_over, Formula, GatePolicy, NumericMode, Ssm, Trace};

/// Formulas benchmarked end to end, with the policy each compiles under.
pub fn fixtures() -> Vec<(&'static str, GatePolicy)> {
    vec![
        ("a S b", GatePolicy::Diagonal),
        ("(a S b) S c", GatePolicy::Diagonal),
        (corpus::ANBNCN, GatePolicy::Diagonal),
        ("H a & MOD[0,2]", GatePolicy::TimeInvariant),
        ("(a S b) & MOD[0,2]", GatePolicy::Mixed),
    ]
}

pub fn props() -> Vec<String> {
    ["a", "b", "c"].map(String::from).to_vec()
}

pub fn build(text: &str, policy: GatePolicy) -> (Formula, Ssm) {
    let f = pastssm::parse(text).expect("fixture parses");
    let ssm = compile_over(&f, policy, NumericMode::Exact, &props()).expect("fixture compiles");
    (f, ssm)
}

/// `a^n b^n c^n`.
pub fn abc(n: usize) -> Trace {
    Trace::repeat("a", n)
        .concat(&Trace::repeat("b", n))
        .concat(&Trace::repeat("c", n))
}
