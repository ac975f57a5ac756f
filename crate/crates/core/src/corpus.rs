//! Reference formulas grouped by the fragment they belong to.

use crate::formula::{parse, Formula};

/// Pure-past LTL without counting or `MOD`, over `a`, `b`, `c`.
pub const PLTL: &[&str] = &[
    "a S b",
    "P(a & Y a)",
    "Y Y a",
    "H(a -> !Y b)",
    "(a S b) S c",
    "a S (b S c)",
    "P a",
    "H a",
    "Y a",
    "!Y true",
    "a & Y b",
    "P(b & Y P a)",
    "H(a | b)",
    "Y(a S b)",
    "(a | b) S c",
    "H(a -> P b)",
    "a S (b & Y c)",
    "!(a S b) & P c",
    "Y a | Y Y b",
    "P(Y Y c)",
    "H(b -> Y a)",
    "(P a & P b) S c",
    "Y(Y a S b)",
    "c & H(Y c -> a)",
];

/// `{a^n b^n c^n}` over singleton letters.
pub const ANBNCN: &str = "H((a -> !P(b | c)) & (b -> !P c)) & (#[a] - #[b] = 0) & (#[c] - #[b] = 0)";

/// `{a^n b^n}` over singleton letters.
pub const ANBN: &str = "H(a -> !Y b) & #[a] - #[b] = 0";

/// Counting formulas (diagonal, log precision).
pub const COUNTING: &[&str] = &[
    ANBNCN,
    ANBN,
    "#[a] >= 3",
    "2*#[a] - #[b] < 1",
    "P(#[b] = 2) & H(c -> #[a] - #[b] > 0)",
];

/// Unary temporal operators with `MOD` (time-invariant).
pub const UNARY_MOD: &[&str] = &[
    "H a & MOD[0,2]",
    "MOD[1,3]",
    "P a & MOD[0,2]",
    "Y a | MOD[2,3]",
    "H(a -> MOD[0,2])",
    "P(b & MOD[1,2])",
    "Y MOD[0,2]",
    "MOD[0,2] & MOD[1,3]",
    "P(a & MOD[0,3]) & !b",
    "Y Y MOD[1,5]",
    "MOD[3,7] | a",
    "H(Y a -> MOD[1,2]) & P b",
];

/// Since mixed with `MOD` (mixed layers).
pub const MIXED: &[&str] = &[
    "(a S b) & MOD[0,2]",
    "a S (b & MOD[1,3])",
    "H(a S a) & MOD[0,2]",
    "(a | MOD[0,2]) S b",
    "P((a S b) & MOD[1,2])",
    "MOD[0,3] S a",
    "Y(a S b) | MOD[2,3]",
    "(a S b) S MOD[0,2]",
    "H(b -> MOD[1,2]) & (a S b)",
    "!(MOD[1,2] S a) & P b",
    "(a & MOD[0,2]) S (b & MOD[1,2])",
];

/// Yesterday-free unary counting formulas that lower to C-RASP.
pub const CRASP: &[&str] = &[
    "P a",
    "H a",
    "P(a & P b)",
    "H(a -> P b)",
    "#[a] - #[b] >= 0 & P b",
    "P(#[a] = 2)",
    "!P(a & !P b)",
];

pub fn parse_all(texts: &[&str]) -> Vec<Formula> {
    texts
        .iter()
        .map(|t| parse(t).unwrap_or_else(|e| panic!("corpus formula `{t}`: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpora_parse_and_fit_their_fragment() {
        for f in parse_all(PLTL) {
            assert!(!f.has_mod() && !f.has_count(), "{f}");
        }
        for f in parse_all(UNARY_MOD) {
            assert!(!f.has_since() && f.has_mod(), "{f}");
        }
        for f in parse_all(MIXED) {
            assert!(f.has_since() && f.has_mod(), "{f}");
        }
        for f in parse_all(CRASP) {
            assert!(!f.has_since() && !f.has_yesterday(), "{f}");
        }
        assert!(parse_all(COUNTING).iter().all(Formula::has_count));
        assert!(PLTL.len() >= 20 && UNARY_MOD.len() >= 10 && MIXED.len() >= 10);
    }
}
