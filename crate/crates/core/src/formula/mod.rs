//! Pure-past temporal formulas with counting terms and modular predicates.
//!
//! The core grammar is
//! `p | true | false | MOD[r,m] | !f | f & g | Y f | P f | f S g | Σ c·#[f] ⋈ k`.
//! Disjunction, implication and `H` are parser-level sugar and never appear in
//! a [`Formula`].

mod index;
mod parse;
mod rewrite;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

pub use index::{ModBlock, SubformulaIndex};
pub use parse::parse;
pub use rewrite::{lower_to_crasp, normalize_mod_lcm, normalize_mod_lcm_with_cap, DEFAULT_MODULUS_CAP};

/// Comparison operator of a counting atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    pub const ALL: [Comparator; 5] = [Self::Lt, Self::Le, Self::Eq, Self::Ge, Self::Gt];

    pub fn holds(self, lhs: i128, rhs: i128) -> bool {
        match self {
            Self::Lt => lhs < rhs,
            Self::Le => lhs <= rhs,
            Self::Eq => lhs == rhs,
            Self::Ge => lhs >= rhs,
            Self::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Lt => "<",
            Self::Le => "<=",
            Self::Eq => "=",
            Self::Ge => ">=",
            Self::Gt => ">",
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountTerm {
    pub coeff: i64,
    pub formula: Formula,
}

/// `Σ coeff_j · #φ_j  cmp  threshold`, where `#φ` counts the positions up to
/// and including the current one at which `φ` holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountAtom {
    pub terms: Vec<CountTerm>,
    pub cmp: Comparator,
    pub threshold: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    True,
    False,
    /// Holds at position `i` iff `i ≡ remainder (mod modulus)`.
    Mod {
        remainder: u64,
        modulus: u64,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Yesterday(Box<Formula>),
    Previously(Box<Formula>),
    Since(Box<Formula>, Box<Formula>),
    Count(CountAtom),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Self::Atom(name.into())
    }

    pub fn modulo(remainder: u64, modulus: u64) -> Self {
        Self::Mod { remainder, modulus }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Self::Not(Box::new(f))
    }

    pub fn and(f: Formula, g: Formula) -> Self {
        Self::And(Box::new(f), Box::new(g))
    }

    /// `f ∨ g` as `¬(¬f ∧ ¬g)`.
    pub fn or(f: Formula, g: Formula) -> Self {
        Self::not(Self::and(Self::not(f), Self::not(g)))
    }

    /// `f → g` as `¬(f ∧ ¬g)`.
    pub fn implies(f: Formula, g: Formula) -> Self {
        Self::not(Self::and(f, Self::not(g)))
    }

    pub fn yesterday(f: Formula) -> Self {
        Self::Yesterday(Box::new(f))
    }

    pub fn previously(f: Formula) -> Self {
        Self::Previously(Box::new(f))
    }

    /// `H f` as `¬P¬f`.
    pub fn historically(f: Formula) -> Self {
        Self::not(Self::previously(Self::not(f)))
    }

    pub fn since(f: Formula, g: Formula) -> Self {
        Self::Since(Box::new(f), Box::new(g))
    }

    pub fn count(terms: Vec<(i64, Formula)>, cmp: Comparator, threshold: u64) -> Self {
        Self::Count(CountAtom {
            terms: terms
                .into_iter()
                .map(|(coeff, formula)| CountTerm { coeff, formula })
                .collect(),
            cmp,
            threshold,
        })
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Self::Atom(_) | Self::True | Self::False | Self::Mod { .. } => Vec::new(),
            Self::Not(f) | Self::Yesterday(f) | Self::Previously(f) => vec![f],
            Self::And(f, g) | Self::Since(f, g) => vec![f, g],
            Self::Count(c) => c.terms.iter().map(|t| &t.formula).collect(),
        }
    }

    pub fn nesting_depth(&self) -> usize {
        match self {
            Self::Atom(_) | Self::True | Self::False | Self::Mod { .. } => 0,
            _ => {
                1 + self
                    .children()
                    .into_iter()
                    .map(Formula::nesting_depth)
                    .max()
                    .unwrap_or(0)
            }
        }
    }

    /// Distinct subformulas, children before parents, in order of first
    /// occurrence. The formula itself comes last.
    pub fn subformulas(&self) -> Vec<&Formula> {
        fn walk<'a>(f: &'a Formula, seen: &mut HashSet<&'a Formula>, out: &mut Vec<&'a Formula>) {
            if seen.contains(f) {
                return;
            }
            for c in f.children() {
                walk(c, seen, out);
            }
            seen.insert(f);
            out.push(f);
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        walk(self, &mut seen, &mut out);
        out
    }

    /// Partition of the distinct subformulas by nesting depth: entry `i`
    /// holds every subformula of depth `i`.
    pub fn sequential_decomposition(&self) -> Vec<Vec<&Formula>> {
        let mut sets = vec![Vec::new(); self.nesting_depth() + 1];
        for sub in self.subformulas() {
            sets[sub.nesting_depth()].push(sub);
        }
        sets
    }

    /// Proposition names occurring in the formula.
    pub fn propositions(&self) -> BTreeSet<String> {
        self.subformulas()
            .into_iter()
            .filter_map(|f| match f {
                Self::Atom(p) => Some(p.clone()),
                _ => None,
            })
            .collect()
    }

    /// Distinct moduli of all `MOD` atoms.
    pub fn moduli(&self) -> BTreeSet<u64> {
        self.subformulas()
            .into_iter()
            .filter_map(|f| match f {
                Self::Mod { modulus, .. } => Some(*modulus),
                _ => None,
            })
            .collect()
    }

    pub fn any_sub(&self, pred: impl Fn(&Formula) -> bool) -> bool {
        self.subformulas().into_iter().any(pred)
    }

    pub fn has_since(&self) -> bool {
        self.any_sub(|f| matches!(f, Self::Since(..)))
    }

    pub fn has_yesterday(&self) -> bool {
        self.any_sub(|f| matches!(f, Self::Yesterday(_)))
    }

    pub fn has_mod(&self) -> bool {
        self.any_sub(|f| matches!(f, Self::Mod { .. }))
    }

    pub fn has_count(&self) -> bool {
        self.any_sub(|f| matches!(f, Self::Count(_)))
    }

    pub fn has_negative_count(&self) -> bool {
        self.any_sub(|f| matches!(f, Self::Count(c) if c.terms.iter().any(|t| t.coeff < 0)))
    }

    /// Sum of absolute coefficients over all counting atoms.
    pub fn count_weight(&self) -> u128 {
        self.subformulas()
            .into_iter()
            .filter_map(|f| match f {
                Self::Count(c) => Some(c.terms.iter().map(|t| t.coeff.unsigned_abs() as u128).sum::<u128>()),
                _ => None,
            })
            .sum()
    }

    /// The sugared reading used for printing.
    fn view(&self) -> View<'_> {
        let Self::Not(inner) = self else {
            return View::Core;
        };
        match inner.as_ref() {
            Self::Previously(g) => match g.as_ref() {
                Self::Not(h) => View::Historically(h),
                _ => View::Core,
            },
            Self::And(g, h) => match (g.as_ref(), h.as_ref()) {
                (Self::Not(g), Self::Not(h)) => View::Or(g, h),
                (g, Self::Not(h)) => View::Implies(g, h),
                _ => View::Core,
            },
            _ => View::Core,
        }
    }

    fn is_primary(&self) -> bool {
        match self.view() {
            View::Or(..) | View::Implies(..) => false,
            View::Historically(_) => true,
            View::Core => !matches!(self, Self::And(..) | Self::Since(..)),
        }
    }
}

enum View<'a> {
    Core,
    Historically(&'a Formula),
    Or(&'a Formula, &'a Formula),
    Implies(&'a Formula, &'a Formula),
}

/// Wraps binary forms in parentheses so prefix operators bind correctly.
struct Prim<'a>(&'a Formula);

impl fmt::Display for Prim<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_primary() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.view() {
            View::Historically(g) => return write!(f, "H {}", Prim(g)),
            View::Or(g, h) => return write!(f, "{} | {}", Prim(g), Prim(h)),
            View::Implies(g, h) => return write!(f, "{} -> {}", Prim(g), Prim(h)),
            View::Core => {}
        }
        match self {
            Self::Atom(p) => f.write_str(p),
            Self::True => f.write_str("true"),
            Self::False => f.write_str("false"),
            Self::Mod { remainder, modulus } => write!(f, "MOD[{remainder},{modulus}]"),
            Self::Not(g) => write!(f, "!{}", Prim(g)),
            Self::Yesterday(g) => write!(f, "Y {}", Prim(g)),
            Self::Previously(g) => write!(f, "P {}", Prim(g)),
            Self::And(g, h) => write!(f, "{} & {}", Prim(g), Prim(h)),
            Self::Since(g, h) => write!(f, "{} S {}", Prim(g), Prim(h)),
            Self::Count(c) => {
                f.write_str("(")?;
                for (i, t) in c.terms.iter().enumerate() {
                    let mag = t.coeff.unsigned_abs();
                    match (i, t.coeff < 0) {
                        (0, false) => {}
                        (0, true) => f.write_str("-")?,
                        (_, false) => f.write_str(" + ")?,
                        (_, true) => f.write_str(" - ")?,
                    }
                    if mag != 1 {
                        write!(f, "{mag}*")?;
                    }
                    write!(f, "#[{}]", t.formula)?;
                }
                write!(f, " {} {})", c.cmp, c.threshold)
            }
        }
    }
}
