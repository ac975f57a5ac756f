//! Direct evaluation of formulas over finite traces.
//!
//! This is the reference every compiled model is checked against. It runs a
//! bottom-up table over (subformula, position) with running counts for the
//! counting atoms, so one pass costs `O(|Sub(f)| · n)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EvalError, ParseError};
use crate::formula::{Comparator, Formula};

/// One position of a trace: the set of propositions that hold there.
pub type Letter = BTreeSet<String>;

/// Finite word over `2^P`. Positions are 1-based in the API.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Trace {
    letters: Vec<Letter>,
}

impl Trace {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self { letters }
    }

    /// Trace of singleton letters, e.g. `Trace::from_symbols(["a", "a", "b"])`.
    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(
            symbols
                .into_iter()
                .map(|s| std::iter::once(s.into()).collect())
                .collect(),
        )
    }

    /// `symbol` repeated `n` times as singleton letters.
    pub fn repeat(symbol: &str, n: usize) -> Self {
        Self::from_symbols(std::iter::repeat_n(symbol, n))
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.letters.pop()
    }

    pub fn push(&mut self, letter: Letter) {
        self.letters.push(letter);
    }

    pub fn concat(mut self, other: &Trace) -> Self {
        self.letters.extend(other.letters.iter().cloned());
        self
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, letter) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            if letter.len() == 1 {
                f.write_str(letter.iter().next().unwrap())?;
            } else {
                write!(f, "{{{}}}", letter.iter().cloned().collect::<Vec<_>>().join(","))?;
            }
        }
        Ok(())
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z')) && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl FromStr for Trace {
    type Err = ParseError;

    /// `a;a;b` or `{a};{};{a,b}`; the empty string is the empty trace.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Ok(Self::default());
        }
        let mut letters = Vec::new();
        let mut offset = 0;
        for part in s.split(';') {
            let item = part.trim();
            let pos = offset + part.len() - part.trim_start().len();
            offset += part.len() + 1;
            let bad = |msg: String| ParseError::Syntax { pos, msg };
            let letter: Letter = if let Some(inner) = item.strip_prefix('{') {
                let inner = inner
                    .strip_suffix('}')
                    .ok_or_else(|| bad(format!("unclosed letter `{item}`")))?;
                let mut letter = Letter::new();
                for p in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    if !is_ident(p) {
                        return Err(bad(format!("bad proposition `{p}`")));
                    }
                    letter.insert(p.to_string());
                }
                letter
            } else if is_ident(item) {
                std::iter::once(item.to_string()).collect()
            } else {
                return Err(bad(format!("bad letter `{item}`")));
            };
            letters.push(letter);
        }
        Ok(Self { letters })
    }
}

impl From<Trace> for String {
    fn from(t: Trace) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Trace {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Letters that words are drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alphabet {
    /// All subsets of the propositions.
    PowerSet(Vec<String>),
    /// One singleton letter per proposition (mutually exclusive symbols).
    Singletons(Vec<String>),
}

impl Alphabet {
    pub fn propositions(&self) -> &[String] {
        match self {
            Self::PowerSet(p) | Self::Singletons(p) => p,
        }
    }

    /// Letters in a fixed order; words are enumerated lexicographically in it.
    pub fn letters(&self) -> Vec<Letter> {
        match self {
            Self::Singletons(p) => p.iter().map(|s| std::iter::once(s.clone()).collect()).collect(),
            Self::PowerSet(p) => {
                let n = p.len();
                (0..1usize << n)
                    .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| p[i].clone()).collect())
                    .collect()
            }
        }
    }

    /// Number of words of length `1..=max_len` (plus ε when `with_empty`).
    pub fn word_count(&self, max_len: usize, with_empty: bool) -> u128 {
        let k = self.letters().len() as u128;
        let mut total = u128::from(with_empty);
        let mut pow = 1u128;
        for _ in 0..max_len {
            pow = pow.saturating_mul(k);
            total = total.saturating_add(pow);
        }
        total
    }

    /// All words of length `lo..=hi` in lexicographic order.
    pub fn words(&self, lo: usize, hi: usize) -> Vec<Trace> {
        let letters = self.letters();
        let mut out = Vec::new();
        let mut cur = Trace::default();
        fn rec(letters: &[Letter], cur: &mut Trace, lo: usize, hi: usize, out: &mut Vec<Trace>) {
            if cur.len() >= lo {
                out.push(cur.clone());
            }
            if cur.len() == hi {
                return;
            }
            for l in letters {
                cur.letters.push(l.clone());
                rec(letters, cur, lo, hi, out);
                cur.letters.pop();
            }
        }
        rec(&letters, &mut cur, lo, hi, &mut out);
        out
    }
}

pub const DEFAULT_WORD_BUDGET: u64 = 1_000_000;

/// One evaluation step per distinct subformula, children first, with
/// children referred to by slot.
#[derive(Debug, Clone)]
enum Op {
    Atom(String),
    Const(bool),
    Mod {
        remainder: u64,
        modulus: u64,
    },
    Not(usize),
    And(usize, usize),
    Yesterday(usize),
    Previously(usize),
    Since(usize, usize),
    Count {
        terms: Vec<(i64, usize)>,
        cmp: Comparator,
        threshold: i128,
    },
}

/// A formula prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Evaluator<'f> {
    root: &'f Formula,
    slot: HashMap<&'f Formula, usize>,
    ops: Vec<Op>,
}

impl<'f> Evaluator<'f> {
    pub fn new(f: &'f Formula) -> Self {
        let subs = f.subformulas();
        let slot: HashMap<&'f Formula, usize> = subs.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let ix = |g: &Formula| slot[g];
        let ops = subs
            .iter()
            .map(|sub| match sub {
                Formula::Atom(p) => Op::Atom(p.clone()),
                Formula::True => Op::Const(true),
                Formula::False => Op::Const(false),
                Formula::Mod { remainder, modulus } => Op::Mod {
                    remainder: *remainder,
                    modulus: *modulus,
                },
                Formula::Not(g) => Op::Not(ix(g)),
                Formula::And(g, h) => Op::And(ix(g), ix(h)),
                Formula::Yesterday(g) => Op::Yesterday(ix(g)),
                Formula::Previously(g) => Op::Previously(ix(g)),
                Formula::Since(g, h) => Op::Since(ix(g), ix(h)),
                Formula::Count(c) => Op::Count {
                    terms: c.terms.iter().map(|t| (t.coeff, ix(&t.formula))).collect(),
                    cmp: c.cmp,
                    threshold: i128::from(c.threshold),
                },
            })
            .collect();
        Self { root: f, slot, ops }
    }

    pub fn formula(&self) -> &'f Formula {
        self.root
    }

    /// Row `i` holds the truth of subformula slot `i` at every position.
    fn table(&self, trace: &Trace) -> Vec<Vec<bool>> {
        let n = trace.len();
        let mut table: Vec<Vec<bool>> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let row: Vec<bool> = match op {
                Op::Atom(p) => trace.letters.iter().map(|l| l.contains(p)).collect(),
                Op::Const(v) => vec![*v; n],
                Op::Mod { remainder, modulus } => (1..=n as u64).map(|i| i % modulus == *remainder).collect(),
                Op::Not(g) => table[*g].iter().map(|v| !v).collect(),
                Op::And(g, h) => table[*g].iter().zip(&table[*h]).map(|(x, y)| *x && *y).collect(),
                Op::Yesterday(g) => (0..n).map(|i| i > 0 && table[*g][i - 1]).collect(),
                Op::Previously(g) => table[*g]
                    .iter()
                    .scan(false, |seen, v| {
                        *seen |= *v;
                        Some(*seen)
                    })
                    .collect(),
                Op::Since(g, h) => {
                    let mut prev = false;
                    (0..n)
                        .map(|i| {
                            prev = table[*h][i] || (table[*g][i] && prev);
                            prev
                        })
                        .collect()
                }
                Op::Count { terms, cmp, threshold } => {
                    let mut sum: i128 = 0;
                    (0..n)
                        .map(|i| {
                            for (coeff, g) in terms {
                                if table[*g][i] {
                                    sum += i128::from(*coeff);
                                }
                            }
                            cmp.holds(sum, *threshold)
                        })
                        .collect()
                }
            };
            table.push(row);
        }
        table
    }

    /// Membership of `trace` in the language of the formula (see [`eval`]).
    pub fn eval(&self, trace: &Trace) -> bool {
        if trace.is_empty() {
            return eval_empty(self.root);
        }
        self.table(trace).last().expect("at least the root")[trace.len() - 1]
    }
}

/// Truth value of every subformula at every position of `trace`.
pub struct Valuation<'f> {
    plan: Evaluator<'f>,
    table: Vec<Vec<bool>>,
    len: usize,
}

impl<'f> Valuation<'f> {
    pub fn compute(f: &'f Formula, trace: &Trace) -> Self {
        let plan = Evaluator::new(f);
        let table = plan.table(trace);
        Self {
            plan,
            table,
            len: trace.len(),
        }
    }

    /// Truth of `sub` at 1-based position `pos`. `sub` must be a subformula
    /// of the evaluated formula.
    pub fn at(&self, sub: &Formula, pos: usize) -> Option<bool> {
        if pos == 0 || pos > self.len {
            return None;
        }
        self.row(sub).map(|row| row[pos - 1])
    }

    pub fn row(&self, sub: &Formula) -> Option<&[bool]> {
        self.plan.slot.get(sub).map(|&i| self.table[i].as_slice())
    }
}

/// `σ, pos ⊨ f` for `1 <= pos <= |σ|`.
pub fn eval_at(f: &Formula, trace: &Trace, pos: usize) -> Result<bool, EvalError> {
    if pos == 0 || pos > trace.len() {
        return Err(EvalError::PositionOutOfRange { pos, len: trace.len() });
    }
    Ok(Valuation::compute(f, trace).at(f, pos).expect("root is a subformula"))
}

/// Membership of `trace` in the language of `f`: satisfaction at the last
/// position. On the empty trace, atoms, `MOD` and all temporal operators are
/// false and every count is zero.
pub fn eval(f: &Formula, trace: &Trace) -> bool {
    Evaluator::new(f).eval(trace)
}

fn eval_empty(f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::Atom(_)
        | Formula::False
        | Formula::Mod { .. }
        | Formula::Yesterday(_)
        | Formula::Previously(_)
        | Formula::Since(..) => false,
        Formula::Not(g) => !eval_empty(g),
        Formula::And(g, h) => eval_empty(g) && eval_empty(h),
        Formula::Count(c) => c.cmp.holds(0, i128::from(c.threshold)),
    }
}

/// Online evaluator: consumes a trace letter by letter and reports whether
/// the formula holds at the current position. Cloning a monitor forks it,
/// which makes trie-shaped enumeration cheap.
#[derive(Debug, Clone)]
pub struct Monitor<'f> {
    plan: Rc<Evaluator<'f>>,
    values: Vec<bool>,
    sums: Vec<i128>,
    position: u64,
}

impl<'f> Monitor<'f> {
    pub fn new(f: &'f Formula) -> Self {
        let plan = Evaluator::new(f);
        let n = plan.ops.len();
        Self {
            plan: Rc::new(plan),
            values: vec![false; n],
            sums: vec![0; n],
            position: 0,
        }
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    /// Truth of the root formula at the current position (or on ε before
    /// any step).
    pub fn holds(&self) -> bool {
        if self.position == 0 {
            return eval_empty(self.plan.root);
        }
        *self.values.last().expect("at least the root")
    }

    pub fn step(&mut self, letter: &Letter) -> bool {
        self.position += 1;
        let prev = std::mem::take(&mut self.values);
        let mut cur: Vec<bool> = Vec::with_capacity(prev.len());
        for (i, op) in self.plan.ops.iter().enumerate() {
            let v = match op {
                Op::Atom(p) => letter.contains(p),
                Op::Const(v) => *v,
                Op::Mod { remainder, modulus } => self.position % modulus == *remainder,
                Op::Not(g) => !cur[*g],
                Op::And(g, h) => cur[*g] && cur[*h],
                Op::Yesterday(g) => self.position > 1 && prev[*g],
                Op::Previously(g) => cur[*g] || prev[i],
                Op::Since(g, h) => cur[*h] || (cur[*g] && prev[i]),
                Op::Count { terms, cmp, threshold } => {
                    for (coeff, g) in terms {
                        if cur[*g] {
                            self.sums[i] += i128::from(*coeff);
                        }
                    }
                    cmp.holds(self.sums[i], *threshold)
                }
            };
            cur.push(v);
        }
        self.values = cur;
        self.holds()
    }
}

/// Every word over `alphabet` of length `0..=max_len` in the language of `f`.
pub fn enumerate_language_over(
    f: &Formula,
    alphabet: &Alphabet,
    max_len: usize,
    budget: u64,
) -> Result<Vec<Trace>, EvalError> {
    let words = alphabet.word_count(max_len, true);
    if words > u128::from(budget) {
        return Err(EvalError::BudgetExceeded { words, budget });
    }
    let oracle = Evaluator::new(f);
    Ok(alphabet
        .words(0, max_len)
        .into_iter()
        .filter(|w| oracle.eval(w))
        .collect())
}

/// [`enumerate_language_over`] with letters drawn from `2^props` and the
/// default budget.
pub fn enumerate_language(f: &Formula, props: &[String], max_len: usize) -> Result<Vec<Trace>, EvalError> {
    enumerate_language_over(f, &Alphabet::PowerSet(props.to_vec()), max_len, DEFAULT_WORD_BUDGET)
}
