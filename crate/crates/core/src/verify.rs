//! Checks compiled models against the semantic evaluator.

use serde::Serialize;

use crate::compiler::compile_over;
use crate::error::{ModelError, VerifyError};
use crate::formula::{parse, Formula};
use crate::numeric::{Arithmetic, CompactExact, NumericMode, ResolvedMode};
use crate::semantics::{Alphabet, Evaluator, Letter, Trace, DEFAULT_WORD_BUDGET};
use crate::ssm::{accepts, Executor, GatePolicy, Ssm};

/// How many accepted words an equivalence report lists verbatim.
const ACCEPTED_SAMPLE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub word: String,
    pub ssm: bool,
    pub oracle: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub formula: String,
    pub policy: GatePolicy,
    pub mode: String,
    pub alphabet: Alphabet,
    pub max_len: usize,
    pub words_checked: u64,
    pub accepted_count: u64,
    /// The first accepted words in enumeration order.
    pub accepted: Vec<String>,
    pub mismatches: Vec<Mismatch>,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn verdict(&self) -> &'static str {
        if self.equivalent() {
            "equivalent"
        } else {
            "NOT equivalent"
        }
    }
}

/// Visits every word of length `lo..=hi` in lexicographic order with the
/// model's acceptance bit, sharing prefix computations.
fn walk<A: Arithmetic>(
    exec: &Executor<A>,
    letters: &[Letter],
    lo: usize,
    hi: usize,
    visit: &mut dyn FnMut(&Trace, bool),
) -> Result<(), ModelError> {
    fn rec<A: Arithmetic>(
        exec: &Executor<A>,
        letters: &[Letter],
        state: &crate::ssm::State<A::Value>,
        word: &mut Trace,
        lo: usize,
        hi: usize,
        visit: &mut dyn FnMut(&Trace, bool),
    ) -> Result<(), ModelError> {
        for l in letters {
            let mut next = state.clone();
            let y = exec.step(&mut next, l)?;
            word.push(l.clone());
            if word.len() >= lo {
                visit(word, exec.is_one(&y));
            }
            if word.len() < hi {
                rec(exec, letters, &next, word, lo, hi, visit)?;
            }
            word.pop();
        }
        Ok(())
    }
    if hi == 0 {
        return Ok(());
    }
    rec(
        exec,
        letters,
        &exec.initial(),
        &mut Trace::default(),
        lo.max(1),
        hi,
        visit,
    )
}

fn walk_resolved(
    ssm: &Ssm,
    mode: ResolvedMode,
    letters: &[Letter],
    lo: usize,
    hi: usize,
    visit: &mut dyn FnMut(&Trace, bool),
) -> Result<(), ModelError> {
    match mode {
        ResolvedMode::Exact => walk(&Executor::new(ssm, CompactExact), letters, lo, hi, visit),
        ResolvedMode::Fixed(fmt) => walk(&Executor::new(ssm, fmt), letters, lo, hi, visit),
    }
}

/// Runs `ssm` on every word of length `1..=max_len` over `alphabet` and
/// compares with `eval(f, ·)`. Log-precision widths are settled per length.
pub fn check_model(
    ssm: &Ssm,
    f: &Formula,
    mode: NumericMode,
    alphabet: &Alphabet,
    max_len: usize,
    budget: u64,
) -> Result<EquivalenceReport, VerifyError> {
    let words = alphabet.word_count(max_len, false);
    if words > u128::from(budget) {
        return Err(crate::error::EvalError::BudgetExceeded { words, budget }.into());
    }
    let letters = alphabet.letters();
    let oracle = Evaluator::new(f);
    let mut report = EquivalenceReport {
        formula: f.to_string(),
        policy: ssm.policy(),
        mode: mode.to_string(),
        alphabet: alphabet.clone(),
        max_len,
        words_checked: 0,
        accepted_count: 0,
        accepted: Vec::new(),
        mismatches: Vec::new(),
    };
    let mut visit = |w: &Trace, got: bool| {
        let want = oracle.eval(w);
        report.words_checked += 1;
        if got {
            report.accepted_count += 1;
            if report.accepted.len() < ACCEPTED_SAMPLE {
                report.accepted.push(w.to_string());
            }
        }
        if got != want {
            report.mismatches.push(Mismatch {
                word: w.to_string(),
                ssm: got,
                oracle: want,
            });
        }
    };
    if let NumericMode::LogPrecision { .. } = mode {
        let mut by_len: Vec<(Trace, bool)> = Vec::new();
        for n in 1..=max_len {
            let resolved = mode.resolve(n, ssm.log_headroom()).map_err(ModelError::from)?;
            walk_resolved(ssm, resolved, &letters, n, n, &mut |w, y| by_len.push((w.clone(), y)))?;
        }
        // Restore the prefix-first order of the alphabet across lengths.
        let rank = |w: &Trace| -> Vec<usize> {
            w.letters()
                .iter()
                .map(|l| letters.iter().position(|x| x == l).expect("letter from the alphabet"))
                .collect()
        };
        by_len.sort_by_cached_key(|(w, _)| rank(w));
        for (w, y) in &by_len {
            visit(w, *y);
        }
    } else {
        let resolved = mode.resolve(max_len, ssm.log_headroom()).map_err(ModelError::from)?;
        walk_resolved(ssm, resolved, &letters, 1, max_len, &mut visit)?;
    }
    Ok(report)
}

/// Compiles `f` over the alphabet's propositions and checks it exhaustively.
pub fn check_equivalence(
    f: &Formula,
    policy: GatePolicy,
    mode: NumericMode,
    alphabet: &Alphabet,
    max_len: usize,
) -> Result<EquivalenceReport, VerifyError> {
    let ssm = compile_over(f, policy, mode, alphabet.propositions())?;
    check_model(&ssm, f, mode, alphabet, max_len, DEFAULT_WORD_BUDGET)
}

/// Disagreements between `ssm` and `eval(f, ·)` on the given traces.
pub fn check_traces<I>(ssm: &Ssm, f: &Formula, traces: I, mode: NumericMode) -> Result<Vec<Mismatch>, VerifyError>
where
    I: IntoIterator<Item = Trace>,
{
    let oracle = Evaluator::new(f);
    let mut out = Vec::new();
    for w in traces {
        let got = accepts(ssm, &w, mode)?;
        let want = oracle.eval(&w);
        if got != want {
            out.push(Mismatch {
                word: w.to_string(),
                ssm: got,
                oracle: want,
            });
        }
    }
    Ok(out)
}

/// Outcome of feeding one symbol forever to a diagonal fixed-precision model.
#[derive(Debug, Clone, Serialize)]
pub struct StabilizationReport {
    pub symbol: String,
    pub mode: String,
    pub window: usize,
    /// First `N` with `f(n) = f(N)` for all `n >= N`.
    pub stabilization_point: usize,
    /// First `n` with hidden states equal to those at `n - 1`; from here on
    /// every output repeats.
    pub hidden_fixed_point: usize,
    pub cap: u128,
    pub accepts_after: bool,
    /// `f(n)` for `n = 1..=N+K`: final-layer `z_n` followed by `y_n`.
    pub outputs: Vec<Vec<String>>,
}

impl StabilizationReport {
    /// Bit-exact repetition of `f(N)` over the confirmation window.
    pub fn window_confirmed(&self) -> bool {
        let n = self.stabilization_point;
        self.outputs.len() >= n + self.window
            && self.outputs[n - 1..n + self.window]
                .iter()
                .all(|v| *v == self.outputs[n - 1])
    }
}

/// `2^{I+F+4} · d · L`.
fn stabilization_cap(ssm: &Ssm, int_bits: u32, frac_bits: u32) -> u128 {
    let layers = ssm.layers().len().max(1) as u128;
    (1u128 << (int_bits + frac_bits + 4)) * ssm.dim() as u128 * layers
}

/// Runs `ssm` on `σ, σσ, σσσ, …` until its hidden state stops changing, then
/// confirms the output over `window` further positions.
pub fn monotonicity_experiment(
    ssm: &Ssm,
    symbol: &Letter,
    mode: NumericMode,
    window: usize,
) -> Result<StabilizationReport, VerifyError> {
    let NumericMode::Fixed(fmt) = mode else {
        return Err(VerifyError::Precondition(format!("a constant-width mode, got {mode}")));
    };
    if !ssm.policy().is_diagonal() {
        return Err(VerifyError::Precondition(format!(
            "a diagonal model, got {}",
            ssm.policy()
        )));
    }
    let cap = stabilization_cap(ssm, fmt.int_bits(), fmt.frac_bits());
    let exec = Executor::new(ssm, fmt);
    let render = |v: &[i64]| -> Vec<String> { v.iter().map(|x| fmt.to_rational(*x).to_string()).collect() };
    let mut state = exec.initial();
    let mut outputs: Vec<Vec<i64>> = Vec::new();
    let mut fixed_at = None;
    loop {
        let n = outputs.len() + 1;
        if n as u128 > cap {
            return Err(VerifyError::CapExceeded { cap });
        }
        let before = state.hidden().to_vec();
        let rec = exec.step_recorded(&mut state, symbol)?;
        let mut f = match rec.layers.last() {
            Some((_, z)) => z.clone(),
            None => exec.embed(symbol)?,
        };
        f.push(rec.output);
        outputs.push(f);
        if fixed_at.is_none() && state.hidden() == before.as_slice() {
            fixed_at = Some(n);
        }
        if let Some(nstar) = fixed_at {
            let stable = &outputs[nstar - 1];
            let first = outputs.iter().rposition(|v| v != stable).map_or(1, |i| i + 2);
            if outputs.len() >= first + window {
                let accepts_after = exec.is_one(stable.last().expect("output present"));
                return Ok(StabilizationReport {
                    symbol: Trace::new(vec![symbol.clone()]).to_string(),
                    mode: mode.to_string(),
                    window,
                    stabilization_point: first,
                    hidden_fixed_point: nstar,
                    cap,
                    accepts_after,
                    outputs: outputs.iter().map(|v| render(v)).collect(),
                });
            }
        }
    }
}

/// Diagonal formula for "exactly `k` positions": `Y^{k-1} true & !Y^k true`.
pub fn length_is(k: usize) -> Formula {
    assert!(k >= 1);
    let y = |n: usize| (0..n).fold(Formula::True, |f, _| Formula::yesterday(f));
    Formula::and(y(k - 1), Formula::not(y(k)))
}

/// Diagonal attempts at `(aa)*`, each right only on a bounded range.
pub fn aa_star_candidates() -> Vec<Formula> {
    let even_len = [2, 4, 6]
        .into_iter()
        .map(length_is)
        .reduce(Formula::or)
        .expect("nonempty");
    vec![
        parse("H a").expect("valid"),
        parse("H a & (#[a] = 2 | #[a] = 4 | #[a] = 6 | #[a] = 8)").expect("valid"),
        Formula::and(parse("H a").expect("valid"), even_len),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateOutcome {
    pub formula: String,
    pub stabilization_point: usize,
    pub accepts_n: bool,
    pub accepts_n_plus_1: bool,
    /// The word among `a^N`, `a^{N+1}` that the model gets wrong.
    pub misclassified: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AaStarReport {
    pub mode: String,
    pub candidates: Vec<CandidateOutcome>,
    pub mixed_formula: String,
    pub mixed_max_len: usize,
    /// Lengths `n` at which the mixed model misjudges `a^n`.
    pub mixed_errors: Vec<usize>,
}

impl AaStarReport {
    pub fn holds(&self) -> bool {
        self.mixed_errors.is_empty()
            && self
                .candidates
                .iter()
                .all(|c| c.accepts_n == c.accepts_n_plus_1 && c.misclassified.is_some())
    }
}

/// Diagonal fixed-precision candidates for `(aa)*` stabilize and then
/// misjudge `a^N` or `a^{N+1}`; the mixed compile of `H a & MOD[0,2]` gets
/// every `a^n` with `n <= max_len` right.
pub fn aa_star_demo(
    mode: NumericMode,
    candidates: &[Formula],
    window: usize,
    max_len: usize,
) -> Result<AaStarReport, VerifyError> {
    let props = ["a".to_string()];
    let letter_a: Letter = props.iter().cloned().collect();
    let in_lang = |n: usize| n.is_multiple_of(2);
    let mut outcomes = Vec::new();
    for f in candidates {
        let ssm = compile_over(f, GatePolicy::Diagonal, mode, &props)?;
        let rep = monotonicity_experiment(&ssm, &letter_a, mode, window)?;
        let n = rep.stabilization_point;
        let accepts_n = accepts(&ssm, &Trace::repeat("a", n), mode)?;
        let accepts_n_plus_1 = accepts(&ssm, &Trace::repeat("a", n + 1), mode)?;
        let misclassified = [(n, accepts_n), (n + 1, accepts_n_plus_1)]
            .into_iter()
            .find(|&(k, got)| got != in_lang(k))
            .map(|(k, _)| format!("a^{k}"));
        outcomes.push(CandidateOutcome {
            formula: f.to_string(),
            stabilization_point: n,
            accepts_n,
            accepts_n_plus_1,
            misclassified,
        });
    }
    let mixed = parse("H a & MOD[0,2]").expect("valid");
    let ssm = compile_over(&mixed, GatePolicy::Mixed, mode, &props)?;
    let mut mixed_errors = Vec::new();
    for n in 1..=max_len {
        if accepts(&ssm, &Trace::repeat("a", n), mode)? != in_lang(n) {
            mixed_errors.push(n);
        }
    }
    Ok(AaStarReport {
        mode: mode.to_string(),
        candidates: outcomes,
        mixed_formula: mixed.to_string(),
        mixed_max_len: max_len,
        mixed_errors,
    })
}

/// `a^n (c a^n b a^n)^m`, or with `b` and `c` swapped.
pub fn block_probe(n: usize, m: usize, swapped: bool) -> Trace {
    let (first, second) = if swapped { ("b", "c") } else { ("c", "b") };
    let block = Trace::repeat("a", n);
    let mut w = block.clone();
    for _ in 0..m {
        w = w
            .concat(&Trace::from_symbols([first]))
            .concat(&block)
            .concat(&Trace::from_symbols([second]))
            .concat(&block);
    }
    w
}
