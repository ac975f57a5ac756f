//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are exact (zero mismatches, bit-exact equality)
//! unless a line says otherwise.

use std::process::ExitCode;
use std::time::Instant;

use pastssm::compiler::gadgets;
use pastssm::corpus;
use pastssm::formula::{lower_to_crasp, normalize_mod_lcm, parse, Comparator, Formula};
use pastssm::numeric::{integer, rational, Arithmetic, ExactArith, FixedFormat, NumericMode};
use pastssm::semantics::{Alphabet, Letter, Monitor, Trace, DEFAULT_WORD_BUDGET};
use pastssm::ssm::{accepts, Executor, GatePolicy};
use pastssm::verify::{aa_star_candidates, aa_star_demo, check_equivalence, check_model, monotonicity_experiment};
use pastssm::{compile, compile_over};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn abc() -> Alphabet {
    Alphabet::Singletons(vec!["a".into(), "b".into(), "c".into()])
}

fn ab_powerset() -> Alphabet {
    Alphabet::PowerSet(vec!["a".into(), "b".into()])
}

fn fixed(i: u32, f: u32) -> NumericMode {
    NumericMode::fixed(i, f).unwrap()
}

fn logp_auto() -> NumericMode {
    NumericMode::log_precision(4, None)
}

fn word(parts: &[(&str, usize)]) -> Trace {
    parts
        .iter()
        .fold(Trace::default(), |w, (s, n)| w.concat(&Trace::repeat(s, *n)))
}

/// Exhaustive equivalence of a corpus under one policy and mode.
fn corpus_equivalence(
    texts: &[&str],
    policy: GatePolicy,
    mode: NumericMode,
    alphabet: &Alphabet,
) -> (u64, Vec<String>) {
    let mut words = 0;
    let mut failures = Vec::new();
    for f in corpus::parse_all(texts) {
        match check_equivalence(&f, policy, mode, alphabet, 8) {
            Ok(rep) => {
                words += rep.words_checked;
                if let Some(m) = rep.mismatches.first() {
                    failures.push(format!("{f} ({} mismatches, first {})", rep.mismatches.len(), m.word));
                }
            }
            Err(e) => failures.push(format!("{f}: {e}")),
        }
    }
    (words, failures)
}

fn c1_diagonal_pltl() -> Outcome {
    let (words, failures) = corpus_equivalence(corpus::PLTL, GatePolicy::Diagonal, NumericMode::Exact, &abc());
    outcome(
        failures.is_empty() && corpus::PLTL.len() >= 20,
        format!(
            "{} formulas, {words} words, singletons {{a,b,c}}, lengths 1..8, exact; failures: {failures:?}",
            corpus::PLTL.len()
        ),
    )
}

fn c2_counting_logp() -> Outcome {
    let f = parse(corpus::ANBNCN).unwrap();
    let mode = logp_auto();
    let ssm = compile_over(&f, GatePolicy::Diagonal, mode, abc().propositions()).unwrap();
    let rep = check_model(&ssm, &f, mode, &abc(), 9, DEFAULT_WORD_BUDGET).unwrap();
    let expected: Vec<String> = (1..=3)
        .rev()
        .map(|n| word(&[("a", n), ("b", n), ("c", n)]).to_string())
        .collect();
    let exhaustive_ok = rep.equivalent() && rep.accepted == expected;

    let mut family_errors = Vec::new();
    let mut family_words = 0;
    for n in 1..=50usize {
        let mut cases = vec![(word(&[("a", n), ("b", n), ("c", n)]), true)];
        for (db, dc) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let (nb, nc) = ((n as i64 + db) as usize, (n as i64 + dc) as usize);
            cases.push((word(&[("a", n), ("b", nb), ("c", nc)]), false));
        }
        for (w, want) in cases {
            family_words += 1;
            if accepts(&ssm, &w, mode).unwrap() != want {
                family_errors.push(format!("{} letters", w.len()));
            }
        }
    }
    outcome(
        exhaustive_ok && family_errors.is_empty(),
        format!(
            "logp:4:auto (H={}); {} words of length <= 9 with {} mismatches, accepted {:?}; {family_words} family words, errors {family_errors:?}",
            ssm.log_headroom(),
            rep.words_checked,
            rep.mismatches.len(),
            rep.accepted
        ),
    )
}

fn mod_block_one_hot(m: u64, steps: usize, mode: NumericMode) -> bool {
    let f = Formula::modulo(0, m);
    let ssm = compile(&f, GatePolicy::TimeInvariant, mode).unwrap();
    let block = ssm.mod_block().unwrap();
    let empty = Letter::new();
    fn go<A: Arithmetic>(exec: Executor<A>, block: pastssm::formula::ModBlock, steps: usize, letter: &Letter) -> bool {
        let one = exec.arith().lift(&integer(1));
        let zero = exec.arith().zero();
        let mut state = exec.initial();
        (1..=steps).all(|t| {
            exec.step(&mut state, letter).unwrap();
            let h = &state.hidden()[0];
            (0..block.modulus).all(|r| {
                let want = if t as u64 % block.modulus == r { &one } else { &zero };
                h[block.dim(r)] == *want
            })
        })
    }
    match mode {
        NumericMode::Exact => go(Executor::new(&ssm, ExactArith), block, steps, &empty),
        NumericMode::Fixed(fmt) => go(Executor::new(&ssm, fmt), block, steps, &empty),
        NumericMode::LogPrecision { .. } => unreachable!(),
    }
}

fn c3_time_invariant_mod() -> Outcome {
    let mut details = Vec::new();
    let mut pass = corpus::UNARY_MOD.len() >= 10;
    for mode in [NumericMode::Exact, fixed(12, 4)] {
        let (words, failures) = corpus_equivalence(corpus::UNARY_MOD, GatePolicy::TimeInvariant, mode, &ab_powerset());
        pass &= failures.is_empty();
        details.push(format!("{mode}: {words} words, failures {failures:?}"));
    }
    let mut one_hot = Vec::new();
    for m in [2, 3, 5, 7] {
        for mode in [NumericMode::Exact, fixed(12, 4)] {
            let ok = mod_block_one_hot(m, 1000, mode);
            pass &= ok;
            if !ok {
                one_hot.push(format!("m={m} {mode}"));
            }
        }
    }
    details.push(format!(
        "one-hot MOD block m in {{2,3,5,7}}, t <= 1000, failures {one_hot:?}"
    ));
    outcome(
        pass,
        format!(
            "{} formulas over 2^{{a,b}}, lengths 1..8; {}",
            corpus::UNARY_MOD.len(),
            details.join("; ")
        ),
    )
}

fn c4_mixed() -> Outcome {
    let (words, failures) = corpus_equivalence(corpus::MIXED, GatePolicy::Mixed, NumericMode::Exact, &ab_powerset());
    let f = parse("H a & MOD[0,2]").unwrap();
    let mut wrong = Vec::new();
    for mode in [NumericMode::Exact, fixed(12, 4)] {
        let ssm = compile_over(&f, GatePolicy::Mixed, mode, &["a".into()]).unwrap();
        for n in 1..=100 {
            if accepts(&ssm, &Trace::repeat("a", n), mode).unwrap() != (n % 2 == 0) {
                wrong.push(format!("a^{n} under {mode}"));
            }
        }
    }
    outcome(
        failures.is_empty() && wrong.is_empty() && corpus::MIXED.len() >= 10,
        format!(
            "{} formulas, {words} words over 2^{{a,b}}, exact, failures {failures:?}; (aa)* among a^n, n <= 100 (exact, fixed:12:4), errors {wrong:?}",
            corpus::MIXED.len()
        ),
    )
}

fn c5_monotonicity() -> Outcome {
    let mode = fixed(12, 4);
    let mut runs = 0;
    let mut worst = 0;
    let mut failures = Vec::new();
    let texts: Vec<&str> = corpus::PLTL.iter().chain(corpus::COUNTING).copied().collect();
    for f in corpus::parse_all(&texts) {
        let ssm = compile_over(&f, GatePolicy::Diagonal, mode, abc().propositions()).unwrap();
        for letter in abc().letters() {
            runs += 1;
            match monotonicity_experiment(&ssm, &letter, mode, 50) {
                Ok(rep) if rep.window_confirmed() && (rep.stabilization_point as u128) < rep.cap => {
                    worst = worst.max(rep.hidden_fixed_point);
                }
                Ok(rep) => failures.push(format!("{f} on {}: window not confirmed", rep.symbol)),
                Err(e) => failures.push(format!("{f}: {e}")),
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{runs} runs under fixed:12:4, window 50; latest hidden fixed point n = {worst}; failures {failures:?}"
        ),
    )
}

fn c6_aa_star() -> Outcome {
    let rep = aa_star_demo(fixed(12, 4), &aa_star_candidates(), 50, 100).unwrap();
    let lines: Vec<String> = rep
        .candidates
        .iter()
        .map(|c| {
            format!(
                "{} stabilizes at N={} (a^N: {}, a^N+1: {}, wrong on {})",
                c.formula,
                c.stabilization_point,
                c.accepts_n,
                c.accepts_n_plus_1,
                c.misclassified.as_deref().unwrap_or("none")
            )
        })
        .collect();
    outcome(
        rep.holds(),
        format!(
            "{}; mixed {} errors on a^1..a^100: {:?}",
            lines.join("; "),
            rep.mixed_formula,
            rep.mixed_errors
        ),
    )
}

/// `a_{t-1}` as recovered by the decoder from the 1/4-encoder, per position.
fn decode_sequence<A: Arithmetic>(arith: &A, bits: &[bool]) -> Vec<bool> {
    let dec = gadgets::prev_decoder().prepare(arith);
    let quarter = arith.lift(&rational(1, 4));
    let one = arith.lift(&integer(1));
    let mut h = arith.zero();
    bits.iter()
        .map(|&b| {
            let x = if b { one.clone() } else { arith.zero() };
            h = arith.add(&arith.mul(&quarter, &h), &x);
            dec.eval(arith, &[h.clone()])[0] == one
        })
        .collect()
}

fn c7_gadgets() -> Outcome {
    let b = 3;
    let mut comparator_cases = 0;
    let mut comparator_errors = Vec::new();
    for cmp in Comparator::ALL {
        let net = gadgets::comparator(cmp, b);
        for n in -100i64..=100 {
            comparator_cases += 1;
            let got = net.eval(&ExactArith, &[integer(n)]).unwrap().remove(0);
            if got != integer(cmp.holds(n.into(), b.into()) as i64) {
                comparator_errors.push(format!("{n} {cmp} {b}"));
            }
        }
    }

    let fmt = FixedFormat::new(12, 3).unwrap();
    let mut decoder_errors = 0;
    for mask in 0u32..1 << 12 {
        let bits: Vec<bool> = (0..12).map(|i| mask >> i & 1 == 1).collect();
        let want: Vec<bool> = (0..12).map(|t| t > 0 && bits[t - 1]).collect();
        if decode_sequence(&ExactArith, &bits) != want {
            decoder_errors += 1;
        }
        if decode_sequence(&fmt, &bits) != want {
            decoder_errors += 1;
        }
    }

    let mut intervals: Vec<_> = gadgets::encoder_intervals().into_iter().map(|(_, iv)| iv).collect();
    intervals.sort();
    let disjoint = intervals.windows(2).all(|w| w[0].1 < w[1].0) && intervals.iter().all(|(lo, hi)| lo <= hi);

    outcome(
        comparator_errors.is_empty() && decoder_errors == 0 && disjoint,
        format!(
            "{comparator_cases} comparator cases (b = {b}), errors {comparator_errors:?}; 4096 sequences x (exact, fixed:12:3), decoder errors {decoder_errors}; intervals disjoint: {disjoint}"
        ),
    )
}

fn c8_precision_witness() -> Outcome {
    let f = parse(corpus::ANBN).unwrap();
    let ab = Alphabet::Singletons(vec!["a".into(), "b".into()]);
    let mut words: Vec<Trace> = ab.words(1, 10);
    for n in 0..=64usize {
        for m in 0..=64 - n {
            if n + m > 10 {
                words.push(word(&[("a", n), ("b", m)]));
            }
        }
    }
    let mut report = Vec::new();
    let mut errors_by_mode = Vec::new();
    for mode in [fixed(4, 0), logp_auto()] {
        let ssm = compile_over(&f, GatePolicy::Diagonal, mode, ab.propositions()).unwrap();
        let mism = pastssm::verify::check_traces(&ssm, &f, words.iter().cloned(), mode).unwrap();
        report.push(format!(
            "{mode}: {} misclassified{}",
            mism.len(),
            mism.first().map(|m| format!(", first {}", m.word)).unwrap_or_default()
        ));
        errors_by_mode.push(mism.len());
    }
    outcome(
        errors_by_mode[0] > 0 && errors_by_mode[1] == 0,
        format!(
            "{} words (all of length <= 10, a^n b^m up to 64); {}",
            words.len(),
            report.join("; ")
        ),
    )
}

/// Compares two formulas at every node of the word trie up to `max_len`.
fn agree_up_to(f: &Formula, g: &Formula, letters: &[Letter], max_len: usize) -> Option<Trace> {
    fn rec(mf: &Monitor, mg: &Monitor, letters: &[Letter], w: &mut Trace, max_len: usize) -> Option<Trace> {
        for l in letters {
            let (mut a, mut b) = (mf.clone(), mg.clone());
            w.push(l.clone());
            if a.step(l) != b.step(l) {
                return Some(w.clone());
            }
            if w.len() < max_len {
                if let Some(bad) = rec(&a, &b, letters, w, max_len) {
                    return Some(bad);
                }
            }
            w.pop();
        }
        None
    }
    rec(
        &Monitor::new(f),
        &Monitor::new(g),
        letters,
        &mut Trace::default(),
        max_len,
    )
}

fn c9_rewrites() -> Outcome {
    let letters = ab_powerset().letters();
    let mut checked = 0;
    let mut failures = Vec::new();
    let mod_texts: Vec<&str> = corpus::UNARY_MOD.iter().chain(corpus::MIXED).copied().collect();
    for f in corpus::parse_all(&mod_texts) {
        let g = normalize_mod_lcm(&f).unwrap();
        if g == f {
            continue;
        }
        checked += 1;
        if let Some(w) = agree_up_to(&f, &g, &letters, 10) {
            failures.push(format!("lcm {f} on {w}"));
        }
    }
    for f in corpus::parse_all(corpus::CRASP) {
        checked += 1;
        let g = lower_to_crasp(&f).unwrap();
        if let Some(w) = agree_up_to(&f, &g, &letters, 10) {
            failures.push(format!("crasp {f} on {w}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checked} rewritten formulas, every word over 2^{{a,b}} of length <= 10; failures {failures:?}"),
    )
}

fn c10_layer_counts() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    let diag: Vec<&str> = corpus::PLTL.iter().chain(corpus::COUNTING).copied().collect();
    for f in corpus::parse_all(&diag) {
        checked += 1;
        let ssm = compile(&f, GatePolicy::Diagonal, NumericMode::Exact).unwrap();
        if ssm.layers().len() != f.nesting_depth() {
            failures.push(format!("{f}: {} layers, nd {}", ssm.layers().len(), f.nesting_depth()));
        }
    }
    for (texts, policy) in [
        (corpus::UNARY_MOD, GatePolicy::TimeInvariant),
        (corpus::MIXED, GatePolicy::Mixed),
    ] {
        for f in corpus::parse_all(texts) {
            checked += 1;
            let ssm = compile(&f, policy, NumericMode::Exact).unwrap();
            let nd = normalize_mod_lcm(&f).unwrap().nesting_depth();
            if ssm.layers().len() != nd + 1 {
                failures.push(format!("{f}: {} layers, nd {nd} + 1", ssm.layers().len()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checked} models; nd(f) diagonal, nd(f)+1 with a MOD layer (nd after lcm normalization); failures {failures:?}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("diagonal equivalence on pure-past LTL", c1_diagonal_pltl),
        ("a^n b^n c^n under log precision", c2_counting_logp),
        ("time-invariant layers with MOD", c3_time_invariant_mod),
        ("mixed layers with since and MOD", c4_mixed),
        ("stabilization on repeated symbols", c5_monotonicity),
        ("(aa)* separation", c6_aa_star),
        ("gadgets and previous-bit decoder", c7_gadgets),
        ("fixed vs log precision witness", c8_precision_witness),
        ("rewrite soundness", c9_rewrites),
        ("layer counts", c10_layer_counts),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let status = if out.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!out.pass);
        println!(
            "criterion {:>2} [{status}] {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            out.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
