use pastssm::formula::{parse, Comparator, Formula};
use pastssm::numeric::{integer, rational, FixedFormat, NumericMode};
use pastssm::semantics::{eval, eval_at, Alphabet, Letter, Monitor, Trace, Valuation};
use pastssm::ssm::{run, GatePolicy, GateSpec, Ssm};
use pastssm::{compile_over, corpus};
use proptest::prelude::*;

fn props() -> Vec<String> {
    vec!["a".into(), "b".into()]
}

fn leaf(with_mod: bool) -> BoxedStrategy<Formula> {
    let mut leaves = vec![
        Just(Formula::atom("a")).boxed(),
        Just(Formula::atom("b")).boxed(),
        Just(Formula::True).boxed(),
    ];
    if with_mod {
        leaves.push(
            (2u64..=4)
                .prop_flat_map(|m| (0..m, Just(m)))
                .prop_map(|(r, m)| Formula::modulo(r, m))
                .boxed(),
        );
    }
    proptest::strategy::Union::new(leaves).boxed()
}

fn cmp() -> impl Strategy<Value = Comparator> {
    prop_oneof![
        Just(Comparator::Eq),
        Just(Comparator::Ge),
        Just(Comparator::Gt),
        Just(Comparator::Le),
        Just(Comparator::Lt),
    ]
}

fn formula_with(with_mod: bool, with_count: bool) -> impl Strategy<Value = Formula> {
    leaf(with_mod).prop_recursive(4, 24, 2, move |inner| {
        let mut ops = vec![
            inner.clone().prop_map(Formula::not).boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(f, g)| Formula::and(f, g))
                .boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(f, g)| Formula::or(f, g))
                .boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(f, g)| Formula::implies(f, g))
                .boxed(),
            inner.clone().prop_map(Formula::yesterday).boxed(),
            inner.clone().prop_map(Formula::previously).boxed(),
            inner.clone().prop_map(Formula::historically).boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(f, g)| Formula::since(f, g))
                .boxed(),
        ];
        if with_count {
            ops.push(
                (
                    inner.clone(),
                    prop::sample::select(vec![-2i64, -1, 1, 2]),
                    inner.clone(),
                    cmp(),
                    0u64..4,
                )
                    .prop_map(|(f, c, g, cmp, b)| Formula::count(vec![(1, f), (c, g)], cmp, b))
                    .boxed(),
            );
        }
        proptest::strategy::Union::new(ops)
    })
}

fn formula() -> impl Strategy<Value = Formula> {
    formula_with(true, true)
}

fn pltl() -> impl Strategy<Value = Formula> {
    formula_with(false, false)
}

fn letter() -> impl Strategy<Value = Letter> {
    (any::<bool>(), any::<bool>()).prop_map(|(a, b)| {
        let mut l = Letter::new();
        if a {
            l.insert("a".into());
        }
        if b {
            l.insert("b".into());
        }
        l
    })
}

fn trace(max: usize) -> impl Strategy<Value = Trace> {
    proptest::collection::vec(letter(), 1..=max).prop_map(Trace::new)
}

/// Direct reading of the satisfaction relation, one position at a time.
fn naive(f: &Formula, t: &Trace, i: usize) -> bool {
    let l = &t.letters()[i - 1];
    match f {
        Formula::Atom(p) => l.contains(p),
        Formula::True => true,
        Formula::False => false,
        Formula::Mod { remainder, modulus } => i as u64 % modulus == *remainder,
        Formula::Not(g) => !naive(g, t, i),
        Formula::And(g, h) => naive(g, t, i) && naive(h, t, i),
        Formula::Yesterday(g) => i > 1 && naive(g, t, i - 1),
        Formula::Previously(g) => (1..=i).any(|j| naive(g, t, j)),
        Formula::Since(g, h) => (1..=i).any(|j| naive(h, t, j) && (j + 1..=i).all(|k| naive(g, t, k))),
        Formula::Count(c) => {
            let sum: i128 = c
                .terms
                .iter()
                .map(|term| i128::from(term.coeff) * (1..=i).filter(|&j| naive(&term.formula, t, j)).count() as i128)
                .sum();
            c.cmp.holds(sum, i128::from(c.threshold))
        }
    }
}

fn policy_for(f: &Formula) -> GatePolicy {
    if f.has_mod() {
        GatePolicy::Mixed
    } else {
        GatePolicy::Diagonal
    }
}

fn compiled(f: &Formula) -> Ssm {
    compile_over(f, policy_for(f), NumericMode::Exact, &props()).expect("compiles")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn display_round_trips(f in formula()) {
        let text = f.to_string();
        prop_assert_eq!(parse(&text).unwrap(), f, "{}", text);
    }

    #[test]
    fn since_unfolds(f in formula(), g in formula(), t in trace(8)) {
        let lhs = Formula::since(f.clone(), g.clone());
        let rhs = Formula::or(g, Formula::and(f, Formula::yesterday(lhs.clone())));
        for i in 1..=t.len() {
            prop_assert_eq!(eval_at(&lhs, &t, i).unwrap(), eval_at(&rhs, &t, i).unwrap());
        }
    }

    #[test]
    fn evaluator_matches_naive_reading(f in formula(), t in trace(7)) {
        for i in 1..=t.len() {
            prop_assert_eq!(eval_at(&f, &t, i).unwrap(), naive(&f, &t, i), "{} at {} on {}", f, i, t);
        }
    }

    #[test]
    fn monitor_matches_eval(f in formula(), t in trace(10)) {
        let mut m = Monitor::new(&f);
        for (k, l) in t.letters().iter().enumerate() {
            let prefix = Trace::new(t.letters()[..=k].to_vec());
            prop_assert_eq!(m.step(l), eval(&f, &prefix));
        }
    }

    #[test]
    fn every_subformula_dimension_tracks_its_truth_value(f in formula(), t in trace(8)) {
        let ssm = compiled(&f);
        let g = ssm.formula().expect("compiled from a formula").clone();
        let val = Valuation::compute(&g, &t);
        let rt = run(&ssm, &t, NumericMode::Exact).unwrap();
        prop_assert_eq!(rt.accepted(), eval(&f, &t));
        let Some(last) = rt.layers.last() else {
            return Ok(());
        };
        let c = ssm.index().constant();
        for pos in 0..t.len() {
            let z = &last.z[pos];
            prop_assert_eq!(z[c].to_rational(), integer(1));
            for (sub, dim) in ssm.index().subformulas() {
                let want = integer(i64::from(val.at(sub, pos + 1).unwrap()));
                prop_assert_eq!(z[dim].to_rational(), want, "{} at {} in {} on {}", sub, pos + 1, g, t);
            }
        }
    }

    #[test]
    fn gate_entries_are_zero_quarter_or_one(f in formula()) {
        let ssm = compiled(&f);
        let allowed = [integer(0), rational(1, 4), integer(1)];
        for layer in ssm.layers() {
            let m = match &layer.gate {
                GateSpec::InputDiagonal(m) | GateSpec::ConstantMatrix(m) => m,
            };
            prop_assert!(m.iter().flatten().all(|q| allowed.contains(q)));
        }
    }

    #[test]
    fn model_json_round_trips(f in formula()) {
        let ssm = compiled(&f);
        let back = Ssm::from_json(&ssm.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), ssm.to_json());
    }

    #[test]
    fn log_precision_is_fixed_at_the_resolved_width(f in formula(), t in trace(12), frac in 3u32..6) {
        let ssm = compiled(&f);
        let int_bits = NumericMode::log_int_bits(t.len(), ssm.log_headroom());
        let logp = run(&ssm, &t, NumericMode::log_precision(frac, None)).unwrap();
        let fixed = run(&ssm, &t, NumericMode::fixed(int_bits, frac).unwrap()).unwrap();
        let raw = |r: &pastssm::ssm::RunTrace| r.outputs.iter().map(|v| v.to_rational()).collect::<Vec<_>>();
        prop_assert_eq!(raw(&logp), raw(&fixed));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pure_past_models_agree_with_exact_on_long_words(f in pltl(), t in trace(200)) {
        let ssm = compiled(&f);
        let exact = run(&ssm, &t, NumericMode::Exact).unwrap();
        let fixed = run(&ssm, &t, NumericMode::fixed(12, 4).unwrap()).unwrap();
        let rat = |r: &pastssm::ssm::RunTrace| r.outputs.iter().map(|v| v.to_rational()).collect::<Vec<_>>();
        prop_assert_eq!(rat(&exact), rat(&fixed));
        prop_assert_eq!(exact.accepted(), eval(&f, &t));
    }
}

#[test]
fn fixed_arithmetic_is_monotone() {
    for (i, f) in [(2, 1), (3, 2), (2, 3), (4, 0)] {
        let fmt = FixedFormat::new(i, f).unwrap();
        let grid: Vec<i64> = (fmt.min_raw()..=fmt.max_raw()).collect();
        for &a in &grid {
            for &a2 in grid.iter().filter(|&&x| x >= a) {
                for &b in &grid {
                    assert!(fmt.add(a, b) <= fmt.add(a2, b), "{fmt}: add {a} {a2} {b}");
                    if b >= 0 {
                        assert!(fmt.mul(a, b) <= fmt.mul(a2, b), "{fmt}: mul {a} {a2} {b}");
                    } else {
                        assert!(fmt.mul(a, b) >= fmt.mul(a2, b), "{fmt}: mul {a} {a2} {b}");
                    }
                }
            }
        }
    }
}

/// Every subformula of one depth lands in the same layer; each must still see
/// only its own inputs.
#[test]
fn merged_layers_do_not_interfere() {
    let f = parse("(a S b) & (b S a) & P a & P b & Y a & Y b & !a & #[a] - #[b] >= 0 & MOD[1,2]").unwrap();
    let ssm = compiled(&f);
    let g = ssm.formula().unwrap().clone();
    for t in Alphabet::PowerSet(props()).words(1, 6) {
        let val = Valuation::compute(&g, &t);
        let rt = run(&ssm, &t, NumericMode::Exact).unwrap();
        let z = rt.layers.last().unwrap();
        for (sub, dim) in ssm.index().subformulas() {
            for pos in 0..t.len() {
                let want = integer(i64::from(val.at(sub, pos + 1).unwrap()));
                assert_eq!(z.z[pos][dim].to_rational(), want, "{sub} at {} on {t}", pos + 1);
            }
        }
    }
}

#[test]
fn corpus_models_have_boolean_hidden_values() {
    let abc = Alphabet::Singletons(vec!["a".into(), "b".into(), "c".into()]);
    for f in corpus::parse_all(corpus::PLTL) {
        let ssm = compile_over(&f, GatePolicy::Diagonal, NumericMode::Exact, abc.propositions()).unwrap();
        for t in abc.words(1, 5) {
            let rt = run(&ssm, &t, NumericMode::Exact).unwrap();
            for layer in &rt.layers {
                for v in layer.z.iter().flatten() {
                    let q = v.to_rational();
                    assert!(q == integer(0) || q == integer(1), "{f} on {t}: {q}");
                }
            }
        }
    }
}
