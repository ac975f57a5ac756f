//! Formula to SSM translation.

pub mod gadgets;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::CompileError;
use crate::formula::{normalize_mod_lcm, Comparator, Formula, SubformulaIndex};
use crate::numeric::{integer, rational, NumericMode, Rational};
use crate::ssm::{Fnn, GatePolicy, GateSpec, OutputGadget, Ssm, SsmLayer};

/// `weight · e_target e_source^T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyMatrix {
    pub target: usize,
    pub source: usize,
    pub weight: Rational,
}

impl CopyMatrix {
    pub fn new(target: usize, source: usize, weight: Rational) -> Self {
        Self { target, source, weight }
    }

    fn add_to(&self, m: &mut [Vec<Rational>]) {
        m[self.target][self.source] += &self.weight;
    }
}

/// Whether a layer's gate reads the input or is a fixed matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    InputDiagonal,
    Constant,
}

/// What one subformula contributes to its layer: the gate term `A_ψ`, the
/// increment term `B_ψ - I`, and the gadget writing `ι(ψ)`.
#[derive(Debug, Clone)]
pub struct LayerFragment {
    pub target: usize,
    pub gate: Vec<CopyMatrix>,
    pub inc: Vec<CopyMatrix>,
    pub gadget: Option<Fnn>,
}

fn policy_error(policy: GatePolicy, f: &Formula, reason: &str) -> CompileError {
    CompileError::Policy {
        policy: policy.to_string(),
        subformula: f.to_string(),
        reason: reason.into(),
    }
}

fn gate_kind(policy: GatePolicy) -> GateKind {
    match policy {
        GatePolicy::Diagonal | GatePolicy::Mixed => GateKind::InputDiagonal,
        GatePolicy::TimeInvariant | GatePolicy::DiagonalTimeInvariant => GateKind::Constant,
    }
}

/// Builds the contribution of `ψ` (depth ≥ 1) to its layer.
///
/// The input-diagonal cases gate on the constant dimension for `Y`, `P` and
/// counting, which under a constant gate becomes the self-loop `A[ψ][ψ]`.
pub fn compile_layer(
    psi: &Formula,
    index: &SubformulaIndex,
    policy: GatePolicy,
) -> Result<LayerFragment, CompileError> {
    let dim = |f: &Formula| {
        index
            .of(f)
            .unwrap_or_else(|| panic!("subformula {f} missing from the index"))
    };
    let t = dim(psi);
    let one = index.constant();
    let kind = gate_kind(policy);
    let c = |src: usize, w: Rational| CopyMatrix::new(t, src, w);
    // Gate that multiplies h_{t-1}[ψ] by `w` at every step.
    let self_loop = |w: Rational| match kind {
        GateKind::InputDiagonal => vec![c(one, w)],
        GateKind::Constant => vec![c(t, w)],
    };
    let n = |cmp, b| Some(gadgets::comparator(cmp, b).lift(index.dim(), t));
    let frag = match psi {
        Formula::Not(g) => LayerFragment {
            target: t,
            gate: Vec::new(),
            inc: vec![c(one, integer(1)), c(dim(g), integer(-1))],
            gadget: None,
        },
        Formula::And(g, h) => LayerFragment {
            target: t,
            gate: Vec::new(),
            inc: vec![c(dim(g), integer(1)), c(dim(h), integer(1)), c(one, integer(-1))],
            gadget: n(Comparator::Ge, 1),
        },
        Formula::Previously(g) => LayerFragment {
            target: t,
            gate: self_loop(integer(1)),
            inc: vec![c(dim(g), integer(1))],
            gadget: n(Comparator::Ge, 1),
        },
        Formula::Count(atom) => LayerFragment {
            target: t,
            gate: self_loop(integer(1)),
            inc: atom
                .terms
                .iter()
                .map(|term| c(dim(&term.formula), integer(term.coeff)))
                .collect(),
            gadget: n(atom.cmp, atom.threshold as i64),
        },
        Formula::Since(g, h) => {
            if kind == GateKind::Constant {
                return Err(policy_error(policy, psi, "since requires input-dependent gate"));
            }
            LayerFragment {
                target: t,
                gate: vec![c(dim(g), integer(1))],
                inc: vec![c(dim(h), integer(1))],
                gadget: Some(gadgets::clamp01().lift(index.dim(), t)),
            }
        }
        Formula::Yesterday(g) => LayerFragment {
            target: t,
            gate: self_loop(rational(1, 4)),
            inc: vec![c(dim(g), integer(1))],
            gadget: Some(gadgets::prev_decoder().lift(index.dim(), t)),
        },
        Formula::Atom(_) | Formula::True | Formula::False | Formula::Mod { .. } => {
            panic!("depth-0 formula {psi} has no layer")
        }
    };
    Ok(frag)
}

fn zero_matrix(d: usize) -> Vec<Vec<Rational>> {
    vec![vec![Rational::zero(); d]; d]
}

fn identity(d: usize) -> Vec<Vec<Rational>> {
    let mut m = zero_matrix(d);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Rational::one();
    }
    m
}

/// Merges fragments into one layer: `A = Σ A_ψ`, `B = I + Σ (B_ψ - I)`,
/// `h0 = 0`.
pub fn assemble_layer(d: usize, fragments: &[LayerFragment], kind: GateKind) -> SsmLayer {
    let mut a = zero_matrix(d);
    let mut b = identity(d);
    let mut outputs = Vec::new();
    for frag in fragments {
        frag.gate.iter().for_each(|cm| cm.add_to(&mut a));
        frag.inc.iter().for_each(|cm| cm.add_to(&mut b));
        if let Some(net) = &frag.gadget {
            outputs.push(OutputGadget {
                dim: frag.target,
                net: net.clone(),
            });
        }
    }
    SsmLayer {
        h0: vec![Rational::zero(); d],
        gate: match kind {
            GateKind::InputDiagonal => GateSpec::InputDiagonal(a),
            GateKind::Constant => GateSpec::ConstantMatrix(a),
        },
        inc: b,
        outputs,
    }
}

/// Position counter modulo `m`: cyclic permutation on the MOD block, started
/// at remainder 0, plus a copy of each block entry into the dimension of the
/// matching `MOD` atom.
pub fn make_mod_layer(index: &SubformulaIndex) -> Option<SsmLayer> {
    let block = index.mod_block()?;
    let d = index.dim();
    let m = block.modulus;
    let mut a = zero_matrix(d);
    let mut b = identity(d);
    for r in 0..m {
        a[block.dim((r + 1) % m)][block.dim(r)] = Rational::one();
        b[block.dim(r)][block.dim(r)] = Rational::zero();
    }
    let mut h0 = vec![Rational::zero(); d];
    h0[block.dim(0)] = Rational::one();
    let outputs = (0..m)
        .filter_map(|r| {
            let dim = index.of(&Formula::modulo(r, m))?;
            Some(OutputGadget {
                dim,
                net: gadgets::copy().lift(d, block.dim(r)),
            })
        })
        .collect();
    Some(SsmLayer {
        h0,
        gate: GateSpec::ConstantMatrix(a),
        inc: b,
        outputs,
    })
}

/// First subformula violating `policy`, with the reason.
fn policy_violation(f: &Formula, policy: GatePolicy) -> Option<(&Formula, &'static str)> {
    let (no_since, no_mod) = match policy {
        GatePolicy::Diagonal => (false, true),
        GatePolicy::TimeInvariant => (true, false),
        GatePolicy::DiagonalTimeInvariant => (true, true),
        GatePolicy::Mixed => (false, false),
    };
    f.subformulas().into_iter().find_map(|sub| match sub {
        Formula::Since(..) if no_since => Some((sub, "since requires input-dependent gate")),
        Formula::Mod { .. } if no_mod => Some((sub, "MOD requires a non-diagonal time-invariant layer")),
        _ => None,
    })
}

/// Smallest `k` with `2^k >= x` for `x >= 1`.
fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

/// Largest absolute weight or bias anywhere in the model.
fn max_magnitude(layers: &[SsmLayer], out: &Fnn) -> Rational {
    let mut best = Rational::zero();
    let mut see = |q: &Rational| {
        if q.abs() > best {
            best = q.abs();
        }
    };
    let see_net = |net: &Fnn, see: &mut dyn FnMut(&Rational)| {
        for l in net.layers() {
            for node in &l.nodes {
                node.weights.iter().for_each(&mut *see);
                see(&node.bias);
            }
        }
    };
    for layer in layers {
        layer.gate.matrix().iter().flatten().for_each(&mut see);
        layer.inc.iter().flatten().for_each(&mut see);
        for g in &layer.outputs {
            see_net(&g.net, &mut see);
        }
    }
    see_net(out, &mut see);
    best
}

/// Headroom for `logp:F:auto`: enough for the weighted counters and for the
/// largest constant in the model at the shortest input.
fn auto_headroom(f: &Formula, layers: &[SsmLayer], out: &Fnn) -> u32 {
    let counters = ceil_log2(1 + f.count_weight()) + 1;
    let w = max_magnitude(layers, out)
        .ceil()
        .to_integer()
        .to_u128()
        .unwrap_or(u128::MAX);
    // Integer bits needed so that `w` fits below 2^I; the length term
    // contributes at least 2 bits.
    let weight_bits = ceil_log2(w.saturating_add(1));
    counters.max(weight_bits.saturating_sub(2))
}

/// Compiles `f` under `policy` over the propositions of `f`.
pub fn compile(f: &Formula, policy: GatePolicy, mode_hint: NumericMode) -> Result<Ssm, CompileError> {
    compile_over(f, policy, mode_hint, &[])
}

/// Compiles `f` under `policy`; `props` fixes the leading proposition
/// dimensions (the formula's own propositions are appended).
pub fn compile_over(
    f: &Formula,
    policy: GatePolicy,
    mode_hint: NumericMode,
    props: &[String],
) -> Result<Ssm, CompileError> {
    if let Some((sub, reason)) = policy_violation(f, policy) {
        return Err(policy_error(policy, sub, reason));
    }
    let f = if f.has_mod() { normalize_mod_lcm(f)? } else { f.clone() };
    let index = SubformulaIndex::build(&f, props, f.has_mod())?;
    let d = index.dim();

    let mut layers: Vec<SsmLayer> = make_mod_layer(&index).into_iter().collect();
    for level in f.sequential_decomposition().iter().skip(1) {
        let fragments = level
            .iter()
            .map(|psi| compile_layer(psi, &index, policy))
            .collect::<Result<Vec<_>, _>>()?;
        layers.push(assemble_layer(d, &fragments, gate_kind(policy)));
    }
    let root = index.of(&f).expect("root formula is indexed");
    let out = gadgets::comparator(Comparator::Eq, 1).lift(d, root);

    let mut warnings = Vec::new();
    if f.has_negative_count() && mode_hint.is_constant_width() {
        warnings.push(format!(
            "precision-unsound: counting with negative coefficients under {mode_hint} can saturate"
        ));
    }
    if let Some(fb) = mode_hint.frac_bits() {
        if fb < 3 && f.has_yesterday() {
            warnings.push(format!(
                "precision-unsound: yesterday needs at least 3 fractional bits, {mode_hint} has {fb}"
            ));
        }
    }
    let headroom = auto_headroom(&f, &layers, &out);
    Ok(Ssm::new(index, Some(f), layers, out, policy, headroom, warnings).expect("compiled models are well formed"))
}
