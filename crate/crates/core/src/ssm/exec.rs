use std::collections::HashMap;

use super::fnn::{dot, sparse_row, PreparedFnn};
use super::model::{GateSpec, Ssm, SsmLayer};
use crate::error::ModelError;
use crate::formula::Formula;
use crate::numeric::{integer, Arithmetic, CompactExact, Numeric, NumericMode, Rational, ResolvedMode};
use crate::semantics::{Letter, Trace};

type SparseRows<V> = Vec<Vec<(usize, V)>>;

#[derive(Debug, Clone)]
enum PreparedGate<V> {
    Diagonal(SparseRows<V>),
    Constant(SparseRows<V>),
}

#[derive(Debug, Clone)]
struct PreparedLayer<V> {
    h0: Vec<V>,
    gate: PreparedGate<V>,
    inc: SparseRows<V>,
    outputs: Vec<(usize, PreparedFnn<V>)>,
}

impl<V: Clone> PreparedLayer<V> {
    fn new<A: Arithmetic<Value = V>>(layer: &SsmLayer, arith: &A) -> Self {
        let rows = |m: &[Vec<Rational>]| m.iter().map(|r| sparse_row(r, arith)).collect();
        Self {
            h0: layer.h0.iter().map(|q| arith.lift(q)).collect(),
            gate: match &layer.gate {
                GateSpec::InputDiagonal(m) => PreparedGate::Diagonal(rows(m)),
                GateSpec::ConstantMatrix(m) => PreparedGate::Constant(rows(m)),
            },
            inc: rows(&layer.inc),
            outputs: layer.outputs.iter().map(|g| (g.dim, g.net.prepare(arith))).collect(),
        }
    }

    /// Advances `h` in place on input `x` and returns `z`.
    fn step<A: Arithmetic<Value = V>>(&self, arith: &A, h: &mut Vec<V>, x: &[V]) -> Vec<V> {
        let next: Vec<V> = match &self.gate {
            PreparedGate::Diagonal(a) => a
                .iter()
                .zip(&self.inc)
                .zip(h.iter())
                .map(|((ar, br), hi)| {
                    let g = dot(arith, ar, x);
                    arith.add(&arith.mul(&g, hi), &dot(arith, br, x))
                })
                .collect(),
            PreparedGate::Constant(a) => a
                .iter()
                .zip(&self.inc)
                .map(|(ar, br)| arith.add(&dot(arith, ar, h), &dot(arith, br, x)))
                .collect(),
        };
        *h = next;
        let mut z = h.clone();
        for (dim, net) in &self.outputs {
            z[*dim] = net.eval(arith, h).swap_remove(0);
        }
        z
    }
}

/// Hidden states of every layer after some prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct State<V> {
    hidden: Vec<Vec<V>>,
    position: usize,
}

impl<V> State<V> {
    pub fn position(&self) -> usize {
        self.position
    }

    pub fn hidden(&self) -> &[Vec<V>] {
        &self.hidden
    }
}

/// One position's values: per layer `(h_t, z_t)`, then `y_t`.
#[derive(Debug, Clone)]
pub struct StepRecord<V> {
    pub layers: Vec<(Vec<V>, Vec<V>)>,
    pub output: V,
}

/// A model with all weights quantized into one arithmetic.
#[derive(Debug, Clone)]
pub struct Executor<A: Arithmetic> {
    arith: A,
    dim: usize,
    constant: usize,
    propositions: HashMap<String, usize>,
    true_dims: Vec<usize>,
    layers: Vec<PreparedLayer<A::Value>>,
    out: PreparedFnn<A::Value>,
    one: A::Value,
}

impl<A: Arithmetic> Executor<A> {
    pub fn new(ssm: &Ssm, arith: A) -> Self {
        let index = ssm.index();
        Self {
            dim: ssm.dim(),
            constant: index.constant(),
            propositions: index
                .propositions()
                .iter()
                .enumerate()
                .map(|(i, p)| (p.clone(), i))
                .collect(),
            true_dims: index.of(&Formula::True).into_iter().collect(),
            layers: ssm.layers().iter().map(|l| PreparedLayer::new(l, &arith)).collect(),
            out: ssm.out().prepare(&arith),
            one: arith.lift(&integer(1)),
            arith,
        }
    }

    pub fn arith(&self) -> &A {
        &self.arith
    }

    /// `x_t`: constant and `true` dimensions 1, propositions by membership,
    /// everything else 0.
    pub fn embed(&self, letter: &Letter) -> Result<Vec<A::Value>, ModelError> {
        let mut x = vec![self.arith.zero(); self.dim];
        x[self.constant] = self.one.clone();
        for &i in &self.true_dims {
            x[i] = self.one.clone();
        }
        for p in letter {
            let i = *self
                .propositions
                .get(p)
                .ok_or_else(|| ModelError::UnknownProposition(p.clone()))?;
            x[i] = self.one.clone();
        }
        Ok(x)
    }

    pub fn initial(&self) -> State<A::Value> {
        State {
            hidden: self.layers.iter().map(|l| l.h0.clone()).collect(),
            position: 0,
        }
    }

    /// Consumes one letter and returns `y_t`.
    pub fn step(&self, state: &mut State<A::Value>, letter: &Letter) -> Result<A::Value, ModelError> {
        let mut x = self.embed(letter)?;
        for (layer, h) in self.layers.iter().zip(&mut state.hidden) {
            x = layer.step(&self.arith, h, &x);
        }
        state.position += 1;
        Ok(self.out.eval(&self.arith, &x).swap_remove(0))
    }

    /// Like [`Executor::step`], keeping every intermediate vector.
    pub fn step_recorded(
        &self,
        state: &mut State<A::Value>,
        letter: &Letter,
    ) -> Result<StepRecord<A::Value>, ModelError> {
        let mut x = self.embed(letter)?;
        let mut layers = Vec::with_capacity(self.layers.len());
        for (layer, h) in self.layers.iter().zip(&mut state.hidden) {
            x = layer.step(&self.arith, h, &x);
            layers.push((h.clone(), x.clone()));
        }
        state.position += 1;
        let output = self.out.eval(&self.arith, &x).swap_remove(0);
        Ok(StepRecord { layers, output })
    }

    pub fn is_one(&self, y: &A::Value) -> bool {
        *y == self.one
    }

    /// `y_n = 1` on the whole trace.
    pub fn accepts(&self, trace: &Trace) -> Result<bool, ModelError> {
        if trace.is_empty() {
            return Err(ModelError::EmptyTrace);
        }
        let mut state = self.initial();
        let mut y = self.arith.zero();
        for letter in trace.letters() {
            y = self.step(&mut state, letter)?;
        }
        Ok(self.is_one(&y))
    }
}

/// Values of one layer over a run.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    pub h: Vec<Vec<Numeric>>,
    pub z: Vec<Vec<Numeric>>,
}

/// Every hidden, layer-output and final-output value of a run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub mode: ResolvedMode,
    pub layers: Vec<LayerTrace>,
    pub outputs: Vec<Numeric>,
}

impl RunTrace {
    pub fn accepted(&self) -> bool {
        self.outputs.last().is_some_and(|y| y.to_rational() == integer(1))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vecs = |vs: &[Vec<Numeric>]| -> serde_json::Value {
            vs.iter()
                .map(|v| v.iter().map(ToString::to_string).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .into()
        };
        serde_json::json!({
            "mode": self.mode.to_string(),
            "accepted": self.accepted(),
            "outputs": self.outputs.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "layers": self.layers.iter().map(|l| serde_json::json!({
                "h": vecs(&l.h),
                "z": vecs(&l.z),
            })).collect::<Vec<_>>(),
        })
    }
}

fn run_with<A: Arithmetic>(ssm: &Ssm, arith: A, trace: &Trace, mode: ResolvedMode) -> Result<RunTrace, ModelError> {
    let exec = Executor::new(ssm, arith);
    let num = |v: &A::Value| exec.arith().to_numeric(v);
    let mut layers = vec![
        LayerTrace {
            h: Vec::new(),
            z: Vec::new()
        };
        ssm.layers().len()
    ];
    let mut outputs = Vec::with_capacity(trace.len());
    let mut state = exec.initial();
    for letter in trace.letters() {
        let rec = exec.step_recorded(&mut state, letter)?;
        for (lt, (h, z)) in layers.iter_mut().zip(&rec.layers) {
            lt.h.push(h.iter().map(num).collect());
            lt.z.push(z.iter().map(num).collect());
        }
        outputs.push(num(&rec.output));
    }
    Ok(RunTrace { mode, layers, outputs })
}

/// Runs `ssm` on a nonempty trace. Log-precision widths are fixed from
/// `|trace|` before execution.
pub fn run(ssm: &Ssm, trace: &Trace, mode: NumericMode) -> Result<RunTrace, ModelError> {
    if trace.is_empty() {
        return Err(ModelError::EmptyTrace);
    }
    match mode.resolve(trace.len(), ssm.log_headroom())? {
        ResolvedMode::Exact => run_with(ssm, CompactExact, trace, ResolvedMode::Exact),
        r @ ResolvedMode::Fixed(fmt) => run_with(ssm, fmt, trace, r),
    }
}

pub fn accepts(ssm: &Ssm, trace: &Trace, mode: NumericMode) -> Result<bool, ModelError> {
    if trace.is_empty() {
        return Err(ModelError::EmptyTrace);
    }
    match mode.resolve(trace.len(), ssm.log_headroom())? {
        ResolvedMode::Exact => Executor::new(ssm, CompactExact).accepts(trace),
        ResolvedMode::Fixed(fmt) => Executor::new(ssm, fmt).accepts(trace),
    }
}
