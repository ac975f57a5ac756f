use serde::{Deserialize, Serialize};

use super::serde_rational::{rational_str, rational_vec};
use crate::error::ModelError;
use crate::numeric::{Arithmetic, Rational};

/// `relu(Σ weights_i · x_i + bias)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    #[serde(with = "rational_vec")]
    pub weights: Vec<Rational>,
    #[serde(with = "rational_str")]
    pub bias: Rational,
}

impl Node {
    pub fn new(weights: Vec<Rational>, bias: Rational) -> Self {
        Self { weights, bias }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub nodes: Vec<Node>,
}

/// Feed-forward network with a ReLU on every node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fnn {
    input_dim: usize,
    layers: Vec<Layer>,
}

impl Fnn {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self, ModelError> {
        let net = Self { input_dim, layers };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut width = self.input_dim;
        for layer in &self.layers {
            if layer.nodes.is_empty() {
                return Err(ModelError::Invalid("empty network layer".into()));
            }
            for node in &layer.nodes {
                if node.weights.len() != width {
                    return Err(ModelError::Dimension {
                        expected: width,
                        got: node.weights.len(),
                    });
                }
            }
            width = layer.nodes.len();
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(self.input_dim, |l| l.nodes.len())
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// The same network reading its single input from coordinate `source`
    /// of a `dim`-vector.
    pub fn lift(&self, dim: usize, source: usize) -> Self {
        assert_eq!(self.input_dim, 1, "only scalar networks can be lifted");
        let mut layers = self.layers.clone();
        if let Some(first) = layers.first_mut() {
            for node in &mut first.nodes {
                let w = node.weights[0].clone();
                node.weights = vec![Rational::default(); dim];
                node.weights[source] = w;
            }
        }
        Self { input_dim: dim, layers }
    }

    pub fn prepare<A: Arithmetic>(&self, arith: &A) -> PreparedFnn<A::Value> {
        PreparedFnn {
            input_dim: self.input_dim,
            layers: self
                .layers
                .iter()
                .map(|l| {
                    l.nodes
                        .iter()
                        .map(|n| PreparedNode {
                            weights: sparse_row(&n.weights, arith),
                            bias: arith.lift(&n.bias),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Evaluates in the given arithmetic.
    pub fn eval<A: Arithmetic>(&self, arith: &A, input: &[A::Value]) -> Result<Vec<A::Value>, ModelError> {
        if input.len() != self.input_dim {
            return Err(ModelError::Dimension {
                expected: self.input_dim,
                got: input.len(),
            });
        }
        Ok(self.prepare(arith).eval(arith, input))
    }
}

/// Nonzero entries of a weight row after quantization, in index order.
pub(crate) fn sparse_row<A: Arithmetic>(row: &[Rational], arith: &A) -> Vec<(usize, A::Value)> {
    row.iter()
        .enumerate()
        .map(|(i, w)| (i, arith.lift(w)))
        .filter(|(_, w)| !arith.is_zero(w))
        .collect()
}

/// Left-to-right dot product over a sparse row. Skipped zero weights
/// contribute exactly nothing in every regime.
pub(crate) fn dot<A: Arithmetic>(arith: &A, row: &[(usize, A::Value)], x: &[A::Value]) -> A::Value {
    row.iter()
        .fold(arith.zero(), |acc, (i, w)| arith.add(&acc, &arith.mul(w, &x[*i])))
}

#[derive(Debug, Clone)]
pub(crate) struct PreparedNode<V> {
    weights: Vec<(usize, V)>,
    bias: V,
}

/// A network with weights quantized into one arithmetic.
#[derive(Debug, Clone)]
pub struct PreparedFnn<V> {
    input_dim: usize,
    layers: Vec<Vec<PreparedNode<V>>>,
}

impl<V: Clone> PreparedFnn<V> {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn eval<A: Arithmetic<Value = V>>(&self, arith: &A, input: &[V]) -> Vec<V> {
        let mut cur = input.to_vec();
        for layer in &self.layers {
            cur = layer
                .iter()
                .map(|n| arith.relu(&arith.add(&dot(arith, &n.weights, &cur), &n.bias)))
                .collect();
        }
        cur
    }
}
