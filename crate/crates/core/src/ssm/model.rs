use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::fnn::Fnn;
use super::serde_rational::{rational_mat, rational_vec};
use crate::error::{ModelError, ParseError};
use crate::formula::{Formula, ModBlock, SubformulaIndex};
use crate::numeric::Rational;

/// Which gate kinds a model (or a compilation) may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatePolicy {
    /// Input-dependent diagonal gates.
    Diagonal,
    /// Constant gate matrices.
    TimeInvariant,
    /// Each layer is diagonal or time-invariant.
    Mixed,
    /// Constant diagonal gate matrices.
    DiagonalTimeInvariant,
}

impl GatePolicy {
    pub fn cli_name(self) -> &'static str {
        match self {
            Self::Diagonal => "diagonal",
            Self::TimeInvariant => "timeinv",
            Self::Mixed => "mixed",
            Self::DiagonalTimeInvariant => "diagti",
        }
    }

    /// True if every gate of a model with this policy is diagonal.
    pub fn is_diagonal(self) -> bool {
        matches!(self, Self::Diagonal | Self::DiagonalTimeInvariant)
    }
}

impl fmt::Display for GatePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for GatePolicy {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "diagonal" => Ok(Self::Diagonal),
            "timeinv" | "time-invariant" => Ok(Self::TimeInvariant),
            "mixed" => Ok(Self::Mixed),
            "diagti" => Ok(Self::DiagonalTimeInvariant),
            _ => Err(ParseError::Syntax {
                pos: 0,
                msg: format!("unknown policy `{s}` (expected diagonal, timeinv, mixed or diagti)"),
            }),
        }
    }
}

/// Gate of one layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GateDoc", from = "GateDoc")]
pub enum GateSpec {
    /// `gate(x) = diag(A·x)`.
    InputDiagonal(Vec<Vec<Rational>>),
    /// `gate(x) = A`.
    ConstantMatrix(Vec<Vec<Rational>>),
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GateKind {
    InputDiagonal,
    ConstantMatrix,
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    kind: GateKind,
    #[serde(with = "rational_mat")]
    matrix: Vec<Vec<Rational>>,
}

impl From<GateSpec> for GateDoc {
    fn from(g: GateSpec) -> Self {
        match g {
            GateSpec::InputDiagonal(matrix) => Self {
                kind: GateKind::InputDiagonal,
                matrix,
            },
            GateSpec::ConstantMatrix(matrix) => Self {
                kind: GateKind::ConstantMatrix,
                matrix,
            },
        }
    }
}

impl From<GateDoc> for GateSpec {
    fn from(d: GateDoc) -> Self {
        match d.kind {
            GateKind::InputDiagonal => Self::InputDiagonal(d.matrix),
            GateKind::ConstantMatrix => Self::ConstantMatrix(d.matrix),
        }
    }
}

impl GateSpec {
    pub fn matrix(&self) -> &[Vec<Rational>] {
        match self {
            Self::InputDiagonal(m) | Self::ConstantMatrix(m) => m,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::ConstantMatrix(_))
    }

    fn is_diagonal_constant(&self) -> bool {
        match self {
            Self::ConstantMatrix(m) => m
                .iter()
                .enumerate()
                .all(|(i, row)| row.iter().enumerate().all(|(j, v)| i == j || v.is_zero())),
            Self::InputDiagonal(_) => false,
        }
    }
}

/// Output gadget writing one dimension of `z_t` from the whole `h_t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputGadget {
    pub dim: usize,
    pub net: Fnn,
}

/// `h_t = gate(x_t)·h_{t-1} + inc·x_t`, then `z_t = h_t` with each gadget's
/// dimension overwritten.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsmLayer {
    #[serde(with = "rational_vec")]
    pub h0: Vec<Rational>,
    pub gate: GateSpec,
    #[serde(with = "rational_mat")]
    pub inc: Vec<Vec<Rational>>,
    pub outputs: Vec<OutputGadget>,
}

impl SsmLayer {
    fn validate(&self, d: usize) -> Result<(), ModelError> {
        let square = |m: &[Vec<Rational>], what: &str| -> Result<(), ModelError> {
            if m.len() != d || m.iter().any(|r| r.len() != d) {
                return Err(ModelError::Invalid(format!("{what} is not {d}x{d}")));
            }
            Ok(())
        };
        if self.h0.len() != d {
            return Err(ModelError::Dimension {
                expected: d,
                got: self.h0.len(),
            });
        }
        square(self.gate.matrix(), "gate matrix")?;
        square(&self.inc, "increment matrix")?;
        let mut seen = vec![false; d];
        for g in &self.outputs {
            if g.dim >= d || std::mem::replace(&mut seen[g.dim], true) {
                return Err(ModelError::Invalid(format!(
                    "output dimension {} repeated or out of range",
                    g.dim
                )));
            }
            g.net.validate()?;
            if g.net.input_dim() != d || g.net.output_dim() != 1 {
                return Err(ModelError::Invalid(format!(
                    "gadget for dimension {} must map {d} inputs to 1 output",
                    g.dim
                )));
            }
        }
        Ok(())
    }
}

/// Embedding, layers and output network of a compiled model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ssm {
    pub(crate) index: SubformulaIndex,
    pub(crate) formula: Option<Formula>,
    pub(crate) layers: Vec<SsmLayer>,
    pub(crate) out: Fnn,
    pub(crate) policy: GatePolicy,
    pub(crate) log_headroom: u32,
    pub(crate) warnings: Vec<String>,
}

impl Ssm {
    pub fn new(
        index: SubformulaIndex,
        formula: Option<Formula>,
        layers: Vec<SsmLayer>,
        out: Fnn,
        policy: GatePolicy,
        log_headroom: u32,
        warnings: Vec<String>,
    ) -> Result<Self, ModelError> {
        let ssm = Self {
            index,
            formula,
            layers,
            out,
            policy,
            log_headroom,
            warnings,
        };
        ssm.validate()?;
        Ok(ssm)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let d = self.dim();
        for (k, layer) in self.layers.iter().enumerate() {
            layer.validate(d)?;
            let ok = match self.policy {
                GatePolicy::Diagonal => !layer.gate.is_constant(),
                GatePolicy::TimeInvariant => layer.gate.is_constant(),
                GatePolicy::DiagonalTimeInvariant => layer.gate.is_diagonal_constant(),
                GatePolicy::Mixed => true,
            };
            if !ok {
                return Err(ModelError::Invalid(format!(
                    "layer {k} gate violates the {} policy",
                    self.policy
                )));
            }
        }
        self.out.validate()?;
        if self.out.input_dim() != d {
            return Err(ModelError::Dimension {
                expected: d,
                got: self.out.input_dim(),
            });
        }
        if let Some(f) = &self.formula {
            if self.index.of(f).is_none() {
                return Err(ModelError::Invalid(format!("formula {f} has no dimension")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn index(&self) -> &SubformulaIndex {
        &self.index
    }

    pub fn formula(&self) -> Option<&Formula> {
        self.formula.as_ref()
    }

    pub fn layers(&self) -> &[SsmLayer] {
        &self.layers
    }

    pub fn out(&self) -> &Fnn {
        &self.out
    }

    pub fn policy(&self) -> GatePolicy {
        self.policy
    }

    pub fn propositions(&self) -> &[String] {
        self.index.propositions()
    }

    /// Headroom used by `logp:F:auto`.
    pub fn log_headroom(&self) -> u32 {
        self.log_headroom
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn mod_block(&self) -> Option<ModBlock> {
        self.index.mod_block()
    }
}

#[derive(Serialize, Deserialize)]
struct IndexEntry {
    subformula: String,
    index: usize,
}

/// On-disk layout of a model.
#[derive(Serialize, Deserialize)]
struct ModelDoc {
    dimension: usize,
    propositions: Vec<String>,
    constant_index: usize,
    mod_block: Option<ModBlock>,
    index: Vec<IndexEntry>,
    formula: Option<String>,
    policy: GatePolicy,
    log_headroom: u32,
    #[serde(default)]
    warnings: Vec<String>,
    layers: Vec<SsmLayer>,
    out: Fnn,
}

impl Serialize for Ssm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ModelDoc {
            dimension: self.dim(),
            propositions: self.index.propositions().to_vec(),
            constant_index: self.index.constant(),
            mod_block: self.index.mod_block(),
            index: self
                .index
                .subformulas()
                .map(|(f, i)| IndexEntry {
                    subformula: f.to_string(),
                    index: i,
                })
                .collect(),
            formula: self.formula.as_ref().map(ToString::to_string),
            policy: self.policy,
            log_headroom: self.log_headroom,
            warnings: self.warnings.clone(),
            layers: self.layers.clone(),
            out: self.out.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ssm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = ModelDoc::deserialize(d)?;
        let parse = |s: &str| crate::formula::parse(s).map_err(|e| D::Error::custom(format!("{s}: {e}")));
        let subs = doc
            .index
            .iter()
            .map(|e| Ok((parse(&e.subformula)?, e.index)))
            .collect::<Result<Vec<_>, D::Error>>()?;
        let index = SubformulaIndex::from_parts(doc.propositions, subs, doc.mod_block, doc.dimension)
            .map_err(D::Error::custom)?;
        if index.constant() != doc.constant_index {
            return Err(D::Error::custom("constant dimension must be the last one"));
        }
        let formula = doc.formula.as_deref().map(parse).transpose()?;
        Ssm::new(
            index,
            formula,
            doc.layers,
            doc.out,
            doc.policy,
            doc.log_headroom,
            doc.warnings,
        )
        .map_err(D::Error::custom)
    }
}

impl Ssm {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
