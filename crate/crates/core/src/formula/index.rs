use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::Formula;
use crate::error::IndexError;

/// Contiguous run of hidden dimensions holding the one-hot position counter
/// modulo `modulus`. Dimension `start + r` is hot at positions `t ≡ r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModBlock {
    pub start: usize,
    pub modulus: u64,
}

impl ModBlock {
    pub fn dim(&self, remainder: u64) -> usize {
        self.start + remainder as usize
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.modulus as usize
    }
}

/// Injective assignment of hidden dimensions (0-based).
///
/// Layout: propositions `0..|P|` in declaration order, then the MOD block
/// (if any), then every other distinct subformula ordered by nesting depth,
/// and finally the constant-1 dimension at `dim - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubformulaIndex {
    propositions: Vec<String>,
    subformulas: Vec<Formula>,
    lookup: HashMap<Formula, usize>,
    mod_block: Option<ModBlock>,
    dim: usize,
}

impl SubformulaIndex {
    /// Builds the index for `f` over the proposition universe `props`
    /// (extended by any proposition of `f` missing from it).
    pub fn build(f: &Formula, props: &[String], with_mod_block: bool) -> Result<Self, IndexError> {
        let mut propositions: Vec<String> = Vec::new();
        let mut seen = BTreeSet::new();
        for p in props.iter().cloned().chain(f.propositions()) {
            if seen.insert(p.clone()) {
                propositions.push(p);
            }
        }
        let moduli = f.moduli();
        if with_mod_block && moduli.len() > 1 {
            return Err(IndexError::MixedModuli(moduli.into_iter().collect()));
        }
        let mut lookup: HashMap<Formula, usize> = propositions
            .iter()
            .enumerate()
            .map(|(i, p)| (Formula::Atom(p.clone()), i))
            .collect();
        let mut next = propositions.len();
        let mod_block = match moduli.first() {
            Some(&modulus) if with_mod_block => {
                let block = ModBlock { start: next, modulus };
                next += modulus as usize;
                Some(block)
            }
            _ => None,
        };
        let mut subformulas = Vec::new();
        for level in f.sequential_decomposition() {
            for sub in level {
                if !lookup.contains_key(sub) {
                    lookup.insert(sub.clone(), next);
                    subformulas.push(sub.clone());
                    next += 1;
                }
            }
        }
        Ok(Self {
            propositions,
            subformulas,
            lookup,
            mod_block,
            dim: next + 1,
        })
    }

    /// Reassembles an index from its parts, checking the layout invariants.
    pub fn from_parts(
        propositions: Vec<String>,
        subformulas: Vec<(Formula, usize)>,
        mod_block: Option<ModBlock>,
        dim: usize,
    ) -> Result<Self, String> {
        let mut lookup = HashMap::new();
        let mut used = vec![false; dim];
        let mut claim = |i: usize, what: &str| -> Result<(), String> {
            match used.get_mut(i) {
                Some(u) if !*u => {
                    *u = true;
                    Ok(())
                }
                Some(_) => Err(format!("dimension {i} assigned twice ({what})")),
                None => Err(format!("dimension {i} out of range for d = {dim} ({what})")),
            }
        };
        for (i, p) in propositions.iter().enumerate() {
            claim(i, p)?;
            lookup.insert(Formula::Atom(p.clone()), i);
        }
        if let Some(b) = mod_block {
            for i in b.range() {
                claim(i, "MOD block")?;
            }
        }
        claim(dim.checked_sub(1).ok_or("zero dimension")?, "constant")?;
        let mut subs = Vec::new();
        for (f, i) in subformulas {
            if matches!(f, Formula::Atom(_)) {
                return Err(format!("proposition {f} listed as subformula"));
            }
            claim(i, &f.to_string())?;
            lookup.insert(f.clone(), i);
            subs.push((i, f));
        }
        subs.sort_by_key(|(i, _)| *i);
        Ok(Self {
            propositions,
            subformulas: subs.into_iter().map(|(_, f)| f).collect(),
            lookup,
            mod_block,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self) -> usize {
        self.dim - 1
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    /// Non-proposition subformulas in index order.
    pub fn subformulas(&self) -> impl Iterator<Item = (&Formula, usize)> {
        self.subformulas.iter().map(|f| (f, self.lookup[f]))
    }

    pub fn mod_block(&self) -> Option<ModBlock> {
        self.mod_block
    }

    pub fn of(&self, f: &Formula) -> Option<usize> {
        self.lookup.get(f).copied()
    }

    pub fn proposition(&self, name: &str) -> Option<usize> {
        self.propositions.iter().position(|p| p == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn build(s: &str, props: &[&str], block: bool) -> SubformulaIndex {
        let props: Vec<String> = props.iter().map(|s| s.to_string()).collect();
        SubformulaIndex::build(&parse(s).unwrap(), &props, block).unwrap()
    }

    #[test]
    fn dimension_examples() {
        let ix = build("P a", &[], false);
        assert_eq!(ix.dim(), 3);
        assert_eq!(ix.of(&parse("a").unwrap()), Some(0));
        assert_eq!(ix.of(&parse("P a").unwrap()), Some(1));
        assert_eq!(ix.constant(), 2);

        assert_eq!(build("a & a", &[], false).dim(), 3);
        let m = build("MOD[0,2]", &[], true);
        assert_eq!(m.dim(), 4);
        assert_eq!(m.mod_block(), Some(ModBlock { start: 0, modulus: 2 }));
        assert_eq!(m.of(&parse("MOD[0,2]").unwrap()), Some(2));
    }

    #[test]
    fn declared_propositions_come_first() {
        let ix = build("b S a", &["c", "a"], false);
        assert_eq!(ix.propositions(), ["c", "a", "b"]);
        assert_eq!(ix.proposition("b"), Some(2));
        assert_eq!(ix.dim(), 5);
    }

    #[test]
    fn mixed_moduli_rejected() {
        let f = parse("MOD[0,2] & MOD[0,3]").unwrap();
        assert!(matches!(
            SubformulaIndex::build(&f, &[], true),
            Err(IndexError::MixedModuli(_))
        ));
        assert!(SubformulaIndex::build(&f, &[], false).is_ok());
    }

    #[test]
    fn round_trip_through_parts() {
        let ix = build("H a & MOD[0,2] & (a S b)", &["a", "b"], true);
        let subs: Vec<_> = ix.subformulas().map(|(f, i)| (f.clone(), i)).collect();
        let back = SubformulaIndex::from_parts(ix.propositions().to_vec(), subs, ix.mod_block(), ix.dim()).unwrap();
        assert_eq!(back, ix);
        assert!(SubformulaIndex::from_parts(vec!["a".into()], vec![(Formula::True, 0)], None, 3).is_err());
    }
}
