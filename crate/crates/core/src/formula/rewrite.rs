use num_integer::Integer;

use super::{CountAtom, CountTerm, Formula};
use crate::error::RewriteError;

pub const DEFAULT_MODULUS_CAP: u64 = 4096;

/// Rewrites every `MOD[r,m]` into a disjunction over the least common
/// multiple `L` of all moduli: `MOD[r,L] | MOD[r+m,L] | ...`. No-op when at
/// most one distinct modulus occurs.
pub fn normalize_mod_lcm(f: &Formula) -> Result<Formula, RewriteError> {
    normalize_mod_lcm_with_cap(f, DEFAULT_MODULUS_CAP)
}

pub fn normalize_mod_lcm_with_cap(f: &Formula, cap: u64) -> Result<Formula, RewriteError> {
    let moduli = f.moduli();
    if moduli.len() <= 1 {
        return Ok(f.clone());
    }
    let mut wide: u128 = 1;
    for m in moduli {
        let m = u128::from(m);
        wide = wide / wide.gcd(&m) * m;
        if wide > u128::from(cap) {
            return Err(RewriteError::ModulusCap {
                lcm: u64::try_from(wide).unwrap_or(u64::MAX),
                cap,
            });
        }
    }
    let lcm = wide as u64;
    Ok(map_leaves(f, &|leaf| match leaf {
        Formula::Mod { remainder, modulus } if *modulus != lcm => {
            let mut reps = (*remainder..lcm).step_by(*modulus as usize);
            let first = Formula::modulo(reps.next().expect("remainder < modulus <= lcm"), lcm);
            Some(reps.fold(first, |acc, r| Formula::or(acc, Formula::modulo(r, lcm))))
        }
        _ => None,
    }))
}

/// Rewrites `P ψ` into `#[ψ] >= 1`. Fails on formulas using `Y` or `S`,
/// which have no C-RASP counterpart.
pub fn lower_to_crasp(f: &Formula) -> Result<Formula, RewriteError> {
    if let Some(bad) = f
        .subformulas()
        .into_iter()
        .find(|s| matches!(s, Formula::Yesterday(_) | Formula::Since(..)))
    {
        return Err(RewriteError::NotCrasp(bad.to_string()));
    }
    Ok(lower(f))
}

fn lower(f: &Formula) -> Formula {
    match f {
        Formula::Previously(g) => Formula::count(vec![(1, lower(g))], super::Comparator::Ge, 1),
        _ => rebuild(f, lower),
    }
}

/// Applies `leaf` bottom-up; `None` keeps the node.
fn map_leaves(f: &Formula, leaf: &dyn Fn(&Formula) -> Option<Formula>) -> Formula {
    if let Some(g) = leaf(f) {
        return g;
    }
    rebuild(f, |c| map_leaves(c, leaf))
}

fn rebuild(f: &Formula, mut child: impl FnMut(&Formula) -> Formula) -> Formula {
    match f {
        Formula::Atom(_) | Formula::True | Formula::False | Formula::Mod { .. } => f.clone(),
        Formula::Not(g) => Formula::not(child(g)),
        Formula::Yesterday(g) => Formula::yesterday(child(g)),
        Formula::Previously(g) => Formula::previously(child(g)),
        Formula::And(g, h) => Formula::and(child(g), child(h)),
        Formula::Since(g, h) => Formula::since(child(g), child(h)),
        Formula::Count(c) => Formula::Count(CountAtom {
            terms: c
                .terms
                .iter()
                .map(|t| CountTerm {
                    coeff: t.coeff,
                    formula: child(&t.formula),
                })
                .collect(),
            cmp: c.cmp,
            threshold: c.threshold,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, Comparator};

    #[test]
    fn lcm_expansion() {
        let f = parse("MOD[1,2] & MOD[1,3]").unwrap();
        let want = Formula::and(
            Formula::or(
                Formula::or(Formula::modulo(1, 6), Formula::modulo(3, 6)),
                Formula::modulo(5, 6),
            ),
            Formula::or(Formula::modulo(1, 6), Formula::modulo(4, 6)),
        );
        assert_eq!(normalize_mod_lcm(&f).unwrap(), want);
    }

    #[test]
    fn single_modulus_is_unchanged() {
        for s in ["MOD[0,2]", "MOD[0,2] & MOD[0,2]", "a S b"] {
            let f = parse(s).unwrap();
            assert_eq!(normalize_mod_lcm(&f).unwrap(), f);
        }
    }

    #[test]
    fn modulus_cap() {
        let f = parse("MOD[0,64] & MOD[0,81]").unwrap();
        assert_eq!(
            normalize_mod_lcm(&f),
            Err(RewriteError::ModulusCap { lcm: 5184, cap: 4096 })
        );
        assert!(normalize_mod_lcm_with_cap(&f, 6000).is_ok());
    }

    #[test]
    fn crasp_lowering() {
        assert_eq!(
            lower_to_crasp(&parse("P a").unwrap()).unwrap(),
            Formula::count(vec![(1, Formula::atom("a"))], Comparator::Ge, 1)
        );
        assert_eq!(lower_to_crasp(&parse("a").unwrap()).unwrap(), Formula::atom("a"));
        assert!(matches!(
            lower_to_crasp(&parse("P (a & Y a)").unwrap()),
            Err(RewriteError::NotCrasp(_))
        ));
        assert!(lower_to_crasp(&parse("a S b").unwrap()).is_err());
        let nested = lower_to_crasp(&parse("#[P a] >= 2").unwrap()).unwrap();
        assert_eq!(nested.to_string(), "(#[(#[a] >= 1)] >= 2)");
    }
}
