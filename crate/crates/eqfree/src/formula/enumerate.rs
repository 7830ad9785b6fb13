//! Bounded enumeration of identity-free sentences, semantically complete
//! per rank: two structures disagree on some sentence of quantifier rank
//! at most `n` in at most `vars` variables iff they disagree on an emitted
//! one.
//!
//! The stream does not contain every normal-form sentence. It emits the
//! generators of the rank-`r` Hintikka decomposition: for each rank-(r-1)
//! one-variable type δ both `exists x1. δ` and its dual `forall x1. ¬δ`
//! (in negation normal form), plus the signed closed atoms at rank 0.
//! Every sentence of rank at most `n` is equivalent to a boolean
//! combination of these, so agreement on the generators is agreement on
//! the whole rank-`n` fragment, while the stream stays in the hundreds
//! rather than the millions. Generators are ordered with all-positive
//! sign vectors first.

use super::{Formula, Term};
use crate::structure::Vocabulary;
use crate::{Error, Result};
use std::collections::BTreeMap;

const MAX_RANK: u32 = 2;
const MAX_VARS: usize = 2;

type Atom = (String, Vec<Term>);
type Signs = BTreeMap<Atom, bool>;

/// A rank-`r` type in the listed variables: a formula together with its
/// sign vector on the quantifier-free atoms, kept for the consistency
/// check when the type is extended by a fresh variable.
struct TypeEntry {
    base: Signs,
    formula: Formula,
}

fn var_name(i: usize) -> String {
    format!("x{}", i + 1)
}

/// All atoms whose terms are drawn from the first `k` pool variables and
/// the constants, and which mention at least one variable when `k > 0`
/// (closed atoms are their own rank-0 generators).
fn atoms(vocab: &Vocabulary, k: usize) -> Vec<Atom> {
    let mut terms: Vec<Term> = (0..k).map(|i| Term::Var(var_name(i))).collect();
    terms.extend(vocab.constants().iter().map(|c| Term::Const(c.clone())));
    if terms.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (rel, &arity) in vocab.relations() {
        let mut idx = vec![0usize; arity];
        loop {
            let tuple: Vec<Term> = idx.iter().map(|&i| terms[i].clone()).collect();
            let has_var = tuple.iter().any(|t| matches!(t, Term::Var(_)));
            if has_var || k == 0 {
                out.push((rel.clone(), tuple));
            }
            let mut pos = arity;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < terms.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    out.sort();
    out
}

fn signed_atom(atom: &Atom, positive: bool) -> Formula {
    let a = Formula::Atom(atom.0.clone(), atom.1.clone());
    if positive {
        a
    } else {
        Formula::not(a)
    }
}

fn conjunction_of(signs: &Signs) -> Vec<Formula> {
    signs.iter().map(|(a, &pos)| signed_atom(a, pos)).collect()
}

/// Sign vectors over `atoms`, all-positive first (descending bit mask).
fn sign_vectors(atoms: &[Atom]) -> Vec<Signs> {
    let n = atoms.len();
    assert!(n < usize::BITS as usize);
    let mut out = Vec::with_capacity(1 << n);
    for mask in (0..1usize << n).rev() {
        let signs: Signs = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), mask >> (n - 1 - i) & 1 == 1))
            .collect();
        out.push(signs);
    }
    out
}

/// Rank-`r` types in variables `x1..xk`.
fn types(vocab: &Vocabulary, r: u32, k: usize) -> Vec<TypeEntry> {
    let own_atoms = atoms(vocab, k);
    if r == 0 {
        return sign_vectors(&own_atoms)
            .into_iter()
            .map(|signs| TypeEntry {
                formula: Formula::and(conjunction_of(&signs)),
                base: signs,
            })
            .collect();
    }
    let next = var_name(k);
    let inner = types(vocab, r - 1, k + 1);
    let mut out = Vec::new();
    for base in sign_vectors(&own_atoms) {
        let candidates: Vec<&TypeEntry> = inner
            .iter()
            .filter(|t| {
                base.iter()
                    .all(|(a, s)| t.base.get(a).is_none_or(|ts| ts == s))
            })
            .collect();
        // nonempty subsets, larger (more positive inclusion) first
        let m = candidates.len();
        assert!(m < usize::BITS as usize);
        for mask in (1..1usize << m).rev() {
            let chosen: Vec<&&TypeEntry> = candidates
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> (m - 1 - i) & 1 == 1)
                .map(|(_, t)| t)
                .collect();
            let mut parts = conjunction_of(&base);
            for t in &chosen {
                parts.push(Formula::exists(&next, t.formula.clone()));
            }
            parts.push(Formula::forall(
                &next,
                Formula::or(chosen.iter().map(|t| t.formula.clone()).collect()),
            ));
            out.push(TypeEntry {
                base: base.clone(),
                formula: Formula::and(parts),
            });
        }
    }
    out
}

/// Emits the generator sentences of rank at most `n` over a relational
/// vocabulary (constants allowed, functions not), using at most `vars`
/// bound variables.
pub fn enumerate_sentences(vocab: &Vocabulary, n: u32, vars: usize) -> Result<Vec<Formula>> {
    if !vocab.functions().is_empty() {
        return Err(Error::Unsupported(
            "sentence enumeration over function symbols".to_string(),
        ));
    }
    if n > MAX_RANK {
        return Err(Error::Unsupported(format!(
            "sentence enumeration beyond rank {MAX_RANK}"
        )));
    }
    if vars > MAX_VARS {
        return Err(Error::Unsupported(format!(
            "sentence enumeration beyond {MAX_VARS} variables"
        )));
    }
    if (n as usize) > vars {
        return Err(Error::Unsupported(
            "rank exceeds the variable budget".to_string(),
        ));
    }
    let mut out = Vec::new();
    for atom in atoms(vocab, 0) {
        out.push(signed_atom(&atom, true));
        out.push(signed_atom(&atom, false));
    }
    for r in 1..=n {
        for t in types(vocab, r - 1, 1) {
            out.push(Formula::exists("x1", t.formula.clone()));
            out.push(Formula::forall("x1", t.formula.negate_nnf()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn unary_rank_one() {
        let v = Vocabulary::new().with_relation("P", 1);
        let got = enumerate_sentences(&v, 1, 1).unwrap();
        for text in [
            "exists x1. P(x1)",
            "exists x1. !P(x1)",
            "forall x1. P(x1)",
            "forall x1. !P(x1)",
        ] {
            let want = parse(text, &v).unwrap();
            assert!(got.contains(&want), "missing {text}");
        }
        assert_eq!(got[0], parse("exists x1. P(x1)", &v).unwrap());
    }

    #[test]
    fn rank_zero_needs_constants() {
        let v = Vocabulary::new().with_relation("P", 1);
        assert!(enumerate_sentences(&v, 0, 0).unwrap().is_empty());
        let v = v.with_constant("c");
        let got = enumerate_sentences(&v, 0, 0).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0], parse("P(c)", &v).unwrap());
        assert_eq!(got[1], parse("!P(c)", &v).unwrap());
    }

    #[test]
    fn counts_and_validity() {
        let v = Vocabulary::new().with_relation("P", 1);
        assert_eq!(enumerate_sentences(&v, 2, 2).unwrap().len(), 16);
        let v = Vocabulary::new().with_relation("R", 2);
        let got = enumerate_sentences(&v, 2, 2).unwrap();
        assert_eq!(got.len(), 4 + 1020);
        for f in &got {
            assert!(f.is_sentence());
            assert!(f.quantifier_rank() <= 2);
        }
        assert_eq!(got[0], parse("exists x1. R(x1,x1)", &v).unwrap());
    }

    #[test]
    fn limits() {
        let v = Vocabulary::new().with_relation("P", 1);
        assert!(enumerate_sentences(&v, 3, 2).is_err());
        assert!(enumerate_sentences(&v.clone().with_function("f", 1), 1, 1).is_err());
    }
}
