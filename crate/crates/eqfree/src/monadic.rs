//! The monadic fragment: predicate fingerprints of elements, the
//! realized-type criterion for weak isomorphism, and interval normal forms
//! for one-predicate counting sentences.

use crate::eval::eval_sentence;
use crate::formula::Formula;
use crate::structure::{Structure, Vocabulary};
use crate::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;

/// The set of monadic predicates an element satisfies.
pub type DeltaType = BTreeSet<String>;

fn require_monadic(s: &Structure) -> Result<()> {
    if !s.vocab().is_monadic() {
        return Err(Error::NotMonadic(
            "vocabulary has non-unary or non-relational symbols".to_string(),
        ));
    }
    Ok(())
}

/// The fingerprints realized by at least one element.
pub fn realized_types(s: &Structure) -> Result<BTreeSet<DeltaType>> {
    require_monadic(s)?;
    let mut out = BTreeSet::new();
    for e in s.elems() {
        let t: DeltaType = s
            .vocab()
            .relations()
            .keys()
            .filter(|r| s.has_tuple(r, &[e]))
            .cloned()
            .collect();
        out.insert(t);
    }
    Ok(out)
}

/// Monadic structures are weakly isomorphic exactly when they realize the
/// same fingerprints. Agrees with [`leibniz::weak_iso`].
pub fn monadic_weak_iso(s: &Structure, t: &Structure) -> Result<bool> {
    if s.vocab() != t.vocab() {
        return Err(Error::VocabMismatch);
    }
    Ok(realized_types(s)? == realized_types(t)?)
}

/// A cardinality, with a single symbolic bucket for "infinite" (or, in the
/// finite tables, "at least the cap").
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Count {
    Finite(u32),
    Infinite,
}

impl Count {
    fn at_least(self, n: u32) -> bool {
        match self {
            Count::Finite(c) => c >= n,
            Count::Infinite => true,
        }
    }
}

/// `exists^[lower, upper) x. P(x)` or its negative-literal counterpart;
/// `upper = None` is an unbounded interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct IntervalConstraint {
    pub positive: bool,
    pub lower: u32,
    pub upper: Option<u32>,
}

impl IntervalConstraint {
    pub fn holds(&self, p: Count, n: Count) -> bool {
        let c = if self.positive { p } else { n };
        c.at_least(self.lower) && self.upper.is_none_or(|u| !c.at_least(u))
    }
}

impl fmt::Display for IntervalConstraint {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "E[{},", self.lower)?;
        match self.upper {
            Some(u) => write!(out, "{u})")?,
            None => write!(out, "oo)")?,
        }
        write!(out, "{}P", if self.positive { "" } else { "!" })
    }
}

/// A disjunction of conjunctions of interval constraints, at most one per
/// literal polarity in each disjunct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub disjuncts: Vec<Vec<IntervalConstraint>>,
}

impl fmt::Display for NormalForm {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.disjuncts.is_empty() {
            return write!(out, "false");
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                write!(out, " | ")?;
            }
            for (j, c) in d.iter().enumerate() {
                if j > 0 {
                    write!(out, " & ")?;
                }
                write!(out, "{c}")?;
            }
        }
        Ok(())
    }
}

/// Truth of the normal form on any structure whose profile is
/// (`|P|`, `|domain without P|`) = (`p`, `n`).
pub fn cardinality_profile_semantics(nf: &NormalForm, p: Count, n: Count) -> bool {
    nf.disjuncts
        .iter()
        .any(|d| d.iter().all(|c| c.holds(p, n)))
}

fn one_predicate_vocab() -> Vocabulary {
    Vocabulary::new().with_relation("P", 1)
}

/// A concrete structure realizing the profile (`p`, `n`).
fn profile_structure(p: u32, n: u32) -> Structure {
    let total = (p + n).max(1) as usize;
    let mut s = Structure::new(
        one_predicate_vocab(),
        (0..total).map(|i| format!("a{i}")).collect(),
    );
    for i in 0..p as usize {
        s.set_tuple("P", vec![i]);
    }
    s
}

/// Checks that the sentence is over `{P}` and its counting thresholds are
/// drawn from the allowed set; returns the thresholds used.
fn check_fragment(f: &Formula, allowed: &BTreeSet<u32>) -> Result<()> {
    match f {
        Formula::Atom(rel, _) if rel == "P" => Ok(()),
        Formula::Atom(rel, _) => Err(Error::NotInFragment(format!("atom over `{rel}`"))),
        Formula::Not(g) => check_fragment(g, allowed),
        Formula::And(gs) | Formula::Or(gs) => {
            gs.iter().try_for_each(|g| check_fragment(g, allowed))
        }
        Formula::Implies(a, b) => {
            check_fragment(a, allowed)?;
            check_fragment(b, allowed)
        }
        Formula::Forall(_, g) | Formula::Exists(_, g) => check_fragment(g, allowed),
        Formula::CountAtLeast(n, _, g) => {
            if !allowed.contains(n) {
                return Err(Error::NotInFragment(format!(
                    "threshold {n} outside the allowed set"
                )));
            }
            check_fragment(g, allowed)
        }
        Formula::Henkin(..) | Formula::QuotAtLeast(..) => Err(Error::NotInFragment(
            "generalized quantifier other than counting".to_string(),
        )),
    }
}

/// Profiles `(p, n)` with entries in `0..=cap`, excluding the empty
/// domain; the `cap` entry stands for every cardinality from `cap` up.
fn bucket_profiles(cap: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for p in 0..=cap {
        for n in 0..=cap {
            if p + n >= 1 {
                out.push((p, n));
            }
        }
    }
    out
}

fn truth_table(f: &Formula, cap: u32) -> Result<BTreeSet<(u32, u32)>> {
    let mut out = BTreeSet::new();
    for &(p, n) in &bucket_profiles(cap) {
        if eval_sentence(&profile_structure(p, n), f)? {
            out.insert((p, n));
        }
    }
    Ok(out)
}

fn candidate_disjuncts(endpoints: &BTreeSet<u32>) -> Vec<Vec<IntervalConstraint>> {
    let mut singles = Vec::new();
    for &positive in &[true, false] {
        for &lower in endpoints {
            let mut uppers: Vec<Option<u32>> =
                endpoints.iter().filter(|&&u| u > lower).map(|&u| Some(u)).collect();
            uppers.push(None);
            for upper in uppers {
                singles.push(IntervalConstraint {
                    positive,
                    lower,
                    upper,
                });
            }
        }
    }
    let mut out: Vec<Vec<IntervalConstraint>> =
        singles.iter().map(|&c| vec![c]).collect();
    for &a in singles.iter().filter(|c| c.positive) {
        for &b in singles.iter().filter(|c| !c.positive) {
            out.push(vec![a, b]);
        }
    }
    out
}

fn disjunct_truth(d: &[IntervalConstraint], cap: u32) -> BTreeSet<(u32, u32)> {
    let as_count = |c: u32| {
        if c == cap {
            Count::Infinite
        } else {
            Count::Finite(c)
        }
    };
    bucket_profiles(cap)
        .into_iter()
        .filter(|&(p, n)| d.iter().all(|c| c.holds(as_count(p), as_count(n))))
        .collect()
}

/// The interval normal form of a one-predicate counting sentence, with
/// endpoints restricted to `Y` and 1 (upper endpoints may be unbounded).
///
/// The construction is semantic: the sentence's truth is tabulated over
/// cardinality profiles up to a cap beyond every allowed threshold, and a
/// minimal cover of the table by sound candidate disjuncts is extracted.
/// Sentences whose table no union of candidates reproduces have no such
/// normal form and are rejected.
pub fn normalize(f: &Formula, y: &BTreeSet<u32>) -> Result<NormalForm> {
    if let Some(v) = f.free_vars().into_iter().next() {
        return Err(Error::NotASentence(v));
    }
    let mut endpoints: BTreeSet<u32> = y.clone();
    endpoints.insert(1);
    check_fragment(f, &endpoints)?;
    let cap = endpoints.iter().max().unwrap() + 1;
    let target = truth_table(f, cap)?;
    let mut chosen: Vec<Vec<IntervalConstraint>> = Vec::new();
    let mut covered: BTreeSet<(u32, u32)> = BTreeSet::new();
    let candidates = candidate_disjuncts(&endpoints);
    for d in &candidates {
        let truth = disjunct_truth(d, cap);
        if truth.is_subset(&target) && !truth.is_subset(&covered) {
            covered.extend(truth);
            chosen.push(d.clone());
        }
    }
    if covered != target {
        return Err(Error::NotExpressible);
    }
    // drop any disjunct whose coverage the others already provide
    let mut i = 0;
    while i < chosen.len() {
        let rest: BTreeSet<(u32, u32)> = chosen
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, d)| disjunct_truth(d, cap))
            .collect();
        if rest == target {
            chosen.remove(i);
        } else {
            i += 1;
        }
    }
    let nf = NormalForm { disjuncts: chosen };
    // the pruning never drops coverage, but keep the cheap invariant check
    debug_assert_eq!(
        bucket_profiles(cap)
            .iter()
            .filter(|&&(p, n)| {
                let as_count = |c: u32| {
                    if c == cap {
                        Count::Infinite
                    } else {
                        Count::Finite(c)
                    }
                };
                cardinality_profile_semantics(&nf, as_count(p), as_count(n))
            })
            .copied()
            .collect::<BTreeSet<_>>(),
        target
    );
    Ok(nf)
}

/// Whether `exists>=r x. P(x)` has an interval normal form with endpoints
/// in `Y` and 1: exactly when `r` is such an endpoint.
pub fn definable(r: u32, y: &BTreeSet<u32>) -> bool {
    r == 1 || y.contains(&r)
}

/// The same question answered by exhaustive search over candidate normal
/// forms. Must agree with [`definable`].
pub fn definable_by_search(r: u32, y: &BTreeSet<u32>) -> bool {
    let mut endpoints: BTreeSet<u32> = y.clone();
    endpoints.insert(1);
    let cap = endpoints.iter().max().unwrap().max(&r) + 1;
    let target: BTreeSet<(u32, u32)> = bucket_profiles(cap)
        .into_iter()
        .filter(|&(p, _)| p >= r)
        .collect();
    let mut covered: BTreeSet<(u32, u32)> = BTreeSet::new();
    for d in candidate_disjuncts(&endpoints) {
        let truth = disjunct_truth(&d, cap);
        if truth.is_subset(&target) {
            covered.extend(truth);
        }
    }
    covered == target
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn two_pred(n: usize, p: &[usize], q: &[usize]) -> Structure {
        let vocab = Vocabulary::new().with_relation("P", 1).with_relation("Q", 1);
        let mut s = Structure::new(vocab, (0..n).map(|i| i.to_string()).collect());
        for &i in p {
            s.set_tuple("P", vec![i]);
        }
        for &i in q {
            s.set_tuple("Q", vec![i]);
        }
        s
    }

    #[test]
    fn realized_types_examples() {
        let s = two_pred(2, &[0], &[0, 1]);
        let got = realized_types(&s).unwrap();
        let pq: DeltaType = ["P", "Q"].iter().map(|s| s.to_string()).collect();
        let q: DeltaType = ["Q"].iter().map(|s| s.to_string()).collect();
        assert_eq!(got, BTreeSet::from([pq, q]));
        let empty = Structure::new(Vocabulary::new().with_relation("P", 1), vec!["0".into()]);
        assert_eq!(
            realized_types(&empty).unwrap(),
            BTreeSet::from([DeltaType::new()])
        );
    }

    #[test]
    fn monadic_weak_iso_matches_general() {
        let pairs = [
            (two_pred(2, &[0], &[0, 1]), two_pred(3, &[0, 1], &[0, 1, 2])),
            (two_pred(2, &[0], &[]), two_pred(2, &[0, 1], &[])),
            (two_pred(1, &[0], &[0]), two_pred(1, &[0], &[])),
        ];
        for (s, t) in &pairs {
            assert_eq!(
                monadic_weak_iso(s, t).unwrap(),
                crate::leibniz::weak_iso(s, t).unwrap().is_some()
            );
        }
    }

    #[test]
    fn rejects_non_monadic() {
        let s = Structure::new(Vocabulary::new().with_relation("R", 2), vec!["0".into()]);
        assert!(matches!(realized_types(&s), Err(Error::NotMonadic(_))));
    }

    #[test]
    fn profile_semantics() {
        let nf = NormalForm {
            disjuncts: vec![vec![IntervalConstraint {
                positive: true,
                lower: 2,
                upper: None,
            }]],
        };
        assert!(cardinality_profile_semantics(&nf, Count::Finite(3), Count::Finite(0)));
        assert!(cardinality_profile_semantics(&nf, Count::Infinite, Count::Finite(5)));
        let bounded = NormalForm {
            disjuncts: vec![vec![IntervalConstraint {
                positive: true,
                lower: 2,
                upper: Some(3),
            }]],
        };
        assert!(!cardinality_profile_semantics(&bounded, Count::Finite(3), Count::Finite(5)));
        assert!(cardinality_profile_semantics(&bounded, Count::Finite(2), Count::Finite(5)));
    }

    #[test]
    fn normalize_examples() {
        let v = one_predicate_vocab();
        let f = parse("exists>=2 x. P(x) & exists y. !P(y)", &v).unwrap();
        let nf = normalize(&f, &BTreeSet::from([2])).unwrap();
        assert_eq!(nf.to_string(), "E[2,oo)P & E[1,oo)!P");

        let f = parse("exists x. P(x) | exists y. !P(y)", &v).unwrap();
        let nf = normalize(&f, &BTreeSet::new()).unwrap();
        assert_eq!(nf.disjuncts.len(), 2);

        // |P| = 0 is not expressible with lower endpoints >= 1
        let f = parse("!exists x. P(x)", &v).unwrap();
        assert!(matches!(
            normalize(&f, &BTreeSet::new()),
            Err(Error::NotExpressible)
        ));

        let f = parse("exists>=3 x. P(x)", &v).unwrap();
        assert!(matches!(
            normalize(&f, &BTreeSet::from([2])),
            Err(Error::NotInFragment(_))
        ));
    }

    #[test]
    fn normalize_agrees_with_eval() {
        let v = one_predicate_vocab();
        let y = BTreeSet::from([2, 3]);
        for text in [
            "exists x. P(x)",
            "exists>=2 x. P(x)",
            "exists>=3 x. P(x) | exists>=2 y. !P(y)",
            "forall x. P(x)",
            "exists>=2 x. P(x) & !exists>=3 x. P(x)",
        ] {
            let f = parse(text, &v).unwrap();
            let nf = match normalize(&f, &y) {
                Ok(nf) => nf,
                Err(Error::NotExpressible) => continue,
                Err(e) => panic!("{text}: {e}"),
            };
            for p in 0..=6u32 {
                for n in 0..=6u32 {
                    if p + n == 0 {
                        continue;
                    }
                    let s = profile_structure(p, n);
                    assert_eq!(
                        eval_sentence(&s, &f).unwrap(),
                        cardinality_profile_semantics(
                            &nf,
                            Count::Finite(p),
                            Count::Finite(n)
                        ),
                        "{text} at ({p},{n})"
                    );
                }
            }
        }
    }

    #[test]
    fn definability() {
        assert!(!definable(3, &BTreeSet::from([2])));
        assert!(definable(2, &BTreeSet::from([2])));
        assert!(definable(1, &BTreeSet::from([2, 3])));
        for r in 1..=5u32 {
            for mask in 0u32..16 {
                let y: BTreeSet<u32> =
                    (2..=5).filter(|i| mask >> (i - 2) & 1 == 1).collect();
                assert_eq!(
                    definable(r, &y),
                    definable_by_search(r, &y),
                    "r={r} Y={y:?}"
                );
            }
        }
    }
}
