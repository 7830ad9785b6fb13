//! Model checking for identity-free formulas, including the counting,
//! quotient, and Henkin quantifiers, plus the fixed sentence families used
//! by the property suites (equivalence axioms, many-classes axioms, and the
//! compactness-failure witness).

use crate::formula::{Formula, Term};
use crate::structure::{Elem, Structure};
use crate::{Error, Result};
use std::collections::BTreeMap;

pub type Assignment = BTreeMap<String, Elem>;

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    /// Largest domain on which Henkin quantifiers are evaluated. The
    /// search is exact but exhaustive over pairs of unary maps.
    pub henkin_cap: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { henkin_cap: 5 }
    }
}

fn eval_term(s: &Structure, t: &Term, a: &Assignment) -> Result<Elem> {
    match t {
        Term::Var(v) => a
            .get(v)
            .copied()
            .ok_or_else(|| Error::UncoveredFreeVariable(v.clone())),
        Term::Const(c) => s
            .constant(c)
            .ok_or_else(|| Error::SymbolNotInVocabulary(c.clone())),
        Term::App(f, args) => {
            let vals = args
                .iter()
                .map(|t| eval_term(s, t, a))
                .collect::<Result<Vec<_>>>()?;
            s.apply(f, &vals)
                .ok_or_else(|| Error::SymbolNotInVocabulary(f.clone()))
        }
    }
}

/// Evaluates `f` in `s` under assignment `a` with default options.
pub fn eval(s: &Structure, f: &Formula, a: &Assignment) -> Result<bool> {
    eval_with(s, f, a, &EvalOptions::default())
}

pub fn eval_with(s: &Structure, f: &Formula, a: &Assignment, opts: &EvalOptions) -> Result<bool> {
    let mut a = a.clone();
    go(s, f, &mut a, opts)
}

fn restore(a: &mut Assignment, x: &str, prev: Option<Elem>) {
    match prev {
        Some(v) => {
            *a.get_mut(x).unwrap() = v;
        }
        None => {
            a.remove(x);
        }
    }
}

/// The recursive core. Binders mutate the shared assignment in place and
/// restore it on the way out; this keeps quantifier loops allocation-free.
fn go(s: &Structure, f: &Formula, a: &mut Assignment, opts: &EvalOptions) -> Result<bool> {
    match f {
        Formula::Atom(rel, terms) => {
            if s.vocab().relation_arity(rel) != Some(terms.len()) {
                return Err(Error::SymbolNotInVocabulary(rel.clone()));
            }
            let tuple = terms
                .iter()
                .map(|t| eval_term(s, t, a))
                .collect::<Result<Vec<_>>>()?;
            Ok(s.has_tuple(rel, &tuple))
        }
        Formula::Not(g) => Ok(!go(s, g, a, opts)?),
        Formula::And(gs) => {
            for g in gs {
                if !go(s, g, a, opts)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(gs) => {
            for g in gs {
                if go(s, g, a, opts)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Implies(p, q) => Ok(!go(s, p, a, opts)? || go(s, q, a, opts)?),
        Formula::Forall(x, g) => {
            let prev = a.insert(x.clone(), 0);
            for d in s.elems() {
                *a.get_mut(x).unwrap() = d;
                if !go(s, g, a, opts)? {
                    restore(a, x, prev);
                    return Ok(false);
                }
            }
            restore(a, x, prev);
            Ok(true)
        }
        Formula::Exists(x, g) => {
            let prev = a.insert(x.clone(), 0);
            for d in s.elems() {
                *a.get_mut(x).unwrap() = d;
                if go(s, g, a, opts)? {
                    restore(a, x, prev);
                    return Ok(true);
                }
            }
            restore(a, x, prev);
            Ok(false)
        }
        Formula::CountAtLeast(n, x, g) => {
            let prev = a.insert(x.clone(), 0);
            let mut count = 0u32;
            for d in s.elems() {
                *a.get_mut(x).unwrap() = d;
                if go(s, g, a, opts)? {
                    count += 1;
                    if count >= *n {
                        break;
                    }
                }
            }
            restore(a, x, prev);
            Ok(count >= *n)
        }
        Formula::QuotAtLeast(k, x, (y, z), phi, theta) => {
            eval_quot(s, *k, x, y, z, phi, theta, &*a, opts)
        }
        Formula::Henkin(x, y, z, w, g) => eval_henkin(s, x, y, z, w, g, &*a, opts),
    }
}

/// The quotient quantifier holds when θ defines an equivalence relation on
/// the whole domain that is congruent with φ and whose restriction to the
/// φ-part has at least `k` classes.
#[allow(clippy::too_many_arguments)]
fn eval_quot(
    s: &Structure,
    k: u32,
    x: &str,
    y: &str,
    z: &str,
    phi: &Formula,
    theta: &Formula,
    a: &Assignment,
    opts: &EvalOptions,
) -> Result<bool> {
    let n = s.size();
    let mut rel = vec![vec![false; n]; n];
    {
        let mut a = a.clone();
        for d in s.elems() {
            for e in s.elems() {
                a.insert(y.to_string(), d);
                a.insert(z.to_string(), e);
                rel[d][e] = eval_with(s, theta, &a, opts)?;
            }
        }
    }
    let mut holds = vec![false; n];
    {
        let mut a = a.clone();
        for d in s.elems() {
            a.insert(x.to_string(), d);
            holds[d] = eval_with(s, phi, &a, opts)?;
        }
    }
    for d in 0..n {
        if !rel[d][d] {
            return Ok(false);
        }
        for e in 0..n {
            if rel[d][e] != rel[e][d] {
                return Ok(false);
            }
            if rel[d][e] && holds[d] != holds[e] {
                return Ok(false);
            }
            for f in 0..n {
                if rel[d][e] && rel[e][f] && !rel[d][f] {
                    return Ok(false);
                }
            }
        }
    }
    let mut classes: Vec<Elem> = Vec::new();
    for d in 0..n {
        if holds[d] && !classes.iter().any(|&r| rel[r][d]) {
            classes.push(d);
        }
    }
    Ok(classes.len() as u32 >= k)
}

/// Henkin evaluation: two unary maps f, g chosen independently, with the
/// body holding at (d, f(d), e, g(e)) for all d, e. The body is tabulated
/// once over all four coordinates; then for each candidate f the g-side
/// reduces to "every e has some admissible value".
#[allow(clippy::too_many_arguments)]
fn eval_henkin(
    s: &Structure,
    x: &str,
    y: &str,
    z: &str,
    w: &str,
    body: &Formula,
    a: &Assignment,
    opts: &EvalOptions,
) -> Result<bool> {
    let n = s.size();
    if n > opts.henkin_cap {
        return Err(Error::DomainTooLarge {
            size: n,
            cap: opts.henkin_cap,
        });
    }
    let mut table = vec![false; n * n * n * n];
    let idx = |d: usize, fd: usize, e: usize, ge: usize| ((d * n + fd) * n + e) * n + ge;
    {
        let mut a = a.clone();
        for d in 0..n {
            for fd in 0..n {
                for e in 0..n {
                    for ge in 0..n {
                        a.insert(x.to_string(), d);
                        a.insert(y.to_string(), fd);
                        a.insert(z.to_string(), e);
                        a.insert(w.to_string(), ge);
                        table[idx(d, fd, e, ge)] = eval_with(s, body, &a, opts)?;
                    }
                }
            }
        }
    }
    let mut f = vec![0usize; n];
    'next_f: loop {
        let mut ok = true;
        'gside: for e in 0..n {
            for ge in 0..n {
                if (0..n).all(|d| table[idx(d, f[d], e, ge)]) {
                    continue 'gside;
                }
            }
            ok = false;
            break;
        }
        if ok {
            return Ok(true);
        }
        for slot in (0..n).rev() {
            f[slot] += 1;
            if f[slot] < n {
                continue 'next_f;
            }
            f[slot] = 0;
        }
        return Ok(false);
    }
}

/// Evaluates a sentence with the empty assignment.
pub fn eval_sentence(s: &Structure, f: &Formula) -> Result<bool> {
    eval_sentence_with(s, f, &EvalOptions::default())
}

pub fn eval_sentence_with(s: &Structure, f: &Formula, opts: &EvalOptions) -> Result<bool> {
    if let Some(v) = f.free_vars().into_iter().next() {
        return Err(Error::NotASentence(v));
    }
    eval_with(s, f, &Assignment::new(), opts)
}

/// First sentence in `fs` on which `s` and `t` disagree, if any.
pub fn agree_on<'f>(
    s: &Structure,
    t: &Structure,
    fs: impl IntoIterator<Item = &'f Formula>,
) -> Result<Option<&'f Formula>> {
    for f in fs {
        if eval_sentence(s, f)? != eval_sentence(t, f)? {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Fixed sentence families over the vocabulary {E(2)}
// ---------------------------------------------------------------------------

fn e_atom(a: &str, b: &str) -> Formula {
    Formula::atom("E", vec![Term::var(a), Term::var(b)])
}

/// Reflexivity, symmetry, and transitivity of E.
pub fn equivalence_axioms() -> Vec<Formula> {
    vec![
        Formula::forall("x", e_atom("x", "x")),
        Formula::forall_many(
            &["x", "y"],
            Formula::implies(e_atom("x", "y"), e_atom("y", "x")),
        ),
        Formula::forall_many(
            &["x", "y", "z"],
            Formula::implies(
                Formula::And(vec![e_atom("x", "y"), e_atom("y", "z")]),
                e_atom("x", "z"),
            ),
        ),
    ]
}

/// `exists x0 .. xn. /\_{i<j<=n} !E(xi,xj)`: at least n+1 classes.
pub fn many_classes_axiom(n: u32) -> Formula {
    let vars: Vec<String> = (0..=n).map(|i| format!("x{i}")).collect();
    let mut parts = Vec::new();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            parts.push(Formula::not(e_atom(&vars[i], &vars[j])));
        }
    }
    let refs: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
    Formula::exists_many(&refs, Formula::and(parts))
}

/// The compactness-failure witness: E is an equivalence relation and some
/// element u together with Henkin-chosen maps f, g satisfies
/// `!E(u,f(x))` and `E(f(x),v) -> E(g(v),x)` for all x, v. On a finite
/// structure where E is an equivalence this is always false.
pub fn phi_inf() -> Formula {
    let branching = Formula::exists(
        "u",
        Formula::Henkin(
            "x".into(),
            "y".into(),
            "z".into(),
            "w".into(),
            Box::new(Formula::And(vec![
                Formula::not(e_atom("u", "y")),
                Formula::implies(e_atom("y", "z"), e_atom("w", "x")),
            ])),
        ),
    );
    let mut parts = equivalence_axioms();
    parts.push(branching);
    Formula::And(parts)
}

/// The first `n` many-classes axioms together with the equivalence axioms
/// and the negation of the compactness-failure witness. Every such finite
/// fragment has a finite model although the full theory has none.
pub fn theory_t_fragment(n: u32) -> Vec<Formula> {
    let mut out = vec![Formula::not(phi_inf())];
    out.extend(equivalence_axioms());
    out.extend((1..=n).map(many_classes_axiom));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::structure::Vocabulary;

    fn p_structure(n: usize, p: &[usize]) -> Structure {
        let vocab = Vocabulary::new().with_relation("P", 1);
        let domain = (0..n).map(|i| i.to_string()).collect();
        let mut s = Structure::new(vocab, domain);
        for &i in p {
            s.set_tuple("P", vec![i]);
        }
        s
    }

    #[test]
    fn counting() {
        let v = Vocabulary::new().with_relation("P", 1);
        let f = parse("exists>=2 x. P(x)", &v).unwrap();
        assert!(eval_sentence(&p_structure(2, &[0, 1]), &f).unwrap());
        assert!(!eval_sentence(&p_structure(1, &[0]), &f).unwrap());
    }

    #[test]
    fn quotient_quantifier() {
        let vocab = Vocabulary::new()
            .with_relation("P", 1)
            .with_relation("E", 2);
        let mut s = Structure::new(vocab.clone(), vec!["0".into(), "1".into(), "2".into(), "3".into()]);
        for (a, b) in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (1, 0), (2, 3), (3, 2)] {
            s.set_tuple("E", vec![a, b]);
        }
        s.set_tuple("P", vec![0]);
        s.set_tuple("P", vec![1]);
        let q1 = parse("Qquot>=1 x ; y z [ P(x) | E(y,z) ]", &vocab).unwrap();
        let q2 = parse("Qquot>=2 x ; y z [ P(x) | E(y,z) ]", &vocab).unwrap();
        assert!(eval_sentence(&s, &q1).unwrap());
        assert!(!eval_sentence(&s, &q2).unwrap());
        // a non-equivalence theta makes the quantifier false outright
        let mut t = s.clone();
        t.set_relation("E", [vec![0, 1]].into_iter().collect());
        assert!(!eval_sentence(&t, &q1).unwrap());
        // theta not congruent with phi: E relates a P-element to a non-P one
        let mut u = s.clone();
        u.set_tuple("E", vec![1, 2]);
        u.set_tuple("E", vec![2, 1]);
        u.set_tuple("E", vec![0, 2]);
        u.set_tuple("E", vec![2, 0]);
        u.set_tuple("E", vec![1, 3]);
        u.set_tuple("E", vec![3, 1]);
        u.set_tuple("E", vec![0, 3]);
        u.set_tuple("E", vec![3, 0]);
        assert!(!eval_sentence(&u, &q1).unwrap());
    }

    #[test]
    fn henkin() {
        let vocab = Vocabulary::new().with_relation("R", 2);
        let both = parse("QH x y z w. R(x,y) & R(z,w)", &vocab).unwrap();
        let mut full = Structure::new(vocab.clone(), vec!["0".into(), "1".into()]);
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            full.set_tuple("R", vec![a, b]);
        }
        assert!(eval_sentence(&full, &both).unwrap());
        let empty = Structure::new(vocab.clone(), vec!["0".into(), "1".into()]);
        assert!(!eval_sentence(&empty, &both).unwrap());
        let mut cycle = Structure::new(vocab.clone(), vec!["0".into(), "1".into(), "2".into()]);
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            cycle.set_tuple("R", vec![a, b]);
        }
        let succ = parse("QH x y z w. R(x,y)", &vocab).unwrap();
        assert!(eval_sentence(&cycle, &succ).unwrap());
    }

    #[test]
    fn henkin_cap() {
        let vocab = Vocabulary::new().with_relation("R", 2);
        let s = Structure::new(vocab.clone(), (0..6).map(|i| i.to_string()).collect());
        let f = parse("QH x y z w. R(x,y)", &vocab).unwrap();
        assert!(matches!(
            eval_sentence(&s, &f),
            Err(Error::DomainTooLarge { size: 6, cap: 5 })
        ));
        assert!(!eval_sentence_with(&s, &f, &EvalOptions { henkin_cap: 6 }).unwrap());
    }

    #[test]
    fn sentences_only() {
        let v = Vocabulary::new().with_relation("P", 1);
        let f = parse("P(x)", &v).unwrap();
        assert!(matches!(
            eval_sentence(&p_structure(1, &[0]), &f),
            Err(Error::NotASentence(_))
        ));
    }

    #[test]
    fn agreement() {
        let v = Vocabulary::new().with_relation("P", 1);
        let f = parse("exists>=2 x. P(x)", &v).unwrap();
        let fs = vec![f.clone()];
        let a = p_structure(1, &[0]);
        let b = p_structure(2, &[0, 1]);
        assert_eq!(agree_on(&a, &b, &fs).unwrap(), Some(&f));
        assert_eq!(agree_on(&a, &a, &fs).unwrap(), None);
    }

    fn equivalence_structure(class_sizes: &[usize]) -> Structure {
        let vocab = Vocabulary::new().with_relation("E", 2);
        let n: usize = class_sizes.iter().sum();
        let mut s = Structure::new(vocab, (0..n).map(|i| i.to_string()).collect());
        let mut start = 0;
        for &sz in class_sizes {
            for a in start..start + sz {
                for b in start..start + sz {
                    s.set_tuple("E", vec![a, b]);
                }
            }
            start += sz;
        }
        s
    }

    #[test]
    fn phi_inf_false_on_finite_equivalences() {
        let f = phi_inf();
        for sizes in [&[1][..], &[2], &[1, 1], &[2, 1], &[1, 1, 1], &[2, 2]] {
            let s = equivalence_structure(sizes);
            assert!(!eval_sentence(&s, &f).unwrap(), "classes {sizes:?}");
        }
    }

    #[test]
    fn theory_fragments_have_models() {
        for n in 0..=3u32 {
            let frag = theory_t_fragment(n);
            let model = equivalence_structure(&vec![1; n as usize + 1]);
            for ax in &frag {
                assert!(eval_sentence(&model, ax).unwrap(), "n={n}: {ax}");
            }
        }
    }
}
