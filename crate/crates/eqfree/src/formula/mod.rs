//! Identity-free first-order syntax with generalized quantifiers: terms,
//! formulas, a parser and printer for the ASCII grammar, quantifier rank,
//! substitution, and the bounded sentence enumeration.
//!
//! # Grammar
//!
//! ```text
//! formula  := quantified | implies
//! quantified := "forall" var "." formula
//!             | "exists" [">=" NUM] var "." formula
//!             | "QH" var var var var "." formula
//!             | "Qquot" ">=" NUM var ";" var var "[" inner "|" inner "]"
//! implies  := or [ "->" formula ]          (right associative)
//! or       := and { "|" and }
//! and      := unary { "&" unary }
//! unary    := "!" unary | "(" formula ")" | atom
//! atom     := REL "(" term { "," term } ")"
//! term     := var | CONST | FUN "(" term { "," term } ")"
//! ```
//!
//! Precedence `!` > `&` > `|` > `->`; quantifiers bind weakest (the body
//! extends as far right as possible). Equality atoms are rejected. Inside
//! the `Qquot` brackets a top-level `|` separates the two argument slots, so
//! a disjunction there must be parenthesized.

pub mod enumerate;
pub mod parser;

pub use enumerate::enumerate_sentences;
pub use parser::parse;

use std::collections::BTreeSet;
use std::fmt;

/// A first-order term over a declared vocabulary. Identifiers that are not
/// vocabulary symbols are variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    fn rename_var(&self, from: &str, to: &Term) -> Term {
        match self {
            Term::Var(v) if v == from => to.clone(),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|t| t.rename_var(from, to)).collect(),
            ),
        }
    }
}

/// Identity-free formula AST. `CountAtLeast(n, x, φ)` is `exists>=n x. φ`,
/// `Henkin(x, y, z, w, φ)` asserts two independently chosen unary Skolem
/// functions (`y` stands for `f(x)` and `w` for `g(z)`), and
/// `QuotAtLeast(k, x, (y, z), φ, θ)` asserts that the relation defined by θ
/// is an equivalence congruent with φ whose φ-part has at least `k` classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String, Vec<Term>),
    Not(Box<Formula>),
    /// n-ary conjunction, always with at least two conjuncts.
    And(Vec<Formula>),
    /// n-ary disjunction, always with at least two disjuncts.
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
    CountAtLeast(u32, String, Box<Formula>),
    Henkin(String, String, String, String, Box<Formula>),
    QuotAtLeast(u32, String, (String, String), Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: &str, terms: Vec<Term>) -> Formula {
        Formula::Atom(rel.to_string(), terms)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// Conjunction; unwraps the singleton case.
    pub fn and(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    /// Disjunction; unwraps the singleton case.
    pub fn or(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// `(a -> b) & (b -> a)`; the grammar has no primitive biconditional.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::And(vec![
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        ])
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(f))
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(f))
    }

    pub fn forall_many(vars: &[&str], f: Formula) -> Formula {
        vars.iter().rev().fold(f, |acc, x| Formula::forall(x, acc))
    }

    pub fn exists_many(vars: &[&str], f: Formula) -> Formula {
        vars.iter().rev().fold(f, |acc, x| Formula::exists(x, acc))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Formula::Atom(_, terms) => {
                let mut out = BTreeSet::new();
                terms.iter().for_each(|t| t.collect_vars(&mut out));
                out
            }
            Formula::Not(f) => f.free_vars(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().flat_map(|f| f.free_vars()).collect()
            }
            Formula::Implies(a, b) => {
                let mut out = a.free_vars();
                out.extend(b.free_vars());
                out
            }
            Formula::Forall(x, f) | Formula::Exists(x, f) | Formula::CountAtLeast(_, x, f) => {
                let mut out = f.free_vars();
                out.remove(x);
                out
            }
            Formula::Henkin(x, y, z, w, f) => {
                let mut out = f.free_vars();
                for v in [x, y, z, w] {
                    out.remove(v);
                }
                out
            }
            Formula::QuotAtLeast(_, x, (y, z), phi, theta) => {
                let mut out = phi.free_vars();
                out.remove(x);
                let mut th = theta.free_vars();
                th.remove(y);
                th.remove(z);
                out.extend(th);
                out
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Maximum quantifier nesting depth. Every generalized quantifier node
    /// contributes one, regardless of how many variables it binds.
    pub fn quantifier_rank(&self) -> u32 {
        match self {
            Formula::Atom(_, _) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(|f| f.quantifier_rank()).max().unwrap_or(0)
            }
            Formula::Implies(a, b) => a.quantifier_rank().max(b.quantifier_rank()),
            Formula::Forall(_, f)
            | Formula::Exists(_, f)
            | Formula::CountAtLeast(_, _, f)
            | Formula::Henkin(_, _, _, _, f) => 1 + f.quantifier_rank(),
            Formula::QuotAtLeast(_, _, _, phi, theta) => {
                1 + phi.quantifier_rank().max(theta.quantifier_rank())
            }
        }
    }

    /// All relation/function/constant symbols occurring in the formula.
    pub fn symbols(&self) -> BTreeSet<String> {
        fn term_syms(t: &Term, out: &mut BTreeSet<String>) {
            match t {
                Term::Var(_) => {}
                Term::Const(c) => {
                    out.insert(c.clone());
                }
                Term::App(f, args) => {
                    out.insert(f.clone());
                    args.iter().for_each(|a| term_syms(a, out));
                }
            }
        }
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(rel, terms) = f {
                out.insert(rel.clone());
                terms.iter().for_each(|t| term_syms(t, &mut out));
            }
        });
        out
    }

    pub fn contains_henkin(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if matches!(f, Formula::Henkin(..)) {
                found = true;
            }
        });
        found
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Atom(_, _) => {}
            Formula::Not(g) => g.visit(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit(f)),
            Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Forall(_, g)
            | Formula::Exists(_, g)
            | Formula::CountAtLeast(_, _, g)
            | Formula::Henkin(_, _, _, _, g) => g.visit(f),
            Formula::QuotAtLeast(_, _, _, phi, theta) => {
                phi.visit(f);
                theta.visit(f);
            }
        }
    }

    /// Capture-avoiding substitution of term `t` for free variable `x`.
    /// A binder whose variable occurs in `t` is renamed to a fresh variable.
    pub fn substitute(&self, x: &str, t: &Term) -> Formula {
        let mut tvars = BTreeSet::new();
        t.collect_vars(&mut tvars);
        self.subst(x, t, &tvars)
    }

    fn subst(&self, x: &str, t: &Term, tvars: &BTreeSet<String>) -> Formula {
        let fresh = |bound: &str, body: &Formula| -> String {
            let mut used = body.free_vars();
            used.extend(tvars.iter().cloned());
            used.insert(x.to_string());
            let mut i = 0;
            loop {
                let cand = format!("{bound}{i}");
                if !used.contains(&cand) {
                    return cand;
                }
                i += 1;
            }
        };
        let under = |bound: &String, body: &Formula| -> (String, Formula) {
            if bound == x {
                (bound.clone(), body.clone())
            } else if tvars.contains(bound) && body.free_vars().contains(x) {
                let nb = fresh(bound, body);
                let renamed = body.subst(bound, &Term::Var(nb.clone()), &BTreeSet::new());
                (nb.clone(), renamed.subst(x, t, tvars))
            } else {
                (bound.clone(), body.subst(x, t, tvars))
            }
        };
        match self {
            Formula::Atom(rel, terms) => Formula::Atom(
                rel.clone(),
                terms.iter().map(|term| term.rename_var(x, t)).collect(),
            ),
            Formula::Not(f) => Formula::not(f.subst(x, t, tvars)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.subst(x, t, tvars)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.subst(x, t, tvars)).collect()),
            Formula::Implies(a, b) => {
                Formula::implies(a.subst(x, t, tvars), b.subst(x, t, tvars))
            }
            Formula::Forall(v, f) => {
                let (v, f) = under(v, f);
                Formula::forall(&v, f)
            }
            Formula::Exists(v, f) => {
                let (v, f) = under(v, f);
                Formula::exists(&v, f)
            }
            Formula::CountAtLeast(n, v, f) => {
                let (v, f) = under(v, f);
                Formula::CountAtLeast(*n, v, Box::new(f))
            }
            // The remaining binders are only built over their own bound
            // variables in this crate; rename-free substitution suffices
            // when no capture can occur.
            Formula::Henkin(a, b, c, d, f) => {
                if [a, b, c, d].contains(&&x.to_string()) {
                    self.clone()
                } else {
                    assert!(
                        ![a, b, c, d].iter().any(|v| tvars.contains(*v)),
                        "capture under Henkin binder"
                    );
                    Formula::Henkin(
                        a.clone(),
                        b.clone(),
                        c.clone(),
                        d.clone(),
                        Box::new(f.subst(x, t, tvars)),
                    )
                }
            }
            Formula::QuotAtLeast(k, v, (y, z), phi, theta) => {
                let phi2 = if v == x {
                    phi.as_ref().clone()
                } else {
                    assert!(!tvars.contains(v), "capture under Qquot binder");
                    phi.subst(x, t, tvars)
                };
                let theta2 = if y == x || z == x {
                    theta.as_ref().clone()
                } else {
                    assert!(
                        !tvars.contains(y) && !tvars.contains(z),
                        "capture under Qquot binder"
                    );
                    theta.subst(x, t, tvars)
                };
                Formula::QuotAtLeast(
                    *k,
                    v.clone(),
                    (y.clone(), z.clone()),
                    Box::new(phi2),
                    Box::new(theta2),
                )
            }
        }
    }

    /// Negation normal form of the negation of a quantifier-free-or-FO
    /// formula. Used for dual sentences in the enumeration.
    pub fn negate_nnf(&self) -> Formula {
        match self {
            Formula::Atom(_, _) => Formula::not(self.clone()),
            Formula::Not(f) => f.as_ref().clone(),
            Formula::And(fs) => Formula::Or(fs.iter().map(|f| f.negate_nnf()).collect()),
            Formula::Or(fs) => Formula::And(fs.iter().map(|f| f.negate_nnf()).collect()),
            Formula::Implies(a, b) => {
                Formula::And(vec![a.as_ref().clone(), b.negate_nnf()])
            }
            Formula::Forall(x, f) => Formula::exists(x, f.negate_nnf()),
            Formula::Exists(x, f) => Formula::forall(x, f.negate_nnf()),
            _ => Formula::not(self.clone()),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Atom(_, _) => 5,
        Formula::Not(_) => 4,
        Formula::And(_) => 3,
        Formula::Or(_) => 2,
        Formula::Implies(_, _) => 1,
        _ => 0,
    }
}

fn fmt_prec(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = prec(f);
    if p < min {
        write!(out, "(")?;
        fmt_prec(f, 0, out)?;
        return write!(out, ")");
    }
    match f {
        Formula::Atom(rel, terms) => {
            write!(out, "{rel}(")?;
            for (i, t) in terms.iter().enumerate() {
                if i > 0 {
                    write!(out, ",")?;
                }
                write!(out, "{t}")?;
            }
            write!(out, ")")
        }
        Formula::Not(g) => {
            write!(out, "!")?;
            fmt_prec(g, 4, out)
        }
        Formula::And(gs) => {
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    write!(out, " & ")?;
                }
                fmt_prec(g, 4, out)?;
            }
            Ok(())
        }
        Formula::Or(gs) => {
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    write!(out, " | ")?;
                }
                fmt_prec(g, 3, out)?;
            }
            Ok(())
        }
        Formula::Implies(a, b) => {
            fmt_prec(a, 2, out)?;
            write!(out, " -> ")?;
            fmt_prec(b, 0, out)
        }
        Formula::Forall(x, g) => {
            write!(out, "forall {x}. ")?;
            fmt_prec(g, 0, out)
        }
        Formula::Exists(x, g) => {
            write!(out, "exists {x}. ")?;
            fmt_prec(g, 0, out)
        }
        Formula::CountAtLeast(n, x, g) => {
            write!(out, "exists>={n} {x}. ")?;
            fmt_prec(g, 0, out)
        }
        Formula::Henkin(x, y, z, w, g) => {
            write!(out, "QH {x} {y} {z} {w}. ")?;
            fmt_prec(g, 0, out)
        }
        Formula::QuotAtLeast(k, x, (y, z), phi, theta) => {
            write!(out, "Qquot>={k} {x} ; {y} {z} [ ")?;
            fmt_quot_slot(phi, out)?;
            write!(out, " | ")?;
            fmt_quot_slot(theta, out)?;
            write!(out, " ]")
        }
    }
}

/// Inside Qquot brackets a `|` at parenthesis depth zero is the slot
/// separator, so a slot whose rendering contains one is parenthesized.
fn fmt_quot_slot(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let text = f.to_string();
    let mut depth = 0usize;
    let mut bare_bar = false;
    for ch in text.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            '|' if depth == 0 => bare_bar = true,
            _ => {}
        }
    }
    if bare_bar {
        write!(out, "({text})")
    } else {
        write!(out, "{text}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(out, "{v}"),
            Term::Const(c) => write!(out, "{c}"),
            Term::App(f, args) => {
                write!(out, "{f}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(out, ",")?;
                    }
                    write!(out, "{a}")?;
                }
                write!(out, ")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, out)
    }
}

/// Renders a formula as text; [`parse`] of the result restores the AST.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Vocabulary;

    fn vocab() -> Vocabulary {
        Vocabulary::new()
            .with_relation("P", 1)
            .with_relation("R", 2)
            .with_function("f", 1)
            .with_constant("c")
    }

    #[test]
    fn rank_examples() {
        let v = vocab();
        assert_eq!(parse("P(c)", &v).unwrap().quantifier_rank(), 0);
        assert_eq!(
            parse("forall x. exists y. R(x,y)", &v).unwrap().quantifier_rank(),
            2
        );
        assert_eq!(
            parse("exists>=3 x. P(x)", &v).unwrap().quantifier_rank(),
            1
        );
        assert_eq!(
            parse("QH x y z w. R(x,y)", &v).unwrap().quantifier_rank(),
            1
        );
    }

    #[test]
    fn free_vars_and_substitute() {
        let v = vocab();
        let f = parse("exists x. R(x,y)", &v).unwrap();
        assert_eq!(f.free_vars(), BTreeSet::from(["y".to_string()]));
        let g = parse("P(x)", &v).unwrap();
        assert_eq!(g.substitute("x", &Term::Const("c".into())), parse("P(c)", &v).unwrap());
        // capture avoidance: substituting a term containing the bound variable
        let h = parse("exists x. R(x,y)", &v).unwrap();
        let subst = h.substitute("y", &Term::var("x"));
        if let Formula::Exists(bound, body) = &subst {
            assert_ne!(bound, "x");
            assert!(body.free_vars().contains("x"));
        } else {
            panic!("expected exists");
        }
    }

    #[test]
    fn iff_is_two_implications() {
        let v = vocab();
        let f = Formula::iff(parse("P(c)", &v).unwrap(), parse("P(c)", &v).unwrap());
        assert_eq!(print(&f), "(P(c) -> P(c)) & (P(c) -> P(c))");
    }

    #[test]
    fn printing_nests_correctly() {
        let a = Formula::atom("P", vec![Term::var("x")]);
        let b = Formula::atom("P", vec![Term::var("y")]);
        let c = Formula::atom("P", vec![Term::var("z")]);
        let nested = Formula::And(vec![Formula::And(vec![a.clone(), b.clone()]), c.clone()]);
        assert_eq!(print(&nested), "(P(x) & P(y)) & P(z)");
        let flat = Formula::And(vec![a, b, c]);
        assert_eq!(print(&flat), "P(x) & P(y) & P(z)");
    }
}
