//! The identity-free Ehrenfeucht–Fraïssé game: weak partial isomorphisms,
//! bounded-round and unbounded back-and-forth equivalence, distinguishing
//! sentence search, and the emission and model checking of the finite
//! theories that encode game certificates inside a single structure.
//!
//! Positions are finite sets of cross-domain pairs rather than injective
//! partial maps; the identity-free game has no injectivity constraint, and
//! non-functional positions are legitimate.

use crate::eval::{self, eval_sentence};
use crate::formula::{enumerate_sentences, Formula, Term};
use crate::leibniz::reduce;
use crate::structure::{blow_up, merge_same_domain, rename, Elem, Structure, Vocabulary};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// An EF-game position: a finite relation between the two domains.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PartialCorrespondence {
    pub pairs: BTreeSet<(Elem, Elem)>,
}

impl PartialCorrespondence {
    pub fn new(pairs: impl IntoIterator<Item = (Elem, Elem)>) -> Self {
        PartialCorrespondence {
            pairs: pairs.into_iter().collect(),
        }
    }
}

/// A winning certificate: level `j` holds the positions from which the
/// duplicator survives `j` more rounds. Levels shrink as `j` grows.
#[derive(Debug, Clone)]
pub struct EFCertificate {
    pub levels: Vec<Vec<PartialCorrespondence>>,
}

/// Atomic transfer on matched pairs: every relation tuple built from the
/// left components holds iff the corresponding right tuple holds.
pub fn is_weak_partial_iso(s: &Structure, t: &Structure, p: &PartialCorrespondence) -> bool {
    let pairs: Vec<(Elem, Elem)> = p.pairs.iter().copied().collect();
    for (rel, &arity) in s.vocab().relations() {
        let mut idx = vec![0usize; arity];
        if pairs.is_empty() {
            continue;
        }
        loop {
            let left: Vec<Elem> = idx.iter().map(|&i| pairs[i].0).collect();
            let right: Vec<Elem> = idx.iter().map(|&i| pairs[i].1).collect();
            if s.has_tuple(rel, &left) != t.has_tuple(rel, &right) {
                return false;
            }
            let mut pos = arity;
            loop {
                if pos == 0 {
                    return true;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < pairs.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    true
}

const MAX_GAME_PAIRS: usize = 24;

/// Shared machinery for the bounded game: the pair universe is indexed and
/// positions are bitmasks over it.
struct GameCtx<'a> {
    s: &'a Structure,
    t: &'a Structure,
    pairs: Vec<(Elem, Elem)>,
    start: u64,
    memo: HashMap<(u64, u32), bool>,
}

impl<'a> GameCtx<'a> {
    fn new(s: &'a Structure, t: &'a Structure) -> Result<GameCtx<'a>> {
        if s.vocab() != t.vocab() {
            return Err(Error::VocabMismatch);
        }
        if !s.vocab().functions().is_empty() {
            return Err(Error::Unsupported(
                "EF games over function symbols".to_string(),
            ));
        }
        let pairs: Vec<(Elem, Elem)> = (0..s.size())
            .flat_map(|a| (0..t.size()).map(move |b| (a, b)))
            .collect();
        if pairs.len() > MAX_GAME_PAIRS {
            return Err(Error::TooLarge(format!(
                "{} candidate game pairs (limit {MAX_GAME_PAIRS})",
                pairs.len()
            )));
        }
        let mut start = 0u64;
        for c in s.vocab().constants().clone() {
            let a = s.constant(&c).unwrap();
            let b = t.constant(&c).unwrap();
            let i = pairs.iter().position(|&p| p == (a, b)).unwrap();
            start |= 1 << i;
        }
        Ok(GameCtx {
            s,
            t,
            pairs,
            start,
            memo: HashMap::new(),
        })
    }

    fn position(&self, mask: u64) -> PartialCorrespondence {
        PartialCorrespondence::new(
            (0..self.pairs.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| self.pairs[i]),
        )
    }

    fn wpi(&self, mask: u64) -> bool {
        is_weak_partial_iso(self.s, self.t, &self.position(mask))
    }

    fn winning(&mut self, mask: u64, k: u32) -> bool {
        if let Some(&v) = self.memo.get(&(mask, k)) {
            return v;
        }
        let v = self.winning_uncached(mask, k);
        self.memo.insert((mask, k), v);
        v
    }

    fn winning_uncached(&mut self, mask: u64, k: u32) -> bool {
        if !self.wpi(mask) {
            return false;
        }
        if k == 0 {
            return true;
        }
        for a in 0..self.s.size() {
            if !(0..self.t.size())
                .any(|b| self.winning(mask | self.pair_bit(a, b), k - 1))
            {
                return false;
            }
        }
        for b in 0..self.t.size() {
            if !(0..self.s.size())
                .any(|a| self.winning(mask | self.pair_bit(a, b), k - 1))
            {
                return false;
            }
        }
        true
    }

    fn pair_bit(&self, a: Elem, b: Elem) -> u64 {
        // pairs are laid out row-major over (a, b)
        1 << (a * self.t.size() + b)
    }
}

/// Does the duplicator survive `n` rounds from the initial position (the
/// constant pairs)?
pub fn ef_equiv(s: &Structure, t: &Structure, n: u32) -> Result<bool> {
    let mut ctx = GameCtx::new(s, t)?;
    let start = ctx.start;
    Ok(ctx.winning(start, n))
}

/// Least round count at which the structures separate, or `None` when they
/// are still equivalent at `max_n` rounds.
pub fn ef_rank(s: &Structure, t: &Structure, max_n: u32) -> Result<Option<u32>> {
    for n in 0..=max_n {
        if !ef_equiv(s, t, n)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Unbounded back-and-forth equivalence: does a nonempty set of weak
/// partial isomorphisms closed under both extension directions exist?
/// Computed as a greatest fixpoint over the full position space; when that
/// space is too large the structures are first collapsed to their
/// reductions, which changes neither side of the question.
pub fn karp_equiv(s: &Structure, t: &Structure) -> Result<bool> {
    if s.vocab() != t.vocab() {
        return Err(Error::VocabMismatch);
    }
    if !s.vocab().functions().is_empty() {
        return Err(Error::Unsupported(
            "EF games over function symbols".to_string(),
        ));
    }
    if s.size() * t.size() > 16 {
        let (rs, _) = reduce(s);
        let (rt, _) = reduce(t);
        if rs.size() * rt.size() > 16 {
            return Err(Error::TooLarge(format!(
                "{} candidate game pairs after reduction",
                rs.size() * rt.size()
            )));
        }
        return karp_equiv(&rs, &rt);
    }
    let ctx = GameCtx::new(s, t)?;
    let npairs = ctx.pairs.len();
    let nmasks = 1usize << npairs;
    let max_arity = s.vocab().relations().values().copied().max().unwrap_or(1);
    // for arities up to 2, a position is a weak partial isomorphism iff all
    // its singletons and unordered pairs are, which turns the check into
    // table lookups
    let mut alive: Vec<bool> = if max_arity <= 2 {
        let ok1: Vec<bool> = (0..npairs).map(|i| ctx.wpi(1 << i)).collect();
        let ok2: Vec<Vec<bool>> = (0..npairs)
            .map(|i| (0..npairs).map(|j| ctx.wpi(1 << i | 1 << j)).collect())
            .collect();
        (0..nmasks)
            .map(|m| {
                let bits: Vec<usize> = (0..npairs).filter(|i| m >> i & 1 == 1).collect();
                bits.iter().all(|&i| ok1[i])
                    && bits
                        .iter()
                        .enumerate()
                        .all(|(k, &i)| bits[k + 1..].iter().all(|&j| ok2[i][j]))
            })
            .collect()
    } else {
        (0..nmasks).map(|m| ctx.wpi(m as u64)).collect()
    };
    for m in 0..nmasks {
        if m as u64 & ctx.start != ctx.start {
            alive[m] = false;
        }
    }
    loop {
        let mut changed = false;
        for m in 0..nmasks {
            if !alive[m] {
                continue;
            }
            let extendable = (0..s.size()).all(|a| {
                (0..t.size()).any(|b| alive[m | ctx.pair_bit(a, b) as usize])
            }) && (0..t.size()).all(|b| {
                (0..s.size()).any(|a| alive[m | ctx.pair_bit(a, b) as usize])
            });
            if !extendable {
                alive[m] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(alive.iter().any(|&v| v))
}

/// First sentence in the bounded enumeration that is true on `s` and false
/// on `t`. The enumeration emits each generator together with its dual, so
/// whenever the structures separate at rank `n` a witness with this
/// polarity exists in the stream.
pub fn distinguishing_sentence(s: &Structure, t: &Structure, n: u32) -> Result<Formula> {
    let vars = (n as usize).max(1);
    let fs = enumerate_sentences(s.vocab(), n, vars)?;
    for f in fs {
        if eval_sentence(s, &f)? && !eval_sentence(t, &f)? {
            return Ok(f);
        }
    }
    Err(Error::NotDistinguishable)
}

// ---------------------------------------------------------------------------
// Theory emission
// ---------------------------------------------------------------------------

/// Names of the scaffold symbols used by the emitted theories. `Lt` plays
/// the strict order and primed copies carry the `_p` suffix, keeping every
/// emitted formula inside the ASCII grammar.
pub const ORDER_SYMBOL: &str = "Lt";
pub const LEVEL_SYMBOL: &str = "I";
pub const GAME_SYMBOL: &str = "G";
pub const KARP_SYMBOL: &str = "K";
pub const LAST_CONSTANT: &str = "c0";
pub const FIELD_SYMBOL: &str = "U";
pub const EQUALITY_RELATION: &str = "E";

fn primed(name: &str) -> String {
    format!("{name}_p")
}

/// The encoding vocabulary: the base symbols, their primed copies, and the
/// order/level/game scaffold.
pub fn game_vocabulary(tau0: &Vocabulary) -> Result<Vocabulary> {
    let mut primed_vocab = Vocabulary::new();
    for (r, &a) in tau0.relations() {
        primed_vocab = primed_vocab.with_relation(&primed(r), a);
    }
    for (f, &a) in tau0.functions() {
        primed_vocab = primed_vocab.with_function(&primed(f), a);
    }
    for c in tau0.constants() {
        primed_vocab = primed_vocab.with_constant(&primed(c));
    }
    let scaffold = Vocabulary::new()
        .with_relation(ORDER_SYMBOL, 2)
        .with_relation(LEVEL_SYMBOL, 2)
        .with_relation(GAME_SYMBOL, 3)
        .with_constant(LAST_CONSTANT);
    tau0.union_disjoint(&primed_vocab)?.union_disjoint(&scaffold)
}

fn lt(a: &str, b: &str) -> Formula {
    Formula::atom(ORDER_SYMBOL, vec![Term::var(a), Term::var(b)])
}

fn level(a: Term, b: Term) -> Formula {
    Formula::atom(LEVEL_SYMBOL, vec![a, b])
}

fn game(p: Term, x: Term, y: Term) -> Formula {
    Formula::atom(GAME_SYMBOL, vec![p, x, y])
}

fn xy_vars(arity: usize) -> (Vec<String>, Vec<String>) {
    (
        (0..arity).map(|i| format!("x{i}")).collect(),
        (0..arity).map(|i| format!("y{i}")).collect(),
    )
}

fn matched(p: &str, xs: &[String], ys: &[String]) -> Vec<Formula> {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| game(Term::var(p), Term::var(x), Term::var(y)))
        .collect()
}

/// `forall z w. G(p,z,w) -> G(q,z,w) [& G(q2,z,w)]`
fn carries_over(p: &str, qs: &[&str]) -> Formula {
    Formula::forall_many(
        &["z", "w"],
        Formula::implies(
            game(Term::var(p), Term::var("z"), Term::var("w")),
            Formula::and(
                qs.iter()
                    .map(|q| game(Term::var(q), Term::var("z"), Term::var("w")))
                    .collect(),
            ),
        ),
    )
}

/// The game-certificate theory: level `c0` is inhabited, matched tuples
/// transfer every base relation to its primed copy, and positions at a
/// level extend downward through function, constant, and back-and-forth
/// moves.
pub fn emit_game_theory(tau0: &Vocabulary) -> Vec<Formula> {
    let mut out = Vec::new();
    out.push(Formula::exists(
        "p",
        level(Term::Const(LAST_CONSTANT.into()), Term::var("p")),
    ));
    for (rel, &arity) in tau0.relations() {
        let (xs, ys) = xy_vars(arity);
        let body = Formula::implies(
            Formula::and(matched("p", &xs, &ys)),
            Formula::iff(
                Formula::atom(rel, xs.iter().map(|v| Term::var(v)).collect()),
                Formula::atom(&primed(rel), ys.iter().map(|v| Term::var(v)).collect()),
            ),
        );
        let mut vars: Vec<&str> = vec!["p"];
        vars.extend(xs.iter().map(|v| v.as_str()));
        vars.extend(ys.iter().map(|v| v.as_str()));
        out.push(Formula::forall_many(&vars, body));
    }
    let guard = |p: &str| Formula::And(vec![lt("u", "v"), level(Term::var("v"), Term::var(p))]);
    for (fun, &arity) in tau0.functions() {
        let (xs, ys) = xy_vars(arity);
        let mut premises = vec![lt("u", "v"), level(Term::var("v"), Term::var("p"))];
        premises.extend(matched("p", &xs, &ys));
        let fx = Term::App(fun.clone(), xs.iter().map(|v| Term::var(v)).collect());
        let fy = Term::App(primed(fun), ys.iter().map(|v| Term::var(v)).collect());
        let conclusion = Formula::exists(
            "q",
            Formula::And(vec![
                level(Term::var("u"), Term::var("q")),
                game(Term::var("q"), fx, fy),
                carries_over("p", &["q"]),
            ]),
        );
        let mut vars: Vec<&str> = vec!["u", "v", "p"];
        vars.extend(xs.iter().map(|v| v.as_str()));
        vars.extend(ys.iter().map(|v| v.as_str()));
        out.push(Formula::forall_many(
            &vars,
            Formula::implies(Formula::And(premises), conclusion),
        ));
    }
    for c in tau0.constants() {
        let conclusion = Formula::exists(
            "q",
            Formula::And(vec![
                level(Term::var("u"), Term::var("q")),
                game(
                    Term::var("q"),
                    Term::Const(c.clone()),
                    Term::Const(primed(c)),
                ),
                carries_over("p", &["q"]),
            ]),
        );
        out.push(Formula::forall_many(
            &["u", "v", "p"],
            Formula::implies(guard("p"), conclusion),
        ));
    }
    let back_forth = Formula::forall(
        "x",
        Formula::exists_many(
            &["q", "q2", "y", "y2"],
            Formula::And(vec![
                level(Term::var("u"), Term::var("q")),
                level(Term::var("u"), Term::var("q2")),
                game(Term::var("q"), Term::var("x"), Term::var("y")),
                game(Term::var("q2"), Term::var("y2"), Term::var("x")),
                carries_over("p", &["q", "q2"]),
            ]),
        ),
    );
    out.push(Formula::forall_many(
        &["u", "v", "p"],
        Formula::implies(guard("p"), back_forth),
    ));
    out
}

/// The unbounded variant: a single predicate of positions closed under the
/// extension moves, replacing the levelled scaffold.
pub fn emit_karp_theory(tau: &Vocabulary) -> Vec<Formula> {
    let kp = |p: &str| Formula::atom(KARP_SYMBOL, vec![Term::var(p)]);
    let mut out = vec![Formula::exists("p", kp("p"))];
    for (rel, &arity) in tau.relations() {
        let (xs, ys) = xy_vars(arity);
        let body = Formula::implies(
            Formula::and(matched("p", &xs, &ys)),
            Formula::iff(
                Formula::atom(rel, xs.iter().map(|v| Term::var(v)).collect()),
                Formula::atom(&primed(rel), ys.iter().map(|v| Term::var(v)).collect()),
            ),
        );
        let mut vars: Vec<&str> = vec!["p"];
        vars.extend(xs.iter().map(|v| v.as_str()));
        vars.extend(ys.iter().map(|v| v.as_str()));
        out.push(Formula::forall_many(&vars, body));
    }
    for (fun, &arity) in tau.functions() {
        let (xs, ys) = xy_vars(arity);
        let mut premises = vec![kp("p")];
        premises.extend(matched("p", &xs, &ys));
        let fx = Term::App(fun.clone(), xs.iter().map(|v| Term::var(v)).collect());
        let fy = Term::App(primed(fun), ys.iter().map(|v| Term::var(v)).collect());
        let conclusion = Formula::exists(
            "q",
            Formula::And(vec![kp("q"), game(Term::var("q"), fx, fy), carries_over("p", &["q"])]),
        );
        let mut vars: Vec<&str> = vec!["p"];
        vars.extend(xs.iter().map(|v| v.as_str()));
        vars.extend(ys.iter().map(|v| v.as_str()));
        out.push(Formula::forall_many(
            &vars,
            Formula::implies(Formula::And(premises), conclusion),
        ));
    }
    for c in tau.constants() {
        let conclusion = Formula::exists(
            "q",
            Formula::And(vec![
                kp("q"),
                game(
                    Term::var("q"),
                    Term::Const(c.clone()),
                    Term::Const(primed(c)),
                ),
                carries_over("p", &["q"]),
            ]),
        );
        out.push(Formula::forall(
            "p",
            Formula::implies(kp("p"), conclusion),
        ));
    }
    out.push(Formula::forall_many(
        &["p", "x"],
        Formula::implies(
            kp("p"),
            Formula::exists_many(
                &["q", "q2", "y", "y2"],
                Formula::And(vec![
                    kp("q"),
                    kp("q2"),
                    game(Term::var("q"), Term::var("x"), Term::var("y")),
                    game(Term::var("q2"), Term::var("y2"), Term::var("x")),
                    carries_over("p", &["q", "q2"]),
                ]),
            ),
        ),
    ));
    out
}

fn e_rel(a: Term, b: Term) -> Formula {
    Formula::atom(EQUALITY_RELATION, vec![a, b])
}

/// The order-and-equality axiom block: `U` is the field of the order, `E`
/// satisfies the equality axioms for every symbol of the vocabulary, and
/// the order is, modulo `E`, a strict linear order of `U` with last
/// element `c0` and immediate predecessors for non-minimal elements.
pub fn emit_order_equality_axioms(rho: &Vocabulary) -> Result<Vec<Formula>> {
    for (sym, arity, kind) in [
        (FIELD_SYMBOL, 1usize, "relation"),
        (EQUALITY_RELATION, 2, "relation"),
        (ORDER_SYMBOL, 2, "relation"),
    ] {
        if rho.relation_arity(sym) != Some(arity) {
            return Err(Error::MissingScaffoldSymbols(format!("{kind} {sym}/{arity}")));
        }
    }
    if !rho.has_constant(LAST_CONSTANT) {
        return Err(Error::MissingScaffoldSymbols(format!(
            "constant {LAST_CONSTANT}"
        )));
    }
    let u = |x: &str| Formula::atom(FIELD_SYMBOL, vec![Term::var(x)]);
    let mut out = Vec::new();
    // the field axiom
    out.push(Formula::forall(
        "x",
        Formula::iff(
            u("x"),
            Formula::exists("y", Formula::Or(vec![lt("x", "y"), lt("y", "x")])),
        ),
    ));
    // equality axioms: reflexivity plus a congruence clause per symbol and
    // argument position
    out.push(Formula::forall("x", e_rel(Term::var("x"), Term::var("x"))));
    for (rel, &arity) in rho.relations() {
        for pos in 0..arity {
            let ws: Vec<Term> = (0..arity).map(|i| Term::var(&format!("w{i}"))).collect();
            let with = |ws: &[Term], v: &str| {
                let mut ws = ws.to_vec();
                ws[pos] = Term::var(v);
                ws
            };
            let body = Formula::implies(
                e_rel(Term::var("x"), Term::var("y")),
                Formula::iff(
                    Formula::atom(rel, with(&ws, "x")),
                    Formula::atom(rel, with(&ws, "y")),
                ),
            );
            let mut vars: Vec<String> = vec!["x".into(), "y".into()];
            vars.extend((0..arity).filter(|&i| i != pos).map(|i| format!("w{i}")));
            let refs: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
            out.push(Formula::forall_many(&refs, body));
        }
    }
    for (fun, &arity) in rho.functions() {
        for pos in 0..arity {
            let args = |v: &str| -> Vec<Term> {
                (0..arity)
                    .map(|i| {
                        if i == pos {
                            Term::var(v)
                        } else {
                            Term::var(&format!("w{i}"))
                        }
                    })
                    .collect()
            };
            let body = Formula::implies(
                e_rel(Term::var("x"), Term::var("y")),
                e_rel(
                    Term::App(fun.clone(), args("x")),
                    Term::App(fun.clone(), args("y")),
                ),
            );
            let mut vars: Vec<String> = vec!["x".into(), "y".into()];
            vars.extend((0..arity).filter(|&i| i != pos).map(|i| format!("w{i}")));
            let refs: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
            out.push(Formula::forall_many(&refs, body));
        }
    }
    // the order block, with E in place of equality
    out.push(Formula::forall("x", Formula::not(lt("x", "x"))));
    out.push(Formula::forall_many(
        &["x", "y", "z"],
        Formula::implies(
            Formula::And(vec![lt("x", "y"), lt("y", "z")]),
            lt("x", "z"),
        ),
    ));
    out.push(Formula::forall_many(
        &["x", "y"],
        Formula::implies(
            Formula::And(vec![u("x"), u("y")]),
            Formula::Or(vec![
                lt("x", "y"),
                lt("y", "x"),
                e_rel(Term::var("x"), Term::var("y")),
            ]),
        ),
    ));
    out.push(Formula::And(vec![
        Formula::atom(FIELD_SYMBOL, vec![Term::Const(LAST_CONSTANT.into())]),
        Formula::forall(
            "x",
            Formula::implies(
                u("x"),
                Formula::Or(vec![
                    Formula::atom(
                        ORDER_SYMBOL,
                        vec![Term::var("x"), Term::Const(LAST_CONSTANT.into())],
                    ),
                    e_rel(Term::var("x"), Term::Const(LAST_CONSTANT.into())),
                ]),
            ),
        ),
    ]));
    out.push(Formula::forall_many(
        &["x", "y"],
        Formula::implies(
            Formula::And(vec![u("x"), u("y"), lt("x", "y")]),
            Formula::exists(
                "z",
                Formula::And(vec![
                    lt("z", "y"),
                    Formula::forall(
                        "w",
                        Formula::implies(
                            lt("w", "y"),
                            Formula::Or(vec![lt("w", "z"), e_rel(Term::var("w"), Term::var("z"))]),
                        ),
                    ),
                ]),
            ),
        ),
    ));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Concrete encoding of a game certificate
// ---------------------------------------------------------------------------

/// Per-clause verdicts of the emitted theory on the encoding structure.
pub type TheoryReport = Vec<(Formula, bool)>;

fn with_domain_names(s: &Structure, names: Vec<String>) -> Structure {
    let mut out = Structure::new(s.vocab().clone(), names);
    for (rel, _) in s.vocab().relations() {
        out.set_relation(rel, s.relation(rel).cloned().unwrap_or_default());
    }
    for (fun, _) in s.vocab().functions() {
        out.set_function(fun, s.function_table(fun).cloned().unwrap_or_default());
    }
    for c in s.vocab().constants() {
        out.set_constant(c, s.constant(c).unwrap());
    }
    out
}

/// Builds one finite structure that carries an `n`-round certificate for
/// `s` and `t` and model-checks every emitted theory clause against it.
///
/// The two structures are first inflated to a common carrier and merged
/// over it with the second copy renamed to the primed vocabulary. The
/// construction deviates from packing certificate codes into the element
/// domain itself: codes and round indices live on extra scaffold elements
/// of the same (finite) domain, and every coded position relates each
/// scaffold element to itself so that scaffold elements are inert in the
/// back-and-forth clause.
pub fn build_ef_encoding(
    s: &Structure,
    t: &Structure,
    n: u32,
) -> Result<(Structure, EFCertificate, TheoryReport)> {
    if !ef_equiv(s, t, n)? {
        return Err(Error::NotEquivalent);
    }
    let k = s.size().max(t.size());
    let carrier: Vec<String> = (0..k).map(|i| format!("e{i}")).collect();
    let (sa, _) = blow_up(s, k, None)?;
    let (tb, _) = blow_up(t, k, None)?;
    let sa = with_domain_names(&sa, carrier.clone());
    let tb = with_domain_names(&tb, carrier.clone());
    let tbp = rename(&tb, &primed_map(tb.vocab()))?;
    let merged = merge_same_domain(&sa, &tbp)?;

    // winning positions of the blown-up pair, per remaining round count
    let mut ctx = GameCtx::new(&sa, &tb)?;
    let npairs = ctx.pairs.len();
    if npairs > 16 {
        return Err(Error::TooLarge(format!(
            "{npairs} candidate game pairs in the encoding"
        )));
    }
    let all_masks: Vec<u64> = (0..1u64 << npairs)
        .filter(|&m| m & ctx.start == ctx.start)
        .collect();
    // Level j holds the positions reachable in n - j rounds that still win
    // j more. Restricting to reachable positions keeps the scaffold small;
    // the extension clauses stay satisfied because extending a level-v
    // position adds one pair and lands in every lower level.
    let mut levels_masks: Vec<Vec<u64>> = Vec::new();
    for j in 0..=n {
        levels_masks.push(
            all_masks
                .iter()
                .copied()
                .filter(|&m| {
                    (m & !ctx.start).count_ones() <= n - j && ctx.winning(m, j)
                })
                .collect(),
        );
    }
    if !levels_masks[n as usize].contains(&ctx.start) {
        return Err(Error::NotEquivalent);
    }

    let mut codes: Vec<u64> = levels_masks.iter().flatten().copied().collect();
    codes.sort_unstable();
    codes.dedup();
    let code_index: BTreeMap<u64, usize> = codes.iter().enumerate().map(|(i, &m)| (m, i)).collect();

    let mut domain = carrier.clone();
    let index_base = domain.len();
    domain.extend((0..=n).map(|j| format!("r{j}")));
    let code_base = domain.len();
    domain.extend((0..codes.len()).map(|i| format!("q{i}")));

    let vocab = game_vocabulary(sa.vocab())?;
    let mut enc = Structure::new(vocab, domain.clone());
    for (rel, _) in merged.vocab().relations() {
        enc.set_relation(rel, merged.relation(rel).cloned().unwrap_or_default());
    }
    for c in merged.vocab().constants() {
        enc.set_constant(c, merged.constant(c).unwrap());
    }
    for i in 0..=n as usize {
        for j in i + 1..=n as usize {
            enc.set_tuple(ORDER_SYMBOL, vec![index_base + i, index_base + j]);
        }
    }
    enc.set_constant(LAST_CONSTANT, index_base + n as usize);
    for (j, masks) in levels_masks.iter().enumerate() {
        for m in masks {
            enc.set_tuple(LEVEL_SYMBOL, vec![index_base + j, code_base + code_index[m]]);
        }
    }
    let scaffold: Vec<Elem> = (index_base..domain.len()).collect();
    for (&mask, &i) in &code_index {
        let code = code_base + i;
        for (bit, &(a, b)) in ctx.pairs.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                enc.set_tuple(GAME_SYMBOL, vec![code, a, b]);
            }
        }
        for &d in &scaffold {
            enc.set_tuple(GAME_SYMBOL, vec![code, d, d]);
        }
    }

    let certificate = EFCertificate {
        levels: levels_masks
            .iter()
            .map(|ms| ms.iter().map(|&m| ctx.position(m)).collect())
            .collect(),
    };
    let theory = emit_game_theory(sa.vocab());
    let report = theory
        .into_iter()
        .map(|f| {
            let v = eval_sentence(&enc, &f)?;
            Ok((f, v))
        })
        .collect::<Result<TheoryReport>>()?;
    Ok((enc, certificate, report))
}

fn primed_map(vocab: &Vocabulary) -> BTreeMap<String, String> {
    vocab
        .symbols()
        .map(|s| (s.clone(), primed(s)))
        .collect()
}

// re-exported convenience: evaluate a theory against a structure
pub fn check_theory(s: &Structure, theory: &[Formula]) -> Result<TheoryReport> {
    theory
        .iter()
        .map(|f| {
            let v = eval::eval_sentence(s, f)?;
            Ok((f.clone(), v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leibniz::weak_iso;

    fn p_structure(n: usize, p: &[usize]) -> Structure {
        let vocab = Vocabulary::new().with_relation("P", 1);
        let mut s = Structure::new(vocab, (0..n).map(|i| i.to_string()).collect());
        for &i in p {
            s.set_tuple("P", vec![i]);
        }
        s
    }

    fn r_structure(n: usize, edges: &[(usize, usize)]) -> Structure {
        let vocab = Vocabulary::new().with_relation("R", 2);
        let mut s = Structure::new(vocab, (0..n).map(|i| i.to_string()).collect());
        for &(a, b) in edges {
            s.set_tuple("R", vec![a, b]);
        }
        s
    }

    #[test]
    fn weak_partial_iso_checks() {
        let a = p_structure(1, &[0]);
        let b = p_structure(1, &[]);
        assert!(is_weak_partial_iso(&a, &b, &PartialCorrespondence::new([])));
        assert!(!is_weak_partial_iso(
            &a,
            &b,
            &PartialCorrespondence::new([(0, 0)])
        ));
        let c1 = r_structure(3, &[(0, 1), (1, 2), (2, 0)]);
        let c2 = r_structure(3, &[(1, 2), (2, 0), (0, 1)]);
        assert!(is_weak_partial_iso(
            &c1,
            &c2,
            &PartialCorrespondence::new([(0, 1)])
        ));
    }

    #[test]
    fn ef_examples() {
        let a = r_structure(1, &[(0, 0)]);
        let b = r_structure(2, &[(0, 1), (1, 0)]);
        assert!(ef_equiv(&a, &b, 0).unwrap());
        assert!(!ef_equiv(&a, &b, 1).unwrap());
        assert_eq!(ef_rank(&a, &b, 3).unwrap(), Some(1));
        let c = p_structure(2, &[0, 1]);
        let d = p_structure(1, &[0]);
        for n in 0..=3 {
            assert!(ef_equiv(&c, &d, n).unwrap(), "n={n}");
        }
        assert!(ef_equiv(&c, &c, 3).unwrap());
    }

    #[test]
    fn karp_matches_weak_iso() {
        let cases = [
            (p_structure(2, &[0, 1]), p_structure(1, &[0])),
            (p_structure(1, &[0]), p_structure(1, &[])),
            (p_structure(3, &[0]), p_structure(3, &[0, 1])),
            (
                r_structure(1, &[(0, 0)]),
                r_structure(2, &[(0, 1), (1, 0)]),
            ),
        ];
        for (s, t) in &cases {
            assert_eq!(
                karp_equiv(s, t).unwrap(),
                weak_iso(s, t).unwrap().is_some()
            );
        }
        let s = p_structure(2, &[0]);
        assert!(karp_equiv(&s, &s).unwrap());
    }

    #[test]
    fn distinguishing_sentences() {
        let a = r_structure(1, &[(0, 0)]);
        let b = r_structure(2, &[(0, 1), (1, 0)]);
        let f = distinguishing_sentence(&a, &b, 1).unwrap();
        assert_eq!(f.to_string(), "exists x1. R(x1,x1)");
        assert!(eval_sentence(&a, &f).unwrap());
        assert!(!eval_sentence(&b, &f).unwrap());

        let c = p_structure(1, &[0]);
        let d = p_structure(1, &[]);
        let f = distinguishing_sentence(&c, &d, 1).unwrap();
        assert_eq!(f.to_string(), "exists x1. P(x1)");

        let e = p_structure(2, &[0, 1]);
        assert!(matches!(
            distinguishing_sentence(&c, &e, 2),
            Err(Error::NotDistinguishable)
        ));
    }

    #[test]
    fn game_theory_shapes() {
        let tau = Vocabulary::new().with_relation("P", 1);
        let theory = emit_game_theory(&tau);
        assert_eq!(theory[0].to_string(), "exists p. I(c0,p)");
        assert_eq!(
            theory[1].to_string(),
            "forall p. forall x0. forall y0. G(p,x0,y0) -> \
             (P(x0) -> P_p(y0)) & (P_p(y0) -> P(x0))"
        );
        // no function or constant clauses for a relational vocabulary
        assert_eq!(theory.len(), 3);
        let with_const = tau.clone().with_constant("c");
        assert_eq!(emit_game_theory(&with_const).len(), 4);
    }

    #[test]
    fn karp_theory_shapes() {
        let tau = Vocabulary::new().with_relation("P", 1);
        let theory = emit_karp_theory(&tau);
        assert_eq!(theory[0].to_string(), "exists p. K(p)");
        assert_eq!(theory.len(), 3);
    }

    #[test]
    fn order_axioms_on_hand_built_order() {
        let rho = Vocabulary::new()
            .with_relation(FIELD_SYMBOL, 1)
            .with_relation(EQUALITY_RELATION, 2)
            .with_relation(ORDER_SYMBOL, 2)
            .with_constant(LAST_CONSTANT);
        let axioms = emit_order_equality_axioms(&rho).unwrap();
        let mut good = Structure::new(rho.clone(), vec!["0".into(), "1".into(), "2".into()]);
        for i in 0..3 {
            good.set_tuple(FIELD_SYMBOL, vec![i]);
            good.set_tuple(EQUALITY_RELATION, vec![i, i]);
            for j in i + 1..3 {
                good.set_tuple(ORDER_SYMBOL, vec![i, j]);
            }
        }
        good.set_constant(LAST_CONSTANT, 2);
        for ax in &axioms {
            assert!(eval_sentence(&good, ax).unwrap(), "failed: {ax}");
        }
        // E relating order-distinguishable elements breaks a congruence
        // clause
        let mut bad = good.clone();
        bad.set_tuple(EQUALITY_RELATION, vec![0, 2]);
        bad.set_tuple(EQUALITY_RELATION, vec![2, 0]);
        assert!(axioms
            .iter()
            .any(|ax| !eval_sentence(&bad, ax).unwrap()));

        assert!(matches!(
            emit_order_equality_axioms(&Vocabulary::new()),
            Err(Error::MissingScaffoldSymbols(_))
        ));
    }

    #[test]
    fn encoding_satisfies_theory() {
        let a = p_structure(1, &[0]);
        let (enc, cert, report) = build_ef_encoding(&a, &a, 1).unwrap();
        assert!(!cert.levels[1].is_empty());
        assert!(enc.size() >= 3);
        for (f, ok) in &report {
            assert!(ok, "clause failed: {f}");
        }
        let b = p_structure(2, &[0, 1]);
        let (_, _, report) = build_ef_encoding(&a, &b, 2).unwrap();
        for (f, ok) in &report {
            assert!(ok, "clause failed: {f}");
        }
        let c = p_structure(1, &[]);
        assert!(matches!(
            build_ef_encoding(&a, &c, 1),
            Err(Error::NotEquivalent)
        ));
    }
}
