//! The Leibniz congruence, the reduction of a structure by it, and weak
//! isomorphism, decided through isomorphism of reductions and cross-checked
//! by a brute-force search for relativeness correspondences.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::structure::{all_tuples, Elem, ElementMap, Partition, Structure};
use crate::Result;

/// A binary relation between the domains of two structures, used as a weak
/// isomorphism witness. Serializes as a JSON list of `[left, right]` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    pub pairs: BTreeSet<(Elem, Elem)>,
}

impl Correspondence {
    pub fn to_json(&self, left: &Structure, right: &Structure) -> serde_json::Value {
        serde_json::Value::Array(
            self.pairs
                .iter()
                .map(|&(a, b)| {
                    serde_json::json!([left.elem_name(a), right.elem_name(b)])
                })
                .collect(),
        )
    }
}

/// Computes the Leibniz congruence: the largest congruence of the structure.
///
/// Elements start in the same class when no relation can tell them apart by
/// a single-position swap (multi-position indistinguishability follows by
/// chaining swaps; see [`crate::structure::is_congruence`]). The partition is
/// then refined to a fixpoint: a class splits when some function symbol maps
/// some single-swap context pair to inequivalent values.
pub fn leibniz_congruence(s: &Structure) -> Partition {
    let n = s.size();
    // relational signature: membership of every single-position completion
    let rel_signature = |a: Elem| -> Vec<bool> {
        let mut sig = Vec::new();
        for (name, &arity) in s.vocab().relations() {
            for i in 0..arity {
                for ctx in all_tuples(n, arity - 1) {
                    let mut tuple = ctx.clone();
                    tuple.insert(i, a);
                    sig.push(s.has_tuple(name, &tuple));
                }
            }
        }
        sig
    };
    let sigs: Vec<Vec<bool>> = (0..n).map(rel_signature).collect();
    let mut class_of: Vec<usize> = (0..n)
        .map(|a| sigs.iter().position(|s2| *s2 == sigs[a]).unwrap())
        .collect();
    let mut part = Partition::from_class_of(&class_of);
    if s.vocab().functions().is_empty() {
        return part;
    }
    loop {
        // functional signature relative to the current partition
        let fun_signature = |a: Elem| -> Vec<usize> {
            let mut sig = vec![part.class_of(a)];
            for (name, &arity) in s.vocab().functions() {
                for i in 0..arity {
                    for ctx in all_tuples(n, arity - 1) {
                        let mut args = ctx.clone();
                        args.insert(i, a);
                        let val = s.apply(name, &args).expect("total function");
                        sig.push(part.class_of(val));
                    }
                }
            }
            sig
        };
        let fsigs: Vec<Vec<usize>> = (0..n).map(fun_signature).collect();
        class_of = (0..n)
            .map(|a| fsigs.iter().position(|s2| *s2 == fsigs[a]).unwrap())
            .collect();
        let next = Partition::from_class_of(&class_of);
        if next == part {
            return part;
        }
        part = next;
    }
}

/// Quotient by the Leibniz congruence, with the projection map. The
/// projection is a surjective strict homomorphism.
pub fn reduce(s: &Structure) -> (Structure, ElementMap) {
    let part = leibniz_congruence(s);
    let reduced = crate::structure::quotient(s, &part).expect("Leibniz partition is a congruence");
    let map: Vec<Elem> = s.elems().map(|e| part.class_of(e)).collect();
    let projection = ElementMap::new(s.clone(), reduced.clone(), map).expect("well-formed map");
    (reduced, projection)
}

pub fn is_reduced(s: &Structure) -> bool {
    leibniz_congruence(s).is_identity()
}

/// Searches for an isomorphism (a bijection preserving relations
/// biconditionally and functions/constants equationally) by backtracking,
/// pruning candidates through per-element atomic profiles. Returns the map
/// source-index -> target-index, if any.
pub fn isomorphic(s: &Structure, t: &Structure) -> Result<Option<Vec<Elem>>> {
    if s.vocab() != t.vocab() {
        return Err(Error::VocabMismatch);
    }
    if s.size() != t.size() {
        return Ok(None);
    }
    let sp = profiles(s);
    let tp = profiles(t);
    {
        let mut a = sp.clone();
        let mut b = tp.clone();
        a.sort();
        b.sort();
        if a != b {
            return Ok(None);
        }
    }
    let n = s.size();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if assign(s, t, &sp, &tp, &mut map, &mut used, 0) {
        Ok(Some(map))
    } else {
        Ok(None)
    }
}

/// Per-element invariant: for each relation and each position, the number of
/// tuples there with the element at that position, plus the full-diagonal bit.
fn profiles(s: &Structure) -> Vec<Vec<usize>> {
    s.elems()
        .map(|a| {
            let mut p = Vec::new();
            for (name, &arity) in s.vocab().relations() {
                let tuples = s.relation(name).expect("interpreted");
                for i in 0..arity {
                    p.push(tuples.iter().filter(|t| t[i] == a).count());
                }
                p.push(usize::from(s.has_tuple(name, &vec![a; arity])));
            }
            p
        })
        .collect()
}

fn assign(
    s: &Structure,
    t: &Structure,
    sp: &[Vec<usize>],
    tp: &[Vec<usize>],
    map: &mut Vec<Elem>,
    used: &mut Vec<bool>,
    next: Elem,
) -> bool {
    let n = s.size();
    if next == n {
        return check_total(s, t, map);
    }
    for b in 0..n {
        if used[b] || sp[next] != tp[b] {
            continue;
        }
        map[next] = b;
        used[b] = true;
        if check_partial(s, t, map, next) && assign(s, t, sp, tp, map, used, next + 1) {
            return true;
        }
        map[next] = usize::MAX;
        used[b] = false;
    }
    false
}

/// Checks relation transfer for tuples whose components are all mapped and
/// which involve the freshly mapped element.
fn check_partial(s: &Structure, t: &Structure, map: &[Elem], fresh: Elem) -> bool {
    for (name, &arity) in s.vocab().relations() {
        for tuple in all_tuples(fresh + 1, arity) {
            if !tuple.contains(&fresh) {
                continue;
            }
            let image: Vec<Elem> = tuple.iter().map(|&e| map[e]).collect();
            if s.has_tuple(name, &tuple) != t.has_tuple(name, &image) {
                return false;
            }
        }
    }
    true
}

fn check_total(s: &Structure, t: &Structure, map: &[Elem]) -> bool {
    for (name, &arity) in s.vocab().functions() {
        for tuple in s.all_tuples(arity) {
            let image: Vec<Elem> = tuple.iter().map(|&e| map[e]).collect();
            if map[s.apply(name, &tuple).expect("total")] != t.apply(name, &image).expect("total") {
                return false;
            }
        }
    }
    for name in s.vocab().constants() {
        if map[s.constant(name).expect("interpreted")] != t.constant(name).expect("interpreted") {
            return false;
        }
    }
    true
}

/// Decides weak isomorphism by reducing both structures and searching for an
/// isomorphism of the reductions. On success the witness correspondence
/// relates `a` to `b` whenever the isomorphism maps the class of `a` to the
/// class of `b`; it always passes [`is_relativeness_correspondence`].
pub fn weak_iso(s: &Structure, t: &Structure) -> Result<Option<Correspondence>> {
    if s.vocab() != t.vocab() {
        return Err(Error::VocabMismatch);
    }
    let (rs, ps) = reduce(s);
    let (rt, pt) = reduce(t);
    let Some(beta) = isomorphic(&rs, &rt)? else {
        return Ok(None);
    };
    let mut pairs = BTreeSet::new();
    for a in s.elems() {
        for b in t.elems() {
            if beta[ps.map[a]] == pt.map[b] {
                pairs.insert((a, b));
            }
        }
    }
    Ok(Some(Correspondence { pairs }))
}

/// Relativeness-correspondence check: the relation is total and surjective on
/// both sides, transfers every relation biconditionally over matched tuples,
/// and matched arguments yield matched values under every function symbol
/// (with constants as the nullary case). The correspondence is a relation,
/// not a map, so no functionality is required.
pub fn is_relativeness_correspondence(s: &Structure, t: &Structure, c: &Correspondence) -> bool {
    if s.vocab() != t.vocab() {
        return false;
    }
    let mut left_hit = vec![false; s.size()];
    let mut right_hit = vec![false; t.size()];
    for &(a, b) in &c.pairs {
        if a >= s.size() || b >= t.size() {
            return false;
        }
        left_hit[a] = true;
        right_hit[b] = true;
    }
    if !left_hit.iter().all(|&h| h) || !right_hit.iter().all(|&h| h) {
        return false;
    }
    let pairs: Vec<(Elem, Elem)> = c.pairs.iter().copied().collect();
    for (name, &arity) in s.vocab().relations() {
        for combo in all_tuples(pairs.len(), arity) {
            let left: Vec<Elem> = combo.iter().map(|&i| pairs[i].0).collect();
            let right: Vec<Elem> = combo.iter().map(|&i| pairs[i].1).collect();
            if s.has_tuple(name, &left) != t.has_tuple(name, &right) {
                return false;
            }
        }
    }
    for (name, &arity) in s.vocab().functions() {
        for combo in all_tuples(pairs.len(), arity) {
            let left: Vec<Elem> = combo.iter().map(|&i| pairs[i].0).collect();
            let right: Vec<Elem> = combo.iter().map(|&i| pairs[i].1).collect();
            let lv = s.apply(name, &left).expect("total");
            let rv = t.apply(name, &right).expect("total");
            if !c.pairs.contains(&(lv, rv)) {
                return false;
            }
        }
    }
    for name in s.vocab().constants() {
        let pair = (
            s.constant(name).expect("interpreted"),
            t.constant(name).expect("interpreted"),
        );
        if !c.pairs.contains(&pair) {
            return false;
        }
    }
    true
}

/// Independent oracle: exhaustively searches all relations `⊆ A×B` for a
/// relativeness correspondence. Candidate sets are enumerated in a fixed
/// order (bitmask over the lexicographically sorted pair list, ascending),
/// so the returned witness is deterministic.
pub fn find_correspondence_bruteforce(
    s: &Structure,
    t: &Structure,
    cap: usize,
) -> Result<Option<Correspondence>> {
    if s.vocab() != t.vocab() {
        return Err(Error::VocabMismatch);
    }
    let k = s.size() * t.size();
    if k > cap {
        return Err(Error::TooLarge(format!("|A|*|B| = {k} exceeds cap {cap}")));
    }
    let mut all_pairs = Vec::with_capacity(k);
    for a in s.elems() {
        for b in t.elems() {
            all_pairs.push((a, b));
        }
    }
    // totality and surjectivity as cheap bitmask prefilters
    let mut row = vec![0u64; s.size()];
    let mut col = vec![0u64; t.size()];
    for (i, &(a, b)) in all_pairs.iter().enumerate() {
        row[a] |= 1 << i;
        col[b] |= 1 << i;
    }
    for mask in 1u64..(1u64 << k) {
        if row.iter().chain(col.iter()).any(|&m| mask & m == 0) {
            continue;
        }
        let pairs: BTreeSet<(Elem, Elem)> = (0..k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| all_pairs[i])
            .collect();
        let c = Correspondence { pairs };
        if is_relativeness_correspondence(s, t, &c) {
            return Ok(Some(c));
        }
    }
    Ok(None)
}
