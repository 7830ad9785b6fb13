//! Finite vocabularies and structures, together with the constructions used
//! throughout the crate: reducts, renamings, same-domain merges, quotients,
//! strict homomorphisms and seeded blow-ups.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Reserved equality symbol; never admitted into a vocabulary.
pub const EQUALITY_SYMBOL: &str = "=";

/// Index of an element in a structure's domain.
pub type Elem = usize;

/// A finite signature of relation, function and constant symbols.
///
/// Relation and function arities are at least 1; constants play the role of
/// nullary functions. Symbol names are pairwise distinct across the three
/// kinds and the equality symbol is excluded (identity-free discipline).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    relations: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
    constants: BTreeSet<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_relation(mut self, name: &str, arity: usize) -> Self {
        self.relations.insert(name.to_string(), arity);
        self
    }

    pub fn with_function(mut self, name: &str, arity: usize) -> Self {
        self.functions.insert(name.to_string(), arity);
        self
    }

    pub fn with_constant(mut self, name: &str) -> Self {
        self.constants.insert(name.to_string());
        self
    }

    pub fn relations(&self) -> &BTreeMap<String, usize> {
        &self.relations
    }

    pub fn functions(&self) -> &BTreeMap<String, usize> {
        &self.functions
    }

    pub fn constants(&self) -> &BTreeSet<String> {
        &self.constants
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.contains(name)
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        self.relations.contains_key(name)
            || self.functions.contains_key(name)
            || self.constants.contains(name)
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty()
    }

    /// Only unary relations, no functions, no constants.
    pub fn is_monadic(&self) -> bool {
        self.functions.is_empty()
            && self.constants.is_empty()
            && self.relations.values().all(|&a| a == 1)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &String> {
        self.relations
            .keys()
            .chain(self.functions.keys())
            .chain(self.constants.iter())
    }

    /// Checks the vocabulary invariants: positive arities, no cross-kind
    /// duplicates, no equality symbol.
    pub fn check(&self) -> Result<()> {
        for (name, &arity) in self.relations.iter().chain(self.functions.iter()) {
            if arity == 0 {
                return Err(Error::ArityMismatch {
                    symbol: name.clone(),
                    expected: 1,
                    got: 0,
                });
            }
        }
        let mut seen = BTreeSet::new();
        for name in self.symbols() {
            if name == EQUALITY_SYMBOL {
                return Err(Error::VocabOverlap(name.clone()));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::VocabOverlap(name.clone()));
            }
        }
        Ok(())
    }

    /// True iff every symbol of `self` occurs with the same kind and arity in `other`.
    pub fn is_subvocabulary_of(&self, other: &Vocabulary) -> bool {
        self.relations
            .iter()
            .all(|(n, a)| other.relations.get(n) == Some(a))
            && self
                .functions
                .iter()
                .all(|(n, a)| other.functions.get(n) == Some(a))
            && self.constants.iter().all(|c| other.constants.contains(c))
    }

    /// Disjoint union of two vocabularies.
    pub fn union_disjoint(&self, other: &Vocabulary) -> Result<Vocabulary> {
        for sym in other.symbols() {
            if self.contains_symbol(sym) {
                return Err(Error::VocabOverlap(sym.clone()));
            }
        }
        let mut out = self.clone();
        for (n, &a) in &other.relations {
            out.relations.insert(n.clone(), a);
        }
        for (n, &a) in &other.functions {
            out.functions.insert(n.clone(), a);
        }
        for c in &other.constants {
            out.constants.insert(c.clone());
        }
        Ok(out)
    }
}

/// An equivalence relation on `{0, .., n-1}`, stored both as blocks and as a
/// class index per element. Blocks are ordered by their least element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    class_of: Vec<usize>,
    blocks: Vec<Vec<Elem>>,
}

impl Partition {
    /// Builds a partition from a class index per element. Class indices are
    /// renumbered so that blocks appear in order of their least element.
    pub fn from_class_of(class_of: &[usize]) -> Partition {
        let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
        let mut blocks: Vec<Vec<Elem>> = Vec::new();
        let mut out = Vec::with_capacity(class_of.len());
        for (e, &c) in class_of.iter().enumerate() {
            let idx = *renumber.entry(c).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[idx].push(e);
            out.push(idx);
        }
        Partition {
            class_of: out,
            blocks,
        }
    }

    pub fn from_blocks(n: usize, blocks: &[Vec<Elem>]) -> Result<Partition> {
        let mut class_of = vec![usize::MAX; n];
        for (i, block) in blocks.iter().enumerate() {
            for &e in block {
                if e >= n || class_of[e] != usize::MAX {
                    return Err(Error::NotACongruence);
                }
                class_of[e] = i;
            }
        }
        if class_of.iter().any(|&c| c == usize::MAX) {
            return Err(Error::NotACongruence);
        }
        Ok(Partition::from_class_of(&class_of))
    }

    pub fn identity(n: usize) -> Partition {
        Partition::from_class_of(&(0..n).collect::<Vec<_>>())
    }

    pub fn total(n: usize) -> Partition {
        Partition::from_class_of(&vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn class_of(&self, e: Elem) -> usize {
        self.class_of[e]
    }

    pub fn blocks(&self) -> &[Vec<Elem>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.len() == self.class_of.len()
    }

    pub fn same_class(&self, a: Elem, b: Elem) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    /// True iff every block of `self` is a union of blocks of `finer`.
    pub fn is_coarsening_of(&self, finer: &Partition) -> bool {
        finer
            .class_of
            .iter()
            .enumerate()
            .all(|(e, _)| self.class_of[e] == self.class_of[finer.blocks[finer.class_of[e]][0]])
    }

    /// JSON serialization as a list of blocks of element names.
    pub fn to_json(&self, s: &Structure) -> serde_json::Value {
        serde_json::Value::Array(
            self.blocks
                .iter()
                .map(|b| {
                    serde_json::Value::Array(
                        b.iter()
                            .map(|&e| serde_json::Value::String(s.elem_name(e).to_string()))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

/// A finite structure: a vocabulary, a nonempty ordered domain of named
/// elements, and a total interpretation of every symbol. The listed domain
/// order is the canonical iteration order everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    vocab: Vocabulary,
    domain: Vec<String>,
    rels: BTreeMap<String, BTreeSet<Vec<Elem>>>,
    funs: BTreeMap<String, BTreeMap<Vec<Elem>, Elem>>,
    consts: BTreeMap<String, Elem>,
}

impl Structure {
    /// Creates a structure with empty relation interpretations and no
    /// function/constant interpretations yet; use the `set_*` methods and
    /// check with [`validate`] (or use [`Structure::build`]).
    pub fn new(vocab: Vocabulary, domain: Vec<String>) -> Structure {
        let rels = vocab
            .relations()
            .keys()
            .map(|n| (n.clone(), BTreeSet::new()))
            .collect();
        Structure {
            vocab,
            domain,
            rels,
            funs: BTreeMap::new(),
            consts: BTreeMap::new(),
        }
    }

    /// Convenience constructor that validates the finished structure.
    pub fn build(
        vocab: Vocabulary,
        domain: Vec<String>,
        rels: BTreeMap<String, BTreeSet<Vec<Elem>>>,
        funs: BTreeMap<String, BTreeMap<Vec<Elem>, Elem>>,
        consts: BTreeMap<String, Elem>,
    ) -> Result<Structure> {
        let s = Structure {
            vocab,
            domain,
            rels,
            funs,
            consts,
        };
        let violations = validate(&s);
        if violations.is_empty() {
            Ok(s)
        } else {
            Err(Error::InvalidStructure(violations))
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn elems(&self) -> std::ops::Range<Elem> {
        0..self.domain.len()
    }

    pub fn elem_name(&self, e: Elem) -> &str {
        &self.domain[e]
    }

    pub fn elem_index(&self, name: &str) -> Option<Elem> {
        self.domain.iter().position(|d| d == name)
    }

    pub fn set_tuple(&mut self, rel: &str, tuple: Vec<Elem>) {
        self.rels.entry(rel.to_string()).or_default().insert(tuple);
    }

    pub fn set_relation(&mut self, rel: &str, tuples: BTreeSet<Vec<Elem>>) {
        self.rels.insert(rel.to_string(), tuples);
    }

    pub fn set_function(&mut self, fun: &str, table: BTreeMap<Vec<Elem>, Elem>) {
        self.funs.insert(fun.to_string(), table);
    }

    pub fn set_constant(&mut self, c: &str, e: Elem) {
        self.consts.insert(c.to_string(), e);
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Vec<Elem>>> {
        self.rels.get(name)
    }

    pub fn has_tuple(&self, rel: &str, tuple: &[Elem]) -> bool {
        self.rels.get(rel).is_some_and(|t| t.contains(tuple))
    }

    pub fn apply(&self, fun: &str, args: &[Elem]) -> Option<Elem> {
        self.funs.get(fun).and_then(|t| t.get(args)).copied()
    }

    pub fn function_table(&self, fun: &str) -> Option<&BTreeMap<Vec<Elem>, Elem>> {
        self.funs.get(fun)
    }

    pub fn constant(&self, name: &str) -> Option<Elem> {
        self.consts.get(name).copied()
    }

    /// All tuples over the domain of the given arity, in lexicographic order.
    pub fn all_tuples(&self, arity: usize) -> Vec<Vec<Elem>> {
        all_tuples(self.size(), arity)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&RawStructure::from(self)).expect("serialization")
    }

    pub fn from_json_str(text: &str) -> Result<Structure> {
        let raw: RawStructure =
            serde_json::from_str(text).map_err(|e| Error::Io(format!("bad structure JSON: {e}")))?;
        raw.try_into()
    }
}

pub fn all_tuples(n: usize, arity: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for e in 0..n {
                let mut t2 = t.clone();
                t2.push(e);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// Diagnostic check of all structure invariants. Returns a description of
/// every violation; the empty list means the structure is well-formed.
pub fn validate(s: &Structure) -> Vec<String> {
    let mut out = Vec::new();
    if let Err(e) = s.vocab.check() {
        out.push(format!("bad vocabulary: {e}"));
    }
    if s.domain.is_empty() {
        out.push("empty domain".to_string());
    }
    let mut names = BTreeSet::new();
    for name in &s.domain {
        if !names.insert(name) {
            out.push(format!("duplicate element id `{name}`"));
        }
    }
    let n = s.size();
    for (name, &arity) in s.vocab.relations() {
        match s.rels.get(name) {
            None => out.push(format!("{name} uninterpreted")),
            Some(tuples) => {
                for t in tuples {
                    if t.len() != arity {
                        out.push(format!("tuple of wrong arity in {name}"));
                    } else if t.iter().any(|&e| e >= n) {
                        out.push(format!("tuple out of domain in {name}"));
                    }
                }
            }
        }
    }
    for (name, &arity) in s.vocab.functions() {
        match s.funs.get(name) {
            None => out.push(format!("{name} uninterpreted")),
            Some(table) => {
                for (args, &val) in table {
                    if args.len() != arity {
                        out.push(format!("argument tuple of wrong arity in {name}"));
                    } else if args.iter().any(|&e| e >= n) {
                        out.push(format!("argument out of domain in {name}"));
                    }
                    if val >= n {
                        out.push(format!("value of {name} outside domain"));
                    }
                }
                let expected = n.pow(arity as u32);
                if table.len() != expected
                    && table.keys().all(|a| a.len() == arity && a.iter().all(|&e| e < n))
                {
                    out.push(format!("{name} is not total"));
                }
            }
        }
    }
    for name in s.vocab.constants() {
        match s.consts.get(name) {
            None => out.push(format!("{name} uninterpreted")),
            Some(&e) if e >= n => out.push(format!("constant {name} outside domain")),
            _ => {}
        }
    }
    for name in s.rels.keys() {
        if s.vocab.relation_arity(name).is_none() {
            out.push(format!("spurious relation interpretation `{name}`"));
        }
    }
    for name in s.funs.keys() {
        if s.vocab.function_arity(name).is_none() {
            out.push(format!("spurious function interpretation `{name}`"));
        }
    }
    for name in s.consts.keys() {
        if !s.vocab.has_constant(name) {
            out.push(format!("spurious constant interpretation `{name}`"));
        }
    }
    out
}

/// Restriction of a structure to a sub-vocabulary: same domain, the
/// interpretations of symbols outside `tau0` dropped.
pub fn reduct(s: &Structure, tau0: &Vocabulary) -> Result<Structure> {
    if !tau0.is_subvocabulary_of(&s.vocab) {
        let missing = tau0
            .symbols()
            .find(|sym| {
                let n = sym.as_str();
                tau0.relation_arity(n) != s.vocab.relation_arity(n)
                    || tau0.function_arity(n) != s.vocab.function_arity(n)
                    || (tau0.has_constant(n) && !s.vocab.has_constant(n))
            })
            .cloned()
            .unwrap_or_default();
        return Err(Error::SymbolNotInVocabulary(missing));
    }
    let mut out = Structure::new(tau0.clone(), s.domain.clone());
    for name in tau0.relations().keys() {
        out.rels.insert(name.clone(), s.rels[name].clone());
    }
    for name in tau0.functions().keys() {
        out.funs.insert(name.clone(), s.funs[name].clone());
    }
    for name in tau0.constants() {
        out.consts.insert(name.clone(), s.consts[name]);
    }
    Ok(out)
}

/// Renames the symbols of a structure along a kind- and arity-preserving
/// bijection onto a fresh vocabulary. The domain is unchanged.
pub fn rename(s: &Structure, sigma: &BTreeMap<String, String>) -> Result<Structure> {
    let mut images = BTreeSet::new();
    for (old, new) in sigma {
        if !s.vocab.contains_symbol(old) {
            return Err(Error::SymbolNotInVocabulary(old.clone()));
        }
        if !images.insert(new.clone()) {
            return Err(Error::VocabOverlap(new.clone()));
        }
    }
    let lookup = |name: &str| -> Result<String> {
        sigma
            .get(name)
            .cloned()
            .ok_or_else(|| Error::SymbolNotInVocabulary(name.to_string()))
    };
    let mut vocab = Vocabulary::new();
    for (name, &arity) in s.vocab.relations() {
        vocab = vocab.with_relation(&lookup(name)?, arity);
    }
    for (name, &arity) in s.vocab.functions() {
        vocab = vocab.with_function(&lookup(name)?, arity);
    }
    for name in s.vocab.constants() {
        vocab = vocab.with_constant(&lookup(name)?);
    }
    vocab.check()?;
    let mut out = Structure::new(vocab, s.domain.clone());
    for (name, tuples) in &s.rels {
        out.rels.insert(lookup(name)?, tuples.clone());
    }
    for (name, table) in &s.funs {
        out.funs.insert(lookup(name)?, table.clone());
    }
    for (name, &e) in &s.consts {
        out.consts.insert(lookup(name)?, e);
    }
    Ok(out)
}

/// Standard renaming map `P -> P_p` for building disjoint primed copies.
pub fn primed_renaming(vocab: &Vocabulary) -> BTreeMap<String, String> {
    vocab
        .symbols()
        .map(|s| (s.clone(), format!("{s}_p")))
        .collect()
}

/// Combines two structures sharing the same domain into one structure over
/// the disjoint union of their vocabularies.
pub fn merge_same_domain(s: &Structure, t: &Structure) -> Result<Structure> {
    if s.domain != t.domain {
        return Err(Error::DomainMismatch);
    }
    let vocab = s.vocab.union_disjoint(&t.vocab)?;
    let mut out = Structure::new(vocab, s.domain.clone());
    for (name, tuples) in s.rels.iter().chain(t.rels.iter()) {
        out.rels.insert(name.clone(), tuples.clone());
    }
    for (name, table) in s.funs.iter().chain(t.funs.iter()) {
        out.funs.insert(name.clone(), table.clone());
    }
    for (name, &e) in s.consts.iter().chain(t.consts.iter()) {
        out.consts.insert(name.clone(), e);
    }
    Ok(out)
}

/// True iff `part` is a congruence of `s`: relation membership is invariant
/// under replacing an element by an equivalent one, and functions map
/// equivalent argument tuples to equivalent values.
///
/// Single-position replacement suffices: if tuples are componentwise
/// equivalent, swap one position at a time; each swap preserves membership
/// (resp. lands in the same value class), and the chain of swaps yields the
/// multi-position statement by transitivity.
pub fn is_congruence(s: &Structure, part: &Partition) -> bool {
    debug_assert_eq!(part.len(), s.size());
    for (name, &arity) in s.vocab.relations() {
        for tuple in s.all_tuples(arity) {
            let member = s.has_tuple(name, &tuple);
            for i in 0..arity {
                for b in s.elems() {
                    if part.same_class(tuple[i], b) {
                        let mut swapped = tuple.clone();
                        swapped[i] = b;
                        if s.has_tuple(name, &swapped) != member {
                            return false;
                        }
                    }
                }
            }
        }
    }
    for (name, &arity) in s.vocab.functions() {
        for tuple in s.all_tuples(arity) {
            let val = s.apply(name, &tuple).expect("total function");
            for i in 0..arity {
                for b in s.elems() {
                    if part.same_class(tuple[i], b) {
                        let mut swapped = tuple.clone();
                        swapped[i] = b;
                        let val2 = s.apply(name, &swapped).expect("total function");
                        if !part.same_class(val, val2) {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Quotient of a structure by a congruence. The new domain is the list of
/// blocks; each block is named after its least element. A relation holds of
/// classes iff it holds of the representative tuple (by congruence, the
/// choice of representatives does not matter).
pub fn quotient(s: &Structure, part: &Partition) -> Result<Structure> {
    if part.len() != s.size() || !is_congruence(s, part) {
        return Err(Error::NotACongruence);
    }
    let domain: Vec<String> = part
        .blocks()
        .iter()
        .map(|b| s.elem_name(b[0]).to_string())
        .collect();
    let mut out = Structure::new(s.vocab.clone(), domain);
    for (name, tuples) in &s.rels {
        let image = tuples
            .iter()
            .map(|t| t.iter().map(|&e| part.class_of(e)).collect::<Vec<_>>())
            .collect();
        out.rels.insert(name.clone(), image);
    }
    for (name, &arity) in s.vocab.functions() {
        let mut table = BTreeMap::new();
        for class_args in all_tuples(part.num_blocks(), arity) {
            let rep_args: Vec<Elem> = class_args.iter().map(|&c| part.blocks()[c][0]).collect();
            let val = s.apply(name, &rep_args).expect("total function");
            table.insert(class_args, part.class_of(val));
        }
        out.funs.insert(name.clone(), table);
    }
    for (name, &e) in &s.consts {
        out.consts.insert(name.clone(), part.class_of(e));
    }
    Ok(out)
}

/// A total map between the domains of two structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementMap {
    pub source: Structure,
    pub target: Structure,
    pub map: Vec<Elem>,
}

impl ElementMap {
    pub fn new(source: Structure, target: Structure, map: Vec<Elem>) -> Result<ElementMap> {
        if map.len() != source.size() || map.iter().any(|&e| e >= target.size()) {
            return Err(Error::DomainMismatch);
        }
        Ok(ElementMap {
            source,
            target,
            map,
        })
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target.size()];
        for &e in &self.map {
            hit[e] = true;
        }
        hit.iter().all(|&h| h)
    }
}

/// Strict homomorphism check: relations are preserved biconditionally, and
/// functions and constants equationally.
///
/// The clauses follow the reconstructed definition (the original is only
/// cited, not reproduced, in the sources this crate is built around): for
/// every relation R, R(a̅) iff R(h(a̅)); h(f(a̅)) = f(h(a̅)); h(c) = c.
/// Surjectivity is reported separately via [`ElementMap::is_surjective`].
pub fn is_strict_homomorphism(h: &ElementMap) -> bool {
    let s = &h.source;
    let t = &h.target;
    if s.vocab != t.vocab {
        return false;
    }
    for (name, &arity) in s.vocab.relations() {
        for tuple in s.all_tuples(arity) {
            let image: Vec<Elem> = tuple.iter().map(|&e| h.map[e]).collect();
            if s.has_tuple(name, &tuple) != t.has_tuple(name, &image) {
                return false;
            }
        }
    }
    for (name, &arity) in s.vocab.functions() {
        for tuple in s.all_tuples(arity) {
            let image: Vec<Elem> = tuple.iter().map(|&e| h.map[e]).collect();
            let lhs = h.map[s.apply(name, &tuple).expect("total")];
            let rhs = t.apply(name, &image).expect("total");
            if lhs != rhs {
                return false;
            }
        }
    }
    for name in s.vocab.constants() {
        if h.map[s.constant(name).expect("interpreted")] != t.constant(name).expect("interpreted") {
            return false;
        }
    }
    true
}

/// Inflates a structure to a domain of size `k >= |domain|`, returning the
/// blown-up structure together with the projection back onto the original,
/// which is a surjective strict homomorphism.
///
/// Each element receives one or more copies (multiplicities are chosen from
/// the seed; without a seed the first element absorbs all surplus).
/// Relations are lifted along the projection; function values go through a
/// fixed section mapping each original element to its first copy.
pub fn blow_up(s: &Structure, k: usize, seed: Option<u64>) -> Result<(Structure, ElementMap)> {
    let n = s.size();
    if k < n {
        return Err(Error::SizeTooSmall {
            requested: k,
            domain: n,
        });
    }
    let mut mult = vec![1usize; n];
    match seed {
        None => mult[0] += k - n,
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..(k - n) {
                let i = rng.gen_range(0..n);
                mult[i] += 1;
            }
        }
    }
    // projection pi and section sigma (first copy of each element)
    let mut domain = Vec::with_capacity(k);
    let mut pi = Vec::with_capacity(k);
    let mut section = Vec::with_capacity(n);
    for (e, &m) in mult.iter().enumerate() {
        section.push(domain.len());
        for j in 0..m {
            domain.push(format!("{}@{j}", s.elem_name(e)));
            pi.push(e);
        }
    }
    let mut b = Structure::new(s.vocab.clone(), domain);
    for (name, &arity) in s.vocab.relations() {
        let mut tuples = BTreeSet::new();
        for tuple in all_tuples(k, arity) {
            let proj: Vec<Elem> = tuple.iter().map(|&e| pi[e]).collect();
            if s.has_tuple(name, &proj) {
                tuples.insert(tuple);
            }
        }
        b.rels.insert(name.clone(), tuples);
    }
    for (name, &arity) in s.vocab.functions() {
        let mut table = BTreeMap::new();
        for tuple in all_tuples(k, arity) {
            let proj: Vec<Elem> = tuple.iter().map(|&e| pi[e]).collect();
            let val = s.apply(name, &proj).expect("total");
            table.insert(tuple, section[val]);
        }
        b.funs.insert(name.clone(), table);
    }
    for (name, &e) in &s.consts {
        b.consts.insert(name.clone(), section[e]);
    }
    let map = ElementMap::new(b.clone(), s.clone(), pi)?;
    Ok((b, map))
}

// ---------------------------------------------------------------------------
// JSON file format
// ---------------------------------------------------------------------------

/// Structure file schema. Function tables are keyed by comma-joined argument
/// names ("a,b" for a binary function). Unknown keys are rejected.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    vocabulary: RawVocabulary,
    domain: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    relations: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    functions: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    constants: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVocabulary {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    relations: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    functions: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    constants: Vec<String>,
}

impl From<&Structure> for RawStructure {
    fn from(s: &Structure) -> RawStructure {
        RawStructure {
            vocabulary: RawVocabulary {
                relations: s.vocab.relations().clone(),
                functions: s.vocab.functions().clone(),
                constants: s.vocab.constants().iter().cloned().collect(),
            },
            domain: s.domain.clone(),
            relations: s
                .rels
                .iter()
                .map(|(name, tuples)| {
                    (
                        name.clone(),
                        tuples
                            .iter()
                            .map(|t| t.iter().map(|&e| s.elem_name(e).to_string()).collect())
                            .collect(),
                    )
                })
                .collect(),
            functions: s
                .funs
                .iter()
                .map(|(name, table)| {
                    (
                        name.clone(),
                        table
                            .iter()
                            .map(|(args, &val)| {
                                (
                                    args.iter()
                                        .map(|&e| s.elem_name(e).to_string())
                                        .collect::<Vec<_>>()
                                        .join(","),
                                    s.elem_name(val).to_string(),
                                )
                            })
                            .collect(),
                    )
                })
                .collect(),
            constants: s
                .consts
                .iter()
                .map(|(name, &e)| (name.clone(), s.elem_name(e).to_string()))
                .collect(),
        }
    }
}

impl TryFrom<RawStructure> for Structure {
    type Error = Error;

    fn try_from(raw: RawStructure) -> Result<Structure> {
        let mut vocab = Vocabulary::new();
        for (name, &arity) in &raw.vocabulary.relations {
            vocab = vocab.with_relation(name, arity);
        }
        for (name, &arity) in &raw.vocabulary.functions {
            vocab = vocab.with_function(name, arity);
        }
        for name in &raw.vocabulary.constants {
            vocab = vocab.with_constant(name);
        }
        vocab.check()?;
        let mut s = Structure::new(vocab, raw.domain.clone());
        let index = |name: &str| -> Result<Elem> {
            s.elem_index(name)
                .ok_or_else(|| Error::Io(format!("unknown element `{name}`")))
        };
        let mut rels = BTreeMap::new();
        for (name, tuples) in &raw.relations {
            let mut set = BTreeSet::new();
            for t in tuples {
                set.insert(t.iter().map(|n| index(n)).collect::<Result<Vec<_>>>()?);
            }
            rels.insert(name.clone(), set);
        }
        let mut funs = BTreeMap::new();
        for (name, table) in &raw.functions {
            let mut out = BTreeMap::new();
            for (args, val) in table {
                let args = args
                    .split(',')
                    .map(|n| index(n.trim()))
                    .collect::<Result<Vec<_>>>()?;
                out.insert(args, index(val)?);
            }
            funs.insert(name.clone(), out);
        }
        let mut consts = BTreeMap::new();
        for (name, val) in &raw.constants {
            consts.insert(name.clone(), index(val)?);
        }
        s.rels = rels;
        s.funs = funs;
        s.consts = consts;
        let violations = validate(&s);
        if violations.is_empty() {
            Ok(s)
        } else {
            Err(Error::InvalidStructure(violations))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unary(members: &[usize], size: usize) -> Structure {
        let vocab = Vocabulary::new().with_relation("P", 1);
        let domain = (0..size).map(|i| format!("e{i}")).collect();
        let mut s = Structure::new(vocab, domain);
        for &m in members {
            s.set_tuple("P", vec![m]);
        }
        s
    }

    #[test]
    fn validate_well_formed() {
        assert!(validate(&unary(&[0], 2)).is_empty());
    }

    #[test]
    fn validate_missing_relation() {
        let vocab = Vocabulary::new().with_relation("P", 1);
        let mut s = Structure::new(vocab, vec!["a".into()]);
        s.rels.clear();
        assert_eq!(validate(&s), vec!["P uninterpreted".to_string()]);
    }

    #[test]
    fn validate_function_value_outside_domain() {
        let vocab = Vocabulary::new().with_function("f", 1);
        let mut s = Structure::new(vocab, vec!["a".into()]);
        s.set_function("f", BTreeMap::from([(vec![0], 7)]));
        let violations = validate(&s);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("outside domain"));
    }

    #[test]
    fn reduct_drops_symbols_and_composes() {
        let vocab = Vocabulary::new().with_relation("P", 1).with_relation("Q", 1);
        let mut s = Structure::new(vocab, vec!["a".into(), "b".into()]);
        s.set_tuple("P", vec![0]);
        s.set_tuple("Q", vec![1]);
        let tau_p = Vocabulary::new().with_relation("P", 1);
        let r = reduct(&s, &tau_p).unwrap();
        assert_eq!(r.vocab().relations().len(), 1);
        assert!(r.has_tuple("P", &[0]));
        assert!(r.relation("Q").is_none());
        // identity case
        assert_eq!(reduct(&s, s.vocab()).unwrap(), s);
        // composition
        let tau_pq = s.vocab().clone();
        assert_eq!(
            reduct(&reduct(&s, &tau_pq).unwrap(), &tau_p).unwrap(),
            reduct(&s, &tau_p).unwrap()
        );
        // error path
        let tau_r = Vocabulary::new().with_relation("R", 2);
        assert!(matches!(
            reduct(&s, &tau_r),
            Err(Error::SymbolNotInVocabulary(_))
        ));
    }

    #[test]
    fn rename_and_back() {
        let s = unary(&[0], 2);
        let sigma = BTreeMap::from([("P".to_string(), "P_p".to_string())]);
        let renamed = rename(&s, &sigma).unwrap();
        assert!(renamed.has_tuple("P_p", &[0]));
        let back = BTreeMap::from([("P_p".to_string(), "P".to_string())]);
        assert_eq!(rename(&renamed, &back).unwrap(), s);
    }

    #[test]
    fn merge_and_project() {
        let s = unary(&[0], 2);
        let sigma = primed_renaming(s.vocab());
        let t = rename(&unary(&[1], 2), &sigma).unwrap();
        let merged = merge_same_domain(&s, &t).unwrap();
        assert!(merged.has_tuple("P", &[0]));
        assert!(merged.has_tuple("P_p", &[1]));
        assert_eq!(reduct(&merged, s.vocab()).unwrap(), s);
        // overlapping vocab is rejected
        assert!(matches!(
            merge_same_domain(&s, &unary(&[1], 2)),
            Err(Error::VocabOverlap(_))
        ));
    }

    #[test]
    fn congruence_checks() {
        let s = unary(&[0, 1], 3);
        assert!(is_congruence(&s, &Partition::identity(3)));
        assert!(!is_congruence(&s, &Partition::total(3)));
        let part = Partition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap();
        assert!(is_congruence(&s, &part));
    }

    #[test]
    fn quotient_examples() {
        let s = unary(&[0, 1], 3);
        // identity partition gives an isomorphic copy
        let q = quotient(&s, &Partition::identity(3)).unwrap();
        assert_eq!(q.size(), 3);
        assert!(q.has_tuple("P", &[0]) && q.has_tuple("P", &[1]) && !q.has_tuple("P", &[2]));
        // {0,1},{2} collapses the P-block
        let part = Partition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap();
        let q = quotient(&s, &part).unwrap();
        assert_eq!(q.size(), 2);
        assert!(q.has_tuple("P", &[0]) && !q.has_tuple("P", &[1]));
        // total partition where everything agrees
        let all = unary(&[0, 1], 2);
        let q = quotient(&all, &Partition::total(2)).unwrap();
        assert_eq!(q.size(), 1);
        assert!(q.has_tuple("P", &[0]));
        // non-congruence is rejected
        assert!(matches!(
            quotient(&s, &Partition::total(3)),
            Err(Error::NotACongruence)
        ));
    }

    #[test]
    fn quotient_rule_is_representative_independent() {
        let s = unary(&[0, 1], 3);
        let part = Partition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap();
        let q = quotient(&s, &part).unwrap();
        for tuple in s.all_tuples(1) {
            let classes: Vec<usize> = tuple.iter().map(|&e| part.class_of(e)).collect();
            assert_eq!(s.has_tuple("P", &tuple), q.has_tuple("P", &classes));
        }
    }

    #[test]
    fn strict_homomorphism_examples() {
        let s = unary(&[0], 2);
        let id = ElementMap::new(s.clone(), s.clone(), vec![0, 1]).unwrap();
        assert!(is_strict_homomorphism(&id));
        let point_p = unary(&[0], 1);
        let all_p = unary(&[0, 1], 2);
        let collapse = ElementMap::new(all_p.clone(), point_p.clone(), vec![0, 0]).unwrap();
        assert!(is_strict_homomorphism(&collapse));
        // P(1) fails the biconditional
        let half = ElementMap::new(s, point_p, vec![0, 0]).unwrap();
        assert!(!is_strict_homomorphism(&half));
    }

    #[test]
    fn blow_up_examples() {
        let point = unary(&[0], 1);
        let (b, pi) = blow_up(&point, 3, None).unwrap();
        assert_eq!(b.size(), 3);
        for e in b.elems() {
            assert!(b.has_tuple("P", &[e]));
        }
        assert!(is_strict_homomorphism(&pi));
        assert!(pi.is_surjective());
        // k == |domain| keeps the structure as-is (up to copy names)
        let s = unary(&[0], 2);
        let (b, pi) = blow_up(&s, 2, Some(7)).unwrap();
        assert_eq!(b.size(), 2);
        assert!(is_strict_homomorphism(&pi));
        assert!(matches!(blow_up(&s, 1, None), Err(Error::SizeTooSmall { .. })));
    }

    #[test]
    fn blow_up_with_functions_and_constants() {
        let vocab = Vocabulary::new()
            .with_relation("P", 1)
            .with_function("f", 1)
            .with_constant("c");
        let mut s = Structure::new(vocab, vec!["a".into(), "b".into()]);
        s.set_tuple("P", vec![0]);
        s.set_function("f", BTreeMap::from([(vec![0], 1), (vec![1], 0)]));
        s.set_constant("c", 1);
        assert!(validate(&s).is_empty());
        for seed in [None, Some(1), Some(2)] {
            let (b, pi) = blow_up(&s, 5, seed).unwrap();
            assert!(validate(&b).is_empty());
            assert!(is_strict_homomorphism(&pi));
            assert!(pi.is_surjective());
        }
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let text = r#"{
            "vocabulary": {"relations": {"P":1, "E":2}, "functions": {"f":1}, "constants": ["c"]},
            "domain": ["a","b"],
            "relations": {"P": [["a"]], "E": [["a","a"],["b","b"]]},
            "functions": {"f": {"a":"b","b":"b"}},
            "constants": {"c":"a"}
        }"#;
        let s = Structure::from_json_str(text).unwrap();
        assert_eq!(s.size(), 2);
        assert!(s.has_tuple("E", &[1, 1]));
        assert_eq!(s.apply("f", &[0]), Some(1));
        assert_eq!(s.constant("c"), Some(0));
        let round = Structure::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(round, s);
        // unknown keys rejected
        let bad = r#"{"vocabulary": {"relations": {"P":1}}, "domain": ["a"], "extra": 1}"#;
        assert!(Structure::from_json_str(bad).is_err());
    }

    #[test]
    fn empty_domain_rejected() {
        let vocab = Vocabulary::new().with_relation("P", 1);
        let s = Structure::new(vocab, vec![]);
        assert!(!validate(&s).is_empty());
    }

    #[test]
    fn equality_symbol_rejected() {
        let vocab = Vocabulary::new().with_relation("=", 2);
        assert!(vocab.check().is_err());
        let nullary = Vocabulary::new().with_relation("P", 0);
        assert!(nullary.check().is_err());
    }
}
