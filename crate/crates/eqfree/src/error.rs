use thiserror::Error;

/// Crate-wide error type. Variants are named after the contract they enforce.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("symbol `{0}` is not in the vocabulary")]
    SymbolNotInVocabulary(String),
    #[error("arity mismatch for `{symbol}`: expected {expected}, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("symbol kind mismatch for `{0}`")]
    KindMismatch(String),
    #[error("structures do not share the same domain")]
    DomainMismatch,
    #[error("vocabularies overlap on symbol `{0}`")]
    VocabOverlap(String),
    #[error("partition is not a congruence of the structure")]
    NotACongruence,
    #[error("target size {requested} is smaller than the domain size {domain}")]
    SizeTooSmall { requested: usize, domain: usize },
    #[error("structures have different vocabularies")]
    VocabMismatch,
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("equality atoms are forbidden (at {line}:{col})")]
    EqualityForbidden { line: usize, col: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain of size {size} exceeds the Henkin cap {cap}")]
    DomainTooLarge { size: usize, cap: usize },
    #[error("free variable `{0}` is not covered by the assignment")]
    UncoveredFreeVariable(String),
    #[error("formula is not a sentence: free variable `{0}`")]
    NotASentence(String),
    #[error("structures are not distinguishable at this rank")]
    NotDistinguishable,
    #[error("structures are not EF-equivalent at this round count")]
    NotEquivalent,
    #[error("vocabulary is missing scaffold symbol `{0}`")]
    MissingScaffoldSymbols(String),
    #[error("structure is not monadic: {0}")]
    NotMonadic(String),
    #[error("formula is outside the monadic counting fragment: {0}")]
    NotInFragment(String),
    #[error("sentence has no interval normal form over the allowed endpoints")]
    NotExpressible,
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("invalid structure: {0:?}")]
    InvalidStructure(Vec<String>),
    #[error("io error: {0}")]
    Io(String),
}
