use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Which namespace a symbol belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Predicate,
    Functor,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Predicate => f.write_str("predicate"),
            SymbolKind::Functor => f.write_str("functor"),
        }
    }
}

/// Upper bound on the grounding depth a computation needs; `None` when no
/// finite depth suffices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequiredDepth(pub Option<usize>);

impl fmt::Display for RequiredDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(d) => write!(f, "depth >= {d}"),
            None => f.write_str("unbounded depth (a clause has variables not bound by its head)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("arity conflict: {kind} `{name}` used with arity {first} and {second}")]
    ArityConflict {
        kind: SymbolKind,
        name: String,
        first: usize,
        second: usize,
    },
    #[error("resource cap of {cap} exceeded while {what}")]
    ResourceCap { what: &'static str, cap: usize },
    #[error("atom `{atom}` lies beyond the enumerated prefix of {n} levels")]
    OutOfPrefix { atom: String, n: usize },
    #[error("level mapping has {available} levels but {needed} are required")]
    PrefixTooShort { needed: usize, available: usize },
    #[error("unknown symbol in `{atom}`")]
    UnknownSymbol { atom: String },
    #[error("`{term}` is not ground")]
    NotGround { term: String },
    #[error("grounding depth {depth} is insufficient: {required}")]
    InsufficientDepth { depth: usize, required: RequiredDepth },
    #[error("digit {digit} at position {position} is outside the alphabet")]
    DigitOutOfAlphabet { position: usize, digit: u32 },
    #[error("cantor point has an unknown tail and denotes no single interpretation")]
    UnknownTail,
    #[error("invalid base configuration: {0}")]
    InvalidBase(String),
    #[error("interpolation nodes are degenerate: {0}")]
    DegenerateNodes(String),
    #[error("x = {x} lies outside the interpolation domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("selector at step {step} is not exactly one-hot")]
    SelectorNotOneHot { step: usize },
    #[error("program is not propositional")]
    NotPropositional,
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::ArityConflict { .. } => "arity_conflict",
            Error::ResourceCap { .. } => "resource_cap",
            Error::OutOfPrefix { .. } => "out_of_prefix",
            Error::PrefixTooShort { .. } => "prefix_too_short",
            Error::UnknownSymbol { .. } => "unknown_symbol",
            Error::NotGround { .. } => "not_ground",
            Error::InsufficientDepth { .. } => "insufficient_depth",
            Error::DigitOutOfAlphabet { .. } => "digit_out_of_alphabet",
            Error::UnknownTail => "unknown_tail",
            Error::InvalidBase(_) => "invalid_base",
            Error::DegenerateNodes(_) => "degenerate_nodes",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::SelectorNotOneHot { .. } => "selector_not_one_hot",
            Error::NotPropositional => "not_propositional",
            Error::Divergence { .. } => "divergence",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
