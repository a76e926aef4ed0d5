use thiserror::Error;

/// Source position of a diagnostic, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("state {state} out of range (model has {count} states)")]
    StateOutOfRange { state: usize, count: usize },
    #[error("state {0} has no enabled action")]
    NoActions(usize),
    #[error("state {state}: duplicate action id {action}")]
    DuplicateAction { state: usize, action: usize },
    #[error("state {state}, action {action}: undeclared action")]
    UnknownAction { state: usize, action: usize },
    #[error("state {state}, action {action}: duplicate transition to {target}")]
    DuplicateTransition { state: usize, action: usize, target: usize },
    #[error("state {state}, action {action}: probability {value} outside [0,1]")]
    BadProbability { state: usize, action: usize, value: f64 },
    #[error("state {state}, action {action}: outgoing probabilities sum to {sum}")]
    BadDistribution { state: usize, action: usize, sum: f64 },
    #[error("state {state}, action {action}: negative or non-finite reward {value}")]
    BadReward { state: usize, action: usize, value: f64 },
    #[error("state {state}, action {action}: duplicate reward")]
    DuplicateReward { state: usize, action: usize },
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("unknown label {0}")]
    UnknownLabel(String),
    #[error("target set {0} is empty")]
    EmptyTarget(String),
    #[error("model has no reward function")]
    MissingRewards,
    #[error("controller chooses action {action} in state {state}, which is not enabled")]
    InvalidController { state: usize, action: usize },
    #[error("controller covers {got} states, model has {expected}")]
    ControllerSize { got: usize, expected: usize },
    #[error("empty restriction for state {0}")]
    EmptyRestriction(usize),
    #[error("memory of {bits} bits exceeds the cap of {cap}")]
    MemoryCap { bits: u32, cap: u32 },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{loc}: {msg}")]
pub struct ParseError {
    pub loc: Location,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, msg: impl Into<String>) -> Self {
        ParseError { loc: Location { line, column }, msg: msg.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("undeclared controller {0}")]
    UndeclaredController(String),
    #[error("duplicate controller {0}")]
    DuplicateController(String),
    #[error("undeclared state variable {0}")]
    UndeclaredVariable(String),
    #[error("state variable {0} declared twice")]
    DuplicateVariable(String),
    #[error("empty domain for {0}")]
    EmptyDomain(String),
    #[error("bound {0} out of range")]
    BadBound(f64),
    #[error("mixed reachability and reward operands in one comparison")]
    MixedKinds,
    #[error("state {state} out of range (model has {count} states)")]
    StateOutOfRange { state: usize, count: usize },
    #[error("the distance objective needs at least {needed} controllers, got {got}")]
    TooFewControllers { needed: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("obs constraint over states {a} and {b} with different action menus")]
    IncompatibleObservation { a: usize, b: usize },
    #[error("family of size {size} exceeds the cap of {cap}")]
    CapExceeded { size: String, cap: u64 },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("{0}")]
    Generator(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
