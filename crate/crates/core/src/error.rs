use std::fmt;

use thiserror::Error;

use crate::dataset::Violation;

/// A failure tied to a position in clausal source text.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        Self { line, column, kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    DuplicateAttribute(String),
    DuplicateInstance(u32),
    UnknownAttribute(String),
    ValueOutsideDomain { attribute: String, value: String },
    MissingAssignment { instance: u32, attribute: String },
    DuplicateAssignment { instance: u32, attribute: String },
    MissingClassAttribute,
    InvalidClassDomain,
    InvalidSchema(String),
    ProbabilityOutOfRange(f64),
    UnknownClass(String),
    DuplicateMenu(String),
    MissingMenu(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParseErrorKind::*;
        match self {
            Syntax(msg) => write!(f, "syntax error: {msg}"),
            DuplicateAttribute(a) => write!(f, "duplicate attribute `{a}`"),
            DuplicateInstance(id) => write!(f, "duplicate instance id {id}"),
            UnknownAttribute(a) => write!(f, "unknown attribute `{a}`"),
            ValueOutsideDomain { attribute, value } => {
                write!(f, "value `{value}` is outside the domain of attribute `{attribute}`")
            }
            MissingAssignment { instance, attribute } => {
                write!(f, "instance {instance} does not assign attribute `{attribute}`")
            }
            DuplicateAssignment { instance, attribute } => {
                write!(f, "instance {instance} assigns attribute `{attribute}` twice")
            }
            MissingClassAttribute => write!(f, "no `class` attribute declared"),
            InvalidClassDomain => write!(f, "the `class` attribute must have domain [yes, no]"),
            InvalidSchema(msg) => write!(f, "invalid attribute declaration: {msg}"),
            ProbabilityOutOfRange(p) => write!(f, "probability {p} is outside (0, 1]"),
            UnknownClass(c) => write!(f, "unknown class value `{c}`"),
            DuplicateMenu(a) => write!(f, "duplicate menu for attribute `{a}`"),
            MissingMenu(a) => write!(f, "no menu declared for attribute `{a}`"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid dataset: {}", join_violations(.0))]
    InvalidDataset(Vec<Violation>),
    #[error("dataset has no instances")]
    EmptyDataset,
    #[error("transaction database is empty")]
    EmptyDatabase,
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("instance subset is empty")]
    EmptySubset,
    #[error("unknown instance id {0}")]
    UnknownInstance(u32),
    #[error("invalid probabilities ({0}, {1}): each must lie in [0, 1] and sum to 1")]
    InvalidProbabilities(f64, f64),
    #[error("no candidate attributes to choose from")]
    NoCandidates,
    #[error("candidate length must be at least 2, got {0}")]
    CandidateLength(usize),
    #[error("invalid mining configuration: {0}")]
    InvalidConfig(String),
    #[error("tree does not match dataset: {0}")]
    TreeMismatch(String),
    #[error("invalid knowledge base: {0}")]
    InvalidKnowledgeBase(String),
    #[error("session is not awaiting an answer")]
    NotAwaiting,
    #[error("attribute `{0}` is not the current question")]
    NotAsked(String),
    #[error("`{value}` is not on the menu for `{attribute}`")]
    NotOnMenu { attribute: String, value: String },
    #[error("no conclusion")]
    NoConclusion,
    #[error("session is still awaiting an answer")]
    StillAwaiting,
    #[error("consultation was aborted")]
    Aborted,
    #[error("unknown rule id `{0}`")]
    UnknownRule(String),
    #[error("rule `{id}` cannot become a trigger: {reason}")]
    NotCompilable { id: String, reason: String },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
