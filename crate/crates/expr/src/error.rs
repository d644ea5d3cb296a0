use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
    UnknownFunction(String),
    Arity {
        function: String,
        expected: usize,
        found: usize,
    },
}

/// A parse failure with the character offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier '{name}'"),
            ParseErrorKind::UnknownFunction(name) => write!(f, "unknown function '{name}'"),
            ParseErrorKind::Arity {
                function,
                expected,
                found,
            } => write!(
                f,
                "function '{function}' expects {expected} argument(s), found {found}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{function}({argument}) is outside the function domain")]
    Domain { function: &'static str, argument: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result {value} from {operation}")]
    NonFinite { operation: &'static str, value: f64 },
    #[error("expected {expected} input value(s), got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("'{0}' is not differentiable")]
    NotDifferentiable(&'static str),
}
