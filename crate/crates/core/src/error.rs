use thiserror::Error;

use crate::ast::Span;
use crate::frontend::FrontendError;
use crate::ops::{EvalError, ParamError};
use crate::typesys::TypeError;

/// Every failure the pipeline can report.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("Imp type error: {0}")]
    ImpType(String),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("zero evidence: no valid run (the observations have probability 0)")]
    ZeroEvidence,
    #[error("continuous observation at {span}: the exact backends cannot condition on a real value")]
    ContinuousObserve { span: Span },
    #[error("continuous distribution {dist} at {span}: the exact backends support discrete draws only")]
    ContinuousRandom { dist: &'static str, span: Span },
    #[error("continuous graph: {0}")]
    ContinuousGraph(String),
    #[error("unsupported observation at {span}: {message}")]
    UnsupportedObserve { message: String, span: Span },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("support overflow: more than {cap} distinct values")]
    SupportOverflow { cap: usize },
    #[error("kernel mass {0} exceeds 1")]
    KernelMass(f64),
    #[error("grid oracle: {0}")]
    Grid(String),
    #[error("undefined variable `{0}`")]
    Undefined(String),
    #[error("{0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit status: 1 for user errors, 2 for capability limits, 3 for internal faults.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Frontend(_)
            | Error::Type(_)
            | Error::Eval(_)
            | Error::Param(_)
            | Error::ZeroEvidence
            | Error::Grid(_)
            | Error::Undefined(_)
            | Error::Io(_) => 1,
            Error::ContinuousObserve { .. }
            | Error::ContinuousRandom { .. }
            | Error::ContinuousGraph(_)
            | Error::UnsupportedObserve { .. }
            | Error::Budget(_)
            | Error::SupportOverflow { .. } => 2,
            Error::ImpType(_) | Error::KernelMass(_) | Error::Internal(_) => 3,
        }
    }

    /// Stable machine-readable name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Frontend(FrontendError::Lex { .. }) => "LexError",
            Error::Frontend(FrontendError::Parse { .. }) => "ParseError",
            Error::Frontend(FrontendError::Desugar { .. }) => "DesugarError",
            Error::Type(_) => "TypeError",
            Error::ImpType(_) => "ImpTypeError",
            Error::Eval(_) => "EvalError",
            Error::Param(_) => "ParamError",
            Error::ZeroEvidence => "ZeroEvidence",
            Error::ContinuousObserve { .. } => "ContinuousObserveError",
            Error::ContinuousRandom { .. } => "ContinuousRandomError",
            Error::ContinuousGraph(_) => "ContinuousGraphError",
            Error::UnsupportedObserve { .. } => "UnsupportedObserveError",
            Error::Budget(_) => "BudgetError",
            Error::SupportOverflow { .. } => "SupportOverflow",
            Error::KernelMass(_) => "KernelMassError",
            Error::Grid(_) => "GridError",
            Error::Undefined(_) => "UndefinedVariable",
            Error::Io(_) => "IoError",
            Error::Internal(_) => "InternalError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Attach a source location to errors raised without one.
    pub fn at(self, span: Span) -> Error {
        match self {
            Error::ContinuousObserve { span: s } if s == Span::default() => Error::ContinuousObserve { span },
            Error::ContinuousRandom { dist, span: s } if s == Span::default() => Error::ContinuousRandom { dist, span },
            other => other,
        }
    }
}
