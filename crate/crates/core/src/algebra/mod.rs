//! Terms over object nets, the built-in workflow operators and guards.

pub mod guard;
pub mod ops;
pub mod term;

use thiserror::Error;

use crate::ids::{KindName, ObjTransId, VarName};
use crate::multiset::CountOverflow;
use crate::object_net::NetError;

pub use guard::{ArithOp, CmpOp, Expr, Guard};
pub use term::{Binding, NetTerm, OpDef, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(VarName),
    #[error("kind mismatch: expected `{expected}`, found `{found}`")]
    KindMismatch { expected: KindName, found: KindName },
    #[error("operator `{op}` takes {expected} arguments, got {found}")]
    Arity { op: String, expected: usize, found: usize },
    #[error("`{0}` is not a workflow net (needs one source and one sink place)")]
    NotWorkflow(String),
    #[error("operands share node `{0}`")]
    Overlap(String),
    #[error("unknown object transition `{0}`")]
    UnknownTransition(ObjTransId),
    #[error("rate of `{transition}` would become {rate}, rates must stay positive")]
    NonPositiveRate { transition: ObjTransId, rate: String },
    #[error("`{0}` is not a branch entry of any choice")]
    NoXorBlock(ObjTransId),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("{0}")]
    Custom(String),
}

impl From<CountOverflow> for AlgebraError {
    fn from(e: CountOverflow) -> Self {
        AlgebraError::Net(NetError::Overflow(e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuardError {
    #[error("unbound guard variable `{0}`")]
    UnboundVariable(VarName),
    #[error("net bound to `{var}` has no transition `{transition}`")]
    UnknownTransition { var: VarName, transition: ObjTransId },
    #[error("division by zero in guard")]
    DivisionByZero,
}
