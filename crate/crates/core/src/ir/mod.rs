//! StableHLO text subset: types, parser and printer.
//!
//! Accepted grammar (one flat block per function):
//!
//! ```text
//! module @name attributes {..} {           // wrapper is optional
//!   func.func public @main(%arg0: tensor<4x6xf32>, ...) -> tensor<..> {
//!     %0 = "stablehlo.dot_general"(%arg0, %arg1) {attrs} : (types) -> type
//!     %1 = stablehlo.add %0, %0 : tensor<..>
//!     %2 = "stablehlo.all_reduce"(%1) ({
//!       ^bb0(%a: tensor<f32>, %b: tensor<f32>):
//!         %s = stablehlo.add %a, %b : tensor<f32>
//!         stablehlo.return %s : tensor<f32>
//!     }) : (tensor<..>) -> tensor<..>
//!     func.return %2 : tensor<..>
//!   }
//! }
//! ```
//!
//! Attributes the toolchain does not interpret are stored verbatim.

mod parse;
mod print;
mod types;

pub use parse::{parse_module, parse_tensor_type};
pub use print::{format_attr_value, print_module};
pub use types::*;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrError {
    #[error("byte count overflow for {0}")]
    Overflow(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("use of undefined value {0}")]
    UndefinedValue(String),
    #[error("duplicate definition of {0}")]
    DuplicateDefinition(String),
    #[error("duplicate attribute {0}")]
    DuplicateAttribute(String),
    #[error("malformed tensor type: {0}")]
    MalformedType(String),
    #[error("unknown element type {0}")]
    UnknownElementType(String),
    #[error("dynamic dimension in {0} (dynamic shapes are not supported)")]
    DynamicShape(String),
    #[error("{0}")]
    Arity(String),
    #[error("module has no function named main")]
    MissingMain,
    #[error("function {0} defined more than once")]
    DuplicateFunction(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}
