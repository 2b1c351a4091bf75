//! The model-formula language: parsing, attribute expressions and level
//! selection.

mod ast;
mod attr;
mod eval;
mod levels;
mod model;
mod parse;

pub use ast::{fmt_num, Arg, BinOp, Expr, UnOp};
pub use attr::{AttrSpec, Covariate, Factor};
pub use eval::{recycle, Atom, Env, Matrix, Value};
pub use levels::{tabulate, CellGroup, Level, LevelSpec, Levels2Spec};
pub use model::{Formula, TermExpr};
pub use parse::parse_expr;
