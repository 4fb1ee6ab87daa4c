//! Model definitions: fields, Lagrangians, parametrizations and generators,
//! and the text format they are read from and written to.

pub mod build;
pub mod lexer;
pub mod model;
pub mod parser;
pub mod render;

pub use build::{parse_expr, parse_model};
pub use model::{
    context_for, layout, FieldDecl, FieldKind, LagrangianTerm, Model, Parametrization,
};
pub use render::{latex_expr, render_expr, render_model};
