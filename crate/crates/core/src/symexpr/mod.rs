//! Symbolic expressions over jet coordinates.

pub mod atom;
pub mod calculus;
pub mod ctx;
pub mod eval;
pub mod expr;
pub mod geometry;
pub mod index;
pub mod normal;
pub mod random;

pub use atom::{Atom, FunDeps, FunId, FunVar, Sym};
pub use calculus::{partial, partial_by_atom, total_derivative, total_derivative_multi};
pub use ctx::{Ctx, EnergyFn};
pub use eval::{eval_numeric, JetPoint, PointSampler};
pub use expr::{Expr, ExprBuilder, Mono};
pub use geometry::Geometry;
pub use index::{BaseSet, Bundle, Comp, JetVar, MultiIndex, MAX_DIM};
pub use normal::{equivalent, normal_form};
