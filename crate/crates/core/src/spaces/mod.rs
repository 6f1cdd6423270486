//! Primal and dual boundary-element spaces and their panel-wise products.

mod function_space;
mod multitrace;

pub use function_space::{
    continuous_p1_space, dual_constant_space, dual_p1_space, pw_constant_space, Anchor, Block, DofMeta,
    ElementDofs, FunctionSpace, ShapeKind, SpaceKind,
};
pub use multitrace::{multitrace_space, singletrace_basis, CoefficientColumns, Problem, Reduction, Side};
