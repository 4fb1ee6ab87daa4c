//! Generators, Lie derivatives, covariance and conserved currents.

pub mod current;
pub mod lift;

pub use current::{
    apply_generator, check_covariance, check_jmap, check_offshell_identity,
    gauge_parameter_components, jmap_section, lie_derivative_jet, lie_of_lagrangian, lie_section,
    noether_current, noether_current_total, settle, settle_linear, split_generator, superpotential,
    Covariance, NoetherCurrent, Superpotential,
};
pub use lift::{lie_template, xi_jet, zeta_jet, FieldRef, GeneratorLift};
