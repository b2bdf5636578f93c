//! Blow-up profile construction: local seed, continuation to the first root of G, diagnostics.

pub mod continuation;
pub mod diagnostics;
pub mod fixed_point;
pub mod local;

pub use continuation::{
    build_profile, continue_profile, continue_profile_with, continue_trace, root_angle_with, ProfileOptions,
    ProfilePair, ProfileTrace,
};
pub use diagnostics::{
    fit_boundary_exponent, fit_power_law, identity_residual_on_trace, monotonicity_identity_residual,
    monotonicity_identity_residual_with, IDENTITY_MARGIN,
};
pub use fixed_point::{solve_singular_fixed_point, FixedPointOptions, FixedPointSolution, SingularFixedPointProblem};
pub use local::{
    forcing_constants, local_profile, local_profile_with, printed_constants, LocalOptions, LocalSeed, LocalState,
};
