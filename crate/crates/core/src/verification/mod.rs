//! Executable checks of equivariance, partition of unity, the two
//! equivalence identities, sphere reconstruction and gradients.

pub mod equivariance;
pub mod gauge;
pub mod gradcheck;
pub mod pou;
pub mod report;
pub mod scale_space;
pub mod sphere;
pub mod suite;

pub use equivariance::{equivariance_convergence, equivariance_error, ConvergenceSetup, GaussianInput};
pub use gauge::{gauge_equivalence_error, gauge_sides, AngularKernel};
pub use gradcheck::{gradcheck, gradcheck_probes, relative_error, GradcheckOptions, Probe, ProbeSet};
pub use pou::{max_deviation, partition_of_unity_deviation, PouCase};
pub use report::{Criterion, VerificationReport};
pub use scale_space::{scale_space_equivalence_error, scale_space_sides};
pub use sphere::{fit_sphere_texture, sphere_reconstruction_error, SphereFit, SphereFitOptions, Texture};
pub use suite::{run_suite, Suite};
