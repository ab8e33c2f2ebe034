//! Cardinal B-splines on `R^d`, B-splines on Lie groups through the
//! logarithmic map, and the center layouts kernels are built on.

pub mod cardinal;
pub mod grid;
pub mod kernel;
pub mod repulsion;

pub use cardinal::{cardinal_bspline, cardinal_bspline_grad};
pub use grid::{build_h_grid, build_spatial_centers, GroupGrid, HLayout};
pub use kernel::{eval_spline_g, eval_spline_h, SplineKernel};
pub use repulsion::{build_repulsion_grid, min_pairwise_distance, repulsion_sphere_points};
