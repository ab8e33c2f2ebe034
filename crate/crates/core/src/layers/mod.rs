//! Lifting correlation, group correlation and projection over `H`, the
//! auxiliary layers networks are built from, and the config-driven composer.

pub mod config;
pub mod correlate;
pub mod feature_map;
pub mod network;
pub mod ops;
pub mod stack;
pub mod transform;

pub use config::{ArchitectureConfig, GroupChoice, LayerConfig, LossKind, SpatialSpec};
pub use correlate::{group_correlate, lift_correlate, Padding};
pub use feature_map::FeatureMap;
pub use network::{ForwardCache, Layer, Network, ParamClass, ParamKey, SplineLayer, SplineRole};
pub use ops::{project_h, ProjectMode};
pub use stack::{sample_transformed_kernels, sample_transformed_kernels_with_step, KernelBasis, SampledKernelStack, StackMode};
pub use transform::apply_representation;
