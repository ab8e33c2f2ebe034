//! Sequential networks assembled from an [`ArchitectureConfig`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::config::{ArchitectureConfig, GroupChoice, LayerConfig, SpatialSpec};
use super::correlate::{group_correlate, group_correlate_backward, lift_correlate, lift_correlate_backward, Padding};
use super::feature_map::FeatureMap;
use super::ops::{self, NormCache, ProjectMode};
use super::stack::{algebra_coordinate, KernelBasis, SampledKernelStack, StackMode};
use crate::error::{Error, Result};
use crate::lie_groups::{GroupElement, GroupKind, LieAlgebraVector};
use crate::splines::{build_h_grid, build_spatial_centers, GroupGrid, HLayout, SplineKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplineRole {
    Lift,
    Group,
    /// Planar correlation, a lift over the trivial grid.
    Planar,
}

/// A lifting, group or planar spline correlation with its sampled basis.
#[derive(Debug, Clone)]
pub struct SplineLayer {
    pub role: SplineRole,
    pub kernel: SplineKernel,
    pub grid: GroupGrid,
    pub padding: Padding,
    pub deformable: bool,
    pub sample_shape: Vec<usize>,
    basis: KernelBasis,
}

impl SplineLayer {
    pub fn new(role: SplineRole, kernel: SplineKernel, grid: GroupGrid, sample_shape: Vec<usize>, padding: Padding, deformable: bool) -> Result<Self> {
        let mode = if role == SplineRole::Group { StackMode::Group } else { StackMode::Lifting };
        let basis = KernelBasis::new(&kernel, &grid, &sample_shape, 1.0, mode)?;
        Ok(SplineLayer { role, kernel, grid, padding, deformable, sample_shape, basis })
    }

    pub fn basis(&self) -> &KernelBasis {
        &self.basis
    }

    /// Resamples the basis after the kernel's centers changed.
    pub fn rebuild_basis(&mut self) -> Result<()> {
        self.basis = KernelBasis::new(&self.kernel, &self.grid, &self.sample_shape, self.basis.spatial_step, self.basis.mode)?;
        Ok(())
    }

    pub fn stack(&self) -> Result<SampledKernelStack> {
        self.basis.assemble(&self.kernel, &self.grid)
    }

    pub fn forward(&self, f: &FeatureMap, stack: &SampledKernelStack) -> Result<FeatureMap> {
        match self.role {
            SplineRole::Lift => lift_correlate(f, stack, self.padding),
            SplineRole::Group => group_correlate(f, stack, self.padding),
            SplineRole::Planar => {
                let mut out = lift_correlate(f, stack, self.padding)?;
                out.h_size = 0;
                out.grid = None;
                Ok(out)
            }
        }
    }

    pub fn backward(&self, f: &FeatureMap, stack: &SampledKernelStack, dout: &FeatureMap) -> Result<(FeatureMap, SampledKernelStack)> {
        match self.role {
            SplineRole::Group => group_correlate_backward(f, stack, self.padding, dout),
            _ => lift_correlate_backward(f, stack, self.padding, dout),
        }
    }

    /// Algebra coordinates of the `H` centers (1-D groups only).
    pub fn h_center_coordinates(&self) -> Result<Vec<f64>> {
        match &self.kernel.h_centers {
            None => Ok(Vec::new()),
            Some(cs) => cs.iter().map(algebra_coordinate).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Layer {
    Spline(Box<SplineLayer>),
    Project(ProjectMode),
    Relu,
    Bias(Vec<f64>),
    Norm { gamma: Vec<f64>, beta: Vec<f64>, eps: f64 },
    Maxpool(usize),
    Upsample(usize),
    Conv1x1 { w: Vec<f64>, in_channels: usize, out_channels: usize },
    Softmax,
    Sigmoid,
}

/// Kind of trainable tensor within a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamClass {
    Coefficients,
    SpatialCenters,
    HCenters,
    Weights,
    Bias,
    NormScale,
    NormShift,
}

impl ParamClass {
    pub fn name(self) -> &'static str {
        match self {
            ParamClass::Coefficients => "coefficients",
            ParamClass::SpatialCenters => "spatial_centers",
            ParamClass::HCenters => "h_centers",
            ParamClass::Weights => "weights",
            ParamClass::Bias => "bias",
            ParamClass::NormScale => "norm_scale",
            ParamClass::NormShift => "norm_shift",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            ParamClass::Coefficients,
            ParamClass::SpatialCenters,
            ParamClass::HCenters,
            ParamClass::Weights,
            ParamClass::Bias,
            ParamClass::NormScale,
            ParamClass::NormShift,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamKey {
    pub layer: usize,
    pub class: ParamClass,
}

impl std::fmt::Display for ParamKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "layer{}.{}", self.layer, self.class.name())
    }
}

/// Intermediate values of a forward pass kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input of every executed layer, per batch sample.
    pub layer_inputs: Vec<Vec<FeatureMap>>,
    pub stacks: Vec<Option<SampledKernelStack>>,
    pub norms: Vec<Option<NormCache>>,
    pub outputs: Vec<FeatureMap>,
    /// Number of layers executed.
    pub upto: usize,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub config: ArchitectureConfig,
    pub layers: Vec<Layer>,
}

/// Sampled kernel extent: the explicit `sample_size`, else the full dilated
/// support on scale layers, else the kernel size.
fn sample_size(spec: &SpatialSpec, kernel: &SplineKernel, grid: &GroupGrid, role: SplineRole) -> usize {
    if let Some(s) = spec.sample_size {
        return s;
    }
    if role == SplineRole::Planar || grid.kind != GroupKind::ScalePos {
        return spec.kernel_size;
    }
    let max_scale = grid
        .elements
        .iter()
        .map(|e| match e {
            GroupElement::ScalePos(s) => *s,
            _ => 1.0,
        })
        .fold(1.0, f64::max);
    2 * (kernel.spatial_reach() * max_scale - 1e-9).ceil().max(0.0) as usize + 1
}

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    rank: usize,
}

impl Builder<'_> {
    fn spline(&mut self, role: SplineRole, spec: &SpatialSpec, in_ch: usize, grid: GroupGrid, h_centers: Option<Vec<GroupElement>>, s_h: f64) -> Result<SplineLayer> {
        let centers = build_spatial_centers(spec.kernel_size, self.rank, spec.disk_radius)?;
        let mut kernel = SplineKernel::new(spec.degree, grid.kind, self.rank, centers, h_centers, spec.s_x, s_h, in_ch, spec.out_channels)?;
        let fan_in = (in_ch * kernel.center_count()) as f64;
        kernel.randomize(self.rng, (2.0 / fan_in).sqrt());
        let size = sample_size(spec, &kernel, &grid, role);
        SplineLayer::new(role, kernel, grid, vec![size; self.rank], spec.padding, spec.deformable)
    }
}

impl Network {
    /// Builds a network with seeded random coefficients.
    pub fn new(config: &ArchitectureConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = config.input_shape.as_ref().map_or(2, |s| s.len());
        let mut b = Builder { rng: &mut rng, rank };
        let mut channels = config.input_channels;
        let mut grid: Option<GroupGrid> = None;
        let mut layers = Vec::with_capacity(config.layers.len());
        for (i, lc) in config.layers.iter().enumerate() {
            let type_err = |message: &str| Error::ConfigTypeError { layer: i, message: format!("{}: {message}", lc.type_name()) };
            let layer = match lc {
                LayerConfig::Lift { spatial, group, n_h, s_grid } => {
                    if grid.is_some() {
                        return Err(type_err("input is already lifted"));
                    }
                    let spacing = s_grid.unwrap_or_else(|| group.default_spacing(*n_h));
                    let (g, _) = build_h_grid(group.kind(), *n_h, spacing, HLayout::GlobalUniform)
                        .map_err(|e| type_err(&e.to_string()))?;
                    let l = b.spline(SplineRole::Lift, spatial, channels, g.clone(), None, spacing)?;
                    grid = Some(g);
                    channels = spatial.out_channels;
                    Layer::Spline(Box::new(l))
                }
                LayerConfig::Gconv { spatial, layout, s_h } => {
                    let Some(g) = grid.clone() else {
                        return Err(type_err("input is planar; a lift must come first"));
                    };
                    let (_, centers) = build_h_grid(g.kind, g.len(), g.spacing, *layout).map_err(|e| type_err(&e.to_string()))?;
                    let sh = s_h.unwrap_or(g.spacing);
                    let l = b.spline(SplineRole::Group, spatial, channels, g, Some(centers), sh)?;
                    channels = spatial.out_channels;
                    Layer::Spline(Box::new(l))
                }
                LayerConfig::Conv2d { spatial } => {
                    if grid.is_some() {
                        return Err(type_err("input is lifted; project first"));
                    }
                    let g = GroupGrid::trivial(GroupKind::ScalePos);
                    let l = b.spline(SplineRole::Planar, spatial, channels, g, None, 1.0)?;
                    channels = spatial.out_channels;
                    Layer::Spline(Box::new(l))
                }
                LayerConfig::Project { mode } => {
                    if grid.take().is_none() {
                        return Err(type_err("input is not lifted"));
                    }
                    Layer::Project(*mode)
                }
                LayerConfig::Relu => Layer::Relu,
                LayerConfig::Bias => Layer::Bias(vec![0.0; channels]),
                LayerConfig::Norm { eps } => Layer::Norm { gamma: vec![1.0; channels], beta: vec![0.0; channels], eps: *eps },
                LayerConfig::Maxpool { size } => Layer::Maxpool(*size),
                LayerConfig::Upsample { factor } => Layer::Upsample(*factor),
                LayerConfig::Conv1x1 { out_channels } => {
                    let normal = Normal::new(0.0, (2.0 / channels as f64).sqrt()).expect("finite");
                    let w = (0..out_channels * channels).map(|_| normal.sample(b.rng)).collect();
                    let l = Layer::Conv1x1 { w, in_channels: channels, out_channels: *out_channels };
                    channels = *out_channels;
                    l
                }
                LayerConfig::Softmax => Layer::Softmax,
                LayerConfig::Sigmoid => Layer::Sigmoid,
            };
            layers.push(layer);
        }
        Ok(Network { config: config.clone(), layers })
    }

    /// Index one past the last layer that produces logits (a trailing
    /// softmax or sigmoid is excluded).
    pub fn logits_end(&self) -> usize {
        match self.layers.last() {
            Some(Layer::Softmax | Layer::Sigmoid) => self.layers.len() - 1,
            _ => self.layers.len(),
        }
    }

    fn apply_one(&self, layer: &Layer, f: &FeatureMap, stack: Option<&SampledKernelStack>) -> Result<FeatureMap> {
        match layer {
            Layer::Spline(l) => l.forward(f, stack.expect("stack assembled")),
            Layer::Project(m) => ops::project_h(f, *m),
            Layer::Relu => Ok(ops::relu(f)),
            Layer::Bias(b) => ops::add_bias(f, b),
            Layer::Maxpool(s) => ops::maxpool(f, *s),
            Layer::Upsample(s) => ops::upsample(f, *s),
            Layer::Conv1x1 { w, out_channels, .. } => ops::conv1x1(f, w, *out_channels),
            Layer::Softmax => Ok(ops::softmax(f)),
            Layer::Sigmoid => Ok(ops::sigmoid(f)),
            Layer::Norm { .. } => unreachable!("norm is applied batch-wise"),
        }
    }

    fn check_input(&self, batch: &[FeatureMap]) -> Result<()> {
        for f in batch {
            f.check_invariants()?;
            if f.channels != self.config.input_channels {
                return Err(Error::ChannelMismatch { expected: self.config.input_channels, got: f.channels });
            }
            if f.is_lifted() {
                return Err(Error::ShapeMismatch("network input must be planar".into()));
            }
        }
        Ok(())
    }

    /// Runs layers `0..upto`, keeping intermediates when `keep` is set.
    pub fn forward_range(&self, batch: &[FeatureMap], upto: usize, keep: bool) -> Result<ForwardCache> {
        self.check_input(batch)?;
        let upto = upto.min(self.layers.len());
        let mut cache = ForwardCache {
            layer_inputs: Vec::new(),
            stacks: Vec::new(),
            norms: Vec::new(),
            outputs: Vec::new(),
            upto,
        };
        let mut cur: Vec<FeatureMap> = batch.to_vec();
        for layer in &self.layers[..upto] {
            let stack = match layer {
                Layer::Spline(l) => Some(l.stack()?),
                _ => None,
            };
            let (next, norm) = match layer {
                Layer::Norm { gamma, beta, eps } => {
                    let (o, c) = ops::normalize(&cur, gamma, beta, *eps)?;
                    (o, Some(c))
                }
                _ => {
                    let out: Result<Vec<FeatureMap>> = cur.par_iter().map(|f| self.apply_one(layer, f, stack.as_ref())).collect();
                    (out?, None)
                }
            };
            if keep {
                cache.layer_inputs.push(std::mem::replace(&mut cur, next));
                cache.stacks.push(stack);
                cache.norms.push(norm);
            } else {
                cur = next;
            }
        }
        cache.outputs = cur;
        Ok(cache)
    }

    /// Full forward pass (probabilities for the presets).
    pub fn forward(&self, batch: &[FeatureMap]) -> Result<Vec<FeatureMap>> {
        Ok(self.forward_range(batch, self.layers.len(), false)?.outputs)
    }

    /// Forward pass up to the logits, with cache.
    pub fn forward_logits(&self, batch: &[FeatureMap]) -> Result<ForwardCache> {
        self.forward_range(batch, self.logits_end(), true)
    }

    /// Every trainable tensor as `(key, flat values)`. Centers appear only
    /// for deformable layers.
    pub fn parameters(&self) -> Vec<(ParamKey, Vec<f64>)> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let key = |class| ParamKey { layer: i, class };
            match layer {
                Layer::Spline(l) => {
                    out.push((key(ParamClass::Coefficients), l.kernel.coefficients.clone()));
                    if l.deformable {
                        out.push((key(ParamClass::SpatialCenters), l.kernel.spatial_centers.concat()));
                        if l.kernel.h_centers.is_some() && l.kernel.group.algebra_dim() == 1 {
                            out.push((key(ParamClass::HCenters), l.h_center_coordinates().unwrap_or_default()));
                        }
                    }
                }
                Layer::Bias(b) => out.push((key(ParamClass::Bias), b.clone())),
                Layer::Norm { gamma, beta, .. } => {
                    out.push((key(ParamClass::NormScale), gamma.clone()));
                    out.push((key(ParamClass::NormShift), beta.clone()));
                }
                Layer::Conv1x1 { w, .. } => out.push((key(ParamClass::Weights), w.clone())),
                _ => {}
            }
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|(_, v)| v.len()).sum()
    }

    /// Overwrites one trainable tensor.
    pub fn set_parameter(&mut self, key: ParamKey, values: &[f64]) -> Result<()> {
        let layer = self
            .layers
            .get_mut(key.layer)
            .ok_or_else(|| Error::InvalidArgument(format!("no layer {}", key.layer)))?;
        let bad = |expected: usize| Error::DimensionMismatch { expected, got: values.len() };
        match (layer, key.class) {
            (Layer::Spline(l), ParamClass::Coefficients) => {
                if values.len() != l.kernel.coefficients.len() {
                    return Err(bad(l.kernel.coefficients.len()));
                }
                l.kernel.coefficients.copy_from_slice(values);
            }
            (Layer::Spline(l), ParamClass::SpatialCenters) => {
                let d = l.kernel.dim;
                if values.len() != l.kernel.spatial_centers.len() * d {
                    return Err(bad(l.kernel.spatial_centers.len() * d));
                }
                l.kernel.spatial_centers = values.chunks(d).map(|c| c.to_vec()).collect();
                l.rebuild_basis()?;
            }
            (Layer::Spline(l), ParamClass::HCenters) => {
                let kind = l.kernel.group;
                let Some(cs) = l.kernel.h_centers.as_mut() else {
                    return Err(Error::InvalidArgument("layer has no H centers".into()));
                };
                if values.len() != cs.len() {
                    return Err(bad(cs.len()));
                }
                for (c, &a) in cs.iter_mut().zip(values) {
                    *c = LieAlgebraVector::new(kind, vec![a])?.exp();
                }
                l.rebuild_basis()?;
            }
            (Layer::Bias(b), ParamClass::Bias) => {
                if values.len() != b.len() {
                    return Err(bad(b.len()));
                }
                b.copy_from_slice(values);
            }
            (Layer::Norm { gamma, .. }, ParamClass::NormScale) => {
                if values.len() != gamma.len() {
                    return Err(bad(gamma.len()));
                }
                gamma.copy_from_slice(values);
            }
            (Layer::Norm { beta, .. }, ParamClass::NormShift) => {
                if values.len() != beta.len() {
                    return Err(bad(beta.len()));
                }
                beta.copy_from_slice(values);
            }
            (Layer::Conv1x1 { w, .. }, ParamClass::Weights) => {
                if values.len() != w.len() {
                    return Err(bad(w.len()));
                }
                w.copy_from_slice(values);
            }
            _ => return Err(Error::InvalidArgument(format!("layer {} has no {}", key.layer, key.class.name()))),
        }
        Ok(())
    }

    /// Marks every spline layer deformable, exposing its centers as parameters.
    pub fn make_deformable(&mut self) {
        for l in &mut self.layers {
            if let Layer::Spline(s) = l {
                s.deformable = true;
            }
        }
    }
}

/// The group a lifting config introduces, for callers that build grids by hand.
pub fn lift_grid(group: GroupChoice, n_h: usize, s_grid: Option<f64>) -> Result<GroupGrid> {
    let spacing = s_grid.unwrap_or_else(|| group.default_spacing(n_h));
    Ok(build_h_grid(group.kind(), n_h, spacing, HLayout::GlobalUniform)?.0)
}
