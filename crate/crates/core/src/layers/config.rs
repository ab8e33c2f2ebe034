//! JSON architecture descriptions and the shipped presets.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::correlate::Padding;
use super::ops::ProjectMode;
use crate::error::Result;
use crate::lie_groups::GroupKind;
use crate::splines::HLayout;

pub const PCAM_DESK: &str = include_str!("../../presets/pcam_desk.json");
pub const CELEBA_DESK: &str = include_str!("../../presets/celeba_desk.json");

/// Every shipped preset as `(name, json)`.
pub const PRESETS: [(&str, &str); 7] = [
    ("pcam_desk", PCAM_DESK),
    ("pcam_desk_planar", include_str!("../../presets/pcam_desk_planar.json")),
    ("celeba_desk", CELEBA_DESK),
    ("blobs_desk", include_str!("../../presets/blobs_desk.json")),
    ("blobs_desk_planar", include_str!("../../presets/blobs_desk_planar.json")),
    ("blobs_desk_planar_deep", include_str!("../../presets/blobs_desk_planar_deep.json")),
    ("blobs_desk_planar_deep_narrow", include_str!("../../presets/blobs_desk_planar_deep_narrow.json")),
];

/// The group `H` a lifting layer introduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupChoice {
    So2,
    Scale,
}

impl GroupChoice {
    pub fn kind(self) -> GroupKind {
        match self {
            GroupChoice::So2 => GroupKind::So2,
            GroupChoice::Scale => GroupKind::ScalePos,
        }
    }

    /// `2 pi / N_h` on SO(2), `ln 2 / 2` on the scalings.
    pub fn default_spacing(self, n_h: usize) -> f64 {
        match self {
            GroupChoice::So2 => 2.0 * PI / n_h as f64,
            GroupChoice::Scale => 0.5 * 2f64.ln(),
        }
    }
}

fn two() -> usize {
    2
}

fn one() -> f64 {
    1.0
}

fn eps() -> f64 {
    1e-5
}

fn global() -> HLayout {
    HLayout::GlobalUniform
}

/// Spatial part shared by every spline layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialSpec {
    pub out_channels: usize,
    pub kernel_size: usize,
    #[serde(default)]
    pub disk_radius: Option<f64>,
    #[serde(default = "two")]
    pub degree: usize,
    #[serde(default = "one")]
    pub s_x: f64,
    /// Extent of the sampled kernel array; defaults to the kernel size, or
    /// on scale layers to the whole support at the largest scaling.
    #[serde(default)]
    pub sample_size: Option<usize>,
    #[serde(default)]
    pub padding: Padding,
    #[serde(default)]
    pub deformable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerConfig {
    Lift {
        #[serde(flatten)]
        spatial: SpatialSpec,
        group: GroupChoice,
        n_h: usize,
        #[serde(default)]
        s_grid: Option<f64>,
    },
    Gconv {
        #[serde(flatten)]
        spatial: SpatialSpec,
        #[serde(default = "global")]
        layout: HLayout,
        /// Basis scale on `H`; defaults to the grid spacing.
        #[serde(default)]
        s_h: Option<f64>,
    },
    /// Planar spline correlation.
    Conv2d {
        #[serde(flatten)]
        spatial: SpatialSpec,
    },
    Project {
        mode: ProjectMode,
    },
    Relu,
    Bias,
    Norm {
        #[serde(default = "eps")]
        eps: f64,
    },
    Maxpool {
        size: usize,
    },
    Upsample {
        factor: usize,
    },
    Conv1x1 {
        out_channels: usize,
    },
    Softmax,
    Sigmoid,
}

impl LayerConfig {
    pub fn type_name(&self) -> &'static str {
        match self {
            LayerConfig::Lift { .. } => "lift",
            LayerConfig::Gconv { .. } => "gconv",
            LayerConfig::Conv2d { .. } => "conv2d",
            LayerConfig::Project { .. } => "project",
            LayerConfig::Relu => "relu",
            LayerConfig::Bias => "bias",
            LayerConfig::Norm { .. } => "norm",
            LayerConfig::Maxpool { .. } => "maxpool",
            LayerConfig::Upsample { .. } => "upsample",
            LayerConfig::Conv1x1 { .. } => "conv1x1",
            LayerConfig::Softmax => "softmax",
            LayerConfig::Sigmoid => "sigmoid",
        }
    }

    pub fn spatial_mut(&mut self) -> Option<&mut SpatialSpec> {
        match self {
            LayerConfig::Lift { spatial, .. } | LayerConfig::Gconv { spatial, .. } | LayerConfig::Conv2d { spatial } => {
                Some(spatial)
            }
            _ => None,
        }
    }
}

/// Loss the network's output is trained against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    SoftmaxCe,
    SigmoidBce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "one_channel")]
    pub input_channels: usize,
    #[serde(default)]
    pub input_shape: Option<Vec<usize>>,
    pub layers: Vec<LayerConfig>,
}

fn one_channel() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigDoc {
    Full(ArchitectureConfig),
    Bare(Vec<LayerConfig>),
}

impl ArchitectureConfig {
    /// Parses either a full document or a bare array of layer records.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ConfigDoc = if text.trim_start().starts_with('[') {
            ConfigDoc::Bare(serde_json::from_str(text)?)
        } else {
            serde_json::from_str(text)?
        };
        Ok(match doc {
            ConfigDoc::Full(c) => c,
            ConfigDoc::Bare(layers) => ArchitectureConfig { name: None, input_channels: 1, input_shape: None, layers },
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// A shipped preset by name from [`PRESETS`], with or without `.json`.
    pub fn preset(name: &str) -> Option<Self> {
        let key = name.trim_end_matches(".json");
        let key = key.rsplit('/').next().unwrap_or(key);
        PRESETS.iter().find(|(n, _)| *n == key).and_then(|(_, json)| Self::from_json(json).ok())
    }

    /// Preset name or a path to a JSON file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        match Self::preset(name_or_path) {
            Some(c) if !std::path::Path::new(name_or_path).exists() => Ok(c),
            _ => Self::from_path(std::path::Path::new(name_or_path)),
        }
    }

    /// The loss implied by the final activation.
    pub fn loss_kind(&self) -> LossKind {
        match self.layers.last() {
            Some(LayerConfig::Sigmoid) => LossKind::SigmoidBce,
            _ => LossKind::SoftmaxCe,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        let p = ArchitectureConfig::preset("pcam_desk.json").unwrap();
        assert_eq!(p.input_shape.as_deref(), Some(&[24usize, 24][..]));
        assert_eq!(p.loss_kind(), LossKind::SoftmaxCe);
        let c = ArchitectureConfig::preset("celeba_desk").unwrap();
        assert_eq!(c.loss_kind(), LossKind::SigmoidBce);
        for (name, _) in PRESETS {
            assert!(ArchitectureConfig::preset(name).is_some(), "{name}");
        }
    }

    #[test]
    fn bare_array() {
        let c = ArchitectureConfig::from_json(r#"[{"type":"relu"},{"type":"maxpool","size":2}]"#).unwrap();
        assert_eq!(c.layers, vec![LayerConfig::Relu, LayerConfig::Maxpool { size: 2 }]);
        assert!(ArchitectureConfig::from_json(r#"[{"type":"bogus"}]"#).is_err());
    }
}
