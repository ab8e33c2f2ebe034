//! Checkpoints: magic `GSCK`, manifest length (u32 LE), JSON manifest, then
//! one `GST1` tensor per parameter in manifest order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cli::tensor_io::{Dtype, Tensor};
use crate::error::{Error, Result};
use crate::layers::{ArchitectureConfig, Network, ParamClass, ParamKey};

const MAGIC: &[u8; 4] = b"GSCK";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub layer: usize,
    pub class: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ArchitectureConfig,
    /// Whether spline layers were deformable when saved.
    pub deformable: bool,
    pub parameters: Vec<ManifestEntry>,
}

pub fn encode_checkpoint(net: &Network) -> Vec<u8> {
    let params = net.parameters();
    let deformable = net.layers.iter().any(|l| matches!(l, crate::layers::Layer::Spline(s) if s.deformable));
    let manifest = Manifest {
        config: net.config.clone(),
        deformable,
        parameters: params
            .iter()
            .map(|(k, v)| ManifestEntry { name: k.to_string(), layer: k.layer, class: k.class.name().into(), shape: vec![v.len()] })
            .collect(),
    };
    let json = serde_json::to_vec(&manifest).expect("manifest serializes");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for (_, v) in params {
        out.extend(Tensor { dims: vec![v.len()], data: v }.encode(Dtype::F64));
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Network> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let len = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let end = 8 + len;
    if bytes.len() < end {
        return Err(Error::TruncatedPayload { expected: end, got: bytes.len() });
    }
    let manifest: Manifest = serde_json::from_slice(&bytes[8..end])?;
    let mut net = Network::new(&manifest.config, 0)?;
    if manifest.deformable {
        net.make_deformable();
    }
    let mut at = end;
    for entry in &manifest.parameters {
        let (t, _, used) = Tensor::decode_prefix(&bytes[at..])?;
        at += used;
        let class = ParamClass::from_name(&entry.class).ok_or_else(|| Error::InvalidArgument(format!("unknown class {}", entry.class)))?;
        net.set_parameter(ParamKey { layer: entry.layer, class }, &t.data)?;
    }
    Ok(net)
}

pub fn save_checkpoint(net: &Network, path: &Path) -> Result<()> {
    std::fs::write(path, encode_checkpoint(net))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Network> {
    decode_checkpoint(&std::fs::read(path)?)
}
