//! Checkpoint container: an 8-byte magic, a little-endian `u64` header
//! length, a JSON header, then the raw little-endian `f32` tensor data in
//! header order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainingConfig;
use crate::error::{Error, Result};
use crate::nn::{BackboneSpec, Network};

const MAGIC: &[u8; 8] = b"RDRCKPT\0";
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    backbone: BackboneSpec,
    config: TrainingConfig,
    best_auc: f64,
    best_epoch: usize,
    tensors: Vec<TensorEntry>,
}

/// Network weights plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub backbone: BackboneSpec,
    pub config: TrainingConfig,
    pub best_auc: f64,
    pub best_epoch: usize,
    pub tensors: Vec<(String, Vec<f32>)>,
}

impl Checkpoint {
    pub fn from_network(
        network: &Network,
        config: &TrainingConfig,
        best_auc: f64,
        best_epoch: usize,
    ) -> Self {
        Checkpoint {
            backbone: network.spec,
            config: config.clone(),
            best_auc,
            best_epoch,
            tensors: network.state(),
        }
    }

    /// Rebuilds the network and loads every tensor.
    pub fn to_network(&self) -> Result<Network> {
        let mut net = Network::new(self.backbone, 0)?;
        load_into(&mut net, &self.tensors).map_err(|reason| Error::Checkpoint {
            path: "<memory>".into(),
            reason,
        })?;
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let header = Header {
            format_version: CHECKPOINT_FORMAT_VERSION,
            backbone: self.backbone,
            config: self.config.clone(),
            best_auc: self.best_auc,
            best_epoch: self.best_epoch,
            tensors: self
                .tensors
                .iter()
                .map(|(name, v)| TensorEntry {
                    name: name.clone(),
                    len: v.len(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header)?;
        let total: usize = self.tensors.iter().map(|(_, v)| v.len()).sum();
        let mut buf = Vec::with_capacity(16 + json.len() + 4 * total);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
        buf.extend_from_slice(&json);
        for (_, v) in &self.tensors {
            for x in v {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let tmp = path.with_extension("ckpt.tmp");
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(&buf).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Checkpoint {
            path: path.to_path_buf(),
            reason,
        };
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(bad("not a checkpoint file".into()));
        }
        let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        let body = bytes
            .get(16..16 + hlen)
            .ok_or_else(|| bad("truncated header".into()))?;
        let header: Header =
            serde_json::from_slice(body).map_err(|e| bad(format!("header: {e}")))?;
        if header.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {}", header.format_version)));
        }
        let mut data = &bytes[16 + hlen..];
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for t in &header.tensors {
            let n = 4 * t.len;
            if data.len() < n {
                return Err(bad(format!("tensor {} is truncated", t.name)));
            }
            let v = data[..n]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            tensors.push((t.name.clone(), v));
            data = &data[n..];
        }
        if !data.is_empty() {
            return Err(bad("trailing bytes after tensor data".into()));
        }
        let ckpt = Checkpoint {
            backbone: header.backbone,
            config: header.config,
            best_auc: header.best_auc,
            best_epoch: header.best_epoch,
            tensors,
        };
        ckpt.to_network().map_err(|e| bad(e.to_string()))?;
        Ok(ckpt)
    }
}

/// Copies named tensors into `net`, requiring an exact name and size match.
pub(crate) fn load_into(
    net: &mut Network,
    tensors: &[(String, Vec<f32>)],
) -> std::result::Result<(), String> {
    let state = net.state_mut();
    if state.len() != tensors.len() {
        return Err(format!(
            "expected {} tensors, found {}",
            state.len(),
            tensors.len()
        ));
    }
    for ((name, dst), (src_name, src)) in state.into_iter().zip(tensors) {
        if name != *src_name || dst.len() != src.len() {
            return Err(format!("tensor mismatch at {name} (found {src_name})"));
        }
        dst.copy_from_slice(src);
    }
    Ok(())
}
