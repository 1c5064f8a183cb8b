//! Checkpoints: one JSON header line (architecture, seed, scene bounds)
//! followed by a little-endian blob of 64-bit floats holding the Fourier
//! matrix and every learnable tensor in the canonical flatten order.

use super::net::{init_network, MlpParams, NetConfig};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    net: NetConfig,
    seed: u64,
    bounds_min: Vec<f64>,
    bounds_max: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    manifest: Option<String>,
}

pub fn save_checkpoint(
    params: &MlpParams,
    bounds_min: &[f64],
    bounds_max: &[f64],
    path: &Path,
    manifest: Option<&str>,
) -> Result<()> {
    let header = CheckpointHeader {
        net: params.cfg,
        seed: params.seed,
        bounds_min: bounds_min.to_vec(),
        bounds_max: bounds_max.to_vec(),
        manifest: manifest.map(str::to_string),
    };
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    for v in &params.fourier.data {
        w.write_all(&v.to_le_bytes())?;
    }
    for t in params.param_tensors() {
        for v in &t.data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub struct LoadedCheckpoint {
    pub params: MlpParams,
    pub bounds_min: Vec<f64>,
    pub bounds_max: Vec<f64>,
}

pub fn load_checkpoint(path: &Path) -> Result<LoadedCheckpoint> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header_line = String::new();
    r.read_line(&mut header_line)?;
    let header: CheckpointHeader =
        serde_json::from_str(header_line.trim()).map_err(|e| Error::Format(e.to_string()))?;
    if header.bounds_min.len() != header.net.dim || header.bounds_max.len() != header.net.dim {
        return Err(Error::Format("checkpoint bounds do not match dim".into()));
    }

    // Rebuild the shape skeleton, then overwrite every tensor from the blob.
    let mut params = init_network(header.seed, &header.net);
    let mut blob = Vec::new();
    r.read_to_end(&mut blob)?;
    let expected: usize = params.fourier.data.len()
        + params
            .param_tensors()
            .iter()
            .map(|t| t.data.len())
            .sum::<usize>();
    if blob.len() != expected * 8 {
        return Err(Error::Format(format!(
            "checkpoint blob holds {} bytes, expected {}",
            blob.len(),
            expected * 8
        )));
    }
    let mut values = blob
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    for v in params.fourier.data.iter_mut() {
        *v = values.next().expect("length checked");
    }
    for t in params.param_tensors_mut() {
        for v in t.data.iter_mut() {
            *v = values.next().expect("length checked");
        }
    }
    if params.fourier.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("checkpoint holds non-finite values".into()));
    }
    // Channel weights derive from the stored frequencies.
    params.fourier_weights = (0..params.cfg.fourier_bands)
        .map(|i| {
            let norm: f64 = params
                .fourier
                .row(i)
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            params.cfg.fourier_alpha * norm
        })
        .collect();
    Ok(LoadedCheckpoint {
        params,
        bounds_min: header.bounds_min,
        bounds_max: header.bounds_max,
    })
}
