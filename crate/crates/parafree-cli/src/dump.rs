use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use parafree_core::geometry::{GridSpec, ScalarField};
use parafree_core::solver::InstanceDescriptor;

/// JSON sidecar of a field dump: grid, storage plan, provenance, checksum.
#[derive(Debug, Serialize, Deserialize)]
pub struct DumpHeader {
    pub version: u32,
    pub dim: usize,
    pub half_width: f64,
    pub nodes: usize,
    pub t_start: f64,
    pub time_steps: usize,
    pub even_xn: bool,
    pub stored_levels: Vec<usize>,
    pub instance: InstanceDescriptor,
    pub data_file: String,
    pub checksum_sha256: String,
    pub worst_residual: f64,
    pub total_inner_iterations: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn field_bytes(field: &ScalarField) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(field.raw_data().len() * 8);
    for v in field.raw_data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

/// Write `field.bin` (raw little-endian f64, row-major per stored level)
/// plus the `field.json` sidecar. Returns the data checksum.
pub fn write_dump(
    dir: &Path,
    field: &ScalarField,
    instance: &InstanceDescriptor,
    worst_residual: f64,
    total_inner_iterations: usize,
) -> Result<String> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output dir {}", dir.display()))?;
    let bytes = field_bytes(field);
    let checksum = sha256_hex(&bytes);
    let g = field.grid();
    let header = DumpHeader {
        version: 1,
        dim: g.dim,
        half_width: g.half_width,
        nodes: g.nodes,
        t_start: g.t_start,
        time_steps: g.time_steps,
        even_xn: field.even_xn(),
        stored_levels: field.stored_levels().to_vec(),
        instance: instance.clone(),
        data_file: "field.bin".into(),
        checksum_sha256: checksum.clone(),
        worst_residual,
        total_inner_iterations,
    };
    let mut f = std::fs::File::create(dir.join("field.bin"))?;
    f.write_all(&bytes)?;
    let json = serde_json::to_string_pretty(&header)?;
    std::fs::write(dir.join("field.json"), json)?;
    Ok(checksum)
}

/// Reload a dump bit-exactly; verifies the checksum.
pub fn read_dump(dir: &Path) -> Result<(ScalarField, DumpHeader)> {
    let header_text = std::fs::read_to_string(dir.join("field.json"))
        .with_context(|| format!("no field.json under {}", dir.display()))?;
    let header: DumpHeader = serde_json::from_str(&header_text)?;
    let mut bytes = Vec::new();
    std::fs::File::open(dir.join(&header.data_file))?.read_to_end(&mut bytes)?;
    if sha256_hex(&bytes) != header.checksum_sha256 {
        bail!("dump checksum mismatch under {}", dir.display());
    }
    if bytes.len() % 8 != 0 {
        bail!("dump length {} not a multiple of 8", bytes.len());
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let grid = GridSpec::new(
        header.dim,
        header.half_width,
        header.nodes,
        header.t_start,
        header.time_steps,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let field = ScalarField::from_slices(grid, header.even_xn, header.stored_levels.clone(), data)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok((field, header))
}
