//! CSV ingestion, model artifacts and the synthetic flow generator.

pub mod artifact;
pub mod csv;
pub mod synth;

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::preprocess::FlowDataset;

pub use self::artifact::{load_model, save_model, ModelArtifact, TrainingMeta, FORMAT_VERSION};
pub use self::csv::{
    load_csv, load_csv_with_layout, match_header, write_csv, ColumnKind, CsvSchema, InputColumn, InputLayout,
    LayoutRecords, LoadedCsv,
};
pub use self::synth::{generate_synthetic, AttackCategory, SyntheticFlows, SyntheticSpec};

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// SHA-256 over the dimensions, every feature's little-endian bits and every
/// label, as lowercase hex.
pub fn dataset_fingerprint(data: &FlowDataset) -> String {
    let mut h = Sha256::new();
    h.update((data.n_rows() as u64).to_le_bytes());
    h.update((data.n_features() as u64).to_le_bytes());
    for i in 0..data.n_rows() {
        for v in data.features().row(i) {
            h.update(v.to_le_bytes());
        }
        h.update([data.labels()[i]]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
