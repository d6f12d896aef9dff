//! Canonical JSON system format.
//!
//! Documents serialize with fixed field order and shortest round-trip
//! decimal floats, so `load` followed by `save` is byte-identical for any
//! file this tool produced.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numkit::ComplexMatrix;
use crate::systems::PassiveSystem;

use super::CliError;

pub const FORMAT_VERSION: &str = "1";

/// On-disk form of a passive system: complex entries as [re, im] pairs in
/// row-major order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemDocument {
    pub format_version: String,
    pub dim_input: usize,
    pub dim_state: usize,
    pub selfadjoint: bool,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl SystemDocument {
    pub fn from_system(sys: &PassiveSystem) -> Self {
        let t = sys.matrix();
        let matrix = (0..t.rows())
            .map(|i| {
                (0..t.cols())
                    .map(|j| {
                        let z = t[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION.to_string(),
            dim_input: sys.dim_input(),
            dim_state: sys.dim_state(),
            selfadjoint: sys.is_selfadjoint(),
            matrix,
        }
    }

    pub fn to_system(&self) -> Result<PassiveSystem, CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Invalid(format!(
                "unsupported format_version {:?}",
                self.format_version
            )));
        }
        let dim = self.dim_input + self.dim_state;
        if self.matrix.len() != dim {
            return Err(CliError::Invalid(format!(
                "matrix has {} rows, expected {}",
                self.matrix.len(),
                dim
            )));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != dim {
                return Err(CliError::Invalid(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    dim
                )));
            }
            for &[re, im] in row {
                entries.push(Complex64::new(re, im));
            }
        }
        let t = ComplexMatrix::new(dim, dim, entries).map_err(CliError::Math)?;
        PassiveSystem::validate(t, self.dim_input, self.selfadjoint).map_err(CliError::Math)
    }

    /// Canonical bytes: pretty JSON with a trailing newline.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("document serializes");
        bytes.push(b'\n');
        bytes
    }
}

pub fn load_document(path: &Path) -> Result<SystemDocument, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_system(path: &Path) -> Result<PassiveSystem, CliError> {
    load_document(path)?.to_system()
}

pub fn save_system(sys: &PassiveSystem, path: &Path) -> Result<(), CliError> {
    let doc = SystemDocument::from_system(sys);
    std::fs::write(path, doc.canonical_bytes()).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
