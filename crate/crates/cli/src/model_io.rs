//! Model persistence: a single schema-versioned JSON document.
//!
//! Floats are written with serde_json's shortest-roundtrip formatting, so a
//! save/load cycle reproduces every f64 bit-exactly.

use std::path::Path;

use moat_core::domain::VarDomain;
use moat_core::model::{MarginalTable, MoatModel};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk model document. Edge weights and pairwise tables are stored in
/// row-major upper-triangular pair order; each pairwise table is row-major
/// `k_u x k_v` with rows indexed by the smaller variable.
#[derive(Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub cardinalities: Vec<usize>,
    pub edge_weights: Vec<f64>,
    pub univariate: Vec<Vec<f64>>,
    pub pairwise: Vec<Vec<f64>>,
}

impl ModelFile {
    pub fn from_model(model: &MoatModel) -> Self {
        let domain = model.domain();
        ModelFile {
            schema_version: SCHEMA_VERSION,
            cardinalities: domain.cardinalities().to_vec(),
            edge_weights: model.weights().to_vec(),
            univariate: (0..domain.n())
                .map(|v| model.table().univariate(v).to_vec())
                .collect(),
            pairwise: domain
                .pairs()
                .map(|(u, v)| model.table().pairwise(u, v).to_vec())
                .collect(),
        }
    }

    pub fn into_model(self) -> Result<MoatModel, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Data(format!(
                "unsupported model schema version {}",
                self.schema_version
            )));
        }
        let domain = VarDomain::new(self.cardinalities)?;
        let table = MarginalTable::new(domain, self.univariate, self.pairwise)?;
        Ok(MoatModel::new(self.edge_weights, table)?)
    }
}

pub fn save_model(path: &Path, model: &MoatModel) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &ModelFile::from_model(model))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<MoatModel, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let parsed: ModelFile = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parsed.into_model()
}
