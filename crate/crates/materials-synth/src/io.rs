use crate::{Dataset, DatasetSpec, MaterialCategory, MaterialSample};
use mueller_core::MuellerMatrix;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Companion file describing how a dataset was generated and split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub materials_per_category: u32,
    pub samples_per_material: u32,
    pub split: SplitIds,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitIds {
    pub train: Vec<u32>,
    pub test: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct Record {
    material_id: u32,
    category: MaterialCategory,
    mueller: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse failure at line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
    #[error("record at line {0} does not hold 16 matrix entries")]
    BadRecord(usize),
}

/// Writes `dataset.jsonl` (one record per sample) and `manifest.json`
/// into `dir`.
pub fn write_dataset(dir: &Path, dataset: &Dataset, spec: &DatasetSpec) -> Result<(), IoError> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join("dataset.jsonl"))?);
    for s in &dataset.samples {
        let rec = Record {
            material_id: s.material_id,
            category: s.category,
            mueller: s.mueller.flatten().to_vec(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    let manifest = Manifest {
        seed: spec.seed,
        materials_per_category: spec.materials_per_category,
        samples_per_material: spec.samples_per_material,
        split: SplitIds {
            train: dataset.train_ids.clone(),
            test: dataset.test_ids.clone(),
        },
    };
    let mut w = BufWriter::new(File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Reads a dataset directory written by [`write_dataset`]. Measured
/// (non-synthetic) data can be imported through the same schema.
pub fn read_dataset(dir: &Path) -> Result<(Dataset, Manifest), IoError> {
    let manifest: Manifest =
        serde_json::from_reader(BufReader::new(File::open(dir.join("manifest.json"))?))?;
    let reader = BufReader::new(File::open(dir.join("dataset.jsonl"))?);
    let mut samples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record =
            serde_json::from_str(&line).map_err(|source| IoError::Parse { line: i + 1, source })?;
        if rec.mueller.len() != 16 {
            return Err(IoError::BadRecord(i + 1));
        }
        samples.push(MaterialSample {
            mueller: MuellerMatrix::from_flat(&rec.mueller),
            category: rec.category,
            material_id: rec.material_id,
        });
    }
    let dataset = Dataset {
        samples,
        train_ids: manifest.split.train.clone(),
        test_ids: manifest.split.test.clone(),
    };
    Ok((dataset, manifest))
}
