//! JSON file formats.
//!
//! A complex `d × d` matrix is a list of `d` rows, each a list of `d`
//! `[re, im]` pairs. Numbers are written in shortest round-trip form, so a
//! parse of a written file reproduces every `f64` exactly.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bases::{make_partition, OperatorBasis, Partition};
use crate::error::{PovmError, Result};
use crate::herm::{CMatrix, HermitianOperator};
use crate::model::{povm_params, NmPovm};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn encode_matrix(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

pub fn decode_matrix(rows: &MatrixJson) -> Result<CMatrix> {
    let d = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(PovmError::Dimension {
            expected: d,
            found: bad.len(),
        });
    }
    Ok(CMatrix::from_fn(d, d, |r, c| {
        Complex64::new(rows[r][c][0], rows[r][c][1])
    }))
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        encode_matrix(self.matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = MatrixJson::deserialize(de)?;
        let m = decode_matrix(&rows).map_err(D::Error::custom)?;
        HermitianOperator::new(m).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
pub struct BasisFile {
    pub d: usize,
    pub elements: Vec<HermitianOperator>,
}

#[derive(Serialize, Deserialize)]
pub struct PartitionFile {
    pub d: usize,
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
pub struct PovmFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub x: f64,
    pub elements: Vec<HermitianOperator>,
}

fn check_dims(d: usize, elements: &[HermitianOperator]) -> Result<()> {
    match elements.iter().find(|e| e.dim() != d) {
        Some(e) => Err(PovmError::Dimension {
            expected: d,
            found: e.dim(),
        }),
        None => Ok(()),
    }
}

impl BasisFile {
    pub fn into_basis(self) -> Result<OperatorBasis> {
        check_dims(self.d, &self.elements)?;
        OperatorBasis::new(self.elements)
    }
}

impl From<&OperatorBasis> for BasisFile {
    fn from(b: &OperatorBasis) -> Self {
        Self {
            d: b.dim(),
            elements: b.elements().to_vec(),
        }
    }
}

impl PartitionFile {
    pub fn into_partition(self) -> Result<Partition> {
        let n = self.blocks.len();
        let m = self.blocks.first().map_or(1, |b| b.len()) + 1;
        make_partition(self.d, n, m, Some(self.blocks))
    }
}

impl From<&Partition> for PartitionFile {
    fn from(p: &Partition) -> Self {
        Self {
            d: p.dim(),
            blocks: p.blocks().to_vec(),
        }
    }
}

impl PovmFile {
    pub fn into_povm(self) -> Result<NmPovm> {
        check_dims(self.d, &self.elements)?;
        NmPovm::new(povm_params(self.d, self.n, self.m, self.x)?, self.elements)
    }
}

impl From<&NmPovm> for PovmFile {
    fn from(p: &NmPovm) -> Self {
        let q = p.params();
        Self {
            d: q.d,
            n: q.n,
            m: q.m,
            x: q.x,
            elements: p.elements().to_vec(),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string(value)? + "\n")?;
    Ok(())
}

pub fn read_basis(path: &Path) -> Result<OperatorBasis> {
    read_json::<BasisFile>(path)?.into_basis()
}

pub fn write_basis(path: &Path, b: &OperatorBasis) -> Result<()> {
    write_json(path, &BasisFile::from(b))
}

pub fn read_partition(path: &Path) -> Result<Partition> {
    read_json::<PartitionFile>(path)?.into_partition()
}

pub fn write_partition(path: &Path, p: &Partition) -> Result<()> {
    write_json(path, &PartitionFile::from(p))
}

pub fn read_povm(path: &Path) -> Result<NmPovm> {
    read_json::<PovmFile>(path)?.into_povm()
}

pub fn write_povm(path: &Path, p: &NmPovm) -> Result<()> {
    write_json(path, &PovmFile::from(p))
}
