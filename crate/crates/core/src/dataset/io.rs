//! On-disk dataset format and CSV import.
//!
//! A saved dataset is a directory holding
//!
//! * `fields.csv`: one row per field, header [`METADATA_HEADER`]; reals are
//!   written in shortest round-trip form so they reload bit-exactly,
//! * `coefficients.qcf`: magic `QCF1`, little-endian `u32` record count,
//!   little-endian `u32` bound `N`, then `count * N` bytes row-major,
//! * `dataset.json`: format version, provenance and SHA-256 digests of the
//!   two data files.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ramified_slots, Dataset, FieldRecord, Provenance};
use crate::arithmetic::{is_prime, CoefficientSieve, FundamentalDiscriminant};
use crate::error::{Error, Result};
use crate::invariants::{partial_sums_from, unit_norm};

pub const FORMAT_VERSION: u32 = 1;

pub const METADATA_HEADER: [&str; 12] = [
    "d", "D", "h", "h_plus", "R", "n_d", "p1", "p2", "p3", "S_zeta", "S_chi", "unit_norm",
];

const FIELDS_FILE: &str = "fields.csv";
const COEFFICIENTS_FILE: &str = "coefficients.qcf";
const MANIFEST_FILE: &str = "dataset.json";
const MAGIC: &[u8; 4] = b"QCF1";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    records: usize,
    bound: usize,
    provenance: Provenance,
    fields_sha256: String,
    coefficients_sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn encode_coefficients(ds: &Dataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + ds.coefficient_matrix().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(ds.len() as u32).to_le_bytes());
    out.extend_from_slice(&(ds.bound() as u32).to_le_bytes());
    out.extend_from_slice(ds.coefficient_matrix());
    out
}

pub(crate) fn decode_coefficients(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(Error::CorruptCoefficients("missing QCF1 header".into()));
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let bound = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != count * bound {
        return Err(Error::CorruptCoefficients(format!(
            "expected {} coefficient bytes, found {}",
            count * bound,
            body.len()
        )));
    }
    Ok((count, bound, body.to_vec()))
}

fn encode_fields(ds: &Dataset) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if ds.is_empty() {
        writer.write_record(METADATA_HEADER)?;
    }
    for r in ds.records() {
        writer.serialize(r)?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes `ds` into the directory `dir` (created if missing).
pub fn save(ds: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let fields = encode_fields(ds)?;
    let coefficients = encode_coefficients(ds);
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        records: ds.len(),
        bound: ds.bound(),
        provenance: ds.provenance().clone(),
        fields_sha256: sha256_hex(&fields),
        coefficients_sha256: sha256_hex(&coefficients),
    };
    fs::write(dir.join(FIELDS_FILE), fields)?;
    fs::write(dir.join(COEFFICIENTS_FILE), coefficients)?;
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(())
}

fn read_checked(path: PathBuf, expected: &str) -> Result<Vec<u8>> {
    let bytes = fs::read(&path)?;
    if sha256_hex(&bytes) != expected {
        return Err(Error::Checksum { path });
    }
    Ok(bytes)
}

pub fn load(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: manifest.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let fields = read_checked(dir.join(FIELDS_FILE), &manifest.fields_sha256)?;
    let coefficients = read_checked(dir.join(COEFFICIENTS_FILE), &manifest.coefficients_sha256)?;

    let mut reader = csv::Reader::from_reader(fields.as_slice());
    let records: Vec<FieldRecord> = reader.deserialize().collect::<std::result::Result<_, _>>()?;
    let (count, bound, matrix) = decode_coefficients(&coefficients)?;
    if count != records.len() || count != manifest.records || bound != manifest.bound {
        return Err(Error::CorruptCoefficients(format!(
            "{} metadata rows, {count} coefficient rows, manifest says {}",
            records.len(),
            manifest.records
        )));
    }
    if records.windows(2).any(|w| w[0].d >= w[1].d) {
        return Err(Error::CorruptCoefficients("rows not strictly sorted by d".into()));
    }
    Ok(Dataset::from_parts(records, matrix, bound, manifest.provenance))
}

/// Parsed value of an optional column.
fn column<'r>(
    index: &HashMap<String, usize>,
    row: &'r csv::StringRecord,
    name: &str,
) -> Option<&'r str> {
    index.get(name).and_then(|&i| row.get(i)).map(str::trim).filter(|s| !s.is_empty())
}

fn parse<T: std::str::FromStr>(raw: &str, name: &str, line: u64) -> Result<T> {
    raw.parse().map_err(|_| Error::MalformedRow {
        line,
        message: format!("cannot parse `{raw}` as {name}"),
    })
}

fn invalid(line: u64, field: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

/// Imports a CSV with at least the columns `D` (or `d`), `h` and `R`, as
/// exported from the LMFDB. Missing invariants are computed; any optional
/// column that is present (`d`, `h_plus`, `n_d`, `p1..p3`, `unit_norm`,
/// `S_zeta`, `S_chi`, and coefficient columns `a<n>`) is checked against the
/// recomputed value, and every supplied prime-index coefficient is verified.
pub fn import_csv(path: impl AsRef<Path>, bound: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let index: HashMap<String, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim().to_string(), i))
        .collect();
    for required in ["h", "R"] {
        if !index.contains_key(required) {
            return Err(Error::MalformedRow {
                line: 1,
                message: format!("missing required column `{required}`"),
            });
        }
    }
    if !index.contains_key("D") && !index.contains_key("d") {
        return Err(Error::MalformedRow {
            line: 1,
            message: "missing column `D` (or `d`)".into(),
        });
    }
    let coefficient_columns: Vec<(usize, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| {
            let n: usize = h.trim().strip_prefix('a')?.parse().ok()?;
            (n >= 1 && n <= bound).then_some((i, n))
        })
        .collect();

    let sieve = CoefficientSieve::new(bound);
    let mut rows = Vec::new();
    for result in reader.records() {
        let row = result?;
        let line = row.position().map_or(0, |p| p.line());
        let disc = match (column(&index, &row, "d"), column(&index, &row, "D")) {
            (Some(d), big_d) => {
                let d: u64 = parse(d, "d", line)?;
                let fd = FundamentalDiscriminant::new(d)
                    .map_err(|e| invalid(line, "d", e.to_string()))?;
                if let Some(big_d) = big_d {
                    let big_d: u64 = parse(big_d, "D", line)?;
                    if big_d != fd.value() {
                        return Err(invalid(line, "D", format!("expected {} for d = {d}", fd.value())));
                    }
                }
                fd
            }
            (None, Some(big_d)) => {
                let big_d: u64 = parse(big_d, "D", line)?;
                FundamentalDiscriminant::from_discriminant(big_d)
                    .map_err(|e| invalid(line, "D", e.to_string()))?
            }
            (None, None) => {
                return Err(Error::MalformedRow {
                    line,
                    message: "empty discriminant".into(),
                })
            }
        };
        let h: u32 = parse(column(&index, &row, "h").unwrap_or(""), "h", line)?;
        if h == 0 {
            return Err(invalid(line, "h", "class number must be positive"));
        }
        let regulator: f64 = parse(column(&index, &row, "R").unwrap_or(""), "R", line)?;
        if !(regulator > 0.0 && regulator.is_finite()) {
            return Err(invalid(line, "R", "regulator must be positive"));
        }
        let norm = unit_norm(disc.d()).expect("validated discriminant");
        let h_plus = if norm == -1 { h } else { 2 * h };
        let (n_d, slots) = ramified_slots(&disc).map_err(|e| invalid(line, "n_d", e.to_string()))?;
        let (coefficients, chi) = sieve.coefficients_and_characters(&disc);
        let (s_zeta, s_chi) = partial_sums_from(coefficients.as_slice(), &chi);

        let expect_int = |name: &str, expected: i64| -> Result<()> {
            if let Some(raw) = column(&index, &row, name) {
                let got: i64 = parse(raw, name, line)?;
                if got != expected {
                    return Err(invalid(line, name, format!("found {got}, recomputed {expected}")));
                }
            }
            Ok(())
        };
        expect_int("h_plus", h_plus as i64)?;
        expect_int("unit_norm", norm as i64)?;
        expect_int("n_d", n_d as i64)?;
        for (slot, name) in slots.iter().zip(["p1", "p2", "p3"]) {
            expect_int(name, *slot as i64)?;
        }
        for (name, expected) in [("S_zeta", s_zeta), ("S_chi", s_chi)] {
            if let Some(raw) = column(&index, &row, name) {
                let got: f64 = parse(raw, name, line)?;
                if (got - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                    return Err(invalid(line, name, format!("found {got}, recomputed {expected}")));
                }
            }
        }
        for &(col, n) in &coefficient_columns {
            if !is_prime(n as u64) {
                continue;
            }
            if let Some(raw) = row.get(col).map(str::trim).filter(|s| !s.is_empty()) {
                let got: u8 = parse(raw, &format!("a{n}"), line)?;
                let expected = coefficients.get(n);
                if got != expected {
                    return Err(invalid(
                        line,
                        &format!("a{n}"),
                        format!("found {got}, but D = {} gives {expected}", disc.value()),
                    ));
                }
            }
        }

        let record = FieldRecord {
            d: disc.d(),
            disc: disc.value(),
            h,
            h_plus,
            regulator,
            n_d,
            p1: slots[0],
            p2: slots[1],
            p3: slots[2],
            s_zeta,
            s_chi,
            unit_norm: norm,
        };
        rows.push((record, coefficients.into_values()));
    }
    Dataset::new(
        rows,
        bound,
        Provenance::Imported {
            source: path.display().to_string(),
        },
    )
}
