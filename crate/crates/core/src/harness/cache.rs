//! Binary matrix cache.
//!
//! Layout, little-endian: `"IQMP"`, format version `u16`, `n_q u8`,
//! `variant u8`, alpha flag `u8` followed by `a, b` as `u64` (flag 0) or the
//! value as `f64` (flag 1), `seed u64`, then `N²` entries row-major as
//! `(re, im)` `f64` pairs. Files are named by the SHA-256 of the spec's
//! canonical encoding and the realization index.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::isrm::realization_unitary;
use crate::linalg::{ComplexMatrix, Representation, C64};
use crate::map_operator::build_unitary_capped;
use crate::params::{Alpha, MapSpec, Variant};

pub const MAGIC: &[u8; 4] = b"IQMP";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
}

/// Header fields as stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheHeader {
    pub n_qubits: u8,
    pub variant: Variant,
    pub alpha: Alpha,
    pub seed: u64,
}

impl CacheHeader {
    pub fn of(spec: &MapSpec) -> Self {
        CacheHeader {
            n_qubits: spec.n_qubits as u8,
            variant: spec.variant,
            alpha: spec.alpha,
            seed: if spec.variant.is_isrm() { spec.seed } else { 0 },
        }
    }
}

pub fn cache_key(spec: &MapSpec, realization: u64) -> String {
    let mut h = Sha256::new();
    h.update(spec.canonical_encoding());
    h.update(realization.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cache_path(dir: &Path, spec: &MapSpec, realization: u64) -> PathBuf {
    dir.join(format!("{}.iqmp", cache_key(spec, realization)))
}

pub fn encode(header: &CacheHeader, m: &ComplexMatrix) -> Vec<u8> {
    let n = m.dim();
    let mut out = Vec::with_capacity(40 + 16 * n * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(header.n_qubits);
    out.push(header.variant.code());
    match header.alpha {
        Alpha::Rational { num, den } => {
            out.push(0);
            out.extend_from_slice(&num.to_le_bytes());
            out.extend_from_slice(&den.to_le_bytes());
        }
        Alpha::Real(x) => {
            out.push(1);
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out.extend_from_slice(&header.seed.to_le_bytes());
    for z in m.to_row_major() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Cache {
            path: self.path.to_path_buf(),
            message: message.into(),
        }
    }

    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        let end = self.pos + K;
        if end > self.data.len() {
            return Err(self.err("truncated file"));
        }
        let mut b = [0u8; K];
        b.copy_from_slice(&self.data[self.pos..end]);
        self.pos = end;
        Ok(b)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode(data: &[u8], path: &Path) -> Result<(CacheHeader, ComplexMatrix)> {
    let mut r = Reader { data, pos: 0, path };
    if &r.take::<4>()? != MAGIC {
        return Err(r.err("bad magic"));
    }
    let version = u16::from_le_bytes(r.take()?);
    if version != FORMAT_VERSION {
        return Err(r.err(format!("format version {version}, expected {FORMAT_VERSION}")));
    }
    let [n_qubits] = r.take::<1>()?;
    let [code] = r.take::<1>()?;
    let variant = Variant::from_code(code).ok_or_else(|| r.err(format!("unknown variant code {code}")))?;
    let [flag] = r.take::<1>()?;
    let alpha = match flag {
        0 => {
            let (a, b) = (r.u64()?, r.u64()?);
            Alpha::rational(a, b).map_err(|e| r.err(e.to_string()))?
        }
        1 => Alpha::real(r.f64()?).map_err(|e| r.err(e.to_string()))?,
        other => return Err(r.err(format!("unknown alpha flag {other}"))),
    };
    let seed = r.u64()?;
    if n_qubits > 30 {
        return Err(r.err(format!("implausible register size {n_qubits}")));
    }
    let n = 1usize << n_qubits;
    if data.len() - r.pos != 16 * n * n {
        return Err(r.err(format!(
            "payload has {} bytes, expected {}",
            data.len() - r.pos,
            16 * n * n
        )));
    }
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        entries.push(C64::new(r.f64()?, r.f64()?));
    }
    let m = ComplexMatrix::from_row_major(n, &entries, Representation::Momentum)?;
    Ok((
        CacheHeader {
            n_qubits,
            variant,
            alpha,
            seed,
        },
        m,
    ))
}

pub fn save_matrix(path: &Path, header: &CacheHeader, m: &ComplexMatrix) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, encode(header, m))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_matrix(path: &Path) -> Result<(CacheHeader, ComplexMatrix)> {
    let data = fs::read(path)?;
    decode(&data, path)
}

/// Matrix of `spec` (realization `realization` for ISRM variants).
pub fn build_spec_matrix(spec: &MapSpec, realization: u64, dense_cap: u32) -> Result<ComplexMatrix> {
    match spec.variant {
        Variant::Deterministic => build_unitary_capped(spec, dense_cap),
        _ => realization_unitary(spec, realization),
    }
}

/// Load from `dir` if present and consistent, otherwise build and store.
pub fn cache_matrix(
    dir: &Path,
    spec: &MapSpec,
    realization: u64,
    dense_cap: u32,
) -> Result<(ComplexMatrix, CacheStatus)> {
    let path = cache_path(dir, spec, realization);
    if path.exists() {
        match load_matrix(&path) {
            Ok((h, m)) if h == CacheHeader::of(spec) => {
                log::info!("cache hit {}", path.display());
                return Ok((m, CacheStatus::Hit));
            }
            Ok(_) => log::warn!("cache header mismatch in {}, rebuilding", path.display()),
            Err(e) => log::warn!("{e}; rebuilding"),
        }
    }
    let m = build_spec_matrix(spec, realization, dense_cap)?;
    save_matrix(&path, &CacheHeader::of(spec), &m)?;
    log::info!("cache miss {}", path.display());
    Ok((m, CacheStatus::Miss))
}
