//! On-disk JSON-lines caches for enumerated subspaces and pair catalogs.
//!
//! Each file starts with a header line; every following line is one record.
//! Files are written to a temporary name and renamed into place.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::Form;
use crate::linalg::Vector;
use crate::polar::{PolarSpace, PolarSpaceDescriptor};

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "POLAR_EIG_CACHE";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed cache file {path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
struct SubspaceHeader {
    descriptor: PolarSpaceDescriptor,
    modulus: Vec<u32>,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CacheError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| CacheError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Cache { dir })
    }

    /// Cache rooted at `$POLAR_EIG_CACHE`, if set.
    pub fn from_env() -> Result<Option<Self>, CacheError> {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) if !dir.is_empty() => Cache::new(PathBuf::from(dir)).map(Some),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn subspace_path(&self, form: &Form) -> PathBuf {
        let modulus: Vec<String> = form
            .field()
            .modulus()
            .iter()
            .map(|c| c.to_string())
            .collect();
        self.dir.join(format!(
            "subspaces_{}_{}_{}_m{}.jsonl",
            form.family().short_name(),
            form.dim(),
            form.q(),
            modulus.join("-")
        ))
    }

    pub(crate) fn load_subspaces(&self, form: &Form) -> Result<Option<Vec<Vec<Vector>>>, CacheError> {
        let path = self.subspace_path(form);
        let Some((header, rows)) = self.read_lines::<SubspaceHeader, Vec<Vec<Vec<u32>>>>(&path)?
        else {
            return Ok(None);
        };
        let f = form.field();
        let malformed = |message: String| CacheError::Malformed {
            path: path.clone(),
            message,
        };
        if header.modulus != f.modulus()
            || header.descriptor.family != form.family()
            || header.descriptor.dim != form.dim()
        {
            return Err(malformed("header does not match the requested form".into()));
        }
        rows.into_iter()
            .map(|matrix| {
                matrix
                    .into_iter()
                    .map(|row| {
                        row.iter()
                            .map(|c| f.from_coeffs(c))
                            .collect::<Result<Vec<_>, _>>()
                            .map(Vector)
                            .map_err(|e| malformed(e.to_string()))
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub(crate) fn store_subspaces(&self, space: &PolarSpace) -> Result<(), CacheError> {
        let f = space.field();
        let header = SubspaceHeader {
            descriptor: space.descriptor().clone(),
            modulus: f.modulus().to_vec(),
        };
        let mut rows = Vec::new();
        for d in 0..space.rank() as isize {
            for s in space.singular_subspaces(d).expect("d < rank") {
                let matrix: Vec<Vec<Vec<u32>>> = s
                    .basis()
                    .iter()
                    .map(|v| v.0.iter().map(|&e| f.coeffs(e)).collect())
                    .collect();
                rows.push(matrix);
            }
        }
        self.write_lines(&self.subspace_path(space.form()), &header, &rows)
    }

    /// Reads a header line plus records, or `None` if the file does not exist.
    pub fn read_lines<H: DeserializeOwned, R: DeserializeOwned>(
        &self,
        path: &Path,
    ) -> Result<Option<(H, Vec<R>)>, CacheError> {
        let file = match fs::File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(source) => {
                return Err(CacheError::Io {
                    path: path.to_path_buf(),
                    source,
                })
            }
        };
        let malformed = |message: String| CacheError::Malformed {
            path: path.to_path_buf(),
            message,
        };
        let mut lines = BufReader::new(file).lines();
        let header_line = lines
            .next()
            .ok_or_else(|| malformed("empty file".into()))?
            .map_err(|source| CacheError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        let header: H = serde_json::from_str(&header_line).map_err(|e| malformed(e.to_string()))?;
        let mut records = Vec::new();
        for line in lines {
            let line = line.map_err(|source| CacheError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            records.push(serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?);
        }
        Ok(Some((header, records)))
    }

    pub fn write_lines<H: Serialize, R: Serialize>(
        &self,
        path: &Path,
        header: &H,
        records: &[R],
    ) -> Result<(), CacheError> {
        let io_err = |source| CacheError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut buf = serde_json::to_string(header).expect("header serializes");
        buf.push('\n');
        for r in records {
            buf.push_str(&serde_json::to_string(r).expect("record serializes"));
            buf.push('\n');
        }
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let mut file = fs::File::create(&tmp).map_err(io_err)?;
        file.write_all(buf.as_bytes()).map_err(io_err)?;
        drop(file);
        fs::rename(&tmp, path).map_err(io_err)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}
