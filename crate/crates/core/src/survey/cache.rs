//! Append-only text cache of class polynomials keyed by discriminant.
//!
//! One record per line: `Δ<TAB>degree<TAB>c0,c1,…,1<TAB>crc32`, the checksum taken
//! over everything before the last TAB. Lines that fail to parse or check are skipped
//! and the polynomial is recomputed on demand.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rug::Integer;

use crate::class_polynomial::{class_polynomial, IntegerPolynomial};
use crate::error::{Error, Result};

pub fn encode_record(disc: i64, poly: &IntegerPolynomial) -> String {
    let coeffs: Vec<String> = poly.coeffs().iter().map(|c| c.to_string()).collect();
    let prefix = format!("{disc}\t{}\t{}", poly.degree(), coeffs.join(","));
    let crc = crc32fast::hash(prefix.as_bytes());
    format!("{prefix}\t{crc:08x}")
}

/// `None` for anything malformed, including a checksum or degree mismatch.
pub fn decode_record(line: &str) -> Option<(i64, IntegerPolynomial)> {
    let (prefix, crc) = line.rsplit_once('\t')?;
    if u32::from_str_radix(crc, 16).ok()? != crc32fast::hash(prefix.as_bytes()) || crc.len() != 8 {
        return None;
    }
    let mut fields = prefix.split('\t');
    let disc: i64 = fields.next()?.parse().ok()?;
    let degree: usize = fields.next()?.parse().ok()?;
    let coeffs: Vec<Integer> = fields.next()?.split(',').map(|c| c.parse().ok()).collect::<Option<_>>()?;
    if fields.next().is_some() || coeffs.len() != degree + 1 {
        return None;
    }
    let poly = IntegerPolynomial::from_coeffs(coeffs).ok()?;
    Some((disc, poly))
}

pub struct PolyCache {
    mem: Mutex<HashMap<i64, Arc<IntegerPolynomial>>>,
    writer: Option<Mutex<BufWriter<File>>>,
    path: Option<PathBuf>,
    skipped: usize,
}

impl PolyCache {
    pub fn in_memory() -> Self {
        Self { mem: Mutex::new(HashMap::new()), writer: None, path: None, skipped: 0 }
    }

    /// Loads every valid record of `path` (created if absent) and appends new ones to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut mem = HashMap::new();
        let mut skipped = 0;
        if path.exists() {
            for line in BufReader::new(File::open(&path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match decode_record(&line) {
                    Some((disc, poly)) => {
                        mem.insert(disc, Arc::new(poly));
                    }
                    None => skipped += 1,
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            mem: Mutex::new(mem),
            writer: Some(Mutex::new(BufWriter::new(file))),
            path: Some(path),
            skipped,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Lines rejected while opening.
    pub fn skipped_lines(&self) -> usize {
        self.skipped
    }

    pub fn len(&self) -> usize {
        self.mem.lock().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn load(&self, disc: i64) -> Option<Arc<IntegerPolynomial>> {
        self.mem.lock().expect("cache poisoned").get(&disc).cloned()
    }

    pub fn store(&self, disc: i64, poly: IntegerPolynomial) -> Result<Arc<IntegerPolynomial>> {
        let poly = Arc::new(poly);
        let fresh = self.mem.lock().expect("cache poisoned").insert(disc, poly.clone()).is_none();
        if let (true, Some(w)) = (fresh, &self.writer) {
            let mut w = w.lock().map_err(|_| Error::Inconsistent("cache writer poisoned".into()))?;
            writeln!(w, "{}", encode_record(disc, &poly))?;
        }
        Ok(poly)
    }

    pub fn get_or_compute(&self, disc: i64) -> Result<Arc<IntegerPolynomial>> {
        if let Some(p) = self.load(disc) {
            return Ok(p);
        }
        self.store(disc, class_polynomial(disc)?)
    }

    pub fn flush(&self) -> Result<()> {
        if let Some(w) = &self.writer {
            w.lock().map_err(|_| Error::Inconsistent("cache writer poisoned".into()))?.flush()?;
        }
        Ok(())
    }
}

impl Drop for PolyCache {
    fn drop(&mut self) {
        let _ = self.flush();
    }
}
