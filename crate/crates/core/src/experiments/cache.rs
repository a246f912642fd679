use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use log::{debug, warn};
use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::local::DensityCache;

const HEADER: &str = "# hyperspike density cache v1";

/// Parsed cache contents: congruence counts `Φ_c(q)` and truncated
/// singular integrals `I⁺(c, W)`, keyed by form hash.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CacheRecords {
    pub phi: HashMap<(String, u64), BigUint>,
    /// Keyed by the bit pattern of `W`.
    pub integral: HashMap<(String, u64), f64>,
}

impl CacheRecords {
    pub fn len(&self) -> usize {
        self.phi.len() + self.integral.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn valid_hash(h: &str) -> bool {
    h.len() == 16 && h.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase())
}

/// Parse cache text. Records are
///
/// ```text
/// phi <hash> <q> <count>
/// ip <hash> <W> <value>
/// ```
///
/// A final line without a newline is an interrupted write and is dropped.
/// Two records for one key must agree.
pub fn parse_cache(text: &str) -> Result<CacheRecords> {
    let mut out = CacheRecords::default();
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    if complete.len() < text.len() {
        warn!("dropping unterminated trailing cache record");
    }
    for (idx, line) in complete.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| Error::Cache { line: line_no, msg };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, got {}", fields.len())));
        }
        let hash = fields[1];
        if !valid_hash(hash) {
            return Err(err(format!("bad form hash {hash:?}")));
        }
        match fields[0] {
            "phi" => {
                let q = fields[2]
                    .parse::<u64>()
                    .ok()
                    .filter(|&q| q >= 1)
                    .ok_or_else(|| err(format!("bad modulus {:?}", fields[2])))?;
                let count = BigUint::from_str(fields[3]).map_err(|_| err(format!("bad count {:?}", fields[3])))?;
                if let Some(prev) = out.phi.insert((hash.to_string(), q), count.clone()) {
                    if prev != count {
                        return Err(err(format!("conflicting counts for q = {q}")));
                    }
                }
            }
            "ip" => {
                let w = f64::from_str(fields[2])
                    .ok()
                    .filter(|w| w.is_finite() && *w > 0.0)
                    .ok_or_else(|| err(format!("bad cutoff {:?}", fields[2])))?;
                let v = f64::from_str(fields[3])
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("bad integral value {:?}", fields[3])))?;
                if let Some(prev) = out.integral.insert((hash.to_string(), w.to_bits()), v) {
                    if prev.to_bits() != v.to_bits() {
                        return Err(err(format!("conflicting integrals for W = {w}")));
                    }
                }
            }
            other => return Err(err(format!("unknown record kind {other:?}"))),
        }
    }
    Ok(out)
}

/// Append-only file cache shared by worker threads.
///
/// Each record is written by a single `write_all` under a lock, so a reader
/// only ever sees whole lines. Existing keys are never overwritten.
pub struct FileCache {
    path: PathBuf,
    records: Mutex<CacheRecords>,
    file: Mutex<File>,
}

impl FileCache {
    pub fn open(path: &Path) -> Result<Self> {
        let records = match std::fs::read_to_string(path) {
            Ok(text) => parse_cache(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => CacheRecords::default(),
            Err(e) => return Err(e.into()),
        };
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            file.write_all(format!("{HEADER}\n").as_bytes())?;
        } else if !std::fs::read(path)?.ends_with(b"\n") {
            // terminate an interrupted record so the next append starts a fresh line
            file.write_all(b"\n")?;
        }
        debug!("cache {} holds {} records", path.display(), records.len());
        Ok(Self {
            path: path.to_path_buf(),
            records: Mutex::new(records),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn append(&self, line: String) {
        let mut f = self.file.lock().expect("cache file lock");
        if let Err(e) = f.write_all(line.as_bytes()).and_then(|_| f.flush()) {
            warn!("cache write to {} failed: {e}", self.path.display());
        }
    }
}

impl DensityCache for FileCache {
    fn phi(&self, form: &str, q: u64) -> Option<BigUint> {
        self.records
            .lock()
            .expect("cache lock")
            .phi
            .get(&(form.to_string(), q))
            .cloned()
    }

    fn store_phi(&self, form: &str, q: u64, count: &BigUint) {
        let mut rec = self.records.lock().expect("cache lock");
        let key = (form.to_string(), q);
        if rec.phi.contains_key(&key) {
            return;
        }
        rec.phi.insert(key, count.clone());
        self.append(format!("phi {form} {q} {count}\n"));
    }

    fn integral(&self, form: &str, w: f64) -> Option<f64> {
        self.records
            .lock()
            .expect("cache lock")
            .integral
            .get(&(form.to_string(), w.to_bits()))
            .copied()
    }

    fn store_integral(&self, form: &str, w: f64, value: f64) {
        let mut rec = self.records.lock().expect("cache lock");
        let key = (form.to_string(), w.to_bits());
        if rec.integral.contains_key(&key) {
            return;
        }
        rec.integral.insert(key, value);
        // `{}` on f64 prints the shortest string that parses back to the same bits
        self.append(format!("ip {form} {w} {value}\n"));
    }
}
