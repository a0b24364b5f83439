//! Versioned text checkpoint: a key -> array map plus string metadata.
//!
//! ```text
//! FREQGAN-CHECKPOINT 1
//! meta <key> <value to end of line>
//! array <key> <rank> <dim> ... <dim>
//! <values separated by single spaces>
//! end
//! ```
//!
//! Keys contain no whitespace. Values use Rust's shortest round-trip float
//! formatting, so a reload is bit-exact. Entries are written in key order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{NnError, Result};

pub const MAGIC: &str = "FREQGAN-CHECKPOINT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checkpoint {
    meta: BTreeMap<String, String>,
    arrays: BTreeMap<String, (Vec<usize>, Vec<f64>)>,
}

impl Checkpoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.meta.insert(key.into(), value.into());
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }

    pub fn insert(&mut self, key: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        self.arrays.insert(key.into(), (shape, data));
    }

    pub fn get(&self, key: &str) -> Option<(&[usize], &[f64])> {
        self.arrays
            .get(key)
            .map(|(s, d)| (s.as_slice(), d.as_slice()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.arrays.keys().map(String::as_str)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC} {FORMAT_VERSION}\n");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "meta {k} {v}");
        }
        for (k, (shape, data)) in &self.arrays {
            let _ = write!(out, "array {k} {}", shape.len());
            for d in shape {
                let _ = write!(out, " {d}");
            }
            out.push('\n');
            let mut first = true;
            for v in data {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{v:?}");
            }
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| NnError::Checkpoint(msg);
        let mut lines = text.lines();
        match lines
            .next()
            .map(|l| l.split_whitespace().collect::<Vec<_>>())
        {
            Some(h) if h.len() == 2 && h[0] == MAGIC => {
                let version: u32 = h[1].parse().map_err(|_| bad("bad version".into()))?;
                if version != FORMAT_VERSION {
                    return Err(bad(format!("unsupported format version {version}")));
                }
            }
            _ => return Err(bad("missing header".into())),
        }
        let mut ckpt = Checkpoint::new();
        let mut ended = false;
        while let Some(line) = lines.next() {
            if line == "end" {
                ended = true;
                break;
            }
            if let Some(rest) = line.strip_prefix("meta ") {
                let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                ckpt.set_meta(k, v);
            } else if let Some(rest) = line.strip_prefix("array ") {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                let key = fields
                    .first()
                    .ok_or_else(|| bad("array without key".into()))?;
                let rank: usize = fields
                    .get(1)
                    .and_then(|r| r.parse().ok())
                    .ok_or_else(|| bad(format!("array {key}: bad rank")))?;
                if fields.len() != rank + 2 {
                    return Err(bad(format!("array {key}: expected {rank} dims")));
                }
                let shape = fields[2..]
                    .iter()
                    .map(|d| d.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad(format!("array {key}: bad dims")))?;
                let values = lines
                    .next()
                    .ok_or_else(|| bad(format!("array {key}: missing values")))?;
                let data = values
                    .split_whitespace()
                    .map(|v| v.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad(format!("array {key}: bad value")))?;
                if data.len() != shape.iter().product::<usize>() {
                    return Err(bad(format!(
                        "array {key}: {} values for shape {shape:?}",
                        data.len()
                    )));
                }
                ckpt.insert(*key, shape, data);
            } else if !line.is_empty() {
                return Err(bad(format!("unexpected line `{line}`")));
            }
        }
        if !ended {
            return Err(bad("truncated checkpoint (no `end`)".into()));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}
