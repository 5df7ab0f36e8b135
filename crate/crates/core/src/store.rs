//! Table of proven losing couples: single canonized lands with their nimber.
//!
//! Text form is one `<key> <nimber>` line per record, sorted by key. A store
//! opened on a file appends each new record to it and rewrites it sorted on
//! [`Store::compact`].

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use thiserror::Error;

use crate::canon::{try_canonical_form, CanonicalKey};
use crate::position::Position;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("conflicting nimber for {key}: stored {stored}, new {new}")]
    Conflict {
        key: CanonicalKey,
        stored: u32,
        new: u32,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: key {key} is not canonical")]
    NotCanonical { line: usize, key: String },
    #[error("line {line}: nimber {nimber} exceeds the {lives} lives of {key}")]
    OutOfRange {
        line: usize,
        key: String,
        nimber: u32,
        lives: u32,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Default)]
pub struct Store {
    records: RwLock<HashMap<CanonicalKey, u32>>,
    journal: Option<Journal>,
}

#[derive(Debug)]
struct Journal {
    path: PathBuf,
    file: Mutex<File>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    /// Loads `path` if it exists and journals every later insertion to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Store, StoreError> {
        let path = path.as_ref().to_path_buf();
        let mut store = match std::fs::read_to_string(&path) {
            Ok(text) => Store::from_text(&text)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Store::new(),
            Err(e) => return Err(e.into()),
        };
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        store.journal = Some(Journal {
            path,
            file: Mutex::new(file),
        });
        Ok(store)
    }

    pub fn get(&self, key: &CanonicalKey) -> Option<u32> {
        self.records.read().unwrap().get(key).copied()
    }

    pub fn contains(&self, key: &CanonicalKey) -> bool {
        self.records.read().unwrap().contains_key(key)
    }

    /// Inserts a record. Putting the same record twice is a no-op.
    pub fn put(&self, key: CanonicalKey, nimber: u32) -> Result<(), StoreError> {
        let mut records = self.records.write().unwrap();
        if let Some(&stored) = records.get(&key) {
            if stored != nimber {
                return Err(StoreError::Conflict {
                    key,
                    stored,
                    new: nimber,
                });
            }
            return Ok(());
        }
        if let Some(j) = &self.journal {
            writeln!(j.file.lock().unwrap(), "{} {}", key, nimber)?;
        }
        records.insert(key, nimber);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All records sorted by key.
    pub fn records(&self) -> Vec<(CanonicalKey, u32)> {
        let mut out: Vec<(CanonicalKey, u32)> = self
            .records
            .read()
            .unwrap()
            .iter()
            .map(|(k, &n)| (k.clone(), n))
            .collect();
        out.sort();
        out
    }

    pub fn write_text(&self, w: &mut impl Write) -> io::Result<()> {
        for (k, n) in self.records() {
            writeln!(w, "{} {}", k, n)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        self.write_text(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("keys are ascii")
    }

    pub fn export(&self, path: impl AsRef<Path>) -> Result<(), StoreError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Rewrites the journal file sorted, dropping nothing.
    pub fn compact(&self) -> Result<(), StoreError> {
        if let Some(j) = &self.journal {
            let mut file = j.file.lock().unwrap();
            let tmp = j.path.with_extension("tmp");
            self.export(&tmp)?;
            std::fs::rename(&tmp, &j.path)?;
            *file = OpenOptions::new().append(true).open(&j.path)?;
        }
        Ok(())
    }

    /// Parses and validates a text export.
    pub fn from_text(text: &str) -> Result<Store, StoreError> {
        let store = Store::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (key, nimber) = parse_line(line, line_no)?;
            store.put(key, nimber).map_err(|e| match e {
                StoreError::Conflict { key, stored, new } => StoreError::Malformed {
                    line: line_no,
                    reason: format!("{key} already has nimber {stored}, not {new}"),
                },
                e => e,
            })?;
        }
        Ok(store)
    }

    pub fn import(path: impl AsRef<Path>) -> Result<Store, StoreError> {
        Store::from_text(&std::fs::read_to_string(path)?)
    }

    /// Copies every record of `other` into `self`.
    pub fn merge(&self, other: &Store) -> Result<(), StoreError> {
        for (k, n) in other.records() {
            self.put(k, n)?;
        }
        Ok(())
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<(CanonicalKey, u32), StoreError> {
    let malformed = |reason: &str| StoreError::Malformed {
        line: line_no,
        reason: reason.to_string(),
    };
    let mut parts = line.split(' ');
    let (Some(text), Some(num), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(malformed("expected `<key> <nimber>`"));
    };
    let nimber: u32 = num.parse().map_err(|_| malformed("bad nimber"))?;
    let p = Position::parse(text).map_err(|e| malformed(&e.to_string()))?;
    if p.land_count() != 1 {
        return Err(malformed("key must hold exactly one land"));
    }
    let canon = try_canonical_form(&p).map_err(|e| malformed(&e.to_string()))?;
    if canon.key.as_str() != text {
        return Err(StoreError::NotCanonical {
            line: line_no,
            key: text.to_string(),
        });
    }
    let lives = p.total_lives();
    if nimber > lives {
        return Err(StoreError::OutOfRange {
            line: line_no,
            key: text.to_string(),
            nimber,
            lives,
        });
    }
    Ok((canon.key, nimber))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(s: &str) -> CanonicalKey {
        CanonicalKey::from_text_unchecked(s)
    }

    #[test]
    fn put_and_get() {
        let s = Store::new();
        assert_eq!(s.get(&k("22.}]!")), None);
        s.put(k("22.}]!"), 1).unwrap();
        assert_eq!(s.get(&k("22.}]!")), Some(1));
        s.put(k("22.}]!"), 1).unwrap();
        assert_eq!(s.len(), 1);
        assert!(matches!(
            s.put(k("22.}]!"), 2),
            Err(StoreError::Conflict {
                stored: 1,
                new: 2,
                ..
            })
        ));
    }

    #[test]
    fn text_round_trip() {
        let s = Store::new();
        s.put(k("AB.}AB.}]!"), 1).unwrap();
        s.put(k("22.}]!"), 1).unwrap();
        s.put(k("12.}]!"), 0).unwrap();
        let text = s.to_text();
        assert_eq!(text, "12.}]! 0\n22.}]! 1\nAB.}AB.}]! 1\n");
        assert_eq!(Store::from_text(&text).unwrap().to_text(), text);
    }

    #[test]
    fn import_validates() {
        assert_eq!(
            Store::from_text("22.}]! 1\n").unwrap().get(&k("22.}]!")),
            Some(1)
        );
        assert!(matches!(
            Store::from_text("22.}]! 9\n"),
            Err(StoreError::OutOfRange { lives: 2, .. })
        ));
        assert!(matches!(
            Store::from_text("BA.}AB.}]! 1\n"),
            Err(StoreError::NotCanonical { .. })
        ));
        assert!(Store::from_text("22.}]!\n").is_err());
        assert!(Store::from_text("22.}]! 1\n22.}]! 0\n").is_err());
        assert!(Store::from_text("22.}]22.}]! 0\n").is_err());
    }

    #[test]
    fn journal_and_compact() {
        let dir = std::env::temp_dir().join(format!("sprouts-store-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("db.txt");
        let _ = std::fs::remove_file(&path);
        {
            let s = Store::open(&path).unwrap();
            s.put(k("AB.}AB.}]!"), 1).unwrap();
            s.put(k("12.}]!"), 0).unwrap();
        }
        let s = Store::open(&path).unwrap();
        assert_eq!(s.len(), 2);
        s.compact().unwrap();
        s.put(k("22.}]!"), 1).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "12.}]! 0\nAB.}AB.}]! 1\n22.}]! 1\n");
        let _ = std::fs::remove_dir_all(&dir);
    }
}
