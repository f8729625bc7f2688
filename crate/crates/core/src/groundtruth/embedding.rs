//! Word embedding tables.
//!
//! Text format: one word per line followed by its `d` components, separated
//! by single spaces.
//!
//! Binary format (all integers little-endian):
//!
//! | bytes      | content                               |
//! |------------|---------------------------------------|
//! | 4          | magic `SEMB`                          |
//! | 4          | format version, `u32` = 1             |
//! | 4          | word count `n`, `u32`                 |
//! | 4          | dimensionality `d`, `u32`             |
//! | n records  | `u32` byte length, UTF-8 word, `d` × `f32` |

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SEMB";
const VERSION: u32 = 1;

/// Word → vector map with a fixed dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self { words: Vec::new(), index: HashMap::new(), dim, data: Vec::new() }
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: &[f64]) -> Result<()> {
        let word = word.into();
        if vector.len() != self.dim {
            return Err(Error::input(format!(
                "vector for {word:?} has {} components, table dimension is {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().all(|&x| x == 0.0) {
            return Err(Error::input(format!("vector for {word:?} is all zeros")));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::input(format!("vector for {word:?} has a non-finite component")));
        }
        if self.index.contains_key(&word) {
            return Err(Error::input(format!("duplicate word {word:?}")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&k| &self.data[k * self.dim..(k + 1) * self.dim])
    }

    /// Keeps only the words in `vocab`, in vocabulary order.
    pub fn restrict(&self, vocab: &[String]) -> Result<EmbeddingTable> {
        let missing: Vec<&str> = vocab.iter().filter(|w| self.get(w).is_none()).map(String::as_str).collect();
        if !missing.is_empty() {
            return Err(Error::input(format!("words missing from embedding table: {}", missing.join(", "))));
        }
        let mut out = EmbeddingTable::new(self.dim);
        for w in vocab {
            out.insert(w.clone(), self.get(w).unwrap())?;
        }
        Ok(out)
    }

    pub fn read_text<R: BufRead>(input: R, source: &str) -> Result<Self> {
        let mut table: Option<EmbeddingTable> = None;
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap();
            let values: std::result::Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
            let values = values.map_err(|e| Error::parse(source, Some(idx + 1), format!("bad component: {e}")))?;
            let t = table.get_or_insert_with(|| EmbeddingTable::new(values.len()));
            t.insert(word, &values).map_err(|e| Error::parse(source, Some(idx + 1), e.to_string()))?;
        }
        table.ok_or_else(|| Error::parse(source, None, "embedding file is empty"))
    }

    pub fn write_text<W: Write>(&self, out: &mut W) -> Result<()> {
        for (k, w) in self.words.iter().enumerate() {
            write!(out, "{w}")?;
            for x in &self.data[k * self.dim..(k + 1) * self.dim] {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R, source: &str) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::parse(source, None, "not a binary embedding file (bad magic)"));
        }
        let version = read_u32(&mut input)?;
        if version != VERSION {
            return Err(Error::parse(source, None, format!("unsupported format version {version}")));
        }
        let n = read_u32(&mut input)? as usize;
        let dim = read_u32(&mut input)? as usize;
        let mut table = EmbeddingTable::new(dim);
        let mut buf = vec![0u8; 4 * dim];
        for k in 0..n {
            let len = read_u32(&mut input)? as usize;
            let mut word = vec![0u8; len];
            input.read_exact(&mut word)?;
            let word = String::from_utf8(word)
                .map_err(|_| Error::parse(source, None, format!("record {k}: word is not UTF-8")))?;
            input.read_exact(&mut buf)?;
            let vector: Vec<f64> =
                buf.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect();
            table.insert(word, &vector).map_err(|e| Error::parse(source, None, format!("record {k}: {e}")))?;
        }
        Ok(table)
    }

    /// Writes the binary layout. Components are stored as `f32`.
    pub fn write_binary<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(self.words.len() as u32).to_le_bytes())?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        for (k, w) in self.words.iter().enumerate() {
            out.write_all(&(w.len() as u32).to_le_bytes())?;
            out.write_all(w.as_bytes())?;
            for &x in &self.data[k * self.dim..(k + 1) * self.dim] {
                out.write_all(&(x as f32).to_le_bytes())?;
            }
        }
        Ok(())
    }
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Reads a vocabulary filter file: one word per line.
pub fn read_vocabulary<R: BufRead>(input: R) -> Result<Vec<String>> {
    let mut words = Vec::new();
    for line in input.lines() {
        let line = line?;
        let w = line.trim();
        if !w.is_empty() {
            words.push(w.to_string());
        }
    }
    Ok(words)
}
