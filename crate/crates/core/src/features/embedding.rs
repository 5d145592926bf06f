use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token vectors of a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    entries: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("embedding dimension must be positive".into()));
        }
        Ok(EmbeddingTable {
            dimension,
            entries: BTreeMap::new(),
        })
    }

    pub fn from_entries<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut it = entries.into_iter().peekable();
        let dim = it
            .peek()
            .map(|(_, v)| v.len())
            .ok_or_else(|| Error::InvalidInput("empty embedding table".into()))?;
        let mut table = EmbeddingTable::new(dim)?;
        for (token, v) in it {
            table.insert(token.into(), v)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, token: String, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: vector.len(),
            });
        }
        if self.entries.contains_key(&token) {
            return Err(Error::InvalidInput(format!("duplicate token {token:?}")));
        }
        self.entries.insert(token, vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Parses `token v1 ... vd` lines. A leading word2vec-style
    /// `<count> <dim>` header line is skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table: Option<EmbeddingTable> = None;
        for (lineno, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let values: std::result::Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
            let values = values.map_err(|e| Error::InvalidInput(format!("embedding line {}: {e}", lineno + 1)))?;
            if lineno == 0 && values.len() == 1 && token.parse::<usize>().is_ok() {
                continue;
            }
            match table.as_mut() {
                Some(t) => t.insert(token.to_owned(), values)?,
                None => {
                    let mut t = EmbeddingTable::new(values.len())?;
                    t.insert(token.to_owned(), values)?;
                    table = Some(t);
                }
            }
        }
        table.ok_or_else(|| Error::InvalidInput("embedding file has no vectors".into()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Seed keywords plus their embedding-space neighbours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordLexicon {
    pub seeds: Vec<String>,
    pub expanded: Vec<String>,
}

impl KeywordLexicon {
    /// A lexicon without expansion.
    pub fn from_seeds(seeds: Vec<String>) -> Self {
        let mut seen = HashSet::new();
        let expanded = seeds.iter().filter(|s| seen.insert(s.as_str())).cloned().collect();
        KeywordLexicon { seeds, expanded }
    }

    pub fn len(&self) -> usize {
        self.expanded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expanded.is_empty()
    }
}

/// Reads one keyword per line; blank lines and `#` comments are ignored.
pub fn load_seed_keywords(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect())
}

/// The `k` tokens most cosine-similar to `token`, ties broken by token order.
pub fn nearest_tokens(table: &EmbeddingTable, token: &str, k: usize) -> Vec<String> {
    let Some(query) = table.get(token) else {
        return Vec::new();
    };
    let mut scored: Vec<(f64, &str)> = table
        .iter()
        .filter(|(t, _)| *t != token)
        .map(|(t, v)| (cosine(query, v), t))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored.into_iter().take(k).map(|(_, t)| t.to_owned()).collect()
}

/// Seeds first, then each seed's `k` nearest neighbours in discovery order,
/// skipping tokens already collected.
pub fn expand_keywords(seeds: &[String], table: &EmbeddingTable, k: usize) -> Result<KeywordLexicon> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("seed keyword list is empty".into()));
    }
    let mut lexicon = KeywordLexicon::from_seeds(seeds.to_vec());
    let mut seen: HashSet<String> = lexicon.expanded.iter().cloned().collect();
    for seed in seeds {
        for n in nearest_tokens(table, seed, k) {
            if seen.insert(n.clone()) {
                lexicon.expanded.push(n);
            }
        }
    }
    Ok(lexicon)
}
