//! Covariates for each origin event: forum indicators, keyword indicators,
//! topic one-hots and the raw risk score.

mod embedding;
pub mod topics;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use embedding::{cosine, expand_keywords, load_seed_keywords, nearest_tokens, EmbeddingTable, KeywordLexicon};
pub use topics::{fit_topics, top_terms, TopicModel};

use crate::error::{Error, Result};
use crate::ingest::{same_forum, EventRecord, Featurizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskClass {
    High,
    Low,
}

impl RiskClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskClass::High => "high",
            RiskClass::Low => "low",
        }
    }
}

/// High iff the score is strictly above `threshold`; a missing score is low.
pub fn risk_class(score: Option<f64>, threshold: f64) -> RiskClass {
    match score {
        Some(s) if s > threshold => RiskClass::High,
        _ => RiskClass::Low,
    }
}

/// Lowercases and splits on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn keyword_indicators(text: &str, lexicon: &KeywordLexicon) -> Vec<f64> {
    let tokens: HashSet<String> = tokenize(text).into_iter().collect();
    lexicon
        .expanded
        .iter()
        .map(|w| if tokens.contains(w) { 1.0 } else { 0.0 })
        .collect()
}

/// The `n` most frequent forums excluding `exclude`, ties by name.
pub fn top_forums<'a, I>(events: I, n: usize, exclude: &str) -> Vec<String>
where
    I: IntoIterator<Item = &'a EventRecord>,
{
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in events {
        if !same_forum(&e.forum, exclude) {
            *counts.entry(e.forum.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.into_iter().take(n).map(|(f, _)| f.to_owned()).collect()
}

pub const DEFAULT_TOP_FORUMS: usize = 50;
pub const DEFAULT_RISK_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub top_forums: Vec<String>,
    pub lexicon: KeywordLexicon,
    #[serde(default)]
    pub topic_model: Option<TopicModel>,
    pub risk_threshold: f64,
    pub include_score: bool,
}

impl FeatureSpec {
    pub fn validate(&self, target_forum: Option<&str>) -> Result<()> {
        if !(0.0..=1.0).contains(&self.risk_threshold) {
            return Err(Error::InvalidInput(format!(
                "risk threshold {} outside [0, 1]",
                self.risk_threshold
            )));
        }
        if let Some(target) = target_forum {
            if self.top_forums.iter().any(|f| same_forum(f, target)) {
                return Err(Error::InvalidInput(format!("top forums include the target forum {target}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.top_forums.len()
            + self.lexicon.len()
            + self.topic_model.as_ref().map_or(0, |m| m.k)
            + usize::from(self.include_score)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.top_forums.iter().map(|f| format!("forum:{f}")).collect();
        names.extend(self.lexicon.expanded.iter().map(|w| format!("kw:{w}")));
        if let Some(m) = &self.topic_model {
            names.extend((0..m.k).map(|i| format!("topic:{i}")));
        }
        if self.include_score {
            names.push("score".into());
        }
        names
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Covariate vector for one event, laid out as [`FeatureSpec::feature_names`].
pub fn featurize(event: &EventRecord, spec: &FeatureSpec, embedding: Option<&[f64]>) -> Result<Vec<f64>> {
    let mut x = Vec::with_capacity(spec.len());
    x.extend(
        spec.top_forums
            .iter()
            .map(|f| if same_forum(f, &event.forum) { 1.0 } else { 0.0 }),
    );
    x.extend(keyword_indicators(&event.full_text(), &spec.lexicon));
    if let Some(model) = &spec.topic_model {
        let mut onehot = vec![0.0; model.k];
        if let Some(v) = embedding {
            onehot[model.assign(v)?] = 1.0;
        }
        x.extend(onehot);
    }
    if spec.include_score {
        x.push(event.risk_score.unwrap_or(0.0));
    }
    Ok(x)
}

/// Post-embedding lookup keyed by (user_id, timestamp).
pub type PostEmbeddings = std::collections::HashMap<(String, i64), Vec<f64>>;

#[derive(Debug, Deserialize)]
struct PostEmbeddingLine {
    user_id: String,
    timestamp: i64,
    vector: Vec<f64>,
}

/// Reads JSONL lines `{"user_id", "timestamp", "vector"}`; the first vector
/// for a key wins.
pub fn load_post_embeddings(path: &Path) -> Result<PostEmbeddings> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = PostEmbeddings::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: PostEmbeddingLine = serde_json::from_str(line)
            .map_err(|e| Error::InvalidInput(format!("post embedding line {}: {e}", i + 1)))?;
        map.entry((rec.user_id, rec.timestamp)).or_insert(rec.vector);
    }
    Ok(map)
}

/// A [`Featurizer`] backed by a spec and optional per-post embeddings.
pub struct SpecFeaturizer<'a> {
    pub spec: &'a FeatureSpec,
    pub embeddings: Option<&'a PostEmbeddings>,
}

impl Featurizer for SpecFeaturizer<'_> {
    fn feature_names(&self) -> Vec<String> {
        self.spec.feature_names()
    }

    fn featurize(&self, event: &EventRecord) -> Result<Vec<f64>> {
        let emb = self
            .embeddings
            .and_then(|m| m.get(&(event.user_id.clone(), event.timestamp)))
            .map(Vec::as_slice);
        featurize(event, self.spec, emb)
    }
}
