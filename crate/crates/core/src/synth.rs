//! Ground-truth generators.
//!
//! All sampling draws from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha
//! 0.3) and uses `libm` for logarithms, so a seed always yields the same
//! bytes. Exponential waiting times use inverse-transform sampling
//! `T = −ln(U) / rate` with `U` drawn from the open interval (0, 1).

use std::collections::BTreeMap;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{EventKind, EventRecord, SurvivalDataset, SurvivalRow};
use crate::SECONDS_PER_DAY;

pub const GENERATOR: &str = "rand_chacha::ChaCha8Rng::seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum CovariateLaw {
    Bernoulli { p: f64 },
    Uniform01,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineChange {
    pub at_days: f64,
    pub rate_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub beta_true: Vec<f64>,
    /// Events per day under the baseline hazard.
    pub baseline_rate: f64,
    /// Administrative censoring time; `f64::INFINITY` disables censoring.
    pub censor_horizon_days: f64,
    /// One law per coefficient.
    pub covariate_laws: Vec<CovariateLaw>,
    /// Optional second piece of a two-piece constant baseline hazard.
    #[serde(default)]
    pub baseline_change: Option<BaselineChange>,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(Error::InvalidInput("n_subjects must be ≥ 1".into()));
        }
        if !(self.baseline_rate > 0.0) {
            return Err(Error::InvalidInput("baseline_rate must be > 0".into()));
        }
        if self.covariate_laws.len() != self.beta_true.len() {
            return Err(Error::DimensionMismatch {
                expected: self.beta_true.len(),
                got: self.covariate_laws.len(),
            });
        }
        if let Some(c) = self.baseline_change {
            if !(c.rate_after > 0.0) || !(c.at_days > 0.0) {
                return Err(Error::InvalidInput("baseline change needs positive time and rate".into()));
            }
        }
        if !(self.censor_horizon_days > 0.0) {
            return Err(Error::InvalidInput("censor horizon must be > 0".into()));
        }
        Ok(())
    }

    /// Cumulative baseline hazard H₀(t).
    pub fn baseline_cumhaz(&self, t: f64) -> f64 {
        match self.baseline_change {
            Some(c) if t > c.at_days => self.baseline_rate * c.at_days + c.rate_after * (t - c.at_days),
            _ => self.baseline_rate * t,
        }
    }

    fn invert_cumhaz(&self, h: f64) -> f64 {
        match self.baseline_change {
            Some(c) if h > self.baseline_rate * c.at_days => {
                c.at_days + (h - self.baseline_rate * c.at_days) / c.rate_after
            }
            _ => h / self.baseline_rate,
        }
    }
}

fn exp_draw(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.sample(Open01);
    -libm::log(u)
}

/// Survival data from `h(t|x) = h₀(t) exp(βᵀx)` with administrative
/// censoring at the horizon.
pub fn sample_cox(config: &SynthConfig) -> Result<SurvivalDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let names: Vec<String> = (0..config.beta_true.len()).map(|i| format!("x{i}")).collect();
    let mut rows = Vec::with_capacity(config.n_subjects);
    for i in 0..config.n_subjects {
        let x: Vec<f64> = config
            .covariate_laws
            .iter()
            .map(|law| match *law {
                CovariateLaw::Bernoulli { p } => f64::from(u8::from(rng.gen::<f64>() < p)),
                CovariateLaw::Uniform01 => rng.gen::<f64>(),
            })
            .collect();
        let eta: f64 = x.iter().zip(&config.beta_true).map(|(a, b)| a * b).sum();
        let t = config.invert_cumhaz(exp_draw(&mut rng) / libm::exp(eta));
        let event = t <= config.censor_horizon_days;
        rows.push(SurvivalRow {
            user_id: format!("s{i}"),
            origin_event_index: 0,
            duration_days: if event { t } else { config.censor_horizon_days },
            event,
            covariates: x,
        });
    }
    SurvivalDataset::new(names, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForumConfig {
    pub name: String,
    /// Multiplies the target-event hazard after a last post here.
    pub multiplier: f64,
    #[serde(default)]
    pub high_risk: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryConfig {
    pub n_users: usize,
    pub forums: Vec<ForumConfig>,
    /// Inclusive range of pre-target posts per user, drawn uniformly.
    pub posts_per_user: (usize, usize),
    pub mean_gap_days: f64,
    /// Target-event rate per day at multiplier 1.
    pub base_rate: f64,
    /// Users start uniformly within `[start, start + span_days]`.
    pub start: i64,
    pub span_days: f64,
    pub cutoff: i64,
    pub target_forum: String,
    /// Scores on high-risk forums are `U^(1/boost)`.
    pub high_risk_boost: f64,
    pub seed: u64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        let forums = ["AskReddit", "teenagers", "memes", "depression", "gaming", "relationship_advice"]
            .iter()
            .map(|n| ForumConfig {
                name: n.to_string(),
                multiplier: 1.0,
                high_risk: *n == "depression",
            })
            .collect();
        TrajectoryConfig {
            n_users: 500,
            forums,
            posts_per_user: (1, 2),
            mean_gap_days: 5.0,
            base_rate: 1.0 / 60.0,
            start: 1_546_300_800,   // 2019-01-01
            span_days: 720.0,
            cutoff: 1_609_459_199, // 2020-12-31 23:59:59
            target_forum: "SuicideWatch".into(),
            high_risk_boost: 8.0,
            seed: 0,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.forums.is_empty() {
            return Err(Error::InvalidInput("at least one source forum is required".into()));
        }
        if self.forums.iter().any(|f| !(f.multiplier > 0.0)) {
            return Err(Error::InvalidInput("forum multipliers must be > 0".into()));
        }
        if self
            .forums
            .iter()
            .any(|f| crate::ingest::same_forum(&f.name, &self.target_forum))
        {
            return Err(Error::InvalidInput("target forum listed as a source forum".into()));
        }
        let (lo, hi) = self.posts_per_user;
        if lo == 0 || hi < lo {
            return Err(Error::InvalidInput(format!("posts_per_user range ({lo}, {hi}) is invalid")));
        }
        if !(self.mean_gap_days > 0.0) || !(self.base_rate > 0.0) || !(self.high_risk_boost > 0.0) {
            return Err(Error::InvalidInput("gap, rate and boost must be > 0".into()));
        }
        Ok(())
    }

    pub fn set_multiplier(&mut self, forum: &str, multiplier: f64) -> Result<()> {
        let f = self
            .forums
            .iter_mut()
            .find(|f| f.name == forum)
            .ok_or_else(|| Error::InvalidInput(format!("unknown forum {forum}")))?;
        f.multiplier = multiplier;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedLog {
    pub events: Vec<EventRecord>,
    /// First target-forum timestamp per user.
    pub truth: BTreeMap<String, i64>,
}

const VOCABULARY: &[&str] = &[
    "feel", "work", "life", "pain", "friends", "game", "music", "school", "tired", "happy", "alone", "help",
    "family", "sleep", "today", "really", "movie", "hope", "women", "time",
];

/// Users post on source forums with exponential gaps, then reach the target
/// forum after an exponential wait whose rate is scaled by the multiplier of
/// the forum they posted on last.
pub fn sample_trajectories(config: &TrajectoryConfig) -> Result<SimulatedLog> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut events = Vec::new();
    let mut truth = BTreeMap::new();
    let width = config.n_users.to_string().len();
    for u in 0..config.n_users {
        let user_id = format!("u{u:0width$}");
        let mut t = config.start as f64 + rng.gen::<f64>() * config.span_days * SECONDS_PER_DAY;
        let (lo, hi) = config.posts_per_user;
        let n_posts = rng.gen_range(lo..=hi);
        let mut last_forum = 0;
        for k in 0..n_posts {
            if k > 0 {
                t += exp_draw(&mut rng) * config.mean_gap_days * SECONDS_PER_DAY;
            }
            let f = rng.gen_range(0..config.forums.len());
            last_forum = f;
            let forum = &config.forums[f];
            let u01: f64 = rng.gen();
            let score = if forum.high_risk {
                libm::pow(u01, 1.0 / config.high_risk_boost)
            } else {
                u01
            };
            let kind = if rng.gen_bool(0.5) { EventKind::Post } else { EventKind::Comment };
            let n_words = rng.gen_range(3..=12);
            let text: Vec<&str> = (0..n_words).map(|_| VOCABULARY[rng.gen_range(0..VOCABULARY.len())]).collect();
            events.push(EventRecord {
                user_id: user_id.clone(),
                timestamp: t.round() as i64,
                forum: forum.name.clone(),
                kind,
                title: String::new(),
                text: text.join(" "),
                risk_score: Some(score),
            });
        }
        let rate = config.base_rate * config.forums[last_forum].multiplier;
        t += exp_draw(&mut rng) / rate * SECONDS_PER_DAY;
        let target_time = t.round() as i64;
        events.push(EventRecord {
            user_id: user_id.clone(),
            timestamp: target_time,
            forum: config.target_forum.clone(),
            kind: EventKind::Post,
            title: String::new(),
            text: "help".into(),
            risk_score: Some(libm::pow(rng.gen::<f64>(), 0.1)),
        });
        truth.insert(user_id, target_time);
    }
    Ok(SimulatedLog { events, truth })
}
