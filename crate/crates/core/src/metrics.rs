//! Concordance and AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::CoxModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceReport {
    pub concordant: u64,
    pub discordant: u64,
    pub tied: u64,
    pub comparable: u64,
    pub index: f64,
}

/// Fenwick tree over risk ranks.
struct Fenwick(Vec<u64>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick(vec![0; n + 1])
    }

    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted ranks < i.
    fn below(&self, i: usize) -> u64 {
        let mut i = i;
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Harrell's C. A pair is comparable when `T_i < T_j` and subject `i` had
/// the event; it is concordant when `risk_i > risk_j`, and tied risks count
/// one half. Runs in O(n log n).
pub fn concordance_index(durations: &[f64], events: &[bool], risks: &[f64]) -> Result<ConcordanceReport> {
    let n = durations.len();
    if events.len() != n || risks.len() != n {
        return Err(Error::InvalidInput(format!(
            "lengths differ: {n} durations, {} events, {} risks",
            events.len(),
            risks.len()
        )));
    }
    if let Some(r) = risks.iter().chain(durations).find(|v| v.is_nan()) {
        return Err(Error::InvalidInput(format!("NaN input {r}")));
    }

    // dense ranks of the risk scores
    let mut sorted: Vec<f64> = risks.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let rank = |r: f64| sorted.partition_point(|&s| s < r);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| durations[b].total_cmp(&durations[a]));

    let mut tree = Fenwick::new(sorted.len());
    let mut inserted = 0u64;
    let (mut concordant, mut discordant, mut tied) = (0u64, 0u64, 0u64);
    let mut pos = 0;
    while pos < n {
        let t = durations[order[pos]];
        let end = (pos..n).find(|&k| durations[order[k]] != t).unwrap_or(n);
        // the tree holds every subject with a strictly longer duration
        for &i in &order[pos..end] {
            if !events[i] {
                continue;
            }
            let r = rank(risks[i]);
            let lower = tree.below(r);
            let equal = tree.below(r + 1) - lower;
            concordant += lower;
            tied += equal;
            discordant += inserted - lower - equal;
        }
        for &i in &order[pos..end] {
            tree.add(rank(risks[i]));
            inserted += 1;
        }
        pos = end;
    }

    let comparable = concordant + discordant + tied;
    if comparable == 0 {
        return Err(Error::Undefined("no comparable pairs".into()));
    }
    Ok(ConcordanceReport {
        concordant,
        discordant,
        tied,
        comparable,
        index: (concordant as f64 + 0.5 * tied as f64) / comparable as f64,
    })
}

/// Mann-Whitney U / (n₁ n₀) with midranks for tied scores.
pub fn roc_auc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::InvalidInput(format!(
            "{} labels but {} scores",
            labels.len(),
            scores.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("scores must be finite".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Undefined("AUC needs both positive and negative labels".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // twice the rank sum of the positives, kept integral
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let j = (i..order.len()).find(|&k| scores[order[k]] != scores[order[i]]).unwrap_or(order.len());
        // ranks i+1..=j share the midrank (i + 1 + j) / 2
        let mid2 = (i + 1 + j) as u128;
        let pos = order[i..j].iter().filter(|&&k| labels[k]).count() as u128;
        rank_sum2 += mid2 * pos;
        i = j;
    }
    let np = n_pos as u128;
    let u2 = rank_sum2 - np * (np + 1);
    Ok(u2 as f64 / 2.0 / (n_pos as f64 * n_neg as f64))
}

/// A censored observation with its eventual outcome, in days from origin.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalTruthRow {
    pub covariates: Vec<f64>,
    /// Duration at the cutoff.
    pub censor_days: f64,
    /// Time of the true transition, if it was ever observed.
    pub outcome_days: Option<f64>,
}

/// Pooled (label, score) pairs over every (row, interval).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntervalLabelSet {
    pub labels: Vec<bool>,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalAucReport {
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub interval_days: f64,
}

/// Splits each row's future after its censor point `c` into intervals
/// `[c + mΔ, c + (m+1)Δ)`, continuing while the interval start is at most the
/// horizon (the largest observed outcome). The score of an interval `[a, b)`
/// is the predicted conditional event probability `(S_x(a) − S_x(b)) / S_x(c)`;
/// the label is 1 iff the true transition falls inside it.
pub fn interval_labels(model: &CoxModel, rows: &[IntervalTruthRow], interval_days: f64) -> Result<IntervalLabelSet> {
    if !(interval_days > 0.0) || !interval_days.is_finite() {
        return Err(Error::InvalidInput(format!("interval length {interval_days} must be positive")));
    }
    let horizon = rows
        .iter()
        .filter_map(|r| r.outcome_days)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut set = IntervalLabelSet::default();
    if !horizon.is_finite() {
        return Ok(set);
    }
    for row in rows {
        if let Some(o) = row.outcome_days {
            if o < row.censor_days {
                return Err(Error::InvalidInput(format!(
                    "outcome at {o} days precedes the censor point {}",
                    row.censor_days
                )));
            }
        }
        let s_c = model.survival_at(&row.covariates, row.censor_days)?;
        let mut m = 0usize;
        loop {
            let a = row.censor_days + m as f64 * interval_days;
            if a > horizon {
                break;
            }
            let b = a + interval_days;
            let score = if s_c > 0.0 {
                (model.survival_at(&row.covariates, a)? - model.survival_at(&row.covariates, b)?) / s_c
            } else {
                0.0
            };
            let hit = row.outcome_days.is_some_and(|o| a <= o && o < b);
            set.labels.push(hit);
            set.scores.push(score);
            m += 1;
        }
    }
    Ok(set)
}

pub fn interval_auc(model: &CoxModel, rows: &[IntervalTruthRow], interval_days: f64) -> Result<IntervalAucReport> {
    let set = interval_labels(model, rows, interval_days)?;
    let auc = roc_auc(&set.labels, &set.scores)?;
    let n_pos = set.labels.iter().filter(|&&l| l).count();
    Ok(IntervalAucReport {
        auc,
        n_pos,
        n_neg: set.labels.len() - n_pos,
        interval_days,
    })
}
