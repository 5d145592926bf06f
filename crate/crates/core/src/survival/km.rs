use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{SurvivalDataset, SurvivalRow};

/// Product-limit survival curve, right-continuous, evaluated at event times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaplanMeierCurve {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub events: Vec<usize>,
}

impl KaplanMeierCurve {
    /// S(t); 1 before the first event time.
    pub fn survival_at(&self, t: f64) -> f64 {
        match self.times.partition_point(|&x| x <= t) {
            0 => 1.0,
            i => self.survival[i - 1],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Kaplan-Meier estimate. Subjects censored at an event time count as at
/// risk at that time.
///
/// Between censorings the product `Π (n_i - d_i) / n_i` telescopes, so the
/// curve is carried as `S_c * (m - gone) / m`, where `S_c` and `m` are the
/// survival and risk-set size just after the last censoring. Without
/// censoring this is exactly `#{T > t} / n`.
pub fn km_fit(durations: &[f64], events: &[bool]) -> Result<KaplanMeierCurve> {
    if durations.len() != events.len() {
        return Err(Error::InvalidInput(format!(
            "{} durations but {} event flags",
            durations.len(),
            events.len()
        )));
    }
    if durations.is_empty() {
        return Err(Error::EmptyDataset("Kaplan-Meier needs at least one subject".into()));
    }
    if let Some(d) = durations.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
        return Err(Error::InvalidInput(format!("duration {d} is not positive and finite")));
    }

    let mut order: Vec<usize> = (0..durations.len()).collect();
    order.sort_by(|&a, &b| durations[a].total_cmp(&durations[b]));

    let mut curve = KaplanMeierCurve {
        times: Vec::new(),
        survival: Vec::new(),
        at_risk: Vec::new(),
        events: Vec::new(),
    };
    let mut remaining = durations.len();
    let mut base_survival = 1.0;
    let mut base_n = remaining;
    let mut gone = 0usize;

    let mut i = 0;
    while i < order.len() {
        let t = durations[order[i]];
        let mut d = 0;
        let mut c = 0;
        while i < order.len() && durations[order[i]] == t {
            if events[order[i]] {
                d += 1;
            } else {
                c += 1;
            }
            i += 1;
        }
        let mut s = if base_n == 0 {
            0.0
        } else {
            base_survival * (base_n - gone) as f64 / base_n as f64
        };
        if d > 0 {
            gone += d;
            s = base_survival * (base_n - gone) as f64 / base_n as f64;
            curve.times.push(t);
            curve.survival.push(s);
            curve.at_risk.push(remaining);
            curve.events.push(d);
        }
        remaining -= d + c;
        if c > 0 {
            base_survival = s;
            base_n = remaining;
            gone = 0;
        }
    }
    Ok(curve)
}

/// One curve per label; labels with no rows do not appear.
pub fn km_by_group<F>(dataset: &SurvivalDataset, group: F) -> Result<BTreeMap<String, KaplanMeierCurve>>
where
    F: Fn(&SurvivalRow) -> String,
{
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("no rows to group".into()));
    }
    let mut parts: BTreeMap<String, (Vec<f64>, Vec<bool>)> = BTreeMap::new();
    for row in &dataset.rows {
        let e = parts.entry(group(row)).or_default();
        e.0.push(row.duration_days);
        e.1.push(row.event);
    }
    parts
        .into_iter()
        .map(|(label, (d, e))| km_fit(&d, &e).map(|c| (label, c)))
        .collect()
}
