//! Event-log ingestion and construction of censored survival datasets.
//!
//! Each pre-target post or comment becomes one observation. Its duration is
//! the time until the user's first event on the target forum, or until the
//! cutoff when that event happens later (right censoring).

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{risk_class, RiskClass};
use crate::SECONDS_PER_DAY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Post,
    Comment,
}

/// One timestamped post or comment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub user_id: String,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    pub forum: String,
    pub kind: EventKind,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_score: Option<f64>,
}

impl EventRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.user_id.is_empty() {
            return Err("empty user_id".into());
        }
        if self.timestamp < 0 {
            return Err(format!("negative timestamp {}", self.timestamp));
        }
        if self.forum.is_empty() {
            return Err("empty forum".into());
        }
        if let Some(s) = self.risk_score {
            if !(0.0..=1.0).contains(&s) {
                return Err(format!("risk_score {s} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Title and body joined by a space, as used for keyword matching.
    pub fn full_text(&self) -> String {
        match (self.title.is_empty(), self.text.is_empty()) {
            (true, _) => self.text.clone(),
            (false, true) => self.title.clone(),
            (false, false) => format!("{} {}", self.title, self.text),
        }
    }
}

/// Forum names are compared ASCII case-insensitively.
pub fn same_forum(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Jsonl,
    Csv,
}

impl LogFormat {
    pub fn from_path(path: &Path) -> LogFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => LogFormat::Csv,
            _ => LogFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub loaded: usize,
    pub skipped: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub problems: Vec<String>,
}

// Loose row shape so missing required keys are reported instead of aborting.
#[derive(Debug, Deserialize)]
struct RawRecord {
    user_id: Option<String>,
    timestamp: Option<i64>,
    forum: Option<String>,
    kind: Option<String>,
    #[serde(default)]
    title: Option<String>,
    text: Option<String>,
    #[serde(default)]
    risk_score: Option<f64>,
}

impl RawRecord {
    fn into_record(self) -> std::result::Result<EventRecord, String> {
        let user_id = self.user_id.ok_or("missing user_id")?;
        let timestamp = self.timestamp.ok_or("missing timestamp")?;
        let forum = self.forum.ok_or("missing forum")?;
        let kind = match self.kind.as_deref() {
            Some(k) if k.eq_ignore_ascii_case("post") => EventKind::Post,
            Some(k) if k.eq_ignore_ascii_case("comment") => EventKind::Comment,
            Some(k) => return Err(format!("unknown kind {k:?}")),
            None => return Err("missing kind".into()),
        };
        let text = self.text.ok_or("missing text")?;
        let record = EventRecord {
            user_id,
            timestamp,
            forum,
            kind,
            title: self.title.unwrap_or_default(),
            text,
            risk_score: self.risk_score,
        };
        record.validate()?;
        Ok(record)
    }
}

const MAX_REPORTED_PROBLEMS: usize = 20;

/// Reads an event log. Malformed rows are skipped and counted; more than half
/// malformed is fatal.
pub fn load_events(path: &Path, format: LogFormat) -> Result<(Vec<EventRecord>, LoadReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut report = LoadReport::default();
    let mut total = 0usize;
    let note = |report: &mut LoadReport, line: usize, msg: String| {
        report.skipped += 1;
        if report.problems.len() < MAX_REPORTED_PROBLEMS {
            report.problems.push(format!("row {line}: {msg}"));
        }
    };

    match format {
        LogFormat::Jsonl => {
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                total += 1;
                match serde_json::from_str::<RawRecord>(&line)
                    .map_err(|e| e.to_string())
                    .and_then(RawRecord::into_record)
                {
                    Ok(r) => records.push(r),
                    Err(msg) => note(&mut report, i + 1, msg),
                }
            }
        }
        LogFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .flexible(true)
                .from_reader(file);
            let headers = match reader.headers() {
                Ok(h) => h.clone(),
                Err(e) => return Err(Error::Serialization(e.to_string())),
            };
            for (i, row) in reader.records().enumerate() {
                total += 1;
                let parsed = row
                    .map_err(|e| e.to_string())
                    .and_then(|r| raw_from_csv(&headers, &r))
                    .and_then(RawRecord::into_record);
                match parsed {
                    Ok(r) => records.push(r),
                    Err(msg) => note(&mut report, i + 2, msg),
                }
            }
        }
    }

    report.loaded = records.len();
    if total > 0 && report.skipped * 2 > total {
        return Err(Error::TooManyMalformed {
            path: path.to_path_buf(),
            malformed: report.skipped,
            total,
            first: report.problems.first().cloned().unwrap_or_default(),
        });
    }
    Ok((records, report))
}

fn raw_from_csv(headers: &csv::StringRecord, row: &csv::StringRecord) -> std::result::Result<RawRecord, String> {
    let get = |name: &str| -> Option<String> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .and_then(|i| row.get(i))
            .map(str::to_owned)
    };
    let nonempty = |v: Option<String>| v.filter(|s| !s.is_empty());
    let timestamp = match nonempty(get("timestamp")) {
        Some(s) => Some(s.trim().parse::<i64>().map_err(|e| format!("bad timestamp {s:?}: {e}"))?),
        None => None,
    };
    let risk_score = match nonempty(get("risk_score")) {
        Some(s) => Some(s.trim().parse::<f64>().map_err(|e| format!("bad risk_score {s:?}: {e}"))?),
        None => None,
    };
    Ok(RawRecord {
        user_id: nonempty(get("user_id")),
        timestamp,
        forum: nonempty(get("forum")),
        kind: nonempty(get("kind")),
        title: get("title"),
        text: get("text"),
        risk_score,
    })
}

/// Writes records as JSONL, one object per line, in the ingestion schema.
pub fn write_events_jsonl(path: &Path, events: &[EventRecord]) -> Result<()> {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e)?);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn is_zero_width(c: char) -> bool {
    matches!(c, '\u{200B}'..='\u{200D}' | '\u{2060}' | '\u{FEFF}' | '\u{00AD}')
}

fn strip_urls(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for (i, word) in s.split(' ').enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let lower = word.to_ascii_lowercase();
        let url_at = ["http://", "https://", "www."]
            .iter()
            .filter_map(|p| lower.find(p))
            .min();
        match url_at {
            Some(0) => {}
            Some(pos) => out.push_str(&word[..pos]),
            None => out.push_str(word),
        }
    }
    out
}

/// Removes control and zero-width characters and URLs, then collapses
/// whitespace. Case is preserved.
pub fn clean_text(raw: &str) -> String {
    let visible: String = raw
        .chars()
        .filter(|&c| !is_zero_width(c))
        .map(|c| if c.is_control() { ' ' } else { c })
        .map(|c| if c.is_whitespace() { ' ' } else { c })
        .collect();
    strip_urls(&visible)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTrajectory {
    pub user_id: String,
    pub events: Vec<EventRecord>,
}

impl UserTrajectory {
    pub fn first_target_index(&self, target_forum: &str) -> Option<usize> {
        self.events.iter().position(|e| same_forum(&e.forum, target_forum))
    }

    pub fn first_target_time(&self, target_forum: &str) -> Option<i64> {
        self.first_target_index(target_forum).map(|i| self.events[i].timestamp)
    }
}

pub type Trajectories = BTreeMap<String, UserTrajectory>;

/// Groups events by user, each trajectory sorted by timestamp (stable).
pub fn build_trajectories(events: Vec<EventRecord>) -> Trajectories {
    let mut map: Trajectories = BTreeMap::new();
    for e in events {
        map.entry(e.user_id.clone())
            .or_insert_with(|| UserTrajectory {
                user_id: e.user_id.clone(),
                events: Vec::new(),
            })
            .events
            .push(e);
    }
    for t in map.values_mut() {
        t.events.sort_by_key(|e| e.timestamp);
    }
    map
}

/// Keeps users with at least two events and at least one target-forum event,
/// truncating each trajectory at its first target event (inclusive).
pub fn apply_study_filters(trajectories: Trajectories, target_forum: &str) -> Result<Trajectories> {
    if target_forum.is_empty() {
        return Err(Error::InvalidInput("target forum must be nonempty".into()));
    }
    Ok(trajectories
        .into_iter()
        .filter(|(_, t)| t.events.len() >= 2)
        .filter_map(|(id, mut t)| {
            let first = t.first_target_index(target_forum)?;
            t.events.truncate(first + 1);
            Some((id, t))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub user_id: String,
    /// Position of the origin event inside the user's trajectory.
    pub origin_event_index: usize,
    pub duration_days: f64,
    pub event: bool,
    pub covariates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalDataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<SurvivalRow>,
}

impl SurvivalDataset {
    pub fn new(feature_names: Vec<String>, rows: Vec<SurvivalRow>) -> Result<Self> {
        let ds = SurvivalDataset { feature_names, rows };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for n in &self.feature_names {
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate feature name {n:?}")));
            }
        }
        let p = self.feature_names.len();
        for (i, row) in self.rows.iter().enumerate() {
            if row.covariates.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: row.covariates.len(),
                });
            }
            if !(row.duration_days > 0.0) || !row.duration_days.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "row {i} has non-positive duration {}",
                    row.duration_days
                )));
            }
            if let Some(column) = row.covariates.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, column });
            }
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_events(&self) -> usize {
        self.rows.iter().filter(|r| r.event).count()
    }

    pub fn durations(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.duration_days).collect()
    }

    pub fn events(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.event).collect()
    }

    /// Builds a dataset from parallel arrays; user ids are row numbers.
    pub fn from_columns(
        feature_names: Vec<String>,
        durations: &[f64],
        events: &[bool],
        covariates: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if durations.len() != events.len() || durations.len() != covariates.len() {
            return Err(Error::InvalidInput(format!(
                "column lengths differ: {} durations, {} events, {} covariate rows",
                durations.len(),
                events.len(),
                covariates.len()
            )));
        }
        let rows = durations
            .iter()
            .zip(events)
            .zip(covariates)
            .enumerate()
            .map(|(i, ((&d, &e), x))| SurvivalRow {
                user_id: i.to_string(),
                origin_event_index: 0,
                duration_days: d,
                event: e,
                covariates: x,
            })
            .collect();
        SurvivalDataset::new(feature_names, rows)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BuildReport {
    pub rows: usize,
    pub uncensored_rows: usize,
    pub censored_rows: usize,
    pub censored_users: usize,
    pub dropped_nonpositive: usize,
}

/// Produces one covariate vector per origin event.
pub trait Featurizer {
    fn feature_names(&self) -> Vec<String>;
    fn featurize(&self, event: &EventRecord) -> Result<Vec<f64>>;
}

impl<F> Featurizer for (Vec<String>, F)
where
    F: Fn(&EventRecord) -> Result<Vec<f64>>,
{
    fn feature_names(&self) -> Vec<String> {
        self.0.clone()
    }

    fn featurize(&self, event: &EventRecord) -> Result<Vec<f64>> {
        (self.1)(event)
    }
}

/// Builds the censored dataset at `cutoff`. Expects filtered trajectories.
pub fn build_survival_dataset(
    trajectories: &Trajectories,
    target_forum: &str,
    cutoff: i64,
    featurizer: &dyn Featurizer,
) -> Result<(SurvivalDataset, BuildReport)> {
    let feature_names = featurizer.feature_names();
    let mut rows = Vec::new();
    let mut report = BuildReport::default();

    for traj in trajectories.values() {
        let Some(t_first) = traj.first_target_time(target_forum) else {
            continue;
        };
        let censored = t_first > cutoff;
        let end = if censored { cutoff } else { t_first };
        let mut user_rows = 0;
        for (idx, ev) in traj.events.iter().enumerate() {
            if same_forum(&ev.forum, target_forum) || ev.timestamp > cutoff {
                continue;
            }
            let duration_days = (end - ev.timestamp) as f64 / SECONDS_PER_DAY;
            if duration_days <= 0.0 {
                report.dropped_nonpositive += 1;
                continue;
            }
            let covariates = featurizer.featurize(ev)?;
            if covariates.len() != feature_names.len() {
                return Err(Error::DimensionMismatch {
                    expected: feature_names.len(),
                    got: covariates.len(),
                });
            }
            rows.push(SurvivalRow {
                user_id: traj.user_id.clone(),
                origin_event_index: idx,
                duration_days,
                event: !censored,
                covariates,
            });
            user_rows += 1;
        }
        if censored && user_rows > 0 {
            report.censored_users += 1;
        }
    }

    if rows.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no pre-target events on or before cutoff {cutoff} ({} rows dropped for non-positive duration)",
            report.dropped_nonpositive
        )));
    }
    report.rows = rows.len();
    report.uncensored_rows = rows.iter().filter(|r| r.event).count();
    report.censored_rows = report.rows - report.uncensored_rows;
    if report.uncensored_rows == 0 {
        return Err(Error::NoEvents);
    }
    Ok((SurvivalDataset::new(feature_names, rows)?, report))
}

/// Mean gap before the first target event, per source forum and risk class.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TransitionStat {
    pub mean_days_high: Option<f64>,
    pub mean_days_low: Option<f64>,
    pub n_high: usize,
    pub n_low: usize,
}

pub fn transition_stats(
    trajectories: &Trajectories,
    target_forum: &str,
    threshold: f64,
) -> BTreeMap<String, TransitionStat> {
    let mut sums: BTreeMap<String, (f64, usize, f64, usize)> = BTreeMap::new();
    for traj in trajectories.values() {
        let Some(first) = traj.first_target_index(target_forum) else {
            continue;
        };
        let t_first = traj.events[first].timestamp;
        let Some(last) = traj.events[..first]
            .iter()
            .rev()
            .find(|e| !same_forum(&e.forum, target_forum))
        else {
            continue;
        };
        let gap = (t_first - last.timestamp) as f64 / SECONDS_PER_DAY;
        let entry = sums.entry(last.forum.clone()).or_default();
        match risk_class(last.risk_score, threshold) {
            RiskClass::High => {
                entry.0 += gap;
                entry.1 += 1;
            }
            RiskClass::Low => {
                entry.2 += gap;
                entry.3 += 1;
            }
        }
    }
    sums.into_iter()
        .map(|(forum, (sh, nh, sl, nl))| {
            let mean = |s: f64, n: usize| (n > 0).then(|| s / n as f64);
            (
                forum,
                TransitionStat {
                    mean_days_high: mean(sh, nh),
                    mean_days_low: mean(sl, nl),
                    n_high: nh,
                    n_low: nl,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClassStats {
    pub events: usize,
    pub mean_length: Option<f64>,
    pub weekend_percent: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SummaryReport {
    pub users: usize,
    pub events: usize,
    pub max_events_per_user: usize,
    pub min_events_per_user: usize,
    pub mean_events_per_user: f64,
    pub high: ClassStats,
    pub low: ClassStats,
    pub missing_scores: usize,
}

/// Monday = 0. The epoch (1970-01-01) was a Thursday.
pub fn weekday_utc(timestamp: i64) -> u32 {
    (timestamp.div_euclid(86_400) + 3).rem_euclid(7) as u32
}

/// Friday or Saturday, UTC.
pub fn is_weekend(timestamp: i64) -> bool {
    matches!(weekday_utc(timestamp), 4 | 5)
}

pub fn summary_stats(trajectories: &Trajectories, threshold: f64) -> SummaryReport {
    let counts: Vec<usize> = trajectories.values().map(|t| t.events.len()).collect();
    let mut report = SummaryReport {
        users: counts.len(),
        events: counts.iter().sum(),
        max_events_per_user: counts.iter().copied().max().unwrap_or(0),
        min_events_per_user: counts.iter().copied().min().unwrap_or(0),
        mean_events_per_user: if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<usize>() as f64 / counts.len() as f64
        },
        ..Default::default()
    };

    // (events, total length, weekend events) per class
    let mut acc: HashMap<RiskClass, (usize, usize, usize)> = HashMap::new();
    for e in trajectories.values().flat_map(|t| &t.events) {
        if e.risk_score.is_none() {
            report.missing_scores += 1;
        }
        let a = acc.entry(risk_class(e.risk_score, threshold)).or_default();
        a.0 += 1;
        a.1 += e.text.chars().count();
        a.2 += usize::from(is_weekend(e.timestamp));
    }
    let class = |c: RiskClass| {
        let (n, len, wk) = acc.get(&c).copied().unwrap_or_default();
        ClassStats {
            events: n,
            mean_length: (n > 0).then(|| len as f64 / n as f64),
            weekend_percent: (n > 0).then(|| 100.0 * wk as f64 / n as f64),
        }
    };
    report.high = class(RiskClass::High);
    report.low = class(RiskClass::Low);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const DAY: i64 = 86_400;

    fn ev(user: &str, t: i64, forum: &str) -> EventRecord {
        EventRecord {
            user_id: user.into(),
            timestamp: t,
            forum: forum.into(),
            kind: EventKind::Post,
            title: String::new(),
            text: String::new(),
            risk_score: None,
        }
    }

    fn scored(user: &str, t: i64, forum: &str, score: f64) -> EventRecord {
        EventRecord {
            risk_score: Some(score),
            ..ev(user, t, forum)
        }
    }

    fn write_tmp(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_empty_file() {
        let f = write_tmp("", ".jsonl");
        let (records, report) = load_events(f.path(), LogFormat::Jsonl).unwrap();
        assert!(records.is_empty());
        assert_eq!(report.skipped, 0);
    }

    #[test]
    fn load_jsonl_preserves_fields() {
        let f = write_tmp(
            concat!(
                r#"{"user_id":"u1","timestamp":10,"forum":"AskReddit","kind":"post","title":"hi","text":"hello","risk_score":0.2}"#,
                "\n",
                r#"{"user_id":"u1","timestamp":20,"forum":"SuicideWatch","kind":"comment","text":"x"}"#,
                "\n",
                r#"{"user_id":"u2","timestamp":5,"forum":"memes","kind":"post","text":""}"#,
                "\n"
            ),
            ".jsonl",
        );
        let (records, report) = load_events(f.path(), LogFormat::Jsonl).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(report.skipped, 0);
        assert_eq!(records[0].title, "hi");
        assert_eq!(records[0].risk_score, Some(0.2));
        assert_eq!(records[1].kind, EventKind::Comment);
        assert_eq!(records[1].risk_score, None);
        assert_eq!(records[2].user_id, "u2");
    }

    #[test]
    fn load_skips_row_missing_user() {
        let mut s = String::new();
        for i in 0..10 {
            if i == 4 {
                s.push_str(&format!(r#"{{"timestamp":{i},"forum":"a","kind":"post","text":""}}"#));
            } else {
                s.push_str(&format!(r#"{{"user_id":"u","timestamp":{i},"forum":"a","kind":"post","text":""}}"#));
            }
            s.push('\n');
        }
        let f = write_tmp(&s, ".jsonl");
        let (records, report) = load_events(f.path(), LogFormat::Jsonl).unwrap();
        assert_eq!(records.len(), 9);
        assert_eq!(report.skipped, 1);
        assert!(report.problems[0].contains("user_id"));
    }

    #[test]
    fn load_mostly_malformed_is_fatal() {
        let f = write_tmp("{}\n{}\nnot json\n", ".jsonl");
        assert!(matches!(
            load_events(f.path(), LogFormat::Jsonl),
            Err(Error::TooManyMalformed { malformed: 3, total: 3, .. })
        ));
    }

    #[test]
    fn load_missing_file_is_fatal() {
        assert!(matches!(
            load_events(Path::new("/nonexistent/events.jsonl"), LogFormat::Jsonl),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn load_csv_with_quoting() {
        let f = write_tmp(
            "user_id,timestamp,forum,kind,title,text,risk_score\n\
             u1,100,AskReddit,post,\"a, b\",\"said \"\"hi\"\"\",0.5\n\
             u1,200,SuicideWatch,comment,,text,\n",
            ".csv",
        );
        let (records, report) = load_events(f.path(), LogFormat::Csv).unwrap();
        assert_eq!(report.skipped, 0);
        assert_eq!(records[0].title, "a, b");
        assert_eq!(records[0].text, "said \"hi\"");
        assert_eq!(records[1].risk_score, None);
    }

    #[test]
    fn rejects_out_of_range_score() {
        let f = write_tmp(
            concat!(
                r#"{"user_id":"u","timestamp":1,"forum":"a","kind":"post","text":"","risk_score":1.5}"#,
                "\n",
                r#"{"user_id":"u","timestamp":2,"forum":"a","kind":"post","text":""}"#,
                "\n"
            ),
            ".jsonl",
        );
        let (records, report) = load_events(f.path(), LogFormat::Jsonl).unwrap();
        assert_eq!((records.len(), report.skipped), (1, 1));
    }

    #[test]
    fn clean_text_cases() {
        assert_eq!(clean_text(""), "");
        assert_eq!(clean_text("I  feel\u{200b} sad "), "I feel sad");
        assert_eq!(clean_text("see https://x.y/z now"), "see now");
        assert_eq!(clean_text("a\tb\u{7}c\nd"), "a b c d");
        assert_eq!(clean_text("link:http://a.b end"), "link: end");
        assert_eq!(clean_text("Keep CASE"), "Keep CASE");
    }

    #[test]
    fn trajectories_group_and_sort() {
        assert!(build_trajectories(vec![]).is_empty());
        let t = build_trajectories(vec![ev("u", 5, "a"), ev("u", 2, "b"), ev("u", 9, "c")]);
        let times: Vec<i64> = t["u"].events.iter().map(|e| e.timestamp).collect();
        assert_eq!(times, vec![2, 5, 9]);

        let t = build_trajectories(vec![
            ev("a", 3, "x"),
            ev("b", 1, "x"),
            ev("a", 1, "y"),
            ev("b", 0, "y"),
            ev("a", 1, "z"),
        ]);
        assert_eq!(t.len(), 2);
        let forums: Vec<&str> = t["a"].events.iter().map(|e| e.forum.as_str()).collect();
        assert_eq!(forums, vec!["y", "z", "x"]); // stable on the tie at t=1
        assert_eq!(t["b"].events[0].timestamp, 0);
    }

    #[test]
    fn study_filters() {
        let t = build_trajectories(vec![
            ev("single", 1, "SW"),
            ev("kept", 1, "A"),
            ev("kept", 5, "SW"),
            ev("kept", 7, "B"),
            ev("none", 1, "A"),
            ev("none", 2, "B"),
        ]);
        let f = apply_study_filters(t, "SW").unwrap();
        assert_eq!(f.keys().collect::<Vec<_>>(), vec!["kept"]);
        let forums: Vec<&str> = f["kept"].events.iter().map(|e| e.forum.as_str()).collect();
        assert_eq!(forums, vec!["A", "SW"]);
        assert!(apply_study_filters(Trajectories::new(), "").is_err());
    }

    fn no_features() -> (Vec<String>, impl Fn(&EventRecord) -> Result<Vec<f64>>) {
        (vec![], |_: &EventRecord| Ok(vec![]))
    }

    #[test]
    fn dataset_durations_uncensored() {
        let t = build_trajectories(vec![ev("u", 0, "A"), ev("u", 2 * DAY, "B"), ev("u", 10 * DAY, "SW")]);
        let t = apply_study_filters(t, "SW").unwrap();
        let (ds, report) = build_survival_dataset(&t, "SW", 100 * DAY, &no_features()).unwrap();
        assert_eq!(ds.durations(), vec![10.0, 8.0]);
        assert_eq!(ds.events(), vec![true, true]);
        assert_eq!(report.censored_rows, 0);
    }

    #[test]
    fn dataset_censoring_at_cutoff() {
        let t = build_trajectories(vec![
            ev("c", 0, "A"),
            ev("c", 400 * DAY, "SW"),
            ev("e", 0, "A"),
            ev("e", DAY, "SW"),
        ]);
        let t = apply_study_filters(t, "SW").unwrap();
        let (ds, report) = build_survival_dataset(&t, "SW", 365 * DAY, &no_features()).unwrap();
        let c = ds.rows.iter().find(|r| r.user_id == "c").unwrap();
        assert_eq!((c.duration_days, c.event), (365.0, false));
        assert_eq!(report.censored_users, 1);
    }

    #[test]
    fn dataset_drops_zero_duration() {
        let t = build_trajectories(vec![ev("u", 0, "A"), ev("u", 50, "B"), ev("u", 50, "SW")]);
        let t = apply_study_filters(t, "SW").unwrap();
        let (ds, report) = build_survival_dataset(&t, "SW", 1000, &no_features()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(report.dropped_nonpositive, 1);
    }

    #[test]
    fn dataset_errors() {
        let t = build_trajectories(vec![ev("u", 10, "A"), ev("u", 20, "SW")]);
        let t = apply_study_filters(t, "SW").unwrap();
        // origin after cutoff: no rows
        assert!(matches!(
            build_survival_dataset(&t, "SW", 5, &no_features()),
            Err(Error::EmptyDataset(_))
        ));
        // all censored
        assert!(matches!(
            build_survival_dataset(&t, "SW", 15, &no_features()),
            Err(Error::NoEvents)
        ));
    }

    #[test]
    fn transition_stats_cases() {
        assert!(transition_stats(&Trajectories::new(), "SW", 0.95).is_empty());

        let gap = 881_280; // 10.2 days
        let t = build_trajectories(vec![scored("u", 0, "Wishlist", 0.99), ev("u", gap, "SW")]);
        let s = transition_stats(&t, "SW", 0.95);
        assert_eq!(s["Wishlist"].mean_days_high, Some(10.2));
        assert_eq!(s["Wishlist"].mean_days_low, None);

        let t = build_trajectories(vec![
            scored("a", 0, "F", 0.1),
            ev("a", 4 * DAY, "SW"),
            scored("b", 0, "G", 0.99),
            scored("b", DAY, "F", 0.2),
            ev("b", 7 * DAY, "SW"),
        ]);
        let s = transition_stats(&t, "SW", 0.95);
        assert_eq!(s["F"].mean_days_low, Some(5.0));
        assert_eq!((s["F"].n_low, s["F"].n_high), (2, 0));
        assert!(!s.contains_key("G"));
    }

    #[test]
    fn summary_stats_cases() {
        let fri = 8 * 86_400 + 1000; // 1970-01-09 was a Friday
        assert_eq!(weekday_utc(fri), 4);
        let mut events = vec![];
        for (i, len) in [500usize, 580].iter().enumerate() {
            events.push(EventRecord {
                text: "x".repeat(*len),
                ..scored("a", fri - 3 * 86_400 + i as i64, "F", 0.99)
            });
        }
        for (i, len) in [160usize, 168, 164, 164].iter().enumerate() {
            events.push(EventRecord {
                text: "y".repeat(*len),
                ..scored("b", fri - 3 * 86_400 + i as i64, "F", 0.1)
            });
        }
        let t = build_trajectories(events);
        let r = summary_stats(&t, 0.95);
        assert_eq!((r.max_events_per_user, r.min_events_per_user), (4, 2));
        assert_eq!(r.mean_events_per_user, 3.0);
        assert_eq!(r.high.mean_length, Some(540.0));
        assert_eq!(r.low.mean_length, Some(164.0));

        let t = build_trajectories(vec![ev("a", fri, "F"), ev("a", fri + 86_400, "F")]);
        let r = summary_stats(&t, 0.95);
        assert_eq!(r.low.weekend_percent, Some(100.0));
        assert_eq!(r.missing_scores, 2);
    }
}
