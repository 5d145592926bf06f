//! File writers and readers for the pipeline's CSV and JSON artifacts.
//!
//! CSV files have a header row and LF line endings. Floats are written in
//! Rust's shortest round-trip form, which parses back to the identical
//! double.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{SurvivalDataset, SurvivalRow, TransitionStat};
use crate::survival::{Coefficient, KaplanMeierCurve};

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().from_reader(file))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Serialization(format!("cannot parse {what} from {field:?}")))
}

fn check_header(r: &mut csv::Reader<std::fs::File>, expected: &[&str], path: &Path) -> Result<()> {
    let header = r.headers()?;
    if header.len() < expected.len() || header.iter().zip(expected).any(|(a, b)| a != *b) {
        return Err(Error::Serialization(format!(
            "{}: expected header starting {:?}",
            path.display(),
            expected
        )));
    }
    Ok(())
}

/// Shortest round-trip text for `x`; scientific notation outside
/// `[1e-5, 1e16)` so tiny p-values stay short.
pub fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub const KM_HEADER: [&str; 4] = ["time_days", "survival", "at_risk", "events"];

pub fn write_km_csv(path: &Path, curve: &KaplanMeierCurve) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(KM_HEADER)?;
    for i in 0..curve.len() {
        w.write_record([
            fmt_float(curve.times[i]),
            fmt_float(curve.survival[i]),
            curve.at_risk[i].to_string(),
            curve.events[i].to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn read_km_csv(path: &Path) -> Result<KaplanMeierCurve> {
    let mut r = reader(path)?;
    check_header(&mut r, &KM_HEADER, path)?;
    let mut curve = KaplanMeierCurve {
        times: Vec::new(),
        survival: Vec::new(),
        at_risk: Vec::new(),
        events: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec?;
        curve.times.push(parse(&rec[0], "time")?);
        curve.survival.push(parse(&rec[1], "survival")?);
        curve.at_risk.push(parse(&rec[2], "at_risk")?);
        curve.events.push(parse(&rec[3], "events")?);
    }
    Ok(curve)
}

pub const COEFFICIENT_HEADER: [&str; 5] = ["name", "beta", "se", "p", "significant"];

/// One row per coefficient in model order; `significant` is `p < alpha`.
pub fn write_coefficients_csv(path: &Path, coefficients: &[Coefficient], alpha: f64) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(COEFFICIENT_HEADER)?;
    for c in coefficients {
        w.write_record([
            c.name.clone(),
            fmt_float(c.beta),
            fmt_float(c.standard_error),
            fmt_float(c.p_value),
            (c.p_value < alpha).to_string(),
        ])?;
    }
    finish(w, path)
}

pub const TRANSITION_HEADER: [&str; 5] = ["forum", "mean_days_high", "mean_days_low", "n_high", "n_low"];

/// A class with no transitions from a forum gets an empty mean cell.
pub fn write_transitions_csv(path: &Path, stats: &BTreeMap<String, TransitionStat>) -> Result<()> {
    let cell = |m: Option<f64>| m.map(fmt_float).unwrap_or_default();
    let mut w = writer(path)?;
    w.write_record(TRANSITION_HEADER)?;
    for (forum, s) in stats {
        w.write_record([
            forum.clone(),
            cell(s.mean_days_high),
            cell(s.mean_days_low),
            s.n_high.to_string(),
            s.n_low.to_string(),
        ])?;
    }
    finish(w, path)
}

const DATASET_PREFIX: [&str; 3] = ["user_id", "duration_days", "event"];

/// Columns `user_id, duration_days, event` then one column per feature.
pub fn write_dataset_csv(path: &Path, dataset: &SurvivalDataset) -> Result<()> {
    let mut w = writer(path)?;
    let header = DATASET_PREFIX
        .iter()
        .map(|s| s.to_string())
        .chain(dataset.feature_names.iter().cloned());
    w.write_record(header)?;
    for row in &dataset.rows {
        let fields = [
            row.user_id.clone(),
            fmt_float(row.duration_days),
            u8::from(row.event).to_string(),
        ]
        .into_iter()
        .chain(row.covariates.iter().map(|&v| fmt_float(v)));
        w.write_record(fields)?;
    }
    finish(w, path)
}

/// Inverse of [`write_dataset_csv`]. Origin indices are not stored and come
/// back as 0.
pub fn read_dataset_csv(path: &Path) -> Result<SurvivalDataset> {
    let mut r = reader(path)?;
    check_header(&mut r, &DATASET_PREFIX, path)?;
    let names: Vec<String> = r.headers()?.iter().skip(3).map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let event = match &rec[2] {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(Error::Serialization(format!("bad event flag {other:?}"))),
        };
        let covariates = rec.iter().skip(3).map(|f| parse(f, "covariate")).collect::<Result<_>>()?;
        rows.push(SurvivalRow {
            user_id: rec[0].to_owned(),
            origin_event_index: 0,
            duration_days: parse(&rec[1], "duration")?,
            event,
            covariates,
        });
    }
    SurvivalDataset::new(names, rows)
}

pub const TRUTH_HEADER: [&str; 2] = ["user_id", "target_timestamp"];

/// Ground truth: first target-forum timestamp per user, empty if none.
pub fn write_truth_csv(path: &Path, truth: &BTreeMap<String, Option<i64>>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRUTH_HEADER)?;
    for (user, t) in truth {
        w.write_record([user.clone(), t.map(|v| v.to_string()).unwrap_or_default()])?;
    }
    finish(w, path)
}

pub fn read_truth_csv(path: &Path) -> Result<BTreeMap<String, Option<i64>>> {
    let mut r = reader(path)?;
    check_header(&mut r, &TRUTH_HEADER, path)?;
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let t = match rec[1].trim() {
            "" => None,
            s => Some(parse(s, "timestamp")?),
        };
        out.insert(rec[0].to_owned(), t);
    }
    Ok(out)
}
