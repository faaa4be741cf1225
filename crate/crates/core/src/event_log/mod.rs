//! Event logs as multisets of activity sequences.
//!
//! A log is read from CSV or from a minimal XES subset. Events are grouped
//! into traces by case identifier and ordered by timestamp when timestamps
//! are present (stable: ties keep source order), otherwise by source order.
//!
//! Only the case identifier and the ordered activity labels survive parsing.
//! Timestamps are consumed for ordering and other attributes are dropped, so
//! writing a log and parsing it back yields an equal [`EventLog`].

mod csv;
mod xes;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

pub use self::csv::{parse_csv, write_csv, CsvConfig};
pub use self::xes::{parse_xes, write_xes};

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("input is empty")]
    Empty,
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("row {row}: malformed timestamp `{value}`")]
    BadTimestamp { row: usize, value: String },
    #[error("row {row}: empty activity label")]
    EmptyActivity { row: usize },
    #[error("case `{0}` mixes events with and without timestamps")]
    MixedTimestamps(String),
    #[error("event {index} in trace `{case}` has no concept:name")]
    MissingConceptName { case: String, index: usize },
    #[error("csv: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("xml: {0}")]
    Xml(String),
    #[error("unknown log format `{0}`")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = LogError> = std::result::Result<T, E>;

/// A single recorded event, as read from a source row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub case_id: String,
    pub activity: String,
    pub timestamp: Option<DateTime<FixedOffset>>,
    pub attributes: BTreeMap<String, String>,
}

/// The ordered activity sequence of one case.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub activities: Vec<String>,
}

impl Trace {
    pub fn new<S: Into<String>>(case_id: impl Into<String>, activities: impl IntoIterator<Item = S>) -> Self {
        Self { case_id: case_id.into(), activities: activities.into_iter().map(Into::into).collect() }
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.activities.iter().map(String::as_str)
    }
}

/// A multiset of traces together with its alphabet.
///
/// Traces keep insertion order; duplicates are allowed and counted. The
/// alphabet is always the exact set of labels occurring in the traces.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventLog {
    traces: Vec<Trace>,
    alphabet: BTreeSet<String>,
}

impl EventLog {
    pub fn new(traces: Vec<Trace>) -> Self {
        let alphabet = traces.iter().flat_map(|t| t.activities.iter().cloned()).collect();
        Self { traces, alphabet }
    }

    /// Builds a log from bare activity sequences, numbering cases from 1.
    pub fn from_sequences<I, T, S>(sequences: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let traces = sequences.into_iter().enumerate().map(|(i, seq)| Trace::new((i + 1).to_string(), seq)).collect();
        Self::new(traces)
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn into_traces(self) -> Vec<Trace> {
        self.traces
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    /// Distinct activity sequences with their multiplicities, in sorted order.
    pub fn variants(&self) -> Vec<(Vec<String>, usize)> {
        let mut counts: BTreeMap<&[String], usize> = BTreeMap::new();
        for t in &self.traces {
            *counts.entry(t.activities.as_slice()).or_default() += 1;
        }
        counts.into_iter().map(|(k, v)| (k.to_vec(), v)).collect()
    }

    /// Multiset equality on activity sequences, ignoring case ids and order.
    pub fn same_multiset(&self, other: &EventLog) -> bool {
        self.variants() == other.variants()
    }

    /// Applies `f` to every trace, dropping traces for which it returns `None`.
    pub fn filter_map_traces<F>(&self, mut f: F) -> EventLog
    where
        F: FnMut(&Trace) -> Option<Trace>,
    {
        EventLog::new(self.traces.iter().filter_map(&mut f).collect())
    }
}

impl FromIterator<Trace> for EventLog {
    fn from_iter<I: IntoIterator<Item = Trace>>(iter: I) -> Self {
        EventLog::new(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogFormat {
    Csv,
    Xes,
}

impl LogFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        ext.parse().ok()
    }

    pub fn extension(self) -> &'static str {
        match self {
            LogFormat::Csv => "csv",
            LogFormat::Xes => "xes",
        }
    }
}

impl FromStr for LogFormat {
    type Err = LogError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(LogFormat::Csv),
            "xes" => Ok(LogFormat::Xes),
            other => Err(LogError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for LogFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Parses a log in the given format using default CSV settings.
pub fn parse_log(input: &str, format: LogFormat) -> Result<EventLog> {
    match format {
        LogFormat::Csv => parse_csv(input.as_bytes(), &CsvConfig::default()),
        LogFormat::Xes => parse_xes(input),
    }
}

pub fn write_log(log: &EventLog, format: LogFormat) -> String {
    match format {
        LogFormat::Csv => write_csv(log),
        LogFormat::Xes => write_xes(log),
    }
}

/// Accepts RFC 3339, `YYYY-MM-DD[ T]HH:MM:SS[.f]` (read as UTC) and bare dates.
pub(crate) fn parse_timestamp(value: &str) -> Option<DateTime<FixedOffset>> {
    let value = value.trim();
    if let Ok(ts) = DateTime::parse_from_rfc3339(value) {
        return Some(ts);
    }
    let utc = FixedOffset::east_opt(0)?;
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(value, fmt) {
            return Some(naive.and_utc().with_timezone(&utc));
        }
    }
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|naive| naive.and_utc().with_timezone(&utc))
}

/// Orders the events of one case: stable sort by timestamp if every event has
/// one, source order if none has one.
pub(crate) fn order_case(case_id: &str, mut events: Vec<Event>) -> Result<Trace> {
    let stamped = events.iter().filter(|e| e.timestamp.is_some()).count();
    if stamped != 0 && stamped != events.len() {
        return Err(LogError::MixedTimestamps(case_id.to_string()));
    }
    if stamped != 0 {
        events.sort_by_key(|e| e.timestamp);
    }
    Ok(Trace { case_id: case_id.to_string(), activities: events.into_iter().map(|e| e.activity).collect() })
}
