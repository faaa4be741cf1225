use std::collections::BTreeMap;
use std::io::Read;

use super::{order_case, parse_timestamp, Event, EventLog, LogError, Result};

/// Column mapping for CSV input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvConfig {
    pub case_column: String,
    pub activity_column: String,
    /// When `None`, a column literally named `timestamp` is used if present.
    pub timestamp_column: Option<String>,
    pub delimiter: u8,
}

impl Default for CsvConfig {
    fn default() -> Self {
        Self {
            case_column: "case".to_string(),
            activity_column: "activity".to_string(),
            timestamp_column: None,
            delimiter: b',',
        }
    }
}

pub fn parse_csv<R: Read>(input: R, config: &CsvConfig) -> Result<EventLog> {
    let mut reader =
        ::csv::ReaderBuilder::new().delimiter(config.delimiter).has_headers(true).flexible(false).from_reader(input);

    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(LogError::Empty);
    }
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let case_idx = column(&config.case_column).ok_or_else(|| LogError::MissingColumn(config.case_column.clone()))?;
    let activity_idx =
        column(&config.activity_column).ok_or_else(|| LogError::MissingColumn(config.activity_column.clone()))?;
    let ts_idx = match &config.timestamp_column {
        Some(name) => Some(column(name).ok_or_else(|| LogError::MissingColumn(name.clone()))?),
        None => column("timestamp"),
    };

    let mut case_order: Vec<String> = Vec::new();
    let mut cases: BTreeMap<String, Vec<Event>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let case_id = record.get(case_idx).unwrap_or_default().to_string();
        let activity = record.get(activity_idx).unwrap_or_default().to_string();
        if activity.is_empty() {
            return Err(LogError::EmptyActivity { row });
        }
        let timestamp = match ts_idx.map(|i| record.get(i).unwrap_or_default().trim()) {
            None | Some("") => None,
            Some(raw) => {
                Some(parse_timestamp(raw).ok_or_else(|| LogError::BadTimestamp { row, value: raw.to_string() })?)
            }
        };
        let attributes = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != case_idx && *i != activity_idx && Some(*i) != ts_idx)
            .map(|(i, h)| (h.to_string(), record.get(i).unwrap_or_default().to_string()))
            .collect();
        let events = cases.entry(case_id.clone()).or_insert_with(|| {
            case_order.push(case_id.clone());
            Vec::new()
        });
        events.push(Event { case_id, activity, timestamp, attributes });
    }
    if case_order.is_empty() {
        return Err(LogError::Empty);
    }

    let traces = case_order
        .into_iter()
        .map(|id| {
            let events = cases.remove(&id).unwrap_or_default();
            order_case(&id, events)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EventLog::new(traces))
}

/// Writes `case,activity` rows in trace order.
///
/// Empty traces have no rows and therefore do not survive a CSV round trip;
/// case ids must be unique for traces to be regrouped identically.
pub fn write_csv(log: &EventLog) -> String {
    let mut writer = ::csv::Writer::from_writer(Vec::new());
    writer.write_record(["case", "activity"]).expect("writing to memory");
    for trace in log.traces() {
        for activity in &trace.activities {
            writer.write_record([trace.case_id.as_str(), activity.as_str()]).expect("writing to memory");
        }
    }
    let bytes = writer.into_inner().expect("flushing to memory");
    String::from_utf8(bytes).expect("csv output is utf-8")
}
