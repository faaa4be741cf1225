use std::collections::BTreeMap;

use quick_xml::events::{BytesDecl, Event as XmlEvent};
use quick_xml::Writer;

use super::{order_case, parse_timestamp, Event, EventLog, LogError, Result};

const CONCEPT_NAME: &str = "concept:name";
const TIMESTAMP: &str = "time:timestamp";

/// Reads the `log > trace > event` skeleton of an XES document.
///
/// Trace names come from the trace-level `concept:name` (falling back to the
/// 1-based trace index); event labels from the event-level `concept:name`;
/// ordering from `time:timestamp` when present. Global attributes,
/// classifiers, extensions and nested attributes are ignored.
pub fn parse_xes(input: &str) -> Result<EventLog> {
    let doc = roxmltree::Document::parse(input).map_err(|e| LogError::Xml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "log" {
        return Err(LogError::Xml(format!("expected <log> root element, found <{}>", root.tag_name().name())));
    }

    let mut traces = Vec::new();
    for (trace_idx, trace_node) in
        root.children().filter(|n| n.is_element() && n.tag_name().name() == "trace").enumerate()
    {
        let case_id =
            keyed_value(trace_node, CONCEPT_NAME).map(str::to_string).unwrap_or_else(|| (trace_idx + 1).to_string());
        let mut events = Vec::new();
        for (event_idx, event_node) in
            trace_node.children().filter(|n| n.is_element() && n.tag_name().name() == "event").enumerate()
        {
            let activity = keyed_value(event_node, CONCEPT_NAME)
                .filter(|a| !a.is_empty())
                .ok_or_else(|| LogError::MissingConceptName { case: case_id.clone(), index: event_idx + 1 })?
                .to_string();
            let timestamp = match keyed_value(event_node, TIMESTAMP) {
                Some(raw) => Some(parse_timestamp(raw).ok_or_else(|| LogError::BadTimestamp {
                    row: doc.text_pos_at(event_node.range().start).row as usize,
                    value: raw.to_string(),
                })?),
                None => None,
            };
            let attributes: BTreeMap<String, String> = event_node
                .children()
                .filter(|n| n.is_element())
                .filter_map(|n| Some((n.attribute("key")?, n.attribute("value")?)))
                .filter(|(k, _)| *k != CONCEPT_NAME && *k != TIMESTAMP)
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect();
            events.push(Event { case_id: case_id.clone(), activity, timestamp, attributes });
        }
        traces.push(order_case(&case_id, events)?);
    }
    Ok(EventLog::new(traces))
}

fn keyed_value<'a>(node: roxmltree::Node<'a, '_>, key: &str) -> Option<&'a str> {
    node.children()
        .filter(|n| n.is_element())
        .find(|n| n.attribute("key") == Some(key))
        .and_then(|n| n.attribute("value"))
}

/// Writes a log as XES with `concept:name` on traces and events.
pub fn write_xes(log: &EventLog) -> String {
    let mut writer = Writer::new_with_indent(Vec::new(), b' ', 2);
    writer.write_event(XmlEvent::Decl(BytesDecl::new("1.0", Some("UTF-8"), None))).expect("writing to memory");
    writer
        .create_element("log")
        .with_attribute(("xes.version", "1.0"))
        .with_attribute(("xmlns", "http://www.xes-standard.org/"))
        .write_inner_content(|w| {
            w.create_element("extension")
                .with_attribute(("name", "Concept"))
                .with_attribute(("prefix", "concept"))
                .with_attribute(("uri", "http://www.xes-standard.org/concept.xesext"))
                .write_empty()?;
            for trace in log.traces() {
                w.create_element("trace").write_inner_content(|w| {
                    string_attr(w, CONCEPT_NAME, &trace.case_id)?;
                    for activity in &trace.activities {
                        w.create_element("event").write_inner_content(|w| string_attr(w, CONCEPT_NAME, activity))?;
                    }
                    Ok(())
                })?;
            }
            Ok(())
        })
        .expect("writing to memory");
    let mut out = String::from_utf8(writer.into_inner()).expect("xml output is utf-8");
    out.push('\n');
    out
}

fn string_attr<W: std::io::Write>(w: &mut Writer<W>, key: &str, value: &str) -> std::io::Result<()> {
    w.create_element("string").with_attribute(("key", key)).with_attribute(("value", value)).write_empty()?;
    Ok(())
}
