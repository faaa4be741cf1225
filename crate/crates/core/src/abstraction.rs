//! Projection and abstraction of logs along an activity tree, and the
//! bottom-up construction of a hierarchical model.
//!
//! A subprocess occurrence is abstracted into two marker events named
//! `<label>+start` and `<label>+end`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activity_tree::{ActivityTree, InvalidTree, TreeError};
use crate::discovery::Discover;
use crate::event_log::{EventLog, Trace};
use crate::petri::PetriNet;

pub const START_SUFFIX: &str = "+start";
pub const END_SUFFIX: &str = "+end";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbstractionError {
    #[error("unknown tree node `{0}`")]
    UnknownNode(String),
    #[error("`{0}` is a leaf, not a subprocess")]
    NotSubprocess(String),
    #[error("subprocesses `{0}` and `{1}` are related; only unrelated subprocesses can be abstracted together")]
    RelatedNodes(String, String),
    #[error("log label `{0}` collides with a subprocess marker")]
    ReservedLabel(String),
    #[error(transparent)]
    InvalidTree(#[from] InvalidTree),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

pub type Result<T, E = AbstractionError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerKind {
    Plain,
    Start,
    End,
}

/// An event label split into its base label and marker kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarkedLabel {
    pub base: String,
    pub kind: MarkerKind,
}

impl MarkedLabel {
    pub fn plain(base: impl Into<String>) -> Self {
        Self { base: base.into(), kind: MarkerKind::Plain }
    }

    pub fn start(base: impl Into<String>) -> Self {
        Self { base: base.into(), kind: MarkerKind::Start }
    }

    pub fn end(base: impl Into<String>) -> Self {
        Self { base: base.into(), kind: MarkerKind::End }
    }

    /// Decodes a serialized label; labels without a marker suffix are plain.
    pub fn parse(label: &str) -> Self {
        if let Some(base) = label.strip_suffix(START_SUFFIX).filter(|b| !b.is_empty()) {
            Self::start(base)
        } else if let Some(base) = label.strip_suffix(END_SUFFIX).filter(|b| !b.is_empty()) {
            Self::end(base)
        } else {
            Self::plain(label)
        }
    }
}

impl fmt::Display for MarkedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MarkerKind::Plain => write!(f, "{}", self.base),
            MarkerKind::Start => write!(f, "{}{START_SUFFIX}", self.base),
            MarkerKind::End => write!(f, "{}{END_SUFFIX}", self.base),
        }
    }
}

pub fn start_marker(sp: &str) -> String {
    format!("{sp}{START_SUFFIX}")
}

pub fn end_marker(sp: &str) -> String {
    format!("{sp}{END_SUFFIX}")
}

/// Replaces both markers of a subprocess by its bare label.
pub fn collapse_markers(log: &EventLog) -> EventLog {
    log.filter_map_traces(|t| {
        let acts = t.iter().map(|a| MarkedLabel::parse(a).base);
        Some(Trace::new(t.case_id.clone(), acts))
    })
}

fn subprocess<'a>(tree: &ActivityTree, sp: &'a str) -> Result<&'a str> {
    if !tree.contains(sp) {
        Err(AbstractionError::UnknownNode(sp.to_string()))
    } else if tree.is_leaf(sp) {
        Err(AbstractionError::NotSubprocess(sp.to_string()))
    } else {
        Ok(sp)
    }
}

/// Labels a sublog of `sp` may contain: its leaf children plus the markers
/// of its subprocess children.
pub fn direct_labels(tree: &ActivityTree, sp: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for c in tree.children(sp) {
        if tree.is_leaf(c) {
            out.insert(c.clone());
        } else {
            out.insert(start_marker(c));
            out.insert(end_marker(c));
        }
    }
    out
}

/// Labels covered by an abstraction of `sp`: every leaf below it plus the
/// markers of every subprocess below it. This lets `sp` be abstracted
/// whether or not its descendants have been abstracted already.
pub fn subtree_labels(tree: &ActivityTree, sp: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for d in tree.descendants(sp) {
        if tree.is_leaf(&d) {
            out.insert(d);
        } else {
            out.insert(start_marker(&d));
            out.insert(end_marker(&d));
        }
    }
    out
}

/// Keeps exactly the events whose label is in `labels`, in order.
pub fn project(trace: &Trace, labels: &BTreeSet<String>) -> Trace {
    Trace {
        case_id: trace.case_id.clone(),
        activities: trace.activities.iter().filter(|a| labels.contains(*a)).cloned().collect(),
    }
}

/// Projects every trace onto the labels of `sp`, dropping traces that become empty.
pub fn project_log(log: &EventLog, tree: &ActivityTree, sp: &str) -> Result<EventLog> {
    let labels = direct_labels(tree, subprocess(tree, sp)?);
    Ok(log.filter_map_traces(|t| {
        let p = project(t, &labels);
        (!p.is_empty()).then_some(p)
    }))
}

/// Replaces the first event in `labels` by the start marker of `sp`, the
/// last by its end marker, and removes the ones in between. A single
/// matching event yields both markers. Traces without a matching event are
/// returned unchanged.
pub fn abstract_trace(trace: &Trace, sp: &str, labels: &BTreeSet<String>) -> Trace {
    let acts = &trace.activities;
    let first = acts.iter().position(|a| labels.contains(a));
    let last = acts.iter().rposition(|a| labels.contains(a));
    let (Some(first), Some(last)) = (first, last) else {
        return trace.clone();
    };
    let mut out = Vec::with_capacity(acts.len() + 1);
    for (i, a) in acts.iter().enumerate() {
        if i == first {
            out.push(start_marker(sp));
        }
        if !labels.contains(a) {
            out.push(a.clone());
        }
        if i == last {
            out.push(end_marker(sp));
        }
    }
    Trace { case_id: trace.case_id.clone(), activities: out }
}

/// Abstracts every trace on `sp`; no trace is ever dropped.
pub fn abstract_log(log: &EventLog, tree: &ActivityTree, sp: &str) -> Result<EventLog> {
    let labels = subtree_labels(tree, subprocess(tree, sp)?);
    Ok(abstract_with(log, sp, &labels))
}

fn abstract_with(log: &EventLog, sp: &str, labels: &BTreeSet<String>) -> EventLog {
    log.traces().par_iter().map(|t| abstract_trace(t, sp, labels)).collect::<Vec<_>>().into_iter().collect()
}

/// Abstracts the subprocesses in `hide` and leaves everything else flat.
/// The result does not depend on the order of `hide`.
pub fn selective_abstract<S: AsRef<str>>(log: &EventLog, tree: &ActivityTree, hide: &[S]) -> Result<EventLog> {
    let hide: BTreeSet<&str> = hide.iter().map(AsRef::as_ref).collect();
    for sp in &hide {
        subprocess(tree, sp)?;
    }
    let list: Vec<&str> = hide.into_iter().collect();
    for (i, x) in list.iter().enumerate() {
        for y in &list[i + 1..] {
            if tree.related(x, y) {
                return Err(AbstractionError::RelatedNodes(x.to_string(), y.to_string()));
            }
        }
    }
    let mut out = log.clone();
    for sp in list {
        out = abstract_log(&out, tree, sp)?;
    }
    Ok(out)
}

/// A tree together with one sublog and one discovered model per subprocess.
///
/// `log_map` has an entry for every subprocess, root included. A subprocess
/// whose miner failed appears in `failures` instead of `model_map`.
#[derive(Debug, Clone)]
pub struct HierarchicalModel {
    pub tree: ActivityTree,
    pub log_map: BTreeMap<String, EventLog>,
    pub model_map: BTreeMap<String, PetriNet>,
    pub failures: BTreeMap<String, String>,
}

impl HierarchicalModel {
    pub fn root(&self) -> &str {
        self.tree.root()
    }

    pub fn subprocesses(&self) -> Vec<String> {
        self.tree.subprocesses()
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Rejects logs containing labels that would be mistaken for subprocess markers.
fn check_reserved(log: &EventLog, tree: &ActivityTree) -> Result<()> {
    for a in log.alphabet() {
        let m = MarkedLabel::parse(a);
        if m.kind != MarkerKind::Plain && tree.contains(&m.base) && !tree.is_leaf(&m.base) {
            return Err(AbstractionError::ReservedLabel(a.clone()));
        }
    }
    Ok(())
}

/// Computes sublogs and models bottom-up.
///
/// Subprocesses are handled by increasing height. Those of equal height are
/// unrelated, so their sublogs are projected from the same abstracted log
/// and mined in parallel; the abstraction of the running log is then
/// applied for each of them in sorted order. The root receives the fully
/// abstracted log.
pub fn build_hierarchy<D: Discover + ?Sized>(
    log: &EventLog,
    tree: &ActivityTree,
    miner: &D,
) -> Result<HierarchicalModel> {
    tree.validate(log.alphabet())?;
    check_reserved(log, tree)?;
    let heights = tree.heights();
    let root_height = tree.height(tree.root())?;
    let mut levels: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (node, h) in heights {
        if h > 0 && h < root_height {
            levels.entry(h).or_default().push(node);
        }
    }

    let mut model = HierarchicalModel {
        tree: tree.clone(),
        log_map: BTreeMap::new(),
        model_map: BTreeMap::new(),
        failures: BTreeMap::new(),
    };
    let mut running = log.clone();
    for (h, nodes) in levels {
        log::debug!("height {h}: {} subprocesses", nodes.len());
        let mined: Vec<(String, EventLog, std::result::Result<PetriNet, String>)> = nodes
            .par_iter()
            .map(|sp| {
                let sublog = project_log(&running, tree, sp)?;
                let net = miner.discover(&sublog).map_err(|e| e.to_string());
                Ok((sp.clone(), sublog, net))
            })
            .collect::<Result<_>>()?;
        for (sp, sublog, net) in mined {
            running = abstract_log(&running, tree, &sp)?;
            model.record(sp, sublog, net);
        }
    }
    let root = tree.root().to_string();
    let net = miner.discover(&running).map_err(|e| e.to_string());
    model.record(root, running, net);
    Ok(model)
}

impl HierarchicalModel {
    fn record(&mut self, sp: String, sublog: EventLog, net: std::result::Result<PetriNet, String>) {
        match net {
            Ok(net) => {
                self.model_map.insert(sp.clone(), net);
            }
            Err(e) => {
                log::warn!("discovery failed for `{sp}`: {e}");
                self.failures.insert(sp.clone(), e);
            }
        }
        self.log_map.insert(sp, sublog);
    }
}
