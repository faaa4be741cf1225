use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::event_log::EventLog;
use crate::petri::{Marking, PetriNet};

/// Directly-follows counts with artificial start/end represented by the
/// `start` and `end` maps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DirectlyFollowsGraph {
    pub activities: BTreeMap<String, usize>,
    pub edges: BTreeMap<(String, String), usize>,
    pub start: BTreeMap<String, usize>,
    pub end: BTreeMap<String, usize>,
    pub empty_traces: usize,
}

impl DirectlyFollowsGraph {
    pub fn from_log(log: &EventLog) -> Self {
        let mut dfg = Self::default();
        for (seq, count) in log.variants() {
            dfg.add_sequence(&seq, count);
        }
        dfg
    }

    pub(crate) fn add_sequence(&mut self, seq: &[String], count: usize) {
        let (Some(first), Some(last)) = (seq.first(), seq.last()) else {
            self.empty_traces += count;
            return;
        };
        *self.start.entry(first.clone()).or_default() += count;
        *self.end.entry(last.clone()).or_default() += count;
        for a in seq {
            *self.activities.entry(a.clone()).or_default() += count;
        }
        for w in seq.windows(2) {
            *self.edges.entry((w[0].clone(), w[1].clone())).or_default() += count;
        }
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges.contains_key(&(a.to_string(), b.to_string()))
    }

    /// Keeps an edge `a→b` (or `a→end`) only if its count reaches
    /// `threshold` times the strongest outgoing count of `a`; start
    /// activities are filtered against the strongest start count.
    pub fn filtered(&self, threshold: f64) -> Self {
        let mut max_out: BTreeMap<&str, usize> = BTreeMap::new();
        for ((a, _), &c) in &self.edges {
            let m = max_out.entry(a.as_str()).or_default();
            *m = (*m).max(c);
        }
        for (a, &c) in &self.end {
            let m = max_out.entry(a.as_str()).or_default();
            *m = (*m).max(c);
        }
        let keep = |c: usize, max: usize| c as f64 >= threshold * max as f64;
        let max_start = self.start.values().copied().max().unwrap_or(0);
        Self {
            activities: self.activities.clone(),
            edges: self
                .edges
                .iter()
                .filter(|((a, _), &c)| keep(c, max_out[a.as_str()]))
                .map(|(k, &c)| (k.clone(), c))
                .collect(),
            start: self.start.iter().filter(|(_, &c)| keep(c, max_start)).map(|(k, &c)| (k.clone(), c)).collect(),
            end: self.end.iter().filter(|(a, &c)| keep(c, max_out[a.as_str()])).map(|(k, &c)| (k.clone(), c)).collect(),
            empty_traces: self.empty_traces,
        }
    }

    fn reachable_from_start(&self) -> BTreeSet<String> {
        let mut seen: BTreeSet<String> = self.start.keys().cloned().collect();
        let mut queue: VecDeque<String> = seen.iter().cloned().collect();
        while let Some(a) = queue.pop_front() {
            for (x, y) in self.edges.keys() {
                if *x == a && seen.insert(y.clone()) {
                    queue.push_back(y.clone());
                }
            }
        }
        seen
    }

    fn coreachable_to_end(&self) -> BTreeSet<String> {
        let mut seen: BTreeSet<String> = self.end.keys().cloned().collect();
        let mut queue: VecDeque<String> = seen.iter().cloned().collect();
        while let Some(b) = queue.pop_front() {
            for (x, y) in self.edges.keys() {
                if *y == b && seen.insert(x.clone()) {
                    queue.push_back(x.clone());
                }
            }
        }
        seen
    }

    /// Re-adds the strongest original connections until every activity is
    /// reachable from start and can reach end again.
    pub(crate) fn repair_connectivity(&mut self, original: &DirectlyFollowsGraph) {
        loop {
            let reached = self.reachable_from_start();
            if reached.len() == self.activities.len() {
                break;
            }
            let from_start =
                original.start.iter().filter(|(a, _)| !reached.contains(*a)).map(|(a, &c)| (c, None, a.clone()));
            let from_reached = original
                .edges
                .iter()
                .filter(|((x, y), _)| reached.contains(x) && !reached.contains(y))
                .map(|((x, y), &c)| (c, Some(x.clone()), y.clone()));
            let best = from_start.chain(from_reached).max_by(|l, r| l.0.cmp(&r.0).then_with(|| r.cmp(l)));
            match best {
                Some((c, None, a)) => {
                    self.start.insert(a, c);
                }
                Some((c, Some(x), y)) => {
                    self.edges.insert((x, y), c);
                }
                None => break,
            }
        }
        loop {
            let reaching = self.coreachable_to_end();
            if reaching.len() == self.activities.len() {
                break;
            }
            let to_end =
                original.end.iter().filter(|(a, _)| !reaching.contains(*a)).map(|(a, &c)| (c, a.clone(), None));
            let to_reaching = original
                .edges
                .iter()
                .filter(|((x, y), _)| !reaching.contains(x) && reaching.contains(y))
                .map(|((x, y), &c)| (c, x.clone(), Some(y.clone())));
            let best = to_end.chain(to_reaching).max_by(|l, r| l.0.cmp(&r.0).then_with(|| r.cmp(l)));
            match best {
                Some((c, a, None)) => {
                    self.end.insert(a, c);
                }
                Some((c, x, Some(y))) => {
                    self.edges.insert((x, y), c);
                }
                None => break,
            }
        }
    }
}

/// Directly-follows miner.
///
/// Produces a state machine: a source place, one place per activity (the
/// state after that activity), one labelled transition per retained start
/// activity and per retained edge. With a single end activity and no empty
/// traces its place is final; otherwise silent transitions lead every end
/// activity (and the source, for empty traces) to a sink.
pub fn discover_dfg(log: &EventLog, edge_filter: f64) -> PetriNet {
    let original = DirectlyFollowsGraph::from_log(log);
    let mut dfg = original.filtered(edge_filter);
    dfg.repair_connectivity(&original);

    let mut net = PetriNet::new();
    let source = net.add_place("source");
    let state: BTreeMap<&str, usize> =
        dfg.activities.keys().enumerate().map(|(i, a)| (a.as_str(), net.add_place(format!("p{i}")))).collect();
    let mut t_count = 0;
    let mut labelled = |net: &mut PetriNet, label: Option<&str>| {
        let id = match label {
            Some(_) => format!("t{t_count}"),
            None => format!("tau{t_count}"),
        };
        t_count += 1;
        net.add_transition(id, label.map(str::to_string))
    };
    for a in dfg.start.keys() {
        let t = labelled(&mut net, Some(a));
        net.arc_pt(source, t);
        net.arc_tp(t, state[a.as_str()]);
    }
    for (a, b) in dfg.edges.keys() {
        let t = labelled(&mut net, Some(b));
        net.arc_pt(state[a.as_str()], t);
        net.arc_tp(t, state[b.as_str()]);
    }
    let final_place = match (dfg.end.len(), dfg.empty_traces) {
        (1, 0) => state[dfg.end.keys().next().expect("one end activity").as_str()],
        _ => {
            let sink = net.add_place("sink");
            for a in dfg.end.keys() {
                let t = labelled(&mut net, None);
                net.arc_pt(state[a.as_str()], t);
                net.arc_tp(t, sink);
            }
            if dfg.empty_traces > 0 {
                let t = labelled(&mut net, None);
                net.arc_pt(source, t);
                net.arc_tp(t, sink);
            }
            sink
        }
    };
    let n = net.places().len();
    net.set_initial_marking(Marking::from_places(n, &[source]));
    net.set_final_marking(Marking::from_places(n, &[final_place]));
    net
}
