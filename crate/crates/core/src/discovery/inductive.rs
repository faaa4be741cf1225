//! Simplified Inductive Miner with infrequent-behaviour filtering.
//!
//! The recursion detects exclusive-choice, sequence, parallel and loop cuts
//! on the directly-follows graph of the current sublog, splits the sublog
//! along the cut and recurses. When no cut exists on the full graph and the
//! noise threshold is positive, the cuts are retried on a filtered graph and
//! the split drops the deviating events. If still no cut is found the
//! recursion falls through to a flower model.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::dfg::DirectlyFollowsGraph;
use super::ProcessTree;
use crate::event_log::EventLog;

type SubLog = BTreeMap<Vec<String>, usize>;

/// Discovers a process tree; with `noise_threshold == 0` every trace of
/// `log` is in the language of the result.
pub fn discover_inductive(log: &EventLog, noise_threshold: f64) -> ProcessTree {
    let sublog: SubLog = log.variants().into_iter().collect();
    mine(sublog, noise_threshold)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Cut {
    Xor(Vec<Vec<String>>),
    Sequence(Vec<Vec<String>>),
    Parallel(Vec<Vec<String>>),
    /// Do-part first, then redo parts.
    Loop(Vec<Vec<String>>),
}

fn mine(mut log: SubLog, threshold: f64) -> ProcessTree {
    let total: usize = log.values().sum();
    let empty = log.get(&Vec::new()).copied().unwrap_or(0);
    if empty == total {
        return ProcessTree::Silent;
    }
    if empty > 0 {
        log.remove(&Vec::new());
        if !(threshold > 0.0 && (empty as f64) < threshold * total as f64) {
            return xor(vec![ProcessTree::Silent, mine(log, threshold)]);
        }
    }

    let alphabet: BTreeSet<String> = log.keys().flatten().cloned().collect();
    if alphabet.len() == 1 {
        let a = alphabet.into_iter().next().expect("one activity");
        let once = log.keys().all(|t| t.len() == 1);
        return if once {
            ProcessTree::Activity(a)
        } else {
            ProcessTree::Loop(vec![ProcessTree::Activity(a), ProcessTree::Silent])
        };
    }

    let mut dfg = DirectlyFollowsGraph::default();
    for (seq, &c) in &log {
        dfg.add_sequence(seq, c);
    }
    let cut = find_cut(&alphabet, &dfg).or_else(|| {
        if threshold > 0.0 {
            find_cut(&alphabet, &dfg.filtered(threshold))
        } else {
            None
        }
    });

    match cut {
        Some(Cut::Xor(groups)) => xor(split_xor(&log, &groups).into_iter().map(|l| mine(l, threshold)).collect()),
        Some(Cut::Sequence(groups)) => {
            sequence(split_sequence(&log, &groups).into_iter().map(|l| mine(l, threshold)).collect())
        }
        Some(Cut::Parallel(groups)) => {
            parallel(split_parallel(&log, &groups).into_iter().map(|l| mine(l, threshold)).collect())
        }
        Some(Cut::Loop(groups)) => {
            ProcessTree::Loop(split_loop(&log, &groups).into_iter().map(|l| mine(l, threshold)).collect())
        }
        None => flower(&alphabet),
    }
}

fn flower(alphabet: &BTreeSet<String>) -> ProcessTree {
    let acts = alphabet.iter().cloned().map(ProcessTree::Activity).collect();
    ProcessTree::Loop(vec![ProcessTree::Silent, xor(acts)])
}

fn flatten(children: Vec<ProcessTree>, same: fn(&ProcessTree) -> Option<&Vec<ProcessTree>>) -> Vec<ProcessTree> {
    let mut out = Vec::with_capacity(children.len());
    for c in children {
        match same(&c) {
            Some(grand) => out.extend(grand.iter().cloned()),
            None => out.push(c),
        }
    }
    out
}

fn xor(children: Vec<ProcessTree>) -> ProcessTree {
    let mut c = flatten(children, |t| match t {
        ProcessTree::Xor(g) => Some(g),
        _ => None,
    });
    if c.len() == 1 {
        return c.pop().expect("one child");
    }
    ProcessTree::Xor(c)
}

fn sequence(children: Vec<ProcessTree>) -> ProcessTree {
    let mut c = flatten(children, |t| match t {
        ProcessTree::Sequence(g) => Some(g),
        _ => None,
    });
    if c.len() == 1 {
        return c.pop().expect("one child");
    }
    ProcessTree::Sequence(c)
}

fn parallel(children: Vec<ProcessTree>) -> ProcessTree {
    let mut c = flatten(children, |t| match t {
        ProcessTree::Parallel(g) => Some(g),
        _ => None,
    });
    if c.len() == 1 {
        return c.pop().expect("one child");
    }
    ProcessTree::Parallel(c)
}

fn find_cut(alphabet: &BTreeSet<String>, dfg: &DirectlyFollowsGraph) -> Option<Cut> {
    let g = Graph::new(alphabet, dfg);
    g.xor_cut()
        .map(Cut::Xor)
        .or_else(|| g.sequence_cut().map(Cut::Sequence))
        .or_else(|| g.parallel_cut().map(Cut::Parallel))
        .or_else(|| g.loop_cut().map(Cut::Loop))
}

/// Index-based view of a DFG for cut detection.
struct Graph {
    names: Vec<String>,
    succ: Vec<BTreeSet<usize>>,
    pred: Vec<BTreeSet<usize>>,
    start: BTreeSet<usize>,
    end: BTreeSet<usize>,
}

impl Graph {
    fn new(alphabet: &BTreeSet<String>, dfg: &DirectlyFollowsGraph) -> Self {
        let names: Vec<String> = alphabet.iter().cloned().collect();
        let idx: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let n = names.len();
        let mut succ = vec![BTreeSet::new(); n];
        let mut pred = vec![BTreeSet::new(); n];
        for (a, b) in dfg.edges.keys() {
            let (i, j) = (idx[a.as_str()], idx[b.as_str()]);
            succ[i].insert(j);
            pred[j].insert(i);
        }
        Self {
            start: dfg.start.keys().map(|a| idx[a.as_str()]).collect(),
            end: dfg.end.keys().map(|a| idx[a.as_str()]).collect(),
            names,
            succ,
            pred,
        }
    }

    fn n(&self) -> usize {
        self.names.len()
    }

    fn edge(&self, a: usize, b: usize) -> bool {
        self.succ[a].contains(&b)
    }

    fn labels(&self, groups: Vec<Vec<usize>>) -> Vec<Vec<String>> {
        groups.into_iter().map(|g| g.into_iter().map(|i| self.names[i].clone()).collect()).collect()
    }

    /// Connected components of the undirected graph on `nodes` induced by `linked`.
    fn components(&self, nodes: &[usize], linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.n());
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if linked(a, b) {
                    uf.union(a, b);
                }
            }
        }
        uf.groups(nodes)
    }

    fn xor_cut(&self) -> Option<Vec<Vec<String>>> {
        let all: Vec<usize> = (0..self.n()).collect();
        let comps = self.components(&all, |a, b| self.edge(a, b) || self.edge(b, a));
        (comps.len() > 1).then(|| self.labels(comps))
    }

    fn reachability(&self) -> Vec<Vec<bool>> {
        (0..self.n())
            .map(|s| {
                let mut seen = vec![false; self.n()];
                let mut queue: VecDeque<usize> = self.succ[s].iter().copied().collect();
                while let Some(x) = queue.pop_front() {
                    if !seen[x] {
                        seen[x] = true;
                        queue.extend(self.succ[x].iter().copied());
                    }
                }
                seen
            })
            .collect()
    }

    fn sequence_cut(&self) -> Option<Vec<Vec<String>>> {
        let reach = self.reachability();
        let all: Vec<usize> = (0..self.n()).collect();
        let mut groups = self.components(&all, |a, b| reach[a][b] == reach[b][a]);
        if groups.len() < 2 {
            return None;
        }
        groups.sort_by(|x, y| {
            let (a, b) = (x[0], y[0]);
            match (reach[a][b], reach[b][a]) {
                (true, false) => std::cmp::Ordering::Less,
                (false, true) => std::cmp::Ordering::Greater,
                _ => std::cmp::Ordering::Equal,
            }
        });
        for (i, gi) in groups.iter().enumerate() {
            for gj in &groups[i + 1..] {
                for &x in gi {
                    for &y in gj {
                        if !reach[x][y] || reach[y][x] {
                            return None;
                        }
                    }
                }
            }
        }
        Some(self.labels(groups))
    }

    fn parallel_cut(&self) -> Option<Vec<Vec<String>>> {
        let all: Vec<usize> = (0..self.n()).collect();
        let comps = self.components(&all, |a, b| !(self.edge(a, b) && self.edge(b, a)));
        let complete =
            |g: &Vec<usize>| g.iter().any(|x| self.start.contains(x)) && g.iter().any(|x| self.end.contains(x));
        let (mut ok, incomplete): (Vec<_>, Vec<_>) = comps.into_iter().partition(complete);
        if ok.is_empty() {
            return None;
        }
        for g in incomplete {
            ok[0].extend(g);
        }
        for g in &mut ok {
            g.sort_unstable();
        }
        ok.sort();
        (ok.len() > 1).then(|| self.labels(ok))
    }

    fn loop_cut(&self) -> Option<Vec<Vec<String>>> {
        let mut body: BTreeSet<usize> = self.start.union(&self.end).copied().collect();
        let rest: Vec<usize> = (0..self.n()).filter(|x| !body.contains(x)).collect();
        if rest.is_empty() {
            return None;
        }
        let mut redo = self.components(&rest, |a, b| self.edge(a, b) || self.edge(b, a));
        loop {
            let before = redo.len();
            redo.retain(|comp| {
                let valid = self.valid_redo(comp, &body);
                if !valid {
                    body.extend(comp.iter().copied());
                }
                valid
            });
            if redo.len() == before {
                break;
            }
        }
        if redo.is_empty() {
            return None;
        }
        let mut groups = vec![body.into_iter().collect::<Vec<_>>()];
        groups.extend(redo);
        Some(self.labels(groups))
    }

    /// A redo component is entered only from end activities, left only
    /// towards start activities, and connected uniformly to all of them.
    fn valid_redo(&self, comp: &[usize], body: &BTreeSet<usize>) -> bool {
        let mut entered = false;
        let mut left = false;
        for &y in comp {
            let from_body: Vec<usize> = self.pred[y].iter().copied().filter(|x| body.contains(x)).collect();
            if from_body.iter().any(|x| !self.end.contains(x)) {
                return false;
            }
            if !from_body.is_empty() {
                entered = true;
                if !self.end.iter().all(|&e| self.edge(e, y)) {
                    return false;
                }
            }
            let to_body: Vec<usize> = self.succ[y].iter().copied().filter(|x| body.contains(x)).collect();
            if to_body.iter().any(|x| !self.start.contains(x)) {
                return false;
            }
            if !to_body.is_empty() {
                left = true;
                if !self.start.iter().all(|&s| self.edge(y, s)) {
                    return false;
                }
            }
        }
        entered && left
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut x = x;
        while self.0[x] != r {
            let next = self.0[x];
            self.0[x] = r;
            x = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }

    /// Groups of `nodes` by representative, each sorted, ordered by smallest member.
    fn groups(&mut self, nodes: &[usize]) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &x in nodes {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        let mut groups: Vec<Vec<usize>> = by_root.into_values().collect();
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.sort();
        groups
    }
}

fn group_index(groups: &[Vec<String>]) -> BTreeMap<&str, usize> {
    groups.iter().enumerate().flat_map(|(i, g)| g.iter().map(move |a| (a.as_str(), i))).collect()
}

fn add(log: &mut SubLog, seq: Vec<String>, count: usize) {
    *log.entry(seq).or_default() += count;
}

/// Each trace goes to the group holding most of its events; the others are dropped.
fn split_xor(log: &SubLog, groups: &[Vec<String>]) -> Vec<SubLog> {
    let index = group_index(groups);
    let mut out = vec![SubLog::new(); groups.len()];
    for (seq, &c) in log {
        let mut votes = vec![0usize; groups.len()];
        for a in seq {
            votes[index[a.as_str()]] += 1;
        }
        let best = (0..groups.len()).max_by_key(|&i| (votes[i], std::cmp::Reverse(i))).unwrap_or(0);
        let kept = seq.iter().filter(|a| index[a.as_str()] == best).cloned().collect();
        add(&mut out[best], kept, c);
    }
    out
}

/// Events are assigned to their group while group order is respected;
/// out-of-order events are dropped.
fn split_sequence(log: &SubLog, groups: &[Vec<String>]) -> Vec<SubLog> {
    let index = group_index(groups);
    let mut out = vec![SubLog::new(); groups.len()];
    for (seq, &c) in log {
        let mut parts: Vec<Vec<String>> = vec![Vec::new(); groups.len()];
        let mut at = 0;
        for a in seq {
            let g = index[a.as_str()];
            if g >= at {
                at = g;
                parts[g].push(a.clone());
            }
        }
        for (i, p) in parts.into_iter().enumerate() {
            add(&mut out[i], p, c);
        }
    }
    out
}

fn split_parallel(log: &SubLog, groups: &[Vec<String>]) -> Vec<SubLog> {
    let index = group_index(groups);
    let mut out = vec![SubLog::new(); groups.len()];
    for (seq, &c) in log {
        for (i, sub) in out.iter_mut().enumerate() {
            let part = seq.iter().filter(|a| index[a.as_str()] == i).cloned().collect();
            add(sub, part, c);
        }
    }
    out
}

/// Cuts every trace into maximal same-group segments. Body segments go to
/// the body sublog, redo segments to their component; an empty body
/// iteration is inserted wherever two redo segments touch or a trace starts
/// or ends in a redo part.
fn split_loop(log: &SubLog, groups: &[Vec<String>]) -> Vec<SubLog> {
    let index = group_index(groups);
    let mut out = vec![SubLog::new(); groups.len()];
    for (seq, &c) in log {
        let mut segments: Vec<(usize, Vec<String>)> = Vec::new();
        for a in seq {
            let g = index[a.as_str()];
            match segments.last_mut() {
                Some((sg, part)) if *sg == g => part.push(a.clone()),
                _ => segments.push((g, vec![a.clone()])),
            }
        }
        let mut expect_body = true;
        for (g, part) in segments {
            let is_body = g == 0;
            if expect_body && !is_body {
                add(&mut out[0], Vec::new(), c);
            }
            add(&mut out[g], part, c);
            expect_body = !is_body;
        }
        if expect_body {
            add(&mut out[0], Vec::new(), c);
        }
    }
    out
}
