//! Reference implementations used as test oracles. They favour obviousness
//! over speed and share no code with the library's algorithms.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use flexh_core::activity_tree::ActivityTree;
use flexh_core::discovery::ProcessTree;
use flexh_core::event_log::EventLog;
use flexh_core::petri::{Marking, PetriNet};
use rand::Rng;

pub type Word = Vec<String>;

fn concat(xs: &BTreeSet<Word>, ys: &BTreeSet<Word>, max_len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for x in xs {
        for y in ys {
            if x.len() + y.len() <= max_len {
                out.insert(x.iter().chain(y).cloned().collect());
            }
        }
    }
    out
}

fn shuffles(x: &[String], y: &[String], out: &mut BTreeSet<Word>, prefix: &mut Word) {
    if x.is_empty() || y.is_empty() {
        let mut w = prefix.clone();
        w.extend(x.iter().chain(y).cloned());
        out.insert(w);
        return;
    }
    prefix.push(x[0].clone());
    shuffles(&x[1..], y, out, prefix);
    prefix.pop();
    prefix.push(y[0].clone());
    shuffles(x, &y[1..], out, prefix);
    prefix.pop();
}

fn interleave(xs: &BTreeSet<Word>, ys: &BTreeSet<Word>, max_len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for x in xs {
        for y in ys {
            if x.len() + y.len() <= max_len {
                shuffles(x, y, &mut out, &mut Vec::new());
            }
        }
    }
    out
}

/// All words of length at most `max_len` in the language of `tree`.
pub fn tree_language(tree: &ProcessTree, max_len: usize) -> BTreeSet<Word> {
    match tree {
        ProcessTree::Activity(a) => {
            if max_len >= 1 {
                BTreeSet::from([vec![a.clone()]])
            } else {
                BTreeSet::new()
            }
        }
        ProcessTree::Silent => BTreeSet::from([Vec::new()]),
        ProcessTree::Sequence(kids) => {
            kids.iter().fold(BTreeSet::from([Vec::new()]), |acc, k| concat(&acc, &tree_language(k, max_len), max_len))
        }
        ProcessTree::Xor(kids) => kids.iter().flat_map(|k| tree_language(k, max_len)).collect(),
        ProcessTree::Parallel(kids) => kids
            .iter()
            .fold(BTreeSet::from([Vec::new()]), |acc, k| interleave(&acc, &tree_language(k, max_len), max_len)),
        ProcessTree::Loop(kids) => {
            let body = tree_language(&kids[0], max_len);
            let redo: BTreeSet<Word> = kids[1..].iter().flat_map(|k| tree_language(k, max_len)).collect();
            let mut all = body.clone();
            loop {
                let more = concat(&concat(&all, &redo, max_len), &body, max_len);
                let before = all.len();
                all.extend(more);
                if all.len() == before {
                    return all;
                }
            }
        }
    }
}

/// Reachable (position, marking) pairs of the synchronous product, or
/// `None` if there are more than `limit`.
fn product_states(trace: &[String], net: &PetriNet, cap: u32, limit: usize) -> Option<Vec<(usize, Marking)>> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    let start = (0usize, net.initial_marking().clone());
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some((i, m)) = queue.pop_front() {
        let mut next = Vec::new();
        if i < trace.len() {
            next.push((i + 1, m.clone()));
        }
        for t in net.enabled(&m) {
            let nm = net.fire_bounded(&m, t, cap).ok()?;
            if let Some(l) = &net.transitions()[t].label {
                if i < trace.len() && *l == trace[i] {
                    next.push((i + 1, nm.clone()));
                }
            }
            next.push((i, nm));
        }
        for s in next {
            if seen.insert(s.clone()) {
                if seen.len() > limit {
                    return None;
                }
                queue.push_back(s);
            }
        }
    }
    Some(seen.into_iter().collect())
}

pub fn product_size(trace: &[String], net: &PetriNet, limit: usize) -> Option<usize> {
    product_states(trace, net, 2, limit).map(|s| s.len())
}

/// Minimal alignment cost (log and visible model moves 1, others 0) by
/// Bellman-Ford relaxation over the explicitly enumerated product.
pub fn exhaustive_alignment_cost(trace: &[String], net: &PetriNet, limit: usize) -> Option<u64> {
    let states = product_states(trace, net, 2, limit)?;
    let index: HashMap<&(usize, Marking), usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut edges = Vec::new();
    for (from, (i, m)) in states.iter().enumerate() {
        if *i < trace.len() {
            edges.push((from, index[&(i + 1, m.clone())], 1u64));
        }
        for t in net.enabled(m) {
            let nm = net.fire_bounded(m, t, 2).ok()?;
            match &net.transitions()[t].label {
                None => edges.push((from, index[&(*i, nm)], 0)),
                Some(l) => {
                    if *i < trace.len() && *l == trace[*i] {
                        edges.push((from, index[&(i + 1, nm.clone())], 0));
                    }
                    edges.push((from, index[&(*i, nm)], 1));
                }
            }
        }
    }
    let mut dist = vec![u64::MAX; states.len()];
    dist[index[&(0, net.initial_marking().clone())]] = 0;
    loop {
        let mut changed = false;
        for &(a, b, c) in &edges {
            if dist[a] != u64::MAX && dist[a] + c < dist[b] {
                dist[b] = dist[a] + c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let goal = (trace.len(), net.final_marking().clone());
    index.get(&goal).map(|&g| dist[g]).filter(|&d| d != u64::MAX)
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("a{i}")).collect()
}

/// Random process tree over `n` distinct activities, with occasional
/// silent leaves and loops.
pub fn random_process_tree(rng: &mut impl Rng, n: usize) -> ProcessTree {
    fn build(rng: &mut impl Rng, acts: &[String]) -> ProcessTree {
        if acts.len() == 1 {
            let leaf = ProcessTree::Activity(acts[0].clone());
            return if rng.random_bool(0.15) { ProcessTree::Xor(vec![ProcessTree::Silent, leaf]) } else { leaf };
        }
        let split = rng.random_range(1..acts.len());
        let kids = vec![build(rng, &acts[..split]), build(rng, &acts[split..])];
        match rng.random_range(0..4) {
            0 => ProcessTree::Sequence(kids),
            1 => ProcessTree::Xor(kids),
            2 => ProcessTree::Parallel(kids),
            _ => ProcessTree::Loop(kids),
        }
    }
    build(rng, &labels(n))
}

/// One run of `tree`, with loops repeated at most twice.
pub fn play(tree: &ProcessTree, rng: &mut impl Rng) -> Word {
    let mut out = Vec::new();
    flexh_core::synth::simulate(tree, rng, 2, &mut out);
    out
}

/// Random edits: deletions, insertions of known or foreign labels, swaps.
pub fn perturb(word: &mut Word, rng: &mut impl Rng, alphabet: usize) {
    for _ in 0..rng.random_range(0..=2) {
        match rng.random_range(0..4) {
            0 if !word.is_empty() => {
                let i = rng.random_range(0..word.len());
                word.remove(i);
            }
            1 => {
                let i = rng.random_range(0..=word.len());
                word.insert(i, format!("a{}", rng.random_range(0..alphabet)));
            }
            2 => {
                let i = rng.random_range(0..=word.len());
                word.insert(i, "zz".to_string());
            }
            _ if word.len() >= 2 => {
                let i = rng.random_range(0..word.len() - 1);
                word.swap(i, i + 1);
            }
            _ => {}
        }
    }
}

/// Log of up to `max_traces` traces over `a0..a{alphabet-1}`, each of length
/// 1..=`max_len`, using every label at least once.
pub fn random_log(rng: &mut impl Rng, alphabet: usize, max_traces: usize, max_len: usize) -> EventLog {
    let names = labels(alphabet);
    let n = rng.random_range(1..=max_traces);
    let mut traces: Vec<Word> = (0..n)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            (0..len).map(|_| names[rng.random_range(0..alphabet)].clone()).collect()
        })
        .collect();
    let used: BTreeSet<&String> = traces.iter().flatten().collect();
    let missing: Vec<String> = names.iter().filter(|a| !used.contains(a)).cloned().collect();
    for a in missing {
        let t = rng.random_range(0..traces.len());
        let pos = rng.random_range(0..=traces[t].len());
        traces[t].insert(pos, a);
    }
    EventLog::from_sequences(traces)
}

/// Nodes that are neither ancestor nor descendant of each other,
/// chosen greedily in random order among the non-root subprocesses.
pub fn unrelated_subprocesses(tree: &ActivityTree, rng: &mut impl Rng, max: usize) -> Vec<String> {
    let mut candidates: Vec<String> = tree.subprocesses().into_iter().filter(|s| s != tree.root()).collect();
    let mut picked: Vec<String> = Vec::new();
    while !candidates.is_empty() && picked.len() < max {
        let c = candidates.swap_remove(rng.random_range(0..candidates.len()));
        if picked.iter().all(|p| !tree.related(p, &c)) {
            picked.push(c);
        }
    }
    picked
}

/// All orderings of `items`.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

/// Number of random parents per level of a tree built by `tree_random`,
/// keyed by level, read from the `sp<i>-h<level>` labels.
pub fn random_parents_per_level(tree: &ActivityTree) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for sp in tree.subprocesses() {
        if let Some((_, h)) = sp.strip_prefix("sp").and_then(|r| r.split_once("-h")) {
            *out.entry(h.parse().expect("level number")).or_default() += 1;
        }
    }
    out
}
