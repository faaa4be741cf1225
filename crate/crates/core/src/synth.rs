//! Synthetic logs with a known two-level hierarchy.
//!
//! Each subprocess `S<i>` owns activities `S<i>_a<j>` arranged in a small
//! random process tree and runs exactly once per trace. The root arranges
//! the subprocesses in a sequence of blocks, at least one of which runs
//! several subprocesses in parallel, so their events interleave.

use std::collections::VecDeque;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activity_tree::{ActivityTree, ROOT};
use crate::discovery::ProcessTree;
use crate::event_log::{EventLog, Trace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    pub subprocesses: RangeInclusive<usize>,
    pub activities: RangeInclusive<usize>,
    pub traces: usize,
    /// Upper bound on loop iterations during simulation.
    pub max_loop: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { subprocesses: 3..=5, activities: 4..=8, traces: 200, max_loop: 2, seed: 0 }
    }
}

/// Generated log with its ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticLog {
    pub log: EventLog,
    /// Root, one node per subprocess, activities below.
    pub tree: ActivityTree,
    pub model: ProcessTree,
}

pub fn subprocess_label(i: usize) -> String {
    format!("S{i}")
}

pub fn activity_label(sp: usize, j: usize) -> String {
    format!("S{sp}_a{j}")
}

pub fn generate(config: &SynthConfig) -> SyntheticLog {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let k = rng.random_range(config.subprocesses.clone());
    let mut children = vec![(ROOT.to_string(), (1..=k).map(subprocess_label).collect::<Vec<_>>())];
    let mut bodies = Vec::with_capacity(k);
    for i in 1..=k {
        let n = rng.random_range(config.activities.clone());
        let acts: Vec<String> = (1..=n).map(|j| activity_label(i, j)).collect();
        children.push((subprocess_label(i), acts.clone()));
        bodies.push(random_block(&mut rng, acts));
    }
    let model = root_structure(&mut rng, bodies);
    let traces = (0..config.traces)
        .map(|c| {
            let mut out = Vec::new();
            simulate(&model, &mut rng, config.max_loop, &mut out);
            Trace::new((c + 1).to_string(), out)
        })
        .collect();
    SyntheticLog { log: EventLog::new(traces), tree: ActivityTree::new(ROOT, children), model }
}

/// Random operator tree over `acts`; every run produces at least one event.
fn random_block(rng: &mut ChaCha8Rng, mut acts: Vec<String>) -> ProcessTree {
    if acts.len() == 1 {
        return ProcessTree::Activity(acts.pop().expect("one activity"));
    }
    let parts = if acts.len() >= 3 && rng.random_bool(0.4) { 3 } else { 2 };
    let mut groups: Vec<Vec<String>> = Vec::with_capacity(parts);
    let mut rest = acts.as_slice();
    for p in 0..parts {
        let left = parts - p - 1;
        let take = if left == 0 { rest.len() } else { rng.random_range(1..=rest.len() - left) };
        groups.push(rest[..take].to_vec());
        rest = &rest[take..];
    }
    let kids: Vec<ProcessTree> = groups.into_iter().map(|g| random_block(rng, g)).collect();
    match rng.random_range(0..10) {
        0..=4 => ProcessTree::Sequence(kids),
        5..=6 => ProcessTree::Xor(kids),
        7..=8 => ProcessTree::Parallel(kids),
        _ => {
            let mut kids = kids;
            let redo = kids.split_off(1);
            let body = kids.pop().expect("do part");
            let redo =
                if redo.len() == 1 { redo.into_iter().next().expect("redo part") } else { ProcessTree::Xor(redo) };
            ProcessTree::Loop(vec![body, redo])
        }
    }
}

/// Shuffles the subprocesses into a sequence of blocks with at least one
/// parallel block.
fn root_structure(rng: &mut ChaCha8Rng, mut bodies: Vec<ProcessTree>) -> ProcessTree {
    bodies.shuffle(rng);
    let mut blocks: Vec<Vec<ProcessTree>> = vec![Vec::new()];
    for (i, b) in bodies.into_iter().enumerate() {
        if i > 0 && rng.random_bool(0.4) {
            blocks.push(Vec::new());
        }
        blocks.last_mut().expect("a block").push(b);
    }
    if blocks.iter().all(|b| b.len() < 2) && blocks.len() >= 2 {
        let second = blocks.remove(1);
        blocks[0].extend(second);
    }
    let mut seq: Vec<ProcessTree> = blocks
        .into_iter()
        .map(|mut b| if b.len() == 1 { b.pop().expect("one body") } else { ProcessTree::Parallel(b) })
        .collect();
    if seq.len() == 1 {
        seq.pop().expect("one block")
    } else {
        ProcessTree::Sequence(seq)
    }
}

/// Appends one random run of `tree` to `out`.
pub fn simulate(tree: &ProcessTree, rng: &mut impl Rng, max_loop: usize, out: &mut Vec<String>) {
    match tree {
        ProcessTree::Activity(a) => out.push(a.clone()),
        ProcessTree::Silent => {}
        ProcessTree::Sequence(kids) => kids.iter().for_each(|k| simulate(k, rng, max_loop, out)),
        ProcessTree::Xor(kids) => simulate(&kids[rng.random_range(0..kids.len())], rng, max_loop, out),
        ProcessTree::Parallel(kids) => {
            let mut runs: Vec<VecDeque<String>> = kids
                .iter()
                .map(|k| {
                    let mut v = Vec::new();
                    simulate(k, rng, max_loop, &mut v);
                    v.into()
                })
                .collect();
            runs.retain(|r| !r.is_empty());
            while !runs.is_empty() {
                let i = rng.random_range(0..runs.len());
                out.push(runs[i].pop_front().expect("non-empty run"));
                if runs[i].is_empty() {
                    runs.swap_remove(i);
                }
            }
        }
        ProcessTree::Loop(kids) => {
            simulate(&kids[0], rng, max_loop, out);
            let mut rounds = 0;
            while rounds < max_loop && rng.random_bool(0.3) {
                simulate(&kids[rng.random_range(1..kids.len())], rng, max_loop, out);
                simulate(&kids[0], rng, max_loop, out);
                rounds += 1;
            }
        }
    }
}
