use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::petri::{Marking, PetriError, PetriNet, TransitionIdx};

/// Why an alignment could not be computed reliably.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("time budget exhausted")]
    Timeout,
    #[error("search exceeded {0} states")]
    StateLimit(usize),
    #[error("final marking unreachable")]
    FinalUnreachable,
    #[error("place `{0}` exceeds the token bound")]
    Unbounded(String),
}

impl From<PetriError> for AlignError {
    fn from(e: PetriError) -> Self {
        match e {
            PetriError::Unbounded(p, _) => AlignError::Unbounded(p),
            PetriError::StateLimit(n) => AlignError::StateLimit(n),
            _ => AlignError::FinalUnreachable,
        }
    }
}

/// Move costs; synchronous moves are free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCosts {
    pub log: u64,
    pub model: u64,
    pub silent: u64,
}

impl Default for MoveCosts {
    fn default() -> Self {
        Self { log: 1, model: 1, silent: 0 }
    }
}

/// Per-model computation budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Wall-clock limit for all searches on one model; `None` is unlimited.
    pub time_ms: Option<u64>,
    /// Expanded-state limit for a single search. Deterministic, unlike the clock.
    pub max_states: usize,
    pub token_cap: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Self { time_ms: Some(60_000), max_states: 500_000, token_cap: 2 }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Self { time_ms: None, max_states: usize::MAX, token_cap: 2 }
    }

    /// Starts the clock.
    pub fn start(&self) -> SearchLimits {
        SearchLimits {
            deadline: self.time_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
            max_states: self.max_states,
            token_cap: self.token_cap,
        }
    }
}

/// A started [`Budget`].
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub deadline: Option<Instant>,
    pub max_states: usize,
    pub token_cap: u32,
}

impl SearchLimits {
    pub fn check_time(&self) -> Result<(), AlignError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(AlignError::Timeout),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "lowercase")]
pub enum Move {
    Sync { label: String, transition: TransitionIdx },
    Log { label: String },
    Model { transition: TransitionIdx, label: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub moves: Vec<Move>,
    pub cost: u64,
}

impl Alignment {
    /// The trace, recovered from synchronous and log moves.
    pub fn log_projection(&self) -> Vec<&str> {
        self.moves
            .iter()
            .filter_map(|m| match m {
                Move::Sync { label, .. } | Move::Log { label } => Some(label.as_str()),
                Move::Model { .. } => None,
            })
            .collect()
    }

    /// The model run, as fired transitions.
    pub fn firing_sequence(&self) -> Vec<TransitionIdx> {
        self.moves
            .iter()
            .filter_map(|m| match *m {
                Move::Sync { transition, .. } | Move::Model { transition, .. } => Some(transition),
                Move::Log { .. } => None,
            })
            .collect()
    }

    /// Visible labels of the model run.
    pub fn model_projection(&self) -> Vec<String> {
        self.moves
            .iter()
            .filter_map(|m| match m {
                Move::Sync { label, .. } => Some(label.clone()),
                Move::Model { label, .. } => label.clone(),
                Move::Log { .. } => None,
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
enum Step {
    Sync(TransitionIdx),
    Log,
    Model(TransitionIdx),
}

struct Node {
    pos: usize,
    marking: Marking,
    cost: u64,
    parent: usize,
    step: Option<Step>,
}

/// Optimal alignment by A* over (trace position, marking).
///
/// The heuristic is [`LowerBound`]. Firing only moves tokens forward and the
/// remaining trace only shrinks, so it is consistent and the first goal state
/// popped is optimal.
pub fn align<S: AsRef<str>>(
    trace: &[S],
    net: &PetriNet,
    costs: &MoveCosts,
    limits: &SearchLimits,
) -> Result<Alignment, AlignError> {
    limits.check_time()?;
    let n = trace.len();
    let bound = LowerBound::new(net, trace, *costs);

    let mut nodes =
        vec![Node { pos: 0, marking: net.initial_marking().clone(), cost: 0, parent: usize::MAX, step: None }];
    let mut best: HashMap<(usize, Marking), u64> = HashMap::new();
    best.insert((0, net.initial_marking().clone()), 0);
    let mut heap = BinaryHeap::new();
    let h0 = bound.estimate(net.initial_marking(), 0);
    heap.push(Reverse((h0, Reverse(0usize), 0usize)));
    let mut expanded = 0usize;

    while let Some(Reverse((_, _, id))) = heap.pop() {
        let (pos, cost) = (nodes[id].pos, nodes[id].cost);
        if best.get(&(pos, nodes[id].marking.clone())).is_some_and(|&b| b < cost) {
            continue;
        }
        if pos == n && nodes[id].marking == *net.final_marking() {
            return Ok(reconstruct(&nodes, id, trace, net));
        }
        expanded += 1;
        if expanded > limits.max_states {
            return Err(AlignError::StateLimit(limits.max_states));
        }
        if expanded.is_multiple_of(256) {
            limits.check_time()?;
        }

        let marking = nodes[id].marking.clone();
        let mut succ: Vec<(usize, Marking, u64, Step)> = Vec::new();
        if pos < n {
            succ.push((pos + 1, marking.clone(), costs.log, Step::Log));
        }
        for t in net.enabled(&marking) {
            let next = net.fire_bounded(&marking, t, limits.token_cap)?;
            match &net.transitions()[t].label {
                None => succ.push((pos, next, costs.silent, Step::Model(t))),
                Some(l) => {
                    if pos < n && l == trace[pos].as_ref() {
                        succ.push((pos + 1, next.clone(), 0, Step::Sync(t)));
                    }
                    succ.push((pos, next, costs.model, Step::Model(t)));
                }
            }
        }
        for (npos, nm, c, step) in succ {
            let ncost = cost + c;
            let key = (npos, nm);
            if best.get(&key).is_some_and(|&b| b <= ncost) {
                continue;
            }
            let (npos, nm) = key;
            best.insert((npos, nm.clone()), ncost);
            let nid = nodes.len();
            nodes.push(Node { pos: npos, marking: nm, cost: ncost, parent: id, step: Some(step) });
            let h = bound.estimate(&nodes[nid].marking, npos);
            heap.push(Reverse((ncost + h, Reverse(npos), nid)));
        }
    }
    Err(AlignError::FinalUnreachable)
}

/// Lower bound on the remaining cost of a (position, marking) state.
///
/// Two disjoint kinds of unavoidable moves are counted. A remaining event
/// whose label no transition reachable from a marked place carries needs a
/// log move. A marked place whose outputs are all visible transitions fed by
/// that place alone, none of them matching a remaining event, needs a model
/// move; distinct such places need distinct firings.
struct LowerBound {
    words: usize,
    from_place: Vec<Vec<u64>>,
    /// Labels of the output transitions of places that can only be left by a
    /// visible move.
    forced: Vec<Option<Vec<u64>>>,
    /// Label index of each trace event; `None` when no transition carries it.
    events: Vec<Option<usize>>,
    /// Labels occurring in the trace from each position on.
    suffix: Vec<Vec<u64>>,
    costs: MoveCosts,
}

impl LowerBound {
    fn new<S: AsRef<str>>(net: &PetriNet, trace: &[S], costs: MoveCosts) -> Self {
        let mut index: HashMap<&str, usize> = HashMap::new();
        for t in net.transitions() {
            if let Some(l) = &t.label {
                let next = index.len();
                index.entry(l.as_str()).or_insert(next);
            }
        }
        let words = index.len().div_ceil(64).max(1);
        let set = |bits: &mut [u64], i: usize| bits[i / 64] |= 1 << (i % 64);
        let label_of = |t: TransitionIdx| net.transitions()[t].label.as_ref().map(|l| index[l.as_str()]);

        let places = net.places().len();
        let mut from_place = vec![vec![0u64; words]; places];
        // backward propagation to a fixpoint: p reaches what its output transitions reach
        let mut changed = true;
        while changed {
            changed = false;
            for p in 0..places {
                let mut bits = from_place[p].clone();
                for &t in net.place_postset(p) {
                    if let Some(i) = label_of(t) {
                        set(&mut bits, i);
                    }
                    for &q in net.postset(t) {
                        for (b, o) in bits.iter_mut().zip(&from_place[q]) {
                            *b |= o;
                        }
                    }
                }
                if bits != from_place[p] {
                    from_place[p] = bits;
                    changed = true;
                }
            }
        }

        let forced = (0..places)
            .map(|p| {
                let out = net.place_postset(p);
                if out.is_empty() || net.final_marking().get(p) > 0 {
                    return None;
                }
                let mut bits = vec![0u64; words];
                for &t in out {
                    if net.preset(t) != [p] {
                        return None;
                    }
                    set(&mut bits, label_of(t)?);
                }
                Some(bits)
            })
            .collect();

        let events: Vec<Option<usize>> = trace.iter().map(|e| index.get(e.as_ref()).copied()).collect();
        let mut suffix = vec![vec![0u64; words]; events.len() + 1];
        for i in (0..events.len()).rev() {
            suffix[i] = suffix[i + 1].clone();
            if let Some(l) = events[i] {
                set(&mut suffix[i], l);
            }
        }
        Self { words, from_place, forced, events, suffix, costs }
    }

    fn estimate(&self, m: &Marking, pos: usize) -> u64 {
        let mut live = vec![0u64; self.words];
        let mut model_moves = 0u64;
        for (p, tokens) in m.support() {
            for (b, o) in live.iter_mut().zip(&self.from_place[p]) {
                *b |= o;
            }
            if let Some(out) = &self.forced[p] {
                if out.iter().zip(&self.suffix[pos]).all(|(a, b)| a & b == 0) {
                    model_moves += u64::from(tokens);
                }
            }
        }
        let log_moves =
            self.events[pos..].iter().filter(|e| e.is_none_or(|i| live[i / 64] & (1 << (i % 64)) == 0)).count() as u64;
        log_moves * self.costs.log + model_moves * self.costs.model
    }
}

fn reconstruct<S: AsRef<str>>(nodes: &[Node], mut id: usize, trace: &[S], net: &PetriNet) -> Alignment {
    let cost = nodes[id].cost;
    let mut moves = Vec::new();
    while let Some(step) = nodes[id].step {
        let parent = nodes[id].parent;
        let pos = nodes[parent].pos;
        moves.push(match step {
            Step::Sync(t) => Move::Sync { label: trace[pos].as_ref().to_string(), transition: t },
            Step::Log => Move::Log { label: trace[pos].as_ref().to_string() },
            Step::Model(t) => Move::Model { transition: t, label: net.transitions()[t].label.clone() },
        });
        id = parent;
    }
    moves.reverse();
    Alignment { moves, cost }
}
