//! Labelled Petri nets `(P, T, F, l, m_i, m_f)` with firing semantics,
//! bounded state-space exploration and the Size / CFC complexity metrics.

mod dot;
mod pnml;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt;

pub use self::dot::to_dot;
pub use self::pnml::{read_pnml, write_pnml};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PetriError {
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("place `{0}` exceeds the token bound of {1}")]
    Unbounded(String, u32),
    #[error("state space exceeds {0} markings")]
    StateLimit(usize),
    #[error("final marking is unreachable from the initial marking")]
    FinalUnreachable,
    #[error("{0} marking is empty")]
    EmptyMarking(&'static str),
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("pnml: {0}")]
    Pnml(String),
}

pub type PlaceIdx = usize;
pub type TransitionIdx = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Place {
    pub id: String,
}

/// A transition; `label == None` marks a silent (τ) transition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub id: String,
    pub label: Option<String>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

/// A flow-relation arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arc {
    PlaceToTransition(PlaceIdx, TransitionIdx),
    TransitionToPlace(TransitionIdx, PlaceIdx),
}

/// Token counts indexed by place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Marking(Vec<u32>);

impl Marking {
    pub fn empty(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn from_places(places: usize, marked: &[PlaceIdx]) -> Self {
        let mut m = Self::empty(places);
        for &p in marked {
            m.0[p] += 1;
        }
        m
    }

    pub fn get(&self, p: PlaceIdx) -> u32 {
        self.0.get(p).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Marked places with their counts.
    pub fn support(&self) -> impl Iterator<Item = (PlaceIdx, u32)> + '_ {
        self.0.iter().enumerate().filter(|(_, &c)| c > 0).map(|(p, &c)| (p, c))
    }

    fn grow(&mut self, places: usize) {
        if self.0.len() < places {
            self.0.resize(places, 0);
        }
    }
}

/// Bounds for exhaustive exploration of a net's markings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreLimits {
    pub token_cap: u32,
    pub max_states: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        Self { token_cap: 2, max_states: 200_000 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PetriNet {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: BTreeSet<Arc>,
    initial_marking: Marking,
    final_marking: Marking,
    t_pre: Vec<Vec<PlaceIdx>>,
    t_post: Vec<Vec<PlaceIdx>>,
    p_pre: Vec<Vec<TransitionIdx>>,
    p_post: Vec<Vec<TransitionIdx>>,
}

// Adjacency lists are derived from `arcs`; equality is structural.
impl PartialEq for PetriNet {
    fn eq(&self, other: &Self) -> bool {
        self.places == other.places
            && self.transitions == other.transitions
            && self.arcs == other.arcs
            && self.initial_marking == other.initial_marking
            && self.final_marking == other.final_marking
    }
}

impl Eq for PetriNet {}

impl PetriNet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_place(&mut self, id: impl Into<String>) -> PlaceIdx {
        self.places.push(Place { id: id.into() });
        self.p_pre.push(Vec::new());
        self.p_post.push(Vec::new());
        let n = self.places.len();
        self.initial_marking.grow(n);
        self.final_marking.grow(n);
        n - 1
    }

    pub fn add_transition(&mut self, id: impl Into<String>, label: Option<String>) -> TransitionIdx {
        self.transitions.push(Transition { id: id.into(), label });
        self.t_pre.push(Vec::new());
        self.t_post.push(Vec::new());
        self.transitions.len() - 1
    }

    pub fn add_arc(&mut self, arc: Arc) {
        if !self.arcs.insert(arc) {
            return;
        }
        match arc {
            Arc::PlaceToTransition(p, t) => {
                self.t_pre[t].push(p);
                self.p_post[p].push(t);
            }
            Arc::TransitionToPlace(t, p) => {
                self.t_post[t].push(p);
                self.p_pre[p].push(t);
            }
        }
    }

    pub fn arc_pt(&mut self, p: PlaceIdx, t: TransitionIdx) {
        self.add_arc(Arc::PlaceToTransition(p, t));
    }

    pub fn arc_tp(&mut self, t: TransitionIdx, p: PlaceIdx) {
        self.add_arc(Arc::TransitionToPlace(t, p));
    }

    pub fn set_initial_marking(&mut self, mut m: Marking) {
        m.grow(self.places.len());
        self.initial_marking = m;
    }

    pub fn set_final_marking(&mut self, mut m: Marking) {
        m.grow(self.places.len());
        self.final_marking = m;
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn arcs(&self) -> &BTreeSet<Arc> {
        &self.arcs
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial_marking
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    /// `•t`
    pub fn preset(&self, t: TransitionIdx) -> &[PlaceIdx] {
        &self.t_pre[t]
    }

    /// `t•`
    pub fn postset(&self, t: TransitionIdx) -> &[PlaceIdx] {
        &self.t_post[t]
    }

    /// `•p`
    pub fn place_preset(&self, p: PlaceIdx) -> &[TransitionIdx] {
        &self.p_pre[p]
    }

    /// `p•`
    pub fn place_postset(&self, p: PlaceIdx) -> &[TransitionIdx] {
        &self.p_post[p]
    }

    /// Visible labels in sorted order.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.transitions.iter().filter_map(|t| t.label.as_deref()).collect()
    }

    /// Checks node-id uniqueness (`P ∩ T = ∅`) and non-empty markings.
    pub fn check(&self) -> Result<(), PetriError> {
        let mut seen = HashSet::new();
        for id in self.places.iter().map(|p| &p.id).chain(self.transitions.iter().map(|t| &t.id)) {
            if !seen.insert(id) {
                return Err(PetriError::DuplicateId(id.clone()));
            }
        }
        if self.initial_marking.is_empty() {
            return Err(PetriError::EmptyMarking("initial"));
        }
        if self.final_marking.is_empty() {
            return Err(PetriError::EmptyMarking("final"));
        }
        Ok(())
    }

    pub fn is_enabled(&self, m: &Marking, t: TransitionIdx) -> bool {
        self.t_pre[t].iter().all(|&p| m.get(p) > 0)
    }

    /// Transitions with `•t ≤ m`, in index order.
    pub fn enabled(&self, m: &Marking) -> Vec<TransitionIdx> {
        (0..self.transitions.len()).filter(|&t| self.is_enabled(m, t)).collect()
    }

    /// `m − •t + t•`.
    pub fn fire(&self, m: &Marking, t: TransitionIdx) -> Result<Marking, PetriError> {
        if !self.is_enabled(m, t) {
            return Err(PetriError::NotEnabled(self.transitions[t].id.clone()));
        }
        let mut next = m.clone();
        next.grow(self.places.len());
        for &p in &self.t_pre[t] {
            next.0[p] -= 1;
        }
        for &p in &self.t_post[t] {
            next.0[p] += 1;
        }
        Ok(next)
    }

    /// Like [`fire`](Self::fire) but fails when a place exceeds `cap` tokens.
    pub fn fire_bounded(&self, m: &Marking, t: TransitionIdx, cap: u32) -> Result<Marking, PetriError> {
        let next = self.fire(m, t)?;
        for &p in &self.t_post[t] {
            if next.get(p) > cap {
                return Err(PetriError::Unbounded(self.places[p].id.clone(), cap));
            }
        }
        Ok(next)
    }

    /// `|P| + |T|`
    pub fn size(&self) -> usize {
        self.places.len() + self.transitions.len()
    }

    /// Control-flow complexity: one per transition with more than one input
    /// or output place, plus `|p•|` per place with more than one input or
    /// output transition.
    pub fn cfc(&self) -> usize {
        let transitions =
            (0..self.transitions.len()).filter(|&t| self.t_pre[t].len() > 1 || self.t_post[t].len() > 1).count();
        let places: usize = (0..self.places.len())
            .filter(|&p| self.p_pre[p].len() > 1 || self.p_post[p].len() > 1)
            .map(|p| self.p_post[p].len())
            .sum();
        transitions + places
    }

    /// Cheapest firing sequence from `m_i` to exactly `m_f` (Dijkstra).
    pub fn shortest_accepting_path_cost<F>(&self, cost: F, limits: ExploreLimits) -> Result<u64, PetriError>
    where
        F: Fn(&Transition) -> u64,
    {
        let mut dist: HashMap<Marking, u64> = HashMap::new();
        let mut heap = BinaryHeap::new();
        dist.insert(self.initial_marking.clone(), 0);
        heap.push(Reverse((0u64, self.initial_marking.clone())));
        while let Some(Reverse((d, m))) = heap.pop() {
            if m == self.final_marking {
                return Ok(d);
            }
            if dist.get(&m).is_some_and(|&best| best < d) {
                continue;
            }
            for t in self.enabled(&m) {
                let next = self.fire_bounded(&m, t, limits.token_cap)?;
                let nd = d + cost(&self.transitions[t]);
                if dist.get(&next).is_none_or(|&best| nd < best) {
                    if dist.len() >= limits.max_states && !dist.contains_key(&next) {
                        return Err(PetriError::StateLimit(limits.max_states));
                    }
                    dist.insert(next.clone(), nd);
                    heap.push(Reverse((nd, next)));
                }
            }
        }
        Err(PetriError::FinalUnreachable)
    }

    /// Default cost model: visible transitions 1, silent 0.
    pub fn shortest_visible_path(&self, limits: ExploreLimits) -> Result<u64, PetriError> {
        self.shortest_accepting_path_cost(|t| u64::from(!t.is_silent()), limits)
    }

    /// All markings reachable from `m_i`, with the set of transitions that
    /// fire somewhere in the reachable state space.
    pub fn explore(&self, limits: ExploreLimits) -> Result<StateSpace, PetriError> {
        let mut seen = HashSet::new();
        let mut fired = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(self.initial_marking.clone());
        queue.push_back(self.initial_marking.clone());
        while let Some(m) = queue.pop_front() {
            for t in self.enabled(&m) {
                fired.insert(t);
                let next = self.fire_bounded(&m, t, limits.token_cap)?;
                if !seen.contains(&next) {
                    if seen.len() >= limits.max_states {
                        return Err(PetriError::StateLimit(limits.max_states));
                    }
                    seen.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
        Ok(StateSpace {
            final_reachable: seen.contains(&self.final_marking),
            markings: seen.len(),
            dead_transitions: (0..self.transitions.len()).filter(|t| !fired.contains(t)).collect(),
        })
    }

    /// Whether the visible sequence `word` has an accepting run.
    pub fn accepts<S: AsRef<str>>(&self, word: &[S], limits: ExploreLimits) -> Result<bool, PetriError> {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert((0usize, self.initial_marking.clone()));
        queue.push_back((0usize, self.initial_marking.clone()));
        while let Some((i, m)) = queue.pop_front() {
            if i == word.len() && m == self.final_marking {
                return Ok(true);
            }
            for t in self.enabled(&m) {
                let step = match &self.transitions[t].label {
                    None => 0,
                    Some(l) if i < word.len() && l == word[i].as_ref() => 1,
                    Some(_) => continue,
                };
                let next = self.fire_bounded(&m, t, limits.token_cap)?;
                let key = (i + step, next);
                if !seen.contains(&key) {
                    if seen.len() >= limits.max_states {
                        return Err(PetriError::StateLimit(limits.max_states));
                    }
                    seen.insert(key.clone());
                    queue.push_back(key);
                }
            }
        }
        Ok(false)
    }

    /// Visible sequences of length at most `max_len` that reach `m_f`.
    pub fn language(&self, max_len: usize, limits: ExploreLimits) -> Result<BTreeSet<Vec<String>>, PetriError> {
        let mut words = BTreeSet::new();
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        let start = (Vec::<String>::new(), self.initial_marking.clone());
        seen.insert(start.clone());
        queue.push_back(start);
        while let Some((word, m)) = queue.pop_front() {
            if m == self.final_marking {
                words.insert(word.clone());
            }
            for t in self.enabled(&m) {
                let mut next_word = word.clone();
                if let Some(l) = &self.transitions[t].label {
                    if word.len() == max_len {
                        continue;
                    }
                    next_word.push(l.clone());
                }
                let key = (next_word, self.fire_bounded(&m, t, limits.token_cap)?);
                if !seen.contains(&key) {
                    if seen.len() >= limits.max_states {
                        return Err(PetriError::StateLimit(limits.max_states));
                    }
                    seen.insert(key.clone());
                    queue.push_back(key);
                }
            }
        }
        Ok(words)
    }
}

/// Summary of a bounded reachability exploration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    pub markings: usize,
    pub final_reachable: bool,
    pub dead_transitions: Vec<TransitionIdx>,
}

impl StateSpace {
    /// `m_f` reachable and no dead transitions.
    pub fn is_sound_lite(&self) -> bool {
        self.final_reachable && self.dead_transitions.is_empty()
    }
}

impl fmt::Display for PetriNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PetriNet(|P|={}, |T|={}, |F|={})", self.places.len(), self.transitions.len(), self.arcs.len())
    }
}
