use std::fmt;

use crate::petri::{Marking, PetriNet, PlaceIdx};

/// Block-structured process model.
///
/// `Loop` children are `[do, redo₁, redo₂, …]`: the do-part runs first and
/// may be repeated after any one of the redo parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProcessTree {
    Activity(String),
    Silent,
    Sequence(Vec<ProcessTree>),
    Xor(Vec<ProcessTree>),
    Parallel(Vec<ProcessTree>),
    Loop(Vec<ProcessTree>),
}

impl ProcessTree {
    pub fn activity(label: impl Into<String>) -> Self {
        ProcessTree::Activity(label.into())
    }

    pub fn children(&self) -> &[ProcessTree] {
        match self {
            ProcessTree::Activity(_) | ProcessTree::Silent => &[],
            ProcessTree::Sequence(c) | ProcessTree::Xor(c) | ProcessTree::Parallel(c) | ProcessTree::Loop(c) => c,
        }
    }

    /// Loops need a do-part and at least one redo part; other operators at
    /// least one child.
    pub fn is_well_formed(&self) -> bool {
        let arity_ok = match self {
            ProcessTree::Activity(_) | ProcessTree::Silent => true,
            ProcessTree::Loop(c) => c.len() >= 2,
            ProcessTree::Sequence(c) | ProcessTree::Xor(c) | ProcessTree::Parallel(c) => !c.is_empty(),
        };
        arity_ok && self.children().iter().all(ProcessTree::is_well_formed)
    }

    /// Number of leaves, silent ones included.
    pub fn leaf_count(&self) -> usize {
        match self {
            ProcessTree::Activity(_) | ProcessTree::Silent => 1,
            _ => self.children().iter().map(ProcessTree::leaf_count).sum(),
        }
    }

    /// Standard workflow-net translation: one source place marked
    /// initially, one sink place marked finally. Sequences chain through
    /// fresh places, choices share entry and exit, parallel blocks use a
    /// silent split and join, and loops are wrapped in silent entry/exit
    /// transitions with redo parts leading back to the do-part's entry.
    pub fn to_petri_net(&self) -> PetriNet {
        let mut b = NetBuilder::default();
        let source = b.place();
        let sink = b.place();
        b.build(self, source, sink);
        let n = b.net.places().len();
        b.net.set_initial_marking(Marking::from_places(n, &[source]));
        b.net.set_final_marking(Marking::from_places(n, &[sink]));
        b.net
    }
}

#[derive(Default)]
struct NetBuilder {
    net: PetriNet,
    places: usize,
    transitions: usize,
}

impl NetBuilder {
    fn place(&mut self) -> PlaceIdx {
        let id = match self.places {
            0 => "source".to_string(),
            1 => "sink".to_string(),
            n => format!("p{}", n - 2),
        };
        self.places += 1;
        self.net.add_place(id)
    }

    fn transition(&mut self, label: Option<String>) -> usize {
        let id = match label {
            Some(_) => format!("t{}", self.transitions),
            None => format!("tau{}", self.transitions),
        };
        self.transitions += 1;
        self.net.add_transition(id, label)
    }

    fn step(&mut self, label: Option<String>, entry: PlaceIdx, exit: PlaceIdx) -> usize {
        let t = self.transition(label);
        self.net.arc_pt(entry, t);
        self.net.arc_tp(t, exit);
        t
    }

    fn build(&mut self, node: &ProcessTree, entry: PlaceIdx, exit: PlaceIdx) {
        match node {
            ProcessTree::Activity(a) => {
                self.step(Some(a.clone()), entry, exit);
            }
            ProcessTree::Silent => {
                self.step(None, entry, exit);
            }
            ProcessTree::Sequence(children) => {
                let mut current = entry;
                for (i, c) in children.iter().enumerate() {
                    let next = if i + 1 == children.len() { exit } else { self.place() };
                    self.build(c, current, next);
                    current = next;
                }
            }
            ProcessTree::Xor(children) => {
                for c in children {
                    self.build(c, entry, exit);
                }
            }
            ProcessTree::Parallel(children) => {
                let split = self.transition(None);
                let join = self.transition(None);
                self.net.arc_pt(entry, split);
                self.net.arc_tp(join, exit);
                for c in children {
                    let i = self.place();
                    let o = self.place();
                    self.net.arc_tp(split, i);
                    self.net.arc_pt(o, join);
                    self.build(c, i, o);
                }
            }
            ProcessTree::Loop(children) => {
                let body_in = self.place();
                let body_out = self.place();
                self.step(None, entry, body_in);
                self.build(&children[0], body_in, body_out);
                self.step(None, body_out, exit);
                for redo in &children[1..] {
                    self.build(redo, body_out, body_in);
                }
            }
        }
    }
}

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, kids) = match self {
            ProcessTree::Activity(a) => return write!(f, "{a}"),
            ProcessTree::Silent => return write!(f, "tau"),
            ProcessTree::Sequence(c) => ("->", c),
            ProcessTree::Xor(c) => ("X", c),
            ProcessTree::Parallel(c) => ("+", c),
            ProcessTree::Loop(c) => ("*", c),
        };
        write!(f, "{op}(")?;
        for (i, k) in kids.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}
