//! Activity trees: non-overlapping hierarchical clusterings of activities.
//!
//! Leaves are the activities of a log; every other node is a subprocess
//! whose children are its activities (leaves or nested subprocesses). Trees
//! can be built from hierarchy encoded in activity labels, by seeded random
//! clustering, or as a flat single-level tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Label of the node added above the top-level groups.
pub const ROOT: &str = "root";

/// Default maximal subprocess size for random clustering.
pub const DEFAULT_MAX_SIZE: usize = 10;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` lies on a cycle")]
    Cycle(String),
    #[error("label `{label}` has {segments} segment(s), needs more than depth {depth}")]
    DepthExceeded { label: String, segments: usize, depth: usize },
    #[error("depth must be positive")]
    ZeroDepth,
    #[error("maxSize must be at least 2, got {0}")]
    InvalidMaxSize(usize),
    #[error("activity label `{0}` collides with a generated node label")]
    ReservedLabel(String),
    #[error("malformed tree json: {0}")]
    Json(String),
}

/// One violated validity constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "constraint", rename_all = "kebab-case")]
pub enum Violation {
    /// Two distinct nodes share children.
    Disjointness { first: String, second: String, shared: Vec<String> },
    /// The leaves differ from the alphabet.
    LeavesCoverAlphabet { missing: Vec<String>, extra: Vec<String> },
    /// A non-root node without parent, a root with a parent, or a node not
    /// reachable from the root.
    Connectedness { node: String, reason: String },
    /// A node listed among its own children.
    NoSelfChild { node: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Disjointness { first, second, shared } => {
                write!(f, "disjointness: `{first}` and `{second}` share children {shared:?}")
            }
            Violation::LeavesCoverAlphabet { missing, extra } => write!(
                f,
                "leaves-cover-alphabet: activities without leaf {missing:?}, leaves outside alphabet {extra:?}"
            ),
            Violation::Connectedness { node, reason } => write!(f, "connectedness: `{node}` {reason}"),
            Violation::NoSelfChild { node } => write!(f, "no-self-child: `{node}` is its own child"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct InvalidTree(pub Vec<Violation>);

impl fmt::Display for InvalidTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "activity tree is invalid ({} violation(s)):", self.0.len())?;
        for v in &self.0 {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// An activity tree `(A, γ)` with a designated root.
///
/// Construction is unchecked so that invalid trees can be represented and
/// diagnosed; use [`ActivityTree::validate`] against the log alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityTree {
    root: String,
    nodes: BTreeSet<String>,
    children: BTreeMap<String, BTreeSet<String>>,
}

static NO_CHILDREN: BTreeSet<String> = BTreeSet::new();

#[derive(Serialize, Deserialize)]
struct TreeJson {
    root: String,
    children: BTreeMap<String, Vec<String>>,
}

impl ActivityTree {
    pub fn new<I, K, C, S>(root: impl Into<String>, children: I) -> Self
    where
        I: IntoIterator<Item = (K, C)>,
        K: Into<String>,
        C: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let root = root.into();
        let mut nodes = BTreeSet::from([root.clone()]);
        let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (parent, kids) in children {
            let parent = parent.into();
            let kids: BTreeSet<String> = kids.into_iter().map(Into::into).collect();
            nodes.insert(parent.clone());
            nodes.extend(kids.iter().cloned());
            if !kids.is_empty() {
                map.entry(parent).or_default().extend(kids);
            }
        }
        Self { root, nodes, children: map }
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    /// All nodes `A`.
    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn contains(&self, node: &str) -> bool {
        self.nodes.contains(node)
    }

    /// `γ(node)`; empty for leaves and unknown nodes.
    pub fn children(&self, node: &str) -> &BTreeSet<String> {
        self.children.get(node).unwrap_or(&NO_CHILDREN)
    }

    pub fn is_leaf(&self, node: &str) -> bool {
        self.children(node).is_empty()
    }

    pub fn leaves(&self) -> BTreeSet<String> {
        self.nodes.iter().filter(|n| self.is_leaf(n)).cloned().collect()
    }

    /// Non-leaf nodes (the subprocesses, root included) in sorted order.
    pub fn subprocesses(&self) -> Vec<String> {
        self.children.keys().cloned().collect()
    }

    pub fn parent(&self, node: &str) -> Option<&str> {
        self.children.iter().find(|(_, kids)| kids.contains(node)).map(|(p, _)| p.as_str())
    }

    /// Ancestors of `node`, nearest first. Stops on cycles.
    pub fn ancestors(&self, node: &str) -> Vec<String> {
        let parents: BTreeMap<&str, &str> =
            self.children.iter().flat_map(|(p, kids)| kids.iter().map(move |k| (k.as_str(), p.as_str()))).collect();
        let mut out = Vec::new();
        let mut cur = node;
        while let Some(&p) = parents.get(cur) {
            if p == node || out.iter().any(|a: &String| a == p) {
                break;
            }
            out.push(p.to_string());
            cur = p;
        }
        out
    }

    /// All nodes strictly below `node`.
    pub fn descendants(&self, node: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<&str> = self.children(node).iter().map(String::as_str).collect();
        while let Some(n) = stack.pop() {
            if out.insert(n.to_string()) {
                stack.extend(self.children(n).iter().map(String::as_str));
            }
        }
        out
    }

    /// Two nodes are related when equal or one is an ancestor of the other.
    pub fn related(&self, x: &str, y: &str) -> bool {
        x == y || self.ancestors(x).iter().any(|a| a == y) || self.ancestors(y).iter().any(|a| a == x)
    }

    /// Checks the four validity constraints against `alphabet`.
    pub fn validate(&self, alphabet: &BTreeSet<String>) -> Result<(), InvalidTree> {
        let mut violations = Vec::new();

        let parents: Vec<(&String, &BTreeSet<String>)> = self.children.iter().collect();
        for (i, (x, gx)) in parents.iter().enumerate() {
            for (y, gy) in &parents[i + 1..] {
                let shared: Vec<String> = gx.intersection(gy).cloned().collect();
                if !shared.is_empty() {
                    violations.push(Violation::Disjointness { first: (*x).clone(), second: (*y).clone(), shared });
                }
            }
        }

        let leaves = self.leaves();
        let missing: Vec<String> = alphabet.difference(&leaves).cloned().collect();
        let extra: Vec<String> = leaves.difference(alphabet).cloned().collect();
        if !missing.is_empty() || !extra.is_empty() {
            violations.push(Violation::LeavesCoverAlphabet { missing, extra });
        }

        let mut parent_count: BTreeMap<&str, usize> = BTreeMap::new();
        for kids in self.children.values() {
            for k in kids {
                *parent_count.entry(k.as_str()).or_default() += 1;
            }
        }
        if let Some((p, _)) = self.children.iter().find(|(_, kids)| kids.contains(&self.root)) {
            violations.push(Violation::Connectedness {
                node: self.root.clone(),
                reason: format!("is the root but has parent `{p}`"),
            });
        }
        let reachable = {
            let mut seen = self.descendants(&self.root);
            seen.insert(self.root.clone());
            seen
        };
        for node in &self.nodes {
            if *node == self.root {
                continue;
            }
            if !parent_count.contains_key(node.as_str()) {
                violations.push(Violation::Connectedness {
                    node: node.clone(),
                    reason: "has no parent and is not the root".into(),
                });
            } else if !reachable.contains(node) {
                violations.push(Violation::Connectedness {
                    node: node.clone(),
                    reason: "is not reachable from the root".into(),
                });
            }
        }

        for (node, kids) in &self.children {
            if kids.contains(node) {
                violations.push(Violation::NoSelfChild { node: node.clone() });
            }
        }

        if violations.is_empty() {
            Ok(())
        } else {
            Err(InvalidTree(violations))
        }
    }

    pub fn height(&self, node: &str) -> Result<usize, TreeError> {
        if !self.nodes.contains(node) {
            return Err(TreeError::UnknownNode(node.to_string()));
        }
        let mut memo = BTreeMap::new();
        self.height_rec(node, &mut memo, &mut BTreeSet::new())
    }

    fn height_rec<'a>(
        &'a self,
        node: &'a str,
        memo: &mut BTreeMap<&'a str, usize>,
        on_stack: &mut BTreeSet<&'a str>,
    ) -> Result<usize, TreeError> {
        if let Some(&h) = memo.get(node) {
            return Ok(h);
        }
        if !on_stack.insert(node) {
            return Err(TreeError::Cycle(node.to_string()));
        }
        let mut h = 0;
        for c in self.children(node) {
            h = h.max(1 + self.height_rec(c, memo, on_stack)?);
        }
        on_stack.remove(node);
        memo.insert(node, h);
        Ok(h)
    }

    /// Heights of all nodes whose height is defined (nodes on cycles are skipped).
    pub fn heights(&self) -> BTreeMap<String, usize> {
        let mut memo = BTreeMap::new();
        for n in &self.nodes {
            let _ = self.height_rec(n, &mut memo, &mut BTreeSet::new());
        }
        memo.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn nodes_at_height(&self, h: usize) -> BTreeSet<String> {
        self.heights().into_iter().filter(|(_, nh)| *nh == h).map(|(n, _)| n).collect()
    }

    pub fn to_json(&self) -> String {
        let repr = TreeJson {
            root: self.root.clone(),
            children: self.children.iter().map(|(k, v)| (k.clone(), v.iter().cloned().collect())).collect(),
        };
        serde_json::to_string_pretty(&repr).expect("tree serializes")
    }

    pub fn from_json(input: &str) -> Result<Self, TreeError> {
        let repr: TreeJson = serde_json::from_str(input).map_err(|e| TreeError::Json(e.to_string()))?;
        Ok(Self::new(repr.root, repr.children))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph activity_tree {\n  rankdir=TB;\n");
        for node in &self.nodes {
            let shape = if self.is_leaf(node) { "ellipse" } else { "box" };
            out.push_str(&format!("  \"{}\" [shape={shape}];\n", dot_escape(node)));
        }
        for (p, kids) in &self.children {
            for k in kids {
                out.push_str(&format!("  \"{}\" -> \"{}\";\n", dot_escape(p), dot_escape(k)));
            }
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn check_reserved<'a>(
    alphabet: impl IntoIterator<Item = &'a String>,
    reserved: impl Fn(&str) -> bool,
) -> Result<(), TreeError> {
    match alphabet.into_iter().find(|a| reserved(a)) {
        Some(a) => Err(TreeError::ReservedLabel(a.clone())),
        None => Ok(()),
    }
}

/// Root with every activity as a direct child.
pub fn tree_flat(alphabet: &BTreeSet<String>) -> Result<ActivityTree, TreeError> {
    if alphabet.is_empty() {
        return Err(TreeError::EmptyAlphabet);
    }
    check_reserved(alphabet, |a| a == ROOT)?;
    Ok(ActivityTree::new(ROOT, [(ROOT, alphabet.iter().cloned())]))
}

/// Builds the tree encoded in label prefixes.
///
/// Each label is split on `separator`; its first `depth` segments name its
/// ancestor chain, outermost first. Intermediate nodes are named by the
/// joined prefix (`01`, then `01_BB` for `01_BB_xxx` with depth 2), so
/// groups under different parents never collide. A label needs more than
/// `depth` segments.
pub fn tree_from_labels(alphabet: &BTreeSet<String>, separator: char, depth: usize) -> Result<ActivityTree, TreeError> {
    if alphabet.is_empty() {
        return Err(TreeError::EmptyAlphabet);
    }
    if depth == 0 {
        return Err(TreeError::ZeroDepth);
    }
    check_reserved(alphabet, |a| a == ROOT)?;
    let sep = separator.to_string();
    let mut edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for label in alphabet {
        let segments: Vec<&str> = label.split(separator).collect();
        if segments.len() <= depth {
            return Err(TreeError::DepthExceeded { label: label.clone(), segments: segments.len(), depth });
        }
        let mut parent = ROOT.to_string();
        for k in 1..=depth {
            let prefix = segments[..k].join(&sep);
            if prefix == ROOT {
                return Err(TreeError::ReservedLabel(label.clone()));
            }
            edges.entry(parent).or_default().insert(prefix.clone());
            parent = prefix;
        }
        edges.entry(parent).or_default().insert(label.clone());
    }
    Ok(ActivityTree::new(ROOT, edges))
}

/// Name of the `index`-th (1-based) random cluster created at `level`.
pub fn random_parent_label(index: usize, level: usize) -> String {
    format!("sp{index}-h{level}")
}

fn is_random_parent_label(label: &str) -> bool {
    label.strip_prefix("sp").and_then(|rest| rest.split_once("-h")).is_some_and(|(i, h)| {
        !i.is_empty() && !h.is_empty() && i.bytes().all(|b| b.is_ascii_digit()) && h.bytes().all(|b| b.is_ascii_digit())
    })
}

/// Seeded random clustering into subprocesses of at most `max_size` children.
///
/// While more than `max_size` nodes remain at the current level, creates
/// `⌊(|C|−1)/max_size⌋ + 1` parents and assigns each node (in sorted order
/// at the first level, creation order afterwards) to a parent drawn
/// uniformly from those still below capacity. The remaining nodes are
/// attached to the root.
pub fn tree_random(alphabet: &BTreeSet<String>, max_size: usize, seed: u64) -> Result<ActivityTree, TreeError> {
    if max_size < 2 {
        return Err(TreeError::InvalidMaxSize(max_size));
    }
    if alphabet.is_empty() {
        return Err(TreeError::EmptyAlphabet);
    }
    check_reserved(alphabet, |a| a == ROOT || is_random_parent_label(a))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(String, Vec<String>)> = Vec::new();
    let mut current: Vec<String> = alphabet.iter().cloned().collect();
    let mut level = 0;
    while current.len() > max_size {
        level += 1;
        let n = (current.len() - 1) / max_size + 1;
        let mut clusters: Vec<Vec<String>> = vec![Vec::new(); n];
        let mut open: Vec<usize> = (0..n).collect();
        for c in current.drain(..) {
            let pick = rng.random_range(0..open.len());
            let p = open[pick];
            clusters[p].push(c);
            if clusters[p].len() == max_size {
                open.remove(pick);
            }
        }
        for (i, kids) in clusters.into_iter().enumerate() {
            let label = random_parent_label(i + 1, level);
            current.push(label.clone());
            edges.push((label, kids));
        }
    }
    edges.push((ROOT.to_string(), current));
    Ok(ActivityTree::new(ROOT, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    /// The clinic example: contact, lab test and surgery subprocesses.
    fn clinic() -> ActivityTree {
        ActivityTree::new(
            ROOT,
            [
                (ROOT, vec!["C", "L", "S"]),
                ("C", vec!["Vi", "Cs", "Re"]),
                ("L", vec!["Ca", "Gl", "Cr"]),
                ("S", vec!["Or", "Pr", "Op"]),
            ],
        )
    }

    fn clinic_alphabet() -> BTreeSet<String> {
        set(&["Vi", "Cs", "Re", "Ca", "Gl", "Cr", "Or", "Pr", "Op"])
    }

    #[test]
    fn clinic_tree_is_valid() {
        let t = clinic();
        assert_eq!(t.nodes().len(), 13);
        assert_eq!(t.children("C"), &set(&["Vi", "Cs", "Re"]));
        assert_eq!(t.validate(&clinic_alphabet()), Ok(()));
    }

    #[test]
    fn shared_child_violates_disjointness() {
        let t = ActivityTree::new(ROOT, [(ROOT, vec!["X", "Y"]), ("X", vec!["a", "b"]), ("Y", vec!["b"])]);
        let err = t.validate(&set(&["a", "b"])).unwrap_err();
        assert!(err.0.iter().any(|v| matches!(v,
            Violation::Disjointness { first, second, shared }
                if first == "X" && second == "Y" && shared == &vec!["b".to_string()])));
    }

    #[test]
    fn missing_leaf_violates_cover() {
        let t = ActivityTree::new(ROOT, [(ROOT, vec!["a"])]);
        let err = t.validate(&set(&["a", "b"])).unwrap_err();
        assert_eq!(err.0, vec![Violation::LeavesCoverAlphabet { missing: vec!["b".into()], extra: vec![] }]);
    }

    #[test]
    fn orphans_cycles_and_self_children() {
        let orphan = ActivityTree::new(ROOT, [(ROOT, vec!["a"]), ("X", vec!["b"])]);
        let err = orphan.validate(&set(&["a", "b"])).unwrap_err();
        assert!(err.0.iter().any(|v| matches!(v, Violation::Connectedness { node, .. } if node == "X")));

        let cyc = ActivityTree::new(ROOT, [(ROOT, vec!["a"]), ("X", vec!["Y", "b"]), ("Y", vec!["X"])]);
        let err = cyc.validate(&set(&["a", "b"])).unwrap_err();
        assert!(err.0.iter().any(|v| matches!(v, Violation::Connectedness { node, .. } if node == "X")));
        assert!(matches!(cyc.height("X"), Err(TreeError::Cycle(_))));

        let selfish = ActivityTree::new(ROOT, [(ROOT, vec!["X"]), ("X", vec!["X", "a"])]);
        let err = selfish.validate(&set(&["a"])).unwrap_err();
        assert!(err.0.contains(&Violation::NoSelfChild { node: "X".into() }));

        let rooted = ActivityTree::new(ROOT, [(ROOT, vec!["X"]), ("X", vec![ROOT, "a"])]);
        let err = rooted.validate(&set(&["a"])).unwrap_err();
        assert!(err.0.iter().any(|v| matches!(v, Violation::Connectedness { node, .. } if node == ROOT)));
    }

    #[test]
    fn heights() {
        let t = clinic();
        assert_eq!(t.height("Vi"), Ok(0));
        assert_eq!(t.height("C"), Ok(1));
        assert_eq!(t.height(ROOT), Ok(2));
        assert_eq!(t.height("nope"), Err(TreeError::UnknownNode("nope".into())));
        assert_eq!(t.nodes_at_height(1), set(&["C", "L", "S"]));
        assert_eq!(t.nodes_at_height(0), clinic_alphabet());
        assert_eq!(t.nodes_at_height(2), set(&[ROOT]));
        assert!(t.nodes_at_height(3).is_empty());
    }

    #[test]
    fn relations() {
        let t = clinic();
        assert!(!t.related("C", "L"));
        assert!(t.related("C", "Vi"));
        assert!(t.related(ROOT, "Vi"));
        assert_eq!(t.ancestors("Vi"), vec!["C".to_string(), ROOT.to_string()]);
        assert_eq!(t.parent("Gl"), Some("L"));
        assert_eq!(t.descendants("S"), set(&["Or", "Pr", "Op"]));
        assert_eq!(t.subprocesses(), vec!["C", "L", "S", ROOT]);
    }

    #[test]
    fn flat_tree() {
        let t = tree_flat(&set(&["a"])).unwrap();
        assert_eq!(t.children(ROOT), &set(&["a"]));
        let t = tree_flat(&clinic_alphabet()).unwrap();
        assert_eq!(t.children(ROOT).len(), 9);
        assert_eq!(t.height(ROOT), Ok(1));
        assert_eq!(t.nodes_at_height(1), set(&[ROOT]));
        assert_eq!(t.validate(&clinic_alphabet()), Ok(()));
        assert_eq!(tree_flat(&BTreeSet::new()), Err(TreeError::EmptyAlphabet));
        assert_eq!(tree_flat(&set(&["root"])), Err(TreeError::ReservedLabel("root".into())));
    }

    #[test]
    fn labels_depth_one() {
        let alpha = set(&["C_Vi", "C_Re", "C_Cs", "L_Ca", "L_Gl"]);
        let t = tree_from_labels(&alpha, '_', 1).unwrap();
        assert_eq!(t.children(ROOT), &set(&["C", "L"]));
        assert_eq!(t.children("C").len(), 3);
        assert_eq!(t.children("L").len(), 2);
        assert_eq!(t.validate(&alpha), Ok(()));
    }

    #[test]
    fn labels_single_activity_chain() {
        let alpha = set(&["A_x"]);
        let t = tree_from_labels(&alpha, '_', 1).unwrap();
        assert_eq!(t.children(ROOT), &set(&["A"]));
        assert_eq!(t.children("A"), &set(&["A_x"]));
        assert_eq!(t.height(ROOT), Ok(2));
    }

    #[test]
    fn labels_three_letter_groups() {
        let alpha = set(&[
            "A_SUBMITTED",
            "A_PARTLYSUBMITTED",
            "A_ACCEPTED",
            "O_SELECTED",
            "O_SENT",
            "W_Completeren aanvraag",
            "W_Nabellen offertes",
        ]);
        let t = tree_from_labels(&alpha, '_', 1).unwrap();
        assert_eq!(t.nodes_at_height(1), set(&["A", "O", "W"]));
        assert_eq!(t.validate(&alpha), Ok(()));
    }

    #[test]
    fn labels_depth_two() {
        let alpha = set(&["01_BB_100", "01_BB_200", "01_HOOFD_010", "02_DRZ_010"]);
        let t = tree_from_labels(&alpha, '_', 2).unwrap();
        assert_eq!(t.children(ROOT), &set(&["01", "02"]));
        assert_eq!(t.children("01"), &set(&["01_BB", "01_HOOFD"]));
        assert_eq!(t.children("01_BB"), &set(&["01_BB_100", "01_BB_200"]));
        assert_eq!(t.height(ROOT), Ok(3));
        assert_eq!(t.validate(&alpha), Ok(()));
    }

    #[test]
    fn labels_depth_too_large() {
        let alpha = set(&["C_Vi", "plain"]);
        assert_eq!(
            tree_from_labels(&alpha, '_', 1),
            Err(TreeError::DepthExceeded { label: "plain".into(), segments: 1, depth: 1 })
        );
        assert!(matches!(tree_from_labels(&set(&["a_b"]), '_', 2), Err(TreeError::DepthExceeded { .. })));
    }

    fn alphabet_of(n: usize) -> BTreeSet<String> {
        (0..n).map(|i| format!("a{i:03}")).collect()
    }

    #[test]
    fn random_small_alphabet_is_flat() {
        let alpha = alphabet_of(5);
        let t = tree_random(&alpha, 10, 1).unwrap();
        assert_eq!(t.children(ROOT), &alpha);
        assert_eq!(t.height(ROOT), Ok(1));
    }

    #[test]
    fn random_25_gives_three_parents() {
        let alpha = alphabet_of(25);
        let t = tree_random(&alpha, 10, 3).unwrap();
        // ⌊24/10⌋ + 1 = 3
        assert_eq!(t.nodes_at_height(1).len(), 3);
        assert_eq!(t.height(ROOT), Ok(2));
        assert_eq!(t.validate(&alpha), Ok(()));
    }

    #[test]
    fn random_101_gives_height_three() {
        let alpha = alphabet_of(101);
        let t = tree_random(&alpha, 10, 11).unwrap();
        // level 1: ⌊100/10⌋+1 = 11; level 2: ⌊10/10⌋+1 = 2; root over 2
        assert_eq!(t.nodes_at_height(1).len(), 11);
        assert_eq!(t.nodes_at_height(2).len(), 2);
        assert_eq!(t.children(ROOT).len(), 2);
        assert_eq!(t.height(ROOT), Ok(3));
        assert_eq!(t.validate(&alpha), Ok(()));
        assert!(t.nodes_at_height(2).contains("sp1-h2"));
    }

    #[test]
    fn random_is_deterministic() {
        let alpha = alphabet_of(57);
        assert_eq!(tree_random(&alpha, 4, 9).unwrap(), tree_random(&alpha, 4, 9).unwrap());
        assert_ne!(tree_random(&alpha, 4, 9).unwrap(), tree_random(&alpha, 4, 10).unwrap());
    }

    #[test]
    fn random_rejects_bad_input() {
        assert_eq!(tree_random(&alphabet_of(3), 1, 0), Err(TreeError::InvalidMaxSize(1)));
        assert_eq!(tree_random(&BTreeSet::new(), 3, 0), Err(TreeError::EmptyAlphabet));
        assert_eq!(tree_random(&set(&["sp1-h1", "b"]), 3, 0), Err(TreeError::ReservedLabel("sp1-h1".into())));
    }

    #[test]
    fn json_round_trip() {
        let t = clinic();
        let json = t.to_json();
        assert!(json.contains("\"root\": \"root\""));
        assert_eq!(ActivityTree::from_json(&json).unwrap(), t);
        assert!(matches!(ActivityTree::from_json("{"), Err(TreeError::Json(_))));
    }

    #[test]
    fn dot_lists_edges() {
        let dot = clinic().to_dot();
        assert!(dot.contains("\"C\" -> \"Vi\""));
        assert!(dot.contains("\"C\" [shape=box]"));
        assert!(dot.contains("\"Vi\" [shape=ellipse]"));
    }
}
