use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::alignment::{AlignError, SearchLimits};
use crate::petri::{Marking, PetriNet};

/// Escaping-edges precision over the visible model runs of the aligned log.
///
/// The runs form a prefix tree weighted by multiplicity. Each prefix is
/// mapped to every marking the net can reach while producing it (silent
/// steps included). At each prefix the visible labels the net could
/// produce next are compared with the labels the runs actually produce
/// next:
///
/// `1 − Σ w·|enabled \ observed| / Σ w·|enabled|`, or 1 when nothing is enabled.
pub fn escaping_edges(net: &PetriNet, runs: &[(Vec<String>, usize)], limits: &SearchLimits) -> Result<f64, AlignError> {
    let mut acc = Acc::default();
    let start = silent_closure(net, BTreeSet::from([net.initial_marking().clone()]), limits)?;
    let refs: Vec<(&[String], usize)> = runs.iter().map(|(r, w)| (r.as_slice(), *w)).collect();
    visit(net, &start, &refs, 0, limits, &mut acc)?;
    Ok(if acc.enabled == 0 { 1.0 } else { 1.0 - acc.escaping as f64 / acc.enabled as f64 })
}

#[derive(Default)]
struct Acc {
    enabled: u128,
    escaping: u128,
}

fn visit(
    net: &PetriNet,
    states: &BTreeSet<Marking>,
    runs: &[(&[String], usize)],
    depth: usize,
    limits: &SearchLimits,
    acc: &mut Acc,
) -> Result<(), AlignError> {
    limits.check_time()?;
    let weight: usize = runs.iter().map(|(_, w)| w).sum();
    let enabled: BTreeSet<&str> =
        states.iter().flat_map(|m| net.enabled(m)).filter_map(|t| net.transitions()[t].label.as_deref()).collect();
    let mut next: BTreeMap<&str, Vec<(&[String], usize)>> = BTreeMap::new();
    for &(run, w) in runs {
        if let Some(l) = run.get(depth) {
            next.entry(l.as_str()).or_default().push((run, w));
        }
    }
    let escaping = enabled.iter().filter(|l| !next.contains_key(*l)).count();
    acc.enabled += (weight * enabled.len()) as u128;
    acc.escaping += (weight * escaping) as u128;

    for (label, group) in next {
        let mut fired = BTreeSet::new();
        for m in states {
            for t in net.enabled(m) {
                if net.transitions()[t].label.as_deref() == Some(label) {
                    fired.insert(net.fire_bounded(m, t, limits.token_cap)?);
                }
            }
        }
        let successors = silent_closure(net, fired, limits)?;
        visit(net, &successors, &group, depth + 1, limits, acc)?;
    }
    Ok(())
}

fn silent_closure(
    net: &PetriNet,
    mut states: BTreeSet<Marking>,
    limits: &SearchLimits,
) -> Result<BTreeSet<Marking>, AlignError> {
    let mut queue: VecDeque<Marking> = states.iter().cloned().collect();
    while let Some(m) = queue.pop_front() {
        for t in net.enabled(&m) {
            if net.transitions()[t].is_silent() {
                let next = net.fire_bounded(&m, t, limits.token_cap)?;
                if !states.contains(&next) {
                    if states.len() >= limits.max_states {
                        return Err(AlignError::StateLimit(limits.max_states));
                    }
                    states.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::ProcessTree;
    use crate::quality::Budget;
    use ProcessTree::*;

    fn act(a: &str) -> ProcessTree {
        ProcessTree::activity(a)
    }

    fn runs(rs: &[&[&str]]) -> Vec<(Vec<String>, usize)> {
        rs.iter().map(|r| (r.iter().map(|s| s.to_string()).collect(), 1)).collect()
    }

    fn prec(tree: ProcessTree, rs: &[&[&str]]) -> f64 {
        escaping_edges(&tree.to_petri_net(), &runs(rs), &Budget::unlimited().start()).unwrap()
    }

    #[test]
    fn exact_model_is_precise() {
        assert_eq!(prec(Sequence(vec![act("a"), act("b")]), &[&["a", "b"]]), 1.0);
    }

    #[test]
    fn unused_branch_escapes() {
        // prefixes ⟨⟩, ⟨a⟩, ⟨a,b⟩ enable {a}, {b,c}, {}: one escaping edge of three
        let tree = Xor(vec![Sequence(vec![act("a"), act("b")]), Sequence(vec![act("a"), act("c")])]);
        assert!((prec(tree, &[&["a", "b"]]) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn flower_is_imprecise() {
        let flower = Loop(vec![Silent, Xor(vec![act("a"), act("b")])]);
        let p = prec(flower, &[&["a", "b"]]);
        // three prefixes, each enabling {a, b}; they escape b, a, and both
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn weights_count() {
        let tree = Xor(vec![act("a"), act("b")]);
        let mut rs = runs(&[&["a"]]);
        rs[0].1 = 3;
        // root: weight 3, enabled {a, b}, escaping {b}
        assert!((prec_w(tree, &rs) - 0.5).abs() < 1e-12);
    }

    fn prec_w(tree: ProcessTree, rs: &[(Vec<String>, usize)]) -> f64 {
        escaping_edges(&tree.to_petri_net(), rs, &Budget::unlimited().start()).unwrap()
    }
}
