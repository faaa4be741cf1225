use super::{Arc, PetriNet};
use crate::activity_tree::dot_escape;

/// Graphviz rendering: places as circles, transitions as boxes, silent
/// transitions as filled boxes. Initially marked places show their tokens;
/// finally marked places get a double border.
pub fn to_dot(net: &PetriNet, name: &str) -> String {
    let mut out = format!("digraph \"{}\" {{\n  rankdir=LR;\n", dot_escape(name));
    for (i, p) in net.places().iter().enumerate() {
        let tokens = net.initial_marking().get(i);
        let label = if tokens > 0 { "&bull;".repeat(tokens as usize) } else { String::new() };
        let periphery = if net.final_marking().get(i) > 0 { 2 } else { 1 };
        out.push_str(&format!(
            "  \"{}\" [shape=circle, label=\"{label}\", xlabel=\"{}\", peripheries={periphery}];\n",
            dot_escape(&p.id),
            dot_escape(&p.id)
        ));
    }
    for t in net.transitions() {
        match &t.label {
            Some(l) => {
                out.push_str(&format!("  \"{}\" [shape=box, label=\"{}\"];\n", dot_escape(&t.id), dot_escape(l)))
            }
            None => out.push_str(&format!(
                "  \"{}\" [shape=box, style=filled, fillcolor=black, label=\"\", width=0.2];\n",
                dot_escape(&t.id)
            )),
        }
    }
    for arc in net.arcs() {
        let (src, dst) = match *arc {
            Arc::PlaceToTransition(p, t) => (&net.places()[p].id, &net.transitions()[t].id),
            Arc::TransitionToPlace(t, p) => (&net.transitions()[t].id, &net.places()[p].id),
        };
        out.push_str(&format!("  \"{}\" -> \"{}\";\n", dot_escape(src), dot_escape(dst)));
    }
    out.push_str("}\n");
    out
}
