use std::collections::HashMap;

use quick_xml::events::{BytesDecl, BytesText, Event};
use quick_xml::Writer;

use super::{Arc, Marking, PetriError, PetriNet};

const INVISIBLE: &str = "$invisible$";

/// Writes the PNML core subset: places with initial markings, transitions
/// (silent ones flagged with ProM's `$invisible$` tool-specific element),
/// unit arcs, and a `finalmarkings` block.
pub fn write_pnml(net: &PetriNet, name: &str) -> String {
    let mut w = Writer::new_with_indent(Vec::new(), b' ', 2);
    w.write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None))).expect("writing to memory");
    w.create_element("pnml")
        .write_inner_content(|w| {
            w.create_element("net")
                .with_attribute(("id", name))
                .with_attribute(("type", "http://www.pnml.org/version-2009/grammar/pnmlcoremodel"))
                .write_inner_content(|w| {
                    text_child(w, "name", name)?;
                    w.create_element("page").with_attribute(("id", "page0")).write_inner_content(|w| {
                        for (i, p) in net.places().iter().enumerate() {
                            w.create_element("place").with_attribute(("id", p.id.as_str())).write_inner_content(
                                |w| {
                                    text_child(w, "name", &p.id)?;
                                    let tokens = net.initial_marking().get(i);
                                    if tokens > 0 {
                                        text_child(w, "initialMarking", &tokens.to_string())?;
                                    }
                                    Ok(())
                                },
                            )?;
                        }
                        for t in net.transitions() {
                            w.create_element("transition").with_attribute(("id", t.id.as_str())).write_inner_content(
                                |w| {
                                    text_child(w, "name", t.label.as_deref().unwrap_or(&t.id))?;
                                    if t.is_silent() {
                                        w.create_element("toolspecific")
                                            .with_attribute(("tool", "ProM"))
                                            .with_attribute(("version", "6.4"))
                                            .with_attribute(("activity", INVISIBLE))
                                            .write_empty()?;
                                    }
                                    Ok(())
                                },
                            )?;
                        }
                        for (i, arc) in net.arcs().iter().enumerate() {
                            let (src, dst) = match *arc {
                                Arc::PlaceToTransition(p, t) => (&net.places()[p].id, &net.transitions()[t].id),
                                Arc::TransitionToPlace(t, p) => (&net.transitions()[t].id, &net.places()[p].id),
                            };
                            w.create_element("arc")
                                .with_attribute(("id", format!("arc{i}").as_str()))
                                .with_attribute(("source", src.as_str()))
                                .with_attribute(("target", dst.as_str()))
                                .write_empty()?;
                        }
                        Ok(())
                    })?;
                    w.create_element("finalmarkings").write_inner_content(|w| {
                        w.create_element("marking").write_inner_content(|w| {
                            for (p, tokens) in net.final_marking().support() {
                                w.create_element("place")
                                    .with_attribute(("idref", net.places()[p].id.as_str()))
                                    .write_inner_content(|w| {
                                        w.create_element("text")
                                            .write_text_content(BytesText::new(&tokens.to_string()))?;
                                        Ok(())
                                    })?;
                            }
                            Ok(())
                        })?;
                        Ok(())
                    })?;
                    Ok(())
                })?;
            Ok(())
        })
        .expect("writing to memory");
    let mut out = String::from_utf8(w.into_inner()).expect("xml output is utf-8");
    out.push('\n');
    out
}

fn text_child<W: std::io::Write>(w: &mut Writer<W>, tag: &str, text: &str) -> std::io::Result<()> {
    w.create_element(tag).write_inner_content(|w| {
        w.create_element("text").write_text_content(BytesText::new(text))?;
        Ok(())
    })?;
    Ok(())
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, tag: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|n| n.is_element() && n.tag_name().name() == tag)
}

fn text_of(node: roxmltree::Node<'_, '_>, tag: &str) -> Option<String> {
    child(node, tag).and_then(|n| child(n, "text")).and_then(|n| n.text()).map(|s| s.trim().to_string())
}

fn parse_count(raw: &str) -> Result<u32, PetriError> {
    raw.trim().parse().map_err(|_| PetriError::Pnml(format!("invalid token count `{raw}`")))
}

/// Reads the subset written by [`write_pnml`]; pages are flattened.
pub fn read_pnml(input: &str) -> Result<PetriNet, PetriError> {
    let doc = roxmltree::Document::parse(input).map_err(|e| PetriError::Pnml(e.to_string()))?;
    let net_node = doc
        .descendants()
        .find(|n| n.is_element() && n.tag_name().name() == "net")
        .ok_or_else(|| PetriError::Pnml("no <net> element".into()))?;

    let mut net = PetriNet::new();
    let mut place_idx = HashMap::new();
    let mut trans_idx = HashMap::new();
    let mut initial = Vec::new();

    let elements = || net_node.descendants().filter(|n| n.is_element());
    for node in elements()
        .filter(|n| n.tag_name().name() == "place" && n.parent().map(|p| p.tag_name().name()) != Some("marking"))
    {
        let id = node.attribute("id").ok_or_else(|| PetriError::Pnml("place without id".into()))?;
        let p = net.add_place(id);
        place_idx.insert(id.to_string(), p);
        if let Some(raw) = text_of(node, "initialMarking") {
            initial.push((p, parse_count(&raw)?));
        }
    }
    for node in elements().filter(|n| n.tag_name().name() == "transition") {
        let id = node.attribute("id").ok_or_else(|| PetriError::Pnml("transition without id".into()))?;
        let silent = node.children().any(|c| {
            c.is_element() && c.tag_name().name() == "toolspecific" && c.attribute("activity") == Some(INVISIBLE)
        });
        let label = if silent { None } else { Some(text_of(node, "name").unwrap_or_else(|| id.to_string())) };
        let t = net.add_transition(id, label);
        trans_idx.insert(id.to_string(), t);
    }
    for node in elements().filter(|n| n.tag_name().name() == "arc") {
        if let Some(raw) = text_of(node, "inscription") {
            if parse_count(&raw)? != 1 {
                return Err(PetriError::Pnml(format!("unsupported arc weight `{raw}`")));
            }
        }
        let src = node.attribute("source").unwrap_or_default();
        let dst = node.attribute("target").unwrap_or_default();
        let arc = match (place_idx.get(src), trans_idx.get(dst), trans_idx.get(src), place_idx.get(dst)) {
            (Some(&p), Some(&t), _, _) => Arc::PlaceToTransition(p, t),
            (_, _, Some(&t), Some(&p)) => Arc::TransitionToPlace(t, p),
            _ => return Err(PetriError::Pnml(format!("arc {src} -> {dst} references unknown nodes"))),
        };
        net.add_arc(arc);
    }

    let n = net.places().len();
    let mut m_i = Marking::empty(n);
    for (p, c) in initial {
        m_i.0[p] += c;
    }
    let marking = elements()
        .find(|n| n.tag_name().name() == "finalmarkings")
        .and_then(|fm| child(fm, "marking"))
        .ok_or_else(|| PetriError::Pnml("no final marking".into()))?;
    let mut m_f = Marking::empty(n);
    for pl in marking.children().filter(|c| c.is_element() && c.tag_name().name() == "place") {
        let idref = pl.attribute("idref").unwrap_or_default();
        let &p = place_idx
            .get(idref)
            .ok_or_else(|| PetriError::Pnml(format!("final marking references unknown place `{idref}`")))?;
        let count = child(pl, "text").and_then(|t| t.text()).map(parse_count).transpose()?.unwrap_or(1);
        m_f.0[p] += count;
    }
    net.set_initial_marking(m_i);
    net.set_final_marking(m_f);
    net.check()?;
    Ok(net)
}
