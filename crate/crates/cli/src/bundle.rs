use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use flexh_core::abstraction::HierarchicalModel;
use flexh_core::activity_tree::ActivityTree;
use flexh_core::discovery::MinerConfig;
use flexh_core::event_log::{parse_xes, write_xes, EventLog};
use flexh_core::petri::{read_pnml, to_dot, write_pnml};
use serde::{Deserialize, Serialize};

pub const TREE_JSON: &str = "tree.json";
pub const TREE_DOT: &str = "tree.dot";
pub const MODEL_JSON: &str = "model.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";
pub const ABSTRACTED_XES: &str = "abstracted.xes";
const SUBLOGS: &str = "sublogs";
const MODELS: &str = "models";

/// Contents of `model.json`: what was mined and where each part lives.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub input: String,
    pub method: String,
    pub seed: Option<u64>,
    pub miner: MinerConfig,
    pub root: String,
    pub activities: usize,
    pub subprocesses: Vec<SubprocessEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hidden: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubprocessEntry {
    pub label: String,
    pub is_root: bool,
    pub height: usize,
    pub children: Vec<String>,
    pub sublog: String,
    pub traces: usize,
    pub events: usize,
    /// PNML path, absent when discovery failed.
    pub model: Option<String>,
    pub places: Option<usize>,
    pub transitions: Option<usize>,
    pub error: Option<String>,
}

/// File stems for node labels: unsafe characters become `_`, and clashes
/// after that get a numeric suffix.
fn file_stems(labels: &[String]) -> BTreeMap<String, String> {
    let mut used = BTreeSet::new();
    let mut stems = BTreeMap::new();
    for label in labels {
        let base: String = label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '+') { c } else { '_' })
            .collect();
        let base = if base.is_empty() || base.starts_with('.') { format!("_{base}") } else { base };
        let mut stem = base.clone();
        let mut n = 2;
        while !used.insert(stem.to_ascii_lowercase()) {
            stem = format!("{base}-{n}");
            n += 1;
        }
        stems.insert(label.clone(), stem);
    }
    stems
}

pub fn write_tree(dir: &Path, tree: &ActivityTree) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write(&dir.join(TREE_JSON), &tree.to_json())?;
    write(&dir.join(TREE_DOT), &tree.to_dot())
}

/// Writes the full discovery bundle and returns its manifest.
pub fn write_bundle(
    dir: &Path,
    model: &HierarchicalModel,
    manifest_base: Manifest,
    abstracted: Option<&EventLog>,
) -> Result<Manifest> {
    write_tree(dir, &model.tree)?;
    for sub in [SUBLOGS, MODELS] {
        let path = dir.join(sub);
        if path.exists() {
            fs::remove_dir_all(&path).with_context(|| format!("clearing {}", path.display()))?;
        }
        fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
    }
    let abstracted_path = dir.join(ABSTRACTED_XES);
    match abstracted {
        Some(log) => write(&abstracted_path, &write_xes(log))?,
        None if abstracted_path.exists() => fs::remove_file(&abstracted_path)?,
        None => {}
    }

    let labels = model.subprocesses();
    let stems = file_stems(&labels);
    let heights = model.tree.heights();
    let mut entries = Vec::new();
    for sp in &labels {
        let stem = &stems[sp];
        let log = &model.log_map[sp];
        let sublog = format!("{SUBLOGS}/{stem}.xes");
        write(&dir.join(&sublog), &write_xes(log))?;
        let mut entry = SubprocessEntry {
            label: sp.clone(),
            is_root: sp == model.root(),
            height: heights[sp],
            children: model.tree.children(sp).iter().cloned().collect(),
            sublog,
            traces: log.len(),
            events: log.event_count(),
            model: None,
            places: None,
            transitions: None,
            error: model.failures.get(sp).cloned(),
        };
        if let Some(net) = model.model_map.get(sp) {
            let pnml = format!("{MODELS}/{stem}.pnml");
            write(&dir.join(&pnml), &write_pnml(net, sp))?;
            write(&dir.join(format!("{MODELS}/{stem}.dot")), &to_dot(net, sp))?;
            entry.model = Some(pnml);
            entry.places = Some(net.places().len());
            entry.transitions = Some(net.transitions().len());
        }
        entries.push(entry);
    }
    let manifest = Manifest { subprocesses: entries, ..manifest_base };
    let json = serde_json::to_string_pretty(&manifest)?;
    write(&dir.join(MODEL_JSON), &(json + "\n"))?;
    Ok(manifest)
}

/// Loads a bundle written by [`write_bundle`].
pub fn read_bundle(dir: &Path) -> Result<(Manifest, HierarchicalModel)> {
    let manifest: Manifest = serde_json::from_str(&read(&dir.join(MODEL_JSON))?)
        .with_context(|| format!("parsing {}", dir.join(MODEL_JSON).display()))?;
    let tree = ActivityTree::from_json(&read(&dir.join(TREE_JSON))?)
        .with_context(|| format!("parsing {}", dir.join(TREE_JSON).display()))?;
    if tree.root() != manifest.root {
        bail!("{} and {} disagree on the root", MODEL_JSON, TREE_JSON);
    }
    let expected = tree.subprocesses();
    let listed: Vec<String> = manifest.subprocesses.iter().map(|e| e.label.clone()).collect();
    if expected != listed {
        bail!("{} lists subprocesses {:?}, the tree has {:?}", MODEL_JSON, listed, expected);
    }

    let mut log_map = BTreeMap::new();
    let mut model_map = BTreeMap::new();
    let mut failures = BTreeMap::new();
    for entry in &manifest.subprocesses {
        let path = dir.join(&entry.sublog);
        let log = parse_xes(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
        log_map.insert(entry.label.clone(), log);
        match (&entry.model, &entry.error) {
            (Some(pnml), _) => {
                let path = dir.join(pnml);
                let net = read_pnml(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
                model_map.insert(entry.label.clone(), net);
            }
            (None, Some(err)) => {
                failures.insert(entry.label.clone(), err.clone());
            }
            (None, None) => bail!("subprocess `{}` has neither a model nor an error", entry.label),
        }
    }
    Ok((manifest, HierarchicalModel { tree, log_map, model_map, failures }))
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn run_dir(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}
