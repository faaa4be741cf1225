//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use flexh_core::abstraction::{
    abstract_log, abstract_trace, build_hierarchy, project, selective_abstract, subtree_labels, HierarchicalModel,
};
use flexh_core::activity_tree::{tree_flat, tree_random, ActivityTree, ROOT};
use flexh_core::discovery::{discover_inductive, mine, tree_to_petri, MinerConfig, ProcessTree};
use flexh_core::event_log::{write_csv, EventLog, Trace};
use flexh_core::petri::{write_pnml, Marking, PetriNet};
use flexh_core::quality::{
    align, evaluate_hierarchical, f1_score, fitness, Budget, Metric, MoveCosts, QualityConfig, UNRELIABLE_MARK,
};
use flexh_core::synth::{generate, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let elapsed = start.elapsed();
    if elapsed < limit {
        Ok(elapsed)
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn clinic_tree() -> ActivityTree {
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

fn clinic_log() -> EventLog {
    EventLog::from_sequences([
        vec!["Vi", "Ca", "Re", "Gl", "Cs", "Cs"],
        vec!["Re", "Gl", "Vi", "Cr", "Cs", "Or", "Pr", "Op"],
        vec!["Vi", "Re", "Ca", "Cr", "Gl", "Cs", "Pr", "Or", "Op"],
    ])
}

fn running_example() -> Outcome {
    let start = Instant::now();
    let tree = clinic_tree();
    let sigma1 = Trace::new("1", ["Vi", "Ca", "Re", "Gl", "Cs", "Cs"]);
    let words = |t: &Trace| t.activities.clone();

    let projected = project(&sigma1, &subtree_labels(&tree, "C"));
    check!(words(&projected) == ["Vi", "Re", "Cs", "Cs"], "projection on C gave {:?}", projected.activities);
    let on_c = abstract_trace(&sigma1, "C", &subtree_labels(&tree, "C"));
    check!(words(&on_c) == ["C+start", "Ca", "Gl", "C+end"], "abstraction on C gave {:?}", on_c.activities);
    let on_l = abstract_trace(&sigma1, "L", &subtree_labels(&tree, "L"));
    check!(words(&on_l) == ["Vi", "L+start", "Re", "L+end", "Cs", "Cs"], "abstraction on L gave {:?}", on_l.activities);
    let expected = ["C+start", "L+start", "L+end", "C+end"];
    let c_then_l = abstract_trace(&on_c, "L", &subtree_labels(&tree, "L"));
    let l_then_c = abstract_trace(&on_l, "C", &subtree_labels(&tree, "C"));
    check!(words(&c_then_l) == expected, "C then L gave {:?}", c_then_l.activities);
    check!(words(&l_then_c) == expected, "L then C gave {:?}", l_then_c.activities);

    let h = build_hierarchy(&clinic_log(), &tree, &MinerConfig::default()).map_err(|e| e.to_string())?;
    let root_first = &h.log_map[ROOT].traces()[0];
    check!(words(root_first) == expected, "root sublog starts with {:?}", root_first.activities);
    let elapsed = within(Duration::from_secs(1), start)?;
    Ok(format!("4 goldens plus the root sublog, {elapsed:.2?}"))
}

fn folding_commutes() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x00c0_ffee);
    let (mut folds, mut with_three) = (0usize, 0usize);
    for instance in 0..500 {
        let sigma = rng.random_range(2..=20);
        let log = oracles::random_log(&mut rng, sigma, 15, 30);
        let max_size = rng.random_range(2..=6);
        let tree = tree_random(log.alphabet(), max_size, rng.random()).map_err(|e| e.to_string())?;
        let hide = oracles::unrelated_subprocesses(&tree, &mut rng, 3);
        with_three += usize::from(hide.len() == 3);
        let mut results = BTreeSet::new();
        for order in oracles::permutations(&hide) {
            let mut folded = log.clone();
            for sp in &order {
                folded = abstract_log(&folded, &tree, sp).map_err(|e| e.to_string())?;
            }
            folds += 1;
            results.insert(folded.variants());
        }
        let direct = selective_abstract(&log, &tree, &hide).map_err(|e| e.to_string())?;
        check!(results.len() == 1, "instance {instance}: {} distinct results for {:?}", results.len(), hide);
        check!(results.contains(&direct.variants()), "instance {instance}: selective abstraction differs");
    }
    check!(with_three > 0, "no instance had three non-related subprocesses");
    let elapsed = within(Duration::from_secs(30), start)?;
    Ok(format!("500 instances, {folds} fold orders, {with_three} with 3 subprocesses, {elapsed:.2?}"))
}

fn random_tree_fuzzing() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ee5);
    for run in 0..1000 {
        let n = rng.random_range(1..=200);
        let sigma: BTreeSet<String> = (0..n).map(|i| format!("{}-{i}", rng.random_range(0..1000))).collect();
        let max_size = rng.random_range(2..=20);
        let seed = rng.random();
        let tree = tree_random(&sigma, max_size, seed).map_err(|e| format!("run {run}: {e}"))?;
        tree.validate(&sigma).map_err(|e| format!("run {run}: {e}"))?;
        for sp in tree.subprocesses() {
            let k = tree.children(&sp).len();
            check!(k <= max_size, "run {run}: {sp} has {k} children, max {max_size}");
        }
        let per_level = oracles::random_parents_per_level(&tree);
        let (mut current, mut level) = (sigma.len(), 0);
        while current > max_size {
            level += 1;
            let expected = (current - 1) / max_size + 1;
            check!(
                per_level.get(&level) == Some(&expected),
                "run {run}: level {level} has {:?} parents, expected {expected}",
                per_level.get(&level)
            );
            current = expected;
        }
        check!(per_level.len() == level, "run {run}: {} levels, expected {level}", per_level.len());
    }
    let elapsed = within(Duration::from_secs(10), start)?;
    Ok(format!("1000 trees, {elapsed:.2?}"))
}

fn flat_tree_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf1a7);
    let mut diffs = Vec::new();
    for i in 0..100 {
        let sigma = rng.random_range(1..=10);
        let log = oracles::random_log(&mut rng, sigma, 40, 12);
        let tree = tree_flat(log.alphabet()).map_err(|e| e.to_string())?;
        let miner =
            if i % 2 == 0 { MinerConfig::Inductive { noise: 0.2 } } else { MinerConfig::Dfg { edge_filter: 0.1 } };
        let h = build_hierarchy(&log, &tree, &miner).map_err(|e| e.to_string())?;
        if h.model_map.get(ROOT) != Some(&mine(&log, &miner).map_err(|e| e.to_string())?) {
            diffs.push(i);
        }
    }
    check!(diffs.is_empty(), "root model differs for logs {diffs:?}");
    Ok("100 logs, 0 diffs".to_string())
}

fn inductive_fitness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d);
    let mut failures = Vec::new();
    for i in 0..200 {
        let sigma = rng.random_range(1..=8);
        let log = oracles::random_log(&mut rng, sigma, 50, 10);
        let net = tree_to_petri(&discover_inductive(&log, 0.0));
        match fitness(&log, &net, &Budget::unlimited()) {
            Metric::Value(f) if (f - 1.0).abs() <= 1e-9 => {}
            other => failures.push((i, other)),
        }
    }
    check!(failures.is_empty(), "{} logs not fitting: {:?}", failures.len(), &failures[..failures.len().min(5)]);
    let elapsed = within(Duration::from_secs(60), start)?;
    Ok(format!("200 logs, all fitness 1.0, {elapsed:.2?}"))
}

fn alignment_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa119);
    let (mut pairs, mut attempts, mut largest) = (0, 0, 0);
    while pairs < 100 {
        attempts += 1;
        check!(attempts <= 10_000, "only {pairs} small pairs in {attempts} attempts");
        let n = rng.random_range(1..=6);
        let tree = oracles::random_process_tree(&mut rng, n);
        let net = tree_to_petri(&tree);
        let mut trace = oracles::play(&tree, &mut rng);
        oracles::perturb(&mut trace, &mut rng, n);
        let Some(size) = oracles::product_size(&trace, &net, 10_000) else { continue };
        let oracle = oracles::exhaustive_alignment_cost(&trace, &net, 10_000);
        let found =
            align(&trace, &net, &MoveCosts::default(), &Budget::unlimited().start()).map_err(|e| e.to_string())?;
        check!(Some(found.cost) == oracle, "{trace:?} on {tree}: search {} vs exhaustive {oracle:?}", found.cost);
        largest = largest.max(size);
        pairs += 1;
    }
    Ok(format!("100 pairs, largest product {largest} states"))
}

/// Linear workflow net with `n` visible transitions.
fn chain(n: usize) -> PetriNet {
    let mut net = PetriNet::new();
    let mut prev = net.add_place("p0");
    let first = prev;
    for i in 0..n {
        let t = net.add_transition(format!("t{i}"), Some(format!("a{i}")));
        let next = net.add_place(format!("p{}", i + 1));
        net.arc_pt(prev, t);
        net.arc_tp(t, next);
        prev = next;
    }
    let places = net.places().len();
    net.set_initial_marking(Marking::from_places(places, &[first]));
    net.set_final_marking(Marking::from_places(places, &[prev]));
    net
}

fn metric_formulas() -> Outcome {
    let f1 = format!("{:.2}", f1_score(0.98, 0.50));
    check!(f1 == "0.66", "f1(0.98, 0.50) = {f1}");
    for n in 1..=100 {
        let direct = chain(n);
        check!(direct.cfc() == 0, "CFC of a {n}-chain is {}", direct.cfc());
        let seq = ProcessTree::Sequence((0..n).map(|i| ProcessTree::activity(format!("a{i}"))).collect());
        let converted = tree_to_petri(&seq);
        check!(converted.cfc() == 0, "CFC of the converted {n}-sequence is {}", converted.cfc());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5123);
    for i in 0..50 {
        let n = rng.random_range(1..=8);
        let net = tree_to_petri(&oracles::random_process_tree(&mut rng, n));
        // count nodes in the serialized form rather than trusting the in-memory vectors
        let pnml = write_pnml(&net, "net");
        let nodes = pnml.matches("<place id=").count() + pnml.matches("<transition id=").count();
        check!(net.size() == nodes, "net {i}: size {} but {nodes} nodes serialized", net.size());
    }
    Ok(format!("f1 = {f1}, CFC 0 on 200 chains, Size exact on 50 nets"))
}

fn hierarchy_benefit() -> Outcome {
    let start = Instant::now();
    let miner = MinerConfig::Inductive { noise: 0.2 };
    let config = QualityConfig { generalization: false, ..QualityConfig::default() };
    let (mut f1_wins, mut cfc_wins) = (0, 0);
    let mut rows = Vec::new();
    for seed in 0..20 {
        let synth = generate(&SynthConfig { seed, ..SynthConfig::default() });
        let dk = build_hierarchy(&synth.log, &synth.tree, &miner).map_err(|e| e.to_string())?;
        let flat_tree = tree_flat(synth.log.alphabet()).map_err(|e| e.to_string())?;
        let flat = build_hierarchy(&synth.log, &flat_tree, &miner).map_err(|e| e.to_string())?;
        let dk_report = evaluate_hierarchical(&dk, &miner, &config);
        let flat_report = evaluate_hierarchical(&flat, &miner, &config);
        let (Some(dk_f1), Some(flat_f1)) = (dk_report.averages.f1, flat_report.averages.f1) else {
            return Err(format!("seed {seed}: unreliable F1"));
        };
        let (Some(dk_cfc), Some(flat_cfc)) = (dk_report.averages.cfc, flat_report.averages.cfc) else {
            return Err(format!("seed {seed}: missing CFC"));
        };
        f1_wins += usize::from(dk_f1 >= flat_f1);
        cfc_wins += usize::from(dk_cfc < flat_cfc);
        rows.push(format!("seed {seed}: F1 {dk_f1:.3} vs {flat_f1:.3}, CFC {dk_cfc:.1} vs {flat_cfc:.1}"));
    }
    check!(f1_wins >= 18, "F1 at least the flat F1 in only {f1_wins}/20\n{}", rows.join("\n"));
    check!(cfc_wins == 20, "CFC strictly lower in only {cfc_wins}/20\n{}", rows.join("\n"));
    let elapsed = within(Duration::from_secs(300), start)?;
    Ok(format!("F1 >= flat in {f1_wins}/20, CFC lower in {cfc_wins}/20, {elapsed:.2?}"))
}

fn all_unreliable(report: &flexh_core::quality::QualityReport) -> Result<(), String> {
    for e in &report.entries {
        for (name, m) in [("fitness", e.fitness), ("precision", e.precision), ("f1", e.f1)] {
            check!(m == Metric::Unreliable, "{} {name} is {m:?}", e.label);
        }
    }
    Ok(())
}

fn unreliable_entries() -> Outcome {
    let log = clinic_log();
    let tree = clinic_tree();
    let miner = MinerConfig::default();
    let h = build_hierarchy(&log, &tree, &miner).map_err(|e| e.to_string())?;
    let zero = Budget { time_ms: Some(0), ..Budget::default() };
    let config = QualityConfig { budget: zero, ..QualityConfig::default() };

    let report = evaluate_hierarchical(&h, &miner, &config);
    all_unreliable(&report)?;
    let a = &report.averages;
    check!(a.fitness.is_none() && a.precision.is_none() && a.f1.is_none(), "averages kept unreliable values: {a:?}");
    check!(a.cfc.is_some() && a.size.is_some(), "structural averages missing: {a:?}");
    check!(report.unreliable.len() == 4, "unreliable list {:?}", report.unreliable);
    let table = report.to_table();
    for line in table.lines().filter(|l| ["C ", "L ", "S ", "root "].iter().any(|p| l.starts_with(p))) {
        let marks = line.matches(UNRELIABLE_MARK).count();
        check!(marks >= 4, "row {line:?} has {marks} unreliable marks");
    }
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).map_err(|e| e.to_string())?;
    check!(json["averages"]["fitness"].is_null(), "JSON average fitness is {}", json["averages"]["fitness"]);

    // one broken model among reliable ones: averages cover exactly the others
    let mut mixed: HierarchicalModel = h.clone();
    let mut stuck = PetriNet::new();
    let p = stuck.add_place("start");
    let q = stuck.add_place("never");
    stuck.set_initial_marking(Marking::from_places(2, &[p]));
    stuck.set_final_marking(Marking::from_places(2, &[q]));
    mixed.model_map.insert("S".to_string(), stuck);
    let config = QualityConfig { generalization: false, ..QualityConfig::default() };
    let report = evaluate_hierarchical(&mixed, &miner, &config);
    let s = report.entries.iter().find(|e| e.label == "S").ok_or("no S entry")?;
    check!(s.fitness == Metric::Unreliable, "S fitness {:?}", s.fitness);
    let others: Vec<f64> = report.entries.iter().filter_map(|e| e.fitness.value()).collect();
    check!(others.len() == 3, "{} reliable entries", others.len());
    let mean = others.iter().sum::<f64>() / 3.0;
    check!(
        report.averages.fitness.is_some_and(|f| (f - mean).abs() < 1e-12),
        "average fitness {:?}, mean of reliable {mean}",
        report.averages.fitness
    );
    let s_row = report.to_table().lines().find(|l| l.starts_with("S ")).unwrap_or_default().to_string();
    check!(s_row.contains(UNRELIABLE_MARK), "S row {s_row:?}");
    Ok(format!("budget 0 marks all {} subprocesses, averages exclude them", report.entries.len()))
}

fn cli_run(input: &Path, out: &Path, name: &str) -> Result<(), String> {
    let output = Command::new(env!("CARGO_BIN_EXE_flexh"))
        .args(["run", "--method", "random", "--max-size", "4", "--seed", "11", "--miner", "inductive/0.2"])
        .arg("--input")
        .arg(input)
        .arg("--out")
        .arg(out)
        .args(["--name", name])
        .output()
        .map_err(|e| e.to_string())?;
    check!(output.status.success(), "run {name} failed: {}", String::from_utf8_lossy(&output.stderr));
    Ok(())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let synth = generate(&SynthConfig { seed: 5, traces: 60, ..SynthConfig::default() });
    let input = dir.path().join("synthetic.csv");
    fs::write(&input, write_csv(&synth.log)).map_err(|e| e.to_string())?;
    cli_run(&input, dir.path(), "first")?;
    cli_run(&input, dir.path(), "second")?;
    for file in ["report.json", "tree.json"] {
        let a = fs::read(dir.path().join("first").join(file)).map_err(|e| e.to_string())?;
        let b = fs::read(dir.path().join("second").join(file)).map_err(|e| e.to_string())?;
        check!(!a.is_empty(), "{file} is empty");
        check!(a == b, "{file} differs between runs");
    }
    Ok("report.json and tree.json byte-identical across two runs".to_string())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("running-example goldens", running_example),
        ("folding non-related subprocesses commutes", folding_commutes),
        ("random tree validity fuzzing", random_tree_fuzzing),
        ("flat tree equals direct mining", flat_tree_equivalence),
        ("inductive miner fitness guarantee", inductive_fitness),
        ("alignment optimality oracle", alignment_optimality),
        ("metric formulas", metric_formulas),
        ("hierarchy benefit on synthetic logs", hierarchy_benefit),
        ("unreliable entry handling", unreliable_entries),
        ("end-to-end determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
