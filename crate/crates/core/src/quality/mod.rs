//! Model quality: alignment-based fitness, escaping-edges precision, F1,
//! k-fold generalization, and their averages over a hierarchical model.

mod alignment;
mod precision;
mod report;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

pub use alignment::{align, AlignError, Alignment, Budget, Move, MoveCosts, SearchLimits};
pub use precision::escaping_edges;
pub use report::{Averages, QualityReport, SubprocessQuality, UNRELIABLE_MARK};

use crate::abstraction::HierarchicalModel;
use crate::discovery::Discover;
use crate::event_log::{EventLog, Trace};
use crate::petri::PetriNet;

/// A quality value that may be missing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Metric {
    Value(f64),
    /// The computation ran out of budget or had no valid model.
    Unreliable,
    /// Switched off.
    #[default]
    NotComputed,
}

impl Metric {
    pub fn value(self) -> Option<f64> {
        match self {
            Metric::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_unreliable(self) -> bool {
        self == Metric::Unreliable
    }
}

impl From<Result<f64, AlignError>> for Metric {
    fn from(r: Result<f64, AlignError>) -> Self {
        match r {
            Ok(v) => Metric::Value(v),
            Err(e) => {
                log::debug!("unreliable metric: {e}");
                Metric::Unreliable
            }
        }
    }
}

/// Values serialize as numbers, anything else as `null`.
impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Metric::Value(v) => s.serialize_f64(*v),
            _ => s.serialize_none(),
        }
    }
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1_score(fitness: f64, precision: f64) -> f64 {
    if fitness + precision == 0.0 {
        0.0
    } else {
        2.0 * fitness * precision / (fitness + precision)
    }
}

/// [`f1_score`] lifted to metrics: unreliable dominates, then not-computed.
pub fn f1(fitness: Metric, precision: Metric) -> Metric {
    match (fitness, precision) {
        (Metric::Value(f), Metric::Value(p)) => Metric::Value(f1_score(f, p)),
        (Metric::Unreliable, _) | (_, Metric::Unreliable) => Metric::Unreliable,
        _ => Metric::NotComputed,
    }
}

/// Optimal alignment of every variant of `log`, with its multiplicity.
pub fn align_log(
    log: &EventLog,
    net: &PetriNet,
    costs: &MoveCosts,
    limits: &SearchLimits,
) -> Result<Vec<(Vec<String>, usize, Alignment)>, AlignError> {
    log.variants()
        .into_par_iter()
        .map(|(seq, count)| {
            let a = align(&seq, net, costs, limits)?;
            Ok((seq, count, a))
        })
        .collect()
}

/// `1 − Σ cost(σ) / Σ (|σ|·log_cost + cheapest model run)`, weighted by
/// multiplicity; 1 when the denominator is 0.
fn fitness_from(aligned: &[(Vec<String>, usize, Alignment)], empty_run: u64, costs: &MoveCosts) -> f64 {
    let mut num = 0u128;
    let mut den = 0u128;
    for (seq, count, a) in aligned {
        let w = *count as u128;
        num += w * u128::from(a.cost);
        den += w * (seq.len() as u128 * u128::from(costs.log) + u128::from(empty_run));
    }
    if den == 0 {
        1.0
    } else {
        1.0 - num as f64 / den as f64
    }
}

fn model_runs(aligned: &[(Vec<String>, usize, Alignment)]) -> Vec<(Vec<String>, usize)> {
    aligned.iter().map(|(_, c, a)| (a.model_projection(), *c)).collect()
}

/// Fitness, precision and F1 of one model on one log.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModelQuality {
    pub fitness: Metric,
    pub precision: Metric,
    pub f1: Metric,
}

/// Which metrics to compute and with what budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityConfig {
    pub fitness: bool,
    pub precision: bool,
    pub generalization: bool,
    pub k_folds: usize,
    pub seed: u64,
    pub budget: Budget,
    pub costs: MoveCosts,
}

impl Default for QualityConfig {
    fn default() -> Self {
        Self {
            fitness: true,
            precision: true,
            generalization: true,
            k_folds: 3,
            seed: 0,
            budget: Budget::default(),
            costs: MoveCosts::default(),
        }
    }
}

/// Computes the requested subset of fitness and precision from one set of
/// alignments, all within one started budget.
pub fn evaluate_model(
    log: &EventLog,
    net: &PetriNet,
    want_fitness: bool,
    want_precision: bool,
    budget: &Budget,
    costs: &MoveCosts,
) -> ModelQuality {
    if !want_fitness && !want_precision {
        return ModelQuality::default();
    }
    let limits = budget.start();
    let result = (|| {
        let empty_run = align::<&str>(&[], net, costs, &limits)?.cost;
        let aligned = align_log(log, net, costs, &limits)?;
        let fi = fitness_from(&aligned, empty_run, costs);
        let pr = if want_precision { Some(escaping_edges(net, &model_runs(&aligned), &limits)?) } else { None };
        Ok::<_, AlignError>((fi, pr))
    })();
    let (fitness, precision) = match result {
        Ok((fi, pr)) => (Metric::Value(fi), pr.map_or(Metric::NotComputed, Metric::Value)),
        Err(e) => {
            log::debug!("alignment failed: {e}");
            (Metric::Unreliable, if want_precision { Metric::Unreliable } else { Metric::NotComputed })
        }
    };
    let fitness = if want_fitness { fitness } else { Metric::NotComputed };
    ModelQuality { fitness, precision, f1: f1(fitness, precision) }
}

pub fn fitness(log: &EventLog, net: &PetriNet, budget: &Budget) -> Metric {
    evaluate_model(log, net, true, false, budget, &MoveCosts::default()).fitness
}

pub fn precision(log: &EventLog, net: &PetriNet, budget: &Budget) -> Metric {
    evaluate_model(log, net, false, true, budget, &MoveCosts::default()).precision
}

/// Seeded assignment of trace indices to `k` folds of near-equal size.
pub fn k_fold_indices(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// k-fold generalization: for each fold, a model is discovered from the
/// other folds; the term is the harmonic mean of its fitness on the held-out
/// fold and its precision on the whole log. Unreliable if any term is, or
/// if the log has fewer than `k` traces.
pub fn generalization<D: Discover + ?Sized>(
    log: &EventLog,
    miner: &D,
    k: usize,
    seed: u64,
    budget: &Budget,
    costs: &MoveCosts,
) -> Metric {
    if k < 2 || log.len() < k {
        return Metric::Unreliable;
    }
    let traces = log.traces();
    let terms: Vec<Metric> = k_fold_indices(traces.len(), k, seed)
        .into_par_iter()
        .map(|held| {
            let mut is_held = vec![false; traces.len()];
            for &i in &held {
                is_held[i] = true;
            }
            let pick = |keep: bool| -> EventLog {
                traces
                    .iter()
                    .zip(&is_held)
                    .filter(|(_, &h)| h == keep)
                    .map(|(t, _)| t.clone())
                    .collect::<Vec<Trace>>()
                    .into_iter()
                    .collect()
            };
            let (test, train) = (pick(true), pick(false));
            let Ok(net) = miner.discover(&train) else {
                return Metric::Unreliable;
            };
            let fi = evaluate_model(&test, &net, true, false, budget, costs).fitness;
            let pr = evaluate_model(log, &net, false, true, budget, costs).precision;
            f1(fi, pr)
        })
        .collect();
    if terms.iter().any(|t| !matches!(t, Metric::Value(_))) {
        return Metric::Unreliable;
    }
    Metric::Value(terms.iter().filter_map(|t| t.value()).sum::<f64>() / k as f64)
}

/// Stable per-label seed derived from the run seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, then a splitmix64 finalizer
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Evaluates every subprocess model on its own sublog and averages the
/// reliable values. Subprocesses whose discovery failed get unreliable
/// metrics and no size.
pub fn evaluate_hierarchical<D: Discover + ?Sized>(
    model: &HierarchicalModel,
    miner: &D,
    config: &QualityConfig,
) -> QualityReport {
    let entries: Vec<SubprocessQuality> = model
        .subprocesses()
        .into_par_iter()
        .map(|sp| {
            let log = &model.log_map[&sp];
            let children = model.tree.children(&sp);
            let subprocess_children = children.iter().filter(|c| !model.tree.is_leaf(c)).count();
            let Some(net) = model.model_map.get(&sp) else {
                let u = |on: bool| if on { Metric::Unreliable } else { Metric::NotComputed };
                return SubprocessQuality {
                    label: sp,
                    fitness: u(config.fitness),
                    precision: u(config.precision),
                    f1: u(config.fitness && config.precision),
                    generalization: u(config.generalization),
                    cfc: None,
                    size: None,
                    children: children.len(),
                    subprocess_children,
                };
            };
            let q = evaluate_model(log, net, config.fitness, config.precision, &config.budget, &config.costs);
            let ge = if config.generalization {
                generalization(log, miner, config.k_folds, derive_seed(config.seed, &sp), &config.budget, &config.costs)
            } else {
                Metric::NotComputed
            };
            SubprocessQuality {
                label: sp,
                fitness: q.fitness,
                precision: q.precision,
                f1: q.f1,
                generalization: ge,
                cfc: Some(net.cfc()),
                size: Some(net.size()),
                children: children.len(),
                subprocess_children,
            }
        })
        .collect();
    QualityReport::new(entries, model.tree.leaves().len(), model.failures.keys().cloned().collect())
}
