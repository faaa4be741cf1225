use serde::Serialize;

use super::Metric;

/// Rendering of an unreliable value in tables.
pub const UNRELIABLE_MARK: &str = "\u{2212}";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubprocessQuality {
    pub label: String,
    pub fitness: Metric,
    pub precision: Metric,
    pub f1: Metric,
    pub generalization: Metric,
    /// `None` when no model was discovered.
    pub cfc: Option<usize>,
    pub size: Option<usize>,
    /// Number of children in the activity tree.
    pub children: usize,
    pub subprocess_children: usize,
}

impl SubprocessQuality {
    fn metrics(&self) -> [Metric; 4] {
        [self.fitness, self.precision, self.f1, self.generalization]
    }

    pub fn is_unreliable(&self) -> bool {
        self.metrics().iter().any(|m| m.is_unreliable())
    }
}

/// Per-metric means over the reliable entries; `None` when there are none.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Averages {
    pub fitness: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub generalization: Option<f64>,
    pub cfc: Option<f64>,
    pub size: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub entries: Vec<SubprocessQuality>,
    pub averages: Averages,
    pub subprocess_count: usize,
    pub activity_count: usize,
    /// Subprocesses with at least one unreliable metric.
    pub unreliable: Vec<String>,
    /// Subprocesses whose discovery failed.
    pub failures: Vec<String>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl QualityReport {
    pub fn new(mut entries: Vec<SubprocessQuality>, activity_count: usize, failures: Vec<String>) -> Self {
        entries.sort_by(|a, b| a.label.cmp(&b.label));
        let avg = |f: fn(&SubprocessQuality) -> Metric| mean(entries.iter().filter_map(|e| f(e).value()));
        let averages = Averages {
            fitness: avg(|e| e.fitness),
            precision: avg(|e| e.precision),
            f1: avg(|e| e.f1),
            generalization: avg(|e| e.generalization),
            cfc: mean(entries.iter().filter_map(|e| e.cfc.map(|v| v as f64))),
            size: mean(entries.iter().filter_map(|e| e.size.map(|v| v as f64))),
        };
        Self {
            unreliable: entries.iter().filter(|e| e.is_unreliable()).map(|e| e.label.clone()).collect(),
            subprocess_count: entries.len(),
            averages,
            entries,
            activity_count,
            failures,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table, one row per subprocess and a final average row.
    /// Unreliable values print as `−`, switched-off ones as `n/a`.
    pub fn to_table(&self) -> String {
        let header = ["Model", "Fi", "Pr", "F1", "Ge", "CFC", "Size", "#SPs", "#Act"];
        let metric = |m: Metric| match m {
            Metric::Value(v) => format!("{v:.2}"),
            Metric::Unreliable => UNRELIABLE_MARK.to_string(),
            Metric::NotComputed => "n/a".to_string(),
        };
        let count = |v: Option<usize>| v.map_or(UNRELIABLE_MARK.to_string(), |v| v.to_string());
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for e in &self.entries {
            rows.push(vec![
                e.label.clone(),
                metric(e.fitness),
                metric(e.precision),
                metric(e.f1),
                metric(e.generalization),
                count(e.cfc),
                count(e.size),
                e.subprocess_children.to_string(),
                (e.children - e.subprocess_children).to_string(),
            ]);
        }
        let avg = |v: Option<f64>, computed: bool| match v {
            Some(v) => format!("{v:.2}"),
            None if computed => UNRELIABLE_MARK.to_string(),
            None => "n/a".to_string(),
        };
        let computed = |f: fn(&SubprocessQuality) -> Metric| self.entries.iter().any(|e| f(e) != Metric::NotComputed);
        let a = &self.averages;
        rows.push(vec![
            "average".to_string(),
            avg(a.fitness, computed(|e| e.fitness)),
            avg(a.precision, computed(|e| e.precision)),
            avg(a.f1, computed(|e| e.f1)),
            avg(a.generalization, computed(|e| e.generalization)),
            avg(a.cfc, true),
            avg(a.size, true),
            self.subprocess_count.to_string(),
            self.activity_count.to_string(),
        ]);

        let widths: Vec<usize> =
            (0..header.len()).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    let pad = widths[c] - v.chars().count();
                    if c == 0 {
                        format!("{v}{}", " ".repeat(pad))
                    } else {
                        format!("{}{v}", " ".repeat(pad))
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if i == 0 || i + 2 == rows.len() {
                let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
        }
        out
    }
}
