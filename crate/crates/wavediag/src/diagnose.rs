//! Decision rule, windowed joint verdicts and classification metrics.
//!
//! The classifier emits a raw scalar per sample; rounding maps it to a
//! class code when it falls inside the valid window (-0.5, K-0.5),
//! otherwise the decision is Unknown. A verdict then judges a window of
//! decisions: a long enough trailing run of one fault class wins (a fault
//! arriving mid-window must beat a normal majority), else the majority of
//! the known decisions.

use serde_json::json;

use crate::error::{Error, Result};
use crate::signal::ClassLabel;

/// One per-sample decision: a class code or Unknown, plus the raw f(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub kind: DecisionKind,
    pub raw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionKind {
    Class(u8),
    Unknown,
}

/// Rounds the raw classifier output half-away-from-zero when it lies
/// inside (-0.5, class_count - 0.5); anything outside is Unknown.
pub fn round_decision(f: f64, class_count: usize) -> Result<Decision> {
    if !f.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite classifier output {f}")));
    }
    if class_count == 0 {
        return Err(Error::InvalidArgument("class_count must be >= 1".into()));
    }
    let hi = (class_count - 1) as f64 + 0.5;
    let kind = if f > -0.5 && f < hi {
        DecisionKind::Class(f.round() as u8)
    } else {
        DecisionKind::Unknown
    };
    Ok(Decision { kind, raw: f })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictRule {
    TrailingRun,
    Majority,
}

impl VerdictRule {
    pub fn name(self) -> &'static str {
        match self {
            VerdictRule::TrailingRun => "TrailingRun",
            VerdictRule::Majority => "Majority",
        }
    }
}

/// Joint decision over one window of per-sample decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub final_code: u8,
    /// Vote counts per class code.
    pub counts: Vec<usize>,
    pub unknown_count: usize,
    pub rule: VerdictRule,
    pub window: Vec<Decision>,
}

impl Verdict {
    /// One NDJSON object per window.
    pub fn to_json_line(&self, window_index: usize) -> String {
        let counts: serde_json::Map<String, serde_json::Value> = self
            .counts
            .iter()
            .enumerate()
            .map(|(c, &n)| {
                let name = ClassLabel::from_code(c as u8)
                    .map(|l| l.name().to_string())
                    .unwrap_or_else(|_| format!("class{c}"));
                (name, json!(n))
            })
            .chain(std::iter::once(("Unknown".to_string(), json!(self.unknown_count))))
            .collect();
        let decisions: Vec<serde_json::Value> = self
            .window
            .iter()
            .map(|d| match d.kind {
                DecisionKind::Class(c) => json!(c),
                DecisionKind::Unknown => serde_json::Value::Null,
            })
            .collect();
        json!({
            "window_index": window_index,
            "final": ClassLabel::from_code(self.final_code)
                .map(|l| l.name().to_string())
                .unwrap_or_else(|_| format!("class{}", self.final_code)),
            "final_code": self.final_code,
            "rule": self.rule.name(),
            "counts": counts,
            "decisions": decisions,
        })
        .to_string()
    }
}

/// Joint verdict over a window.
///
/// If the window ends in a run of at least `run_min` identical non-Normal
/// class decisions, that fault wins (TrailingRun). Otherwise the majority
/// class over the known decisions wins, ties toward the lower code; a
/// window of only Unknown decisions reports Normal.
pub fn window_verdict(decisions: &[Decision], run_min: usize) -> Result<Verdict> {
    if decisions.is_empty() {
        return Err(Error::InvalidArgument("empty decision window".into()));
    }
    if run_min == 0 {
        return Err(Error::InvalidArgument("run_min must be >= 1".into()));
    }
    let max_code = decisions
        .iter()
        .filter_map(|d| match d.kind {
            DecisionKind::Class(c) => Some(c as usize),
            DecisionKind::Unknown => None,
        })
        .max();
    let n_classes = max_code.map(|m| m + 1).unwrap_or(0).max(ClassLabel::COUNT);
    let mut counts = vec![0usize; n_classes];
    let mut unknown_count = 0usize;
    for d in decisions {
        match d.kind {
            DecisionKind::Class(c) => counts[c as usize] += 1,
            DecisionKind::Unknown => unknown_count += 1,
        }
    }

    if let DecisionKind::Class(last) = decisions.last().unwrap().kind {
        if last != 0 {
            let run = decisions
                .iter()
                .rev()
                .take_while(|d| d.kind == DecisionKind::Class(last))
                .count();
            if run >= run_min {
                return Ok(Verdict {
                    final_code: last,
                    counts,
                    unknown_count,
                    rule: VerdictRule::TrailingRun,
                    window: decisions.to_vec(),
                });
            }
        }
    }

    let final_code = if unknown_count == decisions.len() {
        0
    } else {
        counts
            .iter()
            .enumerate()
            .max_by_key(|&(c, &n)| (n, std::cmp::Reverse(c)))
            .map(|(c, _)| c as u8)
            .unwrap()
    };
    Ok(Verdict {
        final_code,
        counts,
        unknown_count,
        rule: VerdictRule::Majority,
        window: decisions.to_vec(),
    })
}

/// Confusion matrix plus per-class precision/recall and overall accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// `confusion[truth][pred]`
    pub confusion: Vec<Vec<usize>>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub accuracy: f64,
}

impl MetricsReport {
    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }
}

impl std::fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "accuracy: {:.4}", self.accuracy)?;
        writeln!(f, "class precision recall")?;
        for c in 0..self.precision.len() {
            let name = ClassLabel::from_code(c as u8)
                .map(|l| l.name().to_string())
                .unwrap_or_else(|_| format!("class{c}"));
            writeln!(f, "{name} {:.4} {:.4}", self.precision[c], self.recall[c])?;
        }
        Ok(())
    }
}

/// Tallies predictions against truth. Precision is column-wise, recall
/// row-wise; empty columns/rows score 0.
pub fn metrics(pred: &[u8], truth: &[u8], class_count: usize) -> Result<MetricsReport> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("empty label lists".into()));
    }
    if pred.iter().chain(truth).any(|&c| c as usize >= class_count) {
        return Err(Error::InvalidArgument(format!("label code >= class_count {class_count}")));
    }
    let mut confusion = vec![vec![0usize; class_count]; class_count];
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[t as usize][p as usize] += 1;
    }
    let total = pred.len();
    let mut precision = vec![0.0; class_count];
    let mut recall = vec![0.0; class_count];
    let mut trace = 0usize;
    for c in 0..class_count {
        trace += confusion[c][c];
        let col: usize = (0..class_count).map(|t| confusion[t][c]).sum();
        let row: usize = confusion[c].iter().sum();
        if col > 0 {
            precision[c] = confusion[c][c] as f64 / col as f64;
        }
        if row > 0 {
            recall[c] = confusion[c][c] as f64 / row as f64;
        }
    }
    Ok(MetricsReport { confusion, precision, recall, accuracy: trace as f64 / total as f64 })
}
