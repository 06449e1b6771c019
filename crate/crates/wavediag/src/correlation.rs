//! Pearson-correlation analysis over recording channels and the greedy
//! redundancy-removal feature selection.
//!
//! Selection treats any pair with |r| at or above the redundancy threshold
//! (default 0.5, i.e. significant-or-high correlation) as redundant, keeps
//! one feature per redundancy group, then optionally "fine-tunes" by
//! re-adding the removed feature least correlated with the kept set.

use std::fmt;

use crate::error::{Error, Result};
use crate::signal::Recording;

/// Sample covariance with the m-1 divisor.
pub fn covariance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let m = x.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {m}")));
    }
    let mx = x.iter().sum::<f64>() / m as f64;
    let my = y.iter().sum::<f64>() / m as f64;
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(s / (m - 1) as f64)
}

/// Pearson correlation coefficient. Clamped to [-1, 1] only to absorb
/// round-off; constant inputs are rejected (zero standard deviation).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let sxx = covariance(x, x)?;
    let syy = covariance(y, y)?;
    if sxx <= 0.0 {
        return Err(Error::DegenerateInput("first sequence is constant (sigma = 0)".into()));
    }
    if syy <= 0.0 {
        return Err(Error::DegenerateInput("second sequence is constant (sigma = 0)".into()));
    }
    let r = covariance(x, y)? / (sxx.sqrt() * syy.sqrt());
    Ok(r.clamp(-1.0, 1.0))
}

/// Symmetric matrix of Pearson coefficients over named features.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub r: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    /// Builds a matrix from explicit entries, checking symmetry, the unit
    /// diagonal and the [-1, 1] range.
    pub fn new(names: Vec<String>, r: Vec<Vec<f64>>) -> Result<CorrelationMatrix> {
        let n = names.len();
        if r.len() != n || r.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("matrix shape does not match names".into()));
        }
        for i in 0..n {
            if (r[i][i] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..n {
                if (r[i][j] - r[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("asymmetric at ({i},{j})")));
                }
                if r[i][j].abs() > 1.0 + 1e-12 {
                    return Err(Error::InvalidArgument(format!("entry ({i},{j}) outside [-1,1]")));
                }
            }
        }
        Ok(CorrelationMatrix { names, r })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// CSV with a leading name column and header row.
    pub fn to_csv(&self) -> String {
        use crate::fmt::g17;
        let mut out = String::new();
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, name) in self.names.iter().enumerate() {
            out.push_str(name);
            for v in &self.r[i] {
                out.push(',');
                out.push_str(&g17(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise Pearson coefficients between all channels of a recording.
/// The diagonal is exactly 1.
pub fn correlation_matrix(rec: &Recording) -> Result<CorrelationMatrix> {
    let n = rec.channel_names().len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 channels".into()));
    }
    for (i, name) in rec.channel_names().iter().enumerate() {
        if covariance(rec.channel(i), rec.channel(i))? <= 0.0 {
            return Err(Error::DegenerateInput(format!("channel {name:?} is constant")));
        }
    }
    let mut r = vec![vec![0.0; n]; n];
    for i in 0..n {
        r[i][i] = 1.0;
        for j in i + 1..n {
            let v = pearson(rec.channel(i), rec.channel(j))?;
            r[i][j] = v;
            r[j][i] = v;
        }
    }
    CorrelationMatrix::new(rec.channel_names().to_vec(), r)
}

/// Strength bins on |r|: below 0.3 weak, below 0.5 moderate, below 0.8
/// significant, otherwise high. |r| = 1 counts as high.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationDegree {
    Weak,
    Moderate,
    Significant,
    High,
}

pub fn degree(r: f64) -> Result<CorrelationDegree> {
    let a = r.abs();
    if !(a <= 1.0) {
        return Err(Error::InvalidArgument(format!("|r| must be <= 1, got {r}")));
    }
    Ok(if a < 0.3 {
        CorrelationDegree::Weak
    } else if a < 0.5 {
        CorrelationDegree::Moderate
    } else if a < 0.8 {
        CorrelationDegree::Significant
    } else {
        CorrelationDegree::High
    })
}

/// Outcome of redundancy removal. `kept`, `removed` and `fine_tuned_in`
/// partition the input features; the selected set is `kept` followed by
/// `fine_tuned_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    /// Features kept by the greedy scan, in keep order.
    pub kept: Vec<String>,
    /// Removed features with the kept feature that displaced each.
    pub removed: Vec<(String, String)>,
    /// Removed features re-added by fine-tuning, in re-add order.
    pub fine_tuned_in: Vec<String>,
}

impl SelectionReport {
    /// The final selected feature names: kept then fine-tuned.
    pub fn selected(&self) -> Vec<String> {
        let mut out = self.kept.clone();
        out.extend(self.fine_tuned_in.iter().cloned());
        out
    }
}

impl fmt::Display for SelectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "selected: {}", self.selected().join(" "))?;
        writeln!(f, "kept: {}", self.kept.join(" "))?;
        for (gone, by) in &self.removed {
            writeln!(f, "removed: {gone} displaced-by {by}")?;
        }
        for name in &self.fine_tuned_in {
            writeln!(f, "fine-tuned-in: {name}")?;
        }
        Ok(())
    }
}

/// Greedy redundancy removal with fine-tuning.
///
/// Features are ranked by how many partners they have at or above the
/// threshold (ties by input order); scanning in rank order, each feature
/// not yet displaced is kept and displaces its remaining redundant
/// partners. Fine-tuning then re-adds, `fine_tune_count` times, the
/// removed feature whose maximum |r| against the kept set is smallest.
pub fn select_features(
    cm: &CorrelationMatrix,
    redundancy_threshold: f64,
    fine_tune_count: usize,
) -> Result<SelectionReport> {
    if !(redundancy_threshold > 0.0 && redundancy_threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "redundancy threshold must be in (0, 1], got {redundancy_threshold}"
        )));
    }
    let n = cm.len();
    let redundant = |i: usize, j: usize| cm.r[i][j].abs() >= redundancy_threshold;

    let mut order: Vec<usize> = (0..n).collect();
    let count = |i: usize| (0..n).filter(|&j| j != i && redundant(i, j)).count();
    order.sort_by_key(|&i| (std::cmp::Reverse(count(i)), i));

    let mut kept: Vec<usize> = Vec::new();
    let mut displaced_by: Vec<Option<usize>> = vec![None; n];
    let mut is_kept = vec![false; n];
    for &i in &order {
        if displaced_by[i].is_some() {
            continue;
        }
        is_kept[i] = true;
        kept.push(i);
        for j in 0..n {
            if j != i && !is_kept[j] && displaced_by[j].is_none() && redundant(i, j) {
                displaced_by[j] = Some(i);
            }
        }
    }

    let mut selected = kept.clone();
    let mut fine_tuned: Vec<usize> = Vec::new();
    for _ in 0..fine_tune_count {
        let candidate = (0..n)
            .filter(|&j| displaced_by[j].is_some())
            .map(|j| {
                let worst = selected
                    .iter()
                    .map(|&k| cm.r[j][k].abs())
                    .fold(0.0f64, f64::max);
                (j, worst)
            })
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        let Some((j, _)) = candidate else { break };
        displaced_by[j] = None;
        selected.push(j);
        fine_tuned.push(j);
    }

    Ok(SelectionReport {
        kept: kept.iter().map(|&i| cm.names[i].clone()).collect(),
        removed: (0..n)
            .filter_map(|j| displaced_by[j].map(|by| (cm.names[j].clone(), cm.names[by].clone())))
            .collect(),
        fine_tuned_in: fine_tuned.iter().map(|&i| cm.names[i].clone()).collect(),
    })
}
