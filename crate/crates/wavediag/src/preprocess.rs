//! Min-max normalization of compressed features onto a target interval,
//! default [-1, 1]. Compressed samples have no physical magnitude (the
//! transform rescales them), so the classifier always sees normalized
//! inputs. Statistics are fitted once over the training corpus and then
//! travel inside the model file.

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::signal::LabeledPointSet;

/// Per-feature min/max plus the target interval. Degenerate features
/// (min == max) map to the target midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizerStats {
    pub feature_names: Vec<String>,
    pub x_min: Vec<f64>,
    pub x_max: Vec<f64>,
    pub target_lo: f64,
    pub target_hi: f64,
    pub degenerate_flags: Vec<bool>,
}

impl NormalizerStats {
    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    /// CSV export: one row per feature.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,x_min,x_max,degenerate\n");
        for i in 0..self.dim() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.feature_names[i],
                g17(self.x_min[i]),
                g17(self.x_max[i]),
                self.degenerate_flags[i] as u8
            ));
        }
        out
    }
}

/// Per-feature extrema over every point in the set.
pub fn fit(points: &LabeledPointSet, target_lo: f64, target_hi: f64) -> Result<NormalizerStats> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("cannot fit a normalizer on an empty set".into()));
    }
    if !(target_lo < target_hi) {
        return Err(Error::InvalidArgument(format!(
            "target_lo {target_lo} must be below target_hi {target_hi}"
        )));
    }
    let dim = points.feature_names.len();
    let mut x_min = vec![f64::INFINITY; dim];
    let mut x_max = vec![f64::NEG_INFINITY; dim];
    for (v, _) in &points.points {
        for i in 0..dim {
            x_min[i] = x_min[i].min(v[i]);
            x_max[i] = x_max[i].max(v[i]);
        }
    }
    let degenerate_flags = x_min.iter().zip(&x_max).map(|(a, b)| a == b).collect();
    Ok(NormalizerStats {
        feature_names: points.feature_names.clone(),
        x_min,
        x_max,
        target_lo,
        target_hi,
        degenerate_flags,
    })
}

/// Affine map onto the target interval. Values outside the fitted range
/// extrapolate linearly; no clamping.
pub fn apply(stats: &NormalizerStats, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != stats.dim() {
        return Err(Error::InvalidArgument(format!(
            "vector length {} does not match {} features",
            v.len(),
            stats.dim()
        )));
    }
    let span = stats.target_hi - stats.target_lo;
    Ok((0..v.len())
        .map(|i| {
            if stats.degenerate_flags[i] {
                (stats.target_lo + stats.target_hi) / 2.0
            } else {
                stats.target_lo + (v[i] - stats.x_min[i]) * span / (stats.x_max[i] - stats.x_min[i])
            }
        })
        .collect())
}

/// Exact affine inverse of [`apply`]. Rejected on degenerate features,
/// whose forward map is not injective.
pub fn invert(stats: &NormalizerStats, v_prime: &[f64]) -> Result<Vec<f64>> {
    if v_prime.len() != stats.dim() {
        return Err(Error::InvalidArgument(format!(
            "vector length {} does not match {} features",
            v_prime.len(),
            stats.dim()
        )));
    }
    let span = stats.target_hi - stats.target_lo;
    let mut out = Vec::with_capacity(v_prime.len());
    for i in 0..v_prime.len() {
        if stats.degenerate_flags[i] {
            return Err(Error::DegenerateInput(format!(
                "feature {:?} is degenerate and cannot be inverted",
                stats.feature_names[i]
            )));
        }
        out.push(stats.x_min[i] + (v_prime[i] - stats.target_lo) * (stats.x_max[i] - stats.x_min[i]) / span);
    }
    Ok(out)
}
