//! Orthonormal Haar analysis/synthesis and approximation-only lossy
//! compression.
//!
//! One analysis step maps sample pairs to a scaled average and a scaled
//! difference, both divided by sqrt(2), so energy is preserved at every
//! level (Parseval). Compression keeps only the final approximation:
//! three levels shrink a signal by 8x.

use crate::error::{Error, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// One level of Haar analysis. Returns `(approx, detail)`, each half the
/// input length.
pub fn haar_forward_step(seq: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if seq.is_empty() || seq.len() % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "Haar step needs an even non-zero length, got {}",
            seq.len()
        )));
    }
    let half = seq.len() / 2;
    let mut approx = Vec::with_capacity(half);
    let mut detail = Vec::with_capacity(half);
    for k in 0..half {
        let a = seq[2 * k];
        let b = seq[2 * k + 1];
        approx.push((a + b) / SQRT2);
        detail.push((a - b) / SQRT2);
    }
    Ok((approx, detail))
}

/// Exact inverse of [`haar_forward_step`].
pub fn haar_inverse_step(approx: &[f64], detail: &[f64]) -> Result<Vec<f64>> {
    if approx.len() != detail.len() {
        return Err(Error::InvalidArgument(format!(
            "approx length {} != detail length {}",
            approx.len(),
            detail.len()
        )));
    }
    let mut out = Vec::with_capacity(approx.len() * 2);
    for (a, d) in approx.iter().zip(detail) {
        out.push((a + d) / SQRT2);
        out.push((a - d) / SQRT2);
    }
    Ok(out)
}

/// A multi-level Haar decomposition: per-level detail arrays (finest
/// first) plus the final approximation. Losslessly carries the input.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    levels: Vec<Vec<f64>>,
    approx: Vec<f64>,
    original_len: usize,
}

impl WaveletPyramid {
    pub fn new(levels: Vec<Vec<f64>>, approx: Vec<f64>, original_len: usize) -> Result<WaveletPyramid> {
        let depth = levels.len();
        if depth == 0 {
            return Err(Error::Structure("pyramid needs at least one level".into()));
        }
        if original_len == 0 || original_len % (1usize << depth) != 0 {
            return Err(Error::Structure(format!(
                "original_len {original_len} not divisible by 2^{depth}"
            )));
        }
        for (k, d) in levels.iter().enumerate() {
            let want = original_len >> (k + 1);
            if d.len() != want {
                return Err(Error::Structure(format!(
                    "detail at depth {k} has length {}, expected {want}",
                    d.len()
                )));
            }
        }
        if approx.len() != original_len >> depth {
            return Err(Error::Structure(format!(
                "approx has length {}, expected {}",
                approx.len(),
                original_len >> depth
            )));
        }
        Ok(WaveletPyramid { levels, approx, original_len })
    }

    /// Detail arrays, finest first.
    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn approx(&self) -> &[f64] {
        &self.approx
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    /// One block per line: `approx` first, then details coarsest to
    /// finest. For inspection only; the pipeline never reads this back.
    pub fn to_csv(&self) -> String {
        use crate::fmt::g17;
        let row = |tag: &str, vals: &[f64]| {
            let mut s = tag.to_string();
            for v in vals {
                s.push(',');
                s.push_str(&g17(*v));
            }
            s.push('\n');
            s
        };
        let mut out = row("approx", &self.approx);
        for (k, d) in self.levels.iter().enumerate().rev() {
            out.push_str(&row(&format!("detail{k}"), d));
        }
        out
    }
}

/// Repeated Haar analysis of `seq`; the running approximation is split
/// `levels` times. Length must be divisible by `2^levels`.
pub fn decompose(seq: &[f64], levels: usize) -> Result<WaveletPyramid> {
    if levels == 0 {
        return Err(Error::InvalidArgument("levels must be >= 1".into()));
    }
    let div = 1usize
        .checked_shl(levels as u32)
        .ok_or_else(|| Error::InvalidArgument(format!("levels {levels} too large")))?;
    if seq.is_empty() || seq.len() % div != 0 {
        return Err(Error::InvalidArgument(format!(
            "length {} not divisible by 2^{levels} = {div}",
            seq.len()
        )));
    }
    let mut details = Vec::with_capacity(levels);
    let mut approx = seq.to_vec();
    for _ in 0..levels {
        let (a, d) = haar_forward_step(&approx)?;
        details.push(d);
        approx = a;
    }
    WaveletPyramid::new(details, approx, seq.len())
}

/// Exact inverse of [`decompose`] up to floating round-off.
pub fn reconstruct(pyr: &WaveletPyramid) -> Result<Vec<f64>> {
    let mut cur = pyr.approx.clone();
    for detail in pyr.levels.iter().rev() {
        cur = haar_inverse_step(&cur, detail)?;
    }
    Ok(cur)
}

/// Lossy compression: decompose and keep only the final approximation.
/// Output length is exactly `seq.len() / 2^levels`.
pub fn compress(seq: &[f64], levels: usize) -> Result<Vec<f64>> {
    let mut approx = {
        let div = 1usize
            .checked_shl(levels as u32)
            .filter(|_| levels >= 1)
            .ok_or_else(|| Error::InvalidArgument(format!("levels must be in 1..=63, got {levels}")))?;
        if seq.is_empty() || seq.len() % div != 0 {
            return Err(Error::InvalidArgument(format!(
                "length {} not divisible by 2^{levels} = {div}",
                seq.len()
            )));
        }
        seq.to_vec()
    };
    for _ in 0..levels {
        let (a, _) = haar_forward_step(&approx)?;
        approx = a;
    }
    Ok(approx)
}
