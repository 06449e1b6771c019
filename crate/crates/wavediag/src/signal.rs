//! Domain types for multichannel recordings, fault-class labels and
//! windowing, plus the CSV format shared by every pipeline stage.
//!
//! CSV layout: UTF-8, comma separated, `.` decimal point, mandatory header
//! `t,<channel>...[,label]`. The `t` column exists only to carry the sample
//! rate (inferred from the first two rows); values are written with 17
//! significant digits so a save/load round trip is exact.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt::g17;

/// The seven converter states the classifier distinguishes.
///
/// `Normal` plus four single-switch open-circuit faults and the two
/// double-switch combinations. Codes are contiguous so the scalar
/// regression target of the classifier stays well defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassLabel {
    Normal,
    S1,
    S2,
    S3,
    S4,
    S1S2,
    S2S4,
}

impl ClassLabel {
    pub const COUNT: usize = 7;

    pub const ALL: [ClassLabel; 7] = [
        ClassLabel::Normal,
        ClassLabel::S1,
        ClassLabel::S2,
        ClassLabel::S3,
        ClassLabel::S4,
        ClassLabel::S1S2,
        ClassLabel::S2S4,
    ];

    pub fn code(self) -> u8 {
        match self {
            ClassLabel::Normal => 0,
            ClassLabel::S1 => 1,
            ClassLabel::S2 => 2,
            ClassLabel::S3 => 3,
            ClassLabel::S4 => 4,
            ClassLabel::S1S2 => 5,
            ClassLabel::S2S4 => 6,
        }
    }

    pub fn from_code(code: u8) -> Result<ClassLabel> {
        Self::ALL
            .get(code as usize)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("unknown label code {code}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Normal => "Normal",
            ClassLabel::S1 => "S1",
            ClassLabel::S2 => "S2",
            ClassLabel::S3 => "S3",
            ClassLabel::S4 => "S4",
            ClassLabel::S1S2 => "S1S2",
            ClassLabel::S2S4 => "S2S4",
        }
    }

    pub fn from_name(name: &str) -> Result<ClassLabel> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown label name {name:?}")))
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named multichannel time series at a fixed sample rate, optionally
/// labeled per sample. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    channel_names: Vec<String>,
    sample_rate_hz: f64,
    samples: Vec<Vec<f64>>,
    labels: Option<Vec<u8>>,
}

impl Recording {
    pub fn new(
        channel_names: Vec<String>,
        sample_rate_hz: f64,
        samples: Vec<Vec<f64>>,
        labels: Option<Vec<u8>>,
    ) -> Result<Recording> {
        if channel_names.is_empty() {
            return Err(Error::InvalidArgument("recording needs at least one channel".into()));
        }
        if channel_names.len() != samples.len() {
            return Err(Error::InvalidArgument(format!(
                "{} channel names but {} sample columns",
                channel_names.len(),
                samples.len()
            )));
        }
        for (i, a) in channel_names.iter().enumerate() {
            if channel_names[i + 1..].contains(a) {
                return Err(Error::InvalidArgument(format!("duplicate channel name {a:?}")));
            }
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let len = samples[0].len();
        if len == 0 {
            return Err(Error::InvalidArgument("channels must be non-empty".into()));
        }
        if samples.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidArgument("channels have unequal lengths".into()));
        }
        if let Some(ref l) = labels {
            if l.len() != len {
                return Err(Error::InvalidArgument(format!(
                    "{} labels for {} samples",
                    l.len(),
                    len
                )));
            }
            for &code in l {
                ClassLabel::from_code(code)?;
            }
        }
        Ok(Recording { channel_names, sample_rate_hz, samples, labels })
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Samples of channel `i`, in channel order.
    pub fn channel(&self, i: usize) -> &[f64] {
        &self.samples[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn channel_by_name(&self, name: &str) -> Option<&[f64]> {
        self.channel_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.samples[i].as_slice())
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// Number of samples per channel.
    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty channels
    }

    /// A new recording restricted to the named channels, in the given order.
    pub fn select_channels(&self, names: &[String]) -> Result<Recording> {
        let mut samples = Vec::with_capacity(names.len());
        for name in names {
            let col = self
                .channel_by_name(name)
                .ok_or_else(|| Error::InvalidArgument(format!("no channel named {name:?}")))?;
            samples.push(col.to_vec());
        }
        Recording::new(names.to_vec(), self.sample_rate_hz, samples, self.labels.clone())
    }
}

/// Feature vectors paired with class codes; the unit of classifier
/// training and evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointSet {
    pub feature_names: Vec<String>,
    pub points: Vec<(Vec<f64>, u8)>,
}

impl LabeledPointSet {
    pub fn new(feature_names: Vec<String>, points: Vec<(Vec<f64>, u8)>) -> Result<LabeledPointSet> {
        let dim = feature_names.len();
        for (v, code) in &points {
            if v.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "point has {} features, expected {dim}",
                    v.len()
                )));
            }
            ClassLabel::from_code(*code)?;
        }
        Ok(LabeledPointSet { feature_names, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Reads a recording from CSV. The sample rate comes from the spacing of
/// the first two `t` values, so at least two data rows are required.
pub fn load_recording_csv(path: impl AsRef<Path>) -> Result<Recording> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_recording_csv(&text)
}

/// CSV parser behind [`load_recording_csv`]; exposed for in-memory use.
pub fn parse_recording_csv(text: &str) -> Result<Recording> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"t") {
        return Err(Error::Parse { line: 1, msg: format!("header must start with 't', got {header:?}") });
    }
    let has_label = cols.last() == Some(&"label");
    let name_end = if has_label { cols.len() - 1 } else { cols.len() };
    if name_end < 2 {
        return Err(Error::Parse { line: 1, msg: "header names no channels".into() });
    }
    let channel_names: Vec<String> = cols[1..name_end].iter().map(|s| s.to_string()).collect();
    let n_chan = channel_names.len();

    let mut times: Vec<f64> = Vec::new();
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); n_chan];
    let mut labels: Vec<u8> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != cols.len() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("row has {} cells, header has {}", cells.len(), cols.len()),
            });
        }
        let parse_num = |cell: &str| -> Result<f64> {
            cell.parse::<f64>()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("non-numeric cell {cell:?}") })
        };
        times.push(parse_num(cells[0])?);
        for (c, cell) in cells[1..=n_chan].iter().enumerate() {
            samples[c].push(parse_num(cell)?);
        }
        if has_label {
            let cell = cells[cols.len() - 1];
            let code: u8 = cell
                .parse()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("bad label cell {cell:?}") })?;
            ClassLabel::from_code(code)
                .map_err(|_| Error::Parse { line: lineno, msg: format!("unknown label code {code}") })?;
            labels.push(code);
        }
    }
    if times.len() < 2 {
        return Err(Error::Parse {
            line: times.len() + 1,
            msg: "need at least two data rows to infer the sample rate".into(),
        });
    }
    let dt = times[1] - times[0];
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Parse { line: 3, msg: format!("non-increasing time step {dt}") });
    }
    Recording::new(channel_names, 1.0 / dt, samples, if has_label { Some(labels) } else { None })
}

/// Writes a recording in the CSV layout read by [`load_recording_csv`].
pub fn save_recording_csv(rec: &Recording, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), recording_to_csv(rec))?;
    Ok(())
}

pub fn recording_to_csv(rec: &Recording) -> String {
    let mut out = String::from("t");
    for name in rec.channel_names() {
        out.push(',');
        out.push_str(name);
    }
    if rec.labels().is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    let dt = 1.0 / rec.sample_rate_hz();
    for i in 0..rec.len() {
        out.push_str(&g17(i as f64 * dt));
        for c in 0..rec.channel_names().len() {
            out.push(',');
            out.push_str(&g17(rec.channel(c)[i]));
        }
        if let Some(labels) = rec.labels() {
            out.push(',');
            out.push_str(&labels[i].to_string());
        }
        out.push('\n');
    }
    out
}

/// Consecutive non-overlapping windows of `window_len` samples; a trailing
/// partial window is dropped.
pub fn window_iter(
    rec: &Recording,
    window_len: usize,
) -> Result<impl Iterator<Item = Recording> + '_> {
    if window_len == 0 {
        return Err(Error::InvalidArgument("window_len must be >= 1".into()));
    }
    let full = rec.len() / window_len;
    Ok((0..full).map(move |w| {
        let lo = w * window_len;
        let hi = lo + window_len;
        let samples: Vec<Vec<f64>> = rec.channels().iter().map(|c| c[lo..hi].to_vec()).collect();
        let labels = rec.labels().map(|l| l[lo..hi].to_vec());
        Recording::new(rec.channel_names().to_vec(), rec.sample_rate_hz(), samples, labels)
            .expect("window of a valid recording is valid")
    }))
}
