//! Glue between the stages: per-channel compression of recordings into
//! labeled feature points, the stratified train/test split, model
//! training and evaluation, and the streaming window protocol.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnose::{self, Decision, MetricsReport, Verdict};
use crate::dfn::{self, MLPConfig, MLPModel, TrainReport};
use crate::error::{Error, Result};
use crate::signal::{window_iter, LabeledPointSet, Recording};
use crate::wavelet::compress;

/// Compresses every channel of a recording. The sample rate drops by
/// 2^levels; each output point takes the label of the first raw sample in
/// its block.
pub fn compress_recording(rec: &Recording, levels: usize) -> Result<Recording> {
    let block = 1usize << levels;
    let channels: Vec<Vec<f64>> = rec
        .channels()
        .iter()
        .map(|c| compress(c, levels))
        .collect::<Result<_>>()?;
    let labels = rec
        .labels()
        .map(|l| l.iter().step_by(block).copied().collect::<Vec<u8>>());
    Recording::new(
        rec.channel_names().to_vec(),
        rec.sample_rate_hz() / block as f64,
        channels,
        labels,
    )
}

/// Turns a labeled recording into per-time-point feature vectors, one per
/// sample, features in channel order.
pub fn points_from_recording(rec: &Recording) -> Result<LabeledPointSet> {
    let labels = rec
        .labels()
        .ok_or_else(|| Error::InvalidArgument("recording has no labels".into()))?;
    let points = (0..rec.len())
        .map(|t| {
            let v: Vec<f64> = rec.channels().iter().map(|c| c[t]).collect();
            (v, labels[t])
        })
        .collect();
    LabeledPointSet::new(rec.channel_names().to_vec(), points)
}

/// Compresses labeled recordings and pools the resulting points. All
/// recordings must share channel names.
pub fn compress_to_points(recs: &[Recording], levels: usize) -> Result<LabeledPointSet> {
    let first = recs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no input recordings".into()))?;
    let names = first.channel_names().to_vec();
    let mut points = Vec::new();
    for rec in recs {
        if rec.channel_names() != names {
            return Err(Error::InvalidArgument("recordings have mismatched channels".into()));
        }
        let set = points_from_recording(&compress_recording(rec, levels)?)?;
        points.extend(set.points);
    }
    LabeledPointSet::new(names, points)
}

/// Per-class stratified split. Each class contributes
/// `round(fraction * n_class)` points to the first set, chosen by a
/// seeded shuffle, so the split is deterministic given the seed.
pub fn stratified_split(
    points: &LabeledPointSet,
    fraction: f64,
    seed: u64,
) -> Result<(LabeledPointSet, LabeledPointSet)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("split fraction must be in (0,1), got {fraction}")));
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty point set".into()));
    }
    let mut by_class: Vec<Vec<usize>> = Vec::new();
    for (i, (_, c)) in points.points.iter().enumerate() {
        let c = *c as usize;
        if by_class.len() <= c {
            by_class.resize(c + 1, Vec::new());
        }
        by_class[c].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first = Vec::new();
    let mut second = Vec::new();
    for idxs in by_class.iter_mut() {
        for i in (1..idxs.len()).rev() {
            let j = rng.gen_range(0..=i);
            idxs.swap(i, j);
        }
        let take = (fraction * idxs.len() as f64).round() as usize;
        for (pos, &i) in idxs.iter().enumerate() {
            if pos < take {
                first.push(points.points[i].clone());
            } else {
                second.push(points.points[i].clone());
            }
        }
    }
    Ok((
        LabeledPointSet::new(points.feature_names.clone(), first)?,
        LabeledPointSet::new(points.feature_names.clone(), second)?,
    ))
}

/// Runs a trained model over a point set and tallies the outcome.
/// Out-of-window (Unknown) outputs are tallied as the code furthest from
/// the truth, so they always score as errors.
pub fn evaluate_model(model: &MLPModel, points: &LabeledPointSet) -> Result<MetricsReport> {
    let mut pred = Vec::with_capacity(points.len());
    let mut truth = Vec::with_capacity(points.len());
    for (v, c) in &points.points {
        let raw = dfn::predict(model, v)?;
        let d = diagnose::round_decision(raw, model.class_count)?;
        let p = match d.kind {
            diagnose::DecisionKind::Class(p) => p,
            // out-of-window outputs score as a guaranteed miss: the code
            // furthest from the truth
            diagnose::DecisionKind::Unknown => {
                if (*c as usize) < model.class_count / 2 {
                    (model.class_count - 1) as u8
                } else {
                    0
                }
            }
        };
        pred.push(p);
        truth.push(*c);
    }
    diagnose::metrics(&pred, &truth, model.class_count)
}

/// Evaluates a KNN baseline fitted on `train` (normalized with the DFN
/// model's statistics) against `test`.
pub fn evaluate_knn_baseline(
    model: &MLPModel,
    train: &LabeledPointSet,
    test: &LabeledPointSet,
    k: usize,
) -> Result<MetricsReport> {
    use crate::knn::{knn_fit, knn_predict};
    use crate::preprocess::apply;

    let normalize = |set: &LabeledPointSet| -> Result<LabeledPointSet> {
        let points = set
            .points
            .iter()
            .map(|(v, c)| Ok((apply(&model.normalizer, v)?, *c)))
            .collect::<Result<_>>()?;
        LabeledPointSet::new(set.feature_names.clone(), points)
    };
    let train_n = normalize(train)?;
    let test_n = normalize(test)?;
    let knn = knn_fit(&train_n, k)?;
    let mut pred = Vec::with_capacity(test_n.len());
    let mut truth = Vec::with_capacity(test_n.len());
    for (v, c) in &test_n.points {
        pred.push(knn_predict(&knn, v)?);
        truth.push(*c);
    }
    diagnose::metrics(&pred, &truth, model.class_count)
}

/// Outcome of the end-to-end training pipeline.
pub struct PipelineOutcome {
    pub model: MLPModel,
    pub train_report: TrainReport,
    pub holdout_metrics: MetricsReport,
    pub train_points: LabeledPointSet,
    pub holdout_points: LabeledPointSet,
}

/// compress -> split -> train -> evaluate, the whole training path.
pub fn train_pipeline(
    recs: &[Recording],
    mlp: &MLPConfig,
    levels: usize,
    split: f64,
    split_seed: u64,
) -> Result<PipelineOutcome> {
    let points = compress_to_points(recs, levels)?;
    let (train_points, holdout_points) = stratified_split(&points, split, split_seed)?;
    let (model, train_report) = dfn::train(mlp, &train_points)?;
    let holdout_metrics = evaluate_model(&model, &holdout_points)?;
    Ok(PipelineOutcome { model, train_report, holdout_metrics, train_points, holdout_points })
}

/// Streaming diagnosis: for each consecutive window of `window_raw` raw
/// samples per channel, compress, classify each compressed point and emit
/// one joint verdict. Holds one window in memory at a time.
pub fn stream_verdicts<'a>(
    model: &'a MLPModel,
    rec: &'a Recording,
    window_raw: usize,
    levels: usize,
    run_min: usize,
) -> Result<impl Iterator<Item = Result<Verdict>> + 'a> {
    if window_raw == 0 || window_raw % (1usize << levels) != 0 {
        return Err(Error::InvalidArgument(format!(
            "window_raw {window_raw} must be divisible by 2^{levels}"
        )));
    }
    if rec.channel_names() != model.normalizer.feature_names.as_slice() {
        return Err(Error::InvalidArgument(format!(
            "recording channels {:?} do not match model features {:?}",
            rec.channel_names(),
            model.normalizer.feature_names
        )));
    }
    let windows = window_iter(rec, window_raw)?;
    Ok(windows.map(move |w| {
        let compressed = compress_recording(&w, levels)?;
        let mut decisions: Vec<Decision> = Vec::with_capacity(compressed.len());
        for t in 0..compressed.len() {
            let v: Vec<f64> = compressed.channels().iter().map(|c| c[t]).collect();
            let raw = dfn::predict(model, &v)?;
            decisions.push(diagnose::round_decision(raw, model.class_count)?);
        }
        diagnose::window_verdict(&decisions, run_min)
    }))
}
