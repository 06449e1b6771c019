//! Acceptance gate: one test per shipped guarantee, each printing a single
//! PASS line on success (run with `--nocapture` to see them). The two
//! heavyweight criteria (end-to-end accuracy, baseline ordering) share one
//! trained model through a `OnceLock`.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavediag::correlation::{correlation_matrix, pearson, select_features, CorrelationMatrix};
use wavediag::dfn::{self, backprop, forward, MLPConfig, MLPModel};
use wavediag::diagnose::{
    metrics, round_decision, window_verdict, Decision, DecisionKind, VerdictRule,
};
use wavediag::pipeline::{evaluate_knn_baseline, stream_verdicts, train_pipeline, PipelineOutcome};
use wavediag::preprocess::{apply, fit, invert, NormalizerStats};
use wavediag::signal::{ClassLabel, LabeledPointSet, Recording};
use wavediag::synth::{generate_dataset, generate_recording, SynthConfig};
use wavediag::wavelet::{compress, decompose, haar_forward_step, reconstruct};

fn pass(n: usize, what: &str) {
    println!("criterion {n:2}: PASS - {what}");
}

#[test]
fn criterion_01_haar_golden_values() {
    let start = Instant::now();
    let input = [48.0, 34.0, 24.0, 60.0, 72.0, 28.0, 55.0, 121.0];
    let pyr = decompose(&input, 3).unwrap();
    let close = |got: &[f64], want: &[f64]| {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-3, "got {g}, want {w}");
        }
    };
    // levels() is finest first: details at halving lengths 4, 2, 1.
    close(&pyr.levels()[0], &[9.8995, -25.4558, 31.1127, -46.6690]);
    close(&pyr.levels()[1], &[-1.0, -38.0]);
    close(&pyr.levels()[2], &[-38.8909]);
    close(pyr.approx(), &[156.2706]);
    let (approx1, _) = haar_forward_step(&input).unwrap();
    close(&approx1, &[57.9828, 59.3970, 70.7107, 124.4508]);
    assert!(start.elapsed().as_secs() < 1);
    pass(1, "three-level decomposition matches the worked golden values");
}

#[test]
fn criterion_02_haar_round_trip_and_parseval() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    for i in 0..1000 {
        let k = 1 + i % 12;
        let len = 1usize << k;
        let seq: Vec<f64> = (0..len).map(|_| rng.gen_range(-100.0..100.0)).collect();
        // Parseval at every analysis step.
        let mut current = seq.clone();
        for _ in 0..k {
            let e0 = energy(&current);
            let (a, d) = haar_forward_step(&current).unwrap();
            let e1 = energy(&a) + energy(&d);
            assert!((e0 - e1).abs() <= 1e-9 * e0.max(1.0));
            current = a;
        }
        let pyr = decompose(&seq, k).unwrap();
        let back = reconstruct(&pyr).unwrap();
        let worst = seq.iter().zip(&back).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "len {len}: reconstruction error {worst}");
    }
    assert!(start.elapsed().as_secs() < 5);
    pass(2, "1000 random sequences reconstruct exactly; energy preserved each step");
}

#[test]
fn criterion_03_compression_geometry() {
    let seq: Vec<f64> = (0..160).map(|i| i as f64).collect();
    assert_eq!(compress(&seq, 3).unwrap().len(), 20);
    let long: Vec<f64> = (0..300_000).map(|i| (i % 97) as f64).collect();
    assert_eq!(compress(&long, 3).unwrap().len(), 37_500);
    pass(3, "3-level compression maps 160 -> 20 and 300000 -> 37500 points");
}

#[test]
fn criterion_04_pearson_suite() {
    let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert!((r - 0.8).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.gen_range(8..200);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let rxy = pearson(&x, &y).unwrap();
        let ryx = pearson(&y, &x).unwrap();
        assert_eq!(rxy, ryx);
        assert!(rxy.abs() <= 1.0);
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        // positive affine map leaves r unchanged
        let a = rng.gen_range(0.1..9.0);
        let b = rng.gen_range(-10.0..10.0);
        let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        assert!((pearson(&xs, &y).unwrap() - rxy).abs() < 1e-10);
    }
    pass(4, "hand value 0.8 exact; symmetry, bounds and affine invariance on random data");
}

#[test]
fn criterion_05_feature_selection_traces() {
    // A correlates with both B and C; C only with B. A is kept and
    // displaces both partners; C returns in the fine-tuning pass.
    let names = vec!["A".to_string(), "B".to_string(), "C".to_string()];
    let m = CorrelationMatrix::new(
        names,
        vec![
            vec![1.0, 0.9, 0.6],
            vec![0.9, 1.0, 0.7],
            vec![0.6, 0.7, 1.0],
        ],
    )
    .unwrap();
    let report = select_features(&m, 0.5, 1).unwrap();
    let mut sel = report.selected();
    sel.sort();
    assert_eq!(sel, ["A", "C"]);

    // Uncorrelated features: nothing is redundant, all kept.
    let id = CorrelationMatrix::new(
        vec!["p".into(), "q".into(), "r".into()],
        vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ],
    )
    .unwrap();
    assert_eq!(select_features(&id, 0.5, 1).unwrap().selected().len(), 3);

    // Selection from data is invariant under per-feature positive rescaling.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let n = 512;
    let base: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
    let channels: Vec<Vec<f64>> = (0..5)
        .map(|c| {
            base.iter()
                .map(|v| v * (c as f64 + 1.0) + rng.gen_range(-0.5..0.5))
                .collect()
        })
        .collect();
    let names: Vec<String> = (0..5).map(|c| format!("ch{c}")).collect();
    let rec = Recording::new(names.clone(), 100.0, channels.clone(), None).unwrap();
    let sel1 = select_features(&correlation_matrix(&rec).unwrap(), 0.5, 1).unwrap().selected();
    let rescaled: Vec<Vec<f64>> = channels
        .iter()
        .enumerate()
        .map(|(c, ch)| ch.iter().map(|v| v * (2.0 + c as f64) + 7.0).collect())
        .collect();
    let rec2 = Recording::new(names, 100.0, rescaled, None).unwrap();
    let sel2 = select_features(&correlation_matrix(&rec2).unwrap(), 0.5, 1).unwrap().selected();
    assert_eq!(sel1, sel2);
    pass(5, "greedy trace, identity matrix and affine invariance all as specified");
}

fn random_model(sizes: &[usize], seed: u64) -> MLPModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = MLPConfig { layer_sizes: sizes.to_vec(), ..MLPConfig::default() };
    let dim = sizes[0];
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for w in sizes.windows(2) {
        let bound = 1.0 / (w[0] as f64).sqrt();
        weights.push((0..w[0] * w[1]).map(|_| rng.gen_range(-bound..bound)).collect());
        biases.push((0..w[1]).map(|_| rng.gen_range(-bound..bound)).collect());
    }
    let normalizer = NormalizerStats {
        feature_names: (0..dim).map(|i| format!("f{i}")).collect(),
        x_min: vec![-1.0; dim],
        x_max: vec![1.0; dim],
        target_lo: -1.0,
        target_hi: 1.0,
        degenerate_flags: vec![false; dim],
    };
    MLPModel { weights, biases, config, normalizer, class_count: 7 }
}

#[test]
fn criterion_06_gradient_check() {
    let start = Instant::now();
    let model = random_model(&[4, 8, 8, 1], 99);
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let batch: Vec<(Vec<f64>, f64)> = (0..100)
        .map(|_| {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (x, rng.gen_range(-1.0..1.0))
        })
        .collect();
    let loss = |m: &MLPModel| -> f64 {
        batch
            .iter()
            .map(|(x, t)| {
                let f = forward(m, x).unwrap();
                (f - t) * (f - t)
            })
            .sum::<f64>()
            / batch.len() as f64
    };
    let grads = backprop(&model, &batch).unwrap();
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut check = |analytic: f64, mut bump: Box<dyn FnMut(f64) -> MLPModel>| {
        let numeric = (loss(&bump(h)) - loss(&bump(-h))) / (2.0 * h);
        // The central difference carries ~eps*loss/(2h) =~ 1e-11 of
        // absolute round-off; below that, relative error is meaningless.
        if analytic.abs() < 1e-6 && numeric.abs() < 1e-6 {
            return;
        }
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs());
        worst = worst.max(rel);
        assert!(rel < 1e-5, "analytic {analytic} vs numeric {numeric} (rel {rel})");
    };
    for l in 0..model.weights.len() {
        for i in 0..model.weights[l].len() {
            let base = model.clone();
            check(
                grads.weights[l][i],
                Box::new(move |eps| {
                    let mut m = base.clone();
                    m.weights[l][i] += eps;
                    m
                }),
            );
        }
        for i in 0..model.biases[l].len() {
            let base = model.clone();
            check(
                grads.biases[l][i],
                Box::new(move |eps| {
                    let mut m = base.clone();
                    m.biases[l][i] += eps;
                    m
                }),
            );
        }
    }
    assert!(start.elapsed().as_secs() < 10);
    pass(6, "backprop matches central differences on [4,8,8,1]; worst relative error recorded");
}

/// Shared end-to-end run on the default seeded corpus. The epoch budget is
/// trimmed from the library default because held-out accuracy saturates
/// within the first few hundred epochs on this corpus; the same
/// hyperparameters are trained twice to demonstrate determinism.
struct SharedRun {
    outcome: PipelineOutcome,
    rerun_identical: bool,
    elapsed_s: f64,
}

fn shared_run() -> &'static SharedRun {
    static RUN: OnceLock<SharedRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let synth = SynthConfig::default();
        let recs = generate_dataset(&synth).unwrap();
        let mlp = MLPConfig { max_epochs: 400, ..MLPConfig::default() };
        let a = train_pipeline(&recs, &mlp, 3, 0.3, mlp.seed).unwrap();
        let b = train_pipeline(&recs, &mlp, 3, 0.3, mlp.seed).unwrap();
        let rerun_identical = dfn::model_to_string(&a.model) == dfn::model_to_string(&b.model)
            && a.holdout_metrics.accuracy == b.holdout_metrics.accuracy;
        SharedRun { outcome: a, rerun_identical, elapsed_s: start.elapsed().as_secs_f64() }
    })
}

#[test]
fn criterion_07_end_to_end_accuracy() {
    let run = shared_run();
    let acc = run.outcome.holdout_metrics.accuracy;
    assert!(acc >= 0.97, "held-out accuracy {acc}");
    assert!(run.rerun_identical, "retraining was not byte-identical");
    assert!(run.elapsed_s < 300.0, "two training runs took {:.1}s", run.elapsed_s);
    pass(7, "default corpus held-out accuracy >= 0.97, deterministic, within budget");
}

#[test]
fn criterion_08_dfn_beats_or_matches_knn() {
    let run = shared_run();
    let knn = evaluate_knn_baseline(
        &run.outcome.model,
        &run.outcome.train_points,
        &run.outcome.holdout_points,
        5,
    )
    .unwrap();
    let dfn_acc = run.outcome.holdout_metrics.accuracy;
    assert!(
        dfn_acc >= knn.accuracy,
        "DFN {dfn_acc} below KNN {}",
        knn.accuracy
    );
    pass(8, "DFN held-out accuracy >= KNN(k=5) on the identical split");
}

#[test]
fn criterion_09_decision_rule() {
    let class = |raw: f64| round_decision(raw, 7).unwrap().kind;
    assert_eq!(class(0.0022), DecisionKind::Class(0));
    assert_eq!(class(1.0047), DecisionKind::Class(1));
    assert_eq!(class(1.9998), DecisionKind::Class(2));
    assert_eq!(class(7.2), DecisionKind::Unknown);
    // window boundaries are open: exactly -0.5 or classes-0.5 is Unknown
    assert_eq!(class(-0.5), DecisionKind::Unknown);
    assert_eq!(class(6.5), DecisionKind::Unknown);
    assert_eq!(class(-0.499), DecisionKind::Class(0));
    assert_eq!(class(6.499), DecisionKind::Class(6));
    // half-away-from-zero rounding at interior midpoints
    assert_eq!(class(0.5), DecisionKind::Class(1));
    pass(9, "rounding rule reproduces the worked rows and boundary behavior");
}

fn decisions(codes: &[u8]) -> Vec<Decision> {
    codes
        .iter()
        .map(|&c| Decision { kind: DecisionKind::Class(c), raw: c as f64 })
        .collect()
}

#[test]
fn criterion_10_verdict_protocol() {
    let v = window_verdict(&decisions(&[vec![0u8; 14], vec![1u8; 6]].concat()), 3).unwrap();
    assert_eq!(v.final_code, 1);
    assert_eq!(v.rule, VerdictRule::TrailingRun);

    let v = window_verdict(&decisions(&[vec![0u8; 15], vec![3u8; 5]].concat()), 3).unwrap();
    assert_eq!(v.final_code, 3);
    assert_eq!(v.rule, VerdictRule::TrailingRun);

    let v = window_verdict(&decisions(&[0u8; 20]), 3).unwrap();
    assert_eq!(v.final_code, 0);

    // permanence: once a trailing fault run exists, appending more of the
    // same fault never changes the verdict
    let mut codes = vec![0u8; 14];
    codes.extend([2u8; 3]);
    for extra in 0..4 {
        let mut w = codes.clone();
        w.extend(std::iter::repeat(2u8).take(extra));
        let v = window_verdict(&decisions(&w), 3).unwrap();
        assert_eq!((v.final_code, v.rule), (2, VerdictRule::TrailingRun));
    }
    pass(10, "trailing-run and majority verdicts match the documented patterns");
}

#[test]
fn criterion_11_normalizer_endpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 257;
    let dim = 6;
    let names: Vec<String> = (0..dim).map(|i| format!("f{i}")).collect();
    let points: Vec<(Vec<f64>, u8)> = (0..n)
        .map(|_| ((0..dim).map(|_| rng.gen_range(-50.0..50.0)).collect(), 0))
        .collect();
    let set = LabeledPointSet::new(names, points).unwrap();
    let stats = fit(&set, -1.0, 1.0).unwrap();

    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for (x, _) in &set.points {
        let y = apply(&stats, x).unwrap();
        let back = invert(&stats, &y).unwrap();
        for d in 0..dim {
            lo[d] = lo[d].min(y[d]);
            hi[d] = hi[d].max(y[d]);
            assert!((back[d] - x[d]).abs() <= 1e-12 * x[d].abs().max(1.0));
        }
    }
    for d in 0..dim {
        assert_eq!(lo[d], -1.0, "feature {d} min not exactly -1");
        assert_eq!(hi[d], 1.0, "feature {d} max not exactly +1");
    }
    pass(11, "fitted data attains -1/+1 exactly per feature; invert is an identity");
}

#[test]
fn criterion_12_model_persistence() {
    let synth = SynthConfig { samples_per_class: 1024, ..SynthConfig::default() };
    let mlp = MLPConfig { layer_sizes: vec![4, 8, 1], max_epochs: 30, ..MLPConfig::default() };
    let out = train_pipeline(&generate_dataset(&synth).unwrap(), &mlp, 3, 0.3, mlp.seed).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    dfn::save_model(&out.model, &path).unwrap();
    let loaded = dfn::load_model(&path).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-40.0..40.0)).collect();
        let a = dfn::predict(&out.model, &x).unwrap();
        let b = dfn::predict(&loaded, &x).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    let text = std::fs::read_to_string(&path).unwrap();
    for cut in [text.len() / 4, text.len() / 2, text.len() - 3] {
        assert!(dfn::model_from_string(&text[..cut]).is_err(), "truncation at {cut} accepted");
    }
    pass(12, "reload is bit-identical on 1000 inputs; truncated files are rejected");
}

#[test]
fn criterion_13_metrics_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..20 {
        let classes = rng.gen_range(2..8usize);
        let n = rng.gen_range(10..400);
        let truth: Vec<u8> = (0..n).map(|_| rng.gen_range(0..classes) as u8).collect();
        let pred: Vec<u8> = (0..n).map(|_| rng.gen_range(0..classes) as u8).collect();
        let report = metrics(&pred, &truth, classes).unwrap();

        let mut confusion = vec![vec![0usize; classes]; classes];
        for (&t, &p) in truth.iter().zip(&pred) {
            confusion[t as usize][p as usize] += 1;
        }
        assert_eq!(report.confusion, confusion);
        let correct: usize = (0..classes).map(|c| confusion[c][c]).sum();
        assert!((report.accuracy - correct as f64 / n as f64).abs() < 1e-12);
        for c in 0..classes {
            let col: usize = (0..classes).map(|t| confusion[t][c]).sum();
            let row: usize = confusion[c].iter().sum();
            let prec = if col == 0 { 0.0 } else { confusion[c][c] as f64 / col as f64 };
            let rec = if row == 0 { 0.0 } else { confusion[c][c] as f64 / row as f64 };
            assert!((report.precision[c] - prec).abs() < 1e-12);
            assert!((report.recall[c] - rec).abs() < 1e-12);
        }
        // micro-averaged recall is the accuracy by construction
        let micro: f64 = (0..classes).map(|c| confusion[c][c] as f64).sum::<f64>() / n as f64;
        assert!((report.accuracy - micro).abs() < 1e-12);
    }
    pass(13, "report equals the brute-force confusion tally; micro recall = accuracy");
}

#[test]
fn criterion_14_stream_replay() {
    let run = shared_run();
    let model = &run.outcome.model;

    // 3,200 raw samples: Normal for the first 1,680, then S4. The switch
    // lands mid-window so window 10 mixes both classes.
    let synth = SynthConfig { samples_per_class: 3200, ..SynthConfig::default() };
    let normal = generate_recording(ClassLabel::Normal, &synth).unwrap();
    let fault = generate_recording(ClassLabel::S4, &synth).unwrap();
    let cut = 1680;
    let channels: Vec<Vec<f64>> = normal
        .channels()
        .iter()
        .zip(fault.channels())
        .map(|(a, b)| a[..cut].iter().chain(&b[cut..]).copied().collect())
        .collect();
    let rec = Recording::new(
        normal.channel_names().to_vec(),
        normal.sample_rate_hz(),
        channels,
        None,
    )
    .unwrap();

    let verdicts: Vec<_> = stream_verdicts(model, &rec, 160, 3, 3)
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(verdicts.len(), 20);
    for (i, v) in verdicts.iter().enumerate() {
        let line = v.to_json_line(i);
        let parsed: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(parsed["window_index"], i);
        assert_eq!(parsed["decisions"].as_array().unwrap().len(), 20);
    }
    let transition = &verdicts[10];
    assert_eq!(transition.rule, VerdictRule::TrailingRun);
    assert_eq!(transition.final_code, ClassLabel::S4.code());
    for v in &verdicts[..10] {
        assert_eq!(v.final_code, 0, "pre-switch window not Normal");
    }
    for v in &verdicts[11..] {
        assert_eq!(v.final_code, ClassLabel::S4.code());
    }
    pass(14, "20 NDJSON verdicts; the mid-stream switch yields a trailing-run fault verdict");
}
