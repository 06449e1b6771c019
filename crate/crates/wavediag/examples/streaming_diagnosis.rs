//! Online use: train a model, then replay a raw recording that switches
//! from Normal to a fault mid-stream. Each 160-sample window is compressed
//! to 20 points, classified point by point, and condensed into one verdict
//! line (the same NDJSON the CLI `stream` subcommand emits).

use wavediag::dfn::MLPConfig;
use wavediag::pipeline::{stream_verdicts, train_pipeline};
use wavediag::signal::{ClassLabel, Recording};
use wavediag::synth::{generate_dataset, generate_recording, SynthConfig};

fn main() -> anyhow::Result<()> {
    let synth = SynthConfig { samples_per_class: 4096, ..SynthConfig::default() };
    let mlp = MLPConfig {
        layer_sizes: vec![4, 16, 16, 1],
        max_epochs: 200,
        ..MLPConfig::default()
    };
    let out = train_pipeline(&generate_dataset(&synth)?, &mlp, 3, 0.3, mlp.seed)?;
    let model = out.model;

    // Ten windows of Normal followed by ten of S3, spliced sample-wise.
    let piece = SynthConfig { samples_per_class: 1600, ..synth };
    let normal = generate_recording(ClassLabel::Normal, &piece)?;
    let fault = generate_recording(ClassLabel::S3, &piece)?;
    let channels: Vec<Vec<f64>> = normal
        .channels()
        .iter()
        .zip(fault.channels())
        .map(|(a, b)| a.iter().chain(b).copied().collect())
        .collect();
    let stream = Recording::new(
        normal.channel_names().to_vec(),
        normal.sample_rate_hz(),
        channels,
        None,
    )?;

    for (i, verdict) in stream_verdicts(&model, &stream, 160, 3, 3)?.enumerate() {
        println!("{}", verdict?.to_json_line(i));
    }
    Ok(())
}
