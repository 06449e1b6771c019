//! Model persistence: train a small network, save it to the plain-text
//! format, reload, and confirm predictions are bit-identical. Also shows
//! that re-serializing the loaded model reproduces the file byte for byte.

use wavediag::dfn::{self, MLPConfig};
use wavediag::pipeline::train_pipeline;
use wavediag::synth::{generate_dataset, SynthConfig};

fn main() -> anyhow::Result<()> {
    let synth = SynthConfig { samples_per_class: 1024, ..SynthConfig::default() };
    let mlp = MLPConfig {
        layer_sizes: vec![4, 8, 1],
        max_epochs: 40,
        ..MLPConfig::default()
    };
    let out = train_pipeline(&generate_dataset(&synth)?, &mlp, 3, 0.3, mlp.seed)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.txt");
    dfn::save_model(&out.model, &path)?;
    let loaded = dfn::load_model(&path)?;

    let mut worst = 0.0f64;
    for (x, _) in &out.holdout_points.points {
        let a = dfn::predict(&out.model, x)?;
        let b = dfn::predict(&loaded, x)?;
        worst = worst.max((a - b).abs());
    }
    println!("max prediction difference after reload: {worst:.1e}");

    let original = dfn::model_to_string(&out.model);
    let rewritten = dfn::model_to_string(&loaded);
    println!(
        "re-serialized file identical: {} ({} bytes)",
        original == rewritten,
        original.len()
    );
    println!("\nfirst lines of the model file:");
    for line in original.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
