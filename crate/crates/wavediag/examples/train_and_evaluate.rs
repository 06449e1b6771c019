//! Full pipeline on a small seeded corpus: generate labeled recordings for
//! all seven classes, compress 8:1, stratified 70/30 split, train the
//! feedforward regressor, then compare held-out accuracy against a KNN
//! baseline fitted on the identical training points.

use wavediag::dfn::MLPConfig;
use wavediag::pipeline::{evaluate_knn_baseline, train_pipeline};
use wavediag::synth::{generate_dataset, SynthConfig};

fn main() -> anyhow::Result<()> {
    let synth = SynthConfig { samples_per_class: 4096, ..SynthConfig::default() };
    let recs = generate_dataset(&synth)?;

    let mlp = MLPConfig {
        layer_sizes: vec![4, 16, 16, 1],
        max_epochs: 200,
        ..MLPConfig::default()
    };
    let out = train_pipeline(&recs, &mlp, 3, 0.3, mlp.seed)?;

    println!(
        "trained {} epochs ({:?}), final epoch MSE {:.6}",
        out.train_report.epochs_run,
        out.train_report.stop_reason,
        out.train_report.mse_history.last().unwrap()
    );
    println!("train accuracy: {:.4}", out.train_report.final_train_accuracy);
    println!("\nheld-out metrics ({} points):\n{}", out.holdout_points.len(), out.holdout_metrics);

    let knn = evaluate_knn_baseline(&out.model, &out.train_points, &out.holdout_points, 5)?;
    println!("KNN baseline (k=5):\n{knn}");
    println!(
        "DFN {:.4} vs KNN {:.4}",
        out.holdout_metrics.accuracy, knn.accuracy
    );
    Ok(())
}
