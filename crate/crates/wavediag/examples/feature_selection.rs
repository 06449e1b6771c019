//! Computes the channel correlation matrix on a synthetic recording and
//! runs the redundancy-removal selector: channels that correlate strongly
//! with many others are kept as representatives, their partners dropped,
//! and one removed channel is re-admitted in the fine-tuning pass.

use wavediag::correlation::{correlation_matrix, degree, select_features};
use wavediag::signal::ClassLabel;
use wavediag::synth::{generate_recording, SynthConfig};

fn main() -> anyhow::Result<()> {
    let cfg = SynthConfig { samples_per_class: 4096, ..SynthConfig::default() };
    let rec = generate_recording(ClassLabel::S1, &cfg)?;

    let matrix = correlation_matrix(&rec)?;
    println!("pairwise Pearson correlations:");
    let names = &matrix.names;
    for i in 0..names.len() {
        for j in (i + 1)..names.len() {
            let r = matrix.r[i][j];
            println!("  {} vs {}: r = {r:+.4} ({:?})", names[i], names[j], degree(r)?);
        }
    }

    let report = select_features(&matrix, 0.5, 1)?;
    println!("\nselection (threshold 0.5, fine-tune 1):\n{report}");
    println!("final feature set: {:?}", report.selected());
    Ok(())
}
