//! Walks a short sequence through the three-level Haar decomposition,
//! prints every approximation/detail pair, then shows that the pyramid
//! reconstructs the input exactly and that keeping only the coarsest
//! approximation compresses 8:1.

use wavediag::wavelet::{compress, decompose, haar_forward_step, reconstruct};

fn main() -> anyhow::Result<()> {
    let input = vec![48.0, 34.0, 24.0, 60.0, 72.0, 28.0, 55.0, 121.0];
    println!("input: {input:?}\n");

    let mut current = input.clone();
    for level in 1..=3 {
        let (approx, detail) = haar_forward_step(&current)?;
        println!("level {level} approx: {}", fmt(&approx));
        println!("level {level} detail: {}", fmt(&detail));
        current = approx;
    }

    let pyr = decompose(&input, 3)?;
    let back = reconstruct(&pyr)?;
    let max_err = input
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("\nreconstruction max abs error: {max_err:.2e}");

    // Parseval: the transform is orthonormal, energy is preserved.
    let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let pyramid_energy =
        energy(pyr.approx()) + pyr.levels().iter().map(|d| energy(d)).sum::<f64>();
    println!("input energy {:.4}, pyramid energy {:.4}", energy(&input), pyramid_energy);

    let kept = compress(&input, 3)?;
    println!(
        "\ncompress(3 levels): {} samples -> {} coefficient(s): {}",
        input.len(),
        kept.len(),
        fmt(&kept)
    );
    Ok(())
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}
