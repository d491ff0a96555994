//! Rank estimation from the spectrum of the trimmed observation matrix:
//! the estimate is the index with the largest consecutive singular-value
//! ratio. Shows the gap sharpening as the number of revealed entries
//! grows.

use optspace::harness::{gen_lowrank, NoiseModel, SynthSpec};
use optspace::sparse::sample_mask;
use optspace::spectral::estimate_rank;
use optspace::ObservedMatrix;

fn main() -> Result<(), optspace::Error> {
    let (m, n, r) = (150, 150, 3);
    let spec = SynthSpec {
        m,
        n,
        r,
        factor_scale: 1.0,
        noise: NoiseModel::None,
        e_size: 0, // set per density below
        seed: 11,
    };
    let truth = gen_lowrank(&spec)?;

    for &e in &[1_500usize, 3_000, 6_000, 12_000] {
        let mask = sample_mask(m, n, e, 100 + e as u64)?;
        let obs = ObservedMatrix::from_dense_mask(&truth.matrix, &mask)?;
        let (trimmed, _) = obs.trim();
        let triple = trimmed.top_k_svd(8, 1e-10)?;
        let head: Vec<String> = triple.sigmas.iter().map(|s| format!("{s:.2}")).collect();
        let gap: Vec<String> = triple
            .sigmas
            .windows(2)
            .map(|w| format!("{:.2}", w[0] / w[1]))
            .collect();
        println!("|E| = {e:5}  sigma = [{}]", head.join(", "));
        println!("            ratios = [{}]", gap.join(", "));
        match estimate_rank(&triple.sigmas, 7) {
            Ok(est) => println!("            estimated rank = {est} (true rank = {r})"),
            Err(err) => println!("            no usable spectral gap: {err}"),
        }
    }
    Ok(())
}
