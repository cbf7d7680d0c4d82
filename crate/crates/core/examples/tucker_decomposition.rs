//! HOSVD and HOOI on a tensor with planted multilinear rank plus noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tensorfuse::tucker::{hooi, hosvd, parameter_count, reconstruct, reconstruction_error};
use tensorfuse::{Matrix, Tensor3, TuckerFactors};

fn main() -> tensorfuse::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut gauss = |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    let dims = [12, 10, 8];
    let ranks = [4, 3, 2];
    let planted = TuckerFactors {
        core: Tensor3::from_fn(ranks, |i, j, k| 1.0 + (i + 2 * j + 3 * k) as f64 * 0.3),
        factors: [gauss(dims[0], ranks[0]), gauss(dims[1], ranks[1]), gauss(dims[2], ranks[2])],
    };
    let clean = reconstruct(&planted)?;
    let mut w = clean.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for v in w.data_mut() {
        *v += 0.05 * rng.sample::<f64, _>(StandardNormal);
    }
    let norm = w.frobenius_norm();

    for r in [[2, 2, 2], ranks, [6, 5, 4]] {
        let h = hosvd(&w, r)?;
        let o = hooi(&w, r, 50, 1e-12)?;
        println!(
            "ranks {:?}: HOSVD rel. error {:.6}, HOOI {:.6} after {} sweeps",
            r,
            reconstruction_error(&w, &h)? / norm,
            o.final_error / norm,
            o.sweeps
        );
    }

    let exact = hosvd(&clean, ranks)?;
    println!(
        "noiseless planted tensor at its own ranks: rel. error {:e}",
        reconstruction_error(&clean, &exact)? / clean.frobenius_norm()
    );
    let pc = parameter_count(dims, ranks);
    println!("parameters: {} factored vs {} full", pc.factored, pc.full);
    Ok(())
}
