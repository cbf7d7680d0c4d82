//! The factored classifier gives the same logits as the full bilinear
//! tensor it represents, with far fewer multiply-adds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensorfuse::fusion::{forward_decomposed, forward_full, fused_feature};
use tensorfuse::pipeline::FlopCount;
use tensorfuse::tensor::relative_error;
use tensorfuse::tucker::reconstruct;
use tensorfuse::{FeaturePair, Matrix, Tensor3, TuckerFactors};

fn main() -> tensorfuse::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (d, c, a) = (24, 20, 12);
    let ranks = [12, 12, 8];
    let mut uniform = |r: usize, k: usize| Matrix::from_fn(r, k, |_, _| rng.random_range(-1.0..1.0));
    let factors = [uniform(d, ranks[0]), uniform(c, ranks[1]), uniform(a, ranks[2])];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let core = Tensor3::from_fn(ranks, |_, _, _| rng.random_range(-1.0..1.0));
    let tf = TuckerFactors { core, factors };
    let w = reconstruct(&tf)?;

    let p = FeaturePair {
        identity: (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(),
        attribute: (0..a).map(|_| rng.random_range(-1.0..1.0)).collect(),
    };
    let full = forward_full(&w, &p)?;
    let fact = forward_decomposed(&tf, &p)?;
    println!("first logits full     {:?}", &full[..3]);
    println!("first logits factored {:?}", &fact[..3]);
    println!("relative difference {:e}", relative_error(&full, &fact));

    let z = fused_feature(&tf.factors[0], &tf.factors[2], &p)?;
    println!("fused retrieval feature has {} entries", z.len());

    let flops = FlopCount::new([d, c, a], ranks);
    println!("flops per forward pass: factored {}, full {}", flops.total(), 2 * d * c * a + d * a);
    Ok(())
}
