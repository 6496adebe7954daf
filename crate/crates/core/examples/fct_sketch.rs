//! Fast Cauchy transform sketch, L1 leverage scores and top-score row
//! selection.

use multimodel::sketch::{compression_matrix, leverage_scores, FctEmbedding};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (m, d) = (512, 6);
    let mut a = DMatrix::from_fn(m, d, |_, _| rng.random_range(-1.0..1.0));
    // A few heavy rows that a good selection should keep.
    for i in [5, 100, 400] {
        a.row_mut(i).scale_mut(50.0);
    }

    let emb = FctEmbedding::new(m, 32, 9);
    let pa = emb.apply(&a);
    println!("sketch {}x{} -> {}x{} (block size {})", m, d, pa.nrows(), pa.ncols(), emb.block_size());
    for _ in 0..3 {
        let x = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        println!("  |Ax|_1 = {:.1}, |PiAx|_1 = {:.1}", (&a * &x).lp_norm(1), (&pa * &x).lp_norm(1));
    }

    let scores = leverage_scores(&a, 32, 9);
    let keep = compression_matrix(&scores, 8);
    println!("top 8 rows by leverage: {keep:?}");
}
