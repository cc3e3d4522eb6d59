//! Masked self-attention on random states: an all-ones mask reproduces plain
//! attention, and hidden pairs get no weight.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqcsg::model::{masked_self_attention, AttentionWeights};
use seqcsg::semgraph::VisibilityMatrix;
use seqcsg::tensor::Matrix;

fn main() -> anyhow::Result<()> {
    let (n, d, heads) = (6, 8, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect());
    let w = AttentionWeights::random(d, 0.5, 2);

    let open = masked_self_attention(&h, &VisibilityMatrix::all_ones(n), &w, heads, -1e9)?;

    // tokens 0..3 and 3..6 form two groups; token 0 stays visible to all
    let mut m = VisibilityMatrix::all_ones(n);
    for i in 1..3 {
        for j in 3..n {
            m.set(i, j, false);
            m.set(j, i, false);
        }
    }
    let masked = masked_self_attention(&h, &m, &w, heads, -1e9)?;

    print!("mask:\n{}", m.to_text_grid());
    for (name, out) in [("all-ones", &open), ("masked", &masked)] {
        println!("{name}, head 0 weights:");
        let p = &out.weights[0];
        for i in 0..n {
            let row: Vec<String> = p.row(i).iter().map(|x| format!("{x:.3}")).collect();
            println!("  {}", row.join(" "));
        }
    }
    println!(
        "max |output difference| between the two masks: {:.3e}",
        open.output.max_abs_diff(&masked.output)
    );
    Ok(())
}
