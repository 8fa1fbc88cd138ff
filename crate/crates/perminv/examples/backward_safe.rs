//! Walk the backward propagation on the flip example: the postcondition
//! polytope, its pullback across the last layer, the nonnegative-orthant
//! restriction, and the negative-side part (eta box or quadrant).
//!
//! ```bash
//! cargo run --example backward_safe
//! ```

use perminv::backward::{backward_propagate, NegativePart, SafeSet};
use perminv::driver::{build_product, init_post, init_pre, InvarianceProperty, Network};
use perminv::{AffineMap, Matrix};

fn main() -> perminv::Result<()> {
    let g = 1000.0;
    let net = Network::new(vec![
        AffineMap::new(
            Matrix::from_rows(&[vec![g, -g, g, -g], vec![-g, g, -g, g]])?,
            vec![0.0, 0.0, -1.0, -1.0],
        )?,
        AffineMap::new(
            Matrix::from_rows(&[
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
            ])?,
            vec![0.0, 0.0],
        )?,
    ])?;
    let prop = InvarianceProperty {
        lower: vec![0.0, 0.0],
        upper: vec![1.0, 1.0],
        sigma_in: vec![1, 0],
        sigma_out: vec![1, 0],
        tolerance: 0.1,
    };

    let product = build_product(&net);
    let post = init_post(&prop, net.dim_out());
    println!(
        "post polytope: {} constraints over {} dims, bounds {:?}",
        post.constraints(),
        post.dim(),
        post.ub()
    );

    // center hint: the pre-ReLU center at cut 1
    let hint = init_pre(&prop)?
        .pushforward(&product.layers[0])?
        .center()
        .to_vec();
    println!("pre-ReLU center at cut 1: {hint:?}");

    let safe2 = SafeSet::from_polytope(post);
    let safe1 = backward_propagate(&safe2, &product.layers[1], &hint)?;
    println!(
        "safe[1] positive part: {} constraints over {} dims",
        safe1.positive.constraints(),
        safe1.positive.dim()
    );
    match &safe1.negative {
        Some(NegativePart::Box { eta }) => {
            println!("negative part: box x <= eta with eta = {eta:?}");
        }
        Some(NegativePart::Quadrant { zeroed, polytope }) => {
            println!(
                "negative part: quadrant zeroing {zeroed:?}, {} constraints",
                polytope.constraints()
            );
        }
        None => println!("negative part: none (degenerate)"),
    }

    // every sampled safe point maps across the layer into the postcondition
    let mut checked = 0;
    for z in sample_box(safe1.positive.dim(), 400) {
        if !safe1.positive.contains(&z, 0.0) {
            continue;
        }
        let y = product.layers[1].apply(&z)?;
        assert!(safe2.positive.contains(&y, 1e-9));
        checked += 1;
    }
    println!("checked {checked} sampled safe points against the postcondition");
    Ok(())
}

fn sample_box(dim: usize, count: usize) -> Vec<Vec<f64>> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(1);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..0.2)).collect())
        .collect()
}
