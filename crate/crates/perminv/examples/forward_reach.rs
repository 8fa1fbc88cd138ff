//! Walk the forward propagation of the flip example one stage at a time:
//! affine pushforward, tie classes of the pre-ReLU region, the masked
//! over-approximation, and the basis reduction.
//!
//! ```bash
//! cargo run --example forward_reach
//! ```

use perminv::driver::{build_product, init_pre, InvarianceProperty, Network};
use perminv::forward::{reduce_basis, relu_over_approx};
use perminv::tieclass::{compute_tie_classes, default_tie_tol};
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
    let mut region = init_pre(&prop)?;
    println!("reach[0] basis:");
    print_region(&region);

    for (i, layer) in product.layers.iter().enumerate() {
        let pre = region.pushforward(layer)?;
        println!("\n-- layer {i}: after the affine map --");
        print_region(&pre);

        let partition = compute_tie_classes(&pre, default_tie_tol(&pre));
        println!("tie classes:");
        for (class, hint) in partition.iter() {
            println!("  {class:?} ({hint:?})");
        }

        let masked = relu_over_approx(&pre, &partition);
        println!("after the ReLU over-approximation: {} generators", masked.generators());
        region = reduce_basis(&masked, 1e-9);
        println!("after reduction:");
        print_region(&region);
    }
    Ok(())
}

fn print_region(region: &perminv::AffineRegion) {
    for row in region.basis().iter_rows() {
        println!("  {row:?}");
    }
    println!("  center {:?}", region.center());
}
