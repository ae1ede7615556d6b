//! A full layer: random parameters, grouped channels, a batch of images.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssm2d::{init_raw, ImageTensor, LayerConfig, SsmLayer};

fn main() -> ssm2d::Result<()> {
    let cfg = LayerConfig::new(24, 24, 8, 4, 2);
    let params = init_raw(0, &cfg).constrain();
    let layer = SsmLayer::new(cfg.clone(), params)?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = ImageTensor::from_fn(4, 24, 24, 8, |_, _, _, _| rng.random_range(-1.0..1.0));
    let y = layer.forward(&x)?;
    println!("input  {}x{}x{}x{}", x.batch, x.rows, x.cols, x.channels);
    println!("output {}x{}x{}x{}", y.batch, y.rows, y.cols, y.channels);
    for c in 0..cfg.channels {
        let energy: f64 = y.plane(0, c).as_slice().iter().map(|v| v * v).sum();
        println!(
            "channel {c} (group {}): energy {energy:.4}",
            cfg.group_of(c)
        );
    }
    Ok(())
}
