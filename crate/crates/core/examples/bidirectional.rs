//! Multi-direction layers: an impulse in the middle spreads one quadrant per
//! direction.

use ssm2d::{Directions, ImageTensor, LayerConfig, LayerParams, SsmLayer, SsmParams};

fn main() -> ssm2d::Result<()> {
    let decay = SsmParams::real([[0.5], [0.5], [0.5], [0.5], [1.0], [1.0], [1.0], [1.0]])?;
    for directions in [Directions::One, Directions::Two, Directions::Four] {
        let mut cfg = LayerConfig::new(7, 7, 1, 1, 1);
        cfg.directions = directions;
        let params = LayerParams {
            ssm: vec![decay.clone()],
            skip: vec![0.0],
        };
        let layer = SsmLayer::new(cfg, params)?;
        let x = ImageTensor::from_fn(1, 7, 7, 1, |_, i, j, _| f64::from(i == 3 && j == 3));
        let y = layer.forward(&x)?;
        println!("{directions} direction(s):");
        for i in 0..7 {
            let row: Vec<String> = (0..7)
                .map(|j| {
                    let v = y.get(0, i, j, 0);
                    if v.abs() < 1e-12 {
                        "    .".into()
                    } else {
                        format!("{v:5.2}")
                    }
                })
                .collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
