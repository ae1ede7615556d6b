//! Analytic kernel gradients against central differences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssm2d::{
    build_cache, compile_kernel, constrain, kernel_gradient, Mode, Part, RawSsm, ScalarField, Slot,
};

fn main() -> ssm2d::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let raw = RawSsm::random(&mut rng, ScalarField::Complex, 2);
    let mode = Mode::NormalizedRelaxed;
    let cache = build_cache(8, 8, mode)?;
    let grad = kernel_gradient(&raw, &cache, mode)?;
    let eps = 1e-6;
    for slot in Slot::ALL {
        for part in [Part::Value, Part::Angle] {
            let idx = raw.flat_index(slot, part, 0);
            let eval = |d: f64| -> ssm2d::Result<Vec<f64>> {
                let mut flat = raw.to_flat();
                flat[idx] += d;
                let p = constrain(&RawSsm::from_flat(raw.field(), raw.n(), &flat)?);
                Ok(compile_kernel(&p, &cache, mode)?.real_part().into_vec())
            };
            let (hi, lo) = (eval(eps)?, eval(-eps)?);
            let worst = grad
                .flat(idx)
                .iter()
                .zip(hi.iter().zip(&lo))
                .map(|(a, (h, l))| (a - (h - l) / (2.0 * eps)).abs())
                .fold(0.0, f64::max);
            println!(
                "{}[0] {part:?}: max |analytic - fd| = {worst:.2e}",
                slot.name()
            );
        }
    }
    Ok(())
}
