//! Compiled kernels against the cell-by-cell recurrence in every mode.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssm2d::{build_cache, compile_kernel, constrain, impulse_response, Mode, RawSsm, ScalarField};

fn main() -> ssm2d::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for field in [ScalarField::Real, ScalarField::Complex] {
        for mode in Mode::ALL {
            let cache = build_cache(12, 9, mode)?;
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let p = constrain(&RawSsm::random(&mut rng, field, 4));
                let fast = compile_kernel(&p, &cache, mode)?;
                let slow = impulse_response(&p, 12, 9, mode)?;
                for (a, b) in fast
                    .values()
                    .as_slice()
                    .iter()
                    .zip(slow.values().as_slice())
                {
                    worst = worst.max((a - b).norm());
                }
            }
            println!("{field:>7} {mode:<18} max |compiled - recurrence| = {worst:.2e}");
        }
    }
    Ok(())
}
