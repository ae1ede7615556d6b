//! Separable kernels stay at rank one; 2-D recurrence kernels do not.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssm2d::{
    build_cache, compile_kernel, constrain, kernel_1d, numerical_rank, outer_kernel,
    singular_values, Mode, RawSsm, ScalarField, Ssm1dParams,
};

fn main() -> ssm2d::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let l = 16;
    let k1 = kernel_1d(&Ssm1dParams::random(&mut rng, ScalarField::Complex, 8), l)?;
    let k2 = kernel_1d(&Ssm1dParams::random(&mut rng, ScalarField::Complex, 8), l)?;
    let separable = outer_kernel(&k1, &k2)?;
    let s = singular_values(&separable)?;
    println!(
        "separable: rank {}, s2/s1 = {:.2e}",
        numerical_rank(&separable, 1e-9)?,
        s[1] / s[0]
    );

    let cache = build_cache(l, l, Mode::NormalizedRelaxed)?;
    for n in [1, 2, 4, 8] {
        let p = constrain(&RawSsm::random(&mut rng, ScalarField::Complex, n));
        let k = compile_kernel(&p, &cache, Mode::NormalizedRelaxed)?;
        println!("2-D, N = {n}: rank {}", numerical_rank(&k, 1e-9)?);
    }
    Ok(())
}
