//! The binomial construction: with A1 = A2 = A3 = 1, A4 = 0 and unit B1, C1
//! the kernel entries count lattice paths, giving a full-rank kernel.

use ssm2d::{build_cache, compile_kernel, numerical_rank, Mode, SsmParams};

fn main() -> ssm2d::Result<()> {
    let params = SsmParams::real([[1.0], [1.0], [1.0], [0.0], [1.0], [0.0], [1.0], [0.0]])?;
    let cache = build_cache(6, 6, Mode::Unnormalized)?;
    let kernel = compile_kernel(&params, &cache, Mode::Unnormalized)?;
    let k = kernel.real_part();
    for i in 0..k.rows() {
        let row: Vec<String> = k.row(i).iter().map(|v| format!("{v:>3}")).collect();
        println!("{}", row.join(" "));
    }
    println!("rank: {}", numerical_rank(&kernel, 1e-9)?);
    Ok(())
}
