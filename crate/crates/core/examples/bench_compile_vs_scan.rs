//! Times the cell-by-cell recurrence against cache, compile and FFT forward.
//! Build with `--release` for meaningful numbers.

use ssm2d::bench::run_bench;
use ssm2d::LayerConfig;

fn main() -> ssm2d::Result<()> {
    for size in [8, 16, 32] {
        let cfg = LayerConfig::new(size, size, 64, 16, 8);
        for batch in [1, 16] {
            let r = run_bench(&cfg, batch, 5, 0)?;
            println!(
                "{size}x{size} batch {batch:>2}: scan/sample {:.2e} s, cache {:.2e} s, compile {:.2e} s, forward {:.2e} s, ratio {:.2}",
                r.scan, r.cache_build, r.compile, r.forward, r.ratio()
            );
        }
    }
    Ok(())
}
