//! Exports one kernel under each mode as PGM heatmaps. Pass a directory to
//! write into; the default is the system temp directory.

use ssm2d::formats::{kernel_csv, kernel_pgm};
use ssm2d::{build_cache, compile_kernel, constrain, init_raw, LayerConfig, Mode, ScalarField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let mut cfg = LayerConfig::new(16, 16, 1, 8, 1);
    cfg.field = ScalarField::Complex;
    let raw = init_raw(3, &cfg);
    let params = constrain(&raw.ssm[0]);
    for mode in Mode::ALL {
        let cache = build_cache(16, 16, mode)?;
        let k = compile_kernel(&params, &cache, mode)?.real_part();
        let path = dir.join(format!("kernel_{mode}.pgm"));
        std::fs::write(&path, kernel_pgm(&k))?;
        println!(
            "{mode:<18} max |K| {:.3e} -> {}",
            k.max_abs(),
            path.display()
        );
    }
    let cache = build_cache(4, 4, Mode::NormalizedRelaxed)?;
    let corner = compile_kernel(&params, &cache, Mode::NormalizedRelaxed)?.real_part();
    print!("relaxed 4x4 corner:\n{}", kernel_csv(&corner));
    Ok(())
}
