//! On-disk formats: the parameter config, the tensor file and kernel exports.
//!
//! Parameter config, one `key = value` per line (`#` starts a comment):
//!
//! ```text
//! field = real            # or complex
//! mode = normalized       # unnormalized | normalized | normalized-relaxed
//! n = 2                   # state dimension N
//! n_ssm = 1               # optional, default 1
//! directions = 1          # optional: 1, 2 or 4
//! shared_directions = true
//! a1_raw = 0.1, -0.4      # raw value (real) or raw radius (complex)
//! a1_angle_raw = 0, 0.3   # complex mode only
//! a2 = 1, 0.5             # or a constrained value given directly
//! ...                     # a1..a4, b1, b2, c1, c2
//! d_raw = 1               # skip weight: one value, or one per channel
//! ```
//!
//! Each slot array holds `n` entries per parameter set, sets ordered by group
//! then direction. Directly given values bypass the constraint maps and may
//! be complex literals such as `0.3-0.2i`. When no slot key is present,
//! `seed = <u64>` draws every raw entry uniformly from `[-1, 1]`.
//!
//! Tensor file: `SSM2DTEN`, four `u32` LE extents (batch, rows, cols,
//! channels), then row-major `f64` LE values. Kernel binary: `SSM2DKRN`, two
//! `u32` LE extents, then row-major `f64` LE values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;

use crate::conv::ImageTensor;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::parameters::{
    constrain, constrain_entry, init_raw, Directions, LayerConfig, LayerParams, Mode, RawParams,
    RawSsm, ScalarField, Slot, SsmParams,
};

pub const TENSOR_MAGIC: &[u8; 8] = b"SSM2DTEN";
pub const KERNEL_MAGIC: &[u8; 8] = b"SSM2DKRN";

/// A parsed parameter config.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamFile {
    pub field: ScalarField,
    pub mode: Mode,
    pub n: usize,
    pub n_ssm: usize,
    pub directions: Directions,
    pub shared_directions: bool,
    /// One per parameter set.
    pub ssm: Vec<SsmParams>,
    /// Present when every slot was given raw.
    pub raw: Option<Vec<RawSsm>>,
    /// One value (broadcast) or one per channel.
    pub skip: Vec<f64>,
}

impl ParamFile {
    pub fn sets(&self) -> usize {
        self.ssm.len()
    }

    /// Layer configuration for `rows x cols x channels`.
    pub fn layer_config(&self, rows: usize, cols: usize, channels: usize) -> LayerConfig {
        LayerConfig {
            rows,
            cols,
            channels,
            n_state: self.n,
            n_ssm: self.n_ssm,
            field: self.field,
            mode: self.mode,
            directions: self.directions,
            shared_directions: self.shared_directions,
        }
    }

    /// Layer parameters for `channels` channels, broadcasting a single skip
    /// weight.
    pub fn layer_params(&self, channels: usize) -> Result<LayerParams> {
        let skip = match self.skip.len() {
            1 => vec![self.skip[0]; channels],
            len if len == channels => self.skip.clone(),
            len => {
                return Err(Error::Shape(format!(
                    "`d` has {len} entries but the tensor has {channels} channels"
                )))
            }
        };
        Ok(LayerParams {
            ssm: self.ssm.clone(),
            skip,
        })
    }
}

const KNOWN_SCALARS: [&str; 7] = [
    "field",
    "mode",
    "n",
    "n_ssm",
    "directions",
    "shared_directions",
    "seed",
];

fn is_known_key(key: &str) -> bool {
    if KNOWN_SCALARS.contains(&key) || matches!(key, "d" | "d_raw") {
        return true;
    }
    Slot::ALL.iter().any(|s| {
        let name = s.name();
        key == name || key == format!("{name}_raw") || key == format!("{name}_angle_raw")
    })
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::invalid(key, format!("cannot parse `{}`", value.trim())))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|item| parse_scalar(key, item))
        .collect()
}

fn parse_reals(key: &str, value: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = parse_list(key, value)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(key.into()));
    }
    Ok(v)
}

/// Parses a parameter config.
pub fn parse_params(text: &str) -> Result<ParamFile> {
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::format(
                "config",
                format!("line {}: expected `key = value`", lineno + 1),
            )
        })?;
        let key = key.trim().to_string();
        if !is_known_key(&key) {
            return Err(Error::invalid(key, "unknown key"));
        }
        if entries
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::invalid(key, "given more than once"));
        }
    }
    let get = |k: &str| entries.get(k).map(String::as_str);

    let field: ScalarField = match get("field") {
        Some(v) => v.parse()?,
        None => return Err(Error::invalid("field", "missing")),
    };
    let mode: Mode = match get("mode") {
        Some(v) => v.parse()?,
        None => return Err(Error::invalid("mode", "missing")),
    };
    let n: usize = match get("n") {
        Some(v) => parse_scalar("n", v)?,
        None => return Err(Error::invalid("n", "missing")),
    };
    if n == 0 {
        return Err(Error::invalid("n", "state dimension must be positive"));
    }
    let n_ssm: usize = get("n_ssm").map_or(Ok(1), |v| parse_scalar("n_ssm", v))?;
    if n_ssm == 0 {
        return Err(Error::invalid("n_ssm", "must be positive"));
    }
    let directions: Directions = get("directions").map_or(Ok(Directions::One), str::parse)?;
    let shared_directions: bool =
        get("shared_directions").map_or(Ok(true), |v| parse_scalar("shared_directions", v))?;
    let sets = n_ssm
        * if shared_directions {
            1
        } else {
            directions.count()
        };
    let len = n * sets;

    let any_slot = Slot::ALL
        .iter()
        .any(|s| get(s.name()).is_some() || get(&format!("{}_raw", s.name())).is_some());
    let skip = match (get("d"), get("d_raw")) {
        (Some(_), Some(_)) => return Err(Error::invalid("d", "give either `d` or `d_raw`")),
        (Some(v), None) => parse_reals("d", v)?,
        (None, Some(v)) => parse_reals("d_raw", v)?,
        (None, None) => vec![0.0],
    };

    if !any_slot {
        let seed: u64 = match get("seed") {
            Some(v) => parse_scalar("seed", v)?,
            None => return Err(Error::invalid("a1_raw", "missing (and no `seed` given)")),
        };
        let mut cfg = LayerConfig::new(1, 1, n_ssm, n, n_ssm);
        cfg.field = field;
        cfg.directions = directions;
        cfg.shared_directions = shared_directions;
        let raw = init_raw(seed, &cfg).ssm;
        return Ok(ParamFile {
            field,
            mode,
            n,
            n_ssm,
            directions,
            shared_directions,
            ssm: raw.iter().map(constrain).collect(),
            raw: Some(raw),
            skip,
        });
    }
    if get("seed").is_some() {
        return Err(Error::invalid(
            "seed",
            "cannot be combined with explicit parameters",
        ));
    }

    let check_len = |key: &str, got: usize| {
        if got == len {
            Ok(())
        } else {
            Err(Error::invalid(
                key,
                format!("expected {len} entries (n = {n} times {sets} sets), got {got}"),
            ))
        }
    };

    let mut all_raw = true;
    let mut raw_values: [Vec<f64>; 8] = Default::default();
    let mut raw_angles: [Vec<f64>; 8] = Default::default();
    let mut values: [Vec<Complex64>; 8] = Default::default();
    for slot in Slot::ALL {
        let name = slot.name();
        let raw_key = format!("{name}_raw");
        let angle_key = format!("{name}_angle_raw");
        match (get(name), get(&raw_key)) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid(
                    name,
                    format!("give either `{name}` or `{raw_key}`"),
                ))
            }
            (None, None) => return Err(Error::invalid(raw_key, "missing")),
            (Some(v), None) => {
                all_raw = false;
                if get(&angle_key).is_some() {
                    return Err(Error::invalid(angle_key, "only valid with a raw radius"));
                }
                let parsed: Vec<Complex64> = parse_list(name, v)?;
                check_len(name, parsed.len())?;
                if parsed
                    .iter()
                    .any(|z| !z.re.is_finite() || !z.im.is_finite())
                {
                    return Err(Error::NonFinite(name.into()));
                }
                if field == ScalarField::Real && parsed.iter().any(|z| z.im != 0.0) {
                    return Err(Error::invalid(name, "imaginary part in real mode"));
                }
                values[slot.index()] = parsed;
            }
            (None, Some(v)) => {
                let vals = parse_reals(&raw_key, v)?;
                check_len(&raw_key, vals.len())?;
                let angles = match (field, get(&angle_key)) {
                    (ScalarField::Complex, Some(a)) => {
                        let a = parse_reals(&angle_key, a)?;
                        check_len(&angle_key, a.len())?;
                        a
                    }
                    (ScalarField::Complex, None) => {
                        return Err(Error::invalid(angle_key, "missing"))
                    }
                    (ScalarField::Real, Some(_)) => {
                        return Err(Error::invalid(angle_key, "only valid in complex mode"))
                    }
                    (ScalarField::Real, None) => Vec::new(),
                };
                values[slot.index()] = vals
                    .iter()
                    .enumerate()
                    .map(|(k, &x)| {
                        constrain_entry(field, slot, x, angles.get(k).copied().unwrap_or(0.0))
                    })
                    .collect();
                raw_values[slot.index()] = vals;
                raw_angles[slot.index()] = angles;
            }
        }
    }

    let chunk = |v: &[f64], s: usize| {
        v.get(s * n..(s + 1) * n)
            .map(<[f64]>::to_vec)
            .unwrap_or_default()
    };
    let ssm = (0..sets)
        .map(|s| {
            SsmParams::new(
                field,
                std::array::from_fn(|k| values[k][s * n..(s + 1) * n].to_vec()),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = if all_raw {
        Some(
            (0..sets)
                .map(|s| {
                    RawSsm::new(
                        field,
                        std::array::from_fn(|k| chunk(&raw_values[k], s)),
                        std::array::from_fn(|k| chunk(&raw_angles[k], s)),
                    )
                })
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(ParamFile {
        field,
        mode,
        n,
        n_ssm,
        directions,
        shared_directions,
        ssm,
        raw,
        skip,
    })
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Renders raw layer parameters as a config that [`parse_params`] reads back.
pub fn write_raw_params(cfg: &LayerConfig, raw: &RawParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "field = {}", cfg.field);
    let _ = writeln!(out, "mode = {}", cfg.mode);
    let _ = writeln!(out, "n = {}", cfg.n_state);
    let _ = writeln!(out, "n_ssm = {}", cfg.n_ssm);
    let _ = writeln!(out, "directions = {}", cfg.directions);
    let _ = writeln!(out, "shared_directions = {}", cfg.shared_directions);
    for slot in Slot::ALL {
        let values = raw.ssm.iter().flat_map(|r| r.values(slot).iter().copied());
        let _ = writeln!(out, "{}_raw = {}", slot.name(), join(values));
        if cfg.field == ScalarField::Complex {
            let angles = raw.ssm.iter().flat_map(|r| r.angles(slot).iter().copied());
            let _ = writeln!(out, "{}_angle_raw = {}", slot.name(), join(angles));
        }
    }
    let _ = writeln!(out, "d_raw = {}", join(raw.skip.iter().copied()));
    out
}

/// Renders constrained real-mode parameters of a single set.
pub fn write_direct_params(mode: Mode, params: &SsmParams, skip: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "field = {}", params.field());
    let _ = writeln!(out, "mode = {mode}");
    let _ = writeln!(out, "n = {}", params.n());
    for slot in Slot::ALL {
        let items: Vec<String> = params
            .get(slot)
            .iter()
            .map(|z| match params.field() {
                ScalarField::Real => z.re.to_string(),
                ScalarField::Complex => format!("{}{:+}i", z.re, z.im),
            })
            .collect();
        let _ = writeln!(out, "{} = {}", slot.name(), items.join(", "));
    }
    let _ = writeln!(out, "d = {skip}");
    out
}

fn read_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
        .ok_or_else(|| Error::format(what, "truncated header"))
}

fn read_f64s(bytes: &[u8], count: usize, what: &str) -> Result<Vec<f64>> {
    let need = count
        .checked_mul(8)
        .ok_or_else(|| Error::format(what, "extents overflow"))?;
    if bytes.len() < need {
        return Err(Error::format(
            what,
            format!(
                "payload truncated: expected {need} bytes, found {}",
                bytes.len()
            ),
        ));
    }
    if bytes.len() > need {
        return Err(Error::format(
            what,
            format!("{} trailing bytes after payload", bytes.len() - need),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect())
}

pub fn write_tensor(t: &ImageTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 8 * t.as_slice().len());
    out.extend_from_slice(TENSOR_MAGIC);
    for extent in [t.batch, t.rows, t.cols, t.channels] {
        out.extend_from_slice(&(extent as u32).to_le_bytes());
    }
    for v in t.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_tensor(bytes: &[u8]) -> Result<ImageTensor> {
    const WHAT: &str = "tensor file";
    if bytes.len() < 8 || &bytes[..8] != TENSOR_MAGIC {
        return Err(Error::format(WHAT, "bad magic"));
    }
    let extents: Vec<usize> = (0..4)
        .map(|k| read_u32(bytes, 8 + 4 * k, WHAT).map(|v| v as usize))
        .collect::<Result<_>>()?;
    if extents.contains(&0) {
        return Err(Error::format(WHAT, "zero extent in header"));
    }
    let count = extents
        .iter()
        .try_fold(1usize, |acc, &e| acc.checked_mul(e));
    let count = count.ok_or_else(|| Error::format(WHAT, "extents overflow"))?;
    let data = read_f64s(&bytes[24..], count, WHAT)?;
    ImageTensor::new(extents[0], extents[1], extents[2], extents[3], data)
}

pub fn kernel_csv(k: &Grid<f64>) -> String {
    let mut out = String::new();
    for i in 0..k.rows() {
        let _ = writeln!(
            out,
            "{}",
            k.row(i)
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(",")
        );
    }
    out
}

pub fn parse_kernel_csv(text: &str) -> Result<Grid<f64>> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_list("csv", l))
        .collect::<Result<_>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::format("csv", "ragged rows"));
    }
    Grid::from_vec(rows.len(), cols, rows.concat())
}

/// Plain PGM (P2): width = columns, height = rows, row 0 first; values are
/// min-max scaled to `0..=255`.
pub fn kernel_pgm(k: &Grid<f64>) -> String {
    let s = k.as_slice();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = String::new();
    let _ = writeln!(out, "P2");
    let _ = writeln!(
        out,
        "# kernel {}x{}, min-max scaled: 0 = {lo}, 255 = {hi}, row 0 at top",
        k.rows(),
        k.cols()
    );
    let _ = writeln!(out, "{} {}", k.cols(), k.rows());
    let _ = writeln!(out, "255");
    for i in 0..k.rows() {
        let line: Vec<String> = k
            .row(i)
            .iter()
            .map(|&v| {
                let level = if span > 0.0 {
                    ((v - lo) / span * 255.0).round()
                } else {
                    0.0
                };
                (level as u8).to_string()
            })
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn kernel_bin(k: &Grid<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * k.as_slice().len());
    out.extend_from_slice(KERNEL_MAGIC);
    out.extend_from_slice(&(k.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(k.cols() as u32).to_le_bytes());
    for v in k.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_kernel_bin(bytes: &[u8]) -> Result<Grid<f64>> {
    const WHAT: &str = "kernel file";
    if bytes.len() < 8 || &bytes[..8] != KERNEL_MAGIC {
        return Err(Error::format(WHAT, "bad magic"));
    }
    let rows = read_u32(bytes, 8, WHAT)? as usize;
    let cols = read_u32(bytes, 12, WHAT)? as usize;
    let data = read_f64s(&bytes[16..], rows * cols, WHAT)?;
    Grid::from_vec(rows, cols, data)
}

/// Parses `"L1xL2"`.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let err = || Error::invalid("size", format!("expected `ROWSxCOLS`, got `{s}`"));
    let (r, c) = s.trim().split_once(['x', 'X']).ok_or_else(err)?;
    let r: usize = r.trim().parse().map_err(|_| err())?;
    let c: usize = c.trim().parse().map_err(|_| err())?;
    if r == 0 || c == 0 {
        return Err(err());
    }
    Ok((r, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PASCAL: &str = "\
# binomial construction
field = real
mode = unnormalized
n = 1
a1 = 1
a2 = 1
a3 = 1
a4 = 0
b1 = 1
b2 = 0
c1 = 1
c2 = 0
";

    #[test]
    fn parses_direct_values() {
        let f = parse_params(PASCAL).unwrap();
        assert_eq!(f.mode, Mode::Unnormalized);
        assert_eq!(f.ssm.len(), 1);
        assert!(f.raw.is_none());
        assert_eq!(f.ssm[0].a(3)[0].re, 0.0);
        assert_eq!(f.skip, vec![0.0]);
    }

    #[test]
    fn raw_round_trip() {
        let mut cfg = LayerConfig::new(3, 3, 4, 2, 2);
        cfg.field = ScalarField::Complex;
        cfg.directions = Directions::Two;
        cfg.shared_directions = false;
        let raw = init_raw(9, &cfg);
        let f = parse_params(&write_raw_params(&cfg, &raw)).unwrap();
        assert_eq!(f.raw.as_ref().unwrap(), &raw.ssm);
        assert_eq!(f.ssm, raw.constrain().ssm);
        assert_eq!(f.skip, raw.skip);
        assert_eq!(f.layer_config(3, 3, 4), cfg);
    }

    #[test]
    fn direct_complex_round_trip() {
        let v = |z: f64| vec![Complex64::new(z, -0.25 * z)];
        let p = SsmParams::complex([
            v(0.1),
            v(0.2),
            v(0.3),
            v(0.4),
            v(0.5),
            v(0.6),
            v(0.7),
            v(-0.8),
        ])
        .unwrap();
        let f = parse_params(&write_direct_params(Mode::Normalized, &p, 1.5)).unwrap();
        assert_eq!(f.ssm[0], p);
        assert_eq!(f.skip, vec![1.5]);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            (PASCAL.replace("a4 = 0", ""), "a4_raw"),
            (PASCAL.replace("a4 = 0", "a4 = 0, 1"), "a4"),
            (PASCAL.replace("n = 1", "n = one"), "n"),
            (
                PASCAL.replace("field = real", "field = quaternion"),
                "field",
            ),
            (format!("{PASCAL}bogus = 1\n"), "bogus"),
            (PASCAL.replace("b1 = 1", "b1 = 1+2i"), "b1"),
            (format!("{PASCAL}a1_raw = 0\n"), "a1"),
        ];
        for (text, key) in cases {
            match parse_params(&text) {
                Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, key),
                other => panic!("{key}: {other:?}"),
            }
        }
        assert!(matches!(
            parse_params("field real"),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn seeded_config() {
        let f = parse_params("field = complex\nmode = normalized\nn = 3\nn_ssm = 2\nseed = 4\n")
            .unwrap();
        assert_eq!(f.ssm.len(), 2);
        assert!(f.ssm.iter().all(SsmParams::is_stable));
        let g = parse_params("field = complex\nmode = normalized\nn = 3\nn_ssm = 2\nseed = 4\n")
            .unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn tensor_errors() {
        let t = ImageTensor::from_fn(2, 3, 4, 5, |b, i, j, c| {
            (b * 60 + i * 20 + j * 5 + c) as f64
        });
        let bytes = write_tensor(&t);
        assert_eq!(read_tensor(&bytes).unwrap(), t);
        assert!(matches!(
            read_tensor(&bytes[..bytes.len() - 3]),
            Err(Error::Format { .. })
        ));
        assert!(matches!(
            read_tensor(&bytes[..20]),
            Err(Error::Format { .. })
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(read_tensor(&bad), Err(Error::Format { .. })));
    }

    #[test]
    fn kernel_exports() {
        let k = Grid::from_vec(2, 3, vec![0.0, 1.0, 2.0, 3.0, 4.0, -1.5]).unwrap();
        assert_eq!(kernel_csv(&k), "0,1,2\n3,4,-1.5\n");
        assert_eq!(parse_kernel_csv(&kernel_csv(&k)).unwrap(), k);
        let bin = kernel_bin(&k);
        assert_eq!(&bin[..8], b"SSM2DKRN");
        assert_eq!(&bin[8..16], &[2, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(read_kernel_bin(&bin).unwrap(), k);
        let pgm = kernel_pgm(&k);
        let lines: Vec<&str> = pgm.lines().collect();
        assert_eq!(lines[0], "P2");
        assert!(lines[1].starts_with('#'));
        assert_eq!(lines[2], "3 2");
        assert_eq!(lines[4], "70 116 162");
        assert_eq!(lines[5], "209 255 0");
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_size("8x5").unwrap(), (8, 5));
        assert!(parse_size("8").is_err());
        assert!(parse_size("0x4").is_err());
    }

    proptest! {
        #[test]
        fn tensor_bytes_round_trip(
            extents in (1usize..3, 1usize..4, 1usize..4, 1usize..3),
            seed in any::<u64>(),
        ) {
            let (b, r, c, h) = extents;
            let t = ImageTensor::from_fn(b, r, c, h, |x, y, z, w| {
                ((seed as f64) * 1e-19 + (x + 7 * y + 13 * z + 17 * w) as f64).sin()
            });
            prop_assert_eq!(read_tensor(&write_tensor(&t)).unwrap(), t);
        }
    }
}
