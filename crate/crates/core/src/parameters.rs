//! Raw and constrained SSM parameters, the maps between them, and layer
//! configuration.
//!
//! Training-side values live in [`RawSsm`] and are unconstrained reals. The
//! recurrence and the kernel compiler consume [`SsmParams`], obtained through
//! [`constrain`]: in real mode every eigenvalue is `sigmoid(raw)`; in complex
//! mode every `A` and `B` entry is a polar number with radius `sigmoid(raw)`
//! and angle `2*pi*sigmoid(raw_angle)`, while `C` keeps its raw radius.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarField {
    Real,
    Complex,
}

impl ScalarField {
    /// Raw scalars per parameter entry: a value, or a (radius, angle) pair.
    pub fn parts(self) -> usize {
        match self {
            ScalarField::Real => 1,
            ScalarField::Complex => 2,
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ScalarField::Real => "real",
            ScalarField::Complex => "complex",
        })
    }
}

impl FromStr for ScalarField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" => Ok(ScalarField::Real),
            "complex" => Ok(ScalarField::Complex),
            other => Err(Error::invalid("field", format!("unknown field `{other}`"))),
        }
    }
}

/// Which form of the recurrence the kernel follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Unnormalized,
    /// Every propagation step is scaled by one half.
    Normalized,
    /// Normalized interior; the first row and column use unnormalized edge
    /// states read out through `2*C1`, `2*C2`.
    NormalizedRelaxed,
}

impl Mode {
    pub const ALL: [Mode; 3] = [
        Mode::Unnormalized,
        Mode::Normalized,
        Mode::NormalizedRelaxed,
    ];

    /// Factor applied to `A * x` on every recurrence step.
    pub fn step_scale(self) -> f64 {
        match self {
            Mode::Unnormalized => 1.0,
            Mode::Normalized | Mode::NormalizedRelaxed => 0.5,
        }
    }

    pub fn is_relaxed(self) -> bool {
        self == Mode::NormalizedRelaxed
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Mode::Unnormalized => "unnormalized",
            Mode::Normalized => "normalized",
            Mode::NormalizedRelaxed => "normalized-relaxed",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unnormalized" => Ok(Mode::Unnormalized),
            "normalized" => Ok(Mode::Normalized),
            "normalized-relaxed" | "normalized_relaxed" | "relaxed" => Ok(Mode::NormalizedRelaxed),
            other => Err(Error::invalid("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Number of axis-flipped copies of each kernel summed by the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Directions {
    One,
    Two,
    Four,
}

impl Directions {
    pub fn count(self) -> usize {
        match self {
            Directions::One => 1,
            Directions::Two => 2,
            Directions::Four => 4,
        }
    }

    /// `(flip rows, flip cols)` for each direction index.
    pub fn flips(self) -> &'static [(bool, bool)] {
        match self {
            Directions::One => &[(false, false)],
            Directions::Two => &[(false, false), (true, true)],
            Directions::Four => &[(false, false), (true, false), (false, true), (true, true)],
        }
    }
}

impl fmt::Display for Directions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

impl FromStr for Directions {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Directions::One),
            "2" => Ok(Directions::Two),
            "4" => Ok(Directions::Four),
            other => Err(Error::invalid(
                "directions",
                format!("expected 1, 2 or 4, got `{other}`"),
            )),
        }
    }
}

/// The eight per-coordinate parameter vectors of one SSM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    A1,
    A2,
    A3,
    A4,
    B1,
    B2,
    C1,
    C2,
}

impl Slot {
    pub const ALL: [Slot; 8] = [
        Slot::A1,
        Slot::A2,
        Slot::A3,
        Slot::A4,
        Slot::B1,
        Slot::B2,
        Slot::C1,
        Slot::C2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["a1", "a2", "a3", "a4", "b1", "b2", "c1", "c2"][self.index()]
    }

    fn radius_is_limited(self) -> bool {
        !matches!(self, Slot::C1 | Slot::C2)
    }
}

/// Which raw scalar of a parameter entry: the value (real mode) or radius
/// (complex mode), or the angle (complex mode only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Value,
    Angle,
}

/// Unconstrained parameters of one channel group.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSsm {
    field: ScalarField,
    n: usize,
    values: [Vec<f64>; 8],
    angles: [Vec<f64>; 8],
}

impl RawSsm {
    /// `angles` must be empty vectors in real mode.
    pub fn new(field: ScalarField, values: [Vec<f64>; 8], angles: [Vec<f64>; 8]) -> Result<Self> {
        let n = values[0].len();
        if n == 0 {
            return Err(Error::invalid("n", "state dimension must be positive"));
        }
        for slot in Slot::ALL {
            let v = &values[slot.index()];
            let a = &angles[slot.index()];
            let want_angles = if field == ScalarField::Complex { n } else { 0 };
            if v.len() != n {
                return Err(Error::invalid(
                    format!("{}_raw", slot.name()),
                    format!("expected {n} entries, got {}", v.len()),
                ));
            }
            if a.len() != want_angles {
                return Err(Error::invalid(
                    format!("{}_angle_raw", slot.name()),
                    format!("expected {want_angles} entries, got {}", a.len()),
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("{}_raw", slot.name())));
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("{}_angle_raw", slot.name())));
            }
        }
        Ok(RawSsm {
            field,
            n,
            values,
            angles,
        })
    }

    /// Every raw entry uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, field: ScalarField, n: usize) -> Self {
        Self::random_in(rng, field, n, 1.0)
    }

    pub fn random_in<R: Rng + ?Sized>(
        rng: &mut R,
        field: ScalarField,
        n: usize,
        half_width: f64,
    ) -> Self {
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| rng.random_range(-half_width..=half_width))
                .collect()
        };
        let values = std::array::from_fn(|_| draw(n));
        let angle_len = if field == ScalarField::Complex { n } else { 0 };
        let angles = std::array::from_fn(|_| draw(angle_len));
        RawSsm {
            field,
            n,
            values,
            angles,
        }
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self, slot: Slot) -> &[f64] {
        &self.values[slot.index()]
    }

    pub fn angles(&self, slot: Slot) -> &[f64] {
        &self.angles[slot.index()]
    }

    /// Total number of raw scalars.
    pub fn len(&self) -> usize {
        8 * self.field.parts() * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of a raw scalar in [`RawSsm::to_flat`] order, which is also
    /// the order of [`crate::KernelGradient`] partials.
    pub fn flat_index(&self, slot: Slot, part: Part, g: usize) -> usize {
        let part = match part {
            Part::Value => 0,
            Part::Angle => 1,
        };
        (slot.index() * self.field.parts() + part) * self.n + g
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for slot in Slot::ALL {
            out.extend_from_slice(&self.values[slot.index()]);
            if self.field == ScalarField::Complex {
                out.extend_from_slice(&self.angles[slot.index()]);
            }
        }
        out
    }

    pub fn from_flat(field: ScalarField, n: usize, flat: &[f64]) -> Result<Self> {
        let parts = field.parts();
        if n == 0 || flat.len() != 8 * parts * n {
            return Err(Error::Shape(format!(
                "{} raw scalars do not match n = {n} in {field} mode",
                flat.len()
            )));
        }
        let chunk = |slot: usize, part: usize| flat[(slot * parts + part) * n..][..n].to_vec();
        let values = std::array::from_fn(|s| chunk(s, 0));
        let angles = std::array::from_fn(|s| if parts == 2 { chunk(s, 1) } else { Vec::new() });
        RawSsm::new(field, values, angles)
    }
}

/// Constrained parameters of one channel group. All values are stored as
/// complex numbers; in real mode every imaginary part is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SsmParams {
    field: ScalarField,
    n: usize,
    values: [Vec<Complex64>; 8],
}

impl SsmParams {
    /// Builds parameters from explicit values, bypassing the constraint maps.
    ///
    /// Values outside the stable region (for example `A = 1`) are accepted so
    /// that exact constructions can be evaluated; see [`SsmParams::is_stable`].
    pub fn new(field: ScalarField, values: [Vec<Complex64>; 8]) -> Result<Self> {
        let n = values[0].len();
        if n == 0 {
            return Err(Error::invalid("n", "state dimension must be positive"));
        }
        for slot in Slot::ALL {
            let v = &values[slot.index()];
            if v.len() != n {
                return Err(Error::invalid(
                    slot.name(),
                    format!("expected {n} entries, got {}", v.len()),
                ));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite(slot.name().to_string()));
            }
            if field == ScalarField::Real && v.iter().any(|z| z.im != 0.0) {
                return Err(Error::invalid(
                    slot.name(),
                    "real-mode values must have zero imaginary part",
                ));
            }
        }
        Ok(SsmParams { field, n, values })
    }

    /// Real-mode parameters in slot order `A1, A2, A3, A4, B1, B2, C1, C2`.
    pub fn real<V: AsRef<[f64]>>(values: [V; 8]) -> Result<Self> {
        let values = values.map(|v| v.as_ref().iter().map(|&x| Complex64::new(x, 0.0)).collect());
        SsmParams::new(ScalarField::Real, values)
    }

    pub fn complex(values: [Vec<Complex64>; 8]) -> Result<Self> {
        SsmParams::new(ScalarField::Complex, values)
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, slot: Slot) -> &[Complex64] {
        &self.values[slot.index()]
    }

    /// `A1..A4` for `k` in `0..4`.
    pub fn a(&self, k: usize) -> &[Complex64] {
        &self.values[k]
    }

    /// `B1, B2` for `k` in `0..2`.
    pub fn b(&self, k: usize) -> &[Complex64] {
        &self.values[4 + k]
    }

    /// `C1, C2` for `k` in `0..2`.
    pub fn c(&self, k: usize) -> &[Complex64] {
        &self.values[6 + k]
    }

    /// Whether the values lie in the image of [`constrain`]: real eigenvalues
    /// in `(0, 1)`; complex `|A|`, `|B|` in `(0, 1)`.
    pub fn is_stable(&self) -> bool {
        let a_ok = (0..4).all(|k| {
            self.a(k).iter().all(|z| match self.field {
                ScalarField::Real => z.re > 0.0 && z.re < 1.0,
                ScalarField::Complex => z.norm() > 0.0 && z.norm() < 1.0,
            })
        });
        let b_ok = self.field == ScalarField::Real
            || (0..2).all(|k| self.b(k).iter().all(|z| z.norm() > 0.0 && z.norm() < 1.0));
        a_ok && b_ok
    }
}

/// Constrained value of one raw entry; `angle` is ignored in real mode.
pub(crate) fn constrain_entry(field: ScalarField, slot: Slot, value: f64, angle: f64) -> Complex64 {
    match field {
        ScalarField::Real if slot.index() < 4 => Complex64::new(sigmoid(value), 0.0),
        ScalarField::Real => Complex64::new(value, 0.0),
        ScalarField::Complex => {
            let radius = if slot.radius_is_limited() {
                sigmoid(value)
            } else {
                value
            };
            Complex64::from_polar(radius, TAU * sigmoid(angle))
        }
    }
}

/// Maps raw parameters into the stable region.
pub fn constrain(raw: &RawSsm) -> SsmParams {
    let values = std::array::from_fn(|s| {
        let slot = Slot::ALL[s];
        (0..raw.n)
            .map(|g| {
                let angle = raw.angles[s].get(g).copied().unwrap_or(0.0);
                constrain_entry(raw.field, slot, raw.values[s][g], angle)
            })
            .collect()
    });
    SsmParams {
        field: raw.field,
        n: raw.n,
        values,
    }
}

/// Derivative of a constrained entry with respect to one of its raw scalars.
pub(crate) fn constrain_derivative(raw: &RawSsm, slot: Slot, part: Part, g: usize) -> Complex64 {
    let s = slot.index();
    let v = raw.values[s][g];
    match raw.field {
        ScalarField::Real => match part {
            Part::Value if s < 4 => {
                let a = sigmoid(v);
                Complex64::new(a * (1.0 - a), 0.0)
            }
            Part::Value => Complex64::new(1.0, 0.0),
            Part::Angle => Complex64::new(0.0, 0.0),
        },
        ScalarField::Complex => {
            let t = sigmoid(raw.angles[s][g]);
            let phase = Complex64::from_polar(1.0, TAU * t);
            match part {
                Part::Value if slot.radius_is_limited() => {
                    let r = sigmoid(v);
                    phase * (r * (1.0 - r))
                }
                Part::Value => phase,
                Part::Angle => {
                    let radius = if slot.radius_is_limited() {
                        sigmoid(v)
                    } else {
                        v
                    };
                    // d/dt of r e^{i 2 pi sigmoid(t)}
                    Complex64::i() * phase * (radius * TAU * t * (1.0 - t))
                }
            }
        }
    }
}

/// Shape and mode of a layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerConfig {
    pub rows: usize,
    pub cols: usize,
    /// `H`, the channel count.
    pub channels: usize,
    /// `N`, the state dimension per axis.
    pub n_state: usize,
    pub n_ssm: usize,
    pub field: ScalarField,
    pub mode: Mode,
    pub directions: Directions,
    /// When true every direction reuses its group's parameters (the kernel is
    /// flipped); otherwise each direction has its own parameter set.
    pub shared_directions: bool,
}

impl LayerConfig {
    pub fn new(rows: usize, cols: usize, channels: usize, n_state: usize, n_ssm: usize) -> Self {
        LayerConfig {
            rows,
            cols,
            channels,
            n_state,
            n_ssm,
            field: ScalarField::Real,
            mode: Mode::NormalizedRelaxed,
            directions: Directions::One,
            shared_directions: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::EmptyGrid {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.n_state == 0 {
            return Err(Error::invalid("n", "state dimension must be positive"));
        }
        if self.n_ssm == 0 || self.channels == 0 || !self.channels.is_multiple_of(self.n_ssm) {
            return Err(Error::GroupMismatch {
                channels: self.channels,
                n_ssm: self.n_ssm,
            });
        }
        Ok(())
    }

    pub fn group_of(&self, channel: usize) -> usize {
        channel * self.n_ssm / self.channels
    }

    /// Parameter sets per group: one when directions share parameters.
    pub fn sets_per_group(&self) -> usize {
        if self.shared_directions {
            1
        } else {
            self.directions.count()
        }
    }

    pub fn param_sets(&self) -> usize {
        self.n_ssm * self.sets_per_group()
    }

    pub fn l_max(&self) -> usize {
        self.rows.max(self.cols)
    }
}

/// Constrained parameters of a whole layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// Indexed by `group * sets_per_group + set`.
    pub ssm: Vec<SsmParams>,
    /// Skip weight `D`, one per channel.
    pub skip: Vec<f64>,
}

impl LayerParams {
    pub fn validate(&self, cfg: &LayerConfig) -> Result<()> {
        cfg.validate()?;
        if self.ssm.len() != cfg.param_sets() {
            return Err(Error::Shape(format!(
                "expected {} parameter sets, got {}",
                cfg.param_sets(),
                self.ssm.len()
            )));
        }
        if self.skip.len() != cfg.channels {
            return Err(Error::Shape(format!(
                "expected {} skip weights, got {}",
                cfg.channels,
                self.skip.len()
            )));
        }
        for p in &self.ssm {
            if p.n() != cfg.n_state || p.field() != cfg.field {
                return Err(Error::Shape(format!(
                    "parameter set has n = {} ({}), config wants n = {} ({})",
                    p.n(),
                    p.field(),
                    cfg.n_state,
                    cfg.field
                )));
            }
        }
        if self.skip.iter().any(|d| !d.is_finite()) {
            return Err(Error::NonFinite("d".into()));
        }
        Ok(())
    }

    /// Parameters driving `group` in direction index `direction`.
    pub fn for_direction(&self, cfg: &LayerConfig, group: usize, direction: usize) -> &SsmParams {
        let sets = cfg.sets_per_group();
        &self.ssm[group * sets + if sets == 1 { 0 } else { direction }]
    }
}

/// Unconstrained parameters of a whole layer.
#[derive(Debug, Clone, PartialEq)]
pub struct RawParams {
    pub ssm: Vec<RawSsm>,
    pub skip: Vec<f64>,
}

impl RawParams {
    pub fn constrain(&self) -> LayerParams {
        LayerParams {
            ssm: self.ssm.iter().map(constrain).collect(),
            skip: self.skip.clone(),
        }
    }
}

/// Deterministic initialization: every raw scalar uniform in `[-1, 1]`.
pub fn init_raw(seed: u64, cfg: &LayerConfig) -> RawParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ssm = (0..cfg.param_sets())
        .map(|_| RawSsm::random(&mut rng, cfg.field, cfg.n_state))
        .collect();
    let skip = (0..cfg.channels)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    RawParams { ssm, skip }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw_real(a: f64) -> RawSsm {
        let values = std::array::from_fn(|_| vec![a]);
        RawSsm::new(ScalarField::Real, values, Default::default()).unwrap()
    }

    #[test]
    fn sigmoid_reference_points() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(3f64.ln()) - 0.75).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn real_constrain_limits_only_a() {
        let p = constrain(&raw_real(0.0));
        assert_eq!(p.a(0)[0], Complex64::new(0.5, 0.0));
        assert_eq!(p.b(0)[0], Complex64::new(0.0, 0.0));
        let p = constrain(&raw_real(3f64.ln()));
        assert!((p.a(3)[0].re - 0.75).abs() < 1e-15);
        assert_eq!(p.c(1)[0].re, 3f64.ln());
    }

    #[test]
    fn complex_zero_raw_is_minus_half() {
        let values: [Vec<f64>; 8] = std::array::from_fn(|_| vec![0.0]);
        let angles: [Vec<f64>; 8] = std::array::from_fn(|_| vec![0.0]);
        let raw = RawSsm::new(ScalarField::Complex, values, angles).unwrap();
        let p = constrain(&raw);
        let a = p.a(0)[0];
        assert!((a.re + 0.5).abs() < 1e-15 && a.im.abs() < 1e-15);
        // C keeps its raw radius, here zero.
        assert_eq!(p.c(0)[0].norm(), 0.0);
    }

    #[test]
    fn non_finite_raw_names_field() {
        let mut values: [Vec<f64>; 8] = std::array::from_fn(|_| vec![0.0]);
        values[Slot::B2.index()][0] = f64::NAN;
        let err = RawSsm::new(ScalarField::Real, values, Default::default()).unwrap_err();
        assert_eq!(err, Error::NonFinite("b2_raw".into()));
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let mut cfg = LayerConfig::new(4, 4, 6, 3, 2);
        cfg.field = ScalarField::Complex;
        let a = init_raw(7, &cfg);
        assert_eq!(a, init_raw(7, &cfg));
        assert_ne!(a, init_raw(8, &cfg));
        for raw in &a.ssm {
            assert!(raw.to_flat().iter().all(|x| (-1.0..=1.0).contains(x)));
        }
        assert!(a.skip.iter().all(|x| (-1.0..=1.0).contains(x)));

        cfg.field = ScalarField::Real;
        let lo = sigmoid(-1.0);
        let hi = sigmoid(1.0);
        assert!((lo - 0.268_941_421_369_995_1).abs() < 1e-15);
        assert!((hi - 0.731_058_578_630_004_9).abs() < 1e-15);
        for p in init_raw(11, &cfg).constrain().ssm {
            for k in 0..4 {
                assert!(p.a(k).iter().all(|z| z.re >= lo && z.re <= hi));
            }
        }
    }

    #[test]
    fn flat_round_trip_and_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let raw = RawSsm::random(&mut rng, ScalarField::Complex, 3);
        let flat = raw.to_flat();
        assert_eq!(
            RawSsm::from_flat(ScalarField::Complex, 3, &flat).unwrap(),
            raw
        );
        assert_eq!(
            flat[raw.flat_index(Slot::B1, Part::Angle, 2)],
            raw.angles(Slot::B1)[2]
        );
        assert_eq!(
            flat[raw.flat_index(Slot::C2, Part::Value, 0)],
            raw.values(Slot::C2)[0]
        );
    }

    #[test]
    fn config_groups_are_contiguous() {
        let cfg = LayerConfig::new(2, 2, 6, 1, 3);
        let groups: Vec<_> = (0..6).map(|c| cfg.group_of(c)).collect();
        assert_eq!(groups, [0, 0, 1, 1, 2, 2]);
        assert!(LayerConfig::new(2, 2, 6, 1, 4).validate().is_err());
        assert!(LayerConfig::new(0, 2, 6, 1, 3).validate().is_err());
    }

    #[test]
    fn parses_enums() {
        assert_eq!(
            "normalized-relaxed".parse::<Mode>().unwrap(),
            Mode::NormalizedRelaxed
        );
        assert_eq!(
            "Complex".parse::<ScalarField>().unwrap(),
            ScalarField::Complex
        );
        assert_eq!("4".parse::<Directions>().unwrap(), Directions::Four);
        assert!("3".parse::<Directions>().is_err());
    }

    proptest! {
        #[test]
        fn constrained_values_are_stable(
            flat in prop::collection::vec(-30.0f64..30.0, 32),
            complex in any::<bool>(),
        ) {
            let (field, n) = if complex { (ScalarField::Complex, 2) } else { (ScalarField::Real, 4) };
            let raw = RawSsm::from_flat(field, n, &flat).unwrap();
            let p = constrain(&raw);
            prop_assert!(p.is_stable());
            if complex {
                for k in 0..2 {
                    prop_assert!(p.b(k).iter().all(|z| z.norm() < 1.0));
                }
            }
        }

        #[test]
        fn real_constraint_is_monotone(x in -30.0f64..30.0, dx in 1e-3f64..5.0) {
            let lo = constrain(&raw_real(x)).a(0)[0].re;
            let hi = constrain(&raw_real(x + dx)).a(0)[0].re;
            prop_assert!(lo < hi);
        }
    }
}
