//! Sparse state representation and exact unitary evolution of the coined
//! walk on the 1D integer lattice.
//!
//! One *roundtrip* applies a coin layer followed by the bidirectional shift
//! `S = S_H S_V†` (every `H` amplitude moves one site right, every `V`
//! amplitude one site left). A full walk step is two roundtrips: the `θ2`
//! coin layer, a shift, the position-dependent `θ1` layer, a shift.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// Lattice position.
pub type Pos = i64;

/// Amplitudes below this magnitude are dropped from the sparse map after
/// each evolution layer. Far below every tolerance used by callers.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Internal (coin) degree of freedom: `|H⟩ = (1,0)ᵀ`, `|V⟩ = (0,1)ᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => write!(f, "H"),
            Polarization::V => write!(f, "V"),
        }
    }
}

/// Pair of complex amplitudes at one lattice site.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Spinor {
    pub h: C64,
    pub v: C64,
}

impl Spinor {
    pub fn new(h: C64, v: C64) -> Self {
        Self { h, v }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn component(&self, pol: Polarization) -> C64 {
        match pol {
            Polarization::H => self.h,
            Polarization::V => self.v,
        }
    }

    pub fn scale(&self, c: C64) -> Spinor {
        Spinor::new(self.h * c, self.v * c)
    }

    pub fn add(&self, other: &Spinor) -> Spinor {
        Spinor::new(self.h + other.h, self.v + other.v)
    }

    pub fn is_finite(&self) -> bool {
        self.h.re.is_finite() && self.h.im.is_finite() && self.v.re.is_finite() && self.v.im.is_finite()
    }
}

/// The walker wavefunction: a sparse map position -> spinor plus counters.
///
/// `roundtrip` counts applied coin+shift layers; `step` counts full walk
/// steps, so `roundtrip = 2 * step` under pure walk evolution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WalkerState {
    amplitudes: BTreeMap<Pos, Spinor>,
    pub step: u32,
    pub roundtrip: u32,
}

impl WalkerState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unit amplitude in one polarization at one site.
    pub fn delta(position: Pos, pol: Polarization) -> Self {
        let one = C64::new(1.0, 0.0);
        let spinor = match pol {
            Polarization::H => Spinor::new(one, C64::new(0.0, 0.0)),
            Polarization::V => Spinor::new(C64::new(0.0, 0.0), one),
        };
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(position, spinor);
        Self { amplitudes, step: 0, roundtrip: 0 }
    }

    pub fn from_amplitudes<I>(iter: I) -> Self
    where
        I: IntoIterator<Item = (Pos, Spinor)>,
    {
        let mut amplitudes = BTreeMap::new();
        for (x, sp) in iter {
            if sp.norm_sqr() > 0.0 {
                amplitudes.insert(x, sp);
            }
        }
        Self { amplitudes, step: 0, roundtrip: 0 }
    }

    pub fn amplitude(&self, position: Pos) -> Spinor {
        self.amplitudes.get(&position).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Pos, &Spinor)> {
        self.amplitudes.iter()
    }

    pub fn support(&self) -> BTreeSet<Pos> {
        self.amplitudes.keys().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Total squared norm.
    pub fn norm2(&self) -> f64 {
        self.amplitudes.values().map(Spinor::norm_sqr).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.values().all(Spinor::is_finite)
    }

    /// Zero all sites outside `positions`, keeping counters.
    pub fn restricted(&self, positions: &BTreeSet<Pos>) -> WalkerState {
        let amplitudes = self
            .amplitudes
            .iter()
            .filter(|(x, _)| positions.contains(x))
            .map(|(x, sp)| (*x, *sp))
            .collect();
        WalkerState { amplitudes, step: self.step, roundtrip: self.roundtrip }
    }

    /// Scale to unit norm. Errors when the state is numerically zero.
    pub fn renormalized(&self) -> Result<WalkerState> {
        let norm = self.norm2().sqrt();
        if norm <= 1e-15 {
            return Err(Error::DegenerateState { norm });
        }
        Ok(self.scaled(C64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> WalkerState {
        let amplitudes = self.amplitudes.iter().map(|(x, sp)| (*x, sp.scale(c))).collect();
        WalkerState { amplitudes, step: self.step, roundtrip: self.roundtrip }
    }

    /// Amplitude-wise sum; counters taken from `self`.
    pub fn add(&self, other: &WalkerState) -> WalkerState {
        let mut amplitudes = self.amplitudes.clone();
        for (x, sp) in &other.amplitudes {
            let entry = amplitudes.entry(*x).or_insert_with(Spinor::zero);
            *entry = entry.add(sp);
        }
        WalkerState { amplitudes, step: self.step, roundtrip: self.roundtrip }
    }

    /// l2 distance over the union of supports.
    pub fn distance(&self, other: &WalkerState) -> f64 {
        let mut positions = self.support();
        positions.extend(other.support());
        positions
            .into_iter()
            .map(|x| {
                let a = self.amplitude(x);
                let b = other.amplitude(x);
                (a.h - b.h).norm_sqr() + (a.v - b.v).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, sp| {
            if sp.h.norm() < PRUNE_THRESHOLD {
                sp.h = C64::new(0.0, 0.0);
            }
            if sp.v.norm() < PRUNE_THRESHOLD {
                sp.v = C64::new(0.0, 0.0);
            }
            sp.h.norm() >= PRUNE_THRESHOLD || sp.v.norm() >= PRUNE_THRESHOLD
        });
    }
}

/// The two decoupled boundary configurations.
///
/// Setting A uses `θ2 = π/4` with the decoupling coin `θ1(-1) = +π/2`;
/// setting B uses `θ2 = 3π/4` with `θ1(-1) = -π/2`. Both leave `θ1 = 0`
/// elsewhere, which severs the walk between sites -1 and 0 and pins the
/// boundary eigenvalue to -1 (A) or +1 (B).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Setting {
    A,
    B,
}

impl Setting {
    pub fn theta2(&self) -> f64 {
        match self {
            Setting::A => std::f64::consts::FRAC_PI_4,
            Setting::B => 3.0 * std::f64::consts::FRAC_PI_4,
        }
    }

    pub fn decoupling_theta1(&self) -> f64 {
        match self {
            Setting::A => FRAC_PI_2,
            Setting::B => -FRAC_PI_2,
        }
    }

    /// Boundary eigenvalue fixed by the decoupling sign.
    pub fn eigenvalue(&self) -> f64 {
        match self {
            Setting::A => -1.0,
            Setting::B => 1.0,
        }
    }

    pub fn parse(label: &str) -> Result<Self> {
        match label.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Setting::A),
            "b" => Ok(Setting::B),
            other => Err(Error::InvalidSetting(other.to_string())),
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::A => write!(f, "A"),
            Setting::B => write!(f, "B"),
        }
    }
}

/// One coin assignment for a single (roundtrip, position) cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoinSpec {
    Rotation(f64),
    /// Identity; lets a pulse pass through unchanged.
    Transmit,
    /// Rotation by `±π/2`; swaps the travelling direction.
    Reflect { negative: bool },
    /// Balanced mixing coin used where two pulses are brought to interfere.
    Interfere(f64),
}

impl CoinSpec {
    pub fn reflect() -> Self {
        CoinSpec::Reflect { negative: false }
    }

    pub fn angle(&self) -> f64 {
        match self {
            CoinSpec::Rotation(theta) => *theta,
            CoinSpec::Transmit => 0.0,
            CoinSpec::Reflect { negative: false } => FRAC_PI_2,
            CoinSpec::Reflect { negative: true } => -FRAC_PI_2,
            CoinSpec::Interfere(theta) => *theta,
        }
    }
}

/// Which coin layer of the two-layer step is being applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Theta2,
    Theta1,
    /// Outside the walk phase: transmit everywhere (modulo overrides).
    Idle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleLabel {
    A,
    B,
    Custom,
}

/// Rule assigning each (roundtrip, position) a coin.
///
/// Bulk behaviour comes from `bulk_theta2` and the sparse `theta1_map`
/// (default angle 0); `overrides` take precedence and carry the routing
/// operations of the interferometric protocol. `walk_start` shifts the
/// two-layer alternation in time and `walk_layers` optionally ends it;
/// layers outside the walk phase default to transmission.
#[derive(Clone, Debug)]
pub struct CoinSchedule {
    bulk_theta2: f64,
    theta1_map: BTreeMap<Pos, f64>,
    overrides: BTreeMap<(u32, Pos), CoinSpec>,
    pub label: ScheduleLabel,
    walk_start: u32,
    walk_layers: Option<u32>,
}

impl CoinSchedule {
    /// The decoupled walk of one of the two standard settings.
    pub fn setting(setting: Setting) -> Self {
        let mut theta1_map = BTreeMap::new();
        theta1_map.insert(-1, setting.decoupling_theta1());
        Self {
            bulk_theta2: setting.theta2(),
            theta1_map,
            overrides: BTreeMap::new(),
            label: match setting {
                Setting::A => ScheduleLabel::A,
                Setting::B => ScheduleLabel::B,
            },
            walk_start: 0,
            walk_layers: None,
        }
    }

    /// A translation-invariant-bulk walk with arbitrary angles.
    pub fn custom(bulk_theta2: f64, theta1_map: BTreeMap<Pos, f64>) -> Result<Self> {
        if !bulk_theta2.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite theta2: {bulk_theta2}")));
        }
        if let Some((x, theta)) = theta1_map.iter().find(|(_, t)| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite theta1 at x = {x}: {theta}")));
        }
        Ok(Self {
            bulk_theta2,
            theta1_map,
            overrides: BTreeMap::new(),
            label: ScheduleLabel::Custom,
            walk_start: 0,
            walk_layers: None,
        })
    }

    pub fn bulk_theta2(&self) -> f64 {
        self.bulk_theta2
    }

    pub fn theta1(&self, position: Pos) -> f64 {
        self.theta1_map.get(&position).copied().unwrap_or(0.0)
    }

    /// Delay the first `θ2` layer to roundtrip `start` and optionally end
    /// the walk phase after `layers` further roundtrips.
    pub fn with_walk_window(mut self, start: u32, layers: Option<u32>) -> Self {
        self.walk_start = start;
        self.walk_layers = layers;
        self
    }

    pub fn add_override(&mut self, roundtrip: u32, position: Pos, coin: CoinSpec) {
        self.overrides.insert((roundtrip, position), coin);
    }

    pub fn overrides(&self) -> &BTreeMap<(u32, Pos), CoinSpec> {
        &self.overrides
    }

    pub fn layer_kind(&self, roundtrip: u32) -> LayerKind {
        if roundtrip < self.walk_start {
            return LayerKind::Idle;
        }
        if let Some(layers) = self.walk_layers {
            if roundtrip >= self.walk_start + layers {
                return LayerKind::Idle;
            }
        }
        if (roundtrip - self.walk_start).is_multiple_of(2) {
            LayerKind::Theta2
        } else {
            LayerKind::Theta1
        }
    }

    /// The coin applied at `position` during roundtrip `roundtrip` if that
    /// roundtrip carries the given layer kind.
    pub fn coin_for(&self, kind: LayerKind, roundtrip: u32, position: Pos) -> CoinSpec {
        if let Some(coin) = self.overrides.get(&(roundtrip, position)) {
            return *coin;
        }
        match kind {
            LayerKind::Theta2 => CoinSpec::Rotation(self.bulk_theta2),
            LayerKind::Theta1 => CoinSpec::Rotation(self.theta1(position)),
            LayerKind::Idle => CoinSpec::Transmit,
        }
    }
}

/// The coin matrix `C(θ) = exp(-iθσ_x)`.
///
/// Unitary with determinant 1 for any real angle.
pub fn coin_matrix(theta: f64) -> Result<Mat2> {
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite coin angle: {theta}")));
    }
    let (sin, cos) = theta.sin_cos();
    Ok(Mat2::new(
        C64::new(cos, 0.0),
        C64::new(0.0, -sin),
        C64::new(0.0, -sin),
        C64::new(cos, 0.0),
    ))
}

fn apply_spinor_coin(sp: &Spinor, theta: f64) -> Spinor {
    let (sin, cos) = theta.sin_cos();
    let m_i_sin = C64::new(0.0, -sin);
    Spinor::new(sp.h * cos + sp.v * m_i_sin, sp.h * m_i_sin + sp.v * cos)
}

/// Optional per-coin angle perturbation, keyed by (roundtrip, position).
#[derive(Clone, Copy, Debug)]
pub struct CoinNoise {
    pub sigma: f64,
    pub seed: u64,
    pub sample: u64,
}

impl CoinNoise {
    pub fn offset(&self, roundtrip: u32, position: Pos) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let h = crate::rng::mix(&[
            self.seed,
            0x616e676c65, // domain tag
            self.sample,
            u64::from(roundtrip),
            position as u64,
        ]);
        self.sigma * crate::rng::symmetric_unit(h)
    }
}

fn coin_layer(
    state: &WalkerState,
    schedule: &CoinSchedule,
    kind: LayerKind,
    roundtrip: u32,
    noise: Option<&CoinNoise>,
) -> WalkerState {
    debug_assert!(state.is_finite(), "non-finite input state");
    let amplitudes = state
        .amplitudes
        .iter()
        .map(|(x, sp)| {
            let coin = schedule.coin_for(kind, roundtrip, *x);
            let mut theta = coin.angle();
            if let Some(noise) = noise {
                theta += noise.offset(roundtrip, *x);
            }
            (*x, apply_spinor_coin(sp, theta))
        })
        .collect();
    WalkerState { amplitudes, step: state.step, roundtrip: state.roundtrip }
}

/// Apply one coin layer to every occupied site.
///
/// Overrides are looked up at the state's current roundtrip counter.
pub fn apply_coin(state: &WalkerState, schedule: &CoinSchedule, layer: LayerKind) -> WalkerState {
    coin_layer(state, schedule, layer, state.roundtrip, None)
}

/// The bidirectional shift `S = S_H S_V†`: `H` moves right, `V` moves left.
pub fn apply_shift(state: &WalkerState) -> WalkerState {
    debug_assert!(state.is_finite(), "non-finite input state");
    let mut amplitudes: BTreeMap<Pos, Spinor> = BTreeMap::new();
    for (x, sp) in &state.amplitudes {
        if sp.h.norm_sqr() > 0.0 {
            let entry = amplitudes.entry(x + 1).or_insert_with(Spinor::zero);
            entry.h += sp.h;
        }
        if sp.v.norm_sqr() > 0.0 {
            let entry = amplitudes.entry(x - 1).or_insert_with(Spinor::zero);
            entry.v += sp.v;
        }
    }
    WalkerState { amplitudes, step: state.step, roundtrip: state.roundtrip }
}

/// One full walk step `W = S C(θ1) S C(θ2)`, applied right to left:
/// the `θ2` layer acts first. Advances `step` by 1 and `roundtrip` by 2.
pub fn walk_step(state: &WalkerState, schedule: &CoinSchedule) -> WalkerState {
    let r = state.roundtrip;
    let mut out = coin_layer(state, schedule, LayerKind::Theta2, r, None);
    out = apply_shift(&out);
    out = coin_layer(&out, schedule, LayerKind::Theta1, r + 1, None);
    out = apply_shift(&out);
    out.step = state.step + 1;
    out.roundtrip = r + 2;
    out.prune();
    out
}

/// One roundtrip (coin layer + shift) with the layer kind taken from the
/// schedule at the state's roundtrip counter. Used by the protocol
/// simulator, where walk, routing and interference all run through the
/// same machinery on one joint state vector.
pub fn advance_roundtrip(state: &WalkerState, schedule: &CoinSchedule) -> WalkerState {
    advance_roundtrip_with(state, schedule, None)
}

pub fn advance_roundtrip_with(
    state: &WalkerState,
    schedule: &CoinSchedule,
    noise: Option<&CoinNoise>,
) -> WalkerState {
    let r = state.roundtrip;
    let kind = schedule.layer_kind(r);
    let mut out = coin_layer(state, schedule, kind, r, noise);
    out = apply_shift(&out);
    out.roundtrip = r + 1;
    out.prune();
    out
}
