//! Time-multiplexed phase-reference protocol.
//!
//! A single input pulse is split by a mixing coin: the right-moving `H`
//! component seeds the decoupled walk, the left-moving `V` component is the
//! phase reference. Transmission overrides keep the reference on a clean
//! left-moving track, one reflection turns it around mid-protocol, and
//! after the target step the walker component of interest is steered to
//! meet it. A balanced mixing coin at the meeting site converts their phase
//! difference into the intensity imbalance of two detection bins:
//!
//! `I_H = (I_w + I_r - 2 sqrt(I_w I_r) sin(α_r - α_w)) / 2` and the mirror
//! image for `I_V`, so `M = (I_V - I_H) / (2 sqrt(I_w I_r)) = sin(α_r - α_w)`.
//!
//! A walker eigenvalue of -1 advances `α_w` by `π` per step, flipping the
//! sign of `M` from step to step; eigenvalue +1 leaves the sign constant.
//! Walker, reference and all routing operations evolve in one joint state
//! vector through the same roundtrip machinery as the plain walk.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::distill::LossModel;
use crate::error::{Error, Result};
use crate::lattice::{
    advance_roundtrip_with, walk_step, CoinNoise, CoinSchedule, CoinSpec, Polarization, Pos,
    Setting, Spinor, WalkerState,
};

/// Site where the input pulse enters and is split.
pub const LAUNCH_POSITION: Pos = -1;

/// Foreign amplitude allowed in a detection bin of an ideal run.
pub const ISOLATION_TOLERANCE: f64 = 1e-9;

/// Cross-amplitude allowed on the reference track before the interference.
pub const REFERENCE_OVERLAP_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_COUPLING_SIGMA: f64 = 0.02;
/// Coin angle error of two degrees.
pub const DEFAULT_ANGLE_SIGMA: f64 = 2.0 * std::f64::consts::PI / 180.0;
pub const DEFAULT_MC_SAMPLES: usize = 1000;
/// Per-roundtrip intensity survival of the loop used by the error model.
pub const DEFAULT_SURVIVAL: f64 = 0.8;
/// Threshold on `i_w * i_r` below which a read-out is not quantifiable.
/// Under the default loss model the vertical position-1 run at step 8 sits
/// at 3.4e-8 and the weakest run that must stay readable (vertical,
/// position 1, step 7) at 1.6e-7; the floor separates both with margin.
pub const DEFAULT_NOISE_FLOOR: f64 = 6e-8;

/// One detector address: the bin is read after `roundtrip` roundtrips.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetectionBin {
    pub roundtrip: u32,
    pub position: Pos,
    pub polarization: Polarization,
}

/// Complete routing recipe for one read-out run.
#[derive(Clone, Debug)]
pub struct RoutingPlan {
    pub setting: Setting,
    pub target_step: u32,
    /// Eigenstate-local position: 0 is the innermost site, physical `2p`.
    pub target_position: u32,
    pub target_polarization: Polarization,
    pub schedule: CoinSchedule,
    pub interference_layer: u32,
    pub interference_site: Pos,
    pub detection_bins: [DetectionBin; 2],
    /// Roundtrip carrying the single reflection of the reference path.
    pub reflect_layer: u32,
    pub split_angle: f64,
    /// Reflections applied to the target on its way to the interference.
    pub target_reflections: u32,
}

impl RoutingPlan {
    /// Reference position after `t` completed roundtrips.
    pub fn reference_position(&self, t: u32) -> Pos {
        if t < self.reflect_layer {
            -(t as Pos + 2)
        } else {
            t as Pos - 2 * self.reflect_layer as Pos
        }
    }

    /// Roundtrip counter value when the walk phase has finished.
    fn walk_end_counter(&self) -> u32 {
        2 * self.target_step + 1
    }

    pub fn total_roundtrips(&self) -> u32 {
        self.interference_layer + 1
    }

    fn target_site(&self) -> Pos {
        2 * self.target_position as Pos
    }
}

/// Planner knobs; the split angle fixes how much intensity the reference
/// branch receives.
#[derive(Clone, Copy, Debug)]
pub struct PlanOptions {
    pub split_angle: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { split_angle: -FRAC_PI_4 }
    }
}

/// Detected and calibrated intensities of one run, with the derived
/// M-parameter. `i_h + i_v = i_w + i_r` for ideal runs.
#[derive(Clone, Copy, Debug)]
pub struct InterferenceOutcome {
    pub i_h: f64,
    pub i_v: f64,
    pub i_w: f64,
    pub i_r: f64,
    pub m: f64,
    pub m_error: f64,
}

/// Environment of one protocol execution.
#[derive(Clone, Copy, Debug)]
pub struct RunConditions {
    pub loss: Option<LossModel>,
    pub noise_floor: f64,
    pub perturbation: Option<Perturbation>,
    pub check_isolation: bool,
}

impl RunConditions {
    /// Lossless, noise-free, with the isolation check active.
    pub fn ideal() -> Self {
        Self { loss: None, noise_floor: 0.0, perturbation: None, check_isolation: true }
    }

    pub fn lossy(loss: LossModel, noise_floor: f64) -> Self {
        Self { loss: Some(loss), noise_floor, perturbation: None, check_isolation: true }
    }
}

/// One Monte Carlo draw of coin-angle and coupling errors.
#[derive(Clone, Copy, Debug)]
pub struct Perturbation {
    pub angle_sigma: f64,
    pub coupling_sigma: f64,
    pub seed: u64,
    pub sample: u64,
}

impl Perturbation {
    fn coupling(&self, detector: u64) -> f64 {
        if self.coupling_sigma == 0.0 {
            return 1.0;
        }
        let h = crate::rng::mix(&[self.seed, 0x636f7570, self.sample, detector]);
        1.0 + self.coupling_sigma * crate::rng::symmetric_unit(h)
    }

    fn coin_noise(&self) -> CoinNoise {
        CoinNoise { sigma: self.angle_sigma, seed: self.seed, sample: self.sample }
    }
}

/// Monte Carlo configuration with the error magnitudes of the model:
/// couplings within ±2 %, coin angles within ±2 degrees, 1000 samples.
#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub coupling_sigma: f64,
    pub angle_sigma: f64,
    pub samples: usize,
    pub seed: u64,
    pub loss: Option<LossModel>,
    pub noise_floor: f64,
}

impl McConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            coupling_sigma: DEFAULT_COUPLING_SIGMA,
            angle_sigma: DEFAULT_ANGLE_SIGMA,
            samples: DEFAULT_MC_SAMPLES,
            seed,
            loss: Some(LossModel { survival: DEFAULT_SURVIVAL, outcoupling: 1.0 }),
            noise_floor: DEFAULT_NOISE_FLOOR,
        }
    }
}

/// Per-sample diagnostics of a Monte Carlo run.
#[derive(Clone, Debug)]
pub struct McReport {
    pub outcome: InterferenceOutcome,
    pub samples: Vec<f64>,
    /// Fraction of samples whose M-parameter sign matches the reference.
    pub sign_agreement: f64,
}

/// The full standard data set: both settings, steps 6 to 8, the three
/// innermost positions, both polarizations. 18 runs per setting.
pub fn standard_runs() -> Vec<(Setting, u32, u32, Polarization)> {
    let mut runs = Vec::with_capacity(36);
    for setting in [Setting::A, Setting::B] {
        for step in 6..=8 {
            for position in 0..=2 {
                for pol in [Polarization::H, Polarization::V] {
                    runs.push((setting, step, position, pol));
                }
            }
        }
    }
    runs
}

/// Build and validate the routing plan for one run.
pub fn make_plan(
    setting: Setting,
    target_step: u32,
    target_position: u32,
    target_polarization: Polarization,
) -> Result<RoutingPlan> {
    make_plan_with(setting, target_step, target_position, target_polarization, &PlanOptions::default())
}

pub fn make_plan_with(
    setting: Setting,
    target_step: u32,
    target_position: u32,
    target_polarization: Polarization,
    options: &PlanOptions,
) -> Result<RoutingPlan> {
    if !(6..=8).contains(&target_step) {
        return Err(Error::InvalidArgument(format!(
            "target step {target_step} outside the supported range 6..=8"
        )));
    }
    if target_position > 2 {
        return Err(Error::InvalidArgument(format!(
            "target position {target_position} outside the supported range 0..=2"
        )));
    }
    if !options.split_angle.is_finite() {
        return Err(Error::InvalidArgument("non-finite split angle".into()));
    }
    if options.split_angle.sin().abs() < 1e-6 || options.split_angle.cos().abs() < 1e-6 {
        return Err(Error::PlanningInfeasible(
            "split coin leaves the walker or the reference arm empty".into(),
        ));
    }

    let s = target_step;
    let p = target_position;
    let walk_layers = 2 * s;
    // The reference turns around late enough that it re-enters the walk
    // region only after the walk phase, and the meeting happens left of
    // the boundary.
    let reflect_layer = s + p + 3;

    let mut schedule = CoinSchedule::setting(setting).with_walk_window(1, Some(walk_layers));
    schedule.add_override(0, LAUNCH_POSITION, CoinSpec::Rotation(options.split_angle));

    // Keep the reference transparent through every theta2 layer it crosses.
    for r in (1..=walk_layers).step_by(2) {
        if r == reflect_layer {
            continue;
        }
        let t = r - 1;
        let position = if t < reflect_layer {
            -(r as Pos + 1)
        } else {
            t as Pos - 2 * reflect_layer as Pos
        };
        schedule.add_override(r, position, CoinSpec::Transmit);
    }
    schedule.add_override(reflect_layer, -(reflect_layer as Pos + 1), CoinSpec::reflect());

    // Readout phase. A vertical target is already a left mover; a
    // horizontal one is reflected once at the first odd site it reaches,
    // which simultaneously diverts the vertical component of the next
    // site outward. Remaining left movers that would cross the incoming
    // reference are turned around one by one at site -2; successive
    // diversion layers are two roundtrips apart so every diverted pulse
    // leaves on its own track.
    let (interference_layer, interference_site, target_reflections, divert_count) =
        match target_polarization {
            Polarization::V => (reflect_layer + s + p + 1, -3, 0, p),
            Polarization::H => {
                schedule.add_override(2 * s + 2, 2 * p as Pos + 1, CoinSpec::reflect());
                (reflect_layer + s + p + 2, -2, 1, p + 1)
            }
        };
    for q in 0..divert_count {
        schedule.add_override(2 * s + 3 + 2 * q, -2, CoinSpec::reflect());
    }
    schedule.add_override(interference_layer, interference_site, CoinSpec::Interfere(FRAC_PI_4));

    let detection_bins = [
        DetectionBin {
            roundtrip: interference_layer,
            position: interference_site + 1,
            polarization: Polarization::H,
        },
        DetectionBin {
            roundtrip: interference_layer,
            position: interference_site - 1,
            polarization: Polarization::V,
        },
    ];

    let plan = RoutingPlan {
        setting,
        target_step,
        target_position,
        target_polarization,
        schedule,
        interference_layer,
        interference_site,
        detection_bins,
        reflect_layer,
        split_angle: options.split_angle,
        target_reflections,
    };
    validate_reference_path(&plan)?;
    Ok(plan)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Branch {
    Joint,
    WalkerOnly,
    ReferenceOnly,
    /// Reference plus the isolated target component only, prepared at the
    /// end of the walk phase; used for the isolation cross-check.
    TargetAndReference,
}

fn without_site(state: &WalkerState, site: Pos) -> WalkerState {
    let mut keep = state.support();
    keep.remove(&site);
    let mut out = state.restricted(&keep);
    out.step = state.step;
    out.roundtrip = state.roundtrip;
    out
}

fn keep_target_and_reference(state: &WalkerState, plan: &RoutingPlan) -> WalkerState {
    let target_site = plan.target_site();
    let pol = plan.target_polarization;
    let kept: Vec<(Pos, Spinor)> = state
        .iter()
        .filter_map(|(x, sp)| {
            if *x <= -2 {
                Some((*x, *sp))
            } else if *x == target_site {
                let mut filtered = Spinor::zero();
                match pol {
                    Polarization::H => filtered.h = sp.h,
                    Polarization::V => filtered.v = sp.v,
                }
                Some((*x, filtered))
            } else {
                None
            }
        })
        .collect();
    let mut out = WalkerState::from_amplitudes(kept);
    out.step = state.step;
    out.roundtrip = state.roundtrip;
    out
}

/// Run the plan's schedule and return the amplitudes in the two detection
/// bins, ordered like `plan.detection_bins`.
fn simulate(plan: &RoutingPlan, branch: Branch, noise: Option<&CoinNoise>) -> (C64, C64) {
    let mut state = WalkerState::delta(LAUNCH_POSITION, Polarization::H);
    while state.roundtrip <= plan.interference_layer {
        state = advance_roundtrip_with(&state, &plan.schedule, noise);
        if state.roundtrip == 1 {
            match branch {
                Branch::WalkerOnly => state = without_site(&state, LAUNCH_POSITION - 1),
                Branch::ReferenceOnly => state = without_site(&state, LAUNCH_POSITION + 1),
                _ => {}
            }
        }
        if branch == Branch::TargetAndReference && state.roundtrip == plan.walk_end_counter() {
            state = keep_target_and_reference(&state, plan);
        }
    }
    let read = |bin: &DetectionBin| state.amplitude(bin.position).component(bin.polarization);
    (read(&plan.detection_bins[0]), read(&plan.detection_bins[1]))
}

fn validate_reference_path(plan: &RoutingPlan) -> Result<()> {
    let mut state = WalkerState::delta(LAUNCH_POSITION, Polarization::H);
    for layer in 0..=plan.interference_layer.saturating_sub(2) {
        state = advance_roundtrip_with(&state, &plan.schedule, None);
        if layer == 0 {
            state = without_site(&state, LAUNCH_POSITION - 1);
        }
        let cross = state.amplitude(plan.reference_position(layer)).norm_sqr().sqrt();
        if cross >= REFERENCE_OVERLAP_TOLERANCE {
            return Err(Error::PlanningInfeasible(format!(
                "walker amplitude {cross:.3e} on the reference track after roundtrip {layer}"
            )));
        }
    }
    Ok(())
}

/// Mix two amplitudes with the balanced coin `C(sign * π/4)` and return the
/// squared output magnitudes `(i_h, i_v)`.
///
/// With `sign = -1` and the vector ordered (walker, reference) this
/// realizes the detected-intensity formulas quoted at module level.
pub fn interfere(walker: C64, reference: C64, sign: f64) -> (f64, f64) {
    assert!(sign == 1.0 || sign == -1.0, "sign must be +1 or -1");
    assert!(
        walker.re.is_finite() && walker.im.is_finite() && reference.re.is_finite() && reference.im.is_finite(),
        "non-finite amplitude"
    );
    let (sin, cos) = (sign * FRAC_PI_4).sin_cos();
    let minus_i_sin = C64::new(0.0, -sin);
    let out_h = walker * cos + reference * minus_i_sin;
    let out_v = walker * minus_i_sin + reference * cos;
    (out_h.norm_sqr(), out_v.norm_sqr())
}

/// `M = (i_v - i_h) / (2 sqrt(i_w i_r))`.
///
/// Values outside `[-1, 1]` (beyond rounding) indicate inconsistent inputs
/// and are rejected rather than clamped.
pub fn m_parameter(i_h: f64, i_v: f64, i_w: f64, i_r: f64, noise_floor: f64) -> Result<f64> {
    for (name, value) in [("i_h", i_h), ("i_v", i_v), ("i_w", i_w), ("i_r", i_r)] {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidArgument(format!("intensity {name} = {value}")));
        }
    }
    if i_w * i_r <= noise_floor || i_w <= 0.0 || i_r <= 0.0 {
        return Err(Error::VanishingComponent { i_h, i_v, i_w, i_r, noise_floor });
    }
    let m = (i_v - i_h) / (2.0 * (i_w * i_r).sqrt());
    if m.abs() > 1.0 + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "M = {m} outside [-1, 1]: inconsistent intensities"
        )));
    }
    Ok(m)
}

/// Execute one plan: the joint run gives the detected intensities, the
/// walker-only and reference-only runs calibrate `i_w` and `i_r`.
pub fn run_protocol(plan: &RoutingPlan, conditions: &RunConditions) -> Result<InterferenceOutcome> {
    let noise = conditions
        .perturbation
        .filter(|p| p.angle_sigma != 0.0)
        .map(|p| p.coin_noise());
    let noise_ref = noise.as_ref();

    let joint = simulate(plan, Branch::Joint, noise_ref);
    let walker = simulate(plan, Branch::WalkerOnly, noise_ref);
    let reference = simulate(plan, Branch::ReferenceOnly, noise_ref);

    if conditions.check_isolation {
        let clean = simulate(plan, Branch::TargetAndReference, noise_ref);
        let foreign = (joint.0 - clean.0).norm().max((joint.1 - clean.1).norm());
        if foreign > ISOLATION_TOLERANCE {
            return Err(Error::IsolationViolation { foreign });
        }
    }

    let scale = conditions
        .loss
        .map(|l| l.survival.powi(plan.total_roundtrips() as i32))
        .unwrap_or(1.0);
    let (c_h, c_v) = match &conditions.perturbation {
        Some(p) => (p.coupling(0), p.coupling(1)),
        None => (1.0, 1.0),
    };

    let i_h = c_h * joint.0.norm_sqr() * scale;
    let i_v = c_v * joint.1.norm_sqr() * scale;
    let i_w = (c_h * walker.0.norm_sqr() + c_v * walker.1.norm_sqr()) * scale;
    let i_r = (c_h * reference.0.norm_sqr() + c_v * reference.1.norm_sqr()) * scale;

    if i_w * i_r <= conditions.noise_floor || i_w <= 0.0 || i_r <= 0.0 {
        return Err(Error::VanishingComponent {
            i_h,
            i_v,
            i_w,
            i_r,
            noise_floor: conditions.noise_floor,
        });
    }

    let m = if conditions.perturbation.is_none() {
        m_parameter(i_h, i_v, i_w, i_r, conditions.noise_floor)?
    } else {
        // Detector couplings can push perturbed samples slightly outside
        // [-1, 1]; report the raw value instead of rejecting the sample.
        (i_v - i_h) / (2.0 * (i_w * i_r).sqrt())
    };
    Ok(InterferenceOutcome { i_h, i_v, i_w, i_r, m, m_error: 0.0 })
}

/// Direct read-out bypassing the routing machinery: evolve the plain walk,
/// pick the target amplitude, attach the plan's constant path factors and
/// interfere with the ideal reference amplitude.
pub fn analytic_readout(plan: &RoutingPlan) -> Result<InterferenceOutcome> {
    let schedule = CoinSchedule::setting(plan.setting);
    let mut psi = WalkerState::delta(0, Polarization::H);
    for _ in 0..plan.target_step {
        psi = walk_step(&psi, &schedule);
    }
    let raw = psi.amplitude(plan.target_site()).component(plan.target_polarization);
    let minus_i = C64::new(0.0, -1.0);
    let mut walker_amp = raw * plan.split_angle.cos();
    for _ in 0..plan.target_reflections {
        walker_amp *= minus_i;
    }
    let reference_amp = C64::new(0.0, -plan.split_angle.sin()) * minus_i;

    let (i_h, i_v) = interfere(walker_amp, reference_amp, -1.0);
    let i_w = walker_amp.norm_sqr();
    let i_r = reference_amp.norm_sqr();
    let m = m_parameter(i_h, i_v, i_w, i_r, 0.0)?;
    Ok(InterferenceOutcome { i_h, i_v, i_w, i_r, m, m_error: 0.0 })
}

/// Reference amplitude sitting at the interference site right before the
/// mixing coin, from a reference-only run.
pub fn reference_amplitude_at_interference(plan: &RoutingPlan) -> C64 {
    let mut state = WalkerState::delta(LAUNCH_POSITION, Polarization::H);
    for layer in 0..plan.interference_layer {
        state = advance_roundtrip_with(&state, &plan.schedule, None);
        if layer == 0 {
            state = without_site(&state, LAUNCH_POSITION + 1);
        }
    }
    state.amplitude(plan.interference_site).h
}

/// Monte Carlo error model: every scheduled coin angle and both detector
/// couplings are drawn independently per sample; `m_error` is the standard
/// deviation of the sampled M-parameters around the unperturbed outcome.
pub fn monte_carlo(plan: &RoutingPlan, config: &McConfig) -> Result<InterferenceOutcome> {
    monte_carlo_report(plan, config).map(|report| report.outcome)
}

pub fn monte_carlo_report(plan: &RoutingPlan, config: &McConfig) -> Result<McReport> {
    if config.samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "monte carlo needs at least 2 samples, got {}",
            config.samples
        )));
    }
    let base = RunConditions {
        loss: config.loss,
        noise_floor: config.noise_floor,
        perturbation: None,
        check_isolation: true,
    };
    let reference = run_protocol(plan, &base)?;

    let samples: Vec<f64> = (0..config.samples as u64)
        .into_par_iter()
        .map(|sample| {
            let conditions = RunConditions {
                loss: config.loss,
                noise_floor: config.noise_floor,
                perturbation: Some(Perturbation {
                    angle_sigma: config.angle_sigma,
                    coupling_sigma: config.coupling_sigma,
                    seed: config.seed,
                    sample,
                }),
                check_isolation: false,
            };
            run_protocol(plan, &conditions).map(|o| o.m)
        })
        .collect::<Result<Vec<f64>>>()?;

    let m_ref = reference.m;
    let n = samples.len() as f64;
    let m_error = (samples.iter().map(|m| (m - m_ref).powi(2)).sum::<f64>() / n).sqrt();
    let sign_agreement =
        samples.iter().filter(|m| m.signum() == m_ref.signum()).count() as f64 / n;

    Ok(McReport {
        outcome: InterferenceOutcome { m_error, ..reference },
        samples,
        sign_agreement,
    })
}
