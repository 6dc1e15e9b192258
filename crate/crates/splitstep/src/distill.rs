//! Approximate eigenstate preparation and intensity bookkeeping.
//!
//! Evolving a localized input near the decoupled boundary lets every
//! component without overlap on the localized eigenstate run off to the
//! right, while the overlapping content stays. Restricting to the innermost
//! sites and renormalizing distills an approximate eigenfunction, scored
//! against the analytic state with a Bhattacharyya-type similarity.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::edge::edge_state;
use crate::error::{Error, Result};
use crate::lattice::{walk_step, CoinSchedule, Polarization, Pos, Setting, WalkerState};

/// Default boundary window: the three innermost even sites.
pub fn boundary_window() -> BTreeSet<Pos> {
    [0, 2, 4].into_iter().collect()
}

/// Per (position, polarization) intensities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntensityTable {
    entries: BTreeMap<(Pos, Polarization), f64>,
}

impl IntensityTable {
    pub fn from_state(state: &WalkerState) -> Self {
        let mut entries = BTreeMap::new();
        for (x, sp) in state.iter() {
            let h = sp.h.norm_sqr();
            let v = sp.v.norm_sqr();
            if h > 0.0 {
                entries.insert((*x, Polarization::H), h);
            }
            if v > 0.0 {
                entries.insert((*x, Polarization::V), v);
            }
        }
        Self { entries }
    }

    pub fn get(&self, position: Pos, pol: Polarization) -> f64 {
        self.entries.get(&(position, pol)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Pos, Polarization), &f64)> {
        self.entries.iter()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|(k, v)| (*k, v * factor)).collect(),
        }
    }

    pub fn restricted(&self, positions: &BTreeSet<Pos>) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|((x, _), _)| positions.contains(x))
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    pub fn renormalized(&self) -> Result<Self> {
        let total = self.total();
        if total <= 1e-30 {
            return Err(Error::DegenerateState { norm: total.sqrt() });
        }
        Ok(self.scaled(1.0 / total))
    }

    /// Total-intensity per position, polarization traced out.
    pub fn traced(&self) -> BTreeMap<Pos, f64> {
        let mut out = BTreeMap::new();
        for ((x, _), value) in &self.entries {
            *out.entry(*x).or_insert(0.0) += value;
        }
        out
    }
}

/// Evolve the H-polarized delta state at the boundary for `steps` walk
/// steps, restrict to `window` and renormalize.
pub fn distill(setting: Setting, steps: u32, window: &BTreeSet<Pos>) -> Result<WalkerState> {
    if steps == 0 {
        return Err(Error::InvalidArgument("distillation needs at least one step".into()));
    }
    let schedule = CoinSchedule::setting(setting);
    let mut state = WalkerState::delta(0, Polarization::H);
    for _ in 0..steps {
        state = walk_step(&state, &schedule);
    }
    state.restricted(window).renormalized()
}

/// Overlap of two intensity distributions:
/// the summed square roots of products per (position, polarization).
///
/// Both tables must be normalized over the compared region; the result lies
/// in `[0, 1]`, with 1 for identical distributions and 0 for disjoint ones.
pub fn similarity(p_exp: &IntensityTable, p_theo: &IntensityTable) -> Result<f64> {
    for (key, value) in p_exp.iter().chain(p_theo.iter()) {
        if *value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "negative intensity {value} at {key:?}"
            )));
        }
    }
    for (name, table) in [("experimental", p_exp), ("theoretical", p_theo)] {
        let total = table.total();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "{name} intensities sum to {total}, expected 1"
            )));
        }
    }
    let mut keys: BTreeSet<(Pos, Polarization)> = p_exp.iter().map(|(k, _)| *k).collect();
    keys.extend(p_theo.iter().map(|(k, _)| *k));
    let d: f64 = keys
        .into_iter()
        .map(|(x, pol)| (p_exp.get(x, pol) * p_theo.get(x, pol)).sqrt())
        .sum();
    Ok(d.abs())
}

/// Similarity of the distilled state against the analytic eigenstate, both
/// renormalized on the window.
pub fn distill_similarity(setting: Setting, steps: u32, window: &BTreeSet<Pos>) -> Result<f64> {
    let distilled = distill(setting, steps, window)?;
    let p_exp = IntensityTable::from_state(&distilled);
    let (_, ideal) = edge_state(setting, 60)?;
    let p_theo = IntensityTable::from_state(&ideal)
        .restricted(window)
        .renormalized()?;
    similarity(&p_exp, &p_theo)
}

/// Per-roundtrip survival and monitoring tap of the loop.
#[derive(Clone, Copy, Debug)]
pub struct LossModel {
    /// Fraction of intensity that survives one roundtrip.
    pub survival: f64,
    /// Fraction of the circulating intensity seen by the monitor.
    pub outcoupling: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        Self { survival: 1.0, outcoupling: 1.0 }
    }
}

impl LossModel {
    pub fn new(survival: f64, outcoupling: f64) -> Result<Self> {
        for (name, value) in [("survival", survival), ("outcoupling", outcoupling)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in (0, 1], got {value}"
                )));
            }
        }
        Ok(Self { survival, outcoupling })
    }
}

/// Intensity tables after each roundtrip of the decoupled walk, scaled by
/// the loss model. Index 0 is the initial state.
pub fn evolution_record(
    setting: Setting,
    roundtrips: u32,
    loss: &LossModel,
) -> Result<Vec<IntensityTable>> {
    if roundtrips > 64 {
        return Err(Error::InvalidArgument(format!(
            "evolution record capped at 64 roundtrips, got {roundtrips}"
        )));
    }
    let schedule = CoinSchedule::setting(setting);
    let mut state = WalkerState::delta(0, Polarization::H);
    let mut record = Vec::with_capacity(roundtrips as usize + 1);
    record.push(IntensityTable::from_state(&state).scaled(loss.outcoupling));
    for r in 1..=roundtrips {
        state = crate::lattice::advance_roundtrip(&state, &schedule);
        let scale = loss.survival.powi(r as i32) * loss.outcoupling;
        record.push(IntensityTable::from_state(&state).scaled(scale));
    }
    Ok(record)
}
