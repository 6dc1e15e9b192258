//! Closed-form boundary eigenfunctions of the decoupled walk.
//!
//! For both standard settings the normalizable eigenfunction on the right
//! half-chain has chirality -1 and decays geometrically per even site with
//! rate `μ = (1 + χ sinθ2) / (λ cosθ2) = 1 - √2`. The eigenvalue is fixed
//! by the decoupling sign: `λ = -1` for setting A, `λ = +1` for setting B.
//! The amplitudes on physical sites `2x` are
//! `c μ^x (i cosθ2, 1 - sinθ2)` with `c = ((1+√2)(1-sinθ2))^{-1/2}`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{walk_step, CoinSchedule, Pos, Setting, Spinor, WalkerState};
use crate::topology::ChiralOperator;

/// Analytic description of one boundary eigenstate.
#[derive(Clone, Copy, Debug)]
pub struct EdgeStateSpec {
    pub setting: Setting,
    pub eigenvalue: f64,
    pub chirality: f64,
    /// Signed amplitude ratio between consecutive even sites.
    pub decay: f64,
    pub boundary_amplitude: f64,
    pub normalization: f64,
    /// Un-normalized spinor direction shared by every site.
    pub spinor: Spinor,
}

/// Decay rate `μ(λ, χ) = (1 + χ sinθ2) / (λ cosθ2)`.
///
/// Only `|μ| < 1` solutions are normalizable on the half-chain.
pub fn decay_rate(lambda: f64, chi: f64, theta2: f64) -> Result<f64> {
    assert!(lambda == 1.0 || lambda == -1.0, "lambda must be +1 or -1");
    assert!(chi == 1.0 || chi == -1.0, "chi must be +1 or -1");
    if !theta2.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite theta2: {theta2}")));
    }
    let cos = theta2.cos();
    if cos.abs() <= 1e-12 {
        return Err(Error::SingularCoin(cos.abs()));
    }
    Ok((1.0 + chi * theta2.sin()) / (lambda * cos))
}

/// Un-normalized eigenvector of `γ0` with chirality `χ`:
/// `(i cosθ2, -(sinθ2 + χ))`.
pub fn chiral_eigenvector(theta2: f64, chi: f64) -> Result<Spinor> {
    assert!(chi == 1.0 || chi == -1.0, "chi must be +1 or -1");
    if !theta2.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite theta2: {theta2}")));
    }
    let spinor = Spinor::new(
        C64::new(0.0, theta2.cos()),
        C64::new(-(theta2.sin() + chi), 0.0),
    );
    if spinor.norm_sqr().sqrt() <= 1e-14 {
        return Err(Error::ZeroEigenvector { theta2, chi });
    }
    Ok(spinor)
}

/// The normalized boundary eigenstate of a setting, truncated after
/// `cutoff` even sites. The truncation must be far below every tolerance
/// in use, which `cutoff >= 40` guarantees.
pub fn edge_state(setting: Setting, cutoff: usize) -> Result<(EdgeStateSpec, WalkerState)> {
    let theta2 = setting.theta2();
    let lambda = setting.eigenvalue();
    let chi = -1.0;
    let mu = decay_rate(lambda, chi, theta2)?;
    if mu.abs().powi(cutoff as i32) >= 1e-14 {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff} leaves a truncation tail above 1e-14"
        )));
    }
    let direction = chiral_eigenvector(theta2, chi)?;
    let normalization = ((1.0 + std::f64::consts::SQRT_2) * (1.0 - theta2.sin())).powf(-0.5);

    let mut sites = Vec::with_capacity(cutoff + 1);
    let mut weight = normalization;
    for x in 0..=cutoff {
        sites.push((2 * x as Pos, direction.scale(C64::new(weight, 0.0))));
        weight *= mu;
    }
    let state = WalkerState::from_amplitudes(sites);
    debug_assert!((state.norm2() - 1.0).abs() < 1e-12);

    let spec = EdgeStateSpec {
        setting,
        eigenvalue: lambda,
        chirality: chi,
        decay: mu,
        boundary_amplitude: 1.0,
        normalization,
        spinor: direction,
    };
    Ok((spec, state))
}

/// Apply one walk step of the setting's decoupled schedule to the analytic
/// eigenstate and return `‖Wφ - λφ‖`.
pub fn verify_eigen(setting: Setting, cutoff: usize) -> Result<f64> {
    let (spec, state) = edge_state(setting, cutoff)?;
    let schedule = CoinSchedule::setting(setting);
    let evolved = walk_step(&state, &schedule);
    let expected = state.scaled(C64::new(spec.eigenvalue, 0.0));
    Ok(evolved.distance(&expected))
}

/// Apply the cell-wise chiral operator to a state.
pub fn apply_chiral(state: &WalkerState, theta2: f64) -> WalkerState {
    let gamma = ChiralOperator::new(theta2).matrix;
    WalkerState::from_amplitudes(state.iter().map(|(x, sp)| {
        let out = gamma.mul_vec([sp.h, sp.v]);
        (*x, Spinor::new(out[0], out[1]))
    }))
}
