//! Momentum-space analysis of the translation-invariant bulk.
//!
//! On the even sub-lattice the two-layer walk acts as
//! `W(k) = S↓(k) C(θ1) S↑(k) C(θ2)` with `S↑(k) = diag(e^{-ik}, 1)` and
//! `S↓(k) = diag(1, e^{+ik})`. The walk has a chiral symmetry
//! `γ W γ† = W†` with a cell-wise unitary `γ0` depending on `θ2`, and its
//! topological index is the winding number of a scalar function `c(k)`
//! around the origin. The momentum-space shift sign is pinned so that both
//! standard settings carry index -1.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::coin_matrix;
use crate::mat2::Mat2;

/// Gap tolerance: a bulk with `min_k |c(k)|` at or below this value is
/// treated as gap-closed and carries no winding number.
pub const GAP_TOLERANCE: f64 = 1e-9;

/// Rounding residual above which the winding sum is reported as
/// unconverged instead of being forced to an integer.
pub const WINDING_RESIDUAL_TOLERANCE: f64 = 1e-6;

/// The cell-wise chiral symmetry operator for a given `θ2`.
#[derive(Clone, Copy, Debug)]
pub struct ChiralOperator {
    pub theta2: f64,
    pub matrix: Mat2,
}

impl ChiralOperator {
    pub fn new(theta2: f64) -> Self {
        let (sin, cos) = theta2.sin_cos();
        let matrix = Mat2::new(
            C64::new(-sin, 0.0),
            C64::new(0.0, -cos),
            C64::new(0.0, cos),
            C64::new(sin, 0.0),
        );
        Self { theta2, matrix }
    }
}

/// Gap and index data for one point of the coin-parameter plane.
#[derive(Clone, Copy, Debug)]
pub struct SymmetryIndexReport {
    pub theta1: f64,
    pub theta2: f64,
    /// Winding number; `None` when the cell is gap-closed (or, in
    /// principle, when the winding sum failed to converge).
    pub winding: Option<i32>,
    pub gap_plus1: f64,
    pub gap_minus1: f64,
    pub gapped: bool,
}

/// Rectangular sweep of the coin-parameter plane.
#[derive(Clone, Copy, Debug)]
pub struct PhaseDiagramGrid {
    pub theta1_range: (f64, f64),
    pub theta2_range: (f64, f64),
    /// Points per axis, endpoints included.
    pub resolution: usize,
    /// Momentum samples per cell for gaps and winding.
    pub k_samples: usize,
}

/// The momentum-space walk matrix `S↓(k) C(θ1) S↑(k) C(θ2)`.
pub fn bloch_matrix(theta1: f64, theta2: f64, k: f64) -> Mat2 {
    debug_assert!(theta1.is_finite() && theta2.is_finite() && k.is_finite());
    let c1 = coin_matrix(theta1).expect("finite angle");
    let c2 = coin_matrix(theta2).expect("finite angle");
    let s_up = Mat2::diag(C64::from_polar(1.0, -k), C64::new(1.0, 0.0));
    let s_down = Mat2::diag(C64::new(1.0, 0.0), C64::from_polar(1.0, k));
    s_down.mul(&c1).mul(&s_up).mul(&c2)
}

/// `cos ω(k)` for the two-band dispersion, from the matrix trace.
pub fn dispersion_cos(theta1: f64, theta2: f64, k: f64) -> f64 {
    0.5 * bloch_matrix(theta1, theta2, k).trace().re
}

/// Max over sampled momenta of `‖γ0 W(k) γ0† - W(k)†‖_F`.
///
/// The relation holds pointwise in `k` because `γ` acts cell-wise.
pub fn check_chiral_symmetry(theta1: f64, theta2: f64, k_samples: usize) -> f64 {
    assert!(k_samples >= 2, "need at least two momentum samples");
    let gamma = ChiralOperator::new(theta2).matrix;
    let gamma_adj = gamma.adjoint();
    (0..k_samples)
        .map(|j| {
            let k = 2.0 * std::f64::consts::PI * (j as f64) / (k_samples as f64);
            let w = bloch_matrix(theta1, theta2, k);
            gamma.mul(&w).mul(&gamma_adj).sub(&w.adjoint()).frobenius_norm()
        })
        .fold(0.0, f64::max)
}

/// The off-diagonal block of the walk in the chiral eigenbasis, as a
/// closed-form scalar function of momentum:
/// `c(k) = sin(θ1)cos(θ2) + cos(θ1)sin(θ2)cos(k) - i cos(θ1)sin(k)`.
pub fn chiral_determinant(theta1: f64, theta2: f64, k: f64) -> C64 {
    debug_assert!(theta1.is_finite() && theta2.is_finite() && k.is_finite());
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    C64::new(s1 * c2 + c1 * s2 * k.cos(), -c1 * k.sin())
}

/// Same quantity extracted numerically from `W(k)` by the two-stage basis
/// change that first maps `γ0` to `σ_y` (conjugation by `C(θ2/2)`) and then
/// `σ_y` to `σ_z`. Cross-checks the closed formula.
pub fn chiral_block_determinant(theta1: f64, theta2: f64, k: f64) -> C64 {
    let w = bloch_matrix(theta1, theta2, k);
    let v = coin_matrix(0.5 * theta2).expect("finite angle");
    let w_sigma_y = v.mul(&w).mul(&v.adjoint());
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    // Rows are the bras of the sigma_y eigenvectors, eigenvalue -1 first.
    let r = Mat2::new(
        C64::new(inv_sqrt2, 0.0),
        C64::new(0.0, inv_sqrt2),
        C64::new(inv_sqrt2, 0.0),
        C64::new(0.0, -inv_sqrt2),
    );
    r.mul(&w_sigma_y).mul(&r.adjoint()).e[0][1]
}

fn winding_from_samples(theta1: f64, theta2: f64, k_samples: usize) -> Result<(i32, f64, f64)> {
    let n = k_samples;
    let mut min_abs = f64::INFINITY;
    let mut total_arg = 0.0;
    let mut prev = chiral_determinant(theta1, theta2, 0.0);
    min_abs = min_abs.min(prev.norm());
    for j in 1..=n {
        let k = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
        let cur = chiral_determinant(theta1, theta2, k);
        if j < n {
            min_abs = min_abs.min(cur.norm());
        }
        total_arg += (cur / prev).arg();
        prev = cur;
    }
    if min_abs <= GAP_TOLERANCE {
        return Err(Error::GapClosed(min_abs));
    }
    let raw = total_arg / (2.0 * std::f64::consts::PI);
    let rounded = raw.round();
    let residual = (raw - rounded).abs();
    if residual >= WINDING_RESIDUAL_TOLERANCE {
        return Err(Error::NonConvergence(residual));
    }
    Ok((rounded as i32, residual, min_abs))
}

/// Winding number of `c(k)` as `k` traverses `[0, 2π)`, by argument
/// unwrapping on a uniform grid.
pub fn winding_number(theta1: f64, theta2: f64, k_samples: usize) -> Result<i32> {
    assert!(k_samples >= 64, "winding needs k_samples >= 64");
    winding_from_samples(theta1, theta2, k_samples).map(|(w, _, _)| w)
}

/// Band gaps at the spectral points `+1` and `-1`, as minimal angular
/// distances of the sampled dispersion to `0` and `π`.
pub fn band_gaps(theta1: f64, theta2: f64, k_samples: usize) -> (f64, f64) {
    assert!(k_samples >= 2);
    let mut gap_plus = f64::INFINITY;
    let mut gap_minus = f64::INFINITY;
    for j in 0..k_samples {
        let k = 2.0 * std::f64::consts::PI * (j as f64) / (k_samples as f64);
        let omega = dispersion_cos(theta1, theta2, k).clamp(-1.0, 1.0).acos();
        gap_plus = gap_plus.min(omega);
        gap_minus = gap_minus.min(std::f64::consts::PI - omega);
    }
    (gap_plus, gap_minus)
}

/// Evaluate one cell of the parameter plane.
pub fn symmetry_index_report(theta1: f64, theta2: f64, k_samples: usize) -> SymmetryIndexReport {
    let samples = k_samples.max(64);
    let (gap_plus1, gap_minus1) = band_gaps(theta1, theta2, samples);
    match winding_from_samples(theta1, theta2, samples) {
        Ok((winding, _, _)) => SymmetryIndexReport {
            theta1,
            theta2,
            winding: Some(winding),
            gap_plus1,
            gap_minus1,
            gapped: true,
        },
        Err(Error::GapClosed(_)) => SymmetryIndexReport {
            theta1,
            theta2,
            winding: None,
            gap_plus1,
            gap_minus1,
            gapped: false,
        },
        Err(_) => SymmetryIndexReport {
            theta1,
            theta2,
            winding: None,
            gap_plus1,
            gap_minus1,
            gapped: true,
        },
    }
}

/// Rasterize the phase diagram. Cells are independent and evaluated in
/// parallel; output order is row-major over (θ1, θ2).
pub fn phase_diagram(grid: &PhaseDiagramGrid) -> Vec<SymmetryIndexReport> {
    assert!(grid.resolution >= 2, "need at least 2 points per axis");
    let n = grid.resolution;
    let lerp = |range: (f64, f64), i: usize| {
        range.0 + (range.1 - range.0) * (i as f64) / ((n - 1) as f64)
    };
    let cells: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| {
            let theta1 = lerp(grid.theta1_range, i);
            (0..n).map(move |j| (theta1, lerp(grid.theta2_range, j)))
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(theta1, theta2)| symmetry_index_report(theta1, theta2, grid.k_samples))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn bloch_matrix_reduces_to_pure_shift() {
        for k in [0.0, 0.7, -2.1, PI] {
            let w = bloch_matrix(0.0, 0.0, k);
            let expect = Mat2::diag(C64::from_polar(1.0, -k), C64::from_polar(1.0, k));
            assert!(w.sub(&expect).frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn bloch_matrix_at_zero_momentum_is_the_coin() {
        let w = bloch_matrix(0.0, FRAC_PI_4, 0.0);
        let c2 = coin_matrix(FRAC_PI_4).unwrap();
        assert!(w.sub(&c2).frobenius_norm() < 1e-14);
    }

    #[test]
    fn bloch_eigenvalues_on_unit_circle_with_symmetric_pair() {
        let w = bloch_matrix(0.0, FRAC_PI_4, FRAC_PI_2);
        let [l1, l2] = w.eigenvalues();
        assert!((l1.norm() - 1.0).abs() < 1e-13);
        assert!((l2.norm() - 1.0).abs() < 1e-13);
        // cos(omega) = 0 here, so the pair is {+i, -i}.
        assert!(l1.re.abs() < 1e-12);
        assert!(l2.re.abs() < 1e-12);
        assert!((l1 - l2.conj()).norm() < 1e-12);
    }

    #[test]
    fn dispersion_matches_closed_product_formula() {
        let mut h = 7u64;
        for _ in 0..200 {
            h = crate::rng::splitmix64(h);
            let t1 = PI * crate::rng::symmetric_unit(h);
            h = crate::rng::splitmix64(h);
            let t2 = PI * crate::rng::symmetric_unit(h);
            h = crate::rng::splitmix64(h);
            let k = PI * crate::rng::symmetric_unit(h);
            let direct = t1.cos() * t2.cos() * k.cos() - t1.sin() * t2.sin();
            assert!((dispersion_cos(t1, t2, k) - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn bloch_matrix_unitarity_for_random_triples() {
        let mut h = 11u64;
        for _ in 0..1000 {
            h = crate::rng::splitmix64(h);
            let t1 = PI * crate::rng::symmetric_unit(h);
            h = crate::rng::splitmix64(h);
            let t2 = PI * crate::rng::symmetric_unit(h);
            h = crate::rng::splitmix64(h);
            let k = PI * crate::rng::symmetric_unit(h);
            assert!(bloch_matrix(t1, t2, k).unitarity_residual() <= 1e-13);
        }
    }

    #[test]
    fn chiral_operator_squares_to_identity_and_is_hermitian() {
        for theta2 in [0.0, FRAC_PI_4, 3.0 * FRAC_PI_4, -1.1] {
            let g = ChiralOperator::new(theta2).matrix;
            assert!(g.mul(&g).sub(&Mat2::identity()).frobenius_norm() < 1e-14);
            assert!(g.sub(&g.adjoint()).frobenius_norm() < 1e-14);
            assert!(g.unitarity_residual() < 1e-14);
        }
    }

    #[test]
    fn chiral_symmetry_residuals_are_tiny() {
        assert!(check_chiral_symmetry(0.0, FRAC_PI_4, 64) <= 1e-12);
        assert!(check_chiral_symmetry(PI / 3.0, 3.0 * FRAC_PI_4, 64) <= 1e-12);
    }

    #[test]
    fn chiral_basis_change_maps_gamma_to_sigma_y() {
        for theta2 in [FRAC_PI_4, 3.0 * FRAC_PI_4, 0.4] {
            let g = ChiralOperator::new(theta2).matrix;
            let v = coin_matrix(0.5 * theta2).unwrap();
            let sigma_y = Mat2::new(
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            );
            assert!(v.mul(&g).mul(&v.adjoint()).sub(&sigma_y).frobenius_norm() < 1e-13);
        }
    }

    #[test]
    #[allow(clippy::approx_constant)] // five-digit frozen reference values
    fn chiral_determinant_reference_values() {
        let c0 = chiral_determinant(0.0, FRAC_PI_4, 0.0);
        assert!((c0.re - 0.70711).abs() < 1e-5);
        assert!(c0.im.abs() < 1e-14);

        // cos(theta1) = 0 kills the k dependence.
        for k in [0.0, 1.0, 2.5] {
            let c = chiral_determinant(FRAC_PI_2, 0.9, k);
            assert!((c - C64::new(0.9f64.cos(), 0.0)).norm() < 1e-14);
        }

        let c = chiral_determinant(0.0, 0.0, FRAC_PI_2);
        assert!((c - C64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn block_extraction_matches_closed_formula() {
        let mut h = 5u64;
        for _ in 0..300 {
            h = crate::rng::splitmix64(h);
            let t1 = PI * crate::rng::symmetric_unit(h);
            h = crate::rng::splitmix64(h);
            let t2 = PI * crate::rng::symmetric_unit(h);
            h = crate::rng::splitmix64(h);
            let k = PI * crate::rng::symmetric_unit(h);
            let closed = chiral_determinant(t1, t2, k);
            let block = chiral_block_determinant(t1, t2, k);
            assert!(
                (closed - block).norm() < 1e-12,
                "mismatch at ({t1}, {t2}, {k}): {closed} vs {block}"
            );
        }
    }

    #[test]
    fn modulus_of_block_equals_sine_of_dispersion() {
        let mut h = 13u64;
        for _ in 0..200 {
            h = crate::rng::splitmix64(h);
            let t1 = PI * crate::rng::symmetric_unit(h);
            h = crate::rng::splitmix64(h);
            let t2 = PI * crate::rng::symmetric_unit(h);
            h = crate::rng::splitmix64(h);
            let k = PI * crate::rng::symmetric_unit(h);
            let sin_omega = (1.0 - dispersion_cos(t1, t2, k).powi(2)).max(0.0).sqrt();
            assert!((chiral_determinant(t1, t2, k).norm() - sin_omega).abs() < 1e-12);
        }
    }

    #[test]
    fn winding_for_the_standard_settings_is_minus_one() {
        assert_eq!(winding_number(0.0, FRAC_PI_4, 64).unwrap(), -1);
        assert_eq!(winding_number(0.0, 3.0 * FRAC_PI_4, 64).unwrap(), -1);
    }

    #[test]
    fn winding_zero_for_constant_block() {
        assert_eq!(winding_number(FRAC_PI_2, FRAC_PI_4, 64).unwrap(), 0);
    }

    #[test]
    fn winding_plus_one_region_exists() {
        assert_eq!(winding_number(0.0, -FRAC_PI_4, 64).unwrap(), 1);
    }

    #[test]
    fn winding_errors_on_closed_gap() {
        assert!(matches!(winding_number(0.0, 0.0, 64), Err(Error::GapClosed(_))));
    }

    #[test]
    fn winding_stable_under_refinement() {
        for (t1, t2) in [(0.0, FRAC_PI_4), (0.0, 3.0 * FRAC_PI_4), (1.0, 2.0), (-0.3, -1.2)] {
            let coarse = winding_number(t1, t2, 64);
            let fine = winding_number(t1, t2, 4096);
            match (coarse, fine) {
                (Ok(a), Ok(b)) => assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                other => panic!("refinement changed gap status: {other:?}"),
            }
        }
    }

    #[test]
    fn spectrum_pairs_satisfy_the_chiral_constraint() {
        let mut h = 17u64;
        for _ in 0..200 {
            h = crate::rng::splitmix64(h);
            let t1 = PI * crate::rng::symmetric_unit(h);
            h = crate::rng::splitmix64(h);
            let t2 = PI * crate::rng::symmetric_unit(h);
            h = crate::rng::splitmix64(h);
            let k = PI * crate::rng::symmetric_unit(h);
            let [l1, l2] = bloch_matrix(t1, t2, k).eigenvalues();
            // det = 1, so the pair is {e^{i w}, e^{-i w}}.
            assert!((l1 * l2 - C64::new(1.0, 0.0)).norm() < 1e-12);
            assert!((l1 - l2.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_diagram_center_cell_and_gap_line() {
        let grid = PhaseDiagramGrid {
            theta1_range: (-0.3, 0.3),
            theta2_range: (FRAC_PI_4 - 0.3, FRAC_PI_4 + 0.3),
            resolution: 3,
            k_samples: 128,
        };
        let cells = phase_diagram(&grid);
        assert_eq!(cells.len(), 9);
        let center = &cells[4];
        assert!(center.theta1.abs() < 1e-12);
        assert!((center.theta2 - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(center.winding, Some(-1));
        assert!(center.gapped);
    }

    #[test]
    fn gap_closes_where_the_block_vanishes() {
        // theta2 = 0 line: c(k) vanishes only where sin(theta1) = 0.
        let closed = symmetry_index_report(0.0, 0.0, 256);
        assert!(!closed.gapped);
        assert!(closed.winding.is_none());
        assert!(closed.gap_plus1 < 1e-4);

        let open = symmetry_index_report(FRAC_PI_4, 0.0, 256);
        assert!(open.gapped);
        assert_eq!(open.winding, Some(0));

        // Diagonal boundary theta1 + theta2 = 0.
        let diag = symmetry_index_report(FRAC_PI_4, -FRAC_PI_4, 256);
        assert!(!diag.gapped);
    }

    #[test]
    fn gap_values_vary_continuously_along_a_fine_sweep() {
        let n = 256;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..n {
            let theta1 = -PI + 2.0 * PI * (i as f64) / ((n - 1) as f64);
            let (gp, gm) = band_gaps(theta1, FRAC_PI_4, 256);
            if let Some((pp, pm)) = prev {
                assert!((gp - pp).abs() < 0.1, "gap_plus1 jumped at {theta1}");
                assert!((gm - pm).abs() < 0.1, "gap_minus1 jumped at {theta1}");
            }
            prev = Some((gp, gm));
        }
    }
}
