//! Pure analytical computations: closed-form susceptibility evolution, the
//! matching curves and their ODE, spectral thresholds for block kernels,
//! projective-plane construction, and the creation lower-bound ledgers.
//!
//! Everything here works in scaled time `t = rounds / n`; no vertex count
//! appears. All functions are pure and reentrant.

mod ledger;
mod ode;
mod plane;
mod spectral;

pub use ledger::{
    adaptive_thresholds, lower_bound_general, lower_bound_two_colors, optimize_adaptive,
    optimize_gamma_general, optimize_gamma_two_colors, AdaptiveThresholds, LowerBoundLedger,
};
pub use ode::{checkpoint_sequence, integrate_x, OdeSolution, BLOW_UP_THRESHOLD};
pub use plane::{build_projective_plane, is_prime, ProjectivePlane};
pub use spectral::{block_eigen_closed_form, kpartite_threshold, BlockEigen, KernelMatrix};

use crate::{Error, Result};

/// Susceptibility after `t·n` random edge additions starting from
/// susceptibility `L`, in scaled time: `(1/L - 2t)^{-1}`. Blows up at
/// `t = 1/(2L)`.
pub fn phi(t: f64, l: f64) -> Result<f64> {
    if l <= 0.0 {
        return Err(Error::OutOfRange(format!("initial susceptibility {l} must be positive")));
    }
    let blow_up = 1.0 / (2.0 * l);
    if t >= blow_up {
        return Err(Error::OutOfRange(format!(
            "phi blows up at t = {blow_up}; got t = {t}"
        )));
    }
    Ok(1.0 / (1.0 / l - 2.0 * t))
}

/// The two-color matching curves at scaled time `t`: the isolated-vertex
/// fraction `e^{-2t}` and the per-color matching fraction `t e^{-4t}`.
pub fn matching_curves(t: f64) -> (f64, f64) {
    debug_assert!(t >= 0.0);
    ((-2.0 * t).exp(), t * (-4.0 * t).exp())
}

/// Golden-section minimizer for unimodal objectives. Brackets shrink to
/// `tol`; returns the midpoint of the final bracket.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Golden-section maximizer.
pub fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    golden_min(|x| -f(x), a, b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_closed_form() {
        assert_eq!(phi(0.0, 1.0).unwrap(), 1.0);
        assert!((phi(0.25, 1.0).unwrap() - 2.0).abs() < 1e-15);
        // t = (1 - gamma) / (2L) gives L / gamma
        let (l, gamma) = (1.0, 0.5);
        let t = (1.0 - gamma) / (2.0 * l);
        assert!((phi(t, l).unwrap() - l / gamma).abs() < 1e-12);
        let (l, gamma) = (3.0, 0.7);
        let t = (1.0 - gamma) / (2.0 * l);
        assert!((phi(t, l).unwrap() - l / gamma).abs() < 1e-12);
    }

    #[test]
    fn phi_signals_blow_up() {
        assert!(phi(0.5, 1.0).is_err());
        assert!(phi(0.6, 1.0).is_err());
        assert!(phi(-1.0, 2.0).is_ok());
    }

    #[test]
    fn phi_matches_rk4_of_its_ode() {
        // phi' = 2 phi^2 in scaled time
        let h = 1e-4;
        let mut x = 1.0f64;
        let mut t = 0.0f64;
        while t < 0.4 - h / 2.0 {
            x = super::ode::rk4_step(|_, x| 2.0 * x * x, t, x, h);
            t += h;
            let exact = phi(t, 1.0).unwrap();
            assert!((x - exact).abs() < 1e-8, "t = {t}: {x} vs {exact}");
        }
    }

    #[test]
    fn matching_curve_values() {
        let (i, b) = matching_curves(0.0);
        assert_eq!((i, b), (1.0, 0.0));
        let (i, b) = matching_curves(0.25);
        assert!((i - 0.606_530_659_712_633_4).abs() < 1e-12);
        assert!((b - 0.25 * (-1.0f64).exp()).abs() < 1e-12);
        assert!((b - 0.091_969_860_292_860_58).abs() < 1e-12);
    }

    #[test]
    fn matching_curve_satisfies_its_ode() {
        // db/dt = e^{-4t} - 4b, checked by central finite differences
        let t = 0.5;
        let h = 1e-5;
        let (_, b_plus) = matching_curves(t + h);
        let (_, b_minus) = matching_curves(t - h);
        let derivative = (b_plus - b_minus) / (2.0 * h);
        let (_, b) = matching_curves(t);
        let rhs = (-4.0f64 * t).exp() - 4.0 * b;
        assert!((derivative - rhs).abs() < 1e-8);
    }

    #[test]
    fn golden_section_finds_quadratic_minimum() {
        let x = golden_min(|x| (x - 1.3).powi(2), -4.0, 5.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-8);
        let x = golden_max(|x| -(x + 0.4).powi(2), -3.0, 2.0, 1e-10);
        assert!((x + 0.4).abs() < 1e-8);
    }
}
