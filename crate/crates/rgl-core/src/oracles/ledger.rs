//! Numeric ledgers for the online-creation lower bounds and the two-color
//! adaptive strategy: the halving recursion over susceptibility budgets and
//! the round counts at which each color class goes giant.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::{golden_max, golden_min};

/// The susceptibility budget recursion `L_0 = 1`,
/// `L_{i+1} = (1 + L_i / gamma) / 2`, and the edge budget it certifies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundLedger {
    pub gamma: f64,
    /// `L_0 ..= L_t` for `t = log2 r`.
    pub l_sequence: Vec<f64>,
    /// Coefficient of `n`: `(1 - gamma)/2 * sum of 1/L_i` over `i < t`.
    pub edge_budget: f64,
}

/// Builds the ledger for `r` colors, `r` a power of two, `gamma` in
/// `(1/2, 1)`. Below `1/2` the recursion diverges.
pub fn lower_bound_general(r: u64, gamma: f64) -> Result<LowerBoundLedger> {
    if r < 2 || !r.is_power_of_two() {
        return Err(Error::OutOfRange(format!(
            "color count {r} must be a power of two at least 2"
        )));
    }
    if gamma <= 0.5 || gamma >= 1.0 {
        return Err(Error::GammaRange {
            value: gamma,
            interval: "(1/2, 1)",
        });
    }
    let t = r.ilog2() as usize;
    let mut l_sequence = Vec::with_capacity(t + 1);
    let mut l = 1.0f64;
    l_sequence.push(l);
    let limit = 1.0 / (1.0 - 1.0 / (2.0 * gamma));
    for _ in 0..t {
        l = 0.5 * (1.0 + l / gamma);
        debug_assert!(l < limit);
        l_sequence.push(l);
    }
    let edge_budget = (1.0 - gamma) / 2.0
        * l_sequence[..t].iter().map(|l| 1.0 / l).sum::<f64>();
    Ok(LowerBoundLedger {
        gamma,
        l_sequence,
        edge_budget,
    })
}

/// Maximizes the per-doubling objective `(1 - gamma)(1 - 1/(2 gamma))`;
/// returns `(gamma*, objective)`.
pub fn optimize_gamma_general() -> (f64, f64) {
    let objective = |g: f64| (1.0 - g) * (1.0 - 1.0 / (2.0 * g));
    let g = golden_max(objective, 0.5 + 1e-9, 1.0 - 1e-9, 1e-10);
    (g, objective(g))
}

/// Two-color lower bound as a coefficient of `n`:
/// `[(1 - gamma) + 2 gamma / (gamma + 1)] / 2` for `gamma` in `(0, 1)`.
pub fn lower_bound_two_colors(gamma: f64) -> Result<f64> {
    if gamma <= 0.0 || gamma > 1.0 {
        return Err(Error::GammaRange {
            value: gamma,
            interval: "(0, 1]",
        });
    }
    Ok(0.5 * ((1.0 - gamma) + 2.0 * gamma / (gamma + 1.0)))
}

/// Maximizes [`lower_bound_two_colors`]; returns `(gamma*, coefficient)`.
pub fn optimize_gamma_two_colors() -> (f64, f64) {
    let objective = |g: f64| lower_bound_two_colors(g).unwrap();
    let g = golden_max(objective, 1e-9, 1.0 - 1e-9, 1e-10);
    (g, objective(g))
}

/// Round budgets of the adaptive two-phase creation strategy with switch
/// coefficient `t`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdaptiveThresholds {
    /// Fraction of vertices touched by a red edge at the switch:
    /// `1 - e^{-2t}`.
    pub alpha: f64,
    /// Rounds (in units of n) until the red class goes giant.
    pub red_rounds: f64,
    /// Rounds (in units of n) until the blue class goes giant.
    pub blue_rounds: f64,
}

/// Evaluates the adaptive strategy's two thresholds at switch time `t`,
/// `0 < t < 1/2`.
pub fn adaptive_thresholds(t: f64) -> Result<AdaptiveThresholds> {
    if t <= 0.0 || t >= 0.5 {
        return Err(Error::OutOfRange(format!(
            "switch coefficient t = {t} outside (0, 1/2)"
        )));
    }
    let alpha = 1.0 - (-2.0 * t).exp();
    let red_rounds = t + 0.5 / (1.0 / (1.0 - 2.0 * t) - (-2.0 * t).exp());
    let blue_rounds =
        t + 1.0 / (1.0 - alpha + (1.0 + 2.0 * alpha - 3.0 * alpha * alpha).sqrt());
    Ok(AdaptiveThresholds {
        alpha,
        red_rounds,
        blue_rounds,
    })
}

/// Minimizes `max(red_rounds, blue_rounds)` over the switch coefficient;
/// returns the optimal `t` and its thresholds.
pub fn optimize_adaptive() -> (f64, AdaptiveThresholds) {
    let worst = |t: f64| {
        let a = adaptive_thresholds(t).unwrap();
        a.red_rounds.max(a.blue_rounds)
    };
    let t = golden_min(worst, 1e-6, 0.5 - 1e-6, 1e-10);
    (t, adaptive_thresholds(t).unwrap())
}
