//! Fixed-step RK4 integration of the two-color avoidance ODE
//! `x' = x^2 + 3 b(t)^2 - 2 b(t) x` with `b(t) = t e^{-4t}`, including
//! blow-up localization and the checkpoint sequence built on `x`.

use crate::{Error, Result};

/// Escape threshold: `x' ~ x^2` makes growth past this super-exponential,
/// so the detected time is insensitive to the exact value.
pub const BLOW_UP_THRESHOLD: f64 = 1e6;

/// Width to which the blow-up time is localized by step halving.
const BLOW_UP_RESOLUTION: f64 = 1e-4;

/// One classical Runge-Kutta step for `x' = f(t, x)`.
pub(crate) fn rk4_step(f: impl Fn(f64, f64) -> f64, t: f64, x: f64, h: f64) -> f64 {
    let k1 = f(t, x);
    let k2 = f(t + h / 2.0, x + h / 2.0 * k1);
    let k3 = f(t + h / 2.0, x + h / 2.0 * k2);
    let k4 = f(t + h, x + h * k3);
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

#[inline]
fn x_rhs(t: f64, x: f64) -> f64 {
    let b = t * (-4.0 * t).exp();
    x * x + 3.0 * b * b - 2.0 * b * x
}

/// A fixed-step solution with all grid values finite; when the solution
/// escapes before `t_max`, `blow_up_time` localizes the escape to within
/// `1e-4` and lies beyond the last grid point.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub blow_up_time: Option<f64>,
    pub step: f64,
}

impl OdeSolution {
    /// Linear interpolation on the stored grid.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let last = *self.grid.last()?;
        if t < 0.0 || t > last {
            return None;
        }
        let pos = t / self.step;
        let i = pos.floor() as usize;
        if i + 1 >= self.grid.len() {
            return self.values.last().copied();
        }
        let frac = pos - i as f64;
        Some(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac)
    }
}

/// Integrates `x' = x^2 + 3b^2 - 2bx`, `x(0) = 1`, up to `t_max` or blow-up.
pub fn integrate_x(t_max: f64, step: f64) -> Result<OdeSolution> {
    if step <= 0.0 || t_max < 0.0 {
        return Err(Error::OutOfRange(format!(
            "integration wants t_max >= 0 and step > 0, got ({t_max}, {step})"
        )));
    }
    let mut grid = vec![0.0];
    let mut values = vec![1.0];
    let mut x = 1.0f64;
    let mut blow_up_time = None;
    // grid times are exact multiples of the step so lookups do not drift
    let steps = (t_max / step).ceil() as u64;
    for i in 1..=steps {
        let t_prev = (i - 1) as f64 * step;
        let next = rk4_step(x_rhs, t_prev, x, step);
        if !next.is_finite() || next > BLOW_UP_THRESHOLD {
            blow_up_time = Some(localize_blow_up(t_prev, x, step));
            break;
        }
        x = next;
        grid.push(i as f64 * step);
        values.push(x);
    }
    Ok(OdeSolution {
        grid,
        values,
        blow_up_time,
        step,
    })
}

/// The escape lies in `(t0, t0 + h]`; halve the step, advancing `t0` when a
/// half-step stays below threshold, until the bracket is narrow.
fn localize_blow_up(mut t0: f64, mut x0: f64, mut h: f64) -> f64 {
    while h > BLOW_UP_RESOLUTION {
        h /= 2.0;
        let probe = rk4_step(x_rhs, t0, x0, h);
        if probe.is_finite() && probe <= BLOW_UP_THRESHOLD {
            t0 += h;
            x0 = probe;
        }
    }
    t0 + h / 2.0
}

/// The 20-term checkpoint sequence `t_0 = 0`, `t_{i+1} = t_i + 1/(4 x(t_i))`.
pub fn checkpoint_sequence() -> Vec<f64> {
    let mut ts = Vec::with_capacity(20);
    let mut t = 0.0f64;
    let mut x = 1.0f64;
    ts.push(t);
    for _ in 0..19 {
        let target = t + 1.0 / (4.0 * x);
        // advance x from t to the next checkpoint
        let span = target - t;
        let steps = (span / 1e-5).ceil().max(1.0) as u64;
        let h = span / steps as f64;
        for _ in 0..steps {
            x = rk4_step(x_rhs, t, x, h);
            t += h;
        }
        t = target;
        ts.push(t);
    }
    ts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_condition_and_monotone_growth() {
        let sol = integrate_x(0.5, 1e-3).unwrap();
        assert_eq!(sol.values[0], 1.0);
        assert!(sol.blow_up_time.is_none());
        // x' = (x - b)^2 + 2b^2 >= 0
        for w in sol.values.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn blow_up_location_and_bound_before_it() {
        let sol = integrate_x(1.2, 1e-4).unwrap();
        let blow = sol.blow_up_time.expect("x must escape before t = 1.2");
        assert!(
            (1.055..=1.075).contains(&blow),
            "blow-up at {blow}, outside [1.055, 1.075]"
        );
        assert!(blow > *sol.grid.last().unwrap());
        let x106 = sol.value_at(1.06).expect("1.06 precedes blow-up");
        assert!(x106 <= 209.0, "x(1.06) = {x106}");
    }

    #[test]
    fn rk4_order_check_step_halving() {
        // compare h and h/2 while the solution is still O(1); toward the
        // blow-up the local truncation constant grows like a power of x and
        // no fixed step keeps the asymptotic bound
        let h = 0.01;
        let coarse = integrate_x(1.0, h).unwrap();
        let fine = integrate_x(1.0, h / 2.0).unwrap();
        let tol = 10.0 * h.powi(4);
        let mut checked = 0;
        for (i, (&t, &xc)) in coarse.grid.iter().zip(coarse.values.iter()).enumerate() {
            if xc > 3.0 {
                break;
            }
            let xf = fine.values[2 * i];
            assert!(
                (xc - xf).abs() < tol,
                "t = {t}: |{xc} - {xf}| >= {tol}"
            );
            checked += 1;
        }
        assert!(checked > 50, "order check covered only {checked} grid points");
    }

    #[test]
    fn checkpoints_reach_past_1_06() {
        let ts = checkpoint_sequence();
        assert_eq!(ts.len(), 20);
        assert_eq!(ts[0], 0.0);
        assert!((ts[1] - 0.25).abs() < 1e-9, "t1 = {}", ts[1]);
        assert!(ts[19] > 1.06, "t19 = {}", ts[19]);
        // strictly increasing with shrinking increments
        for w in ts.windows(3) {
            assert!(w[1] > w[0]);
            assert!(w[2] - w[1] < w[1] - w[0]);
        }
    }
}
