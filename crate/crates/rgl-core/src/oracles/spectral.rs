//! Small dense symmetric kernel matrices and their spectral radii. The
//! giant-component criterion for a block kernel is a spectral radius of the
//! normalized matrix exceeding 1.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Symmetric `k x k` matrix of block intensities, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn new(k: usize, entries: Vec<f64>) -> Result<Self> {
        if k == 0 || entries.len() != k * k {
            return Err(Error::Config(format!(
                "kernel matrix wants k^2 entries, got {} for k = {k}",
                entries.len()
            )));
        }
        let m = KernelMatrix { k, entries };
        for i in 0..k {
            for j in 0..i {
                if m.entry(i, j) != m.entry(j, i) {
                    return Err(Error::Config(format!(
                        "kernel matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let mut entries = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::Config("kernel matrix rows must be square".into()));
            }
            entries.extend_from_slice(row);
        }
        KernelMatrix::new(k, entries)
    }

    /// The all-ones matrix `J_k`.
    pub fn ones(k: usize) -> Self {
        KernelMatrix {
            k,
            entries: vec![1.0; k * k],
        }
    }

    /// `J_k - I_k`.
    pub fn ones_minus_identity(k: usize) -> Self {
        let mut m = Self::ones(k);
        for i in 0..k {
            m.entries[i * k + i] = 0.0;
        }
        m
    }

    /// Ones on the top-left `t x t` block, zeros elsewhere.
    pub fn top_left_ones(k: usize, t: usize) -> Self {
        let mut entries = vec![0.0; k * k];
        for i in 0..t.min(k) {
            for j in 0..t.min(k) {
                entries[i * k + j] = 1.0;
            }
        }
        KernelMatrix { k, entries }
    }

    /// The complement `J_k - A` of a 0/1 matrix.
    pub fn complement(&self) -> Self {
        KernelMatrix {
            k: self.k,
            entries: self.entries.iter().map(|e| 1.0 - e).collect(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    pub fn scaled(&self, c: f64) -> Self {
        KernelMatrix {
            k: self.k,
            entries: self.entries.iter().map(|e| c * e).collect(),
        }
    }

    /// The normalization `A / k` whose spectral radius drives the giant
    /// criterion.
    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.k as f64)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.entries.chunks(self.k)) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Spectral radius by power iteration on `A^2`, which converges for
    /// dominant eigenvalues of either sign. Successive Rayleigh quotients
    /// within `1e-12` (relative) stop the iteration.
    pub fn spectral_radius(&self) -> f64 {
        let k = self.k;
        if self.entries.iter().all(|&e| e == 0.0) {
            return 0.0;
        }
        // deterministic start with varied signs-free entries so it is not
        // orthogonal to the dominant eigenspace of A^2 in practice
        let mut v: Vec<f64> = (0..k).map(|i| 1.0 + (i as f64 + 1.0).sqrt() * 0.25).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);

        let mut tmp = vec![0.0; k];
        let mut w = vec![0.0; k];
        let mut lambda_prev = f64::INFINITY;
        for _ in 0..500_000 {
            self.apply(&v, &mut tmp);
            self.apply(&tmp, &mut w);
            let lambda: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            v.iter_mut().zip(&w).for_each(|(x, y)| *x = y / norm);
            if (lambda - lambda_prev).abs() < 1e-12 * lambda.abs().max(1.0) {
                return lambda.max(0.0).sqrt();
            }
            lambda_prev = lambda;
        }
        lambda_prev.max(0.0).sqrt()
    }
}

/// Closed-form spectral radii of the top-left-ones split.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BlockEigen {
    /// Radius of the `t x t` ones block: exactly `t`.
    pub rho1: f64,
    /// Radius of the complement: `(k - t + sqrt(k^2 + 2kt - 3t^2)) / 2`.
    pub rho2: f64,
    /// Argmax of `min(rho1, rho2)` over `t`, found by golden section.
    pub optimal_t: f64,
}

/// Spectral radii of the pair `(A_1, A_2)` where `A_1` is ones on a
/// top-left `t x t` block and `A_2 = J_k - A_1`, for real `0 <= t <= k`.
pub fn block_eigen_closed_form(k: usize, t: f64) -> Result<BlockEigen> {
    let kf = k as f64;
    if !(0.0..=kf).contains(&t) {
        return Err(Error::OutOfRange(format!("t = {t} outside [0, {kf}]")));
    }
    let rho2 = |t: f64| 0.5 * (kf - t + (kf * kf + 2.0 * kf * t - 3.0 * t * t).sqrt());
    let optimal_t = super::golden_max(|t| t.min(rho2(t)), 0.0, kf, 1e-8);
    Ok(BlockEigen {
        rho1: t,
        rho2: rho2(t),
        optimal_t,
    })
}

/// Giant threshold for the `k`-partite model: `k / (k - 1)`.
pub fn kpartite_threshold(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::OutOfRange(format!("k-partite threshold needs k >= 2, got {k}")));
    }
    Ok(k as f64 / (k as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_normalized_radius_recovers_scalar() {
        for k in [1usize, 2, 3, 7, 20] {
            let c = 2.5;
            let m = KernelMatrix::ones(k).scaled(c).normalized();
            assert!((m.spectral_radius() - c).abs() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn ones_minus_identity_radius() {
        for k in 2..=50usize {
            let m = KernelMatrix::ones_minus_identity(k);
            let expect = (k as f64 - 1.0).max(1.0);
            assert!(
                (m.spectral_radius() - expect).abs() < 1e-9,
                "k = {k}: {} vs {expect}",
                m.spectral_radius()
            );
        }
    }

    #[test]
    fn zero_matrix_radius_is_zero() {
        let m = KernelMatrix::new(3, vec![0.0; 9]).unwrap();
        assert_eq!(m.spectral_radius(), 0.0);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        assert!(KernelMatrix::new(2, vec![0.0, 1.0, 0.5, 0.0]).is_err());
    }

    #[test]
    fn block_pair_closed_form_and_power_iteration_agree() {
        // the 3x3 split with t = 2 gives both radii equal to 2
        let eig = block_eigen_closed_form(3, 2.0).unwrap();
        assert!((eig.rho1 - 2.0).abs() < 1e-12);
        assert!((eig.rho2 - 2.0).abs() < 1e-12);
        assert!((eig.optimal_t - 2.0).abs() < 1e-6);

        let a1 = KernelMatrix::top_left_ones(3, 2);
        let a2 = a1.complement();
        assert!((a1.spectral_radius() - 2.0).abs() < 1e-9);
        assert!((a2.spectral_radius() - 2.0).abs() < 1e-9);

        // t = 0 degenerates to A2 = J_k
        let eig = block_eigen_closed_form(5, 0.0).unwrap();
        assert_eq!(eig.rho1, 0.0);
        assert!((eig.rho2 - 5.0).abs() < 1e-12);

        // larger instance cross-checked against power iteration
        let eig = block_eigen_closed_form(30, 20.0).unwrap();
        assert!((eig.rho1 - 20.0).abs() < 1e-12);
        assert!((eig.rho2 - 20.0).abs() < 1e-9);
        assert!((eig.optimal_t - 20.0).abs() < 1e-6);
        let a1 = KernelMatrix::top_left_ones(30, 20);
        let a2 = a1.complement();
        assert!((a1.spectral_radius() - eig.rho1).abs() < 1e-9);
        assert!((a2.spectral_radius() - eig.rho2).abs() < 1e-9);
    }

    #[test]
    fn closed_forms_match_power_iteration_up_to_k_50() {
        for k in [4usize, 9, 17, 33, 50] {
            for t in [0usize, 1, k / 3, 2 * k / 3, k - 1, k] {
                let eig = block_eigen_closed_form(k, t as f64).unwrap();
                let a1 = KernelMatrix::top_left_ones(k, t);
                let a2 = a1.complement();
                assert!(
                    (a1.spectral_radius() - eig.rho1).abs() < 1e-9,
                    "A1 k={k} t={t}"
                );
                assert!(
                    (a2.spectral_radius() - eig.rho2).abs() < 1e-9,
                    "A2 k={k} t={t}: {} vs {}",
                    a2.spectral_radius(),
                    eig.rho2
                );
            }
        }
    }

    #[test]
    fn kpartite_threshold_values() {
        assert_eq!(kpartite_threshold(2).unwrap(), 2.0);
        assert_eq!(kpartite_threshold(3).unwrap(), 1.5);
        assert!(kpartite_threshold(1).is_err());
        let mut prev = kpartite_threshold(2).unwrap();
        for k in 3..200 {
            let cur = kpartite_threshold(k).unwrap();
            assert!(cur < prev && cur > 1.0);
            prev = cur;
        }
    }
}
