//! Normalized probabilists' Hermite polynomials `He_i = Ĥe_i/√(i!)`.
//!
//! These are orthonormal under the standard Gaussian. Evaluation uses the
//! normalized three-term recurrence
//! `He_{i+1}(x) = (x·He_i(x) − √i·He_{i−1}(x)) / √(i+1)`,
//! which stays in range far beyond the degrees where `i!` overflows.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HermiteDegree(pub usize);

impl From<usize> for HermiteDegree {
    fn from(i: usize) -> Self {
        HermiteDegree(i)
    }
}

/// `He_i(x)`.
pub fn hermite_normalized(degree: impl Into<HermiteDegree>, x: f64) -> f64 {
    let HermiteDegree(i) = degree.into();
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..i {
        let kf = k as f64;
        let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// `[He_0(x), …, He_max(x)]`.
pub fn hermite_table(max_degree: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(1.0);
    if max_degree == 0 {
        return out;
    }
    out.push(x);
    for k in 1..max_degree {
        let kf = k as f64;
        let next = (x * out[k] - kf.sqrt() * out[k - 1]) / (kf + 1.0).sqrt();
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussHermite;
    use crate::rng::{gaussian_stream, Seed};

    #[test]
    fn low_degree_values() {
        assert_eq!(hermite_normalized(0, 3.7), 1.0);
        assert!(hermite_normalized(2, 1.0).abs() < 1e-15);
        // (x³ − 3x)/√6 at x = 2.
        let explicit = (8.0 - 6.0) / 6f64.sqrt();
        assert!((hermite_normalized(3, 2.0) - explicit).abs() < 1e-14);
        assert!((explicit - 0.816_496_580_9).abs() < 1e-10);
    }

    #[test]
    fn table_matches_pointwise() {
        let t = hermite_table(30, 1.3);
        for (i, v) in t.iter().enumerate() {
            assert!((v - hermite_normalized(i, 1.3)).abs() < 1e-12);
        }
    }

    #[test]
    fn high_degree_stays_finite() {
        for &x in &[0.0, 2.0, 10.0] {
            assert!(hermite_normalized(400, x).is_finite());
        }
    }

    #[test]
    fn orthonormal_under_quadrature() {
        let gh = GaussHermite::new(200);
        for i in 0..=8 {
            for j in 0..=8 {
                let v = gh.integrate(|z| hermite_normalized(i, z) * hermite_normalized(j, z));
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((v - target).abs() <= 1e-10, "({i},{j}) -> {v}");
            }
        }
    }

    #[test]
    fn orthonormal_under_monte_carlo() {
        // Var(He_i·He_j) ≥ 1 for every (i, j) ≠ (0, 0), so a 1e6-draw mean
        // carries a standard error of at least 1e-3. Each entry is checked
        // against max(1e-3, 4 estimated standard errors).
        let n = 1_000_000;
        let mut s1 = [[0.0f64; 9]; 9];
        let mut s2 = [[0.0f64; 9]; 9];
        let mut g = gaussian_stream(Seed(5));
        for _ in 0..n {
            let h = hermite_table(8, g.next_normal());
            for i in 0..9 {
                for j in i..9 {
                    let v = h[i] * h[j];
                    s1[i][j] += v;
                    s2[i][j] += v * v;
                }
            }
        }
        let nf = n as f64;
        for i in 0..9 {
            for j in i..9 {
                let mean = s1[i][j] / nf;
                let se = ((s2[i][j] / nf - mean * mean) / nf).sqrt();
                let target = if i == j { 1.0 } else { 0.0 };
                let tol = (4.0 * se).max(1e-3);
                assert!((mean - target).abs() <= tol, "({i},{j}) -> {mean} (se {se})");
            }
        }
    }
}
