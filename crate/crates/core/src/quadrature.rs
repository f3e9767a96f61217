//! Gauss–Hermite (Gaussian weight) and Gauss–Legendre rules.
//!
//! Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix of
//! the orthogonal family, located by Sturm-sequence bisection and polished
//! with Newton steps on the three-term recurrence. Weights use the
//! closed-form Christoffel expressions at the polished nodes.

use crate::hermite::hermite_normalized;

/// `k`-th smallest eigenvalue (0-based) of the symmetric tridiagonal matrix
/// with zero diagonal and off-diagonal `off[i]` between rows `i` and `i+1`.
fn tridiagonal_eigenvalue(off: &[f64], k: usize, lo: f64, hi: f64) -> f64 {
    // Number of eigenvalues strictly below x.
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = -x;
        if q < 0.0 {
            count += 1;
        }
        for b in off {
            let prev = if q == 0.0 { f64::EPSILON } else { q };
            q = -x - b * b / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gauss–Hermite rule for `E_{z∼N(0,1)}[f(z)]`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
        let bound = 2.0 * (n as f64).sqrt() + 1.0;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for k in 0..n {
            let mut x = tridiagonal_eigenvalue(&off, k, -bound, bound);
            // He_n'(x) = √n He_{n−1}(x).
            for _ in 0..3 {
                let p = hermite_normalized(n, x);
                let dp = (n as f64).sqrt() * hermite_normalized(n - 1, x);
                if dp == 0.0 {
                    break;
                }
                x -= p / dp;
            }
            let h = hermite_normalized(n - 1, x);
            nodes.push(x);
            weights.push(1.0 / (n as f64 * h * h));
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let off: Vec<f64> = (1..n)
            .map(|k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            })
            .collect();
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for k in 0..n {
            let mut x = tridiagonal_eigenvalue(&off, k, -1.0, 1.0);
            for _ in 0..3 {
                let (p, pm1) = legendre_pair(n, x);
                let dp = nf * (x * p - pm1) / (x * x - 1.0);
                if !dp.is_finite() || dp == 0.0 {
                    break;
                }
                x -= p / dp;
            }
            let (p, pm1) = legendre_pair(n, x);
            let dp = nf * (x * p - pm1) / (x * x - 1.0);
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Composite rule: `[a, b]` split into `panels` equal pieces.
    pub fn integrate_composite(&self, a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + i as f64 * h;
                self.integrate(lo, lo + h, &f)
            })
            .sum()
    }
}
