//! Unit vectors, inner products and projections.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Inner product with four independent accumulators, which lets the
/// compiler keep several multiply-adds in flight.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    let mut acc = [0.0f64; 4];
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `out += alpha · x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], out: &mut [f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += alpha * v;
    }
}

/// A vector with Euclidean norm one (to within 1e-12).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Normalizes `coords`. Fails on empty, zero or non-finite input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::domain("unit vector needs at least one coordinate"));
        }
        let n = norm(&coords);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Numeric(format!("cannot normalize a vector of norm {n}")));
        }
        let mut coords = coords;
        for c in &mut coords {
            *c /= n;
        }
        Ok(Self { coords })
    }

    /// The `i`-th standard basis vector of `R^d`.
    pub fn basis(d: usize, i: usize) -> Self {
        assert!(i < d, "basis index {i} out of range for dimension {d}");
        let mut coords = vec![0.0; d];
        coords[i] = 1.0;
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.coords
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.coords, x)
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Vec<f64> {
        u.coords
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// Angle in `[0, π]` between two unit vectors. The inner product is
/// clamped to `[−1, 1]` before `acos` to absorb roundoff.
pub fn angle(a: &UnitVector, b: &UnitVector) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(dot(a.as_slice(), b.as_slice()).clamp(-1.0, 1.0).acos())
}

/// `x − (w·x) w`.
pub fn project_orthogonal(x: &[f64], w: &UnitVector) -> Result<Vec<f64>> {
    check_dim(w.dim(), x.len())?;
    let mut out = x.to_vec();
    let c = w.dot(x);
    axpy(-c, w.as_slice(), &mut out);
    Ok(out)
}

/// `sin(θ/2)` computed as `‖a − b‖/2`, which is exact near θ = 0 where
/// `acos` loses half its digits.
pub fn sin_half_angle(a: &UnitVector, b: &UnitVector) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let s: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(0.5 * s.sqrt())
}

/// A unit vector at angle `theta` from `w`, rotated toward `direction`
/// (which must not be parallel to `w`).
pub fn rotate_toward(w: &UnitVector, direction: &[f64], theta: f64) -> Result<UnitVector> {
    let perp = project_orthogonal(direction, w)?;
    let perp = UnitVector::new(perp)?;
    let (s, c) = theta.sin_cos();
    let coords = w
        .as_slice()
        .iter()
        .zip(perp.as_slice())
        .map(|(a, b)| c * a + s * b)
        .collect();
    UnitVector::new(coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_stream, Seed};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn random_unit(d: usize, seed: u64) -> UnitVector {
        UnitVector::new(gaussian_stream(Seed(seed)).take(d).collect()).unwrap()
    }

    #[test]
    fn angles_of_basis_vectors() {
        let e1 = UnitVector::basis(2, 0);
        let e2 = UnitVector::basis(2, 1);
        let diag = UnitVector::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(angle(&e1, &e1).unwrap(), 0.0);
        assert!((angle(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((angle(&e1, &diag).unwrap() - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn angle_rejects_mismatched_dims() {
        let a = UnitVector::basis(2, 0);
        let b = UnitVector::basis(3, 0);
        assert!(matches!(angle(&a, &b), Err(Error::Shape { .. })));
    }

    #[test]
    fn projections() {
        let e1 = UnitVector::basis(2, 0);
        assert_eq!(project_orthogonal(&[3.0, 4.0], &e1).unwrap(), vec![0.0, 4.0]);
        let w = random_unit(5, 3);
        let p = project_orthogonal(w.as_slice(), &w).unwrap();
        assert!(norm(&p) < 1e-15);
        assert!(project_orthogonal(&[1.0, 2.0], &random_unit(3, 1)).is_err());
    }

    #[test]
    fn zero_vector_is_not_normalizable() {
        assert!(UnitVector::new(vec![0.0; 4]).is_err());
        assert!(UnitVector::new(vec![]).is_err());
    }

    #[test]
    fn rotation_hits_requested_angle() {
        let w = random_unit(6, 10);
        let dir: Vec<f64> = gaussian_stream(Seed(11)).take(6).collect();
        let v = rotate_toward(&w, &dir, 0.3).unwrap();
        assert!((angle(&w, &v).unwrap() - 0.3).abs() < 1e-12);
        let s = sin_half_angle(&w, &v).unwrap();
        assert!((s - 0.15f64.sin()).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn projection_is_orthogonal_and_idempotent(seed in any::<u64>(), d in 1usize..12) {
            let w = random_unit(d, seed);
            let x: Vec<f64> = gaussian_stream(Seed(seed ^ 0xABCD)).take(d).collect();
            let p = project_orthogonal(&x, &w).unwrap();
            prop_assert!(w.dot(&p).abs() <= 1e-12);
            let pp = project_orthogonal(&p, &w).unwrap();
            for (a, b) in p.iter().zip(&pp) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn unit_vectors_have_unit_norm(seed in any::<u64>(), d in 1usize..2000) {
            let w = random_unit(d, seed);
            prop_assert!((norm(w.as_slice()) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn angle_is_symmetric(seed in any::<u64>(), d in 2usize..10) {
            let a = random_unit(d, seed);
            let b = random_unit(d, seed.wrapping_add(1));
            prop_assert_eq!(angle(&a, &b).unwrap(), angle(&b, &a).unwrap());
        }
    }
}
