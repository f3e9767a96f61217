use crate::error::{Error, Result};
use crate::geometry::{dot, UnitVector};
use crate::rng::Seed;

const TAG_PACKING: u64 = 0x5041_434b;

/// Unit vectors whose pairwise inner products are all below
/// `d^{−1/2+c}` in absolute value.
#[derive(Debug, Clone, PartialEq)]
pub struct Packing {
    pub d: usize,
    pub c: f64,
    pub vectors: Vec<UnitVector>,
    pub max_abs_inner: f64,
    pub threshold: f64,
}

/// Largest `|v·u|` over distinct pairs (0 for fewer than two vectors).
pub fn max_abs_inner(vectors: &[UnitVector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, v) in vectors.iter().enumerate() {
        for u in &vectors[i + 1..] {
            worst = worst.max(dot(v.as_slice(), u.as_slice()).abs());
        }
    }
    worst
}

/// Rejection sampling: candidate `k` is the normalized Gaussian vector of
/// substream `k`, kept when it is nearly orthogonal to everything already
/// kept. Fails after `max_tries` candidates.
pub fn make_packing(d: usize, c: f64, m: usize, seed: Seed, max_tries: usize) -> Result<Packing> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if !(c > 0.0 && c < 0.5) {
        return Err(Error::domain(format!("c must lie in (0, 1/2), got {c}")));
    }
    if m < 2 {
        return Err(Error::domain(format!("need at least two vectors, got {m}")));
    }
    let threshold = (d as f64).powf(c - 0.5);
    let mut vectors: Vec<UnitVector> = Vec::with_capacity(m);
    let mut tries = 0;
    while vectors.len() < m {
        if tries == max_tries {
            return Err(Error::PackingBudget {
                placed: vectors.len(),
                requested: m,
                tries,
            });
        }
        let coords: Vec<f64> = seed
            .derive(TAG_PACKING, tries as u64)
            .gaussian_stream()
            .take(d)
            .collect();
        tries += 1;
        let v = UnitVector::new(coords)?;
        if vectors
            .iter()
            .all(|u| dot(v.as_slice(), u.as_slice()).abs() < threshold)
        {
            vectors.push(v);
        }
    }
    let max_abs_inner = max_abs_inner(&vectors);
    Ok(Packing {
        d,
        c,
        vectors,
        max_abs_inner,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn high_dimensional_packing_succeeds() {
        let p = make_packing(400, 0.3, 50, Seed(1), 10_000).unwrap();
        assert_eq!(p.vectors.len(), 50);
        assert!((p.threshold - 400f64.powf(-0.2)).abs() < 1e-15);
        assert!((p.threshold - 0.3017).abs() < 1e-4);
        assert!(p.max_abs_inner < p.threshold);
        assert_eq!(p.max_abs_inner, max_abs_inner(&p.vectors));
    }

    #[test]
    fn two_vectors_always_fit() {
        for d in 2..6 {
            let p = make_packing(d, 0.45, 2, Seed(d as u64), 1000).unwrap();
            assert!(p.max_abs_inner < p.threshold);
        }
    }

    #[test]
    fn crowded_plane_exhausts_budget() {
        match make_packing(2, 0.01, 100, Seed(3), 5000) {
            Err(Error::PackingBudget {
                placed,
                requested,
                tries,
            }) => {
                assert!(placed < 100);
                assert_eq!((requested, tries), (100, 5000));
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn packing_is_deterministic() {
        let a = make_packing(50, 0.25, 20, Seed(9), 1000).unwrap();
        let b = make_packing(50, 0.25, 20, Seed(9), 1000).unwrap();
        assert_eq!(a, b);
    }
}
