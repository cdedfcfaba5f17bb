//! Scalar and batched distance kernels.
//!
//! Components are stored as f32; accumulation runs in f64 across four
//! independent lanes so the compiler can keep the inner loop unrolled, and
//! the result is narrowed back to f32 at the API boundary. Selection code
//! (argmin over centroids, top-k merges) compares the f64 values directly
//! via [`distance_f64`] so ordering does not depend on the narrowing.

use crate::{Error, Metric, Result};

/// Dot product accumulated in f64.
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for i in 0..4 {
            acc[i] += xa[i] as f64 * xb[i] as f64;
        }
    }
    let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (xa, xb) in ca.remainder().iter().zip(cb.remainder()) {
        sum += *xa as f64 * *xb as f64;
    }
    sum
}

/// Squared Euclidean distance accumulated in f64.
pub fn l2_sq(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for i in 0..4 {
            let d = xa[i] as f64 - xb[i] as f64;
            acc[i] += d * d;
        }
    }
    let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (xa, xb) in ca.remainder().iter().zip(cb.remainder()) {
        let d = *xa as f64 - *xb as f64;
        sum += d * d;
    }
    sum
}

/// Metric distance at full f64 resolution. This is the canonical value used
/// for every nearest-X selection; for Cosine it can be marginally negative
/// on unit inputs and is left unclamped so ties keep their resolution.
#[inline]
pub fn distance_f64(a: &[f32], b: &[f32], metric: Metric) -> f64 {
    match metric {
        Metric::Euclidean => l2_sq(a, b).sqrt(),
        Metric::Cosine => 1.0 - dot(a, b),
    }
}

/// Distance between two vectors under `metric`.
///
/// Euclidean is the L2 distance; Cosine is `1 - dot` and expects both
/// vectors unit-normalized (see [`normalize`]), clamped at zero against
/// rounding below it.
pub fn distance(a: &[f32], b: &[f32], metric: Metric) -> Result<f32> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(distance_f64(a, b, metric).max(0.0) as f32)
}

/// Distances from `query` to every row of a row-major `block` in one pass.
///
/// `block.len()` must be a multiple of the query dimensionality; an empty
/// block yields an empty result.
pub fn batch_distances(query: &[f32], block: &[f32], metric: Metric) -> Result<Vec<f32>> {
    let dim = query.len();
    if dim == 0 || block.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: block.len(),
        });
    }
    Ok(block
        .chunks_exact(dim)
        .map(|row| distance_f64(query, row, metric).max(0.0) as f32)
        .collect())
}

/// Scale `v` to unit L2 norm. The norm is computed in f64 and applied to
/// every component identically on every call, so repeated normalization of
/// the same input is bit-stable.
pub fn normalize(v: &[f32]) -> Result<Vec<f32>> {
    let norm = dot(v, v).sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument(
            "cannot normalize a zero vector".to_string(),
        ));
    }
    Ok(v.iter().map(|&x| (x as f64 / norm) as f32).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
        loop {
            let v: Vec<f32> = (0..dim).map(|_| rng.random::<f32>() * 2.0 - 1.0).collect();
            if let Ok(u) = normalize(&v) {
                return u;
            }
        }
    }

    #[test]
    fn euclidean_three_four_five() {
        let d = distance(&[0.0, 0.0], &[3.0, 4.0], Metric::Euclidean).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn cosine_identity_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = unit_vec(&mut rng, 17);
        let d = distance(&v, &v, Metric::Cosine).unwrap();
        assert!(d.abs() <= 1e-6, "self distance {d}");
    }

    #[test]
    fn cosine_orthogonal_is_one() {
        let d = distance(&[1.0, 0.0], &[0.0, 1.0], Metric::Cosine).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(matches!(
            distance(&[1.0], &[1.0, 2.0], Metric::Euclidean),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            batch_distances(&[1.0, 2.0], &[1.0, 2.0, 3.0], Metric::Euclidean),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn batch_trivial_cases() {
        let out = batch_distances(&[1.0, 0.0], &[1.0, 0.0, 0.0, 1.0], Metric::Cosine).unwrap();
        assert_eq!(out, vec![0.0, 1.0]);
        let empty = batch_distances(&[1.0, 0.0], &[], Metric::Cosine).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn batch_matches_scalar_loop() {
        // Oracle: a plain per-row scalar loop over 100 random unit vectors.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let dim = 33;
        let query = unit_vec(&mut rng, dim);
        let rows: Vec<Vec<f32>> = (0..100).map(|_| unit_vec(&mut rng, dim)).collect();
        let block: Vec<f32> = rows.iter().flatten().copied().collect();
        for metric in [Metric::Euclidean, Metric::Cosine] {
            let batch = batch_distances(&query, &block, metric).unwrap();
            for (i, row) in rows.iter().enumerate() {
                let scalar = distance(&query, row, metric).unwrap();
                let rel = (batch[i] - scalar).abs() / scalar.abs().max(1.0);
                assert!(rel <= 1e-5, "row {i}: batch {} vs scalar {scalar}", batch[i]);
            }
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);
        let u = normalize(&[0.6, 0.8]).unwrap();
        assert!((u[0] - 0.6).abs() <= 1e-6 && (u[1] - 0.8).abs() <= 1e-6);
        assert!(normalize(&[0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn metric_axioms(seed in 0u64..1000, dim in 1usize..48) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = unit_vec(&mut rng, dim);
            let b = unit_vec(&mut rng, dim);
            let c = unit_vec(&mut rng, dim);
            for metric in [Metric::Euclidean, Metric::Cosine] {
                let daa = distance(&a, &a, metric).unwrap();
                prop_assert!(daa <= 1e-6);
                let dab = distance(&a, &b, metric).unwrap();
                let dba = distance(&b, &a, metric).unwrap();
                prop_assert!((dab - dba).abs() <= 1e-6);
            }
            // Triangle inequality for Euclidean.
            let dab = distance(&a, &b, Metric::Euclidean).unwrap() as f64;
            let dbc = distance(&b, &c, Metric::Euclidean).unwrap() as f64;
            let dac = distance(&a, &c, Metric::Euclidean).unwrap() as f64;
            prop_assert!(dac <= dab + dbc + 1e-5);
            // Cosine distance of unit vectors stays in [0, 2].
            let cos = distance(&a, &b, Metric::Cosine).unwrap();
            prop_assert!((0.0..=2.0 + 1e-6).contains(&(cos as f64)));
        }

        #[test]
        fn batch_equals_mapped_scalar(seed in 0u64..500, dim in 1usize..32, n in 0usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let query = unit_vec(&mut rng, dim);
            let block: Vec<f32> = (0..n)
                .flat_map(|_| unit_vec(&mut rng, dim))
                .collect();
            for metric in [Metric::Euclidean, Metric::Cosine] {
                let batch = batch_distances(&query, &block, metric).unwrap();
                let scalar: Vec<f32> = block
                    .chunks_exact(dim)
                    .map(|row| distance(&query, row, metric).unwrap())
                    .collect();
                prop_assert_eq!(&batch, &scalar);
            }
        }
    }
}
