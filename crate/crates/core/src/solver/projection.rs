/// Euclidean projection onto the probability simplex (sort-based).
pub(crate) fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    if n == 0 {
        return;
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Projects the full variable vector: simplex on the weights, box elsewhere.
pub(crate) fn project(z: &mut [f64], n_weights: usize, bounds: &[(f64, f64)]) {
    project_simplex(&mut z[..n_weights]);
    for (v, &(lo, hi)) in z.iter_mut().zip(bounds).skip(n_weights) {
        *v = v.clamp(lo, hi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vertex_and_interior_cases() {
        let mut v = [3.0, 0.0, 0.0];
        project_simplex(&mut v);
        assert_eq!(v, [1.0, 0.0, 0.0]);
        let mut w = [0.2, 0.3, 0.5];
        project_simplex(&mut w);
        assert!((w[0] - 0.2).abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn projection_lands_on_simplex_and_is_optimal(
            v in prop::collection::vec(-2.0..2.0f64, 1..8),
            probe in prop::collection::vec(0.0..1.0f64, 8),
        ) {
            let mut p = v.clone();
            project_simplex(&mut p);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // No other simplex point is closer.
            let s: f64 = probe[..v.len()].iter().sum::<f64>().max(1e-12);
            let q: Vec<f64> = probe[..v.len()].iter().map(|x| x / s).collect();
            let d = |a: &[f64]| a.iter().zip(&v).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
            prop_assert!(d(&p) <= d(&q) + 1e-12);
        }
    }
}
