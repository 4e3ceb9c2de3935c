//! Composite trapezoid rule on arbitrary ascending nodes.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Trapezoid weights for the given nodes, so that `sum_i w_i f(k_i)`
/// approximates the integral over `[k_0, k_last]`.
pub fn trapezoid_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    if nodes.len() < 2 {
        return Err(Error::Validation(format!(
            "trapezoid rule needs at least 2 nodes, got {}",
            nodes.len()
        )));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Validation(
            "quadrature nodes must be strictly increasing".into(),
        ));
    }
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = 0.5 * (nodes[i + 1] - nodes[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    Ok(w)
}

/// Trapezoid integral of sampled complex values.
pub fn trapezoid(nodes: &[f64], values: &[Complex64]) -> Result<Complex64> {
    if nodes.len() != values.len() {
        return Err(Error::Validation(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    let w = trapezoid_weights(nodes)?;
    Ok(w.iter().zip(values).map(|(w, v)| v * *w).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_linear_functions_exactly() {
        let nodes = [0.0, 0.5, 2.0, 3.0];
        let vals: Vec<_> = nodes.iter().map(|&k| Complex64::new(2.0 * k + 1.0, -k)).collect();
        let got = trapezoid(&nodes, &vals).unwrap();
        assert!((got - Complex64::new(12.0, -4.5)).norm() < 1e-14);
    }

    #[test]
    fn oscillatory_integrand_is_second_order() {
        // Integral of e^{ik} over [0, 2]: (e^{2i} - 1)/i.
        let exact = (Complex64::new(0.0, 2.0).exp() - 1.0) / Complex64::i();
        let err = |n: usize| {
            let nodes: Vec<f64> = (0..=n).map(|i| 2.0 * i as f64 / n as f64).collect();
            let vals: Vec<_> = nodes.iter().map(|&k| Complex64::new(0.0, k).exp()).collect();
            (trapezoid(&nodes, &vals).unwrap() - exact).norm()
        };
        let ratio = err(40) / err(80);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(trapezoid_weights(&[1.0]).is_err());
        assert!(trapezoid_weights(&[1.0, 1.0]).is_err());
        assert!(trapezoid_weights(&[2.0, 1.0]).is_err());
    }
}
