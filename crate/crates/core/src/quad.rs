//! Composite trapezoid quadrature and finite-difference helpers on uniform meshes.

/// Trapezoid rule for samples spaced `h` apart.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (0.5 * (values[0] + values[n - 1]) + inner)
        }
    }
}

/// Trapezoid rule applied to `f(v)` for each sample.
pub fn trapezoid_map(values: &[f64], h: f64, f: impl Fn(f64) -> f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().map(|&v| f(v)).sum();
            h * (0.5 * (f(values[0]) + f(values[n - 1])) + inner)
        }
    }
}

/// Trapezoid weights for `n` samples spaced `h` apart.
pub fn trapezoid_weights(n: usize, h: f64) -> alloc::vec::Vec<f64> {
    let mut w = alloc::vec![h; n];
    if n > 0 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}

/// Second-order derivative samples: centered inside, one-sided at both ends.
/// Needs at least three samples.
pub fn gradient(values: &[f64], h: f64, out: &mut [f64]) {
    let n = values.len();
    debug_assert!(n >= 3 && out.len() == n);
    let inv = 0.5 / h;
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * inv;
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) * inv;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_on_linears() {
        let h = 0.25;
        let v: alloc::vec::Vec<f64> = (0..=4).map(|i| 2.0 + 3.0 * i as f64 * h).collect();
        assert!((trapezoid(&v, h) - (2.0 + 1.5)).abs() < 1e-15);
    }

    #[test]
    fn gradient_is_exact_on_quadratics() {
        let h = 0.1;
        let v: alloc::vec::Vec<f64> = (0..=10).map(|i| (i as f64 * h).powi(2)).collect();
        let mut g = alloc::vec![0.0; v.len()];
        gradient(&v, h, &mut g);
        for (i, gi) in g.iter().enumerate() {
            assert!((gi - 2.0 * i as f64 * h).abs() < 1e-12);
        }
    }
}
