//! Shared grid numerics: differentiation, trapezoidal integration and
//! linear interpolation on the uniform grid of [0, 1].
//!
//! Everything is O(h^2): central differences in the interior with
//! second-order one-sided stencils at the endpoints, and the composite
//! trapezoidal rule for all integrals.

/// Uniform grid 0, 1/(n-1), ..., 1.
pub fn unit_grid(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    (0..n).map(|k| k as f64 * h).collect()
}

/// Numerical derivative on a uniform grid with spacing `h`.
///
/// Central differences in the interior, one-sided second-order stencils
/// at both endpoints.
pub fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "derivative needs at least 3 samples");
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for k in 1..n - 1 {
        d[k] = (values[k + 1] - values[k - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    d
}

/// Composite trapezoidal rule with spacing `h`.
pub fn trapz(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.5 * (values[0] + values[n - 1]);
    for v in &values[1..n - 1] {
        s += v;
    }
    s * h
}

/// Cumulative trapezoidal integral; output[0] = 0.
pub fn cumtrapz(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// L2 inner product of two samples on the unit grid.
pub fn inner(a: &[f64], b: &[f64], h: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    trapz(&prod, h)
}

/// L2 norm on the unit grid.
pub fn norm(a: &[f64], h: f64) -> f64 {
    inner(a, a, h).max(0.0).sqrt()
}

/// Linear interpolation of `values` (sampled on the uniform grid of [0, 1])
/// at a point `x`, clamped to [0, 1].
pub fn interp_unit(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let x = x.clamp(0.0, 1.0);
    let pos = x * (n - 1) as f64;
    let i = (pos.floor() as usize).min(n - 2);
    let frac = pos - i as f64;
    // snap to grid nodes so evaluating at a sample point returns the
    // stored value bit-for-bit
    if frac < 1e-9 {
        return values[i];
    }
    if frac > 1.0 - 1e-9 {
        return values[i + 1];
    }
    values[i] + frac * (values[i + 1] - values[i])
}

/// Resample `values` from its own uniform grid onto a uniform grid of
/// `m` points by linear interpolation.
pub fn resample(values: &[f64], m: usize) -> Vec<f64> {
    if values.len() == m {
        return values.to_vec();
    }
    let hm = 1.0 / (m - 1) as f64;
    (0..m).map(|k| interp_unit(values, k as f64 * hm)).collect()
}
