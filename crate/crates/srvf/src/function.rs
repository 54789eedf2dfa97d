//! Discrete function representations and the square-root velocity
//! transform.
//!
//! A [`SampledFunction`] lives on an arbitrary interval [t0, t1] but all
//! internal computations run on the rescaled unit domain; the original
//! interval is kept for display and output. The transform
//! q = f' / sqrt(|f'|) sends a function to its [`Srvf`], under which the
//! Fisher-Rao metric becomes the plain L2 metric and warping acts by
//! (q, gamma) = (q o gamma) sqrt(gamma').

use crate::error::{Error, Result};
use crate::numerics;

/// A real-valued function sampled on a uniform grid over [t0, t1].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    t0: f64,
    t1: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(t0: f64, t1: f64, values: Vec<f64>) -> Result<Self> {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidFunction(format!(
                "interval [{t0}, {t1}] is not a valid interval"
            )));
        }
        if values.len() < 3 {
            return Err(Error::InvalidFunction(format!(
                "need at least 3 samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction("non-finite sample value".into()));
        }
        Ok(Self { t0, t1, values })
    }

    /// Function on the unit interval.
    pub fn on_unit(values: Vec<f64>) -> Result<Self> {
        Self::new(0.0, 1.0, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid spacing on the rescaled unit domain.
    pub fn unit_step(&self) -> f64 {
        1.0 / (self.len() - 1) as f64
    }

    /// Sample times in the original interval.
    pub fn times(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|k| self.t0 + k as f64 * (self.t1 - self.t0) / (n - 1) as f64)
            .collect()
    }

    /// Same samples reinterpreted on another interval.
    pub fn with_interval(&self, t0: f64, t1: f64) -> Result<Self> {
        Self::new(t0, t1, self.values.clone())
    }
}

/// Square-root velocity function on the uniform grid of [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Srvf {
    values: Vec<f64>,
}

impl Srvf {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidFunction(format!(
                "need at least 3 samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction("non-finite SRVF value".into()));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit_step(&self) -> f64 {
        1.0 / (self.len() - 1) as f64
    }

    /// Discrete L2 norm.
    pub fn norm(&self) -> f64 {
        numerics::norm(&self.values, self.unit_step())
    }

    /// Scale every value by `c`.
    pub fn scaled(&self, c: f64) -> Srvf {
        Srvf {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// Boundary-preserving strictly monotone reparameterization of [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Warping {
    values: Vec<f64>,
}

impl Warping {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(Error::InvalidWarping(format!(
                "need at least 3 samples, got {n}"
            )));
        }
        if values[0] != 0.0 || values[n - 1] != 1.0 {
            return Err(Error::InvalidWarping(format!(
                "endpoints must be 0 and 1, got {} and {}",
                values[0],
                values[n - 1]
            )));
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidWarping("not strictly increasing".into()));
        }
        Ok(Self { values })
    }

    /// The identity warp gamma(t) = t on an n-point grid.
    pub fn identity(n: usize) -> Warping {
        Warping {
            values: numerics::unit_grid(n),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit_step(&self) -> f64 {
        1.0 / (self.len() - 1) as f64
    }

    /// Resample to an m-point grid (exact at the endpoints, still strictly
    /// increasing because linear interpolation preserves monotonicity).
    pub fn resampled(&self, m: usize) -> Warping {
        if m == self.len() {
            return self.clone();
        }
        let mut vals = numerics::resample(&self.values, m);
        vals[0] = 0.0;
        vals[m - 1] = 1.0;
        Warping { values: vals }
    }

    /// Composition self(other(t)) evaluated on other's grid.
    pub fn compose(&self, other: &Warping) -> Warping {
        let mut vals: Vec<f64> = other
            .values
            .iter()
            .map(|&u| numerics::interp_unit(&self.values, u))
            .collect();
        let n = vals.len();
        vals[0] = 0.0;
        vals[n - 1] = 1.0;
        Warping { values: vals }
    }

    /// Sup-norm distance to the identity warp.
    pub fn sup_distance_to_identity(&self) -> f64 {
        let grid = numerics::unit_grid(self.len());
        self.values
            .iter()
            .zip(&grid)
            .map(|(v, t)| (v - t).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Warping {
        debug_assert!(values.windows(2).all(|w| w[1] > w[0]));
        Warping { values }
    }
}

/// Q(x) = x / sqrt(|x|), extended continuously by Q(0) = 0.
pub fn q_map(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x / x.abs().sqrt()
    }
}

/// SRVF of a sampled function: q = Q(f') with f' taken on the rescaled
/// unit domain.
pub fn to_srvf(f: &SampledFunction) -> Srvf {
    let d = numerics::derivative(f.values(), f.unit_step());
    Srvf {
        values: d.into_iter().map(q_map).collect(),
    }
}

/// Inverse transform: f(t) = f0 + integral of q |q|. Output lives on [0, 1].
pub fn from_srvf(q: &Srvf, f0: f64) -> SampledFunction {
    let integrand: Vec<f64> = q.values().iter().map(|&v| v * v.abs()).collect();
    let cum = numerics::cumtrapz(&integrand, q.unit_step());
    SampledFunction {
        t0: 0.0,
        t1: 1.0,
        values: cum.into_iter().map(|v| v + f0).collect(),
    }
}

/// Re-parameterization f o gamma by linear interpolation; the warping is
/// resampled to f's grid if the sizes differ. The output keeps f's
/// original interval.
pub fn warp_function(f: &SampledFunction, g: &Warping) -> SampledFunction {
    let g = g.resampled(f.len());
    let values: Vec<f64> = g
        .values()
        .iter()
        .map(|&u| numerics::interp_unit(f.values(), u))
        .collect();
    SampledFunction {
        t0: f.t0,
        t1: f.t1,
        values,
    }
}

/// Group action on SRVFs: (q, gamma) = (q o gamma) sqrt(gamma').
pub fn warp_srvf(q: &Srvf, g: &Warping) -> Srvf {
    let g = g.resampled(q.len());
    let gdot = numerics::derivative(g.values(), g.unit_step());
    let values: Vec<f64> = g
        .values()
        .iter()
        .zip(&gdot)
        .map(|(&u, &d)| numerics::interp_unit(q.values(), u) * d.max(0.0).sqrt())
        .collect();
    Srvf { values }
}

/// L2 distance between two SRVFs on a common grid (trapezoidal rule).
pub fn l2_distance(q1: &Srvf, q2: &Srvf) -> Result<f64> {
    if q1.len() != q2.len() {
        return Err(Error::GridMismatch(q1.len(), q2.len()));
    }
    let diff: Vec<f64> = q1
        .values()
        .iter()
        .zip(q2.values())
        .map(|(a, b)| a - b)
        .collect();
    Ok(numerics::norm(&diff, q1.unit_step()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::unit_grid;

    fn sampled(values: Vec<f64>) -> SampledFunction {
        SampledFunction::on_unit(values).unwrap()
    }

    #[test]
    fn q_map_known_values() {
        assert_eq!(q_map(0.0), 0.0);
        assert_eq!(q_map(4.0), 2.0);
        assert_eq!(q_map(-9.0), -3.0);
    }

    #[test]
    fn q_map_continuous_at_zero() {
        for &x in &[1e-4, 1e-8, 1e-12] {
            assert!(q_map(x).abs() < 2.0 * (x as f64).sqrt() + 1e-15);
            assert!(q_map(-x).abs() < 2.0 * (x as f64).sqrt() + 1e-15);
        }
    }

    #[test]
    fn srvf_of_linear_is_one() {
        let f = sampled(unit_grid(101));
        let q = to_srvf(&f);
        for v in q.values() {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn srvf_of_constant_is_zero() {
        let f = sampled(vec![7.5; 51]);
        let q = to_srvf(&f);
        assert!(q.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn srvf_of_square_matches_closed_form() {
        let n = 201;
        let f = sampled(unit_grid(n).iter().map(|t| t * t).collect());
        let q = to_srvf(&f);
        // q(t) = 2t / sqrt(2t) = sqrt(2t); endpoints use one-sided stencils
        for (k, t) in unit_grid(n).iter().enumerate().skip(1).take(n - 2) {
            assert!(
                (q.values()[k] - (2.0 * t).sqrt()).abs() < 1e-3,
                "k={k} q={} expected={}",
                q.values()[k],
                (2.0 * t).sqrt()
            );
        }
    }

    #[test]
    fn from_srvf_of_unit_is_identity_line() {
        let q = Srvf::new(vec![1.0; 101]).unwrap();
        let f = from_srvf(&q, 0.0);
        for (v, t) in f.values().iter().zip(unit_grid(101)) {
            assert!((v - t).abs() < 1e-12);
        }
    }

    #[test]
    fn from_srvf_of_zero_is_constant() {
        let q = Srvf::new(vec![0.0; 51]).unwrap();
        let f = from_srvf(&q, 5.0);
        assert!(f.values().iter().all(|v| *v == 5.0));
    }

    #[test]
    fn round_trip_sine() {
        let n = 401;
        let f = sampled(
            unit_grid(n)
                .iter()
                .map(|t| (2.0 * std::f64::consts::PI * t).sin())
                .collect(),
        );
        let back = from_srvf(&to_srvf(&f), f.values()[0]);
        let sup = f
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup < 2e-3, "sup error {sup}");
    }

    #[test]
    fn warp_by_identity_is_noop() {
        let f = sampled(unit_grid(101).iter().map(|t| (3.0 * t).cos()).collect());
        let g = Warping::identity(101);
        assert_eq!(warp_function(&f, &g).values(), f.values());
        let q = to_srvf(&f);
        let qw = warp_srvf(&q, &g);
        for (a, b) in q.values().iter().zip(qw.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn warping_the_identity_function_gives_the_warp() {
        let n = 101;
        let f = sampled(unit_grid(n));
        let g = Warping::new(unit_grid(n).iter().map(|t| t * t).collect()).unwrap();
        let fw = warp_function(&f, &g);
        for (a, b) in fw.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn warp_srvf_preserves_norm() {
        let n = 501;
        let q = Srvf::new(
            unit_grid(n)
                .iter()
                .map(|t| (5.0 * t).sin() + 0.3 * t)
                .collect(),
        )
        .unwrap();
        let g = Warping::new(
            unit_grid(n)
                .iter()
                .map(|t| t + 0.2 * (std::f64::consts::PI * t).sin().powi(2) * t * (1.0 - t))
                .collect(),
        )
        .unwrap();
        let qw = warp_srvf(&q, &g);
        assert!((qw.norm() - q.norm()).abs() < 2e-3);
    }

    #[test]
    fn warp_srvf_commutes_with_transform() {
        let n = 501;
        let f = sampled(unit_grid(n).iter().map(|t| (4.0 * t).sin()).collect());
        let g = Warping::new(
            unit_grid(n)
                .iter()
                .map(|t| (t + 0.15 * (std::f64::consts::PI * t).sin() * t * (1.0 - t)) / 1.0)
                .collect(),
        )
        .unwrap();
        let a = warp_srvf(&to_srvf(&f), &g);
        let b = to_srvf(&warp_function(&f, &g));
        let d = l2_distance(&a, &b).unwrap();
        assert!(d < 5e-2, "paths differ by {d}");
    }

    #[test]
    fn l2_distance_known_values() {
        let one = Srvf::new(vec![1.0; 101]).unwrap();
        let zero = Srvf::new(vec![0.0; 101]).unwrap();
        let minus = Srvf::new(vec![-1.0; 101]).unwrap();
        assert_eq!(l2_distance(&one, &one).unwrap(), 0.0);
        assert!((l2_distance(&one, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!((l2_distance(&one, &minus).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn l2_distance_rejects_grid_mismatch() {
        let a = Srvf::new(vec![0.0; 10]).unwrap();
        let b = Srvf::new(vec![0.0; 11]).unwrap();
        assert!(matches!(
            l2_distance(&a, &b),
            Err(crate::error::Error::GridMismatch(10, 11))
        ));
    }

    #[test]
    fn warping_validation() {
        assert!(Warping::new(vec![0.0, 0.5, 1.0]).is_ok());
        assert!(Warping::new(vec![0.1, 0.5, 1.0]).is_err());
        assert!(Warping::new(vec![0.0, 0.6, 0.4, 1.0]).is_err());
    }
}
