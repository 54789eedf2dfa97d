//! Synthetic dataset generators (bimodal, unwarped, shifted Gaussian
//! kernels, multimodal waves), the consistency-experiment signal, and
//! Gaussian smoothing of spike trains.

use crate::error::Result;
use crate::function::SampledFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

/// Default sample count for all generators.
pub const DEFAULT_GRID: usize = 101;

/// A set of functions on a shared uniform grid and interval.
#[derive(Debug, Clone)]
pub struct FunctionCollection {
    pub functions: Vec<SampledFunction>,
    pub labels: Vec<String>,
    pub interval: (f64, f64),
}

impl FunctionCollection {
    pub fn new(functions: Vec<SampledFunction>, labels: Vec<String>) -> Self {
        let interval = functions[0].interval();
        debug_assert!(functions.iter().all(|f| f.interval() == interval));
        debug_assert_eq!(functions.len(), labels.len());
        Self {
            functions,
            labels,
            interval,
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

fn grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| t0 + k as f64 * (t1 - t0) / (n - 1) as f64)
        .collect()
}

fn bimodal_component(z1: f64, z2: f64, t: f64) -> f64 {
    z1 * (-(t - 1.5) * (t - 1.5) / 2.0).exp() + z2 * (-(t + 1.5) * (t + 1.5) / 2.0).exp()
}

fn bimodal_mixture_weights(seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let law = Normal::new(1.0, 0.25).expect("valid law");
    (0..21)
        .map(|_| (law.sample(&mut rng), law.sample(&mut rng)))
        .collect()
}

/// Exponential warp of [-3, 3]: a = 0 is the identity.
fn bimodal_warp(a: f64, t: f64) -> f64 {
    if a == 0.0 {
        t
    } else {
        6.0 * (((a * (t + 3.0) / 6.0).exp() - 1.0) / (a.exp() - 1.0)) - 3.0
    }
}

/// 21 two-bump functions on [-3, 3] with random mixture weights, each
/// warped by an exponential-family warp with parameter equally spaced in
/// [-1, 1].
pub fn sim1_bimodal(seed: u64) -> FunctionCollection {
    let zs = bimodal_mixture_weights(seed);
    let ts = grid(-3.0, 3.0, DEFAULT_GRID);
    let mut functions = Vec::with_capacity(21);
    let mut labels = Vec::with_capacity(21);
    for (i, &(z1, z2)) in zs.iter().enumerate() {
        let a = -1.0 + 2.0 * i as f64 / 20.0;
        let values: Vec<f64> = ts
            .iter()
            .map(|&t| bimodal_component(z1, z2, bimodal_warp(a, t)))
            .collect();
        functions.push(SampledFunction::new(-3.0, 3.0, values).expect("finite values"));
        labels.push(format!("f{}", i + 1));
    }
    FunctionCollection::new(functions, labels)
}

/// The same 21 two-bump functions as [`sim1_bimodal`], without warping.
pub fn sim2_unwarped(seed: u64) -> FunctionCollection {
    let zs = bimodal_mixture_weights(seed);
    let ts = grid(-3.0, 3.0, DEFAULT_GRID);
    let mut functions = Vec::with_capacity(21);
    let mut labels = Vec::with_capacity(21);
    for (i, &(z1, z2)) in zs.iter().enumerate() {
        let values: Vec<f64> = ts.iter().map(|&t| bimodal_component(z1, z2, t)).collect();
        functions.push(SampledFunction::new(-3.0, 3.0, values).expect("finite values"));
        labels.push(format!("f{}", i + 1));
    }
    FunctionCollection::new(functions, labels)
}

/// 29 Gaussian bumps of a common shape with random horizontal shifts
/// (uniform on +-20% of the interval), kernel width 8% of the interval,
/// and amplitudes uniform in [0.9, 1.1].
pub fn sim3_gaussian_shifts(seed: u64) -> FunctionCollection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift_law = Uniform::new_inclusive(-0.2, 0.2);
    let amp_law = Uniform::new_inclusive(0.9, 1.1);
    let sigma = 0.08;
    let ts = grid(0.0, 1.0, DEFAULT_GRID);
    let mut functions = Vec::with_capacity(29);
    let mut labels = Vec::with_capacity(29);
    for i in 0..29 {
        let center = 0.5 + shift_law.sample(&mut rng);
        let amp = amp_law.sample(&mut rng);
        let values: Vec<f64> = ts
            .iter()
            .map(|&t| amp * (-(t - center) * (t - center) / (2.0 * sigma * sigma)).exp())
            .collect();
        functions.push(SampledFunction::new(0.0, 1.0, values).expect("finite values"));
        labels.push(format!("f{}", i + 1));
    }
    FunctionCollection::new(functions, labels)
}

/// Exponential warp of [0, 9]: a = 0 is the identity.
fn wave_warp(a: f64, t: f64) -> f64 {
    if a == 0.0 {
        t
    } else {
        9.0 * (((a * t / 9.0).exp() - 1.0) / (a.exp() - 1.0))
    }
}

/// 9 multimodal wave functions on [0, 9] that share one amplitude shape
/// and differ only in phase; the middle one is unwarped. The generator is
/// deterministic (the seed is accepted for interface uniformity).
pub fn sim4_wave(_seed: u64) -> FunctionCollection {
    let ts = grid(0.0, 9.0, DEFAULT_GRID);
    let mut functions = Vec::with_capacity(9);
    let mut labels = Vec::with_capacity(9);
    for i in 0..9 {
        let a = -1.5 + 0.375 * i as f64;
        let values: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let g = wave_warp(a, t);
                (1.0 - (g / 9.0 - 0.5) * (g / 9.0 - 0.5)) * (std::f64::consts::PI * g).sin()
            })
            .collect();
        functions.push(SampledFunction::new(0.0, 9.0, values).expect("finite values"));
        labels.push(format!("f{}", i + 1));
    }
    FunctionCollection::new(functions, labels)
}

/// The consistency-experiment signal g(t) = sin(5 pi t) on [0, 1].
pub fn consistency_signal(n: usize) -> SampledFunction {
    let values: Vec<f64> = grid(0.0, 1.0, n)
        .iter()
        .map(|t| (5.0 * std::f64::consts::PI * t).sin())
        .collect();
    SampledFunction::on_unit(values).expect("finite values")
}

/// Smooth a spike train on [0, 1] with a Gaussian kernel of width `sigma`:
/// the sum over spikes of exp(-(t - t_i)^2 / (2 sigma^2)) / (sqrt(2 pi) sigma).
pub fn smooth_spike_train(spike_times: &[f64], sigma: f64, n: usize) -> Result<SampledFunction> {
    if sigma <= 0.0 {
        return Err(crate::error::Error::InvalidConfig(format!(
            "kernel width must be positive, got {sigma}"
        )));
    }
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    let values: Vec<f64> = grid(0.0, 1.0, n)
        .iter()
        .map(|&t| {
            spike_times
                .iter()
                .map(|&ti| norm * (-(t - ti) * (t - ti) / (2.0 * sigma * sigma)).exp())
                .sum()
        })
        .collect();
    SampledFunction::on_unit(values)
}
