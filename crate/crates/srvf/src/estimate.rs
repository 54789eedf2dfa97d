//! Signal estimation under the observation model
//! f_i = c_i (g o gamma_i) + e_i with random warps, scales and vertical
//! translations, and the sample-size consistency experiment.

use crate::align::{align_all_with, AlignOptions};
use crate::datasets::consistency_signal;
use crate::dp::DpConfig;
use crate::error::{Error, Result};
use crate::function::{warp_function, SampledFunction};
use crate::numerics;
use crate::sphere::random_warps_identity_mean;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

const WARP_BASIS: usize = 10;

/// Sampling law for the random scales and translations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum Law {
    Constant(f64),
    Normal { mean: f64, sd: f64 },
    Exponential { mean: f64 },
}

impl Law {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Law::Constant(v) => v,
            Law::Normal { mean, sd } => Normal::new(mean, sd).expect("valid sd").sample(rng),
            Law::Exponential { mean } => Exp::new(1.0 / mean).expect("valid rate").sample(rng),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Law::Constant(v) => v,
            Law::Normal { mean, .. } => mean,
            Law::Exponential { mean } => mean,
        }
    }
}

/// Generative model for the estimation experiment.
#[derive(Debug, Clone)]
pub struct ObservationModel {
    /// True signal.
    pub g: SampledFunction,
    /// Known population mean of the scales.
    pub c_mean: f64,
    /// Known population mean of the translations.
    pub e_mean: f64,
    pub scale_law: Law,
    pub noise_law: Law,
    pub warp_amplitude: f64,
    pub seed: u64,
}

impl ObservationModel {
    /// The configuration of the published illustration: g = sin(5 pi t),
    /// exponential scales with mean 1, standard-normal translations.
    pub fn reference(grid_n: usize, seed: u64) -> ObservationModel {
        ObservationModel {
            g: consistency_signal(grid_n),
            c_mean: 1.0,
            e_mean: 0.0,
            scale_law: Law::Exponential { mean: 1.0 },
            noise_law: Law::Normal { mean: 0.0, sd: 1.0 },
            warp_amplitude: 0.35,
            seed,
        }
    }
}

/// Per-sample draws of one simulation, kept so tests can check the SRVF
/// identity q_i = sqrt(c_i) (q_g, gamma_i).
#[derive(Debug, Clone)]
pub struct SimulatedObservations {
    pub functions: Vec<SampledFunction>,
    pub scales: Vec<f64>,
    pub translations: Vec<f64>,
    pub warps: Vec<crate::function::Warping>,
}

/// Estimation output.
#[derive(Debug, Clone)]
pub struct EstimationReport {
    pub estimate: SampledFunction,
    /// L2 distance to the true signal, when one was supplied.
    pub error: Option<f64>,
    pub n: usize,
    /// Sample mean of sqrt(c_i), when the scales are known (simulation).
    pub s_bar: Option<f64>,
    pub converged: bool,
}

/// Draw n observations f_i = c_i (g o gamma_i) + e_i from the model.
pub fn simulate_observations(m: &ObservationModel, n: usize) -> Result<SimulatedObservations> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 observations, got {n}"
        )));
    }
    if m.c_mean <= 0.0 {
        return Err(Error::InvalidConfig("scale mean must be positive".into()));
    }
    let grid_n = m.g.len();
    let warps = random_warps_identity_mean(n, m.warp_amplitude, WARP_BASIS, grid_n, m.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed.wrapping_add(0x9e37_79b9));
    let mut functions = Vec::with_capacity(n);
    let mut scales = Vec::with_capacity(n);
    let mut translations = Vec::with_capacity(n);
    for gamma in &warps {
        let c = m.scale_law.sample(&mut rng);
        let e = m.noise_law.sample(&mut rng);
        let warped = warp_function(&m.g, gamma);
        let values: Vec<f64> = warped.values().iter().map(|v| c * v + e).collect();
        functions.push(SampledFunction::on_unit(values)?);
        scales.push(c);
        translations.push(e);
    }
    Ok(SimulatedObservations {
        functions,
        scales,
        translations,
        warps,
    })
}

/// Estimate the signal from observations: align the collection, average
/// the aligned functions, and undo the known scale and translation means.
pub fn estimate_signal(
    fs: &[SampledFunction],
    c_mean: f64,
    e_mean: f64,
    truth: Option<&SampledFunction>,
    cfg: &DpConfig,
) -> Result<EstimationReport> {
    estimate_signal_with(fs, c_mean, e_mean, truth, cfg, AlignOptions::default())
}

/// [`estimate_signal`] with an explicit stopping rule for the alignment.
pub fn estimate_signal_with(
    fs: &[SampledFunction],
    c_mean: f64,
    e_mean: f64,
    truth: Option<&SampledFunction>,
    cfg: &DpConfig,
    opts: AlignOptions,
) -> Result<EstimationReport> {
    if fs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if c_mean == 0.0 {
        return Err(Error::InvalidConfig("scale mean must be nonzero".into()));
    }
    let res = align_all_with(fs, cfg, opts)?;
    let len = fs[0].len();
    let n = fs.len() as f64;
    let mut mean = vec![0.0; len];
    for f in &res.aligned {
        for (m, v) in mean.iter_mut().zip(f.values()) {
            *m += v / n;
        }
    }
    let values: Vec<f64> = mean.iter().map(|v| (v - e_mean) / c_mean).collect();
    let (t0, t1) = fs[0].interval();
    let estimate = SampledFunction::new(t0, t1, values)?;
    let error = match truth {
        Some(g) => {
            if g.len() != len {
                return Err(Error::GridMismatch(g.len(), len));
            }
            let diff: Vec<f64> = estimate
                .values()
                .iter()
                .zip(g.values())
                .map(|(a, b)| a - b)
                .collect();
            Some(numerics::norm(&diff, 1.0 / (len - 1) as f64))
        }
        None => None,
    };
    Ok(EstimationReport {
        estimate,
        error,
        n: fs.len(),
        s_bar: None,
        converged: res.converged,
    })
}

/// Simulate and estimate at each sample size; returns (n, L2 error) pairs.
pub fn consistency_experiment(
    m: &ObservationModel,
    sizes: &[usize],
    cfg: &DpConfig,
) -> Result<Vec<(usize, f64)>> {
    if sizes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        // each trial owns a random stream derived from (seed, n)
        let trial = ObservationModel {
            seed: m.seed.wrapping_mul(31).wrapping_add(n as u64),
            ..m.clone()
        };
        let sim = simulate_observations(&trial, n)?;
        let report = estimate_signal(&sim.functions, m.c_mean, m.e_mean, Some(&m.g), cfg)?;
        let mut report = report;
        report.s_bar = Some(sim.scales.iter().map(|c| c.sqrt()).sum::<f64>() / n as f64);
        out.push((n, report.error.expect("truth supplied")));
    }
    Ok(out)
}
