//! Alignment-quality criteria: least squares (leave-one-out), pairwise
//! Pearson correlation, and Sobolev least squares on first derivatives.
//! Each compares the aligned collection against the originals; lower ls
//! and sls and higher pc indicate better synchronization.

use crate::error::{Error, Result};
use crate::function::SampledFunction;
use crate::numerics;
use serde::Serialize;

const DEGENERATE_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub ls: f64,
    pub pc: f64,
    pub sls: f64,
    pub n: usize,
}

fn check_collections(
    original: &[SampledFunction],
    aligned: &[SampledFunction],
) -> Result<(usize, usize)> {
    if original.len() != aligned.len() {
        return Err(Error::GridMismatch(original.len(), aligned.len()));
    }
    if original.len() < 2 {
        return Err(Error::InvalidConfig(
            "metrics need at least 2 functions".into(),
        ));
    }
    let len = original[0].len();
    if original
        .iter()
        .chain(aligned.iter())
        .any(|f| f.len() != len)
    {
        return Err(Error::GridMismatch(len, 0));
    }
    Ok((original.len(), len))
}

/// Mean ratio of leave-one-out cross-sectional variance, aligned over
/// original.
pub fn least_squares(
    original: &[SampledFunction],
    aligned: &[SampledFunction],
) -> Result<f64> {
    let (n, len) = check_collections(original, aligned)?;
    let h = 1.0 / (len - 1) as f64;

    let variance_term = |fs: &[SampledFunction], i: usize| -> f64 {
        let mut loo_mean = vec![0.0; len];
        for (j, f) in fs.iter().enumerate() {
            if j == i {
                continue;
            }
            for (m, v) in loo_mean.iter_mut().zip(f.values()) {
                *m += v / (n - 1) as f64;
            }
        }
        let sq: Vec<f64> = fs[i]
            .values()
            .iter()
            .zip(&loo_mean)
            .map(|(v, m)| (v - m) * (v - m))
            .collect();
        numerics::trapz(&sq, h)
    };

    let mut total = 0.0;
    for i in 0..n {
        let denom = variance_term(original, i);
        if denom < DEGENERATE_EPS {
            return Err(Error::Degenerate(
                "least-squares denominator vanishes (originals identical)".into(),
            ));
        }
        total += variance_term(aligned, i) / denom;
    }
    Ok(total / n as f64)
}

/// Pearson correlation of two sample vectors; 0 by convention when either
/// is constant.
fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va < DEGENERATE_EPS || vb < DEGENERATE_EPS {
        return 0.0;
    }
    num / (va.sqrt() * vb.sqrt())
}

/// Ratio of summed pairwise Pearson correlations, aligned over original.
pub fn pairwise_correlation(
    original: &[SampledFunction],
    aligned: &[SampledFunction],
) -> Result<f64> {
    let (n, _) = check_collections(original, aligned)?;
    let sum_cc = |fs: &[SampledFunction]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += pearson(fs[i].values(), fs[j].values());
                }
            }
        }
        s
    };
    let denom = sum_cc(original);
    if denom.abs() < DEGENERATE_EPS {
        return Err(Error::Degenerate(
            "pairwise-correlation denominator vanishes".into(),
        ));
    }
    Ok(sum_cc(aligned) / denom)
}

/// Ratio of total cross-sectional variance of the first derivatives,
/// aligned over original.
pub fn sobolev_least_squares(
    original: &[SampledFunction],
    aligned: &[SampledFunction],
) -> Result<f64> {
    let (n, len) = check_collections(original, aligned)?;
    let h = 1.0 / (len - 1) as f64;

    let total_variance = |fs: &[SampledFunction]| -> f64 {
        let derivs: Vec<Vec<f64>> = fs
            .iter()
            .map(|f| numerics::derivative(f.values(), h))
            .collect();
        let mut mean = vec![0.0; len];
        for d in &derivs {
            for (m, v) in mean.iter_mut().zip(d) {
                *m += v / n as f64;
            }
        }
        derivs
            .iter()
            .map(|d| {
                let sq: Vec<f64> = d
                    .iter()
                    .zip(&mean)
                    .map(|(v, m)| (v - m) * (v - m))
                    .collect();
                numerics::trapz(&sq, h)
            })
            .sum()
    };

    let denom = total_variance(original);
    if denom < DEGENERATE_EPS {
        return Err(Error::Degenerate(
            "Sobolev least-squares denominator vanishes".into(),
        ));
    }
    Ok(total_variance(aligned) / denom)
}

/// All three criteria in one report.
pub fn metric_report(
    original: &[SampledFunction],
    aligned: &[SampledFunction],
) -> Result<MetricReport> {
    Ok(MetricReport {
        ls: least_squares(original, aligned)?,
        pc: pairwise_correlation(original, aligned)?,
        sls: sobolev_least_squares(original, aligned)?,
        n: original.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::unit_grid;

    fn f(values: Vec<f64>) -> SampledFunction {
        SampledFunction::on_unit(values).unwrap()
    }

    fn sample_set() -> Vec<SampledFunction> {
        (0..4)
            .map(|i| {
                f(unit_grid(51)
                    .iter()
                    .map(|t| ((2.0 + i as f64) * t * std::f64::consts::PI).sin() + 0.1 * i as f64)
                    .collect())
            })
            .collect()
    }

    #[test]
    fn identity_alignment_scores_one() {
        let fs = sample_set();
        assert!((least_squares(&fs, &fs).unwrap() - 1.0).abs() < 1e-12);
        assert!((pairwise_correlation(&fs, &fs).unwrap() - 1.0).abs() < 1e-12);
        assert!((sobolev_least_squares(&fs, &fs).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perfectly_collapsed_alignment_scores_zero() {
        let fs = sample_set();
        let shape = fs[0].clone();
        let collapsed = vec![shape; fs.len()];
        // exact zero up to the rounding of the collapsed sample mean
        assert!(least_squares(&fs, &collapsed).unwrap() < 1e-25);
        assert!(sobolev_least_squares(&fs, &collapsed).unwrap() < 1e-25);
        // identical shapes: every pairwise correlation is 1, so the
        // numerator is exactly n(n-1)
        let pc = pairwise_correlation(&fs, &collapsed).unwrap();
        let mut denom = 0.0;
        for i in 0..fs.len() {
            for j in 0..fs.len() {
                if i != j {
                    denom += pearson(fs[i].values(), fs[j].values());
                }
            }
        }
        assert!((pc - 12.0 / denom).abs() < 1e-12);
        assert_eq!(pairwise_correlation(&fs, &fs).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_inputs_error() {
        let constant = vec![f(vec![2.0; 51]); 3];
        let fs = sample_set()[..3].to_vec();
        assert!(least_squares(&constant, &fs).is_err());
        assert!(sobolev_least_squares(&constant, &fs).is_err());
    }

    #[test]
    fn constant_function_contributes_zero_correlation() {
        let a = f(unit_grid(51));
        let c = f(vec![3.0; 51]);
        assert_eq!(pearson(c.values(), a.values()), 0.0);
    }

    #[test]
    fn shift_invariance_of_ls_and_sls() {
        let fs = sample_set();
        let aligned: Vec<SampledFunction> = sample_set()
            .into_iter()
            .rev()
            .collect();
        let shift = |set: &[SampledFunction]| -> Vec<SampledFunction> {
            set.iter()
                .map(|g| f(g.values().iter().map(|v| v + 7.0).collect()))
                .collect()
        };
        let ls0 = least_squares(&fs, &aligned).unwrap();
        let ls1 = least_squares(&shift(&fs), &shift(&aligned)).unwrap();
        assert!((ls0 - ls1).abs() < 1e-10);
        let sls0 = sobolev_least_squares(&fs, &aligned).unwrap();
        let sls1 = sobolev_least_squares(&shift(&fs), &shift(&aligned)).unwrap();
        assert!((sls0 - sls1).abs() < 1e-10);
    }

    #[test]
    fn pc_invariant_to_uniform_affine_map() {
        let fs = sample_set();
        let aligned: Vec<SampledFunction> = sample_set().into_iter().rev().collect();
        let map = |set: &[SampledFunction]| -> Vec<SampledFunction> {
            set.iter()
                .map(|g| f(g.values().iter().map(|v| 2.5 * v - 1.0).collect()))
                .collect()
        };
        let pc0 = pairwise_correlation(&fs, &aligned).unwrap();
        let pc1 = pairwise_correlation(&map(&fs), &map(&aligned)).unwrap();
        assert!((pc0 - pc1).abs() < 1e-10);
    }
}
