//! Kolmogorov–Smirnov distances and the comparison of sampled spectra with
//! the one- and two-point functions and gap probabilities of the kernel.

use rayon::prelude::*;
use serde::Serialize;

use super::{McError, SampleBatch};
use crate::kernel::{gap_probability, GapRequest, Kernel};
use crate::specfun::quad::{gauss_legendre, panels};

/// sup |F_emp − F| for sorted `xs`.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// sup |F_a − F_b| for sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// CDF of ρ_n = K_n(x,x)/n tabulated at panel breaks, normalized by its total.
pub struct KernelCdf {
    breaks: Vec<f64>,
    values: Vec<f64>,
    pub mass: f64,
}

impl KernelCdf {
    pub fn new(ke: &dyn Kernel) -> Result<Self, McError> {
        let x_max = ke.x_max();
        let mut breaks = vec![0.0];
        breaks.extend(
            (0..=30)
                .rev()
                .map(|k| 2f64.powi(-k))
                .filter(|&b| b < x_max.min(1.0)),
        );
        let mut b = breaks[breaks.len() - 1].max(1.0 / 1024.0);
        let h = x_max / 2000.0;
        while b + h < x_max {
            b += h;
            breaks.push(b);
        }
        breaks.push(x_max);
        breaks.dedup();
        let (gx, gw) = gauss_legendre::<f64>(8);
        let pieces: Vec<f64> = breaks
            .par_windows(2)
            .map(|w| {
                let half = 0.5 * (w[1] - w[0]);
                gx.iter()
                    .zip(&gw)
                    .map(|(x, wq)| ke.density(w[0] + half * (x + 1.0)).map(|d| d * wq * half))
                    .sum::<Result<f64, _>>()
            })
            .collect::<Result<_, _>>()?;
        let mut values = vec![0.0; breaks.len()];
        for (i, p) in pieces.iter().enumerate() {
            values[i + 1] = values[i] + p;
        }
        let mass = values[values.len() - 1];
        Ok(KernelCdf {
            breaks,
            values,
            mass,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let last = self.breaks.len() - 1;
        if x >= self.breaks[last] {
            return 1.0;
        }
        let i = self.breaks.partition_point(|&b| b <= x).max(1);
        let (a, b) = (self.breaks[i - 1], self.breaks[i]);
        (self.values[i - 1] + (self.values[i] - self.values[i - 1]) * (x - a) / (b - a)) / self.mass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    /// bin edges taken from quantiles of the pooled sample
    pub edges: Vec<f64>,
    /// (bin a, bin b, empirical pair count, kernel prediction, standard error)
    pub cells: Vec<(usize, usize, f64, f64, f64)>,
    pub max_z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapCheck {
    pub s: f64,
    /// empirical P(min > s)
    pub empirical: f64,
    pub kernel: f64,
    pub se: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub samples: usize,
    pub ks: f64,
    pub kernel_mass: f64,
    pub pair: PairCheck,
    pub gaps: Vec<GapCheck>,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    sorted[((sorted.len() - 1) as f64 * p).round() as usize]
}

fn pair_check(batch: &SampleBatch, pooled: &[f64], ke: &dyn Kernel) -> Result<PairCheck, McError> {
    let edges = vec![
        0.0,
        quantile(pooled, 0.25),
        quantile(pooled, 0.5),
        quantile(pooled, 0.75),
        ke.x_max(),
    ];
    let bins = edges.len() - 1;
    const SUB: usize = 16;
    let mut breaks = vec![0.0];
    for w in edges.windows(2) {
        breaks.extend((1..=SUB).map(|i| w[0] + (w[1] - w[0]) * i as f64 / SUB as f64));
    }
    let (nodes, weights) = panels(&breaks, 8);
    let k = ke.matrix(&nodes, &nodes)?;
    let per = nodes.len() / bins;
    let count = batch.sv.len() as f64;
    let mut cells = Vec::new();
    let mut max_z: f64 = 0.0;
    for a in 0..bins {
        for b in a..bins {
            let mut pred = 0.0;
            for i in a * per..(a + 1) * per {
                for j in b * per..(b + 1) * per {
                    pred += weights[i] * weights[j] * (k[i][i] * k[j][j] - k[i][j] * k[j][i]);
                }
            }
            let vals: Vec<f64> = batch
                .sv
                .iter()
                .map(|row| {
                    let ca = row
                        .iter()
                        .filter(|&&x| x >= edges[a] && x < edges[a + 1])
                        .count() as f64;
                    let cb = row
                        .iter()
                        .filter(|&&x| x >= edges[b] && x < edges[b + 1])
                        .count() as f64;
                    if a == b {
                        ca * (ca - 1.0)
                    } else {
                        ca * cb
                    }
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / count;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
            let se = (var / count).sqrt();
            if se > 0.0 {
                max_z = max_z.max((mean - pred).abs() / se);
            }
            cells.push((a, b, mean, pred, se));
        }
    }
    Ok(PairCheck {
        edges,
        cells,
        max_z,
    })
}

/// KS distance of the pooled sample to ∫-normalized K_n(x,x)/n, binned pair
/// counts against ρ₂ = K(x,x)K(y,y) − K(x,y)K(y,x), and P(min > s) against
/// det(I − K|_[0,s]).
pub fn compare_to_kernel(batch: &SampleBatch, ke: &dyn Kernel) -> Result<CompareReport, McError> {
    if batch.spec.as_ref() != Some(ke.spec()) {
        return Err(McError::SpecMismatch);
    }
    let pooled = batch.pooled();
    let cdf = KernelCdf::new(ke)?;
    let ks = ks_one_sample(&pooled, |x| cdf.eval(x));
    let pair = pair_check(batch, &pooled, ke)?;
    let mut mins: Vec<f64> = batch.sv.iter().map(|r| r[0]).collect();
    mins.sort_by(f64::total_cmp);
    let count = mins.len() as f64;
    let mut gaps = Vec::new();
    for p in [0.1, 0.3, 0.6] {
        let s = quantile(&mins, p);
        if !(s > 0.0) {
            continue;
        }
        let empirical = mins.iter().filter(|&&m| m > s).count() as f64 / count;
        let kernel = gap_probability(ke, GapRequest::new(0.0, s, 32)?)?.e0;
        let se = (empirical * (1.0 - empirical) / count).sqrt();
        gaps.push(GapCheck {
            s,
            empirical,
            kernel,
            se,
        });
    }
    Ok(CompareReport {
        samples: batch.sv.len(),
        ks,
        kernel_mass: cdf.mass,
        pair,
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_statistics() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_one_sample(&xs, |x| x) < 1e-3 + 1e-12);
        let ys: Vec<f64> = xs.iter().map(|x| x * 0.5).collect();
        assert!((ks_two_sample(&xs, &ys) - 0.5).abs() < 2e-3);
        assert_eq!(ks_two_sample(&xs, &xs), 0.0);
    }
}
