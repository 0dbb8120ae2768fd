//! Metropolis-within-Gibbs for linear V and polynomial W: an exact Gaussian
//! update of Φ₁ | Φ₂ and a random-walk sweep over the entries of Φ₂.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::compare::ks_one_sample;
use super::rng::{complex_normal, stream, uniform};
use super::{integer_nu, CMat, McError, Mode, SampleBatch};
use crate::model::ModelSpec;
use crate::specfun::quad::{gauss_legendre, panels};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct McmcOptions {
    pub chains: usize,
    pub burn_in: usize,
    /// initial proposal scale, tuned during burn-in
    pub step: f64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        McmcOptions {
            chains: 4,
            burn_in: 2000,
            step: 0.5,
        }
    }
}

const TUNE_EVERY: usize = 50;
const DIVERGENCE_NORM: f64 = 1e12;

/// Σ_k w_k Tr((Φ₂Φ₂*)^k) for k ≥ 1.
fn trace_w(spec: &ModelSpec, p2: &CMat) -> f64 {
    let g = p2.gram();
    let mut power = g.clone();
    let mut acc = 0.0;
    for k in 1..=spec.w.degree() {
        if k > 1 {
            power = &power * &g;
        }
        acc += spec.w.coef(k) * power.trace().re;
    }
    acc
}

/// log of the conditional density of Φ₂ given Φ₁, up to a constant.
pub(crate) fn log_target_phi2(spec: &ModelSpec, p1: &CMat, p2: &CMat) -> f64 {
    let cross: f64 = p1.a.iter().zip(&p2.a).map(|(a, b)| (a.conj() * b).re).sum();
    -(spec.n as f64) * (trace_w(spec, p2) - 2.0 * spec.tau * cross)
}

pub(crate) fn accept_prob(log_old: f64, log_new: f64) -> f64 {
    (log_new - log_old).min(0.0).exp()
}

fn slope(spec: &ModelSpec) -> Result<f64, McError> {
    let c1 = spec.v.coef(1);
    if spec.v.degree() != 1 || !(c1 > 0.0) {
        return Err(McError::VNotLinear);
    }
    Ok(c1)
}

struct ChainOut {
    sv: Vec<Vec<f64>>,
    acceptance: f64,
    step: f64,
    autocorrelation: f64,
}

fn lag1(xs: &[f64]) -> f64 {
    if xs.len() < 3 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    if v == 0.0 {
        return 0.0;
    }
    xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / v
}

fn run_chain(
    spec: &ModelSpec,
    c1: f64,
    m: usize,
    seed: u64,
    chain: usize,
    count: usize,
    opts: &McmcOptions,
) -> Result<ChainOut, McError> {
    let n = spec.n;
    let nf = n as f64;
    let shift = spec.tau / c1;
    let var1 = 1.0 / (nf * c1);
    let mut p1 = CMat::zeros(n, m);
    let mut p2 = CMat::zeros(n, m);
    let mut step = opts.step;
    let (mut acc, mut tries) = (0usize, 0usize);
    let mut out = Vec::with_capacity(count);
    let mut traces = Vec::with_capacity(count);
    for sweep in 0..opts.burn_in + count {
        let mut rng = stream(seed, 2 + chain as u64, sweep as u64);
        for k in 0..n * m {
            p1.a[k] = p2.a[k] * shift + complex_normal(&mut rng, var1);
        }
        let mut cur = log_target_phi2(spec, &p1, &p2);
        for k in 0..n * m {
            let old = p2.a[k];
            p2.a[k] = old + complex_normal(&mut rng, step * step);
            let new = log_target_phi2(spec, &p1, &p2);
            if uniform(&mut rng) < accept_prob(cur, new) {
                cur = new;
                acc += 1;
            } else {
                p2.a[k] = old;
            }
            tries += 1;
        }
        let norm = p2.norm_sqr();
        if !norm.is_finite() || norm > DIVERGENCE_NORM || !cur.is_finite() {
            return Err(McError::Divergence { chain, sweep });
        }
        if sweep < opts.burn_in {
            if (sweep + 1) % TUNE_EVERY == 0 {
                let rate = acc as f64 / tries as f64;
                step *= (rate / 0.4).clamp(0.5, 2.0);
                acc = 0;
                tries = 0;
            }
            if sweep + 1 == opts.burn_in {
                acc = 0;
                tries = 0;
            }
            continue;
        }
        traces.push(p1.norm_sqr());
        out.push(p1.squared_singular_values());
    }
    Ok(ChainOut {
        sv: out,
        acceptance: if tries > 0 {
            acc as f64 / tries as f64
        } else {
            0.0
        },
        step,
        autocorrelation: lag1(&traces),
    })
}

/// `count` configurations split over `opts.chains` chains run in parallel;
/// chain c keeps count/chains samples, plus one when c < count % chains.
pub fn sample_mcmc(
    spec: &ModelSpec,
    count: usize,
    seed: u64,
    opts: &McmcOptions,
) -> Result<SampleBatch, McError> {
    let m = spec.n + integer_nu(spec)?;
    let c1 = slope(spec)?;
    if opts.chains == 0 || !(opts.step > 0.0) || !opts.step.is_finite() {
        return Err(McError::Option("need chains >= 1 and step > 0".into()));
    }
    if !(spec.w.leading() > 0.0) {
        return Err(McError::Option(
            "W must have a positive leading coefficient".into(),
        ));
    }
    let per: Vec<usize> = (0..opts.chains)
        .map(|c| count / opts.chains + usize::from(c < count % opts.chains))
        .collect();
    let outs: Vec<ChainOut> = per
        .par_iter()
        .enumerate()
        .map(|(c, &k)| run_chain(spec, c1, m, seed, c, k, opts))
        .collect::<Result<_, _>>()?;
    let acceptance: Vec<f64> = outs.iter().map(|o| o.acceptance).collect();
    let tuning_failed = acceptance
        .iter()
        .zip(&per)
        .any(|(&a, &k)| k > 0 && !(0.2..=0.6).contains(&a));
    Ok(SampleBatch {
        spec: Some(spec.clone()),
        mode: Mode::Mcmc,
        seed,
        chains: opts.chains,
        samples_per_chain: per,
        step: outs.iter().map(|o| o.step).collect(),
        autocorrelation: outs.iter().map(|o| o.autocorrelation).collect(),
        acceptance,
        tuning_failed,
        sv: outs.into_iter().flat_map(|o| o.sv).collect(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OneByOneReport {
    pub alpha: f64,
    pub tau: f64,
    /// max relative defect of π(x)T(x→y) = π(y)T(y→x) over random pairs
    pub balance_defect: f64,
    /// change of the conditional normalization under grid doubling
    pub normalization_change: f64,
    pub ks: f64,
    pub mean_chain: f64,
    pub mean_oracle: f64,
    /// batch-means standard error of the chain mean
    pub mean_se: f64,
    pub acceptance: f64,
    pub pass: bool,
}

/// Polar rule on the disc of radius `r_max` with `m` Gauss–Legendre panels
/// radially and `k` equispaced angles.
fn polar_rule(r_max: f64, m: usize, k: usize) -> Vec<(Complex64, f64)> {
    let breaks: Vec<f64> = (0..=m).map(|i| r_max * i as f64 / m as f64).collect();
    let (rs, ws) = panels(&breaks, 8);
    let mut out = Vec::with_capacity(rs.len() * k);
    for (r, w) in rs.iter().zip(&ws) {
        for j in 0..k {
            let th = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
            out.push((
                Complex64::from_polar(*r, th),
                w * r * 2.0 * std::f64::consts::PI / k as f64,
            ));
        }
    }
    out
}

/// 1×1 instance of V = x, W = y²/2 + αy at n = 1: detailed balance of the
/// Metropolis step against the densely normalized conditional of Φ₂, and the
/// chain's law of |Φ₁|² against its marginal from dense 2D integration.
pub fn one_by_one_check(
    alpha: f64,
    tau: f64,
    samples: usize,
    seed: u64,
) -> Result<OneByOneReport, McError> {
    let spec =
        ModelSpec::quadratic(0.0, tau, 1, alpha).map_err(|e| McError::Option(e.to_string()))?;
    let step = 0.8;
    let mut rng = stream(seed, u64::MAX, 0);
    let mut balance: f64 = 0.0;
    let mut norm_change: f64 = 0.0;
    let mut p1 = CMat::zeros(1, 1);
    let mut px = CMat::zeros(1, 1);
    let mut py = CMat::zeros(1, 1);
    let r_max = 4.0 + alpha.abs().sqrt() * 2.0 + 2.0 * tau.abs();
    for _ in 0..20 {
        p1.a[0] = complex_normal(&mut rng, 1.0);
        let z = |rule: &[(Complex64, f64)], p2: &mut CMat| -> f64 {
            rule.iter()
                .map(|&(b, w)| {
                    p2.a[0] = b;
                    w * log_target_phi2(&spec, &p1, p2).exp()
                })
                .sum()
        };
        let mut tmp = CMat::zeros(1, 1);
        let z1 = z(&polar_rule(r_max, 40, 64), &mut tmp);
        let z2 = z(&polar_rule(r_max, 80, 128), &mut tmp);
        norm_change = norm_change.max((z1 - z2).abs() / z2);
        for _ in 0..5 {
            px.a[0] = complex_normal(&mut rng, 1.0);
            py.a[0] = px.a[0] + complex_normal(&mut rng, step * step);
            let (lx, ly) = (
                log_target_phi2(&spec, &p1, &px),
                log_target_phi2(&spec, &p1, &py),
            );
            let q = (-(py.a[0] - px.a[0]).norm_sqr() / (step * step)).exp()
                / (std::f64::consts::PI * step * step);
            let fwd = lx.exp() / z2 * q * accept_prob(lx, ly);
            let bwd = ly.exp() / z2 * q * accept_prob(ly, lx);
            balance = balance.max((fwd - bwd).abs() / fwd.max(bwd));
        }
    }

    // density of s = |Φ₁|² ∝ e^{−s} ∫₀^∞ e^{−W(r)} (1/π)∫₀^π e^{2τ√(sr) cos θ} dθ dr
    let w = |r: f64| 0.5 * r * r + alpha * r;
    let r_top = 12.0 + 2.0 * (alpha - tau * tau).abs();
    let (rr, rw) = panels(
        &(0..=40)
            .map(|i| r_top * i as f64 / 40.0)
            .collect::<Vec<_>>(),
        8,
    );
    let (tx, tw) = gauss_legendre::<f64>(32);
    let thetas: Vec<(f64, f64)> = tx
        .iter()
        .zip(&tw)
        .map(|(x, w)| (0.5 * std::f64::consts::PI * (x + 1.0), 0.5 * w))
        .collect();
    let density = |s: f64| -> f64 {
        let mut acc = 0.0;
        for (r, wr) in rr.iter().zip(&rw) {
            let c = 2.0 * tau * (s * r).sqrt();
            let ang: f64 = thetas
                .iter()
                .map(|(t, wt)| wt * (c * t.cos() - s - w(*r)).exp())
                .sum();
            acc += wr * ang;
        }
        acc
    };
    let s_top = 2.0 * (10.0 + tau * tau * r_top);
    let s_breaks: Vec<f64> = (0..=600)
        .map(|i| s_top * (i as f64 / 600.0).powi(2))
        .collect();
    let mut cdf = vec![0.0; s_breaks.len()];
    let mut first = 0.0;
    let (gx, gw) = gauss_legendre::<f64>(8);
    for i in 1..s_breaks.len() {
        let (a, b) = (s_breaks[i - 1], s_breaks[i]);
        let h = 0.5 * (b - a);
        let (mut m0, mut m1) = (0.0, 0.0);
        for (x, wq) in gx.iter().zip(&gw) {
            let s = a + h * (x + 1.0);
            let d = density(s) * wq * h;
            m0 += d;
            m1 += d * s;
        }
        cdf[i] = cdf[i - 1] + m0;
        first += m1;
    }
    let total = cdf[cdf.len() - 1];
    let mean_oracle = first / total;
    let oracle = |s: f64| -> f64 {
        if s >= s_top {
            return 1.0;
        }
        let i = s_breaks.partition_point(|&b| b <= s).max(1);
        let (a, b) = (s_breaks[i - 1], s_breaks[i]);
        (cdf[i - 1] + (cdf[i] - cdf[i - 1]) * (s - a) / (b - a)) / total
    };

    let opts = McmcOptions {
        chains: 4,
        burn_in: 2000,
        step: 0.5,
    };
    let batch = sample_mcmc(&spec, samples, seed, &opts)?;
    let mut s: Vec<f64> = batch.sv.iter().map(|r| r[0]).collect();
    // batch means over contiguous blocks of each chain
    let blocks = 100;
    let mut means = Vec::new();
    let mut off = 0;
    for &k in &batch.samples_per_chain {
        let len = k / (blocks / batch.chains).max(1);
        for b in 0..(blocks / batch.chains) {
            let seg = &s[off + b * len..off + (b + 1) * len];
            means.push(seg.iter().sum::<f64>() / len as f64);
        }
        off += k;
    }
    let mean_chain = s.iter().sum::<f64>() / s.len() as f64;
    let bm = means.iter().sum::<f64>() / means.len() as f64;
    let mean_se = (means.iter().map(|m| (m - bm).powi(2)).sum::<f64>()
        / (means.len() * (means.len() - 1)) as f64)
        .sqrt();
    s.sort_by(f64::total_cmp);
    let ks = ks_one_sample(&s, oracle);
    let acceptance = batch.acceptance.iter().sum::<f64>() / batch.acceptance.len() as f64;
    let pass = balance < 1e-3
        && norm_change < 1e-3
        && ks < 0.01
        && (mean_chain - mean_oracle).abs() < 4.0 * mean_se;
    Ok(OneByOneReport {
        alpha,
        tau,
        balance_defect: balance,
        normalization_change: norm_change,
        ks,
        mean_chain,
        mean_oracle,
        mean_se,
        acceptance,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcsim::{ks_two_sample, wishart_reference, GaussianParams};

    #[test]
    fn one_by_one_balance_and_law() {
        for (alpha, tau) in [(0.0, 0.5), (-1.0, 1.0)] {
            let r = one_by_one_check(alpha, tau, 200_000, 17).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn acceptance_is_tuned_and_chains_are_stationary() {
        let s = ModelSpec::quadratic(0.0, 1.0, 4, -1.0).unwrap();
        let b = sample_mcmc(
            &s,
            20000,
            3,
            &McmcOptions {
                chains: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!b.tuning_failed, "{:?}", b.acceptance);
        // split-half within each chain
        let (c0, c1) = b.sv.split_at(b.samples_per_chain[0]);
        for c in [c0, c1] {
            let (h0, h1) = c.split_at(c.len() / 2);
            let pool = |h: &[Vec<f64>]| {
                let mut v: Vec<f64> = h.iter().flatten().copied().collect();
                v.sort_by(f64::total_cmp);
                v
            };
            let ks = ks_two_sample(&pool(h0), &pool(h1));
            assert!(ks < 0.03, "{ks}");
        }
    }

    #[test]
    fn large_alpha_decouples() {
        // Φ₂ is pinned near 0, so Φ₁ is close to a Wishart matrix with entry variance 1/n
        let s = ModelSpec::quadratic(0.0, 0.5, 3, 40.0).unwrap();
        let b = sample_mcmc(&s, 8000, 5, &McmcOptions::default()).unwrap();
        let w = wishart_reference(&GaussianParams::new(0, 3, 1.0, 1.0, 0.0).unwrap(), 8000, 6);
        let ks = ks_two_sample(&b.pooled(), &w.pooled());
        assert!(ks < 0.05, "{ks}");
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let s = ModelSpec::quadratic(1.0, 0.8, 3, 0.5).unwrap();
        let o = McmcOptions {
            chains: 3,
            burn_in: 100,
            step: 0.5,
        };
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sample_mcmc(&s, 200, 4, &o).unwrap());
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| sample_mcmc(&s, 200, 4, &o).unwrap());
        assert_eq!(a.sv, b.sv);
        assert_eq!(a.step, b.step);
    }

    #[test]
    fn rejects_invalid_input() {
        let s = ModelSpec::quadratic(0.5, 0.8, 3, 0.5).unwrap();
        assert!(matches!(
            sample_mcmc(&s, 10, 1, &McmcOptions::default()),
            Err(McError::Nu(_))
        ));
        let s = ModelSpec::quadratic(0.0, 0.8, 3, 0.5).unwrap();
        let bad = McmcOptions {
            step: 0.0,
            ..Default::default()
        };
        assert!(sample_mcmc(&s, 10, 1, &bad).is_err());
    }
}
