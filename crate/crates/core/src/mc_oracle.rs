//! Monte Carlo and exhaustive-enumeration oracles.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) keyed by the
//! 64-bit seed in little-endian order with the remaining 24 key bytes zero.
//! Each warden and hypothesis owns a stream id, and trial `t` starts at word
//! position `t * block`, where `block` is a fixed per-trial word budget. A
//! trial's draws therefore depend only on `(seed, stream, trial)`, so any
//! partition of the trials across workers gives bit-identical estimates.
//!
//! Uniforms are `(u64 >> 11) * 2^-53`; normals use Box-Muller.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fusion::majority_threshold;
use crate::local_detect::WardenProfile;
use crate::par::{map_range, Exec};
use crate::rate::{sinr, LinkBudget};

const CHUNK: usize = 1 << 15;
const SHARED_STREAM: u64 = 1 << 40;
const RATE_STREAM: u64 = 1 << 41;

/// How jamming power is drawn across wardens within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JammingMode {
    /// Each warden sees its own uniform draw.
    IndependentPerWarden,
    /// One physical draw common to all wardens.
    SharedRealization,
}

/// Simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
    pub jamming: JammingMode,
    /// Average `n` noisy complex samples instead of using the mean energy.
    pub finite_n: Option<usize>,
    pub exec: Exec,
}

impl McConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        McConfig {
            trials,
            seed,
            jamming: JammingMode::IndependentPerWarden,
            finite_n: None,
            exec: Exec::default(),
        }
    }

    pub fn with_jamming(mut self, jamming: JammingMode) -> Self {
        self.jamming = jamming;
        self
    }

    pub fn with_finite_n(mut self, n: usize) -> Self {
        self.finite_n = Some(n);
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

/// Empirical local error rates with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEstimate {
    pub p_fa: f64,
    pub p_md: f64,
    pub se_fa: f64,
    pub se_md: f64,
}

/// Empirical system error rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepEstimate {
    pub p_dep: f64,
    pub stderr: f64,
    pub p_fa: f64,
    pub p_md: f64,
}

/// Sample mean of the instantaneous rate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Placement of the jamming fraction `xi` in rate simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateSampling {
    /// Independent uniform draws.
    Plain,
    /// One jittered draw per equal-width stratum, `xi_i = (i + u_i) / n`.
    Stratified,
}

/// Standard error of a binomial proportion.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

pub(crate) fn stream_rng(seed: u64, stream: u64, word_pos: u128) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut r = ChaCha8Rng::from_seed(key);
    r.set_stream(stream);
    r.set_word_pos(word_pos);
    r
}

pub(crate) fn uniform(r: &mut ChaCha8Rng) -> f64 {
    (r.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals.
fn normal_pair(r: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = 1.0 - uniform(r);
    let u2 = uniform(r);
    let rad = (-2.0 * u1.ln()).sqrt();
    let th = std::f64::consts::TAU * u2;
    (rad * th.cos(), rad * th.sin())
}

/// Circularly symmetric complex normal with unit variance, as `(re, im)`.
fn complex_normal(r: &mut ChaCha8Rng) -> (f64, f64) {
    let (a, b) = normal_pair(r);
    (a * std::f64::consts::FRAC_1_SQRT_2, b * std::f64::consts::FRAC_1_SQRT_2)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Hypothesis {
    H0 = 0,
    H1 = 1,
}

struct Simulator<'a> {
    profiles: &'a [WardenProfile],
    cfg: &'a McConfig,
    hyp: Hypothesis,
}

impl Simulator<'_> {
    /// 32-bit words one trial consumes on a warden stream.
    fn block(&self) -> u128 {
        2 + 12 * self.cfg.finite_n.unwrap_or(0) as u128
    }

    /// Calls `visit` with every warden's statistic for trials `t0..t1`.
    fn run(&self, t0: usize, t1: usize, mut visit: impl FnMut(&[f64])) {
        let h = self.hyp as u64;
        let block = self.block();
        let mut streams: Vec<ChaCha8Rng> = (0..self.profiles.len())
            .map(|m| stream_rng(self.cfg.seed, 2 * m as u64 + h, t0 as u128 * block))
            .collect();
        let mut shared = stream_rng(self.cfg.seed, SHARED_STREAM + h, t0 as u128 * 2);
        let mut y = vec![0.0; self.profiles.len()];
        for _ in t0..t1 {
            let common = uniform(&mut shared);
            for (m, w) in self.profiles.iter().enumerate() {
                let r = &mut streams[m];
                let own = uniform(r);
                let frac = match self.cfg.jamming {
                    JammingMode::IndependentPerWarden => own,
                    JammingMode::SharedRealization => common,
                };
                let jam = frac * w.p_j_max() * w.a_j();
                let covert = match self.hyp {
                    Hypothesis::H0 => 0.0,
                    Hypothesis::H1 => w.p_c() * w.a_c(),
                };
                y[m] = match self.cfg.finite_n {
                    None => jam + covert + w.sigma_sq(),
                    Some(n) => noisy_energy(r, n, covert, jam, w.sigma_sq()),
                };
            }
            visit(&y);
        }
    }

    fn chunked<T: Send>(&self, f: impl Fn(usize, usize) -> T + Sync + Send) -> Vec<T> {
        let trials = self.cfg.trials;
        map_range(self.cfg.exec, trials.div_ceil(CHUNK), |c| {
            f(c * CHUNK, ((c + 1) * CHUNK).min(trials))
        })
    }
}

/// Mean of `n` samples of `|sqrt(P_C A_C) s + sqrt(P_J A_J) j + sigma v|^2`.
fn noisy_energy(r: &mut ChaCha8Rng, n: usize, covert: f64, jam: f64, sigma_sq: f64) -> f64 {
    let (a, b, c) = (covert.sqrt(), jam.sqrt(), sigma_sq.sqrt());
    let mut acc = 0.0;
    for _ in 0..n {
        let s = complex_normal(r);
        let j = complex_normal(r);
        let v = complex_normal(r);
        let re = a * s.0 + b * j.0 + c * v.0;
        let im = a * s.1 + b * j.1 + c * v.1;
        acc += re * re + im * im;
    }
    acc / n as f64
}

fn statistics(profile: &WardenProfile, cfg: &McConfig, hyp: Hypothesis) -> Vec<f64> {
    let one = std::slice::from_ref(profile);
    let sim = Simulator { profiles: one, cfg, hyp };
    let mut out: Vec<f64> = sim
        .chunked(|t0, t1| {
            let mut v = Vec::with_capacity(t1 - t0);
            sim.run(t0, t1, |y| v.push(y[0]));
            v
        })
        .concat();
    out.sort_by(f64::total_cmp);
    out
}

/// Local error rates at several thresholds from one set of draws.
pub fn mc_local_many(profile: &WardenProfile, taus: &[f64], cfg: &McConfig) -> Vec<LocalEstimate> {
    let n = cfg.trials;
    let y0 = statistics(profile, cfg, Hypothesis::H0);
    let y1 = statistics(profile, cfg, Hypothesis::H1);
    taus.iter()
        .map(|&tau| {
            let p_fa = (n - y0.partition_point(|&y| y <= tau)) as f64 / n as f64;
            let p_md = y1.partition_point(|&y| y <= tau) as f64 / n as f64;
            LocalEstimate {
                p_fa,
                p_md,
                se_fa: binomial_stderr(p_fa, n),
                se_md: binomial_stderr(p_md, n),
            }
        })
        .collect()
}

/// Local error rates of one warden at threshold `tau`.
pub fn mc_local(profile: &WardenProfile, tau: f64, cfg: &McConfig) -> LocalEstimate {
    mc_local_many(profile, &[tau], cfg)[0]
}

/// Fused error rates at several thresholds from one set of draws.
pub fn mc_system_dep_many(profiles: &[WardenProfile], taus: &[f64], cfg: &McConfig) -> Result<Vec<DepEstimate>> {
    if profiles.is_empty() {
        return Err(Error::EmptyWardenSet);
    }
    let t = majority_threshold(profiles.len());
    let count = |hyp: Hypothesis| -> Vec<usize> {
        let sim = Simulator { profiles, cfg, hyp };
        let parts = sim.chunked(|t0, t1| {
            let mut hits = vec![0usize; taus.len()];
            sim.run(t0, t1, |y| {
                for (h, &tau) in hits.iter_mut().zip(taus) {
                    let raised = y.iter().filter(|&&v| v > tau).count();
                    let error = match hyp {
                        Hypothesis::H0 => raised >= t,
                        Hypothesis::H1 => raised < t,
                    };
                    *h += error as usize;
                }
            });
            hits
        });
        parts.into_iter().fold(vec![0; taus.len()], |mut acc, p| {
            acc.iter_mut().zip(p).for_each(|(a, b)| *a += b);
            acc
        })
    };
    let fa = count(Hypothesis::H0);
    let md = count(Hypothesis::H1);
    let n = cfg.trials;
    Ok(fa
        .into_iter()
        .zip(md)
        .map(|(f, m)| {
            let p_fa = f as f64 / n as f64;
            let p_md = m as f64 / n as f64;
            DepEstimate {
                p_dep: p_fa + p_md,
                stderr: binomial_stderr(p_fa, n).hypot(binomial_stderr(p_md, n)),
                p_fa,
                p_md,
            }
        })
        .collect())
}

/// Fused error rate at threshold `tau`.
pub fn mc_system_dep(profiles: &[WardenProfile], tau: f64, cfg: &McConfig) -> Result<DepEstimate> {
    Ok(mc_system_dep_many(profiles, &[tau], cfg)?[0])
}

/// Exact `(P_FA, P_MD)` by summing over all `2^M` local decision vectors.
pub fn enum_fusion(p_fa: &[f64], p_md: &[f64], t: usize) -> Result<(f64, f64)> {
    let m = p_fa.len();
    if p_md.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            found: p_md.len(),
        });
    }
    if m > 20 {
        return Err(Error::TooManyWardens(m));
    }
    let (mut fa, mut md) = (0.0, 0.0);
    for mask in 0u32..(1u32 << m) {
        let raised = mask.count_ones() as usize;
        let mut w0 = 1.0;
        let mut w1 = 1.0;
        for j in 0..m {
            let on = mask >> j & 1 == 1;
            w0 *= if on { p_fa[j] } else { 1.0 - p_fa[j] };
            w1 *= if on { 1.0 - p_md[j] } else { p_md[j] };
        }
        if raised >= t {
            fa += w0;
        } else {
            md += w1;
        }
    }
    Ok((fa, md))
}

/// Monte Carlo mean of `log2(1 + SINR(xi))` over `xi ~ U[0, 1]`.
///
/// The reported standard error is the plain-sampling one, which bounds the
/// stratified estimator's error from above.
pub fn mc_avg_rate(budget: &LinkBudget, samples: usize, seed: u64, sampling: RateSampling, exec: Exec) -> RateEstimate {
    let parts = map_range(exec, samples.div_ceil(CHUNK), |c| {
        let (t0, t1) = (c * CHUNK, ((c + 1) * CHUNK).min(samples));
        let mut r = stream_rng(seed, RATE_STREAM, t0 as u128 * 2);
        let (mut s1, mut s2) = (0.0, 0.0);
        for i in t0..t1 {
            let u = uniform(&mut r);
            let xi = match sampling {
                RateSampling::Plain => u,
                RateSampling::Stratified => (i as f64 + u) / samples as f64,
            };
            let f = sinr(budget, xi).ln_1p() / std::f64::consts::LN_2;
            s1 += f;
            s2 += f * f;
        }
        (s1, s2)
    });
    let (s1, s2) = parts.into_iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    RateEstimate {
        mean,
        stderr: (var / n).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{dep_exact, dep_parts};
    use crate::local_detect::{make_profile, p_fa, p_md};

    fn reference() -> WardenProfile {
        make_profile(1.0, 1.0, 1.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn local_extremes_are_exact() {
        let cfg = McConfig::new(10_000, 3);
        let e = mc_local(&reference(), 0.0, &cfg);
        assert_eq!(e.p_fa, 1.0);
        let e = mc_local(&reference(), 1e9, &cfg);
        assert_eq!(e.p_md, 1.0);
    }

    #[test]
    fn local_midpoints() {
        let cfg = McConfig::new(1_000_000, 11);
        let w = reference();
        let e = mc_local_many(&w, &[2.0, 3.0], &cfg);
        let se = binomial_stderr(0.5, cfg.trials);
        assert!((e[0].p_fa - 0.5).abs() <= 3.0 * se);
        assert!((e[1].p_md - 0.5).abs() <= 3.0 * se);
        assert_eq!(p_fa(2.0, &w), 0.5);
        assert_eq!(p_md(3.0, &w), 0.5);
    }

    #[test]
    fn partition_does_not_change_estimates() {
        let w = reference();
        let a = mc_local(&w, 2.3, &McConfig::new(100_000, 5).with_exec(Exec::Sequential));
        let b = mc_local(&w, 2.3, &McConfig::new(100_000, 5).with_exec(Exec::Parallel));
        assert_eq!(a, b);
        let ps = vec![w; 3];
        let a = mc_system_dep(&ps, 2.3, &McConfig::new(50_000, 5).with_exec(Exec::Sequential)).unwrap();
        let b = mc_system_dep(&ps, 2.3, &McConfig::new(50_000, 5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn system_estimate_tracks_exact_value() {
        let ps = vec![
            make_profile(0.4, 1.0, 1.0, 1.0, 1.5).unwrap(),
            make_profile(1.2, 0.7, 1.0, 1.0, 1.5).unwrap(),
            make_profile(0.9, 1.3, 1.0, 1.0, 1.5).unwrap(),
            make_profile(0.2, 0.9, 1.0, 1.0, 1.5).unwrap(),
            make_profile(1.5, 1.1, 1.0, 1.0, 1.5).unwrap(),
        ];
        let cfg = McConfig::new(200_000, 9);
        for tau in [1.3, 1.8, 2.2, 2.6] {
            let (fa, md) = dep_parts(tau, &ps).unwrap();
            let se = binomial_stderr(fa, cfg.trials).hypot(binomial_stderr(md, cfg.trials));
            let e = mc_system_dep(&ps, tau, &cfg).unwrap();
            assert!((e.p_dep - dep_exact(tau, &ps).unwrap()).abs() <= 4.0 * se, "tau={tau}");
        }
    }

    #[test]
    fn shared_mode_matches_independent_for_one_warden() {
        let w = [reference()];
        let cfg = McConfig::new(100_000, 21);
        let a = mc_system_dep(&w, 2.4, &cfg).unwrap();
        let b = mc_system_dep(&w, 2.4, &cfg.clone().with_jamming(JammingMode::SharedRealization)).unwrap();
        let se = a.stderr.hypot(b.stderr);
        assert!((a.p_dep - b.p_dep).abs() <= 4.0 * se);
    }

    #[test]
    fn finite_n_converges_to_mean_energy() {
        let w = reference();
        let ideal = mc_local(&w, 2.5, &McConfig::new(20_000, 1));
        let noisy = mc_local(&w, 2.5, &McConfig::new(20_000, 1).with_finite_n(4000));
        assert!((ideal.p_fa - noisy.p_fa).abs() < 0.03);
        assert!((ideal.p_md - noisy.p_md).abs() < 0.03);
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enum_fusion(&[0.3], &[0.4], 1).unwrap(), (0.3, 0.4));
        assert_eq!(enum_fusion(&[0.0; 4], &[0.2; 4], 3).unwrap().0, 0.0);
        assert!(matches!(enum_fusion(&[0.1; 21], &[0.1; 21], 11), Err(Error::TooManyWardens(21))));
        let ps: Vec<_> = (0..10)
            .map(|i| make_profile(0.1 * i as f64, 0.5 + 0.1 * i as f64, 1.0, 1.0, 1.0).unwrap())
            .collect();
        let tau = 1.6;
        let fa: Vec<f64> = ps.iter().map(|w| p_fa(tau, w)).collect();
        let md: Vec<f64> = ps.iter().map(|w| p_md(tau, w)).collect();
        let (a, b) = enum_fusion(&fa, &md, majority_threshold(10)).unwrap();
        let (x, y) = dep_parts(tau, &ps).unwrap();
        assert!((a - x).abs() < 1e-12 && (b - y).abs() < 1e-12);
    }

    #[test]
    fn rate_estimates_are_deterministic() {
        let b = LinkBudget { s: 1.0, i: 2.0, sigma_sq: 0.5 };
        let a = mc_avg_rate(&b, 100_000, 4, RateSampling::Plain, Exec::Sequential);
        let c = mc_avg_rate(&b, 100_000, 4, RateSampling::Plain, Exec::Parallel);
        assert_eq!(a, c);
    }
}
