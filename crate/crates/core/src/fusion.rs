//! Majority-vote fusion of independent local decisions.
//!
//! The number of alarming (or detecting) wardens is Poisson-binomial. Its
//! pmf is extracted from the product generating function
//! `prod_m [(1 - p_m) + p_m z]`, either by direct polynomial multiplication
//! (the production path) or through elementary symmetric polynomials.

use crate::error::{Error, Result};
use crate::local_detect::{p_fa, p_md, WardenProfile};

/// Event counted by a generating function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// Counts false alarms under H0; probabilities are `P_fa`.
    Alarm,
    /// Counts detections under H1; probabilities are `1 - P_md`.
    Detect,
}

/// Which side of the majority threshold to sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// `sum_{i >= T}`.
    Upper,
    /// `sum_{i <= T-1}`.
    Lower,
}

/// Probabilities that exactly `i` wardens raise the counted event.
#[derive(Debug, Clone, PartialEq)]
pub struct PgfCoefficients {
    coeffs: Vec<f64>,
}

impl PgfCoefficients {
    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }
    /// Number of wardens `M`.
    pub fn wardens(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Strict-majority vote count `floor(M/2) + 1`.
pub fn majority_threshold(m: usize) -> usize {
    m / 2 + 1
}

/// Binomial coefficient as a float; zero outside `0 <= k <= n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Elementary symmetric polynomials `xi_0..xi_M` via the product recurrence.
pub fn esp(x: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; x.len() + 1];
    e[0] = 1.0;
    for (m, &v) in x.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

fn check_probs(p: &[f64]) -> Result<()> {
    for (index, &value) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ProbOutOfRange { index, value });
        }
    }
    Ok(())
}

/// Poisson-binomial pmf by multiplying out the linear factors.
pub fn pgf_coeffs(p: &[f64], _sense: Sense) -> Result<PgfCoefficients> {
    check_probs(p)?;
    Ok(PgfCoefficients {
        coeffs: poisson_binomial(p.iter().copied(), p.len()),
    })
}

fn poisson_binomial(p: impl Iterator<Item = f64>, m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m + 1];
    c[0] = 1.0;
    for (j, pj) in p.enumerate() {
        let q = 1.0 - pj;
        for i in (1..=j + 1).rev() {
            c[i] = c[i] * q + c[i - 1] * pj;
        }
        c[0] *= q;
    }
    c
}

/// Poisson-binomial pmf through `e_i = sum_{k>=i} (-1)^(k+i) C(k,i) xi_k(p)`.
///
/// Alternating sums lose accuracy as `M` grows; use [`pgf_coeffs`] in
/// production.
pub fn pgf_coeffs_via_esp(p: &[f64]) -> Result<PgfCoefficients> {
    check_probs(p)?;
    Ok(PgfCoefficients {
        coeffs: coeffs_from_esp(&esp(p)),
    })
}

pub(crate) fn coeffs_from_esp(xi: &[f64]) -> Vec<f64> {
    let m = xi.len() - 1;
    (0..=m)
        .map(|i| {
            let v: f64 = (i..=m)
                .map(|k| sign(k + i) * binomial(k, i) * xi[k])
                .sum();
            v.max(0.0)
        })
        .collect()
}

pub(crate) fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sum of pmf entries on one side of the vote threshold `t`.
pub fn majority_tail(coeffs: &PgfCoefficients, t: usize, tail: Tail) -> Result<f64> {
    let m = coeffs.wardens();
    if t > m + 1 {
        return Err(Error::IndexOutOfRange { index: t, max: m + 1 });
    }
    let c = &coeffs.coeffs;
    Ok(match tail {
        Tail::Upper => c[t..].iter().sum(),
        Tail::Lower => c[..t].iter().sum(),
    })
}

/// System false-alarm and miss-detection probabilities `(P_FA, P_MD)`.
pub fn dep_parts(tau: f64, profiles: &[WardenProfile]) -> Result<(f64, f64)> {
    let m = profiles.len();
    if m == 0 {
        return Err(Error::EmptyWardenSet);
    }
    let t = majority_threshold(m);
    let fa = poisson_binomial(profiles.iter().map(|w| p_fa(tau, w)), m);
    let det = poisson_binomial(profiles.iter().map(|w| 1.0 - p_md(tau, w)), m);
    Ok((fa[t..].iter().sum(), det[..t].iter().sum()))
}

/// System detection error probability `P_FA + P_MD` under strict majority.
pub fn dep_exact(tau: f64, profiles: &[WardenProfile]) -> Result<f64> {
    dep_parts(tau, profiles).map(|(fa, md)| fa + md)
}

/// `xi_k(a - c 1)` expanded through unshifted polynomials of `a`.
pub fn shifted_esp(a: &[f64], c: f64, k: usize) -> Result<f64> {
    let m = a.len();
    if k > m {
        return Err(Error::IndexOutOfRange { index: k, max: m });
    }
    Ok(shifted_esp_from(&esp(a), m, c, k))
}

/// Shift identity given precomputed `xi(a)` of a length-`m` vector.
pub(crate) fn shifted_esp_from(xi: &[f64], m: usize, c: f64, k: usize) -> f64 {
    let mut pow = 1.0;
    let mut total = 0.0;
    for r in 0..=k {
        total += pow * binomial(m - k + r, r) * xi[k - r];
        pow *= -c;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_detect::make_profile;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    // Brute-force pmf over all 2^M outcome vectors.
    fn enumerate_pmf(p: &[f64]) -> Vec<f64> {
        let m = p.len();
        let mut pmf = vec![0.0; m + 1];
        for mask in 0u32..(1 << m) {
            let mut w = 1.0;
            for (j, &pj) in p.iter().enumerate() {
                w *= if mask >> j & 1 == 1 { pj } else { 1.0 - pj };
            }
            pmf[mask.count_ones() as usize] += w;
        }
        pmf
    }

    #[test]
    fn esp_small_cases() {
        assert_eq!(esp(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
        assert_eq!(esp(&[]), vec![1.0]);
    }

    #[test]
    fn esp_matches_subset_enumeration() {
        let x = [0.3, -1.2, 2.5, 0.7, 1.1, -0.4, 0.9, 1.6];
        let e = esp(&x);
        let mut brute = [0.0; 9];
        for mask in 0u32..256 {
            let prod: f64 = (0..8).filter(|j| mask >> j & 1 == 1).map(|j| x[j]).product();
            brute[mask.count_ones() as usize] += prod;
        }
        assert!(close(&e, &brute, 1e-12));
    }

    #[test]
    fn pgf_examples() {
        let b = pgf_coeffs(&[0.5; 3], Sense::Alarm).unwrap();
        assert_eq!(b.as_slice(), &[0.125, 0.375, 0.375, 0.125]);
        assert_eq!(pgf_coeffs(&[1.0; 3], Sense::Detect).unwrap().as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        let c = pgf_coeffs(&[0.2, 0.7], Sense::Alarm).unwrap();
        assert!(close(c.as_slice(), &[0.24, 0.62, 0.14], 1e-15));
        assert!(close(&enumerate_pmf(&[0.2, 0.7]), &[0.24, 0.62, 0.14], 1e-15));
        assert!(matches!(
            pgf_coeffs(&[0.2, 1.5], Sense::Alarm),
            Err(Error::ProbOutOfRange { index: 1, .. })
        ));
    }

    #[test]
    fn esp_path_examples() {
        let b = pgf_coeffs_via_esp(&[0.5; 3]).unwrap();
        assert!(close(b.as_slice(), &[0.125, 0.375, 0.375, 0.125], 1e-15));
        let one = pgf_coeffs_via_esp(&[0.3]).unwrap();
        assert!(close(one.as_slice(), &[0.7, 0.3], 1e-15));
    }

    #[test]
    fn tails() {
        let b = pgf_coeffs(&[0.5; 3], Sense::Alarm).unwrap();
        assert_eq!(majority_tail(&b, 0, Tail::Upper).unwrap(), 1.0);
        assert_eq!(majority_tail(&b, 2, Tail::Upper).unwrap(), 0.5);
        assert_eq!(majority_tail(&b, 4, Tail::Lower).unwrap(), 1.0);
        assert!(majority_tail(&b, 5, Tail::Upper).is_err());
    }

    #[test]
    fn threshold_is_strict_majority() {
        assert_eq!(majority_threshold(1), 1);
        assert_eq!(majority_threshold(4), 3);
        assert_eq!(majority_threshold(5), 3);
    }

    #[test]
    fn single_warden_reduces_to_sum() {
        let w = make_profile(1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        for tau in [0.5, 1.0, 2.2, 2.7, 3.5, 4.5] {
            let d = dep_exact(tau, &[w]).unwrap();
            assert!((d - p_fa(tau, &w) - p_md(tau, &w)).abs() < 1e-15);
        }
        assert_eq!(dep_exact(1.0, &[]), Err(Error::EmptyWardenSet));
    }

    #[test]
    fn shifted_esp_examples() {
        let a = [0.4, 1.3, -0.2, 2.2];
        for k in 0..=4 {
            assert_eq!(shifted_esp(&a, 0.0, k).unwrap(), esp(&a)[k]);
        }
        assert_eq!(shifted_esp(&[1.0, 1.0], 1.0, 2).unwrap(), 0.0);
        assert!(shifted_esp(&a, 1.0, 5).is_err());
    }

    fn profiles_strategy(max_m: usize) -> impl Strategy<Value = Vec<WardenProfile>> {
        prop::collection::vec(
            (0.0f64..3.0, 0.1f64..3.0, 0.0f64..3.0).prop_map(|(ac, aj, pc)| {
                make_profile(ac, aj, 1.0, pc, 1.0).unwrap()
            }),
            1..=max_m,
        )
    }

    proptest! {
        #[test]
        fn pmf_matches_enumeration(p in prop::collection::vec(0.0f64..=1.0, 1..=12)) {
            let c = pgf_coeffs(&p, Sense::Alarm).unwrap();
            prop_assert!(close(c.as_slice(), &enumerate_pmf(&p), 1e-12));
            prop_assert!((c.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-10);
            let via = pgf_coeffs_via_esp(&p).unwrap();
            prop_assert!(close(c.as_slice(), via.as_slice(), 1e-9));
        }

        #[test]
        fn identical_probabilities_are_binomial(q in 0.0f64..=1.0, m in 1usize..15) {
            let c = pgf_coeffs(&vec![q; m], Sense::Alarm).unwrap();
            for (i, ci) in c.as_slice().iter().enumerate() {
                let b = binomial(m, i) * q.powi(i as i32) * (1.0 - q).powi((m - i) as i32);
                prop_assert!((ci - b).abs() < 1e-12);
            }
        }

        #[test]
        fn tails_partition(p in prop::collection::vec(0.0f64..=1.0, 1..=10), t in 0usize..12) {
            let c = pgf_coeffs(&p, Sense::Alarm).unwrap();
            let t = t.min(p.len() + 1);
            let s = majority_tail(&c, t, Tail::Upper).unwrap() + majority_tail(&c, t, Tail::Lower).unwrap();
            prop_assert!((s - 1.0).abs() < 1e-10);
        }

        #[test]
        fn shift_identity(a in prop::collection::vec(-2.0f64..2.0, 0..=9), c in -2.0f64..2.0) {
            let shifted: Vec<f64> = a.iter().map(|x| x - c).collect();
            let direct = esp(&shifted);
            for (k, d) in direct.iter().enumerate() {
                let v = shifted_esp(&a, c, k).unwrap();
                let scale: f64 = esp(&a.iter().map(|x| x.abs() + c.abs()).collect::<Vec<_>>())[k];
                prop_assert!((v - d).abs() <= 1e-9 * scale.max(1.0));
            }
        }

        #[test]
        fn dep_is_permutation_invariant(ps in profiles_strategy(8), tau in 0.0f64..8.0, rot in 0usize..8) {
            let mut rotated = ps.clone();
            rotated.rotate_left(rot % ps.len());
            rotated.reverse();
            let a = dep_exact(tau, &ps).unwrap();
            let b = dep_exact(tau, &rotated).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn dep_is_one_in_deterministic_regimes(ps in profiles_strategy(8)) {
            let top = ps.iter().map(|w| w.alpha3()).fold(0.0, f64::max);
            for tau in [0.0, 0.5, 1.0, top, top + 1.0] {
                prop_assert!((dep_exact(tau, &ps).unwrap() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn dep_is_continuous(ps in profiles_strategy(6)) {
            // probe both sides of every breakpoint, where a jump would show up
            let eps = 1e-11;
            for w in &ps {
                for b in [w.sigma_sq(), w.alpha1(), w.alpha2(), w.alpha3()] {
                    let jump = dep_exact(b + eps, &ps).unwrap() - dep_exact(b - eps, &ps).unwrap();
                    prop_assert!(jump.abs() < 1e-6);
                }
            }
        }
    }
}
