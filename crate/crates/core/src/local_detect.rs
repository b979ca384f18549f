//! Single-warden false-alarm and miss-detection probabilities.
//!
//! Jamming power is uniform on `[0, P_J_max]`, so each warden's energy
//! statistic is uniform on `[sigma^2, alpha1]` under H0 and on
//! `[alpha2, alpha3]` under H1. Both error probabilities are therefore
//! piecewise affine in the threshold with slope `1 / (P_J_max A_J)`.
//! A warden alarms when its statistic strictly exceeds the threshold.

use crate::error::{Error, Result};

/// Gains, powers and derived breakpoints of one warden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WardenProfile {
    a_c: f64,
    a_j: f64,
    sigma_sq: f64,
    p_c: f64,
    p_j_max: f64,
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
}

/// Builds a profile; fails when the jamming term vanishes.
pub fn make_profile(a_c: f64, a_j: f64, sigma_sq: f64, p_c: f64, p_j_max: f64) -> Result<WardenProfile> {
    let w = WardenProfile::new_unchecked(a_c, a_j, sigma_sq, p_c, p_j_max)?;
    if w.span() > 0.0 {
        Ok(w)
    } else {
        Err(Error::DegenerateJamming)
    }
}

impl WardenProfile {
    /// Accepts `P_J_max A_J = 0`; the probabilities then become step functions.
    pub fn new_unchecked(a_c: f64, a_j: f64, sigma_sq: f64, p_c: f64, p_j_max: f64) -> Result<Self> {
        for (name, v) in [
            ("A_C", a_c),
            ("A_J", a_j),
            ("sigma_w_sq", sigma_sq),
            ("P_C", p_c),
            ("P_J_max", p_j_max),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::ParamOutOfRange { name, value: v });
            }
        }
        let alpha1 = sigma_sq + p_j_max * a_j;
        let alpha2 = sigma_sq + p_c * a_c;
        Ok(WardenProfile {
            a_c,
            a_j,
            sigma_sq,
            p_c,
            p_j_max,
            alpha1,
            alpha2,
            alpha3: alpha1 + alpha2 - sigma_sq,
        })
    }

    pub fn a_c(&self) -> f64 {
        self.a_c
    }
    pub fn a_j(&self) -> f64 {
        self.a_j
    }
    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }
    pub fn p_c(&self) -> f64 {
        self.p_c
    }
    pub fn p_j_max(&self) -> f64 {
        self.p_j_max
    }
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }
    pub fn alpha3(&self) -> f64 {
        self.alpha3
    }
    /// Width `P_J_max A_J` of both linear segments.
    pub fn span(&self) -> f64 {
        self.p_j_max * self.a_j
    }
    pub fn is_degenerate(&self) -> bool {
        self.span() <= 0.0
    }
}

/// Local false-alarm probability at threshold `tau`.
pub fn p_fa(tau: f64, w: &WardenProfile) -> f64 {
    if w.is_degenerate() {
        return p_fa_degenerate(tau, w.sigma_sq);
    }
    if tau < w.sigma_sq {
        1.0
    } else if tau <= w.alpha1 {
        ((w.alpha1 - tau) / w.span()).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Local miss-detection probability at threshold `tau`.
pub fn p_md(tau: f64, w: &WardenProfile) -> f64 {
    if w.is_degenerate() {
        return p_md_degenerate(tau, w.sigma_sq, w.p_c * w.a_c);
    }
    if tau < w.alpha2 {
        0.0
    } else if tau <= w.alpha3 {
        ((tau - w.alpha2) / w.span()).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// False alarm without jamming: the statistic equals `sigma^2` exactly.
pub fn p_fa_degenerate(tau: f64, sigma_sq: f64) -> f64 {
    if tau <= sigma_sq {
        1.0
    } else {
        0.0
    }
}

/// Miss detection without jamming: the statistic equals `sigma^2 + P_C A_C`.
pub fn p_md_degenerate(tau: f64, sigma_sq: f64, covert_power: f64) -> f64 {
    if tau > sigma_sq + covert_power {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> WardenProfile {
        make_profile(1.0, 1.0, 1.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn breakpoints_by_substitution() {
        let w = reference();
        assert_eq!((w.alpha1(), w.alpha2(), w.alpha3()), (3.0, 2.0, 4.0));
        let silent = make_profile(1.0, 1.0, 1.0, 0.0, 2.0).unwrap();
        assert_eq!(silent.alpha2(), silent.sigma_sq());
        assert_eq!(silent.alpha3(), silent.alpha1());
        assert_eq!(make_profile(1.0, 0.0, 1.0, 1.0, 2.0), Err(Error::DegenerateJamming));
        assert_eq!(make_profile(1.0, 1.0, 1.0, 1.0, 0.0), Err(Error::DegenerateJamming));
        assert!(make_profile(-1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn branch_values() {
        let w = reference();
        assert_eq!(p_fa(0.0, &w), 1.0);
        assert_eq!(p_fa(3.0, &w), 0.0);
        assert_eq!(p_fa(2.0, &w), 0.5);
        assert_eq!(p_md(1.5, &w), 0.0);
        assert_eq!(p_md(4.0, &w), 1.0);
        assert_eq!(p_md(3.0, &w), 0.5);
    }

    #[test]
    fn degenerate_steps() {
        let w = WardenProfile::new_unchecked(1.0, 0.0, 1.0, 2.0, 5.0).unwrap();
        assert!(w.is_degenerate());
        assert_eq!(p_fa(1.0, &w), 1.0);
        assert_eq!(p_fa(1.0 + 1e-12, &w), 0.0);
        assert_eq!(p_md(3.0, &w), 0.0);
        assert_eq!(p_md(3.0 + 1e-12, &w), 1.0);
    }

    #[test]
    fn single_warden_error_floor() {
        // overlap case: minimum (alpha1 - alpha2)/span on [alpha2, alpha1]
        let w = reference();
        let floor = (w.alpha1() - w.alpha2()) / w.span();
        for i in 0..=100 {
            let tau = 5.0 * i as f64 / 100.0;
            assert!(p_fa(tau, &w) + p_md(tau, &w) >= floor - 1e-12);
        }
        assert!((p_fa(2.5, &w) + p_md(2.5, &w) - floor).abs() < 1e-12);
        // disjoint case reaches zero
        let d = make_profile(4.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert!(d.alpha1() <= d.alpha2());
        assert_eq!(p_fa(4.0, &d) + p_md(4.0, &d), 0.0);
    }

    fn profile_strategy() -> impl Strategy<Value = WardenProfile> {
        (0.0f64..3.0, 0.1f64..3.0, 0.0f64..2.0, 0.0f64..3.0, 0.1f64..3.0)
            .prop_map(|(ac, aj, s, pc, pj)| make_profile(ac, aj, s, pc, pj).unwrap())
    }

    proptest! {
        #[test]
        fn probabilities_are_monotone_and_bounded(w in profile_strategy()) {
            let top = w.alpha3() * 1.2 + 1.0;
            let mut prev_fa = 1.0;
            let mut prev_md = 0.0;
            for i in 0..=400 {
                let tau = top * i as f64 / 400.0;
                let (fa, md) = (p_fa(tau, &w), p_md(tau, &w));
                prop_assert!((0.0..=1.0).contains(&fa) && (0.0..=1.0).contains(&md));
                prop_assert!(fa <= prev_fa && md >= prev_md);
                prev_fa = fa;
                prev_md = md;
            }
            prop_assert!(w.sigma_sq() < w.alpha1());
            prop_assert!(w.sigma_sq() <= w.alpha2());
            prop_assert!(w.alpha2() <= w.alpha3() && w.alpha1() <= w.alpha3());
        }

        #[test]
        fn linear_slopes_match(w in profile_strategy(), t in 0.05f64..0.95) {
            let h = 1e-3 * w.span();
            let tau = w.sigma_sq() + t * w.span();
            let slope_fa = (p_fa(tau - h, &w) - p_fa(tau + h, &w)) / (2.0 * h);
            let tau = w.alpha2() + t * w.span();
            let slope_md = (p_md(tau + h, &w) - p_md(tau - h, &w)) / (2.0 * h);
            let b = 1.0 / w.span();
            prop_assert!((slope_fa - b).abs() <= 1e-9 * b);
            prop_assert!((slope_md - b).abs() <= 1e-9 * b);
        }

        #[test]
        fn continuous_at_breakpoints(w in profile_strategy()) {
            let e = 1e-12 * (1.0 + w.alpha3());
            for x in [w.sigma_sq(), w.alpha1()] {
                prop_assert!((p_fa(x - e, &w) - p_fa(x + e, &w)).abs() < 1e-9);
            }
            for x in [w.alpha2(), w.alpha3()] {
                prop_assert!((p_md(x - e, &w) - p_md(x + e, &w)).abs() < 1e-9);
            }
        }
    }
}
