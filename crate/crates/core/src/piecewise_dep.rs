//! Closed-form piecewise detection error probability and threshold search.
//!
//! Sorting the per-warden breakpoints partitions the threshold axis into
//! intervals on which every local probability is either constant or affine
//! with a common slope `b`. On each interval the fused error probability is
//! a polynomial in `tau`, written through elementary symmetric polynomials
//! of the normalized intercepts and the common-shift identity.
//!
//! The closed form needs a common slope (equal `P_J_max A_J` across
//! wardens) and a common noise power. [`fusion::dep_exact`] covers
//! arbitrary geometry and is the production path.

use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};
use twofloat::TwoFloat;

use crate::fusion::{binomial, dep_exact, majority_threshold, sign};
use crate::local_detect::WardenProfile;
use crate::scenario::{DesignPoint, Scenario};

/// Relative tolerance for treating slopes or noise powers as equal.
pub const HOMOGENEITY_TOL: f64 = 1e-9;

/// Order of the smallest jamming and covert breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingCase {
    /// `alpha2_min <= alpha1_min`.
    A2First,
    /// `alpha2_min > alpha1_min`.
    A1First,
}

impl OrderingCase {
    pub fn name(self) -> &'static str {
        match self {
            OrderingCase::A2First => "a2_first",
            OrderingCase::A1First => "a1_first",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "a2_first" => Some(OrderingCase::A2First),
            "a1_first" => Some(OrderingCase::A1First),
            _ => None,
        }
    }
}

/// Whether the last false-alarm breakpoint precedes the first saturation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapCase {
    /// `alpha1_max < alpha3_min`.
    A,
    /// `alpha3_min <= alpha1_max`.
    B,
}

/// One breakpoint family sorted ascending, with original warden indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedAlphas {
    pub values: Vec<f64>,
    pub order: Vec<usize>,
}

impl SortedAlphas {
    fn new(raw: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]).then(i.cmp(&j)));
        SortedAlphas {
            values: order.iter().map(|&i| raw[i]).collect(),
            order,
        }
    }
    pub fn min(&self) -> f64 {
        self.values[0]
    }
    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
    /// Number of entries `<= tau`.
    pub fn count_le(&self, tau: f64) -> usize {
        self.values.partition_point(|&v| v <= tau)
    }
}

/// Sorted breakpoints of a warden set.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointTable {
    pub alpha1: SortedAlphas,
    pub alpha2: SortedAlphas,
    pub alpha3: SortedAlphas,
    /// Smallest warden noise power.
    pub sigma_sq: f64,
    pub ordering_case: OrderingCase,
    pub overlap_case: OverlapCase,
}

impl BreakpointTable {
    pub fn len(&self) -> usize {
        self.alpha1.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn build_breakpoints(profiles: &[WardenProfile]) -> Result<BreakpointTable> {
    if profiles.is_empty() {
        return Err(Error::EmptyWardenSet);
    }
    if profiles.iter().any(WardenProfile::is_degenerate) {
        return Err(Error::DegenerateJamming);
    }
    let alpha1 = SortedAlphas::new(profiles.iter().map(|w| w.alpha1()).collect());
    let alpha2 = SortedAlphas::new(profiles.iter().map(|w| w.alpha2()).collect());
    let alpha3 = SortedAlphas::new(profiles.iter().map(|w| w.alpha3()).collect());
    let ordering_case = if alpha2.min() <= alpha1.min() {
        OrderingCase::A2First
    } else {
        OrderingCase::A1First
    };
    let overlap_case = if alpha1.max() < alpha3.min() {
        OverlapCase::A
    } else {
        OverlapCase::B
    };
    Ok(BreakpointTable {
        sigma_sq: profiles.iter().map(|w| w.sigma_sq()).fold(f64::INFINITY, f64::min),
        alpha1,
        alpha2,
        alpha3,
        ordering_case,
        overlap_case,
    })
}

/// Counts `(l, k, s)` of wardens whose `alpha1`, `alpha2`, `alpha3` are `<= tau`.
pub fn index_functions(tau: f64, table: &BreakpointTable) -> (usize, usize, usize) {
    (
        table.alpha1.count_le(tau),
        table.alpha2.count_le(tau),
        table.alpha3.count_le(tau),
    )
}

/// Intercepts and slopes of the affine regimes, per warden in input order.
///
/// On the linear segments `P_fa = a - b tau` and `P_md = b tau - c`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedConstants {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub homogeneous_slope: bool,
}

impl NormalizedConstants {
    pub fn new(profiles: &[WardenProfile]) -> Self {
        let b: Vec<f64> = profiles.iter().map(|w| 1.0 / w.span()).collect();
        let a = profiles.iter().zip(&b).map(|(w, b)| w.alpha1() * b).collect();
        let c = profiles.iter().zip(&b).map(|(w, b)| w.alpha2() * b).collect();
        let homogeneous_slope = b.iter().all(|&x| close_rel(x, b[0]));
        NormalizedConstants {
            a,
            c,
            b,
            homogeneous_slope,
        }
    }

    /// The shared slope, when there is one.
    pub fn common_slope(&self) -> Result<f64> {
        if self.homogeneous_slope && !self.b.is_empty() {
            Ok(self.b[0])
        } else {
            Err(Error::HeterogeneousSlope)
        }
    }
}

fn close_rel(x: f64, y: f64) -> bool {
    (x - y).abs() <= HOMOGENEITY_TOL * x.abs().max(y.abs())
}

/// Warden subset and intercept vector fed to the shifted polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiSet {
    /// All `M` wardens, intercepts `a`.
    All,
    /// Wardens with `alpha1 > tau`, intercepts `a`.
    ActiveFalseAlarm,
    /// The `k` wardens with `alpha2 <= tau`, intercepts `1 + c`.
    Detecting,
    /// The `k - s` wardens with `alpha2 <= tau < alpha3`, intercepts `1 + c`.
    LinearMissDetection,
}

fn psi_vector(tau: f64, set: PsiSet, consts: &NormalizedConstants, table: &BreakpointTable) -> Vec<f64> {
    let (l, k, s) = index_functions(tau, table);
    let one_plus_c = |m: &usize| 1.0 + consts.c[*m];
    match set {
        PsiSet::All => consts.a.clone(),
        PsiSet::ActiveFalseAlarm => table.alpha1.order[l..].iter().map(|&m| consts.a[m]).collect(),
        PsiSet::Detecting => table.alpha2.order[..k].iter().map(one_plus_c).collect(),
        PsiSet::LinearMissDetection => {
            let saturated = &table.alpha3.order[..s];
            table.alpha2.order[..k]
                .iter()
                .filter(|m| !saturated.contains(m))
                .map(one_plus_c)
                .collect()
        }
    }
}

/// `psi(x, y) = sum_{r=0}^{x} (-b tau)^r C(y - x + r, r) xi_{x-r}(v)` with `y = |v|`.
pub fn psi_poly(
    tau: f64,
    x: usize,
    set: PsiSet,
    consts: &NormalizedConstants,
    table: &BreakpointTable,
) -> Result<f64> {
    let b = consts.common_slope()?;
    let v = psi_vector(tau, set, consts, table);
    if x > v.len() {
        return Err(Error::IndexOutOfRange { index: x, max: v.len() });
    }
    Ok(shifted_esp_dd(&esp_dd(&v), v.len(), TwoFloat::new_mul(b, tau), x).into())
}

// The alternating sums below cancel terms far larger than their result
// (about `max(a)^M C(M, M/2)^2` against O(1)), so they are accumulated in
// double-double arithmetic.

fn esp_dd(x: &[f64]) -> Vec<TwoFloat> {
    let mut e = vec![TwoFloat::from(0.0); x.len() + 1];
    e[0] = TwoFloat::from(1.0);
    for (m, &v) in x.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            let prev = e[k - 1];
            e[k] += prev * v;
        }
    }
    e
}

fn shifted_esp_dd(xi: &[TwoFloat], m: usize, c: TwoFloat, k: usize) -> TwoFloat {
    let mut pow = TwoFloat::from(1.0);
    let mut total = TwoFloat::from(0.0);
    for r in 0..=k {
        total += pow * binomial(m - k + r, r) * xi[k - r];
        pow = -(pow * c);
    }
    total
}

/// Interval of the threshold axis in the piecewise representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Row {
    /// `tau <= sigma^2`: every warden alarms.
    Silent,
    /// Only the full false-alarm tail contributes.
    FalseAlarmOnly,
    /// Second interval: full false-alarm tail plus miss detection (`A2First`),
    /// or the active-set false-alarm tail alone (`A1First`).
    Second,
    /// Active false-alarm tail plus unsaturated miss detection.
    Mixed,
    /// Active false-alarm tail plus miss detection with saturated wardens.
    Saturating,
    /// Miss detection only.
    MissOnly,
    /// `tau >= alpha3_max`: every warden misses.
    Blind,
}

/// Locates `tau` using closed-left intervals.
pub fn classify(tau: f64, table: &BreakpointTable) -> Row {
    let first = match table.ordering_case {
        OrderingCase::A2First => table.alpha2.min(),
        OrderingCase::A1First => table.alpha1.min(),
    };
    let second = match table.ordering_case {
        OrderingCase::A2First => table.alpha1.min(),
        OrderingCase::A1First => table.alpha2.min(),
    };
    if tau <= table.sigma_sq {
        Row::Silent
    } else if tau >= table.alpha3.max() {
        Row::Blind
    } else if tau < first {
        Row::FalseAlarmOnly
    } else if tau < second {
        Row::Second
    } else if tau < table.alpha1.max().min(table.alpha3.min()) {
        Row::Mixed
    } else if tau < table.alpha1.max() {
        Row::Saturating
    } else {
        Row::MissOnly
    }
}

/// `sum_{i>=T} e_i = sum_{k=T}^{n} (-1)^(k+T) C(k-1, T-1) xi_k` over a shifted set.
fn false_alarm_tail(tau: f64, set: PsiSet, t: usize, consts: &NormalizedConstants, table: &BreakpointTable) -> Result<f64> {
    let shift = TwoFloat::new_mul(consts.common_slope()?, tau);
    let v = psi_vector(tau, set, consts, table);
    let n = v.len();
    if n < t {
        return Ok(0.0);
    }
    let xi = esp_dd(&v);
    let mut total = TwoFloat::from(0.0);
    for k in t..=n {
        total += shifted_esp_dd(&xi, n, shift, k) * (sign(k + t) * binomial(k - 1, t - 1));
    }
    Ok(total.into())
}

/// Miss-detection tail over the `M - s` unsaturated wardens: `M - k` certain
/// detectors plus the `k - s` linear ones.
fn miss_detection_tail(tau: f64, t: usize, consts: &NormalizedConstants, table: &BreakpointTable) -> Result<f64> {
    let shift = TwoFloat::new_mul(consts.common_slope()?, tau);
    let m = table.len();
    let (_, k, s) = index_functions(tau, table);
    let v = psi_vector(tau, PsiSet::LinearMissDetection, consts, table);
    let n1 = v.len();
    debug_assert_eq!(n1, k - s);
    let m_prime = m - s;
    let ones = m_prime - n1;
    let xi_v = esp_dd(&v);
    let psi: Vec<TwoFloat> = (0..=n1).map(|l| shifted_esp_dd(&xi_v, n1, shift, l)).collect();
    // xi_j of [1; ones] ++ (v - b tau)
    let xi: Vec<TwoFloat> = (0..=m_prime)
        .map(|j| {
            let lo = j.saturating_sub(ones);
            let mut acc = TwoFloat::from(0.0);
            for l in lo..=j.min(n1) {
                acc += psi[l] * binomial(ones, j - l);
            }
            acc
        })
        .collect();
    let mut total = TwoFloat::from(0.0);
    for i in 0..t.min(m_prime + 1) {
        for j in i..=m_prime {
            total += xi[j] * (sign(j + i) * binomial(j, i));
        }
    }
    Ok(total.into())
}

/// Piecewise closed-form system error probability.
///
/// Requires a common slope and a common noise power across wardens.
pub fn dep_piecewise(tau: f64, profiles: &[WardenProfile]) -> Result<f64> {
    let table = build_breakpoints(profiles)?;
    let consts = NormalizedConstants::new(profiles);
    consts.common_slope()?;
    if !profiles.iter().all(|w| close_rel(w.sigma_sq(), table.sigma_sq)) {
        return Err(Error::HeterogeneousNoise);
    }
    let t = majority_threshold(profiles.len());
    let full = |tau| false_alarm_tail(tau, PsiSet::All, t, &consts, &table);
    let active = |tau| false_alarm_tail(tau, PsiSet::ActiveFalseAlarm, t, &consts, &table);
    let miss = |tau| miss_detection_tail(tau, t, &consts, &table);
    Ok(match classify(tau, &table) {
        Row::Silent | Row::Blind => 1.0,
        Row::FalseAlarmOnly => full(tau)?,
        Row::Second => match table.ordering_case {
            OrderingCase::A2First => full(tau)? + miss(tau)?,
            OrderingCase::A1First => active(tau)?,
        },
        Row::Mixed | Row::Saturating => active(tau)? + miss(tau)?,
        Row::MissOnly => miss(tau)?,
    })
}

/// Where a tabulated curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSource {
    Piecewise,
    ExactGrid,
}

/// Tabulated `P_dep(tau)` together with its minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct DepCurve {
    pub breakpoints: Vec<f64>,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub tau_star: f64,
    pub g_star: f64,
    pub ordering_case: Option<OrderingCase>,
    pub source: CurveSource,
}

/// Sorted, deduplicated set of noise powers and all breakpoints.
pub fn breakpoint_list(profiles: &[WardenProfile]) -> Vec<f64> {
    let mut v: Vec<f64> = profiles
        .iter()
        .flat_map(|w| [w.sigma_sq(), w.alpha1(), w.alpha2(), w.alpha3()])
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn candidates(breakpoints: &[f64], grid_density: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(breakpoints.len() * (grid_density + 1));
    for pair in breakpoints.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        out.push(lo);
        let step = (hi - lo) / (grid_density + 1) as f64;
        out.extend((1..=grid_density).map(|j| lo + step * j as f64));
    }
    out.extend(breakpoints.last());
    out
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn search(profiles: &[WardenProfile], grid_density: usize) -> Result<(Vec<f64>, Vec<f64>, f64, f64, Vec<f64>)> {
    if profiles.is_empty() {
        return Err(Error::EmptyWardenSet);
    }
    let bps = breakpoint_list(profiles);
    let mut taus = candidates(&bps, grid_density);
    let mut values = taus
        .iter()
        .map(|&t| dep_exact(t, profiles))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    let lo = taus[best.saturating_sub(1)];
    let hi = taus[(best + 1).min(taus.len() - 1)];
    let (mut tau_star, mut g_star) = (taus[best], values[best]);
    if hi > lo {
        let f = |t: f64| dep_exact(t, profiles).unwrap_or(f64::INFINITY);
        let (t, g) = golden_section(f, lo, hi, 1e-6 * (hi - lo));
        if g < g_star {
            let at = taus.partition_point(|&x| x < t);
            taus.insert(at, t);
            values.insert(at, g);
            tau_star = t;
            g_star = g;
        }
    }
    Ok((taus, values, tau_star, g_star, bps))
}

/// Minimum of the system error probability over the threshold.
///
/// Evaluates all breakpoints plus `grid_density` interior points per
/// interval, then refines the best bracket by golden-section search.
/// Returns `(tau_star, g_star, curve)`; ties go to the smaller threshold.
pub fn min_dep_threshold(profiles: &[WardenProfile], grid_density: usize) -> Result<(f64, f64, DepCurve)> {
    let (taus, values, tau_star, g_star, breakpoints) = search(profiles, grid_density)?;
    let curve = DepCurve {
        breakpoints,
        taus,
        values,
        tau_star,
        g_star,
        ordering_case: build_breakpoints(profiles).ok().map(|t| t.ordering_case),
        source: CurveSource::ExactGrid,
    };
    Ok((tau_star, g_star, curve))
}

/// [`min_dep_threshold`] without building the curve.
pub fn min_dep(profiles: &[WardenProfile], grid_density: usize) -> Result<(f64, f64)> {
    search(profiles, grid_density).map(|(_, _, t, g, _)| (t, g))
}

/// Central differences of `dep_exact(tau_star, .)` over the design variables,
/// holding the threshold fixed. Falls back to one-sided differences at bounds.
pub fn dep_gradient(scenario: &Scenario, design: &DesignPoint, tau_star: f64, fd_step: f64) -> Result<Vec<f64>> {
    let f = |d: &DesignPoint| -> Result<f64> { dep_exact(tau_star, &scenario.profiles(d)?) };
    let base = design.to_vector();
    let bounds = scenario.variable_bounds(design);
    let f0 = f(design)?;
    let mut grad = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let h = (fd_step * base[i].abs()).max(1e-12);
        let (lo, hi) = bounds[i];
        let up = base[i] + h <= hi;
        let down = base[i] - h >= lo;
        let eval = |delta: f64| -> Result<f64> {
            let mut v = base.clone();
            v[i] += delta;
            f(&design.from_vector(&v)?)
        };
        let g = match (down, up) {
            (true, true) => (eval(h)? - eval(-h)?) / (2.0 * h),
            (false, true) => (eval(h)? - f0) / h,
            (true, false) => (f0 - eval(-h)?) / h,
            (false, false) => 0.0,
        };
        if !g.is_finite() {
            return Err(Error::NonFiniteGradient { variable: i });
        }
        grad.push(g);
    }
    Ok(grad)
}

impl DepCurve {
    /// Writes a header comment with the minimizer, then `tau,p_dep` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let case = self.ordering_case.map_or("none", OrderingCase::name);
        writeln!(
            w,
            "# tau_star={:.16e},g_star={:.16e},ordering_case={}",
            self.tau_star, self.g_star, case
        )?;
        writeln!(w, "tau,p_dep")?;
        for (t, v) in self.taus.iter().zip(&self.values) {
            writeln!(w, "{t:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`DepCurve::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> io::Result<DepCurve> {
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| bad("missing header"))??;
        let mut tau_star = f64::NAN;
        let mut g_star = f64::NAN;
        let mut ordering_case = None;
        for field in header.trim_start_matches('#').trim().split(',') {
            let (key, value) = field.split_once('=').ok_or_else(|| bad("malformed header"))?;
            match key {
                "tau_star" => tau_star = value.parse().map_err(|_| bad("tau_star"))?,
                "g_star" => g_star = value.parse().map_err(|_| bad("g_star"))?,
                "ordering_case" => ordering_case = OrderingCase::from_name(value),
                _ => return Err(bad("unknown header key")),
            }
        }
        if lines.next().transpose()?.as_deref() != Some("tau,p_dep") {
            return Err(bad("missing column row"));
        }
        let (mut taus, mut values) = (Vec::new(), Vec::new());
        for line in lines {
            let line = line?;
            let (t, v) = line.split_once(',').ok_or_else(|| bad("malformed row"))?;
            taus.push(t.parse().map_err(|_| bad("tau"))?);
            values.push(v.parse().map_err(|_| bad("p_dep"))?);
        }
        Ok(DepCurve {
            breakpoints: Vec::new(),
            taus,
            values,
            tau_star,
            g_star,
            ordering_case,
            source: CurveSource::ExactGrid,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{esp, pgf_coeffs, Sense};
    use crate::local_detect::{make_profile, p_fa, p_md};
    use proptest::prelude::*;

    fn homogeneous(a_c: &[f64], span: f64, p_c: f64) -> Vec<WardenProfile> {
        a_c.iter().map(|&ac| make_profile(ac, span, 1.0, p_c, 1.0).unwrap()).collect()
    }

    #[test]
    fn tables_sort_and_classify() {
        let ps = homogeneous(&[0.5], 2.0, 1.0);
        let t = build_breakpoints(&ps).unwrap();
        assert_eq!(t.alpha1.values, vec![3.0]);
        assert_eq!(t.ordering_case, OrderingCase::A2First);
        let ps = vec![
            make_profile(1.0, 1.0, 1.0, 2.5, 1.0).unwrap(),
            make_profile(1.0, 2.0, 1.0, 0.5, 1.0).unwrap(),
        ];
        let t = build_breakpoints(&ps).unwrap();
        assert_eq!(t.alpha1.order, vec![0, 1]);
        assert_eq!(t.alpha2.order, vec![1, 0]);
        assert_eq!(t.alpha2.values, vec![1.5, 3.5]);
        let same = homogeneous(&[0.7; 3], 1.5, 1.0);
        let t = build_breakpoints(&same).unwrap();
        assert_eq!(t.alpha3.min(), t.alpha3.max());
        assert_eq!(build_breakpoints(&[]), Err(Error::EmptyWardenSet));
    }

    #[test]
    fn index_functions_are_closed_left() {
        let ps = vec![
            make_profile(0.2, 1.0, 1.0, 1.0, 1.0).unwrap(),
            make_profile(0.2, 2.0, 1.0, 1.0, 1.0).unwrap(),
            make_profile(0.2, 3.0, 1.0, 1.0, 1.0).unwrap(),
        ];
        let t = build_breakpoints(&ps).unwrap();
        assert_eq!(index_functions(0.5, &t), (0, 0, 0));
        assert_eq!(index_functions(100.0, &t), (3, 3, 3));
        assert_eq!(index_functions(t.alpha1.values[1], &t).0, 2);
    }

    #[test]
    fn psi_special_values() {
        let ps = homogeneous(&[0.3, 0.9, 1.4], 2.0, 1.0);
        let t = build_breakpoints(&ps).unwrap();
        let c = NormalizedConstants::new(&ps);
        let xi = esp(&c.a);
        for x in 0..=3 {
            assert!((psi_poly(0.0, x, PsiSet::All, &c, &t).unwrap() - xi[x]).abs() < 1e-15);
        }
        assert_eq!(psi_poly(2.0, 0, PsiSet::All, &c, &t).unwrap(), 1.0);
        assert!(psi_poly(2.0, 4, PsiSet::All, &c, &t).is_err());
        let het = vec![
            make_profile(0.2, 1.0, 1.0, 1.0, 1.0).unwrap(),
            make_profile(0.2, 2.0, 1.0, 1.0, 1.0).unwrap(),
        ];
        let ch = NormalizedConstants::new(&het);
        assert!(!ch.homogeneous_slope);
        let th = build_breakpoints(&het).unwrap();
        assert_eq!(psi_poly(1.0, 1, PsiSet::All, &ch, &th), Err(Error::HeterogeneousSlope));
        assert_eq!(dep_piecewise(2.0, &het), Err(Error::HeterogeneousSlope));
    }

    #[test]
    fn psi_matches_shifted_vector() {
        let ps = homogeneous(&[0.3, 0.9, 1.4, 0.1, 2.2], 2.0, 1.0);
        let t = build_breakpoints(&ps).unwrap();
        let c = NormalizedConstants::new(&ps);
        for tau in [1.2, 2.0, 2.9, 3.4, 4.1, 5.0] {
            for set in [PsiSet::All, PsiSet::ActiveFalseAlarm, PsiSet::Detecting, PsiSet::LinearMissDetection] {
                let v = psi_vector(tau, set, &c, &t);
                let shifted: Vec<f64> = v.iter().map(|x| x - c.b[0] * tau).collect();
                let direct = esp(&shifted);
                for (x, d) in direct.iter().enumerate() {
                    let p = psi_poly(tau, x, set, &c, &t).unwrap();
                    assert!((p - d).abs() < 1e-12, "{set:?} tau={tau} x={x}");
                }
            }
        }
    }

    #[test]
    fn normalized_constants_reproduce_linear_regimes() {
        let ps = homogeneous(&[0.3, 0.9, 1.4], 2.0, 1.0);
        let c = NormalizedConstants::new(&ps);
        for (m, w) in ps.iter().enumerate() {
            let tau = w.sigma_sq() + 0.4 * w.span();
            assert!((p_fa(tau, w) - (c.a[m] - c.b[m] * tau)).abs() < 1e-12);
            let tau = w.alpha2() + 0.4 * w.span();
            assert!((p_md(tau, w) - (c.b[m] * tau - c.c[m])).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_detection_regime_has_no_miss_term() {
        let ps = homogeneous(&[0.8, 1.1, 1.6], 1.0, 1.0);
        let t = build_breakpoints(&ps).unwrap();
        let tau = 0.5 * (t.sigma_sq + t.alpha2.min());
        let (_, md) = crate::fusion::dep_parts(tau, &ps).unwrap();
        assert_eq!(md, 0.0);
        assert_eq!(classify(tau, &t), Row::FalseAlarmOnly);
    }

    #[test]
    fn single_warden_minimum() {
        let w = make_profile(4.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        let (tau, g, curve) = min_dep_threshold(&[w], 64).unwrap();
        assert_eq!(g, 0.0);
        assert!(tau >= w.alpha1() && tau <= w.alpha2());
        assert_eq!(curve.g_star, 0.0);
        assert!(curve.values.iter().all(|&v| v >= g));
        let o = make_profile(1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        let (_, g, _) = min_dep_threshold(&[o], 64).unwrap();
        assert!((g - 0.5).abs() < 1e-12);
    }

    #[test]
    fn curve_roundtrip() {
        let ps = homogeneous(&[0.3, 0.9, 1.4], 2.0, 1.0);
        let (_, _, curve) = min_dep_threshold(&ps, 16).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let back = DepCurve::read_csv(&buf[..]).unwrap();
        assert_eq!(back.taus, curve.taus);
        assert_eq!(back.values, curve.values);
        assert_eq!(back.tau_star, curve.tau_star);
        assert_eq!(back.g_star, curve.g_star);
        assert_eq!(back.ordering_case, curve.ordering_case);
    }

    #[test]
    fn blind_voter_can_lower_error() {
        // q = 0.8 alarm probability everywhere, one warden detects surely:
        // the change is (r - q) q (2 - 3q) = -0.064
        let ps = vec![
            make_profile(0.0, 0.5, 1.0, 0.2, 1.0).unwrap(),
            make_profile(1.19197486285415, 0.5, 1.0, 0.2, 1.0).unwrap(),
            make_profile(0.0, 0.5, 1.0, 0.2, 1.0).unwrap(),
        ];
        let mut more = ps.clone();
        more.push(make_profile(1e-9, 1e-9, 1e-12, 1.0, 1.0).unwrap());
        let before = dep_exact(1.1, &ps).unwrap();
        let after = dep_exact(1.1, &more).unwrap();
        assert!((after - before + 0.064).abs() < 1e-12);
    }

    fn homogeneous_strategy() -> impl Strategy<Value = Vec<WardenProfile>> {
        (1usize..=10, 0.5f64..3.0, 0.2f64..2.0).prop_flat_map(|(m, span, p_c)| {
            prop::collection::vec(0.0f64..2.0, m).prop_map(move |ac| homogeneous(&ac, span, p_c))
        })
    }

    proptest! {
        #[test]
        fn piecewise_equals_exact(ps in homogeneous_strategy(), u in prop::collection::vec(0.0f64..1.0, 40)) {
            let top = ps.iter().map(|w| w.alpha3()).fold(0.0, f64::max) * 1.1;
            let mut taus: Vec<f64> = u.iter().map(|x| x * top).collect();
            taus.extend(breakpoint_list(&ps));
            for tau in taus {
                let a = dep_piecewise(tau, &ps).unwrap();
                let b = dep_exact(tau, &ps).unwrap();
                prop_assert!((a - b).abs() <= 1e-9, "tau={} piecewise={} exact={}", tau, a, b);
            }
        }

        #[test]
        fn index_functions_step_by_multiplicity(ps in homogeneous_strategy()) {
            let t = build_breakpoints(&ps).unwrap();
            for bp in breakpoint_list(&ps) {
                let left = index_functions(bp - 1e-9 * bp.max(1.0), &t);
                let at = index_functions(bp, &t);
                let mult = |s: &SortedAlphas| s.values.iter().filter(|&&v| v == bp).count();
                prop_assert_eq!(at.0 - left.0, mult(&t.alpha1));
                prop_assert_eq!(at.1 - left.1, mult(&t.alpha2));
                prop_assert_eq!(at.2 - left.2, mult(&t.alpha3));
            }
        }

        #[test]
        fn search_never_beats_its_candidates(ps in homogeneous_strategy()) {
            let (tau, g, curve) = min_dep_threshold(&ps, 16).unwrap();
            prop_assert!(g <= 1.0 + 1e-10);
            prop_assert!(curve.values.iter().all(|&v| g <= v));
            prop_assert_eq!(dep_exact(tau, &ps).unwrap(), g);
        }

        #[test]
        fn blind_voter_moves_error_by_boundary_mass(ps in homogeneous_strategy(), tau_frac in 0.0f64..1.2) {
            prop_assume!(ps.len() % 2 == 1);
            let top = ps.iter().map(|w| w.alpha3()).fold(0.0, f64::max);
            // every breakpoint of the blind voter sits below 1e-8
            let blind = make_profile(1e-9, 1e-9, 1e-12, 1.0, 1.0).unwrap();
            let tau = (tau_frac * top).max(1e-8);
            let mut more = ps.clone();
            more.push(blind);
            prop_assert_eq!((p_fa(tau, &blind), p_md(tau, &blind)), (0.0, 1.0));
            let before = dep_exact(tau, &ps).unwrap();
            let after = dep_exact(tau, &more).unwrap();
            // the vote threshold rises by one, so exactly the mass at T moves
            let t = majority_threshold(ps.len());
            let alarms = |p: Vec<f64>| pgf_coeffs(&p, Sense::Alarm).unwrap().as_slice()[t];
            let h0 = alarms(ps.iter().map(|w| p_fa(tau, w)).collect());
            let h1 = alarms(ps.iter().map(|w| 1.0 - p_md(tau, w)).collect());
            prop_assert!((after - before - (h1 - h0)).abs() <= 1e-12);
        }
    }
}
