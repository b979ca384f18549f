//! Bob's SINR, the average covert rate and its concave minorizer.
//!
//! The jamming power at Bob is `xi * I` with `xi ~ U[0, 1]`, so the average
//! rate is a one-dimensional integral over `xi`. When `I` dwarfs the noise,
//! the integrand has a logarithmic layer of width `sigma^2 / I` at `xi = 0`.
//! The default rule therefore grades Gauss-Legendre nodes toward zero
//! through `xi = t^6`, which keeps 32 nodes accurate to about `1e-10` bits
//! at realistic link budgets.

use std::f64::consts::{LN_2, PI};

use crate::error::Result;
use crate::geometry::Side;
use crate::scenario::{DesignPoint, Scenario};

/// Grading exponent of the default rule.
pub const DEFAULT_GRADING: u32 = 6;
/// Node count of the default rule.
pub const DEFAULT_NODES: usize = 32;

/// Nodes and weights integrating over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::graded(DEFAULT_NODES, DEFAULT_GRADING)
    }
}

impl QuadratureRule {
    /// `n`-point Gauss-Legendre rule mapped to `[0, 1]`.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess for the i-th largest root
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        QuadratureRule { nodes, weights }
    }

    /// Gauss-Legendre in `t` with the substitution `xi = t^power`.
    ///
    /// Integrates polynomials in `xi` exactly up to degree
    /// `(2n - power) / power`.
    pub fn graded(n: usize, power: u32) -> Self {
        assert!(power >= 1, "grading power must be positive");
        let base = QuadratureRule::gauss_legendre(n);
        let p = power as i32;
        let nodes = base.nodes.iter().map(|t| t.powi(p)).collect();
        let weights = base
            .nodes
            .iter()
            .zip(&base.weights)
            .map(|(t, w)| w * power as f64 * t.powi(p - 1))
            .collect();
        QuadratureRule { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integral of `f` over `[0, 1]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Received covert power, peak jamming power and noise at Bob, in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub s: f64,
    pub i: f64,
    pub sigma_sq: f64,
}

/// Evaluates the link budget of a design at Bob.
pub fn link_budget(design: &DesignPoint, scenario: &Scenario) -> Result<LinkBudget> {
    let geom = &scenario.geometry;
    let bob = geom.bob();
    let a_c = geom.gain(Side::C, &design.x_c, &design.radiation_c.fractions()?, bob)?;
    let a_j = geom.gain(Side::J, &design.x_j, &design.radiation_j.fractions()?, bob)?;
    Ok(LinkBudget {
        s: design.p_c * a_c,
        i: design.p_j_max * a_j,
        sigma_sq: scenario.sigma_b_sq,
    })
}

/// Instantaneous SINR `S / (xi I + sigma^2)`.
pub fn sinr(budget: &LinkBudget, xi: f64) -> f64 {
    budget.s / (xi * budget.i + budget.sigma_sq)
}

/// Average covert rate in bits/s/Hz.
pub fn avg_covert_rate(budget: &LinkBudget, rule: &QuadratureRule) -> f64 {
    if budget.i == 0.0 {
        return (budget.s / budget.sigma_sq).ln_1p() / LN_2;
    }
    rule.integrate(|xi| sinr(budget, xi).ln_1p()) / LN_2
}

/// Concave lower bound on the average rate, tight at an anchor budget.
///
/// Linearizes `-ln(xi I + sigma^2)` at the anchor's `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmSurrogate {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    denom: Vec<f64>,
    anchor_i: f64,
    sigma_sq: f64,
}

impl MmSurrogate {
    pub fn new(anchor: &LinkBudget, rule: &QuadratureRule) -> Self {
        MmSurrogate {
            nodes: rule.nodes.clone(),
            weights: rule.weights.clone(),
            denom: rule.nodes.iter().map(|x| x * anchor.i + anchor.sigma_sq).collect(),
            anchor_i: anchor.i,
            sigma_sq: anchor.sigma_sq,
        }
    }

    pub fn anchor_i(&self) -> f64 {
        self.anchor_i
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.denom)
            .map(|((&x, &w), &d)| (x, w, d))
    }

    /// Surrogate value at `(S, I)`; the budget's noise is ignored in favor of the anchor's.
    pub fn value(&self, budget: &LinkBudget) -> f64 {
        let di = budget.i - self.anchor_i;
        self.terms()
            .map(|(x, w, d)| w * ((budget.s + x * budget.i + self.sigma_sq).ln() - d.ln() - x / d * di))
            .sum::<f64>()
            / LN_2
    }

    /// Partial derivatives `(d/dS, d/dI)`.
    pub fn gradient(&self, budget: &LinkBudget) -> (f64, f64) {
        let (mut ds, mut di) = (0.0, 0.0);
        for (x, w, d) in self.terms() {
            let y = budget.s + x * budget.i + self.sigma_sq;
            ds += w / y;
            di += w * (x / y - x / d);
        }
        (ds / LN_2, di / LN_2)
    }
}

/// Surrogate value at `budget` around `anchor`.
pub fn mm_rate_surrogate(budget: &LinkBudget, anchor: &LinkBudget, rule: &QuadratureRule) -> f64 {
    MmSurrogate::new(anchor, rule).value(budget)
}

/// Surrogate gradient `(d/dS, d/dI)` at `budget` around `anchor`.
pub fn mm_rate_surrogate_grad(budget: &LinkBudget, anchor: &LinkBudget, rule: &QuadratureRule) -> (f64, f64) {
    MmSurrogate::new(anchor, rule).gradient(budget)
}
