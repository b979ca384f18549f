//! Euclidean projections used by the optimizer's constraint handling.

use crate::error::{Error, Result};

/// Projection onto `{p : p >= 0, sum p = total}`.
pub fn project_simplex(p: &[f64], total: f64) -> Vec<f64> {
    let mut u = p.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - total) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    p.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projection onto `{p : p >= 0, sum p <= total}`.
pub fn project_capped_simplex(p: &[f64], total: f64) -> Vec<f64> {
    let clamped: Vec<f64> = p.iter().map(|&x| x.max(0.0)).collect();
    if clamped.iter().sum::<f64>() <= total {
        clamped
    } else {
        project_simplex(p, total)
    }
}

/// Least-squares non-decreasing fit by pool-adjacent-violators.
pub fn isotonic_regression(y: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 as f64 + m2 * w2 as f64) / w as f64, w);
        }
    }
    blocks.into_iter().flat_map(|(m, w)| std::iter::repeat_n(m, w)).collect()
}

/// Projection onto `{x : 0 <= x_1, x_{n+1} - x_n >= spacing, x_N <= length}`.
///
/// Subtracting `n * spacing` turns the polytope into an ordered box, whose
/// projection is isotonic regression followed by clamping.
pub fn project_spacing(y: &[f64], spacing: f64, length: f64) -> Result<Vec<f64>> {
    let n = y.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let upper = length - (n - 1) as f64 * spacing;
    if upper < 0.0 {
        return Err(Error::InfeasibleGeometry {
            count: n,
            spacing,
            length,
        });
    }
    let shifted: Vec<f64> = y.iter().enumerate().map(|(i, v)| v - i as f64 * spacing).collect();
    Ok(isotonic_regression(&shifted)
        .into_iter()
        .enumerate()
        .map(|(i, z)| z.clamp(0.0, upper) + i as f64 * spacing)
        .collect())
}

/// Half-space `{z : normal . z >= offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        dot(&self.normal, z) >= self.offset - tol
    }

    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let nn = dot(&self.normal, &self.normal);
        let gap = dot(&self.normal, z) - self.offset;
        if gap >= 0.0 || nn == 0.0 {
            return z.to_vec();
        }
        z.iter().zip(&self.normal).map(|(x, a)| x - gap / nn * a).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projection onto the intersection of two convex sets by Dykstra's method.
///
/// Returns the last iterate of `proj_a`, so the result always lies in the
/// first set.
pub fn dykstra(
    z0: &[f64],
    proj_a: impl Fn(&[f64]) -> Vec<f64>,
    proj_b: impl Fn(&[f64]) -> Vec<f64>,
    max_iter: usize,
    tol: f64,
) -> Vec<f64> {
    let n = z0.len();
    let mut x = z0.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut a = proj_a(&x);
    for _ in 0..max_iter {
        let ya: Vec<f64> = x.iter().zip(&p).map(|(x, p)| x + p).collect();
        a = proj_a(&ya);
        p = ya.iter().zip(&a).map(|(y, a)| y - a).collect();
        let yb: Vec<f64> = a.iter().zip(&q).map(|(a, q)| a + q).collect();
        let b = proj_b(&yb);
        q = yb.iter().zip(&b).map(|(y, b)| y - b).collect();
        let change = b.iter().zip(&x).map(|(b, x)| (b - x).abs()).fold(0.0, f64::max);
        x = b;
        let gap = x.iter().zip(&a).map(|(x, a)| (x - a).abs()).fold(0.0, f64::max);
        if change <= tol && gap <= tol {
            break;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simplex_examples() {
        assert_eq!(project_capped_simplex(&[0.2, 0.3], 1.0), vec![0.2, 0.3]);
        assert_eq!(project_capped_simplex(&[-0.2, 0.3], 1.0), vec![0.0, 0.3]);
        let p = project_capped_simplex(&[1.0, 1.0], 1.0);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        assert_eq!(project_capped_simplex(&[2.0, -1.0], 1.0), vec![1.0, 0.0]);
    }

    #[test]
    fn out_of_order_pair() {
        let x = project_spacing(&[1.0, 0.5], 0.1, 4.0).unwrap();
        assert!((x[0] - 0.7).abs() < 1e-12 && (x[1] - 0.8).abs() < 1e-12);
        let again = project_spacing(&x, 0.1, 4.0).unwrap();
        assert_eq!(x, again);
        // nearest feasible point by dense search over the 2-antenna polytope
        let (mut best, mut arg) = (f64::INFINITY, (0.0, 0.0));
        let steps = 800;
        for i in 0..=steps {
            for j in i..=steps {
                let (a, b) = (4.0 * i as f64 / steps as f64, 4.0 * j as f64 / steps as f64);
                if b - a < 0.1 - 1e-12 {
                    continue;
                }
                let d = (a - 1.0).powi(2) + (b - 0.5).powi(2);
                if d < best {
                    best = d;
                    arg = (a, b);
                }
            }
        }
        assert!((arg.0 - x[0]).abs() <= 0.005 && (arg.1 - x[1]).abs() <= 0.005);
    }

    #[test]
    fn infeasible_spacing() {
        assert!(matches!(
            project_spacing(&[0.0; 4], 0.1, 0.2),
            Err(Error::InfeasibleGeometry { count: 4, .. })
        ));
    }

    #[test]
    fn dykstra_finds_intersection_projection() {
        // box [0,1]^2 intersect x + y >= 1.5, from (0, 0): answer (0.75, 0.75)
        let h = HalfSpace { normal: vec![1.0, 1.0], offset: 1.5 };
        let x = dykstra(
            &[0.0, 0.0],
            |z| z.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
            |z| h.project(z),
            1000,
            1e-14,
        );
        assert!((x[0] - 0.75).abs() < 1e-9 && (x[1] - 0.75).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn spacing_projection_is_feasible_and_idempotent(
            y in prop::collection::vec(-1.0f64..5.0, 1..8), spacing in 0.0f64..0.4
        ) {
            let x = project_spacing(&y, spacing, 4.0).unwrap();
            prop_assert!(x[0] >= 0.0 && *x.last().unwrap() <= 4.0 + 1e-12);
            for w in x.windows(2) {
                prop_assert!(w[1] - w[0] >= spacing - 1e-12);
            }
            let again = project_spacing(&x, spacing, 4.0).unwrap();
            for (a, b) in x.iter().zip(&again) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn capped_simplex_is_nearest(p in prop::collection::vec(-1.0f64..2.0, 2), q in prop::collection::vec(0.0f64..1.0, 2)) {
            let x = project_capped_simplex(&p, 1.0);
            prop_assert!(x.iter().all(|&v| v >= 0.0) && x.iter().sum::<f64>() <= 1.0 + 1e-12);
            // any feasible q is no closer
            if q.iter().sum::<f64>() <= 1.0 {
                let d = |a: &[f64]| a.iter().zip(&p).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
                prop_assert!(d(&x) <= d(&q) + 1e-12);
            }
        }

        #[test]
        fn isotonic_output_is_monotone(y in prop::collection::vec(-3.0f64..3.0, 1..20)) {
            let x = isotonic_regression(&y);
            prop_assert!(x.windows(2).all(|w| w[0] <= w[1] + 1e-12));
            prop_assert!((x.iter().sum::<f64>() - y.iter().sum::<f64>()).abs() < 1e-9);
        }
    }
}
