//! Gauss-Legendre rules and 1D nodal Lagrange bases.

use crate::scalar::{lit, Real};

/// Gauss-Legendre rule on `[0, 1]` with `n` points (1..=5), weights summing to 1.
pub fn gauss_legendre_unit<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let (x, w): (&[f64], &[f64]) = match n {
        1 => (&[0.0], &[2.0]),
        2 => {
            const A: f64 = 0.577_350_269_189_625_8;
            (&[-A, A], &[1.0, 1.0])
        }
        3 => {
            const A: f64 = 0.774_596_669_241_483_4;
            (&[-A, 0.0, A], &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => (
            &[
                -0.861_136_311_594_052_6,
                -0.339_981_043_584_856_3,
                0.339_981_043_584_856_3,
                0.861_136_311_594_052_6,
            ],
            &[
                0.347_854_845_137_453_9,
                0.652_145_154_862_546_1,
                0.652_145_154_862_546_1,
                0.347_854_845_137_453_9,
            ],
        ),
        5 => (
            &[
                -0.906_179_845_938_664,
                -0.538_469_310_105_683,
                0.0,
                0.538_469_310_105_683,
                0.906_179_845_938_664,
            ],
            &[
                0.236_926_885_056_189_1,
                0.478_628_670_499_366_5,
                0.568_888_888_888_888_9,
                0.478_628_670_499_366_5,
                0.236_926_885_056_189_1,
            ],
        ),
        _ => panic!("Gauss-Legendre rule with {n} points not tabulated"),
    };
    let nodes = x.iter().map(|&xi| lit::<T>(0.5 * (xi + 1.0))).collect();
    let weights = w.iter().map(|&wi| lit::<T>(0.5 * wi)).collect();
    (nodes, weights)
}

/// Equispaced nodes on `[0, 1]` for degree `deg`; degree 0 uses the midpoint.
pub fn equispaced_nodes<T: Real>(deg: usize) -> Vec<T> {
    if deg == 0 {
        return vec![lit(0.5)];
    }
    (0..=deg)
        .map(|k| T::from_usize(k).unwrap() / T::from_usize(deg).unwrap())
        .collect()
}

/// `j`-th Lagrange basis polynomial on `nodes`, evaluated at `x`.
pub fn lagrange<T: Real>(nodes: &[T], j: usize, x: T) -> T {
    let mut v = T::one();
    for (k, &xk) in nodes.iter().enumerate() {
        if k != j {
            v *= (x - xk) / (nodes[j] - xk);
        }
    }
    v
}

/// Derivative of the `j`-th Lagrange basis polynomial at `x`.
pub fn lagrange_derivative<T: Real>(nodes: &[T], j: usize, x: T) -> T {
    let mut total = T::zero();
    for (skip, &xs) in nodes.iter().enumerate() {
        if skip == j {
            continue;
        }
        let mut term = T::one() / (nodes[j] - xs);
        for (k, &xk) in nodes.iter().enumerate() {
            if k != j && k != skip {
                term *= (x - xk) / (nodes[j] - xk);
            }
        }
        total += term;
    }
    total
}

/// Time quadrature over one step, in the local time `tau ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeQuadrature<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> TimeQuadrature<T> {
    /// Rule whose nodes coincide with the equispaced predictor nodes of degree
    /// `deg`: midpoint (0), trapezoid (1), Cavalieri-Simpson (2).
    pub fn for_degree(deg: usize) -> Self {
        let w: Vec<f64> = match deg {
            0 => vec![1.0],
            1 => vec![0.5, 0.5],
            2 => vec![1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0],
            _ => panic!("no time rule for predictor degree {deg}"),
        };
        TimeQuadrature {
            nodes: equispaced_nodes(deg),
            weights: w.into_iter().map(lit).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_monomials() {
        for n in 1..=5 {
            let (x, w) = gauss_legendre_unit::<f64>(n);
            for p in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn lagrange_is_nodal_and_partitions_unity() {
        for deg in 0..=3 {
            let nodes = equispaced_nodes::<f64>(deg);
            for (i, &xi) in nodes.iter().enumerate() {
                for j in 0..nodes.len() {
                    let v = lagrange(&nodes, j, xi);
                    assert_eq!(v, if i == j { 1.0 } else { 0.0 });
                }
            }
            let x = 0.3141;
            let s: f64 = (0..nodes.len()).map(|j| lagrange(&nodes, j, x)).sum();
            assert!((s - 1.0).abs() < 1e-14);
            let ds: f64 = (0..nodes.len()).map(|j| lagrange_derivative(&nodes, j, x)).sum();
            assert!(ds.abs() < 1e-13);
        }
    }

    #[test]
    fn lagrange_derivative_matches_finite_difference() {
        let nodes = equispaced_nodes::<f64>(2);
        for j in 0..3 {
            let x = 0.37;
            let h = 1e-6;
            let fd = (lagrange(&nodes, j, x + h) - lagrange(&nodes, j, x - h)) / (2.0 * h);
            assert!((fd - lagrange_derivative(&nodes, j, x)).abs() < 1e-8);
        }
    }

    #[test]
    fn time_rules() {
        for (deg, exact) in [(0, 1), (1, 1), (2, 3)] {
            let q = TimeQuadrature::<f64>::for_degree(deg);
            let s: f64 = q.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
            for p in 0..=exact {
                let v: f64 = q
                    .nodes
                    .iter()
                    .zip(&q.weights)
                    .map(|(t, w)| w * t.powi(p))
                    .sum();
                assert!((v - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "deg={deg} p={p}");
            }
        }
    }
}
