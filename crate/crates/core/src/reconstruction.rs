//! Cell-average to in-cell polynomial reconstruction: constant, minmod-limited
//! linear and third-order CWENOZ (dimension by dimension on 2D grids).

use std::fmt;
use std::str::FromStr;

use crate::equations::{zero_state, State, MAX_VARS};
use crate::error::Error;
use crate::mesh::Field;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReconstructionKind {
    P0,
    MinmodLinear,
    Cweno3,
}

impl ReconstructionKind {
    /// Formal spatial accuracy.
    pub fn order(self) -> usize {
        match self {
            ReconstructionKind::P0 => 1,
            ReconstructionKind::MinmodLinear => 2,
            ReconstructionKind::Cweno3 => 3,
        }
    }

    /// Reconstruction paired with a predictor of degree `deg`.
    pub fn for_degree(deg: usize) -> Self {
        match deg {
            0 => ReconstructionKind::P0,
            1 => ReconstructionKind::MinmodLinear,
            _ => ReconstructionKind::Cweno3,
        }
    }
}

impl fmt::Display for ReconstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReconstructionKind::P0 => "p0",
            ReconstructionKind::MinmodLinear => "minmod",
            ReconstructionKind::Cweno3 => "cweno3",
        })
    }
}

impl FromStr for ReconstructionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "p0" | "constant" => Ok(ReconstructionKind::P0),
            "minmod" | "minmod_linear" => Ok(ReconstructionKind::MinmodLinear),
            "cweno3" | "cwenoz3" => Ok(ReconstructionKind::Cweno3),
            _ => Err(Error::Config(format!(
                "unknown reconstruction '{s}' (valid: p0, minmod, cweno3)"
            ))),
        }
    }
}

pub const C0: usize = 0;
pub const CX: usize = 1;
pub const CY: usize = 2;
pub const CXX: usize = 3;
pub const CYY: usize = 4;
pub const CXY: usize = 5;

/// Polynomial of degree <= 2 in the centred local coordinates
/// `(xi, eta) in [-1/2, 1/2]^2`:
///
/// `c0 + cx xi + cy eta + cxx (xi^2 - 1/12) + cyy (eta^2 - 1/12) + cxy xi eta`
///
/// Every non-constant basis function has zero cell mean, so `c0` is the cell
/// average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPoly<T> {
    pub c: [State<T>; 6],
}

impl<T: Real> CellPoly<T> {
    pub fn constant(u: State<T>) -> Self {
        let mut c = [zero_state(); 6];
        c[C0] = u;
        CellPoly { c }
    }

    pub fn mean(&self) -> State<T> {
        self.c[C0]
    }

    /// Value at centred local coordinates.
    #[inline]
    pub fn evaluate(&self, xi: T, eta: T) -> State<T> {
        let twelfth = T::one() / lit::<T>(12.0);
        let b = [
            T::one(),
            xi,
            eta,
            xi * xi - twelfth,
            eta * eta - twelfth,
            xi * eta,
        ];
        let mut u = zero_state();
        for (ck, bk) in self.c.iter().zip(b) {
            if bk != T::zero() {
                for v in 0..MAX_VARS {
                    u[v] += ck[v] * bk;
                }
            }
        }
        u
    }

    /// Value on one face. `side` is 0..4 for x_lo, x_hi, y_lo, y_hi; `s` is
    /// the position along the face in `[0, 1]` (ignored in 1D).
    pub fn evaluate_boundary(&self, side: usize, s: T) -> State<T> {
        let half = lit::<T>(0.5);
        let t = s - half;
        match side {
            0 => self.evaluate(-half, t),
            1 => self.evaluate(half, t),
            2 => self.evaluate(t, -half),
            _ => self.evaluate(t, half),
        }
    }
}

#[inline]
fn minmod<T: Real>(a: T, b: T) -> T {
    if a * b <= T::zero() {
        T::zero()
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Scalar CWENOZ3 on means `(a, b, c)` of cells `i-1, i, i+1`, in units of
/// the cell width. Returns `(slope, curvature, central weight)`.
#[inline]
pub fn cweno3_1d<T: Real>(a: T, b: T, c: T, eps: T) -> (T, T, T) {
    let quarter = lit::<T>(0.25);
    let half = lit::<T>(0.5);
    let dl = quarter;
    let dr = quarter;
    let d0 = half;
    let sl = b - a;
    let sr = c - b;
    let s0 = half * (c - a);
    let q0 = a - lit::<T>(2.0) * b + c;
    let beta_l = sl * sl;
    let beta_r = sr * sr;
    let beta_0 = s0 * s0 + lit::<T>(13.0 / 3.0) * q0 * q0;
    let tau = (beta_r - beta_l).abs();
    let al = dl * (T::one() + tau / (beta_l + eps));
    let ar = dr * (T::one() + tau / (beta_r + eps));
    let a0 = d0 * (T::one() + tau / (beta_0 + eps));
    let sum = al + ar + a0;
    let (wl, wr, w0) = (al / sum, ar / sum, a0 / sum);
    (w0 * s0 + wl * sl + wr * sr, w0 * q0, w0)
}

/// Reconstruction on interior cell `(i, j)`; ghosts must be filled.
pub fn reconstruct<T: Real>(
    kind: ReconstructionKind,
    field: &Field<T>,
    m: usize,
    i: usize,
    j: usize,
) -> CellPoly<T> {
    let (i, j) = (i as isize, j as isize);
    let u = *field.at(i, j);
    let mut p = CellPoly::constant(u);
    if kind == ReconstructionKind::P0 {
        return p;
    }
    let grid = &field.grid;
    let dim = grid.dim;
    let west = field.at(i - 1, j);
    let east = field.at(i + 1, j);
    match kind {
        ReconstructionKind::P0 => {}
        ReconstructionKind::MinmodLinear => {
            for v in 0..m {
                p.c[CX][v] = minmod(u[v] - west[v], east[v] - u[v]);
            }
            if dim == 2 {
                let south = field.at(i, j - 1);
                let north = field.at(i, j + 1);
                for v in 0..m {
                    p.c[CY][v] = minmod(u[v] - south[v], north[v] - u[v]);
                }
            }
        }
        ReconstructionKind::Cweno3 => {
            let d0 = lit::<T>(0.5);
            let ex = grid.dx[0] * grid.dx[0];
            if dim == 1 {
                for v in 0..m {
                    let (s, q, _) = cweno3_1d(west[v], u[v], east[v], ex);
                    p.c[CX][v] = s;
                    p.c[CXX][v] = q;
                }
            } else {
                let ey = grid.dx[1] * grid.dx[1];
                let south = field.at(i, j - 1);
                let north = field.at(i, j + 1);
                let sw = field.at(i - 1, j - 1);
                let se = field.at(i + 1, j - 1);
                let nw = field.at(i - 1, j + 1);
                let ne = field.at(i + 1, j + 1);
                for v in 0..m {
                    let (sx, qx, wx) = cweno3_1d(west[v], u[v], east[v], ex);
                    let (sy, qy, wy) = cweno3_1d(south[v], u[v], north[v], ey);
                    p.c[CX][v] = sx;
                    p.c[CXX][v] = qx;
                    p.c[CY][v] = sy;
                    p.c[CYY][v] = qy;
                    let att = (wx / d0).min(T::one()) * (wy / d0).min(T::one());
                    p.c[CXY][v] = att * lit::<T>(0.25) * (ne[v] - se[v] - nw[v] + sw[v]);
                }
            }
        }
    }
    p
}

/// Reconstructions of every interior cell, indexed by cell id.
pub fn reconstruct_all<T: Real>(kind: ReconstructionKind, field: &Field<T>, m: usize) -> Vec<CellPoly<T>> {
    let grid = field.grid;
    let mut out = Vec::with_capacity(grid.ncells());
    for j in 0..grid.n[1] {
        for i in 0..grid.n[0] {
            out.push(reconstruct(kind, field, m, i, j));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::System;
    use crate::mesh::{BoundarySpec, Grid};

    fn field_1d(means: &[f64]) -> Field<f64> {
        let g = Grid::new_1d(0.0, means.len() as f64, means.len()).unwrap();
        let mut f = Field::from_fn(g, |i, _| [means[i], 0.0, 0.0, 0.0]);
        BoundarySpec::uniform(crate::mesh::BoundaryCondition::FreeFlow)
            .fill_ghosts(&System::advection(1.0), &mut f);
        f
    }

    /// Exact cell averages of `u` on a periodic 1D grid.
    fn averaged(n: usize, prim: impl Fn(f64) -> f64) -> Field<f64> {
        let g = Grid::new_1d(0.0, 1.0, n).unwrap();
        let h = 1.0 / n as f64;
        let mut f = Field::from_fn(g, |i, _| {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            [(prim(b) - prim(a)) / h, 0.0, 0.0, 0.0]
        });
        BoundarySpec::periodic().fill_ghosts(&System::advection(1.0), &mut f);
        f
    }

    #[test]
    fn constants_are_reproduced() {
        let f = field_1d(&[2.5; 5]);
        for kind in [ReconstructionKind::P0, ReconstructionKind::MinmodLinear, ReconstructionKind::Cweno3] {
            let p = reconstruct(kind, &f, 1, 2, 0);
            assert_eq!(p, CellPoly::constant([2.5, 0.0, 0.0, 0.0]));
        }
    }

    #[test]
    fn minmod_slopes() {
        let p = reconstruct(ReconstructionKind::MinmodLinear, &field_1d(&[1.0, 2.0, 3.0]), 1, 1, 0);
        assert_eq!(p.c[CX][0], 1.0);
        let p = reconstruct(ReconstructionKind::MinmodLinear, &field_1d(&[1.0, 3.0, 2.0]), 1, 1, 0);
        assert_eq!(p.c[CX][0], 0.0);
    }

    #[test]
    fn boundary_evaluation() {
        let mut p = CellPoly::<f64>::constant([2.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.evaluate_boundary(1, 0.3)[0], 2.0);
        p.c[CX][0] = 1.0;
        assert_eq!(p.evaluate_boundary(1, 0.5)[0], 2.5);
        assert_eq!(p.evaluate_boundary(0, 0.5)[0], 1.5);
    }

    #[test]
    fn minmod_bounded_on_steps() {
        let means = [0.0, 0.0, 1.0, 1.0, 0.3, 0.3, 2.0];
        let f = field_1d(&means);
        for i in 1..means.len() - 1 {
            let p = reconstruct(ReconstructionKind::MinmodLinear, &f, 1, i, 0);
            let lo = means[i - 1].min(means[i]).min(means[i + 1]);
            let hi = means[i - 1].max(means[i]).max(means[i + 1]);
            for side in 0..2 {
                let v = p.evaluate_boundary(side, 0.5)[0];
                assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
            }
        }
    }

    #[test]
    fn minmod_exact_on_monotone_linear() {
        let f = field_1d(&[0.5, 1.5, 2.5, 3.5]);
        let p = reconstruct(ReconstructionKind::MinmodLinear, &f, 1, 1, 0);
        assert_eq!(p.evaluate_boundary(1, 0.5)[0], 2.0);
    }

    #[test]
    fn cweno_optimal_polynomial_interpolates_quadratics() {
        // With equal linear sub-stencil indicators the weights are the linear
        // ones and the reconstruction is the optimal parabola.
        // u = x^2 on cells centred at -1, 0, 1: means 1 + 1/12, 1/12, 1 + 1/12.
        let f = field_1d(&[13.0 / 12.0, 1.0 / 12.0, 13.0 / 12.0]);
        let p = reconstruct(ReconstructionKind::Cweno3, &f, 1, 1, 0);
        for x in [-0.5, -0.2, 0.0, 0.4, 0.5] {
            assert!((p.evaluate(x, 0.0)[0] - x * x).abs() < 1e-13);
        }
    }

    #[test]
    fn cweno_symmetric_and_mean_preserving() {
        let f = averaged(16, |x| {
            -(2.0 * std::f64::consts::PI * x).cos() / (2.0 * std::f64::consts::PI)
        });
        for i in 0..16 {
            let p = reconstruct(ReconstructionKind::Cweno3, &f, 1, i, 0);
            // 2-point Gauss integrates the parabola exactly
            let g = 0.5 / 3f64.sqrt();
            let avg = 0.5 * (p.evaluate(-g, 0.0)[0] + p.evaluate(g, 0.0)[0]);
            assert!((avg - f.cell(i)[0]).abs() < 1e-14);
        }
    }

    fn recon_error(kind: ReconstructionKind, n: usize, skip_extrema: bool) -> f64 {
        use std::f64::consts::PI;
        let w = 2.0 * PI;
        let f = averaged(n, |x| -(w * x).cos() / w);
        let h = 1.0 / n as f64;
        let mut err = 0.0;
        for i in 0..n {
            let xc = (i as f64 + 0.5) * h;
            if skip_extrema && ((w * xc).cos()).abs() < 0.2 {
                continue;
            }
            let p = reconstruct(kind, &f, 1, i, 0);
            for side in 0..2 {
                let xs = xc + if side == 0 { -0.5 * h } else { 0.5 * h };
                err += h * (p.evaluate_boundary(side, 0.5)[0] - (w * xs).sin()).abs();
            }
        }
        err
    }

    #[test]
    fn reconstruction_orders() {
        for (kind, skip, min_rate) in [
            (ReconstructionKind::MinmodLinear, true, 1.8),
            (ReconstructionKind::Cweno3, false, 2.8),
        ] {
            let errs: Vec<f64> = [64, 128, 256, 512].iter().map(|&n| recon_error(kind, n, skip)).collect();
            for k in 1..errs.len() {
                let rate = (errs[k - 1] / errs[k]).log2();
                assert!(rate >= min_rate, "{kind}: rate {rate} ({errs:?})");
            }
        }
    }

    #[test]
    fn cweno_2d_reproduces_bilinear_and_separable_quadratics() {
        // u = x y + y: cell means are exact products of 1D means.
        let g = Grid::new_2d([0.0, 0.0], [4.0, 4.0], [4, 4]).unwrap();
        let mut f = Field::from_fn(g, |i, j| {
            let (x, y) = (i as f64 + 0.5, j as f64 + 0.5);
            [x * y + y, 0.0, 0.0, 0.0]
        });
        BoundarySpec::uniform(crate::mesh::BoundaryCondition::FreeFlow)
            .fill_ghosts(&System::advection(1.0), &mut f);
        let p = reconstruct(ReconstructionKind::Cweno3, &f, 1, 1, 2);
        let (xc, yc) = (1.5, 2.5);
        for (a, b) in [(-0.5, -0.5), (0.5, 0.2), (0.1, 0.5)] {
            let exact = (xc + a) * (yc + b) + (yc + b);
            assert!((p.evaluate(a, b)[0] - exact).abs() < 1e-13);
        }
    }
}
