//! Cell-local space-time Galerkin predictor.
//!
//! The predictor lives on the reference element `[0,1]^(1+dim)` and is
//! expanded in a tensor nodal Lagrange basis on equispaced nodes, ordered
//! time-major: `l = a * S + sy * n + sx` with `S = n^dim`, `n = M + 1`.
//!
//! The Galerkin system `(-K^tau + F^1) u = F^0 u0 - sum_r dt/dx_r K^xi_r f_r`
//! factors as a Kronecker product, so the iteration is carried out as
//! `u = R - sum_r (dt/dx_r) (G (x) D_r) f_r` with `G = T^-1 M_tau` acting on
//! time indices and `D_r` the nodal differentiation matrix along axis `r`.
//! The dense matrices are assembled as well and used to cross-check.

use crate::equations::{zero_state, State, System};
use crate::error::{Error, Result};
use crate::quadrature::{equispaced_nodes, gauss_legendre_unit, lagrange, lagrange_derivative};
use crate::reconstruction::CellPoly;
use crate::scalar::{lit, Real};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a != T::zero() {
                    for j in 0..n {
                        out[(i, j)] += a * other[(k, j)];
                    }
                }
            }
        }
        out
    }

    pub fn kron(&self, other: &Matrix<T>) -> Matrix<T> {
        let (p, q) = (self.n, other.n);
        let mut out = Self::zeros(p * q);
        for i in 0..p {
            for j in 0..p {
                for k in 0..q {
                    for l in 0..q {
                        out[(i * q + k, j * q + l)] = self[(i, j)] * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix<T>> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * lit::<T>(1e-13);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[(r, col)].abs().partial_cmp(&a[(s, col)].abs()).unwrap())
                .unwrap();
            if !(a[(pivot, col)].abs() > tiny) {
                return Err(Error::SingularSystem);
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    if f != T::zero() {
                        for j in 0..n {
                            let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                            a[(r, j)] -= f * ac;
                            inv[(r, j)] -= f * ic;
                        }
                    }
                }
            }
        }
        Ok(inv)
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| (0..self.n).fold(T::zero(), |s, j| s + self[(i, j)] * x[j]))
            .collect()
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Tensor nodal basis of degree `deg` in time and in each of `dim` space axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeBasis<T> {
    pub deg: usize,
    pub dim: usize,
    pub nodes: Vec<T>,
}

impl<T: Real> SpaceTimeBasis<T> {
    pub fn new(deg: usize, dim: usize) -> Self {
        SpaceTimeBasis {
            deg,
            dim,
            nodes: equispaced_nodes(deg),
        }
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.deg + 1
    }

    /// Spatial nodes per time level.
    pub fn spatial(&self) -> usize {
        self.n().pow(self.dim as u32)
    }

    /// Total basis functions `L`.
    pub fn len(&self) -> usize {
        self.n() * self.spatial()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(a, sx, sy)` node indices of basis function `l`.
    pub fn split(&self, l: usize) -> (usize, usize, usize) {
        let n = self.n();
        let s = self.spatial();
        let (a, rest) = (l / s, l % s);
        (a, rest % n, rest / n)
    }

    /// Reference coordinates `(tau, xi, eta)` of node `l`.
    pub fn node(&self, l: usize) -> (T, [T; 2]) {
        let (a, sx, sy) = self.split(l);
        let eta = if self.dim == 2 { self.nodes[sy] } else { T::zero() };
        (self.nodes[a], [self.nodes[sx], eta])
    }

    /// `theta_l(tau, xi)`.
    pub fn value(&self, l: usize, tau: T, xi: [T; 2]) -> T {
        let (a, sx, sy) = self.split(l);
        let mut v = lagrange(&self.nodes, a, tau) * lagrange(&self.nodes, sx, xi[0]);
        if self.dim == 2 {
            v *= lagrange(&self.nodes, sy, xi[1]);
        }
        v
    }

    /// Derivative of `theta_l` along `axis` (0 = tau, 1 = xi, 2 = eta).
    pub fn derivative(&self, l: usize, axis: usize, tau: T, xi: [T; 2]) -> T {
        let (a, sx, sy) = self.split(l);
        let f = |k: usize, x: T, ax: usize| {
            if ax == axis {
                lagrange_derivative(&self.nodes, k, x)
            } else {
                lagrange(&self.nodes, k, x)
            }
        };
        let mut v = f(a, tau, 0) * f(sx, xi[0], 1);
        if self.dim == 2 {
            v *= f(sy, xi[1], 2);
        }
        v
    }
}

/// Dense Galerkin matrices on the reference element.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinMatrices<T> {
    pub basis: SpaceTimeBasis<T>,
    pub k_tau: Matrix<T>,
    pub k_xi: Vec<Matrix<T>>,
    pub f0: Matrix<T>,
    pub f1: Matrix<T>,
    /// `(-K^tau + F^1)^-1`
    pub system_inverse: Matrix<T>,
}

impl<T: Real> GalerkinMatrices<T> {
    /// Entries by tensor Gauss quadrature exact for the polynomial integrands.
    pub fn assemble(deg: usize, dim: usize) -> Result<Self> {
        if deg > 2 || !(1..=2).contains(&dim) {
            return Err(Error::InvalidParams(format!(
                "predictor degree {deg} in {dim}D not supported"
            )));
        }
        let basis = SpaceTimeBasis::<T>::new(deg, dim);
        let l = basis.len();
        let nq = (2 * deg + 1).div_ceil(2) + 1;
        let (qx, qw) = gauss_legendre_unit::<T>(nq);
        // spatial quadrature points (tensor) with weights
        let mut space_pts: Vec<([T; 2], T)> = Vec::new();
        for (i, &x) in qx.iter().enumerate() {
            if dim == 1 {
                space_pts.push(([x, T::zero()], qw[i]));
            } else {
                for (j, &y) in qx.iter().enumerate() {
                    space_pts.push(([x, y], qw[i] * qw[j]));
                }
            }
        }
        let mut k_tau = Matrix::zeros(l);
        let mut k_xi = vec![Matrix::zeros(l); dim];
        let mut f0 = Matrix::zeros(l);
        let mut f1 = Matrix::zeros(l);
        for &(xi, ws) in &space_pts {
            let at0: Vec<T> = (0..l).map(|k| basis.value(k, T::zero(), xi)).collect();
            let at1: Vec<T> = (0..l).map(|k| basis.value(k, T::one(), xi)).collect();
            for k in 0..l {
                for j in 0..l {
                    f0[(k, j)] += ws * at0[k] * at0[j];
                    f1[(k, j)] += ws * at1[k] * at1[j];
                }
            }
            for (t, wt) in qx.iter().zip(&qw) {
                let w = ws * *wt;
                let val: Vec<T> = (0..l).map(|k| basis.value(k, *t, xi)).collect();
                let dt: Vec<T> = (0..l).map(|k| basis.derivative(k, 0, *t, xi)).collect();
                for k in 0..l {
                    for j in 0..l {
                        k_tau[(k, j)] += w * dt[k] * val[j];
                    }
                }
                for (r, kx) in k_xi.iter_mut().enumerate() {
                    let dx: Vec<T> = (0..l).map(|k| basis.derivative(k, 1 + r, *t, xi)).collect();
                    for k in 0..l {
                        for j in 0..l {
                            kx[(k, j)] += w * val[k] * dx[j];
                        }
                    }
                }
            }
        }
        let mut system = f1.clone();
        for (s, k) in system.data.iter_mut().zip(&k_tau.data) {
            *s -= *k;
        }
        let system_inverse = system.inverse()?;
        Ok(GalerkinMatrices {
            basis,
            k_tau,
            k_xi,
            f0,
            f1,
            system_inverse,
        })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Nodal values of the space-time predictor of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorCoeffs<T> {
    pub deg: usize,
    pub dim: usize,
    pub values: Vec<State<T>>,
}

/// Kronecker-factored predictor iteration for one degree and dimension.
#[derive(Debug, Clone)]
pub struct PredictorKernel<T> {
    pub basis: SpaceTimeBasis<T>,
    /// `T^-1 M_tau`, `n x n`
    pub g: Matrix<T>,
    /// Nodal differentiation on `[0,1]`, `n x n`
    pub d: Matrix<T>,
    /// Centred spatial node coordinates, one per spatial node.
    centred: Vec<[T; 2]>,
}

impl<T: Real> PredictorKernel<T> {
    pub fn new(deg: usize, dim: usize) -> Result<Self> {
        let basis = SpaceTimeBasis::<T>::new(deg, dim);
        let n = basis.n();
        let nodes = basis.nodes.clone();
        let (qx, qw) = gauss_legendre_unit::<T>(deg + 2);
        let mut mass = Matrix::zeros(n);
        let mut kd = Matrix::zeros(n);
        let mut kt = Matrix::zeros(n);
        for (x, w) in qx.iter().zip(&qw) {
            for a in 0..n {
                for b in 0..n {
                    let la = lagrange(&nodes, a, *x);
                    let lb = lagrange(&nodes, b, *x);
                    mass[(a, b)] += *w * la * lb;
                    kd[(a, b)] += *w * la * lagrange_derivative(&nodes, b, *x);
                    kt[(a, b)] += *w * lagrange_derivative(&nodes, a, *x) * lb;
                }
            }
        }
        let mut tmat = Matrix::zeros(n);
        for a in 0..n {
            for b in 0..n {
                tmat[(a, b)] =
                    lagrange(&nodes, a, T::one()) * lagrange(&nodes, b, T::one()) - kt[(a, b)];
            }
        }
        let g = tmat.inverse()?.mul(&mass);
        let d = mass.inverse()?.mul(&kd);
        let half = lit::<T>(0.5);
        let s = basis.spatial();
        let centred = (0..s)
            .map(|k| {
                let (_, xi) = basis.node(k);
                if dim == 2 {
                    [xi[0] - half, xi[1] - half]
                } else {
                    [xi[0] - half, T::zero()]
                }
            })
            .collect();
        Ok(PredictorKernel { basis, g, d, centred })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Runs `deg + 1` fixed-point iterations from the reconstruction replicated
    /// over the time nodes. `lambda[r] = dt / dx_r`. Writes the nodal values to
    /// `out[..L]` and returns the max-norm change of the last iteration.
    /// `scratch` must hold at least `4 L` states.
    pub fn predict_into(
        &self,
        sys: &System<T>,
        poly: &CellPoly<T>,
        lambda: [T; 2],
        out: &mut [State<T>],
        scratch: &mut [State<T>],
    ) -> Result<T> {
        self.iterate(sys, poly, lambda, self.basis.deg + 1, out, scratch)
    }

    fn iterate(
        &self,
        sys: &System<T>,
        poly: &CellPoly<T>,
        lambda: [T; 2],
        iterations: usize,
        out: &mut [State<T>],
        scratch: &mut [State<T>],
    ) -> Result<T> {
        let n = self.basis.n();
        let s = self.basis.spatial();
        let l = n * s;
        let dim = self.basis.dim;
        let m = sys.m();
        let (init, rest) = scratch.split_at_mut(s);
        let (fx, rest) = rest.split_at_mut(l);
        let (fy, rest) = rest.split_at_mut(l);
        let h = &mut rest[..l];
        for (k, c) in self.centred.iter().enumerate() {
            init[k] = poly.evaluate(c[0], c[1]);
            sys.check_physical(&init[k])?;
        }
        for a in 0..n {
            out[a * s..(a + 1) * s].copy_from_slice(init);
        }
        let mut residual = T::zero();
        if self.basis.deg == 0 {
            return Ok(residual);
        }
        for _ in 0..iterations {
            for node in 0..l {
                let fl = sys.fluxes_all(&out[node])?;
                fx[node] = fl[0];
                fy[node] = fl[1];
            }
            // h = sum_r lambda_r D_r f_r, written with differences so that
            // constant fluxes give exactly zero
            for node in 0..l {
                let (a, sx, sy) = self.basis.split(node);
                let mut acc = zero_state();
                for t in 0..n {
                    if t != sx {
                        let coef = lambda[0] * self.d[(sx, t)];
                        let (fs, ft) = (&fx[node], &fx[a * s + sy * n + t]);
                        for v in 0..m {
                            acc[v] += coef * (ft[v] - fs[v]);
                        }
                    }
                }
                if dim == 2 {
                    for t in 0..n {
                        if t != sy {
                            let coef = lambda[1] * self.d[(sy, t)];
                            let (fs, ft) = (&fy[node], &fy[a * s + t * n + sx]);
                            for v in 0..m {
                                acc[v] += coef * (ft[v] - fs[v]);
                            }
                        }
                    }
                }
                h[node] = acc;
            }
            residual = T::zero();
            for a in 0..n {
                for k in 0..s {
                    let mut u = init[k];
                    for c in 0..n {
                        let gac = self.g[(a, c)];
                        let hv = &h[c * s + k];
                        for v in 0..m {
                            u[v] -= gac * hv[v];
                        }
                    }
                    let old = &out[a * s + k];
                    for v in 0..m {
                        residual = residual.max((u[v] - old[v]).abs());
                    }
                    out[a * s + k] = u;
                }
            }
        }
        for u in out[..l].iter() {
            sys.check_physical(u)?;
        }
        Ok(residual)
    }

    pub fn compute_predictor(
        &self,
        sys: &System<T>,
        poly: &CellPoly<T>,
        lambda: [T; 2],
    ) -> Result<(PredictorCoeffs<T>, T)> {
        self.compute_with_iterations(sys, poly, lambda, self.basis.deg + 1)
    }

    /// As [`Self::compute_predictor`] with an explicit iteration count.
    pub fn compute_with_iterations(
        &self,
        sys: &System<T>,
        poly: &CellPoly<T>,
        lambda: [T; 2],
        iterations: usize,
    ) -> Result<(PredictorCoeffs<T>, T)> {
        let l = self.len();
        let mut out = vec![zero_state(); l];
        let mut scratch = vec![zero_state(); 4 * l];
        let res = self.iterate(sys, poly, lambda, iterations, &mut out, &mut scratch)?;
        Ok((
            PredictorCoeffs {
                deg: self.basis.deg,
                dim: self.basis.dim,
                values: out,
            },
            res,
        ))
    }
}

/// Same iteration through the dense `L x L` matrices (reference path).
pub fn compute_predictor_dense<T: Real>(
    mats: &GalerkinMatrices<T>,
    sys: &System<T>,
    poly: &CellPoly<T>,
    lambda: [T; 2],
) -> Result<PredictorCoeffs<T>> {
    let basis = &mats.basis;
    let l = basis.len();
    let m = sys.m();
    let half = lit::<T>(0.5);
    let u0: Vec<State<T>> = (0..l)
        .map(|k| {
            let (_, xi) = basis.node(k);
            let eta = if basis.dim == 2 { xi[1] - half } else { T::zero() };
            poly.evaluate(xi[0] - half, eta)
        })
        .collect();
    let mut u = u0.clone();
    for _ in 0..=basis.deg {
        let f: Vec<[State<T>; 2]> = u.iter().map(|s| sys.fluxes_all(s)).collect::<Result<_>>()?;
        let mut next = vec![zero_state(); l];
        for v in 0..m {
            let mut rhs = mats.f0.apply(&u0.iter().map(|s| s[v]).collect::<Vec<_>>());
            for (r, kx) in mats.k_xi.iter().enumerate() {
                let fr: Vec<T> = f.iter().map(|fl| fl[r][v] * lambda[r]).collect();
                let kf = kx.apply(&fr);
                for (a, b) in rhs.iter_mut().zip(kf) {
                    *a -= b;
                }
            }
            for (k, val) in mats.system_inverse.apply(&rhs).into_iter().enumerate() {
                next[k][v] = val;
            }
        }
        u = next;
    }
    Ok(PredictorCoeffs {
        deg: basis.deg,
        dim: basis.dim,
        values: u,
    })
}

/// `sum_l u_l theta_l(tau, xi)` with `xi` in reference coordinates `[0,1]^dim`.
pub fn evaluate_predictor<T: Real>(coeffs: &PredictorCoeffs<T>, tau: T, xi: [T; 2]) -> State<T> {
    let basis = SpaceTimeBasis::<T>::new(coeffs.deg, coeffs.dim);
    let mut u = zero_state();
    for (l, c) in coeffs.values.iter().enumerate() {
        let w = basis.value(l, tau, xi);
        for v in 0..u.len() {
            u[v] += w * c[v];
        }
    }
    u
}

/// Sparse interpolation weights from a predictor's nodal values to the face
/// quadrature points at the scheme's time nodes.
///
/// Entries are grouped by `(side, q, g)`; sides are x_lo, x_hi, y_lo, y_hi.
#[derive(Debug, Clone)]
pub struct TraceMap<T> {
    pub sides: usize,
    pub nt: usize,
    pub ng: usize,
    offsets: Vec<usize>,
    entries: Vec<(usize, T)>,
}

impl<T: Real> TraceMap<T> {
    /// `time_nodes`: scheme time nodes in `[0,1]`; `face_pts`: Gauss points along
    /// a 2D face (a single dummy point in 1D).
    pub fn new(deg: usize, dim: usize, time_nodes: &[T], face_pts: &[T]) -> Self {
        let basis = SpaceTimeBasis::<T>::new(deg, dim);
        let nodes = &basis.nodes;
        let n = basis.n();
        let s = basis.spatial();
        let sides = 2 * dim;
        let ng = face_pts.len();
        let mut offsets = vec![0];
        let mut entries = Vec::new();
        for side in 0..sides {
            for &tq in time_nodes {
                for &pg in face_pts {
                    let (px, py) = match side {
                        0 => (T::zero(), pg),
                        1 => (T::one(), pg),
                        2 => (pg, T::zero()),
                        _ => (pg, T::one()),
                    };
                    for a in 0..n {
                        let wa = lagrange(nodes, a, tq);
                        if wa == T::zero() {
                            continue;
                        }
                        for k in 0..s {
                            let (sx, sy) = (k % n, k / n);
                            let mut w = wa * lagrange(nodes, sx, px);
                            if dim == 2 {
                                w *= lagrange(nodes, sy, py);
                            }
                            if w != T::zero() {
                                entries.push((a * s + k, w));
                            }
                        }
                    }
                    offsets.push(entries.len());
                }
            }
        }
        TraceMap {
            sides,
            nt: time_nodes.len(),
            ng,
            offsets,
            entries,
        }
    }

    #[inline]
    pub fn weights(&self, side: usize, q: usize, g: usize) -> &[(usize, T)] {
        let k = (side * self.nt + q) * self.ng + g;
        &self.entries[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Fills `out[(side * nt + q) * ng + g]` from nodal values.
    #[inline]
    pub fn traces(&self, values: &[State<T>], m: usize, out: &mut [State<T>]) {
        for (k, o) in out.iter_mut().enumerate().take(self.offsets.len() - 1) {
            let mut u = zero_state();
            for &(l, w) in &self.entries[self.offsets[k]..self.offsets[k + 1]] {
                let val = &values[l];
                for v in 0..m {
                    u[v] += w * val[v];
                }
            }
            *o = u;
        }
    }
}
