//! One-step updates of the cell averages: the FV-ADER `P0PM` scheme and a
//! semidiscrete third-order SSP Runge-Kutta scheme, plus CFL control.
//!
//! Every interface flux is computed once, integrated over the face and the
//! step (or stage), stored in a [`StepRecord`] and applied with opposite signs
//! to the two neighbouring cells.

use std::fmt;
use std::str::FromStr;

use crate::ader::{PredictorKernel, TraceMap};
use crate::equations::{zero_state, State, System};
use crate::error::{Error, Result};
use crate::fluxes::rusanov_pair;
use crate::mesh::{BoundaryCondition, BoundarySpec, Field, Grid};
use crate::quadrature::{gauss_legendre_unit, TimeQuadrature};
use crate::reconstruction::{reconstruct_all, CellPoly, ReconstructionKind};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// FV-ADER with a predictor of degree `deg`.
    Ader { deg: usize },
    Rk3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheme {
    pub kind: SchemeKind,
    pub recon: ReconstructionKind,
}

impl Scheme {
    pub fn p0p1() -> Self {
        Scheme {
            kind: SchemeKind::Ader { deg: 1 },
            recon: ReconstructionKind::MinmodLinear,
        }
    }

    pub fn p0p2() -> Self {
        Scheme {
            kind: SchemeKind::Ader { deg: 2 },
            recon: ReconstructionKind::Cweno3,
        }
    }

    pub fn rk3() -> Self {
        Scheme {
            kind: SchemeKind::Rk3,
            recon: ReconstructionKind::Cweno3,
        }
    }

    pub fn ader(deg: usize) -> Self {
        Scheme {
            kind: SchemeKind::Ader { deg },
            recon: ReconstructionKind::for_degree(deg),
        }
    }

    /// Formal order of accuracy.
    pub fn order(&self) -> usize {
        match self.kind {
            SchemeKind::Ader { deg } => deg + 1,
            SchemeKind::Rk3 => 3,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SchemeKind::Ader { deg } => write!(f, "p0p{deg}"),
            SchemeKind::Rk3 => f.write_str("rk3"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p0p0" => Ok(Scheme::ader(0)),
            "p0p1" => Ok(Scheme::p0p1()),
            "p0p2" => Ok(Scheme::p0p2()),
            "rk3" => Ok(Scheme::rk3()),
            _ => Err(Error::Config(format!(
                "unknown scheme '{s}' (valid: p0p1, p0p2, rk3)"
            ))),
        }
    }
}

/// Explicit Runge-Kutta scheme in Butcher form.
#[derive(Debug, Clone, PartialEq)]
pub struct RkScheme<T> {
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
}

impl<T: Real> RkScheme<T> {
    /// Three-stage third-order SSP scheme of Shu and Osher.
    pub fn ssp_rk3() -> Self {
        let q = lit::<T>(0.25);
        RkScheme {
            a: vec![vec![], vec![T::one()], vec![q, q]],
            b: vec![
                T::one() / lit::<T>(6.0),
                T::one() / lit::<T>(6.0),
                lit::<T>(2.0) / lit::<T>(3.0),
            ],
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn c(&self) -> Vec<T> {
        self.a.iter().map(|row| row.iter().fold(T::zero(), |s, &x| s + x)).collect()
    }
}

/// Timestep from the CFL condition: `cfl dx / max lambda` in 1D,
/// `cfl / max(lambda_x/dx + lambda_y/dy)` in 2D.
pub fn compute_dt<T: Real>(sys: &System<T>, field: &Field<T>, cfl: T) -> Result<T> {
    let grid = &field.grid;
    let mut rate = T::zero();
    for id in 0..grid.ncells() {
        let u = field.cell(id);
        let mut r = T::zero();
        for axis in 0..grid.dim {
            let mut n = [T::zero(); 2];
            n[axis] = T::one();
            r += sys.wave_speed(u, &n)? / grid.dx[axis];
        }
        rate = rate.max(r);
    }
    if !(rate > T::zero()) {
        return Err(Error::InvalidParams("zero wave speed, no CFL limit".into()));
    }
    Ok(cfl / rate)
}

/// Shortens `dt` so that the step lands exactly on `t_max`.
pub fn clip_dt<T: Real>(t: T, dt: T, t_max: T) -> T {
    if t + dt > t_max {
        t_max - t
    } else {
        dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceInfo {
    pub axis: usize,
    pub left: Option<usize>,
    pub right: Option<usize>,
    /// Domain side (`X_LO`..`Y_HI`) for non-periodic boundary faces.
    pub boundary: Option<usize>,
}

/// Interfaces of a Cartesian grid; periodic pairs share one face.
#[derive(Debug, Clone)]
pub struct FaceTopology<T> {
    pub faces: Vec<FaceInfo>,
    /// Face id of each cell side (x_lo, x_hi, y_lo, y_hi).
    pub cell_faces: Vec<[usize; 4]>,
    pub length: [T; 2],
    pub sides: usize,
}

impl<T: Real> FaceTopology<T> {
    pub fn new(grid: &Grid<T>, bc: &BoundarySpec<T>) -> Self {
        let (nx, ny) = (grid.n[0], grid.n[1]);
        let mut faces = Vec::new();
        let mut cell_faces = vec![[usize::MAX; 4]; grid.ncells()];
        let px = bc.is_periodic(0);
        let nfx = if px { nx } else { nx + 1 };
        for j in 0..ny {
            for f in 0..nfx {
                let left = if f > 0 {
                    Some(grid.cell_id(f - 1, j))
                } else if px {
                    Some(grid.cell_id(nx - 1, j))
                } else {
                    None
                };
                let right = if f < nx { Some(grid.cell_id(f, j)) } else { None };
                let boundary = match (left, right) {
                    (None, _) => Some(0),
                    (_, None) => Some(1),
                    _ => None,
                };
                faces.push(FaceInfo { axis: 0, left, right, boundary });
            }
            for i in 0..nx {
                let c = grid.cell_id(i, j);
                cell_faces[c][0] = j * nfx + i;
                cell_faces[c][1] = j * nfx + (i + 1) % nfx;
            }
        }
        if grid.dim == 2 {
            let off = faces.len();
            let py = bc.is_periodic(1);
            let nfy = if py { ny } else { ny + 1 };
            for f in 0..nfy {
                for i in 0..nx {
                    let left = if f > 0 {
                        Some(grid.cell_id(i, f - 1))
                    } else if py {
                        Some(grid.cell_id(i, ny - 1))
                    } else {
                        None
                    };
                    let right = if f < ny { Some(grid.cell_id(i, f)) } else { None };
                    let boundary = match (left, right) {
                        (None, _) => Some(2),
                        (_, None) => Some(3),
                        _ => None,
                    };
                    faces.push(FaceInfo { axis: 1, left, right, boundary });
                }
            }
            for j in 0..ny {
                for i in 0..nx {
                    let c = grid.cell_id(i, j);
                    cell_faces[c][2] = off + j * nx + i;
                    cell_faces[c][3] = off + ((j + 1) % nfy) * nx + i;
                }
            }
        }
        FaceTopology {
            faces,
            cell_faces,
            length: [grid.face_length(0), grid.face_length(1)],
            sides: 2 * grid.dim,
        }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Edge-adjacent interior neighbours of a cell (periodic wrap included).
    pub fn neighbours(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.sides).filter_map(move |side| {
            let f = &self.faces[self.cell_faces[cell][side]];
            let other = if side % 2 == 0 { f.left } else { f.right };
            other.filter(|&c| c != cell)
        })
    }
}

/// Face- and time-integrated fluxes: `|e| sum_q w_q sum_g w_g F`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceSums<T> {
    pub f: Vec<State<T>>,
    pub psi: Vec<T>,
}

impl<T: Real> FaceSums<T> {
    pub fn zeros(n: usize) -> Self {
        FaceSums {
            f: vec![zero_state(); n],
            psi: vec![T::zero(); n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage<T> {
    /// Weight `b_i` in the final update (1 for ADER).
    pub weight: T,
    pub faces: FaceSums<T>,
}

/// Everything one step produced, kept for the entropy production and for
/// reassembling the update.
#[derive(Debug, Clone)]
pub struct StepRecord<T> {
    pub dt: T,
    /// Averages at `t^n`, ghosts filled.
    pub old: Field<T>,
    /// Reconstruction of `old` used by the step.
    pub old_polys: Vec<CellPoly<T>>,
    /// Averages at `t^{n+1}` (ghosts not filled).
    pub new: Field<T>,
    pub stages: Vec<Stage<T>>,
    /// Effective order per cell.
    pub orders: Vec<u8>,
    /// Cells whose predictor fell back to the constant state.
    pub pad: Vec<bool>,
    /// `eta` evolved as an extra conserved component, if requested.
    pub eta_bar: Option<Vec<T>>,
}

impl<T: Real> StepRecord<T> {
    /// Recomputes the new averages from `old` and the recorded fluxes.
    pub fn reassemble(&self, topo: &FaceTopology<T>, m: usize) -> Field<T> {
        let weighted: Vec<(T, &FaceSums<T>)> = self.stages.iter().map(|s| (s.weight, &s.faces)).collect();
        let mut out = self.old.clone();
        apply_update(&self.old, topo, &weighted, self.dt, m, &mut out);
        out
    }
}

/// `U_j = U_j^n - dt/|Omega_j| sum_i w_i sum_e (+-) G_e^(i)` on every interior cell.
pub fn apply_update<T: Real>(
    old: &Field<T>,
    topo: &FaceTopology<T>,
    stages: &[(T, &FaceSums<T>)],
    dt: T,
    m: usize,
    out: &mut Field<T>,
) {
    let grid = old.grid;
    let c = dt / grid.volume();
    for cell in 0..grid.ncells() {
        let acc = cell_residual(topo, stages, cell, m);
        let u0 = old.cell(cell);
        let u = out.cell_mut(cell);
        for v in 0..m {
            u[v] = u0[v] - c * acc[v];
        }
    }
}

/// `sum_i w_i sum_sides (+-) G` for one cell, in a fixed order.
#[inline]
pub fn cell_residual<T: Real>(topo: &FaceTopology<T>, stages: &[(T, &FaceSums<T>)], cell: usize, m: usize) -> State<T> {
    let mut acc = zero_state();
    for (w, fs) in stages {
        let mut k = zero_state();
        for side in 0..topo.sides {
            let g = &fs.f[topo.cell_faces[cell][side]];
            if side % 2 == 0 {
                for v in 0..m {
                    k[v] -= g[v];
                }
            } else {
                for v in 0..m {
                    k[v] += g[v];
                }
            }
        }
        for v in 0..m {
            acc[v] += *w * k[v];
        }
    }
    acc
}

/// Entropy counterpart of [`cell_residual`].
#[inline]
pub fn cell_entropy_residual<T: Real>(topo: &FaceTopology<T>, stages: &[Stage<T>], cell: usize) -> T {
    let mut acc = T::zero();
    for st in stages {
        let mut k = T::zero();
        for side in 0..topo.sides {
            let p = st.faces.psi[topo.cell_faces[cell][side]];
            if side % 2 == 0 {
                k -= p;
            } else {
                k += p;
            }
        }
        acc += st.weight * k;
    }
    acc
}

/// Reusable state for stepping one configuration.
#[derive(Debug, Clone)]
pub struct Stepper<T> {
    pub sys: System<T>,
    pub grid: Grid<T>,
    pub bc: BoundarySpec<T>,
    pub scheme: Scheme,
    pub topo: FaceTopology<T>,
    pub rk: RkScheme<T>,
    /// Evolve `eta` alongside the averages.
    pub augmented: bool,
    time_w: Vec<T>,
    face_w: Vec<T>,
    face_pts: Vec<T>,
    nt: usize,
    ng: usize,
    kernels: Vec<PredictorKernel<T>>,
    maps: Vec<TraceMap<T>>,
    lmax: usize,
    coeffs: Vec<State<T>>,
    traces: Vec<State<T>>,
    cell_deg: Vec<u8>,
    pad: Vec<bool>,
    scratch: Vec<State<T>>,
}

impl<T: Real> Stepper<T> {
    pub fn new(sys: System<T>, grid: Grid<T>, bc: BoundarySpec<T>, scheme: Scheme) -> Result<Self> {
        bc.validate(grid.dim)?;
        if sys.dim() != grid.dim {
            return Err(Error::InvalidParams(format!(
                "{}D system on a {}D grid",
                sys.dim(),
                grid.dim
            )));
        }
        let dim = grid.dim;
        let (time_nodes, time_w, max_deg) = match scheme.kind {
            SchemeKind::Ader { deg } => {
                if deg > 2 {
                    return Err(Error::InvalidParams(format!("predictor degree {deg} > 2")));
                }
                let q = TimeQuadrature::<T>::for_degree(deg);
                (q.nodes, q.weights, deg)
            }
            SchemeKind::Rk3 => (vec![T::zero()], vec![T::one()], 0),
        };
        let ng_pts = match (dim, scheme.kind) {
            (1, _) => 1,
            (_, SchemeKind::Ader { deg }) => (deg + 1).div_ceil(2),
            (_, SchemeKind::Rk3) => 2,
        };
        let (face_pts, face_w) = if dim == 1 {
            (vec![lit::<T>(0.5)], vec![T::one()])
        } else {
            gauss_legendre_unit::<T>(ng_pts)
        };
        let mut kernels = Vec::new();
        let mut maps = Vec::new();
        for deg in 0..=max_deg {
            kernels.push(PredictorKernel::new(deg, dim)?);
            maps.push(TraceMap::new(deg, dim, &time_nodes, &face_pts));
        }
        let lmax = kernels.last().map(|k| k.len()).unwrap_or(1);
        let topo = FaceTopology::new(&grid, &bc);
        let nc = grid.ncells();
        let nt = time_nodes.len();
        let ng = face_pts.len();
        Ok(Stepper {
            sys,
            grid,
            bc,
            scheme,
            topo,
            rk: RkScheme::ssp_rk3(),
            augmented: false,
            time_w,
            face_w,
            face_pts,
            nt,
            ng,
            kernels,
            maps,
            lmax,
            coeffs: vec![zero_state(); nc * lmax],
            traces: vec![zero_state(); nc * 2 * dim * nt * ng],
            cell_deg: vec![0; nc],
            pad: vec![false; nc],
            scratch: vec![zero_state(); 4 * lmax],
        })
    }

    fn trace_len(&self) -> usize {
        self.topo.sides * self.nt * self.ng
    }

    /// Predictor degree of the configured ADER scheme.
    pub fn degree(&self) -> usize {
        match self.scheme.kind {
            SchemeKind::Ader { deg } => deg,
            SchemeKind::Rk3 => 0,
        }
    }

    /// Current predictor degree of each cell.
    pub fn cell_degrees(&self) -> &[u8] {
        &self.cell_deg
    }

    /// Builds the predictor of `cell` at degree `deg` from `poly` and fills its
    /// traces. Fails if any node or trace is unphysical.
    pub fn predict_cell(&mut self, cell: usize, poly: &CellPoly<T>, deg: usize, dt: T) -> Result<()> {
        let lambda = [dt / self.grid.dx[0], dt / self.grid.dx[1]];
        let out = &mut self.coeffs[cell * self.lmax..(cell + 1) * self.lmax];
        self.kernels[deg].predict_into(&self.sys, poly, lambda, out, &mut self.scratch)?;
        let tl = self.topo.sides * self.nt * self.ng;
        let tr = &mut self.traces[cell * tl..(cell + 1) * tl];
        self.maps[deg].traces(out, self.sys.m(), tr);
        for u in tr.iter() {
            self.sys.check_physical(u)?;
        }
        self.cell_deg[cell] = deg as u8;
        Ok(())
    }

    /// Predictor at `deg` with the constant fallback when `pad` is set.
    pub fn predict_with_fallback(&mut self, cell: usize, poly: &CellPoly<T>, deg: usize, dt: T, pad: bool) -> Result<()> {
        match self.predict_cell(cell, poly, deg, dt) {
            Ok(()) => {
                self.pad[cell] = false;
                Ok(())
            }
            Err(e) if !pad || deg == 0 => Err(e),
            Err(_) => {
                self.pad[cell] = true;
                self.predict_cell(cell, &CellPoly::constant(poly.mean()), 0, dt)
            }
        }
    }

    /// Traces of a semidiscrete stage: the reconstruction on each face point.
    fn reconstruct_traces(&mut self, cell: usize, poly: &CellPoly<T>, pad: bool) -> Result<()> {
        let tl = self.trace_len();
        let sides = self.topo.sides;
        let fill = |tr: &mut [State<T>], p: &CellPoly<T>, sys: &System<T>, pts: &[T]| -> Result<()> {
            for side in 0..sides {
                for (g, &s) in pts.iter().enumerate() {
                    let u = p.evaluate_boundary(side, s);
                    sys.check_physical(&u)?;
                    tr[side * pts.len() + g] = u;
                }
            }
            Ok(())
        };
        let tr = &mut self.traces[cell * tl..(cell + 1) * tl];
        match fill(tr, poly, &self.sys, &self.face_pts) {
            Ok(()) => {
                self.pad[cell] = false;
                Ok(())
            }
            Err(e) if !pad => Err(e),
            Err(_) => {
                self.pad[cell] = true;
                fill(tr, &CellPoly::constant(poly.mean()), &self.sys, &self.face_pts)
            }
        }
    }

    #[inline]
    fn trace(&self, cell: usize, side: usize, q: usize, g: usize) -> &State<T> {
        &self.traces[cell * self.trace_len() + (side * self.nt + q) * self.ng + g]
    }

    fn outer_state(&self, domain_side: usize, inner: &State<T>) -> State<T> {
        match self.bc.sides[domain_side] {
            BoundaryCondition::Wall | BoundaryCondition::Symmetry => self.sys.reflect(inner, domain_side / 2),
            BoundaryCondition::FreeFlow | BoundaryCondition::Periodic => *inner,
            BoundaryCondition::Dirichlet(s) => s,
        }
    }

    /// Integrated conserved and entropy flux through face `f` from the
    /// current traces.
    pub fn face_flux(&self, f: usize) -> Result<(State<T>, T)> {
        let info = self.topo.faces[f];
        let axis = info.axis;
        let m = self.sys.m();
        let mut acc = zero_state();
        let mut psi = T::zero();
        for q in 0..self.nt {
            let mut fq = zero_state();
            let mut pq = T::zero();
            for g in 0..self.ng {
                let (ul, ur) = match (info.left, info.right) {
                    (Some(l), Some(r)) => (*self.trace(l, 2 * axis + 1, q, g), *self.trace(r, 2 * axis, q, g)),
                    (None, Some(r)) => {
                        let inner = *self.trace(r, 2 * axis, q, g);
                        (self.outer_state(info.boundary.unwrap(), &inner), inner)
                    }
                    (Some(l), None) => {
                        let inner = *self.trace(l, 2 * axis + 1, q, g);
                        (inner, self.outer_state(info.boundary.unwrap(), &inner))
                    }
                    (None, None) => unreachable!("face without cells"),
                };
                let pair = rusanov_pair(&self.sys, &ul, &ur, axis)?;
                let w = self.face_w[g];
                for v in 0..m {
                    fq[v] += w * pair.f[v];
                }
                pq += w * pair.psi;
            }
            let w = self.time_w[q];
            for v in 0..m {
                acc[v] += w * fq[v];
            }
            psi += w * pq;
        }
        let len = self.topo.length[axis];
        for v in acc.iter_mut().take(m) {
            *v *= len;
        }
        Ok((acc, psi * len))
    }

    pub fn all_face_fluxes(&self) -> Result<FaceSums<T>> {
        let mut sums = FaceSums::zeros(self.topo.len());
        for f in 0..self.topo.len() {
            let (g, p) = self.face_flux(f)?;
            sums.f[f] = g;
            sums.psi[f] = p;
        }
        Ok(sums)
    }

    fn fill(&self, field: &mut Field<T>) {
        self.bc.fill_ghosts(&self.sys, field);
    }

    /// Maps a predictor failure to a step failure tagged with the cell.
    fn failed(cell: usize, e: Error) -> Error {
        match e {
            Error::StepFailed { .. } => e,
            other => Error::StepFailed {
                step: 0,
                cell: Some(cell),
                reason: other.to_string(),
            },
        }
    }

    /// Reconstruction of `field`, which must have its ghosts filled.
    pub fn reconstruct(&self, field: &Field<T>) -> Vec<CellPoly<T>> {
        reconstruct_all(self.scheme.recon, field, self.sys.m())
    }

    /// One step from `old` (ghosts filled). `polys` may carry the
    /// reconstruction of `old` from a previous entropy evaluation.
    pub fn step(&mut self, old: &Field<T>, polys: Option<Vec<CellPoly<T>>>, dt: T, pad: bool) -> Result<StepRecord<T>> {
        let polys = polys.unwrap_or_else(|| self.reconstruct(old));
        match self.scheme.kind {
            SchemeKind::Ader { deg } => self.ader_step(old, polys, deg, dt, pad),
            SchemeKind::Rk3 => self.rk3_step(old, polys, dt, pad),
        }
    }

    fn ader_step(&mut self, old: &Field<T>, polys: Vec<CellPoly<T>>, deg: usize, dt: T, pad: bool) -> Result<StepRecord<T>> {
        for (cell, poly) in polys.iter().enumerate() {
            self.predict_with_fallback(cell, poly, deg, dt, pad)
                .map_err(|e| Self::failed(cell, e))?;
        }
        let faces = self.all_face_fluxes()?;
        let stages = vec![Stage {
            weight: T::one(),
            faces,
        }];
        self.finish(old, polys, stages, dt)
    }

    fn rk3_step(&mut self, old: &Field<T>, polys: Vec<CellPoly<T>>, dt: T, pad: bool) -> Result<StepRecord<T>> {
        let m = self.sys.m();
        let rk = self.rk.clone();
        let mut stage_faces: Vec<FaceSums<T>> = Vec::with_capacity(rk.stages());
        let mut stage_field = old.clone();
        let mut any_pad = vec![false; self.grid.ncells()];
        for i in 0..rk.stages() {
            let stage_polys = if i == 0 {
                None
            } else {
                let weighted: Vec<(T, &FaceSums<T>)> = rk.a[i].iter().copied().zip(stage_faces.iter()).collect();
                apply_update(old, &self.topo, &weighted, dt, m, &mut stage_field);
                for id in 0..self.grid.ncells() {
                    self.sys
                        .check_physical(stage_field.cell(id))
                        .map_err(|e| Self::failed(id, e))?;
                }
                self.fill(&mut stage_field);
                Some(self.reconstruct(&stage_field))
            };
            let p = stage_polys.as_ref().unwrap_or(&polys);
            for (cell, poly) in p.iter().enumerate() {
                self.reconstruct_traces(cell, poly, pad).map_err(|e| Self::failed(cell, e))?;
                any_pad[cell] |= self.pad[cell];
            }
            stage_faces.push(self.all_face_fluxes()?);
        }
        self.pad = any_pad;
        self.cell_deg.iter_mut().for_each(|d| *d = 2);
        let stages = stage_faces
            .into_iter()
            .zip(&rk.b)
            .map(|(faces, &weight)| Stage { weight, faces })
            .collect();
        self.finish(old, polys, stages, dt)
    }

    /// Orders of the current predictors (`deg + 1`, or 1 after a fallback).
    pub fn orders(&self) -> Vec<u8> {
        match self.scheme.kind {
            SchemeKind::Ader { .. } => self.cell_deg.iter().map(|d| d + 1).collect(),
            SchemeKind::Rk3 => self.pad.iter().map(|&p| if p { 1 } else { 3 }).collect(),
        }
    }

    pub fn pad_flags(&self) -> &[bool] {
        &self.pad
    }

    /// Applies the stage fluxes and assembles the record.
    pub fn finish(&self, old: &Field<T>, polys: Vec<CellPoly<T>>, stages: Vec<Stage<T>>, dt: T) -> Result<StepRecord<T>> {
        let m = self.sys.m();
        let weighted: Vec<(T, &FaceSums<T>)> = stages.iter().map(|s| (s.weight, &s.faces)).collect();
        let mut new = old.clone();
        apply_update(old, &self.topo, &weighted, dt, m, &mut new);
        let eta_bar = if self.augmented {
            Some(crate::entropy::evolve_eta(&self.sys, &self.grid, &self.topo, &polys, &stages, dt))
        } else {
            None
        };
        Ok(StepRecord {
            dt,
            old: old.clone(),
            old_polys: polys,
            new,
            stages,
            orders: self.orders(),
            pad: self.pad.clone(),
            eta_bar,
        })
    }
}

/// Single FV-ADER step on `field` (ghosts are filled here).
pub fn ader_step<T: Real>(
    sys: &System<T>,
    field: &Field<T>,
    bc: &BoundarySpec<T>,
    recon: ReconstructionKind,
    deg: usize,
    dt: T,
) -> Result<StepRecord<T>> {
    let scheme = Scheme {
        kind: SchemeKind::Ader { deg },
        recon,
    };
    let mut st = Stepper::new(*sys, field.grid, *bc, scheme)?;
    let mut old = field.clone();
    bc.fill_ghosts(sys, &mut old);
    st.step(&old, None, dt, false)
}

/// Single SSP-RK3 step on `field` (ghosts are filled here).
pub fn rk3_step<T: Real>(
    sys: &System<T>,
    field: &Field<T>,
    bc: &BoundarySpec<T>,
    recon: ReconstructionKind,
    dt: T,
) -> Result<StepRecord<T>> {
    let scheme = Scheme {
        kind: SchemeKind::Rk3,
        recon,
    };
    let mut st = Stepper::new(*sys, field.grid, *bc, scheme)?;
    let mut old = field.clone();
    bc.fill_ghosts(sys, &mut old);
    st.step(&old, None, dt, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine_field(n: usize) -> (System<f64>, Field<f64>) {
        let sys = System::<f64>::euler1d(1.4);
        let g = Grid::new_1d(0.0, 1.0, n).unwrap();
        let h = 1.0 / n as f64;
        let f = Field::from_fn(g, |i, _| {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            let rho = 1.0 + 0.5 * ((2.0 * PI * a).cos() - (2.0 * PI * b).cos()) / (2.0 * PI * h);
            sys.primitive_to_conserved(&[rho, 1.0, 1.0, 0.0]).unwrap()
        });
        (sys, f)
    }

    #[test]
    fn rk3_butcher_order_conditions() {
        let rk = RkScheme::<f64>::ssp_rk3();
        let c = rk.c();
        let b = &rk.b;
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((b.iter().zip(&c).map(|(b, c)| b * c).sum::<f64>() - 0.5).abs() < 1e-15);
        assert!((b.iter().zip(&c).map(|(b, c)| b * c * c).sum::<f64>() - 1.0 / 3.0).abs() < 1e-15);
        // b^T A c
        let mut bac = 0.0;
        for i in 0..3 {
            for (k, a) in rk.a[i].iter().enumerate() {
                bac += b[i] * a * c[k];
            }
        }
        assert!((bac - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn dt_examples() {
        let sys = System::<f64>::advection(2.0);
        let g = Grid::new_1d(0.0, 1.0, 10).unwrap();
        let f = Field::from_fn(g, |_, _| [1.0, 0.0, 0.0, 0.0]);
        assert!((compute_dt(&sys, &f, 0.5).unwrap() - 0.025).abs() < 1e-15);
        let sys = System::<f64>::euler1d(1.4);
        let g = Grid::new_1d(0.0, 1.0, 100).unwrap();
        let u = sys.primitive_to_conserved(&[1.0, 0.0, 1.0, 0.0]).unwrap();
        let f = Field::from_fn(g, |_, _| u);
        let dt = compute_dt(&sys, &f, 0.5).unwrap();
        assert!((dt - 0.005 / 1.4f64.sqrt()).abs() < 1e-15);
        assert!((clip_dt(0.099f64, 0.005, 0.1) - 0.001).abs() < 1e-15);
        assert_eq!(clip_dt(0.0, 0.005, 0.1), 0.005);
    }

    #[test]
    fn uniform_state_is_preserved() {
        let sys = System::<f64>::euler2d(1.4);
        let u = sys.primitive_to_conserved(&[1.3, 0.4, -0.2, 2.0]).unwrap();
        let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], [6, 5]).unwrap();
        let f = Field::from_fn(g, |_, _| u);
        for bc in [BoundarySpec::periodic(), BoundarySpec::uniform(BoundaryCondition::FreeFlow)] {
            for rec in [
                ader_step(&sys, &f, &bc, ReconstructionKind::Cweno3, 2, 0.01).unwrap(),
                ader_step(&sys, &f, &bc, ReconstructionKind::MinmodLinear, 1, 0.01).unwrap(),
                rk3_step(&sys, &f, &bc, ReconstructionKind::Cweno3, 0.01).unwrap(),
            ] {
                for id in 0..g.ncells() {
                    for v in 0..4 {
                        assert!((rec.new.cell(id)[v] - u[v]).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn periodic_conservation_and_reassembly() {
        let (sys, f) = sine_field(32);
        let bc = BoundarySpec::periodic();
        let before = f.totals(3);
        for scheme in [Scheme::p0p1(), Scheme::p0p2(), Scheme::rk3()] {
            let mut st = Stepper::new(sys, f.grid, bc, scheme).unwrap();
            let mut old = f.clone();
            bc.fill_ghosts(&sys, &mut old);
            let rec = st.step(&old, None, 0.01, false).unwrap();
            let after = rec.new.totals(3);
            for v in 0..3 {
                assert!((after[v] - before[v]).abs() <= 1e-12 * before[v].abs().max(1.0));
            }
            let again = rec.reassemble(&st.topo, 3);
            assert_eq!(again.interior(), rec.new.interior());
        }
    }

    #[test]
    fn periodic_face_sums_telescope() {
        let (sys, f) = sine_field(16);
        let bc = BoundarySpec::periodic();
        let mut st = Stepper::new(sys, f.grid, bc, Scheme::p0p2()).unwrap();
        let mut old = f.clone();
        bc.fill_ghosts(&sys, &mut old);
        let rec = st.step(&old, None, 0.01, false).unwrap();
        let mut total = [0.0; 3];
        for cell in 0..16 {
            let r = cell_residual(&st.topo, &[(1.0, &rec.stages[0].faces)], cell, 3);
            for v in 0..3 {
                total[v] += r[v];
            }
        }
        for t in total {
            assert!(t.abs() < 1e-13);
        }
    }

    #[test]
    fn topology_counts() {
        let g = Grid::<f64>::new_2d([0.0, 0.0], [1.0, 1.0], [3, 2]).unwrap();
        let t = FaceTopology::new(&g, &BoundarySpec::periodic());
        assert_eq!(t.len(), 2 * 3 + 3 * 2);
        let t = FaceTopology::new(&g, &BoundarySpec::uniform(BoundaryCondition::Wall));
        assert_eq!(t.len(), 2 * 4 + 3 * 3);
        let mut nb: Vec<usize> = t.neighbours(0).collect();
        nb.sort();
        assert_eq!(nb, vec![1, 3]);
        let tp = FaceTopology::new(&g, &BoundarySpec::periodic());
        let mut nb: Vec<usize> = tp.neighbours(0).collect();
        nb.sort();
        assert_eq!(nb, vec![1, 2, 3, 3]);
    }

    #[test]
    fn scheme_names() {
        assert_eq!("p0p2".parse::<Scheme>().unwrap(), Scheme::p0p2());
        assert_eq!(Scheme::rk3().to_string(), "rk3");
        let err = "p0p9".parse::<Scheme>().unwrap_err();
        assert!(err.to_string().contains("p0p1, p0p2, rk3"));
    }
}
