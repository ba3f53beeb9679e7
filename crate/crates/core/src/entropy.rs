//! Numerical entropy production `S_j^n` of a completed step.
//!
//! `S_j = (Q(eta(U^{n+1})) - Q(eta(U^n))) / (dt |Omega_j|)
//!        + 1/|Omega_j| sum_i b_i sum_e (+-) Psi_e^(i)`
//!
//! where `Q` is a tensor Gauss rule applied to the reconstructions and the
//! `Psi_e` are the face/time integrated entropy fluxes retained by the
//! stepper. A single-stage ADER step has `b = [1]`.

use crate::ader::PredictorKernel;
use crate::equations::System;
use crate::error::{Error, Result};
use crate::fluxes::rusanov_pair;
use crate::mesh::Grid;
use crate::quadrature::TimeQuadrature;
use crate::reconstruction::{CellPoly, ReconstructionKind, CX};
use crate::scalar::{lit, to_f64, Real};
use crate::steppers::{cell_entropy_residual, FaceTopology, Stage, StepRecord};

/// Two-point Gauss rule per axis in centred cell coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CellQuadrature<T> {
    pub points: Vec<[T; 2]>,
    pub weights: Vec<T>,
}

impl<T: Real> CellQuadrature<T> {
    pub fn new(dim: usize) -> Self {
        let g = lit::<T>(0.5) / lit::<T>(3.0).sqrt();
        let half = lit::<T>(0.5);
        if dim == 1 {
            CellQuadrature {
                points: vec![[-g, T::zero()], [g, T::zero()]],
                weights: vec![half, half],
            }
        } else {
            let q = lit::<T>(0.25);
            CellQuadrature {
                points: vec![[-g, -g], [g, -g], [-g, g], [g, g]],
                weights: vec![q; 4],
            }
        }
    }

    /// `Q(eta(R)) / |Omega|`.
    #[inline]
    pub fn eta_mean(&self, sys: &System<T>, poly: &CellPoly<T>) -> Result<T> {
        let mut s = T::zero();
        for (p, w) in self.points.iter().zip(&self.weights) {
            s += *w * sys.entropy_value(&poly.evaluate(p[0], p[1]))?;
        }
        Ok(s)
    }
}

/// Per-cell entropy production of one step plus summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyField<T> {
    pub step: usize,
    /// `S_j`; `+inf` where a reconstructed state was unphysical.
    pub values: Vec<T>,
    pub flagged: Vec<bool>,
    /// `Q(eta(U^{n+1}))/|Omega|` per cell, reusable as the next step's old term.
    pub eta_new: Vec<T>,
    pub stats: EntropyStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyStats {
    pub min: f64,
    pub max: f64,
    /// `sum |S_j| |Omega_j|` over finite cells.
    pub l1: f64,
    /// `sum max(S_j, 0) |Omega_j|`.
    pub positive_l1: f64,
    pub max_positive: f64,
    pub argmax_abs: usize,
    pub max_abs: f64,
    pub flagged: usize,
}

impl EntropyStats {
    pub fn from_values<T: Real>(values: &[T], flagged: &[bool], volume: T) -> Self {
        let vol = to_f64(volume);
        let mut st = EntropyStats {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            l1: 0.0,
            positive_l1: 0.0,
            max_positive: 0.0,
            argmax_abs: 0,
            max_abs: 0.0,
            flagged: 0,
        };
        for (j, (&s, &f)) in values.iter().zip(flagged).enumerate() {
            if f {
                st.flagged += 1;
                continue;
            }
            let s = to_f64(s);
            st.min = st.min.min(s);
            st.max = st.max.max(s);
            st.l1 += s.abs() * vol;
            st.positive_l1 += s.max(0.0) * vol;
            st.max_positive = st.max_positive.max(s);
            if s.abs() > st.max_abs {
                st.max_abs = s.abs();
                st.argmax_abs = j;
            }
        }
        st
    }
}

impl<T: Real> EntropyField<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest `|S|` over a set of cells (flagged cells count as infinite).
    pub fn max_abs_over(&self, cells: impl IntoIterator<Item = usize>) -> f64 {
        cells
            .into_iter()
            .map(|j| to_f64(self.values[j]).abs())
            .fold(0.0, f64::max)
    }
}

fn cell_means<T: Real>(sys: &System<T>, dim: usize, polys: &[CellPoly<T>]) -> Vec<Option<T>> {
    let q = CellQuadrature::new(dim);
    polys.iter().map(|p| q.eta_mean(sys, p).ok()).collect()
}

fn assemble<T: Real>(
    step: usize,
    grid: &Grid<T>,
    old: &[Option<T>],
    new: &[Option<T>],
    flux_term: impl Fn(usize) -> T,
    pick: impl Fn(T, T, T) -> T,
) -> EntropyField<T> {
    let n = grid.ncells();
    let mut values = vec![T::zero(); n];
    let mut flagged = vec![false; n];
    let mut eta_new = vec![T::nan(); n];
    for j in 0..n {
        // a valid new mean is kept even when this step's S is flagged, so the
        // cell recovers on the next step
        if let Some(en) = new[j] {
            eta_new[j] = en;
        }
        match (old[j], new[j]) {
            (Some(eo), Some(en)) => {
                let s = pick(eo, en, flux_term(j));
                if s.is_finite() {
                    values[j] = s;
                } else {
                    values[j] = T::infinity();
                    flagged[j] = true;
                }
            }
            _ => {
                values[j] = T::infinity();
                flagged[j] = true;
            }
        }
    }
    let stats = EntropyStats::from_values(&values, &flagged, grid.volume());
    EntropyField {
        step,
        values,
        flagged,
        eta_new,
        stats,
    }
}

/// Direct evaluation from the recorded step. `new_polys` is the reconstruction
/// of `record.new` (ghosts filled); `old_eta` may carry the previous step's
/// `eta_new`.
pub fn compute_s<T: Real>(
    sys: &System<T>,
    topo: &FaceTopology<T>,
    record: &StepRecord<T>,
    new_polys: &[CellPoly<T>],
    old_eta: Option<&[T]>,
    step: usize,
) -> EntropyField<T> {
    let grid = record.old.grid;
    let old: Vec<Option<T>> = match old_eta {
        Some(e) => e.iter().map(|&v| if v.is_finite() { Some(v) } else { None }).collect(),
        None => cell_means(sys, grid.dim, &record.old_polys),
    };
    let new = cell_means(sys, grid.dim, new_polys);
    let dt = record.dt;
    let vol = grid.volume();
    assemble(
        step,
        &grid,
        &old,
        &new,
        |j| cell_entropy_residual(topo, &record.stages, j) / vol,
        |eo, en, flux| (en - eo) / dt + flux,
    )
}

/// `S` for an ADER record (single stage).
pub fn compute_s_ader<T: Real>(
    sys: &System<T>,
    topo: &FaceTopology<T>,
    record: &StepRecord<T>,
    new_polys: &[CellPoly<T>],
) -> Result<EntropyField<T>> {
    if record.stages.len() != 1 {
        return Err(Error::InvalidParams("ADER record must have one stage".into()));
    }
    Ok(compute_s(sys, topo, record, new_polys, None, 0))
}

/// `S` for a Runge-Kutta record (stage-weighted entropy fluxes).
pub fn compute_s_rk<T: Real>(
    sys: &System<T>,
    topo: &FaceTopology<T>,
    record: &StepRecord<T>,
    new_polys: &[CellPoly<T>],
) -> Result<EntropyField<T>> {
    if record.stages.len() < 2 {
        return Err(Error::InvalidParams("Runge-Kutta record needs its stages".into()));
    }
    Ok(compute_s(sys, topo, record, new_polys, None, 0))
}

/// `eta` carried as an extra conserved component: reinitialised from the
/// quadrature of the old reconstruction and advanced with the recorded `Psi`.
pub fn evolve_eta<T: Real>(
    sys: &System<T>,
    grid: &Grid<T>,
    topo: &FaceTopology<T>,
    old_polys: &[CellPoly<T>],
    stages: &[Stage<T>],
    dt: T,
) -> Vec<T> {
    let c = dt / grid.volume();
    cell_means(sys, grid.dim, old_polys)
        .into_iter()
        .enumerate()
        .map(|(j, eo)| match eo {
            Some(e) => e - c * cell_entropy_residual(topo, stages, j),
            None => T::nan(),
        })
        .collect()
}

/// `S = (Q(eta(U^{n+1}))/|Omega| - eta_bar^{n+1}) / dt` from an augmented step.
pub fn compute_s_augmented<T: Real>(
    sys: &System<T>,
    record: &StepRecord<T>,
    new_polys: &[CellPoly<T>],
    step: usize,
) -> Result<EntropyField<T>> {
    let eta_bar = record
        .eta_bar
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("step was not run with the augmented component".into()))?;
    let grid = record.old.grid;
    let old: Vec<Option<T>> = eta_bar.iter().map(|&v| if v.is_finite() { Some(v) } else { None }).collect();
    let new = cell_means(sys, grid.dim, new_polys);
    let dt = record.dt;
    Ok(assemble(step, &grid, &old, &new, |_| T::zero(), |eb, en, _| (en - eb) / dt))
}

/// Leading-order entropy production of the single-step examples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleCase {
    /// `u_x u_xx / 2 dx^2`
    SmoothAdvection { ux: f64, uxx: f64, dx: f64 },
    /// `(13/24 u_x^2 + 1/2 u u_x u_xx) dx^2`
    SmoothBurgers { u: f64, ux: f64, uxx: f64, dx: f64 },
    /// `(-5/6 delta^3 + 9/16 (dt/dx) delta^4) / dx`
    ShockBurgers { delta: f64, dx: f64, dt: f64 },
    /// `29/32 u_x^2 dx`
    KinkAdvection { ux: f64, dx: f64 },
    /// `29/32 u u_x^2 dx`
    KinkBurgers { u: f64, ux: f64, dx: f64 },
}

pub fn closed_form_oracle(case: OracleCase) -> Result<f64> {
    let pos = |name: &str, v: f64| {
        if v > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
        }
    };
    Ok(match case {
        OracleCase::SmoothAdvection { ux, uxx, dx } => {
            pos("dx", dx)?;
            0.5 * ux * uxx * dx * dx
        }
        OracleCase::SmoothBurgers { u, ux, uxx, dx } => {
            pos("dx", dx)?;
            (13.0 / 24.0 * ux * ux + 0.5 * u * ux * uxx) * dx * dx
        }
        OracleCase::ShockBurgers { delta, dx, dt } => {
            pos("delta", delta)?;
            pos("dx", dx)?;
            pos("dt", dt)?;
            (-5.0 / 6.0 * delta.powi(3) + 9.0 / 16.0 * dt / dx * delta.powi(4)) / dx
        }
        OracleCase::KinkAdvection { ux, dx } => {
            pos("dx", dx)?;
            29.0 / 32.0 * ux * ux * dx
        }
        OracleCase::KinkBurgers { u, ux, dx } => {
            pos("dx", dx)?;
            29.0 / 32.0 * u * ux * ux * dx
        }
    })
}

/// One `P0P1` step of a scalar law around cell 0 (centred at `x = 0`, width
/// `h`) with the predictor started from the analytic data ("exact
/// reconstruction": the linear interpolant of the face values). `data(x, k)`
/// is the initial datum restricted to cell `k`, so jumps may sit on faces.
/// Old entropy uses the analytic data; new entropy uses `new_recon` of the
/// updated averages. Returns `S_0`.
pub fn exact_data_single_step(
    sys: &System<f64>,
    data: &dyn Fn(f64, i32) -> f64,
    h: f64,
    dt: f64,
    new_recon: ReconstructionKind,
) -> Result<f64> {
    if sys.is_euler() {
        return Err(Error::InvalidParams("scalar laws only".into()));
    }
    let kernel = PredictorKernel::<f64>::new(1, 1)?;
    let tq = TimeQuadrature::<f64>::for_degree(1);
    let (gx, gw) = crate::quadrature::gauss_legendre_unit::<f64>(5);
    let cells: Vec<i32> = (-3..=3).collect();
    let avg = |k: i32| -> f64 {
        let a = (k as f64 - 0.5) * h;
        gx.iter().zip(&gw).map(|(x, w)| w * data(a + x * h, k)).sum()
    };
    let state = |v: f64| [v, 0.0, 0.0, 0.0];
    let lambda = [dt / h, 0.0];
    // face traces (left face, right face) at the time nodes
    let mut traces = Vec::new();
    for &k in &cells {
        let xl = (k as f64 - 0.5) * h;
        let (ul, ur) = (data(xl, k), data(xl + h, k));
        let mut poly = CellPoly::constant(state(0.5 * (ul + ur)));
        poly.c[CX][0] = ur - ul;
        let (p, _) = kernel.compute_predictor(sys, &poly, lambda)?;
        // nodes: l = a * 2 + s, s = 0 left face, 1 right face
        let tr: Vec<(f64, f64)> = (0..2).map(|a| (p.values[2 * a][0], p.values[2 * a + 1][0])).collect();
        traces.push(tr);
    }
    // face between cells idx and idx+1
    let face = |idx: usize| -> Result<(f64, f64)> {
        let (mut f, mut psi) = (0.0, 0.0);
        for q in 0..2 {
            let pair = rusanov_pair(sys, &state(traces[idx][q].1), &state(traces[idx + 1][q].0), 0)?;
            f += tq.weights[q] * pair.f[0];
            psi += tq.weights[q] * pair.psi;
        }
        Ok((f, psi))
    };
    let faces: Vec<(f64, f64)> = (0..cells.len() - 1).map(face).collect::<Result<_>>()?;
    // new averages of cells -1, 0, 1 (indices 2, 3, 4)
    let new_avg = |idx: usize| avg(cells[idx]) - dt / h * (faces[idx].0 - faces[idx - 1].0);
    let (um, u0, up) = (new_avg(2), new_avg(3), new_avg(4));
    let grid = Grid::new_1d(-1.5 * h, 1.5 * h, 3)?;
    let mut field = crate::mesh::Field::from_fn(grid, |i, _| state([um, u0, up][i]));
    crate::mesh::BoundarySpec::uniform(crate::mesh::BoundaryCondition::FreeFlow).fill_ghosts(sys, &mut field);
    let new_poly = crate::reconstruction::reconstruct(new_recon, &field, 1, 1, 0);
    let quad = CellQuadrature::<f64>::new(1);
    let eta_new = quad.eta_mean(sys, &new_poly)?;
    let eta_old: f64 = quad
        .points
        .iter()
        .zip(&quad.weights)
        .map(|(p, w)| sys.entropy_value(&state(data(p[0] * h, 0))).map(|e| w * e))
        .sum::<Result<f64>>()?;
    Ok((eta_new - eta_old) / dt + (faces[3].1 - faces[2].1) / h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryCondition, BoundarySpec, Field};
    use crate::steppers::{Scheme, Stepper};

    #[test]
    fn quadrature_integrates_cubics() {
        let q = CellQuadrature::<f64>::new(2);
        let f = |x: f64, y: f64| x * x * x + x * x * y + y * y + 1.0;
        let v: f64 = q.points.iter().zip(&q.weights).map(|(p, w)| w * f(p[0], p[1])).sum();
        assert!((v - (1.0 / 12.0 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn constant_state_gives_zero() {
        let sys = System::<f64>::euler2d(1.4);
        let u = sys.primitive_to_conserved(&[0.8, 0.3, 0.1, 1.7]).unwrap();
        let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], [5, 4]).unwrap();
        for bc in [BoundarySpec::periodic(), BoundarySpec::uniform(BoundaryCondition::FreeFlow)] {
            for scheme in [Scheme::p0p1(), Scheme::p0p2(), Scheme::rk3()] {
                let mut st = Stepper::new(sys, g, bc, scheme).unwrap();
                st.augmented = true;
                let mut f = Field::from_fn(g, |_, _| u);
                bc.fill_ghosts(&sys, &mut f);
                let rec = st.step(&f, None, 0.01, false).unwrap();
                let mut new = rec.new.clone();
                bc.fill_ghosts(&sys, &mut new);
                let polys = st.reconstruct(&new);
                let s = compute_s(&sys, &st.topo, &rec, &polys, None, 0);
                assert!(s.values.iter().all(|&v| v == 0.0), "{scheme}: {:?}", s.stats);
                let a = compute_s_augmented(&sys, &rec, &polys, 0).unwrap();
                assert!(a.values.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn flagged_cell_keeps_its_new_eta() {
        let grid = Grid::new_1d(0.0, 1.0, 3).unwrap();
        let e = assemble(0, &grid, &[Some(1.0), None, Some(1.0)], &[Some(2.0), Some(3.0), None], |_| 0.0, |o, n, _| n - o);
        assert_eq!(e.flagged, vec![false, true, true]);
        assert_eq!(e.values[1], f64::INFINITY);
        assert_eq!(e.eta_new[..2], [2.0, 3.0]);
        assert!(e.eta_new[2].is_nan());
    }

    #[test]
    fn oracle_examples() {
        let v = closed_form_oracle(OracleCase::ShockBurgers { delta: 1.0, dx: 0.1, dt: 0.1 }).unwrap();
        assert!((v + 2.708_333_333_333_333).abs() < 1e-12);
        assert_eq!(closed_form_oracle(OracleCase::KinkAdvection { ux: 0.0, dx: 0.1 }).unwrap(), 0.0);
        assert_eq!(
            closed_form_oracle(OracleCase::SmoothAdvection { ux: 0.0, uxx: 3.0, dx: 0.1 }).unwrap(),
            0.0
        );
        assert!(closed_form_oracle(OracleCase::ShockBurgers { delta: -1.0, dx: 0.1, dt: 0.1 }).is_err());
    }

    #[test]
    fn burgers_shock_single_step_value() {
        // piecewise constant data delta | 0 with the jump on the left face of
        // cell 0 and dt/dx = 1/delta: Rusanov gives -13/96 delta^3 / dx
        let sys = System::<f64>::Burgers1D;
        let d = 0.8;
        let h = 0.01;
        let s = exact_data_single_step(&sys, &|_, k| if k < 0 { d } else { 0.0 }, h, h / d, ReconstructionKind::MinmodLinear)
            .unwrap();
        assert!((s - (-13.0 / 96.0) * d * d * d / h).abs() < 1e-9 * s.abs());
    }
}
