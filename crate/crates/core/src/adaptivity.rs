//! p-adaptivity driven by the entropy production: cells with `|S| >= S_ref`
//! get a lower-degree predictor, every face touching them is recomputed once
//! and the update is redone, so each interface keeps a single flux.
//! Predictors that produce unphysical nodes fall back to the cell mean.

use crate::entropy::{compute_s, EntropyField};
use crate::equations::System;
use crate::error::{Error, Result};
use crate::mesh::Field;
use crate::reconstruction::{reconstruct, CellPoly, ReconstructionKind};
use crate::scalar::{lit, Real};
use crate::steppers::{SchemeKind, StepRecord, Stepper};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig<T> {
    pub s_ref: T,
    /// Predictor degree on marked cells.
    pub low_order_m: usize,
    pub enable_pad: bool,
}

impl<T: Real> AdaptiveConfig<T> {
    pub fn new(s_ref: T) -> Self {
        AdaptiveConfig {
            s_ref,
            low_order_m: 0,
            enable_pad: true,
        }
    }

    pub fn validate(&self, deg: usize) -> Result<()> {
        if !(self.s_ref > T::zero()) {
            return Err(Error::InvalidParams("S_ref must be positive".into()));
        }
        if self.low_order_m >= deg {
            return Err(Error::InvalidParams(format!(
                "low order degree {} must be below the scheme degree {deg}",
                self.low_order_m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellFlags {
    pub marked: Vec<bool>,
    pub neighbour: Vec<bool>,
    pub pad: Vec<bool>,
    /// Effective order of each cell this step.
    pub orders: Vec<u8>,
}

impl CellFlags {
    pub fn marked_count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }

    pub fn pad_count(&self) -> usize {
        self.pad.iter().filter(|&&m| m).count()
    }

    /// Cells whose order is below `full`.
    pub fn reduced_count(&self, full: u8) -> usize {
        self.orders.iter().filter(|&&o| o < full).count()
    }

    pub fn is_empty(&self) -> bool {
        self.marked_count() == 0
    }
}

/// Marks `|S| >= S_ref` and sentinel cells, and their edge neighbours.
pub fn mark_cells<T: Real>(field: &EntropyField<T>, stepper: &Stepper<T>, s_ref: T) -> CellFlags {
    let n = field.len();
    let marked: Vec<bool> = (0..n)
        .map(|j| field.flagged[j] || field.values[j].abs() >= s_ref)
        .collect();
    let mut neighbour = vec![false; n];
    for j in (0..n).filter(|&j| marked[j]) {
        for k in stepper.topo.neighbours(j) {
            if !marked[k] {
                neighbour[k] = true;
            }
        }
    }
    CellFlags {
        marked,
        neighbour,
        pad: vec![false; n],
        orders: Vec::new(),
    }
}

/// True iff `poly` is physical at every predictor node of degree `deg` and at
/// every face point in `face_pts` (positions along a face in `[0,1]`).
pub fn pad_check<T: Real>(sys: &System<T>, poly: &CellPoly<T>, deg: usize, dim: usize, face_pts: &[T]) -> bool {
    let half = lit::<T>(0.5);
    let nodes = crate::quadrature::equispaced_nodes::<T>(deg);
    let ys: Vec<T> = if dim == 2 { nodes.clone() } else { vec![half] };
    for &x in &nodes {
        for &y in &ys {
            let eta = if dim == 2 { y - half } else { T::zero() };
            if !sys.is_physical(&poly.evaluate(x - half, eta)) {
                return false;
            }
        }
    }
    (0..2 * dim).all(|side| face_pts.iter().all(|&s| sys.is_physical(&poly.evaluate_boundary(side, s))))
}

#[derive(Debug, Clone)]
pub struct AdaptiveOutcome<T> {
    pub record: StepRecord<T>,
    /// Entropy production after the recomputation.
    pub entropy: EntropyField<T>,
    /// Entropy production of the trial step that drove the marking.
    pub entropy_trial: EntropyField<T>,
    pub flags: CellFlags,
    /// Reconstruction of the final averages (ghosts filled from `bc`).
    pub new_polys: Vec<CellPoly<T>>,
    pub new_field: Field<T>,
}

fn filled<T: Real>(stepper: &Stepper<T>, field: &Field<T>) -> Field<T> {
    let mut f = field.clone();
    stepper.bc.fill_ghosts(&stepper.sys, &mut f);
    f
}

/// Trial ADER step, entropy-based marking, low-order recomputation of the
/// marked cells and conservative re-update.
pub fn adaptive_step<T: Real>(
    stepper: &mut Stepper<T>,
    old: &Field<T>,
    polys: Option<Vec<CellPoly<T>>>,
    old_eta: Option<&[T]>,
    dt: T,
    cfg: &AdaptiveConfig<T>,
    step: usize,
) -> Result<AdaptiveOutcome<T>> {
    let deg = match stepper.scheme.kind {
        SchemeKind::Ader { deg } => deg,
        SchemeKind::Rk3 => return Err(Error::InvalidParams("adaptivity needs an ADER scheme".into())),
    };
    cfg.validate(deg)?;
    let sys = stepper.sys;
    let m = sys.m();
    let mut record = stepper.step(old, polys, dt, cfg.enable_pad)?;
    let mut new_field = filled(stepper, &record.new);
    let mut new_polys = stepper.reconstruct(&new_field);
    let mut trial = compute_s(&sys, &stepper.topo, &record, &new_polys, old_eta, step);
    flag_unphysical(&sys, &record.new, &mut trial);
    let mut flags = mark_cells(&trial, stepper, cfg.s_ref);
    let n = flags.marked.len();
    let mut target = vec![usize::MAX; n];
    for j in (0..n).filter(|&j| flags.marked[j]) {
        target[j] = cfg.low_order_m;
    }
    let low_kind = ReconstructionKind::for_degree(cfg.low_order_m);
    let mut changed: Vec<usize> = (0..n).filter(|&j| flags.marked[j]).collect();
    let mut entropy = trial.clone();
    let mut rounds = 0;
    while !changed.is_empty() {
        rounds += 1;
        for &j in &changed {
            let (i, jj) = stepper.grid.cell_ij(j);
            let kind = if target[j] == 0 { ReconstructionKind::P0 } else { low_kind };
            let poly = reconstruct(kind, old, m, i, jj);
            stepper
                .predict_with_fallback(j, &poly, target[j], dt, true)
                .map_err(|e| Error::StepFailed {
                    step,
                    cell: Some(j),
                    reason: e.to_string(),
                })?;
        }
        let mut faces: Vec<usize> = changed
            .iter()
            .flat_map(|&j| stepper.topo.cell_faces[j][..stepper.topo.sides].to_vec())
            .collect();
        faces.sort_unstable();
        faces.dedup();
        let mut stages = std::mem::take(&mut record.stages);
        for &f in &faces {
            let (g, p) = stepper.face_flux(f)?;
            stages[0].faces.f[f] = g;
            stages[0].faces.psi[f] = p;
        }
        let old_polys = std::mem::take(&mut record.old_polys);
        record = stepper.finish(old, old_polys, stages, dt)?;
        // cells still unphysical drop to the constant predictor together with
        // their neighbours
        changed.clear();
        for j in 0..n {
            if sys.is_physical(record.new.cell(j)) {
                continue;
            }
            let nb: Vec<usize> = stepper.topo.neighbours(j).collect();
            for k in std::iter::once(j).chain(nb) {
                if stepper.cell_degrees()[k] > 0 && !changed.contains(&k) {
                    target[k] = 0;
                    flags.marked[k] = true;
                    changed.push(k);
                }
            }
        }
        if changed.is_empty() {
            if let Some(j) = (0..n).find(|&j| !sys.is_physical(record.new.cell(j))) {
                return Err(Error::StepFailed {
                    step,
                    cell: Some(j),
                    reason: "unphysical average with constant predictors".into(),
                });
            }
        }
        new_field = filled(stepper, &record.new);
        new_polys = stepper.reconstruct(&new_field);
        entropy = compute_s(&sys, &stepper.topo, &record, &new_polys, old_eta, step);
        flag_unphysical(&sys, &record.new, &mut entropy);
        if rounds > 8 {
            return Err(Error::StepFailed {
                step,
                cell: changed.first().copied(),
                reason: "order reduction did not settle".into(),
            });
        }
    }
    for j in 0..n {
        flags.neighbour[j] = false;
    }
    for j in (0..n).filter(|&j| flags.marked[j]) {
        for k in stepper.topo.neighbours(j) {
            if !flags.marked[k] {
                flags.neighbour[k] = true;
            }
        }
    }
    flags.pad = record.pad.clone();
    flags.orders = record.orders.clone();
    Ok(AdaptiveOutcome {
        record,
        entropy,
        entropy_trial: trial,
        flags,
        new_polys,
        new_field,
    })
}

/// Unphysical new averages count as sentinel cells.
fn flag_unphysical<T: Real>(sys: &System<T>, new: &Field<T>, field: &mut EntropyField<T>) {
    let mut changed = false;
    for j in 0..field.len() {
        if !sys.is_physical(new.cell(j)) && !field.flagged[j] {
            field.flagged[j] = true;
            field.values[j] = T::infinity();
            changed = true;
        }
    }
    if changed {
        field.stats = crate::entropy::EntropyStats::from_values(&field.values, &field.flagged, new.grid.volume());
    }
}
