//! Time loop: CFL steps, entropy production every step, optional
//! p-adaptivity, conservation budget and error norms.

use crate::adaptivity::{adaptive_step, AdaptiveConfig};
use crate::entropy::{compute_s, compute_s_augmented, EntropyField};
use crate::equations::System;
use crate::error::{Error, Result};
use crate::mesh::{BoundarySpec, Field};
use crate::problems::ProblemSpec;
use crate::reconstruction::CellPoly;
use crate::scalar::{lit, to_f64, Real};
use crate::steppers::{clip_dt, compute_dt, Scheme, StepRecord, Stepper};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub scheme: Scheme,
    pub cfl: T,
    pub t_max: T,
    pub adaptivity: Option<AdaptiveConfig<T>>,
    /// Also evolve `eta` as an extra component and report that `S`.
    pub augmented: bool,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(scheme: Scheme, cfl: f64, t_max: f64) -> Self {
        SolverConfig {
            scheme,
            cfl: lit(cfl),
            t_max: lit(t_max),
            adaptivity: None,
            augmented: false,
        }
    }
}

/// Everything measured on one step.
#[derive(Debug, Clone)]
pub struct StepReport<T> {
    pub step: usize,
    /// Time after the step.
    pub t: T,
    pub dt: T,
    pub entropy: EntropyField<T>,
    /// `S` of the trial step when adaptivity recomputed cells.
    pub entropy_trial: Option<EntropyField<T>>,
    pub entropy_augmented: Option<EntropyField<T>>,
    pub orders: Vec<u8>,
    pub pad: Vec<bool>,
    pub marked: Vec<bool>,
    pub totals: Vec<T>,
    /// Relative conservation residual including the boundary fluxes.
    pub budget_residual: f64,
    /// Time-integrated outflow through each domain side (`X_LO`..`Y_HI`),
    /// in the units of `totals`.
    pub outflow: [Vec<f64>; 4],
}

impl<T: Real> StepReport<T> {
    pub fn marked_count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }

    pub fn reduced_count(&self, full: u8) -> usize {
        self.orders.iter().filter(|&&o| o < full).count()
    }
}

#[derive(Debug, Clone)]
pub struct Solver<T> {
    pub stepper: Stepper<T>,
    /// Current averages, ghosts filled.
    pub field: Field<T>,
    pub t: T,
    pub step: usize,
    pub cfg: SolverConfig<T>,
    polys: Option<Vec<CellPoly<T>>>,
    eta: Option<Vec<T>>,
    /// `sum dt ||S||_1` over the completed steps.
    s_l1_time: f64,
}

impl<T: Real> Solver<T> {
    pub fn new(sys: System<T>, field: Field<T>, bc: BoundarySpec<T>, cfg: SolverConfig<T>) -> Result<Self> {
        if !(cfg.cfl > T::zero()) || !(cfg.t_max >= T::zero()) {
            return Err(Error::InvalidParams("cfl must be positive and t_max non-negative".into()));
        }
        let mut stepper = Stepper::new(sys, field.grid, bc, cfg.scheme)?;
        if let Some(a) = &cfg.adaptivity {
            a.validate(stepper.degree())?;
        }
        stepper.augmented = cfg.augmented;
        for id in 0..field.grid.ncells() {
            sys.check_physical(field.cell(id)).map_err(|e| Error::StepFailed {
                step: 0,
                cell: Some(id),
                reason: format!("initial data: {e}"),
            })?;
        }
        let mut field = field;
        bc.fill_ghosts(&sys, &mut field);
        Ok(Solver {
            stepper,
            field,
            t: T::zero(),
            step: 0,
            cfg,
            polys: None,
            eta: None,
            s_l1_time: 0.0,
        })
    }

    /// Solver on the catalogued problem at resolution `n`.
    pub fn from_problem(spec: &ProblemSpec, n: [usize; 2], cfg: SolverConfig<T>) -> Result<Self> {
        let grid = spec.grid::<T>(n)?;
        let field = spec.initial_field(grid)?;
        Solver::new(spec.system(), field, spec.boundary()?, cfg)
    }

    pub fn sys(&self) -> &System<T> {
        &self.stepper.sys
    }

    pub fn done(&self) -> bool {
        self.t >= self.cfg.t_max
    }

    pub fn totals(&self) -> Vec<T> {
        self.field.totals(self.sys().m())
    }

    /// Time average of `||S||_1` over the steps taken so far.
    pub fn mean_s_l1(&self) -> f64 {
        let t = to_f64(self.t);
        if t > 0.0 {
            self.s_l1_time / t
        } else {
            0.0
        }
    }

    /// Step size from the CFL condition, clipped to `t_max`.
    pub fn next_dt(&self) -> Result<T> {
        let dt = compute_dt(self.sys(), &self.field, self.cfg.cfl)?;
        Ok(clip_dt(self.t, dt, self.cfg.t_max))
    }

    pub fn step(&mut self) -> Result<StepReport<T>> {
        let dt = self.next_dt()?;
        self.step_dt(dt)
    }

    pub fn step_dt(&mut self, dt: T) -> Result<StepReport<T>> {
        let step = self.step;
        let tag = |e: Error| match e {
            Error::StepFailed { cell, reason, .. } => Error::StepFailed { step, cell, reason },
            other => other,
        };
        let sys = *self.sys();
        let polys = self.polys.take();
        let old_eta = self.eta.take();
        let (record, entropy, trial, marked, new_field, new_polys) = match self.cfg.adaptivity {
            Some(cfg) => {
                let out = adaptive_step(&mut self.stepper, &self.field, polys, old_eta.as_deref(), dt, &cfg, step)
                    .map_err(tag)?;
                let trial = if out.flags.is_empty() { None } else { Some(out.entropy_trial) };
                (out.record, out.entropy, trial, out.flags.marked, out.new_field, out.new_polys)
            }
            None => {
                let record = self.stepper.step(&self.field, polys, dt, false).map_err(tag)?;
                if let Some(j) = (0..record.new.grid.ncells()).find(|&j| !sys.is_physical(record.new.cell(j))) {
                    return Err(Error::StepFailed {
                        step,
                        cell: Some(j),
                        reason: "unphysical updated average".into(),
                    });
                }
                let mut new_field = record.new.clone();
                self.stepper.bc.fill_ghosts(&sys, &mut new_field);
                let new_polys = self.stepper.reconstruct(&new_field);
                let entropy = compute_s(&sys, &self.stepper.topo, &record, &new_polys, old_eta.as_deref(), step);
                let n = new_polys.len();
                (record, entropy, None, vec![false; n], new_field, new_polys)
            }
        };
        let entropy_augmented = if self.cfg.augmented {
            Some(compute_s_augmented(&sys, &record, &new_polys, step)?)
        } else {
            None
        };
        let (budget_residual, outflow) = self.budget(&record);
        self.field = new_field;
        self.polys = Some(new_polys);
        self.eta = Some(entropy.eta_new.clone());
        self.t = if dt == self.cfg.t_max - self.t { self.cfg.t_max } else { self.t + dt };
        self.step += 1;
        self.s_l1_time += to_f64(dt) * entropy.stats.l1;
        Ok(StepReport {
            step,
            t: self.t,
            dt,
            entropy,
            entropy_trial: trial,
            entropy_augmented,
            orders: record.orders,
            pad: record.pad,
            marked,
            totals: self.field.totals(sys.m()),
            budget_residual,
            outflow,
        })
    }

    /// `|sum U^{n+1} - sum U^n + dt * outflow| / scale`, worst component,
    /// and the outflow split by side.
    fn budget(&self, record: &StepRecord<T>) -> (f64, [Vec<f64>; 4]) {
        let m = self.sys().m();
        let topo = &self.stepper.topo;
        let old = record.old.totals(m);
        let new = record.new.totals(m);
        let dt = to_f64(record.dt);
        let mut sides: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; m]);
        for (f, info) in topo.faces.iter().enumerate() {
            let sign = match (info.left, info.right) {
                (Some(_), None) => 1.0,
                (None, Some(_)) => -1.0,
                _ => continue,
            };
            let side = info.boundary.expect("boundary face without side");
            for st in &record.stages {
                for (v, o) in sides[side].iter_mut().enumerate() {
                    *o += dt * sign * to_f64(st.weight) * to_f64(st.faces.f[f][v]);
                }
            }
        }
        let vol_total = to_f64(record.old.grid.volume()) * record.old.grid.ncells() as f64;
        let residual = (0..m)
            .map(|v| {
                let (a, b) = (to_f64(old[v]), to_f64(new[v]));
                let scale = a.abs().max(b.abs()).max(vol_total);
                let out: f64 = sides.iter().map(|s| s[v]).sum();
                (b - a + out).abs() / scale
            })
            .fold(0.0, f64::max);
        (residual, sides)
    }

    /// Steps until `t_max`, handing every report to `on_step`.
    pub fn run(&mut self, mut on_step: impl FnMut(&Self, &StepReport<T>) -> Result<()>) -> Result<()> {
        while !self.done() {
            let r = self.step()?;
            on_step(self, &r)?;
        }
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        self.run(|_, _| Ok(()))
    }

    /// `sum_j |Omega_j| |rho_j - rho_exact_j|` against exact averages.
    pub fn l1_density_error(&self, spec: &ProblemSpec) -> Result<f64> {
        let exact = spec.exact_averages(self.field.grid, to_f64(self.t))?;
        let vol = to_f64(self.field.grid.volume());
        Ok((0..self.field.grid.ncells())
            .map(|j| (to_f64(self.field.cell(j)[0]) - to_f64(exact.cell(j)[0])).abs() * vol)
            .sum())
    }
}
