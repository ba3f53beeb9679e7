//! Hyperbolic systems: fluxes, entropy pairs, wave speeds and variable
//! conversions.
//!
//! States are stored as fixed `[T; MAX_VARS]` arrays; only the first
//! [`System::m`] components are meaningful. For Euler the layout is
//! `(rho, rho*v [, rho*w], E)`.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Largest component count of any supported system (2D Euler).
pub const MAX_VARS: usize = 4;

/// Conserved-variable vector.
pub type State<T> = [T; MAX_VARS];

/// Density and pressure must both exceed this for a state to be physical.
pub const POSITIVITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System<T> {
    /// `u_t + a u_x = 0`
    Advection1D { speed: T },
    /// `u_t + (u^2/2)_x = 0`
    Burgers1D,
    Euler1D { gamma: T },
    Euler2D { gamma: T },
}

pub fn zero_state<T: Real>() -> State<T> {
    [T::zero(); MAX_VARS]
}

impl<T: Real> System<T> {
    pub fn advection(speed: f64) -> Self {
        System::Advection1D { speed: lit(speed) }
    }

    pub fn euler1d(gamma: f64) -> Self {
        System::Euler1D { gamma: lit(gamma) }
    }

    pub fn euler2d(gamma: f64) -> Self {
        System::Euler2D { gamma: lit(gamma) }
    }

    /// Number of conserved components.
    pub fn m(&self) -> usize {
        match self {
            System::Advection1D { .. } | System::Burgers1D => 1,
            System::Euler1D { .. } => 3,
            System::Euler2D { .. } => 4,
        }
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        match self {
            System::Euler2D { .. } => 2,
            _ => 1,
        }
    }

    pub fn gamma(&self) -> Option<T> {
        match *self {
            System::Euler1D { gamma } | System::Euler2D { gamma } => Some(gamma),
            _ => None,
        }
    }

    pub fn is_euler(&self) -> bool {
        self.gamma().is_some()
    }

    /// Index of the momentum component normal to `axis`, if any.
    pub fn momentum_index(&self, axis: usize) -> Option<usize> {
        if self.is_euler() && axis < self.dim() {
            Some(1 + axis)
        } else {
            None
        }
    }

    fn energy_index(&self) -> usize {
        self.m() - 1
    }

    /// Pressure of an Euler state (no positivity check).
    #[inline]
    pub fn pressure(&self, u: &State<T>) -> T {
        let gamma = match self.gamma() {
            Some(g) => g,
            None => return T::zero(),
        };
        let rho = u[0];
        let mut kin = T::zero();
        for d in 0..self.dim() {
            kin += u[1 + d] * u[1 + d];
        }
        (gamma - T::one()) * (u[self.energy_index()] - lit::<T>(0.5) * kin / rho)
    }

    /// Returns `(rho, p)` or `UnphysicalState`.
    #[inline]
    fn checked_rho_p(&self, u: &State<T>) -> Result<(T, T)> {
        let rho = u[0];
        let p = self.pressure(u);
        let tol = lit::<T>(POSITIVITY_TOL);
        if rho > tol && p > tol && rho.is_finite() && p.is_finite() {
            Ok((rho, p))
        } else {
            Err(Error::UnphysicalState {
                density: to_f64(rho),
                pressure: to_f64(p),
            })
        }
    }

    /// Ok for any finite scalar state; density/pressure check for Euler.
    #[inline]
    pub fn check_physical(&self, u: &State<T>) -> Result<()> {
        if self.is_euler() {
            self.checked_rho_p(u).map(|_| ())
        } else if u[0].is_finite() {
            Ok(())
        } else {
            Err(Error::UnphysicalState {
                density: to_f64(u[0]),
                pressure: f64::NAN,
            })
        }
    }

    pub fn is_physical(&self, u: &State<T>) -> bool {
        self.check_physical(u).is_ok()
    }

    /// Flux component along `dir`.
    #[inline]
    pub fn physical_flux(&self, u: &State<T>, dir: usize) -> Result<State<T>> {
        if dir >= self.dim() {
            return Err(Error::InvalidParams(format!(
                "flux direction {dir} for a {}D system",
                self.dim()
            )));
        }
        let mut f = zero_state();
        match *self {
            System::Advection1D { speed } => f[0] = speed * u[0],
            System::Burgers1D => f[0] = lit::<T>(0.5) * u[0] * u[0],
            System::Euler1D { .. } => {
                let (rho, p) = self.checked_rho_p(u)?;
                let v = u[1] / rho;
                f[0] = u[1];
                f[1] = u[1] * v + p;
                f[2] = v * (u[2] + p);
            }
            System::Euler2D { .. } => {
                let (rho, p) = self.checked_rho_p(u)?;
                let vn = u[1 + dir] / rho;
                f[0] = u[1 + dir];
                f[1] = u[1] * vn;
                f[2] = u[2] * vn;
                f[1 + dir] += p;
                f[3] = vn * (u[3] + p);
            }
        }
        Ok(f)
    }

    /// Both flux directions of a 2D state at once (shared pressure); for 1D
    /// systems the second entry is zero.
    #[inline]
    pub fn fluxes_all(&self, u: &State<T>) -> Result<[State<T>; 2]> {
        match *self {
            System::Euler2D { .. } => {
                let (rho, p) = self.checked_rho_p(u)?;
                let vx = u[1] / rho;
                let vy = u[2] / rho;
                let hp = u[3] + p;
                Ok([
                    [u[1], u[1] * vx + p, u[2] * vx, vx * hp],
                    [u[2], u[1] * vy, u[2] * vy + p, vy * hp],
                ])
            }
            _ => Ok([self.physical_flux(u, 0)?, zero_state()]),
        }
    }

    /// Entropy `eta(u)`. Scalar laws use `u^2/2`; Euler uses the physical
    /// entropy `-rho log(p / ((gamma-1) rho^gamma))`.
    #[inline]
    pub fn entropy_value(&self, u: &State<T>) -> Result<T> {
        match *self {
            System::Advection1D { .. } | System::Burgers1D => {
                self.check_physical(u)?;
                Ok(lit::<T>(0.5) * u[0] * u[0])
            }
            System::Euler1D { gamma } | System::Euler2D { gamma } => {
                let (rho, p) = self.checked_rho_p(u)?;
                Ok(-rho * (p.ln() - (gamma - T::one()).ln() - gamma * rho.ln()))
            }
        }
    }

    /// Entropy flux `psi(u)` along `dir`.
    #[inline]
    pub fn entropy_flux(&self, u: &State<T>, dir: usize) -> Result<T> {
        if dir >= self.dim() {
            return Err(Error::InvalidParams(format!(
                "entropy flux direction {dir} for a {}D system",
                self.dim()
            )));
        }
        match *self {
            System::Advection1D { speed } => {
                self.check_physical(u)?;
                Ok(speed * lit::<T>(0.5) * u[0] * u[0])
            }
            System::Burgers1D => {
                self.check_physical(u)?;
                Ok(u[0] * u[0] * u[0] / lit::<T>(3.0))
            }
            System::Euler1D { .. } | System::Euler2D { .. } => {
                let eta = self.entropy_value(u)?;
                Ok(u[1 + dir] / u[0] * eta)
            }
        }
    }

    /// `|v.n| + c` for Euler, `|u|` for Burgers, `|a|` for advection.
    #[inline]
    pub fn wave_speed(&self, u: &State<T>, normal: &[T]) -> Result<T> {
        match *self {
            System::Advection1D { speed } => Ok(speed.abs()),
            System::Burgers1D => {
                self.check_physical(u)?;
                Ok(u[0].abs())
            }
            System::Euler1D { gamma } | System::Euler2D { gamma } => {
                let (rho, p) = self.checked_rho_p(u)?;
                let mut vn = T::zero();
                for d in 0..self.dim() {
                    vn += u[1 + d] * normal[d];
                }
                Ok((vn / rho).abs() + (gamma * p / rho).sqrt())
            }
        }
    }

    /// Largest signal speed over the two states along `normal`.
    pub fn max_wave_speed(&self, ul: &State<T>, ur: &State<T>, normal: &[T]) -> Result<T> {
        Ok(self.wave_speed(ul, normal)?.max(self.wave_speed(ur, normal)?))
    }

    /// Primitive `(rho, v [, w], p)` to conserved. Scalar systems pass through.
    pub fn primitive_to_conserved(&self, prim: &State<T>) -> Result<State<T>> {
        let gamma = match self.gamma() {
            Some(g) => g,
            None => return Ok(*prim),
        };
        let tol = lit::<T>(POSITIVITY_TOL);
        let rho = prim[0];
        let p = prim[self.energy_index()];
        if !(rho > tol && p > tol) {
            return Err(Error::UnphysicalState {
                density: to_f64(rho),
                pressure: to_f64(p),
            });
        }
        let mut u = zero_state();
        u[0] = rho;
        let mut kin = T::zero();
        for d in 0..self.dim() {
            u[1 + d] = rho * prim[1 + d];
            kin += prim[1 + d] * prim[1 + d];
        }
        u[self.energy_index()] = lit::<T>(0.5) * rho * kin + p / (gamma - T::one());
        Ok(u)
    }

    /// Conserved to primitive `(rho, v [, w], p)`.
    pub fn conserved_to_primitive(&self, u: &State<T>) -> Result<State<T>> {
        if !self.is_euler() {
            self.check_physical(u)?;
            return Ok(*u);
        }
        let (rho, p) = self.checked_rho_p(u)?;
        let mut prim = zero_state();
        prim[0] = rho;
        for d in 0..self.dim() {
            prim[1 + d] = u[1 + d] / rho;
        }
        prim[self.energy_index()] = p;
        Ok(prim)
    }

    /// Mirror image of a state across a plane normal to `axis`.
    #[inline]
    pub fn reflect(&self, u: &State<T>, axis: usize) -> State<T> {
        let mut r = *u;
        if let Some(k) = self.momentum_index(axis) {
            r[k] = -r[k];
        }
        r
    }
}
