//! Two-point numerical fluxes for the conserved variables and the entropy.

use crate::equations::{zero_state, State, System};
use crate::error::Result;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxKind {
    #[default]
    Rusanov,
}

/// Conserved and entropy fluxes through one face point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacePair<T> {
    pub f: State<T>,
    pub psi: T,
}

#[inline]
fn normal_flux<T: Real>(sys: &System<T>, u: &State<T>, normal: &[T]) -> Result<State<T>> {
    let fl = sys.fluxes_all(u)?;
    let mut out = zero_state();
    for d in 0..sys.dim() {
        if normal[d] != T::zero() {
            for v in 0..sys.m() {
                out[v] += fl[d][v] * normal[d];
            }
        }
    }
    Ok(out)
}

#[inline]
fn normal_entropy_flux<T: Real>(sys: &System<T>, u: &State<T>, normal: &[T]) -> Result<T> {
    let mut out = T::zero();
    for d in 0..sys.dim() {
        if normal[d] != T::zero() {
            out += sys.entropy_flux(u, d)? * normal[d];
        }
    }
    Ok(out)
}

/// Rusanov flux `1/2 (f(uL) + f(uR)).n - 1/2 s (uR - uL)`.
pub fn numerical_flux<T: Real>(sys: &System<T>, ul: &State<T>, ur: &State<T>, normal: &[T]) -> Result<State<T>> {
    let s = sys.max_wave_speed(ul, ur, normal)?;
    let fl = normal_flux(sys, ul, normal)?;
    let fr = normal_flux(sys, ur, normal)?;
    let half = lit::<T>(0.5);
    let mut out = zero_state();
    for v in 0..sys.m() {
        out[v] = half * (fl[v] + fr[v]) - half * s * (ur[v] - ul[v]);
    }
    Ok(out)
}

/// Entropy flux `1/2 (psi(uL) + psi(uR)).n - 1/2 s (eta(uR) - eta(uL))`
/// with the same speed `s` as [`numerical_flux`].
pub fn numerical_entropy_flux<T: Real>(sys: &System<T>, ul: &State<T>, ur: &State<T>, normal: &[T]) -> Result<T> {
    let s = sys.max_wave_speed(ul, ur, normal)?;
    let half = lit::<T>(0.5);
    let pl = normal_entropy_flux(sys, ul, normal)?;
    let pr = normal_entropy_flux(sys, ur, normal)?;
    Ok(half * (pl + pr) - half * s * (sys.entropy_value(ur)? - sys.entropy_value(ul)?))
}

/// Both fluxes through an axis-aligned face with normal `+e_axis`, sharing the
/// wave speed and the physical flux evaluations.
#[inline]
pub fn rusanov_pair<T: Real>(sys: &System<T>, ul: &State<T>, ur: &State<T>, axis: usize) -> Result<FacePair<T>> {
    let half = lit::<T>(0.5);
    let m = sys.m();
    let mut f = zero_state();
    let psi;
    match *sys {
        System::Euler1D { gamma } | System::Euler2D { gamma } => {
            let dim = sys.dim();
            let e = m - 1;
            let side = |u: &State<T>| -> Result<(T, T, T, T)> {
                let rho = u[0];
                let mut kin = T::zero();
                for d in 0..dim {
                    kin += u[1 + d] * u[1 + d];
                }
                let p = (gamma - T::one()) * (u[e] - half * kin / rho);
                sys.check_physical(u)?;
                let vn = u[1 + axis] / rho;
                let c = (gamma * p / rho).sqrt();
                Ok((p, vn, c, -rho * (p.ln() - (gamma - T::one()).ln() - gamma * rho.ln())))
            };
            let (pl, vl, cl, etal) = side(ul)?;
            let (pr, vr, cr, etar) = side(ur)?;
            let s = (vl.abs() + cl).max(vr.abs() + cr);
            for v in 0..m {
                let mut a = ul[v] * vl;
                let mut b = ur[v] * vr;
                if v == 1 + axis {
                    a += pl;
                    b += pr;
                } else if v == e {
                    a += pl * vl;
                    b += pr * vr;
                }
                f[v] = half * (a + b) - half * s * (ur[v] - ul[v]);
            }
            psi = half * (vl * etal + vr * etar) - half * s * (etar - etal);
        }
        _ => {
            let n = [T::one()];
            let s = sys.max_wave_speed(ul, ur, &n)?;
            let fl = sys.physical_flux(ul, 0)?;
            let fr = sys.physical_flux(ur, 0)?;
            f[0] = half * (fl[0] + fr[0]) - half * s * (ur[0] - ul[0]);
            psi = half * (sys.entropy_flux(ul, 0)? + sys.entropy_flux(ur, 0)?)
                - half * s * (sys.entropy_value(ur)? - sys.entropy_value(ul)?);
        }
    }
    Ok(FacePair { f, psi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_state(rng: &mut impl Rng, sys: &System<f64>) -> State<f64> {
        let prim = [
            rng.gen_range(0.1..3.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.1..5.0),
        ];
        let mut p = prim;
        if sys.dim() == 1 {
            p[2] = prim[3];
            p[3] = 0.0;
        }
        sys.primitive_to_conserved(&p).unwrap()
    }

    #[test]
    fn burgers_examples() {
        let sys = System::<f64>::Burgers1D;
        let f = numerical_flux(&sys, &[1.0; 4], &[0.0; 4], &[1.0]).unwrap();
        assert_eq!(f[0], 0.75);
        let psi = numerical_entropy_flux(&sys, &[1.0; 4], &[0.0; 4], &[1.0]).unwrap();
        assert!((psi - 5.0 / 12.0).abs() < 1e-15);
        let d = 0.6;
        let psi = numerical_entropy_flux(&sys, &[d / 2.0; 4], &[-d / 2.0; 4], &[1.0]).unwrap();
        assert_eq!(psi, 0.0);
    }

    #[test]
    fn wall_mirror_gives_pressure_only() {
        let sys = System::<f64>::euler1d(1.4);
        let u = sys.primitive_to_conserved(&[1.0, 0.0, 0.7, 0.0]).unwrap();
        let f = numerical_flux(&sys, &u, &sys.reflect(&u, 0), &[1.0]).unwrap();
        assert_eq!(f[0], 0.0);
        assert!((f[1] - 0.7).abs() < 1e-15);
        assert_eq!(f[2], 0.0);
    }

    #[test]
    fn consistency_on_random_states() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for sys in [System::<f64>::euler1d(1.4), System::euler2d(1.4)] {
            for _ in 0..500 {
                let u = random_state(&mut rng, &sys);
                for axis in 0..sys.dim() {
                    let mut n = [0.0; 2];
                    n[axis] = 1.0;
                    let f = numerical_flux(&sys, &u, &u, &n).unwrap();
                    let exact = sys.physical_flux(&u, axis).unwrap();
                    assert_eq!(&f[..sys.m()], &exact[..sys.m()]);
                    let psi = numerical_entropy_flux(&sys, &u, &u, &n).unwrap();
                    assert_eq!(psi, sys.entropy_flux(&u, axis).unwrap());
                }
            }
        }
    }

    #[test]
    fn fused_pair_matches_separate_fluxes() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for sys in [System::<f64>::euler1d(1.4), System::euler2d(1.4)] {
            for _ in 0..200 {
                let (a, b) = (random_state(&mut rng, &sys), random_state(&mut rng, &sys));
                for axis in 0..sys.dim() {
                    let mut n = [0.0; 2];
                    n[axis] = 1.0;
                    let pair = rusanov_pair(&sys, &a, &b, axis).unwrap();
                    let f = numerical_flux(&sys, &a, &b, &n).unwrap();
                    let psi = numerical_entropy_flux(&sys, &a, &b, &n).unwrap();
                    for v in 0..sys.m() {
                        assert!((pair.f[v] - f[v]).abs() <= 1e-13 * (1.0 + f[v].abs()));
                    }
                    assert!((pair.psi - psi).abs() <= 1e-12 * (1.0 + psi.abs()));
                }
            }
        }
        for sys in [System::<f64>::Burgers1D, System::advection(-2.0)] {
            let pair = rusanov_pair(&sys, &[1.0; 4], &[0.0; 4], 0).unwrap();
            assert_eq!(pair.f[0], numerical_flux(&sys, &[1.0; 4], &[0.0; 4], &[1.0]).unwrap()[0]);
        }
    }

    #[test]
    fn lipschitz_ratio_is_bounded() {
        let sys = System::<f64>::euler1d(1.4);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let mut worst: f64 = 0.0;
        for _ in 0..300 {
            let ul = random_state(&mut rng, &sys);
            let ur = random_state(&mut rng, &sys);
            let mut ur2 = ur;
            ur2[0] *= 1.0 + 1e-3;
            let f1 = numerical_flux(&sys, &ul, &ur, &[1.0]).unwrap();
            let f2 = numerical_flux(&sys, &ul, &ur2, &[1.0]).unwrap();
            let df: f64 = (0..3).map(|v| (f1[v] - f2[v]).abs()).sum();
            let du: f64 = (0..3).map(|v| (ur[v] - ur2[v]).abs()).sum();
            worst = worst.max(df / du);
        }
        assert!(worst.is_finite() && worst < 1e3);
    }
}
