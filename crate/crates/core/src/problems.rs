//! Test problem catalog, cell averaging of initial data and exact solutions.

use std::f64::consts::PI;

use crate::equations::{zero_state, State, System};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryCondition, BoundarySpec, Field, Grid};
use crate::quadrature::gauss_legendre_unit;
use crate::scalar::{lit, Real};

pub const GAMMA: f64 = 1.4;

/// Primitive state `(rho, v, p)` in 1D or `(rho, u, v, p)` in 2D.
pub type Prim = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bc {
    Periodic,
    Wall,
    Symmetry,
    FreeFlow,
    /// Fixed primitive state.
    Dirichlet(Prim),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    Riemann { x0: f64, left: Prim, right: Prim },
    SmoothSine,
    WoodwardColella,
    Vortex,
    RadialSod,
    ShockBubble,
    Implosion,
    Sedov,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub dim: usize,
    pub gamma: f64,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    /// x_lo, x_hi, y_lo, y_hi
    pub bc: [Bc; 4],
    pub t_max: f64,
    /// Snapshot times listed with the problem; `t_max` is the last one.
    pub times: &'static [f64],
    pub cfl: f64,
    pub default_n: [usize; 2],
    pub s_ref: Option<f64>,
    pub initial: InitialData,
}

const SHOCK_BUBBLE_LEFT: Prim = [11.0 / 3.0, 2.713_602_101_199_872_2, 0.0, 10.0];
pub const SEDOV_PRESSURE: f64 = 0.244816;

fn riemann(name: &'static str, lo: f64, hi: f64, x0: f64, l: [f64; 3], r: [f64; 3], t: f64, n: usize) -> ProblemSpec {
    ProblemSpec {
        name,
        dim: 1,
        gamma: GAMMA,
        lo: [lo, 0.0],
        hi: [hi, 0.0],
        bc: [Bc::FreeFlow; 4],
        t_max: t,
        times: &[],
        cfl: 0.5,
        default_n: [n, 1],
        s_ref: None,
        initial: InitialData::Riemann {
            x0,
            left: [l[0], l[1], l[2], 0.0],
            right: [r[0], r[1], r[2], 0.0],
        },
    }
}

/// All catalogued problems.
/// Closed cell `[a, b]` contains the origin, up to round-off in the bounds.
fn touches_origin(a: [f64; 2], b: [f64; 2]) -> bool {
    (0..2).all(|k| {
        let tol = 1e-9 * (b[k] - a[k]);
        a[k] <= tol && b[k] >= -tol
    })
}

pub fn catalog() -> Vec<ProblemSpec> {
    let mut sod = riemann("sod_1d", 0.0, 1.0, 0.5, [1.0, 0.0, 1.0], [0.125, 0.0, 0.1], 0.2, 100);
    sod.bc = [Bc::Wall; 4];
    let mut t123 = riemann("test_123", -0.5, 0.5, 0.0, [1.0, -2.0, 0.4], [1.0, 2.0, 0.4], 0.15, 200);
    t123.s_ref = Some(200.0);
    vec![
        ProblemSpec {
            name: "smooth_sine_1d",
            dim: 1,
            gamma: GAMMA,
            lo: [0.0, 0.0],
            hi: [1.0, 0.0],
            bc: [Bc::Periodic; 4],
            t_max: 0.1,
            times: &[],
            cfl: 0.5,
            default_n: [128, 1],
            s_ref: None,
            initial: InitialData::SmoothSine,
        },
        riemann("double_rarefaction", -2.0, 2.0, 0.0, [1.0, -0.15, 1.0], [0.5, 0.15, 1.0], 0.5, 512),
        riemann("slow_contact", -5.0, 5.0, 0.0, [2.0, 0.1, 1.0], [1.0, 0.1, 1.0], 10.0, 512),
        riemann("double_shock", -3.0, 7.0, 0.0, [1.5, 4.0, 10.0], [0.5, -4.0, 10.0], 1.0, 512),
        sod,
        ProblemSpec {
            name: "woodward_colella",
            dim: 1,
            gamma: GAMMA,
            lo: [0.0, 0.0],
            hi: [1.0, 0.0],
            bc: [Bc::Wall; 4],
            t_max: 0.038,
            times: &[0.01, 0.028, 0.038],
            cfl: 0.5,
            default_n: [2400, 1],
            s_ref: Some(1.0),
            initial: InitialData::WoodwardColella,
        },
        t123,
        ProblemSpec {
            name: "isentropic_vortex_2d",
            dim: 2,
            gamma: GAMMA,
            lo: [-5.0, -5.0],
            hi: [5.0, 5.0],
            bc: [Bc::Periodic; 4],
            t_max: 10.0,
            times: &[],
            cfl: 0.45,
            default_n: [64, 64],
            s_ref: None,
            initial: InitialData::Vortex,
        },
        ProblemSpec {
            name: "radial_sod_2d",
            dim: 2,
            gamma: GAMMA,
            lo: [0.0, 0.0],
            hi: [1.0, 1.0],
            bc: [Bc::Symmetry, Bc::Wall, Bc::Symmetry, Bc::Wall],
            t_max: 0.2,
            times: &[0.2, 0.6, 1.0],
            cfl: 0.45,
            default_n: [128, 128],
            s_ref: None,
            initial: InitialData::RadialSod,
        },
        ProblemSpec {
            name: "shock_bubble_2d",
            dim: 2,
            gamma: GAMMA,
            lo: [-0.1, 0.0],
            hi: [1.6, 0.5],
            bc: [Bc::Dirichlet(SHOCK_BUBBLE_LEFT), Bc::FreeFlow, Bc::Symmetry, Bc::Wall],
            t_max: 0.15,
            times: &[0.15, 0.4],
            cfl: 0.45,
            default_n: [340, 100],
            s_ref: None,
            initial: InitialData::ShockBubble,
        },
        ProblemSpec {
            name: "implosion_2d",
            dim: 2,
            gamma: GAMMA,
            lo: [0.0, 0.0],
            hi: [0.3, 0.3],
            bc: [Bc::Wall; 4],
            t_max: 0.03,
            times: &[0.03, 0.06, 0.09],
            cfl: 0.45,
            default_n: [200, 200],
            s_ref: Some(0.1),
            initial: InitialData::Implosion,
        },
        ProblemSpec {
            name: "sedov_2d",
            dim: 2,
            gamma: GAMMA,
            lo: [-1.2, -1.2],
            hi: [1.2, 1.2],
            bc: [Bc::Wall; 4],
            t_max: 10.0,
            times: &[],
            cfl: 0.45,
            default_n: [200, 200],
            s_ref: Some(100.0),
            initial: InitialData::Sedov,
        },
    ]
}

pub fn names() -> Vec<&'static str> {
    catalog().iter().map(|p| p.name).collect()
}

pub fn lookup(name: &str) -> Result<ProblemSpec> {
    catalog()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))
}

fn prim_state<T: Real>(p: &Prim) -> State<T> {
    let mut s = zero_state();
    for v in 0..4 {
        s[v] = lit(p[v]);
    }
    s
}

impl ProblemSpec {
    pub fn system<T: Real>(&self) -> System<T> {
        if self.dim == 1 {
            System::euler1d(self.gamma)
        } else {
            System::euler2d(self.gamma)
        }
    }

    pub fn grid<T: Real>(&self, n: [usize; 2]) -> Result<Grid<T>> {
        if self.dim == 1 {
            Grid::new_1d(lit(self.lo[0]), lit(self.hi[0]), n[0])
        } else {
            Grid::new_2d([lit(self.lo[0]), lit(self.lo[1])], [lit(self.hi[0]), lit(self.hi[1])], n)
        }
    }

    pub fn boundary<T: Real>(&self) -> Result<BoundarySpec<T>> {
        let sys = self.system::<T>();
        let mut sides = [BoundaryCondition::Periodic; 4];
        for (s, bc) in sides.iter_mut().zip(&self.bc) {
            *s = match bc {
                Bc::Periodic => BoundaryCondition::Periodic,
                Bc::Wall => BoundaryCondition::Wall,
                Bc::Symmetry => BoundaryCondition::Symmetry,
                Bc::FreeFlow => BoundaryCondition::FreeFlow,
                Bc::Dirichlet(p) => BoundaryCondition::Dirichlet(sys.primitive_to_conserved(&prim_state(p))?),
            };
        }
        let spec = BoundarySpec { sides };
        spec.validate(self.dim)?;
        Ok(spec)
    }

    /// Pointwise primitive initial data.
    pub fn initial_primitive(&self, x: f64, y: f64) -> Prim {
        match self.initial {
            InitialData::Riemann { x0, left, right } => {
                if x <= x0 {
                    left
                } else {
                    right
                }
            }
            InitialData::SmoothSine => [1.0 + 0.5 * (2.0 * PI * x).sin(), 1.0, 1.0, 0.0],
            InitialData::WoodwardColella => {
                let p = if x <= 0.1 {
                    1000.0
                } else if x < 0.9 {
                    0.01
                } else {
                    100.0
                };
                [1.0, 0.0, p, 0.0]
            }
            InitialData::Vortex => vortex(self.gamma, x, y),
            InitialData::RadialSod => {
                if x * x + y * y < 0.25 {
                    [1.0, 0.0, 0.0, 1.0]
                } else {
                    [0.125, 0.0, 0.0, 0.1]
                }
            }
            InitialData::ShockBubble => {
                if x < 0.0 {
                    SHOCK_BUBBLE_LEFT
                } else if ((x - 0.3).powi(2) + y * y).sqrt() > 0.2 {
                    [1.0, 0.0, 0.0, 1.0]
                } else {
                    [0.1, 0.0, 0.0, 1.0]
                }
            }
            InitialData::Implosion => {
                if x + y > 0.15 {
                    [1.0, 0.0, 0.0, 1.0]
                } else {
                    [0.125, 0.0, 0.0, 0.14]
                }
            }
            InitialData::Sedov => [1.0, 0.0, 0.0, 1e-6],
        }
    }

    /// Jump locations of 1D initial data.
    fn breaks(&self) -> Vec<f64> {
        match self.initial {
            InitialData::Riemann { x0, .. } => vec![x0],
            InitialData::WoodwardColella => vec![0.1, 0.9],
            _ => Vec::new(),
        }
    }

    /// Cell averages of the initial data: 3-point Gauss per axis, split
    /// exactly at 1D jumps. Sedov cells touching the origin get the
    /// blast pressure.
    pub fn initial_field<T: Real>(&self, grid: Grid<T>) -> Result<Field<T>> {
        let sys = self.system::<f64>();
        let g = to64(&grid);
        let mut out = Field::new(grid);
        for id in 0..grid.ncells() {
            let (i, j) = grid.cell_ij(id);
            let (a, b) = g.cell_bounds(i, j);
            let u = if self.dim == 1 {
                average_1d(&sys, |x| Ok(self.initial_primitive(x, 0.0)), a[0], b[0], &self.breaks(), 3)?
            } else if self.initial == InitialData::Sedov && touches_origin(a, b) {
                sys.primitive_to_conserved(&[1.0, 0.0, 0.0, SEDOV_PRESSURE])?
            } else {
                average_2d(&sys, |x, y| Ok(self.initial_primitive(x, y)), a, b, 3)?
            };
            *out.cell_mut(id) = cast(&u);
        }
        Ok(out)
    }

    pub fn has_exact(&self) -> bool {
        matches!(
            self.initial,
            InitialData::SmoothSine | InitialData::Vortex | InitialData::Riemann { .. }
        )
    }

    /// Exact primitive solution at `(t, x)`.
    pub fn exact_primitive(&self, t: f64, x: [f64; 2]) -> Result<Prim> {
        match self.initial {
            InitialData::SmoothSine => {
                let xs = wrap(x[0] - t, self.lo[0], self.hi[0]);
                Ok(self.initial_primitive(xs, 0.0))
            }
            InitialData::Vortex => {
                let xs = wrap(x[0] - t, self.lo[0], self.hi[0]);
                let ys = wrap(x[1] - t, self.lo[1], self.hi[1]);
                Ok(vortex(self.gamma, xs, ys))
            }
            InitialData::Riemann { x0, left, right } => {
                let rs = RiemannSolution::new(self.gamma, [left[0], left[1], left[2]], [right[0], right[1], right[2]])?;
                if t <= 0.0 {
                    return Ok(self.initial_primitive(x[0], 0.0));
                }
                let w = rs.sample((x[0] - x0) / t);
                Ok([w[0], w[1], w[2], 0.0])
            }
            _ => Err(Error::NoExactSolution(self.name.to_string())),
        }
    }

    /// Exact cell averages at time `t`.
    pub fn exact_averages<T: Real>(&self, grid: Grid<T>, t: f64) -> Result<Field<T>> {
        let sys = self.system::<f64>();
        let g = to64(&grid);
        let mut out = Field::new(grid);
        let breaks: Vec<f64> = match self.initial {
            InitialData::SmoothSine | InitialData::Vortex => Vec::new(),
            InitialData::Riemann { x0, left, right } => {
                let rs = RiemannSolution::new(self.gamma, [left[0], left[1], left[2]], [right[0], right[1], right[2]])?;
                rs.wave_speeds().iter().map(|s| x0 + s * t).collect()
            }
            _ => return Err(Error::NoExactSolution(self.name.to_string())),
        };
        for id in 0..grid.ncells() {
            let (i, j) = grid.cell_ij(id);
            let (a, b) = g.cell_bounds(i, j);
            let u = match self.initial {
                InitialData::SmoothSine => {
                    // closed form: rho averages exactly, v = p = 1
                    let h = b[0] - a[0];
                    let k = 2.0 * PI;
                    let rho = 1.0 + 0.5 * ((k * (a[0] - t)).cos() - (k * (b[0] - t)).cos()) / (k * h);
                    let mut u = zero_state::<f64>();
                    u[0] = rho;
                    u[1] = rho;
                    u[2] = 0.5 * rho + 1.0 / (self.gamma - 1.0);
                    u
                }
                InitialData::Vortex => average_2d(&sys, |x, y| self.exact_primitive(t, [x, y]), a, b, 3)?,
                _ => average_1d(&sys, |x| self.exact_primitive(t, [x, 0.0]), a[0], b[0], &breaks, 5)?,
            };
            *out.cell_mut(id) = cast(&u);
        }
        Ok(out)
    }
}

fn wrap(x: f64, lo: f64, hi: f64) -> f64 {
    lo + (x - lo).rem_euclid(hi - lo)
}

fn vortex(gamma: f64, x: f64, y: f64) -> Prim {
    let beta = 5.0;
    let r2 = x * x + y * y;
    let e = ((1.0 - r2) / 2.0).exp();
    let temp = 1.0 - (gamma - 1.0) * beta * beta / (8.0 * gamma * PI * PI) * (1.0 - r2).exp();
    let rho = temp.powf(1.0 / (gamma - 1.0));
    [rho, 1.0 - beta * y / (2.0 * PI) * e, 1.0 + beta * x / (2.0 * PI) * e, rho * temp]
}

fn to64<T: Real>(g: &Grid<T>) -> Grid<f64> {
    let c = |a: [T; 2]| [crate::scalar::to_f64(a[0]), crate::scalar::to_f64(a[1])];
    Grid {
        dim: g.dim,
        n: g.n,
        lo: c(g.lo),
        hi: c(g.hi),
        dx: c(g.dx),
    }
}

fn cast<T: Real>(u: &State<f64>) -> State<T> {
    let mut s = zero_state();
    for v in 0..4 {
        s[v] = lit(u[v]);
    }
    s
}

impl Grid<f64> {
    fn cell_bounds(&self, i: usize, j: usize) -> ([f64; 2], [f64; 2]) {
        let c = self.center(i, j);
        let h = [0.5 * self.dx[0], 0.5 * self.dx[1]];
        ([c[0] - h[0], c[1] - h[1]], [c[0] + h[0], c[1] + h[1]])
    }
}

/// Average of the conserved variables of `prim(x)` over `[a, b]`, with the
/// interval split at every break inside it.
fn average_1d(sys: &System<f64>, prim: impl Fn(f64) -> Result<Prim>, a: f64, b: f64, breaks: &[f64], npts: usize) -> Result<State<f64>> {
    let (xq, wq) = gauss_legendre_unit::<f64>(npts);
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|p, q| p.total_cmp(q));
    let mut pts = vec![a];
    pts.extend(cuts);
    pts.push(b);
    let mut acc = zero_state::<f64>();
    for w in pts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        for (x, wt) in xq.iter().zip(&wq) {
            let u = conserved(sys, &prim(w[0] + x * len)?)?;
            for v in 0..sys.m() {
                acc[v] += wt * len * u[v];
            }
        }
    }
    for v in acc.iter_mut() {
        *v /= b - a;
    }
    Ok(acc)
}

fn average_2d(
    sys: &System<f64>,
    prim: impl Fn(f64, f64) -> Result<Prim>,
    a: [f64; 2],
    b: [f64; 2],
    npts: usize,
) -> Result<State<f64>> {
    let (xq, wq) = gauss_legendre_unit::<f64>(npts);
    let mut acc = zero_state::<f64>();
    for (xi, wx) in xq.iter().zip(&wq) {
        for (eta, wy) in xq.iter().zip(&wq) {
            let x = a[0] + xi * (b[0] - a[0]);
            let y = a[1] + eta * (b[1] - a[1]);
            let u = conserved(sys, &prim(x, y)?)?;
            for v in 0..sys.m() {
                acc[v] += wx * wy * u[v];
            }
        }
    }
    Ok(acc)
}

/// Primitive to conserved that tolerates vacuum in exact solutions.
fn conserved(sys: &System<f64>, p: &Prim) -> Result<State<f64>> {
    if sys.dim() == 1 && (p[0] <= 0.0 || p[2] <= 0.0) {
        let g = sys.gamma().unwrap_or(GAMMA);
        return Ok([p[0], p[0] * p[1], p[2] / (g - 1.0) + 0.5 * p[0] * p[1] * p[1], 0.0]);
    }
    sys.primitive_to_conserved(p)
}

/// Exact solution of the 1D Euler Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution {
    pub gamma: f64,
    pub left: [f64; 3],
    pub right: [f64; 3],
    pub p_star: f64,
    pub u_star: f64,
    /// Left and right states separate into vacuum.
    pub vacuum: bool,
}

impl RiemannSolution {
    pub fn new(gamma: f64, left: [f64; 3], right: [f64; 3]) -> Result<Self> {
        for s in [left, right] {
            if !(s[0] > 0.0 && s[2] > 0.0) {
                return Err(Error::UnphysicalState {
                    density: s[0],
                    pressure: s[2],
                });
            }
        }
        let cl = (gamma * left[2] / left[0]).sqrt();
        let cr = (gamma * right[2] / right[0]).sqrt();
        let du = right[1] - left[1];
        let vacuum = 2.0 * (cl + cr) / (gamma - 1.0) <= du;
        let mut rs = RiemannSolution {
            gamma,
            left,
            right,
            p_star: 0.0,
            u_star: 0.0,
            vacuum,
        };
        if vacuum {
            return Ok(rs);
        }
        // two-rarefaction guess, then Newton on f(p) = fL + fR + du
        let z = (gamma - 1.0) / (2.0 * gamma);
        let pg = ((cl + cr - 0.5 * (gamma - 1.0) * du) / (cl / left[2].powf(z) + cr / right[2].powf(z))).powf(1.0 / z);
        let mut p = pg.max(1e-14);
        let mut converged = false;
        for _ in 0..100 {
            let (fl, dl) = rs.pressure_fn(p, &left);
            let (fr, dr) = rs.pressure_fn(p, &right);
            let f = fl + fr + du;
            let mut next = p - f / (dl + dr);
            if next <= 0.0 {
                next = 0.1 * p;
            }
            let change = 2.0 * (next - p).abs() / (next + p);
            p = next;
            if change < 1e-12 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::InvalidParams("exact Riemann iteration did not converge".into()));
        }
        let (fl, _) = rs.pressure_fn(p, &left);
        let (fr, _) = rs.pressure_fn(p, &right);
        rs.p_star = p;
        rs.u_star = 0.5 * (left[1] + right[1]) + 0.5 * (fr - fl);
        Ok(rs)
    }

    fn sound(&self, s: &[f64; 3]) -> f64 {
        (self.gamma * s[2] / s[0]).sqrt()
    }

    /// Pressure function of one side and its derivative.
    fn pressure_fn(&self, p: f64, s: &[f64; 3]) -> (f64, f64) {
        let g = self.gamma;
        let c = self.sound(s);
        if p > s[2] {
            let a = 2.0 / ((g + 1.0) * s[0]);
            let b = (g - 1.0) / (g + 1.0) * s[2];
            let q = (a / (p + b)).sqrt();
            ((p - s[2]) * q, q * (1.0 - 0.5 * (p - s[2]) / (b + p)))
        } else {
            let r = p / s[2];
            (
                2.0 * c / (g - 1.0) * (r.powf((g - 1.0) / (2.0 * g)) - 1.0),
                r.powf(-(g + 1.0) / (2.0 * g)) / (s[0] * c),
            )
        }
    }

    fn star_density(&self, s: &[f64; 3]) -> f64 {
        let g = self.gamma;
        let r = self.p_star / s[2];
        if r > 1.0 {
            let k = (g - 1.0) / (g + 1.0);
            s[0] * (r + k) / (r * k + 1.0)
        } else {
            s[0] * r.powf(1.0 / g)
        }
    }

    /// Shock speed of a side (`sign` -1 left, +1 right) if it is a shock.
    fn shock_speed(&self, s: &[f64; 3], sign: f64) -> Option<f64> {
        if self.vacuum || self.p_star <= s[2] {
            return None;
        }
        let g = self.gamma;
        let c = self.sound(s);
        Some(s[1] + sign * c * ((g + 1.0) / (2.0 * g) * self.p_star / s[2] + (g - 1.0) / (2.0 * g)).sqrt())
    }

    /// Speeds of every wave edge, sorted.
    pub fn wave_speeds(&self) -> Vec<f64> {
        let g = self.gamma;
        let (l, r) = (self.left, self.right);
        let (cl, cr) = (self.sound(&l), self.sound(&r));
        let mut v = Vec::new();
        if self.vacuum {
            v.extend([l[1] - cl, l[1] + 2.0 * cl / (g - 1.0), r[1] - 2.0 * cr / (g - 1.0), r[1] + cr]);
        } else {
            match self.shock_speed(&l, -1.0) {
                Some(s) => v.push(s),
                None => {
                    let cs = cl * (self.p_star / l[2]).powf((g - 1.0) / (2.0 * g));
                    v.extend([l[1] - cl, self.u_star - cs]);
                }
            }
            v.push(self.u_star);
            match self.shock_speed(&r, 1.0) {
                Some(s) => v.push(s),
                None => {
                    let cs = cr * (self.p_star / r[2]).powf((g - 1.0) / (2.0 * g));
                    v.extend([self.u_star + cs, r[1] + cr]);
                }
            }
        }
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    /// Primitive `(rho, v, p)` at similarity coordinate `s = x / t`.
    pub fn sample(&self, s: f64) -> [f64; 3] {
        let g = self.gamma;
        let (l, r) = (self.left, self.right);
        let fan = |st: &[f64; 3], sign: f64| -> [f64; 3] {
            // inside a rarefaction fan; sign -1 left, +1 right
            let c = self.sound(st);
            let k = 2.0 / (g + 1.0);
            let cf = k * (c - sign * (g - 1.0) / 2.0 * (st[1] - s));
            let rho = st[0] * (cf / c).powf(2.0 / (g - 1.0));
            [rho, k * (-sign * c + (g - 1.0) / 2.0 * st[1] + s), st[2] * (cf / c).powf(2.0 * g / (g - 1.0))]
        };
        if self.vacuum {
            let (cl, cr) = (self.sound(&l), self.sound(&r));
            return if s <= l[1] - cl {
                l
            } else if s < l[1] + 2.0 * cl / (g - 1.0) {
                fan(&l, -1.0)
            } else if s <= r[1] - 2.0 * cr / (g - 1.0) {
                [0.0, 0.5 * (l[1] + 2.0 * cl / (g - 1.0) + r[1] - 2.0 * cr / (g - 1.0)), 0.0]
            } else if s < r[1] + cr {
                fan(&r, 1.0)
            } else {
                r
            };
        }
        let side = |st: &[f64; 3], sign: f64| -> [f64; 3] {
            // sign -1 left of the contact, +1 right
            let star = [self.star_density(st), self.u_star, self.p_star];
            match self.shock_speed(st, sign) {
                Some(sh) => {
                    if sign * (s - sh) >= 0.0 {
                        *st
                    } else {
                        star
                    }
                }
                None => {
                    let c = self.sound(st);
                    let head = st[1] + sign * c;
                    let tail = self.u_star + sign * c * (self.p_star / st[2]).powf((g - 1.0) / (2.0 * g));
                    if sign * (s - head) >= 0.0 {
                        *st
                    } else if sign * (s - tail) <= 0.0 {
                        star
                    } else {
                        fan(st, sign)
                    }
                }
            }
        };
        if s <= self.u_star {
            side(&l, -1.0)
        } else {
            side(&r, 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_and_lookup() {
        let n = names();
        assert_eq!(n.len(), 12);
        for name in &n {
            assert_eq!(lookup(name).unwrap().name, *name);
        }
        assert_eq!(lookup("nope"), Err(Error::UnknownProblem("nope".into())));
    }

    #[test]
    fn initial_averages_are_physical() {
        for p in catalog() {
            let n = if p.dim == 1 { [64, 1] } else { [24, 24] };
            let f = p.initial_field::<f64>(p.grid(n).unwrap()).unwrap();
            let sys = p.system::<f64>();
            for id in 0..f.grid.ncells() {
                assert!(sys.is_physical(f.cell(id)), "{} cell {id}", p.name);
            }
            p.boundary::<f64>().unwrap();
        }
    }

    #[test]
    fn cut_cells_average_exactly() {
        let p = lookup("sod_1d").unwrap();
        // 0.5 falls inside cell 2 of 5: half of each state
        let f = p.initial_field::<f64>(p.grid([5, 1]).unwrap()).unwrap();
        assert!((f.cell(2)[0] - 0.5625).abs() < 1e-15);
        assert_eq!(f.cell(1)[0], 1.0);
        let f = p.initial_field::<f64>(p.grid([4, 1]).unwrap()).unwrap();
        assert_eq!(f.cell(1)[0], 1.0);
        assert_eq!(f.cell(2)[0], 0.125);
    }

    #[test]
    fn sedov_blast_cells() {
        let p = lookup("sedov_2d").unwrap();
        let sys = p.system::<f64>();
        let f = p.initial_field::<f64>(p.grid([10, 10]).unwrap()).unwrap();
        let hot: Vec<usize> = (0..100).filter(|&id| sys.pressure(f.cell(id)) > 0.1).collect();
        assert_eq!(hot, vec![44, 45, 54, 55]);
        assert!((sys.pressure(f.cell(44)) - SEDOV_PRESSURE).abs() < 1e-14);
        for n in [9, 200, 400] {
            let f = p.initial_field::<f64>(p.grid([n, n]).unwrap()).unwrap();
            let hot = (0..n * n).filter(|&id| sys.pressure(f.cell(id)) > 0.1).count();
            assert_eq!(hot, if n % 2 == 0 { 4 } else { 1 }, "n = {n}");
        }
    }

    #[test]
    fn smooth_sine_is_periodic() {
        let p = lookup("smooth_sine_1d").unwrap();
        for x in [0.0, 0.13, 0.5, 0.97] {
            let a = p.exact_primitive(1.0, [x, 0.0]).unwrap();
            let b = p.initial_primitive(x, 0.0);
            assert!((a[0] - b[0]).abs() < 1e-14);
        }
        let g = p.grid::<f64>([32, 1]).unwrap();
        let e = p.exact_averages(g, 0.0).unwrap();
        let i = p.initial_field(g).unwrap();
        for id in 0..32 {
            // closed form against 3-point Gauss
            assert!((e.cell(id)[0] - i.cell(id)[0]).abs() < 1e-7);
        }
    }

    #[test]
    fn vortex_returns_after_a_period() {
        let p = lookup("isentropic_vortex_2d").unwrap();
        for (x, y) in [(0.3, -0.2), (4.9, 1.0), (-3.0, -4.5)] {
            let a = p.exact_primitive(10.0, [x, y]).unwrap();
            let b = p.initial_primitive(x, y);
            for v in 0..4 {
                assert!((a[v] - b[v]).abs() < 1e-12);
            }
        }
        // pressure follows rho^gamma
        let w = p.initial_primitive(0.2, 0.1);
        assert!((w[3] - w[0].powf(GAMMA)).abs() < 1e-13);
    }

    #[test]
    fn sod_star_state() {
        let rs = RiemannSolution::new(GAMMA, [1.0, 0.0, 1.0], [0.125, 0.0, 0.1]).unwrap();
        assert!((rs.p_star - 0.30313).abs() < 1e-5);
        assert!((rs.u_star - 0.92745).abs() < 1e-5);
        let s = rs.sample(0.0);
        assert!((s[2] - rs.p_star).abs() < 1e-14);
        assert_eq!(rs.sample(-10.0), [1.0, 0.0, 1.0]);
        assert_eq!(rs.sample(10.0), [0.125, 0.0, 0.1]);
    }

    /// Jump relations across each shock of the double shock problem.
    #[test]
    fn rankine_hugoniot_residuals() {
        let g = GAMMA;
        let rs = RiemannSolution::new(g, [1.5, 4.0, 10.0], [0.5, -4.0, 10.0]).unwrap();
        let flux = |w: [f64; 3]| {
            let e = w[2] / (g - 1.0) + 0.5 * w[0] * w[1] * w[1];
            ([w[0], w[0] * w[1], e], [w[0] * w[1], w[0] * w[1] * w[1] + w[2], w[1] * (e + w[2])])
        };
        for (st, sign) in [(rs.left, -1.0), (rs.right, 1.0)] {
            let s = rs.shock_speed(&st, sign).unwrap();
            let star = [rs.star_density(&st), rs.u_star, rs.p_star];
            let (u0, f0) = flux(st);
            let (u1, f1) = flux(star);
            for v in 0..3 {
                let res = (f1[v] - f0[v]) - s * (u1[v] - u0[v]);
                assert!(res.abs() < 1e-10 * (1.0 + f0[v].abs()), "{res}");
            }
            // Lax condition: characteristics enter the shock
            let c0 = (g * st[2] / st[0]).sqrt();
            let c1 = (g * star[2] / star[0]).sqrt();
            if sign < 0.0 {
                assert!(st[1] - c0 > s && s > star[1] - c1);
            } else {
                assert!(st[1] + c0 < s && s < star[1] + c1);
            }
        }
    }

    #[test]
    fn rarefactions_are_continuous_and_isentropic() {
        for (l, r) in [([1.0, -0.15, 1.0], [0.5, 0.15, 1.0]), ([1.0, -2.0, 0.4], [1.0, 2.0, 0.4])] {
            let rs = RiemannSolution::new(GAMMA, l, r).unwrap();
            let sp = rs.wave_speeds();
            for &s in &sp {
                if (s - rs.u_star).abs() < 1e-12 {
                    continue;
                }
                let a = rs.sample(s - 1e-9);
                let b = rs.sample(s + 1e-9);
                assert!((a[0] - b[0]).abs() < 1e-6, "{a:?} {b:?}");
            }
            let w = rs.sample(0.5 * (sp[0] + sp[1]));
            assert!((w[2] / w[0].powf(GAMMA) - l[2] / l[0].powf(GAMMA)).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_detection() {
        let rs = RiemannSolution::new(GAMMA, [1.0, -20.0, 0.4], [1.0, 20.0, 0.4]).unwrap();
        assert!(rs.vacuum);
        assert_eq!(rs.sample(0.0)[0], 0.0);
        assert!(!RiemannSolution::new(GAMMA, [1.0, -2.0, 0.4], [1.0, 2.0, 0.4]).unwrap().vacuum);
    }

    #[test]
    fn exact_riemann_averages_split_at_waves() {
        let p = lookup("slow_contact").unwrap();
        let g = p.grid::<f64>([100, 1]).unwrap();
        // contact at x = 1 lands on an interface
        let e = p.exact_averages(g, 10.0).unwrap();
        assert!((e.cell(59)[0] - 2.0).abs() < 1e-12);
        assert!((e.cell(60)[0] - 1.0).abs() < 1e-12);
        assert!(p.exact_averages::<f64>(g, 0.0).is_ok());
        let q = lookup("sedov_2d").unwrap();
        assert!(matches!(
            q.exact_averages::<f64>(q.grid([4, 4]).unwrap(), 0.1),
            Err(Error::NoExactSolution(_))
        ));
    }
}
