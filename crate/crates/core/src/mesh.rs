//! Uniform Cartesian grids (1D intervals, 2D rectangles) with ghost layers.

use crate::equations::{zero_state, State, System};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Ghost layer width used everywhere; covers the widest reconstruction stencil.
pub const GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub dim: usize,
    /// Cells per axis (`n[1] == 1` in 1D).
    pub n: [usize; 2],
    pub lo: [T; 2],
    pub hi: [T; 2],
    pub dx: [T; 2],
}

impl<T: Real> Grid<T> {
    pub fn new_1d(lo: T, hi: T, n: usize) -> Result<Self> {
        if n == 0 || !(hi > lo) {
            return Err(Error::InvalidParams(format!("bad 1D grid ({n} cells)")));
        }
        Ok(Grid {
            dim: 1,
            n: [n, 1],
            lo: [lo, T::zero()],
            hi: [hi, T::one()],
            dx: [(hi - lo) / T::from_usize(n).unwrap(), T::one()],
        })
    }

    pub fn new_2d(lo: [T; 2], hi: [T; 2], n: [usize; 2]) -> Result<Self> {
        if n[0] == 0 || n[1] == 0 || !(hi[0] > lo[0]) || !(hi[1] > lo[1]) {
            return Err(Error::InvalidParams(format!("bad 2D grid {n:?}")));
        }
        Ok(Grid {
            dim: 2,
            n,
            lo,
            hi,
            dx: [
                (hi[0] - lo[0]) / T::from_usize(n[0]).unwrap(),
                (hi[1] - lo[1]) / T::from_usize(n[1]).unwrap(),
            ],
        })
    }

    pub fn ncells(&self) -> usize {
        self.n[0] * self.n[1]
    }

    /// Cell volume `|Omega_j|` (length in 1D, area in 2D).
    pub fn volume(&self) -> T {
        if self.dim == 1 {
            self.dx[0]
        } else {
            self.dx[0] * self.dx[1]
        }
    }

    /// Length `|e|` of a face normal to `axis` (1 for the point faces of 1D).
    pub fn face_length(&self, axis: usize) -> T {
        if self.dim == 1 {
            T::one()
        } else {
            self.dx[1 - axis]
        }
    }

    /// Linear cell id of interior cell `(i, j)`, x fastest.
    #[inline]
    pub fn cell_id(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    #[inline]
    pub fn cell_ij(&self, id: usize) -> (usize, usize) {
        (id % self.n[0], id / self.n[0])
    }

    pub fn center(&self, i: usize, j: usize) -> [T; 2] {
        let half = lit::<T>(0.5);
        let ci = self.lo[0] + (T::from_usize(i).unwrap() + half) * self.dx[0];
        if self.dim == 1 {
            [ci, T::zero()]
        } else {
            [ci, self.lo[1] + (T::from_usize(j).unwrap() + half) * self.dx[1]]
        }
    }

    /// Geometry of interior cell `id`.
    pub fn cell_geometry(&self, id: usize) -> Result<CellGeometry<T>> {
        if id >= self.ncells() {
            return Err(Error::IndexOutOfRange {
                index: id,
                len: self.ncells(),
            });
        }
        let (i, j) = self.cell_ij(id);
        let mut faces = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            for sign in [-T::one(), T::one()] {
                let mut normal = [T::zero(); 2];
                normal[axis] = sign;
                faces.push(Face {
                    normal,
                    length: self.face_length(axis),
                });
            }
        }
        Ok(CellGeometry {
            center: self.center(i, j),
            volume: self.volume(),
            faces,
        })
    }

    /// Total boundary measure `|dOmega_j|`.
    pub fn perimeter(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, a| acc + lit::<T>(2.0) * self.face_length(a))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face<T> {
    /// Outward unit normal.
    pub normal: [T; 2],
    pub length: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry<T> {
    pub center: [T; 2],
    pub volume: T,
    pub faces: Vec<Face<T>>,
}

/// Cell averages including ghost layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub grid: Grid<T>,
    pub data: Vec<State<T>>,
    px: usize,
    gy: usize,
}

impl<T: Real> Field<T> {
    pub fn new(grid: Grid<T>) -> Self {
        let px = grid.n[0] + 2 * GHOST;
        let gy = if grid.dim == 2 { GHOST } else { 0 };
        let py = grid.n[1] + 2 * gy;
        Field {
            grid,
            data: vec![zero_state(); px * py],
            px,
            gy,
        }
    }

    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut(usize, usize) -> State<T>) -> Self {
        let mut field = Field::new(grid);
        for j in 0..grid.n[1] {
            for i in 0..grid.n[0] {
                *field.at_mut(i as isize, j as isize) = f(i, j);
            }
        }
        field
    }

    #[inline(always)]
    fn offset(&self, i: isize, j: isize) -> usize {
        (j + self.gy as isize) as usize * self.px + (i + GHOST as isize) as usize
    }

    /// Value at `(i, j)`; negative or `>= n` indices address ghosts.
    #[inline(always)]
    pub fn at(&self, i: isize, j: isize) -> &State<T> {
        &self.data[self.offset(i, j)]
    }

    #[inline(always)]
    pub fn at_mut(&mut self, i: isize, j: isize) -> &mut State<T> {
        let o = self.offset(i, j);
        &mut self.data[o]
    }

    /// Interior cell by linear id.
    #[inline(always)]
    pub fn cell(&self, id: usize) -> &State<T> {
        let (i, j) = self.grid.cell_ij(id);
        self.at(i as isize, j as isize)
    }

    #[inline(always)]
    pub fn cell_mut(&mut self, id: usize) -> &mut State<T> {
        let (i, j) = self.grid.cell_ij(id);
        self.at_mut(i as isize, j as isize)
    }

    pub fn interior(&self) -> Vec<State<T>> {
        (0..self.grid.ncells()).map(|id| *self.cell(id)).collect()
    }

    /// `sum_j |Omega_j| U_j` per component.
    pub fn totals(&self, m: usize) -> Vec<T> {
        let vol = self.grid.volume();
        let mut tot = vec![T::zero(); m];
        for id in 0..self.grid.ncells() {
            let u = self.cell(id);
            for k in 0..m {
                tot[k] += u[k] * vol;
            }
        }
        tot
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition<T> {
    Periodic,
    /// Reflecting solid wall.
    Wall,
    /// Symmetry plane; same mechanics as `Wall`.
    Symmetry,
    /// Zero-gradient outflow.
    FreeFlow,
    /// Fixed conserved state.
    Dirichlet(State<T>),
}

/// Boundary conditions on the sides `[x_lo, x_hi, y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySpec<T> {
    pub sides: [BoundaryCondition<T>; 4],
}

pub const X_LO: usize = 0;
pub const X_HI: usize = 1;
pub const Y_LO: usize = 2;
pub const Y_HI: usize = 3;

impl<T: Real> BoundarySpec<T> {
    pub fn uniform(bc: BoundaryCondition<T>) -> Self {
        BoundarySpec { sides: [bc; 4] }
    }

    pub fn periodic() -> Self {
        Self::uniform(BoundaryCondition::Periodic)
    }

    /// Periodic sides must come in opposite pairs.
    pub fn validate(&self, dim: usize) -> Result<()> {
        for axis in 0..dim {
            let lo = matches!(self.sides[2 * axis], BoundaryCondition::Periodic);
            let hi = matches!(self.sides[2 * axis + 1], BoundaryCondition::Periodic);
            if lo != hi {
                return Err(Error::InvalidParams(format!(
                    "periodic boundary on axis {axis} is not paired"
                )));
            }
        }
        Ok(())
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        matches!(self.sides[2 * axis], BoundaryCondition::Periodic)
    }

    /// Fills all ghost cells from the interior. In 2D the x ghosts of interior
    /// rows are filled first, then full y ghost rows, which also covers corners.
    pub fn fill_ghosts(&self, sys: &System<T>, field: &mut Field<T>) {
        let grid = field.grid;
        let g = GHOST as isize;
        let nx = grid.n[0] as isize;
        for j in 0..grid.n[1] as isize {
            for k in 0..g {
                let lo = self.ghost_value(sys, 0, &self.sides[X_LO], field, -1 - k, nx, |f, s| {
                    *f.at(s, j)
                }, false);
                *field.at_mut(-1 - k, j) = lo;
                let hi = self.ghost_value(sys, 0, &self.sides[X_HI], field, nx + k, nx, |f, s| {
                    *f.at(s, j)
                }, true);
                *field.at_mut(nx + k, j) = hi;
            }
        }
        if grid.dim == 2 {
            let ny = grid.n[1] as isize;
            for i in -g..nx + g {
                for k in 0..g {
                    let lo = self.ghost_value(sys, 1, &self.sides[Y_LO], field, -1 - k, ny, |f, s| {
                        *f.at(i, s)
                    }, false);
                    *field.at_mut(i, -1 - k) = lo;
                    let hi = self.ghost_value(sys, 1, &self.sides[Y_HI], field, ny + k, ny, |f, s| {
                        *f.at(i, s)
                    }, true);
                    *field.at_mut(i, ny + k) = hi;
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn ghost_value(
        &self,
        sys: &System<T>,
        axis: usize,
        bc: &BoundaryCondition<T>,
        field: &Field<T>,
        ghost: isize,
        n: isize,
        get: impl Fn(&Field<T>, isize) -> State<T>,
        high: bool,
    ) -> State<T> {
        match bc {
            BoundaryCondition::Periodic => get(field, ghost.rem_euclid(n)),
            BoundaryCondition::Wall | BoundaryCondition::Symmetry => {
                let src = if high { 2 * n - 1 - ghost } else { -1 - ghost };
                sys.reflect(&get(field, src.clamp(0, n - 1)), axis)
            }
            BoundaryCondition::FreeFlow => get(field, if high { n - 1 } else { 0 }),
            BoundaryCondition::Dirichlet(s) => *s,
        }
    }
}
