use ader_entropy::adaptivity::{adaptive_step, mark_cells, AdaptiveConfig};
use ader_entropy::entropy::compute_s;
use ader_entropy::equations::{State, System};
use ader_entropy::mesh::{BoundaryCondition, BoundarySpec, Field, Grid};
use ader_entropy::reconstruction::{reconstruct, ReconstructionKind};
use ader_entropy::steppers::{Scheme, Stepper};
use proptest::prelude::*;

fn euler_state(sys: &System<f64>, rho: f64, u: f64, v: f64, p: f64) -> State<f64> {
    let prim = if sys.dim() == 1 { [rho, u, p, 0.0] } else { [rho, u, v, p] };
    sys.primitive_to_conserved(&prim).unwrap()
}

/// Random physical averages: a base state plus bounded cell perturbations.
fn random_field(sys: &System<f64>, grid: Grid<f64>, amp: f64, seeds: &[f64]) -> Field<f64> {
    let n = grid.ncells();
    Field::from_fn(grid, |i, j| {
        let k = (i + j * grid.n[0]) % seeds.len();
        let s = seeds[k] * amp;
        let r = seeds[(k + n / 3 + 1) % seeds.len()] * amp;
        euler_state(sys, 1.0 + 0.5 * s, 0.3 * r, -0.2 * s, 1.0 + 0.4 * r)
    })
}

fn schemes() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::p0p1()), Just(Scheme::p0p2()), Just(Scheme::rk3())]
}

fn relative_drift(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn periodic_steps_conserve_and_reassemble(
        scheme in schemes(),
        two_d in any::<bool>(),
        seeds in prop::collection::vec(-1.0f64..1.0, 17..40),
        amp in 0.0f64..0.6,
    ) {
        let (sys, grid) = if two_d {
            (System::euler2d(1.4), Grid::new_2d([0.0, 0.0], [1.0, 1.0], [9, 7]).unwrap())
        } else {
            (System::euler1d(1.4), Grid::new_1d(0.0, 1.0, 23).unwrap())
        };
        let bc = BoundarySpec::periodic();
        let mut old = random_field(&sys, grid, amp, &seeds);
        bc.fill_ghosts(&sys, &mut old);
        let mut st = Stepper::new(sys, grid, bc, scheme).unwrap();
        let dt = 0.3 * grid.dx[0] / 3.0;
        let rec = st.step(&old, None, dt, true).unwrap();
        prop_assert!(relative_drift(&old.totals(sys.m()), &rec.new.totals(sys.m())) < 1e-12);
        prop_assert_eq!(rec.reassemble(&st.topo, sys.m()).interior(), rec.new.interior());
    }

    #[test]
    fn uniform_states_produce_no_entropy(
        scheme in schemes(),
        rho in 0.1f64..5.0, u in -2.0f64..2.0, v in -2.0f64..2.0, p in 0.1f64..5.0,
        periodic in any::<bool>(),
        two_d in any::<bool>(),
    ) {
        let (sys, grid) = if two_d {
            (System::euler2d(1.4), Grid::new_2d([0.0, 0.0], [1.0, 2.0], [6, 5]).unwrap())
        } else {
            (System::euler1d(1.4), Grid::new_1d(0.0, 1.0, 12).unwrap())
        };
        let bc = if periodic { BoundarySpec::periodic() } else { BoundarySpec::uniform(BoundaryCondition::FreeFlow) };
        let c = euler_state(&sys, rho, u, v, p);
        let mut old = Field::from_fn(grid, |_, _| c);
        bc.fill_ghosts(&sys, &mut old);
        let mut st = Stepper::new(sys, grid, bc, scheme).unwrap();
        let rec = st.step(&old, None, 0.01, false).unwrap();
        let mut new = rec.new.clone();
        bc.fill_ghosts(&sys, &mut new);
        let polys = st.reconstruct(&new);
        let s = compute_s(&sys, &st.topo, &rec, &polys, None, 0);
        prop_assert!(s.values.iter().all(|&x| x == 0.0), "{:?}", s.stats);
    }

    #[test]
    fn ghost_fill_is_idempotent(
        kinds in prop::collection::vec(0usize..4, 4),
        seeds in prop::collection::vec(-1.0f64..1.0, 11..30),
    ) {
        let sys = System::euler2d(1.4);
        let grid = Grid::new_2d([0.0, 0.0], [1.0, 1.0], [5, 4]).unwrap();
        let pick = |k: usize| match k {
            0 => BoundaryCondition::Wall,
            1 => BoundaryCondition::Symmetry,
            2 => BoundaryCondition::FreeFlow,
            _ => BoundaryCondition::Dirichlet(euler_state(&sys, 2.0, 0.1, 0.0, 3.0)),
        };
        let bc = BoundarySpec { sides: [pick(kinds[0]), pick(kinds[1]), pick(kinds[2]), pick(kinds[3])] };
        let mut f = random_field(&sys, grid, 0.5, &seeds);
        bc.fill_ghosts(&sys, &mut f);
        let once = f.clone();
        bc.fill_ghosts(&sys, &mut f);
        prop_assert_eq!(once, f);
    }

    #[test]
    fn reconstructions_preserve_means_and_minmod_stays_bounded(
        vals in prop::collection::vec(0.1f64..10.0, 12),
    ) {
        let sys = System::euler1d(1.4);
        let grid = Grid::new_1d(0.0, 1.0, vals.len()).unwrap();
        let mut f = Field::from_fn(grid, |i, _| euler_state(&sys, vals[i], 0.0, 0.0, 1.0));
        BoundarySpec::periodic().fill_ghosts(&sys, &mut f);
        for kind in [ReconstructionKind::P0, ReconstructionKind::MinmodLinear, ReconstructionKind::Cweno3] {
            for i in 0..vals.len() {
                let p = reconstruct(kind, &f, 3, i, 0);
                prop_assert!((p.mean()[0] - vals[i]).abs() <= 1e-13 * vals[i]);
                if kind == ReconstructionKind::MinmodLinear {
                    let n = vals.len();
                    let nb = [vals[(i + n - 1) % n], vals[i], vals[(i + 1) % n]];
                    let lo = nb.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = nb.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    for side in 0..2 {
                        let b = p.evaluate_boundary(side, 0.5)[0];
                        prop_assert!(b >= lo - 1e-12 && b <= hi + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn raising_the_threshold_never_marks_more(
        a in 1e-4f64..10.0, b in 1e-4f64..10.0,
    ) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let sys = System::euler1d(1.4);
        let grid = Grid::new_1d(0.0, 1.0, 50).unwrap();
        let bc = BoundarySpec::uniform(BoundaryCondition::Wall);
        let l = euler_state(&sys, 1.0, 0.0, 0.0, 1.0);
        let r = euler_state(&sys, 0.125, 0.0, 0.0, 0.1);
        let mut old = Field::from_fn(grid, |i, _| if i < 25 { l } else { r });
        bc.fill_ghosts(&sys, &mut old);
        let mut st = Stepper::new(sys, grid, bc, Scheme::p0p2()).unwrap();
        let rec = st.step(&old, None, 0.004, true).unwrap();
        let mut new = rec.new.clone();
        bc.fill_ghosts(&sys, &mut new);
        let s = compute_s(&sys, &st.topo, &rec, &st.reconstruct(&new), None, 0);
        let m_lo = mark_cells(&s, &st, lo);
        let m_hi = mark_cells(&s, &st, hi);
        for j in 0..50 {
            prop_assert!(!m_hi.marked[j] || m_lo.marked[j]);
        }
    }

    #[test]
    fn adaptive_steps_conserve_with_two_order_levels(
        s_ref in 1e-3f64..5.0,
        low in 0usize..2,
        seeds in prop::collection::vec(-1.0f64..1.0, 17..40),
    ) {
        let sys = System::euler1d(1.4);
        let grid = Grid::new_1d(0.0, 1.0, 40).unwrap();
        let bc = BoundarySpec::periodic();
        let mut old = random_field(&sys, grid, 0.9, &seeds);
        bc.fill_ghosts(&sys, &mut old);
        let mut st = Stepper::new(sys, grid, bc, Scheme::p0p2()).unwrap();
        let cfg = AdaptiveConfig { s_ref, low_order_m: low, enable_pad: true };
        let out = adaptive_step(&mut st, &old, None, None, 0.004, &cfg, 0).unwrap();
        prop_assert!(relative_drift(&old.totals(3), &out.record.new.totals(3)) < 1e-12);
        for j in 0..40 {
            let o = out.flags.orders[j];
            prop_assert!(o == 3 || o == low as u8 + 1 || (out.flags.pad[j] && o == 1), "order {}", o);
        }
        prop_assert_eq!(out.record.reassemble(&st.topo, 3).interior(), out.record.new.interior());
    }
}
