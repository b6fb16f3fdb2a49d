//! Property tests for the structural invariants of the models and the
//! numerical kernels.

use nalgebra::{DMatrix, Vector3};
use proptest::prelude::*;

use smib::design::lqr_gain;
use smib::frames::{blocked_inductance, park_matrix, StatorInductances};
use smib::linearize::{linearize_reduced, numeric_jacobian, reduced_equilibrium, voltage_sensitivities, Anchors};
use smib::numlin::{eigenvalues, poly_from_roots, polynomial_roots, Matrix, C64};
use smib::params::{derive_reduced_coefficients, MachineParams, ReducedCoefficients, COEFFICIENT_NAMES};
use smib::reduced_model::{algebraic_currents, reduced_output, reduced_rhs, torque_terms, DELTA, E_Q};
use smib::tf::TransferFunction;

fn coefficients() -> ReducedCoefficients {
    derive_reduced_coefficients(&MachineParams::default()).unwrap()
}

fn matrix(n: usize, entries: &[f64]) -> Matrix {
    DMatrix::from_row_slice(n, n, &entries[..n * n])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn park_is_orthogonal(theta in -20.0f64..20.0) {
        let p = park_matrix(theta);
        let gap = (p * p.transpose() - nalgebra::Matrix3::identity()).abs().max();
        prop_assert!(gap <= 1e-12, "theta {theta}: {gap}");
    }

    #[test]
    fn park_preserves_power(
        theta in -20.0f64..20.0,
        v in prop::array::uniform3(-2.0f64..2.0),
        i in prop::array::uniform3(-2.0f64..2.0),
    ) {
        let (v, i) = (Vector3::from(v), Vector3::from(i));
        let p = park_matrix(theta);
        let abc = v.dot(&i);
        let dq0 = (p * v).dot(&(p * i));
        prop_assert!((abc - dq0).abs() <= 1e-12 * (1.0 + abc.abs()));
    }

    #[test]
    fn stator_block_eigenvalues_do_not_depend_on_angle(theta in -10.0f64..10.0, m_s in 0.0f64..0.5) {
        let p = MachineParams::default();
        let s = StatorInductances::from_machine(&p, m_s);
        let m = blocked_inductance(&p, &s, theta);
        let l11 = m.stator_frame.fixed_view::<3, 3>(0, 0).into_owned();
        let mut got: Vec<f64> = l11.symmetric_eigenvalues().iter().copied().collect();
        let mut want = vec![m.l0, m.ld, m.lq];
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-8, "theta {theta}: {got:?} vs {want:?}");
        }
    }

    #[test]
    fn coefficient_overrides_show_up_in_the_table(idx in 0usize..23, value in -50.0f64..50.0) {
        let p = MachineParams::default();
        let mut c = coefficients();
        let name = COEFFICIENT_NAMES[idx];
        c.set(name, value).unwrap();
        let table = c.table(&p);
        for (k, (n, v)) in table.iter().enumerate() {
            prop_assert_eq!(*n, COEFFICIENT_NAMES[k]);
            if *n == name {
                prop_assert_eq!(*v, value);
            } else {
                prop_assert_eq!(*v, coefficients().table(&p)[k].1);
            }
        }
    }

    #[test]
    fn expanded_torque_matches_the_current_form(e_q in 0.2f64..2.0, delta in 0.0f64..3.1) {
        let c = coefficients();
        let i = algebraic_currents(e_q, delta, &c);
        let direct = e_q * i.i_q - c.l4 * i.i_d * i.i_q;
        let (sin, cos) = (delta - c.alpha).sin_cos();
        let expanded = -torque_terms(e_q, sin, cos, &c) / c.inertia_inv;
        prop_assert!((expanded - direct).abs() <= 1e-10 * (1.0 + direct.abs()), "{expanded} vs {direct}");
    }

    #[test]
    fn transposition_keeps_the_spectrum(entries in prop::collection::vec(-3.0f64..3.0, 25), n in 2usize..=5) {
        let a = matrix(n, &entries);
        let s = eigenvalues(&a).unwrap();
        let st = eigenvalues(&a.transpose()).unwrap();
        prop_assert!(s.distance(&st.0) <= 1e-9 * (1.0 + s.iter().map(|z| z.norm()).fold(0.0, f64::max)));
        // complex eigenvalues of a real matrix pair up
        for z in s.iter().filter(|z| z.im.abs() > 1e-9) {
            let partner = s.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(partner <= 1e-9, "{z} has no conjugate");
        }
    }

    #[test]
    fn roots_of_expanded_polynomial(
        reals in prop::collection::vec(-5.0f64..-0.1, 0..=4),
        pairs in prop::collection::vec((-3.0f64..-0.1, 0.1f64..4.0), 0..=2),
    ) {
        let mut roots: Vec<C64> = reals.iter().map(|r| C64::new(*r, 0.0)).collect();
        for (re, im) in &pairs {
            roots.push(C64::new(*re, *im));
            roots.push(C64::new(*re, -*im));
        }
        prop_assume!(!roots.is_empty());
        // near-coincident roots are ill conditioned at this tolerance
        for (k, a) in roots.iter().enumerate() {
            for b in &roots[k + 1..] {
                prop_assume!((a - b).norm() > 0.05);
            }
        }
        let found = polynomial_roots(&poly_from_roots(&roots)).unwrap();
        prop_assert!(found.distance(&roots) <= 1e-6, "{:?} vs {roots:?}", found.0);
    }

    #[test]
    fn feedback_poles_match_the_closed_loop_realisation(
        k in 0.1f64..10.0,
        a1 in 0.1f64..5.0,
        a0 in 0.1f64..5.0,
        c in 0.1f64..5.0,
        h in 0.1f64..5.0,
    ) {
        let g = TransferFunction::new(&[k], &[1.0, a1, a0]).unwrap();
        let hf = TransferFunction::new(&[h], &[1.0, c]).unwrap();
        let poles = g.feedback(&hf).unwrap().poles().unwrap();
        // interconnect the two realisations by hand
        let gs = g.to_state_space().unwrap();
        let hs = hf.to_state_space().unwrap();
        let (ng, nh) = (gs.states(), hs.states());
        let mut a = Matrix::zeros(ng + nh, ng + nh);
        let bg_ch = &gs.b * &hs.c;
        let bh_cg = &hs.b * &gs.c;
        let bg_dh_cg = &gs.b * &hs.d * &gs.c;
        for i in 0..ng {
            for j in 0..ng {
                a[(i, j)] = gs.a[(i, j)] - bg_dh_cg[(i, j)];
            }
            for j in 0..nh {
                a[(i, ng + j)] = -bg_ch[(i, j)];
            }
        }
        for i in 0..nh {
            for j in 0..ng {
                a[(ng + i, j)] = bh_cg[(i, j)];
            }
            for j in 0..nh {
                a[(ng + i, ng + j)] = hs.a[(i, j)];
            }
        }
        let eig = eigenvalues(&a).unwrap();
        prop_assert!(poles.distance(&eig.0) <= 1e-8 * (1.0 + eig.iter().map(|z| z.norm()).fold(0.0, f64::max)));
    }

    #[test]
    fn lqr_ignores_a_common_weight_scale(scale in 1e-3f64..1e3) {
        let c = coefficients();
        let eq = reduced_equilibrium(Anchors { delta: 1.0, t_m: 1.0012 }, &c).unwrap();
        let lin = linearize_reduced(&eq, &c).unwrap();
        let q = Matrix::identity(5, 5);
        let r = Matrix::identity(2, 2);
        let k1 = lqr_gain(&lin, &q, &r).unwrap();
        let k2 = lqr_gain(&lin, &(&q * scale), &(&r * scale)).unwrap();
        let gap = (&k1.k - &k2.k).abs().max() / k1.k.abs().max();
        prop_assert!(gap <= 1e-8, "scale {scale}: {gap}");
    }

    #[test]
    fn reduced_equilibria_are_steady(delta in 0.3f64..1.4, t_m in 0.2f64..1.4) {
        let c = coefficients();
        if let Ok(eq) = reduced_equilibrium(Anchors { delta, t_m }, &c) {
            let x = eq.reduced_state().unwrap();
            let f = reduced_rhs(&x, &[eq.u0[0], eq.u0[1]], &c);
            let worst = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(worst <= 1e-9, "{f:?}");
        }
    }
}

#[test]
fn coefficient_derivation_is_pure() {
    let p = MachineParams::default();
    let a = derive_reduced_coefficients(&p).unwrap();
    let b = derive_reduced_coefficients(&p).unwrap();
    assert_eq!(a, b);
    assert!(a.turbine[0] < 0.0 && a.turbine[1] > 0.0);
}

#[test]
fn analytic_jacobians_match_differences_at_every_preset() {
    let c = coefficients();
    for op in smib::params::OperatingPoint::presets() {
        let eq = reduced_equilibrium(Anchors { delta: op.delta, t_m: op.t_m }, &c).unwrap();
        let lin = linearize_reduced(&eq, &c).unwrap();
        let x0 = eq.reduced_state().unwrap();
        let u0 = [eq.u0[0], eq.u0[1]];
        let xu: Vec<f64> = x0.iter().chain(&u0).copied().collect();
        let jac = numeric_jacobian(
            |v| {
                let x: [f64; 5] = v[..5].try_into().unwrap();
                reduced_rhs(&x, &[v[5], v[6]], &c).to_vec()
            },
            &xu,
            5,
        );
        for i in 0..5 {
            for j in 0..5 {
                assert!((jac[(i, j)] - lin.a[(i, j)]).abs() <= 1e-6, "{} A({i},{j})", op.name);
            }
            for j in 0..2 {
                assert!((jac[(i, 5 + j)] - lin.b[(i, j)]).abs() <= 1e-6, "{} B({i},{j})", op.name);
            }
        }
    }
}

#[test]
fn voltage_sensitivities_are_first_order_exact() {
    let c = coefficients();
    let eq = reduced_equilibrium(Anchors { delta: 1.0, t_m: 1.0012 }, &c).unwrap();
    let x0 = eq.reduced_state().unwrap();
    let (t1, t2) = voltage_sensitivities(&x0, &c).unwrap();
    let v0 = reduced_output(&x0, &c).v_t;
    let mut gaps = Vec::new();
    for h in [1e-2, 1e-3] {
        let mut x = x0;
        x[E_Q] += h;
        x[DELTA] += 0.5 * h;
        let ratio = (reduced_output(&x, &c).v_t - v0) / (t1 * h + t2 * 0.5 * h);
        gaps.push((ratio - 1.0).abs());
    }
    assert!(gaps[1] < gaps[0], "{gaps:?}");
    assert!(gaps[1] < 1e-2, "{gaps:?}");
}

#[test]
fn tabulated_terminal_voltages_are_reproduced() {
    let c = coefficients();
    for op in smib::params::OperatingPoint::presets() {
        let v = reduced_output(&op.reduced_state(), &c).v_t;
        assert!((v - op.v_t).abs() <= 5e-3, "{}: {v} vs {}", op.name, op.v_t);
    }
}
