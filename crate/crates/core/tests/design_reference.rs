//! Synthesis results on the reduced model at the nominal operating point,
//! checked against published gains and spectral contracts.

use smib::design::{
    chain_lqr_gain, kalman_ltr_gain, lqr_gain, observer_gain, place_poles, separation_matrix, LtrSchedule,
    ObserverPoles,
};
use smib::linearize::{linearize_reduced, reduced_equilibrium, Anchors, StateSpaceModel};
use smib::numlin::{care_residual, diag, eigenvalues, Matrix, C64};
use smib::params::{derive_reduced_coefficients, MachineParams};

fn nominal() -> StateSpaceModel {
    let c = derive_reduced_coefficients(&MachineParams::default()).unwrap();
    let eq = reduced_equilibrium(Anchors { delta: 1.0, t_m: 1.0012 }, &c).unwrap();
    linearize_reduced(&eq, &c).unwrap()
}

fn real_poles(v: &[f64]) -> Vec<C64> {
    v.iter().map(|x| C64::new(*x, 0.0)).collect()
}

/// Relative check per entry; entries below 1% of the largest one are
/// compared against that floor instead, since they come from cancellation.
fn assert_rel(got: &Matrix, want: &[f64], rel: f64) {
    let floor = 1e-2 * want.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    for (i, w) in want.iter().enumerate() {
        let g = got[(i / got.ncols(), i % got.ncols())];
        assert!((g - w).abs() <= rel * w.abs().max(floor), "entry {i}: got {g}, want {w}");
    }
}

#[test]
fn lqr_matches_published_gain() {
    let ss = nominal();
    let q = diag(&[300.0, 250.0, 200.0, 200.0, 250.0]);
    let r = diag(&[0.5, 0.5]);
    let g = lqr_gain(&ss, &q, &r).unwrap();
    let want = [
        23.7240, -36.3457, -5.5938, -2.5612, -0.0454, -1.3381, 21.0340, 1.5703, 9.0242, 21.5437,
    ];
    assert_rel(&g.k, &want, 0.02);
    assert!(g.closed_loop.is_hurwitz());
    let res = care_residual(&ss.a, &ss.b, &q, &r, &smib::numlin::solve_care(&ss.a, &ss.b, &q, &r).unwrap().p).unwrap();
    assert!(res <= 1e-7, "residual {res}");
}

#[test]
fn recovery_tuned_lqr_matches_published_gain() {
    let ss = nominal();
    let g = lqr_gain(&ss, &diag(&[1254.75, 1500.0, 544.5, 142.5, 1500.0]), &Matrix::identity(2, 2)).unwrap();
    let want = [
        34.5065, -49.5197, -5.6995, -4.1955, -0.0432, -1.2745, 28.0922, -0.0281, 4.3245, 37.7873,
    ];
    assert_rel(&g.k, &want, 0.02);
}

#[test]
fn lqr_is_scale_invariant() {
    let ss = nominal();
    let q = diag(&[300.0, 250.0, 200.0, 200.0, 250.0]);
    let r = diag(&[0.5, 0.5]);
    let a = lqr_gain(&ss, &q, &r).unwrap();
    let b = lqr_gain(&ss, &(&q * 7.0), &(&r * 7.0)).unwrap();
    let gap = (&a.k - &b.k).abs().max() / a.k.abs().max();
    assert!(gap < 1e-8, "relative gap {gap}");
}

#[test]
fn vanishing_state_weight_gives_small_gain() {
    let ss = nominal();
    let g = lqr_gain(&ss, &(Matrix::identity(5, 5) * 1e-6), &Matrix::identity(2, 2)).unwrap();
    assert!(g.k.abs().max() < 1e-2, "{}", g.k);
    assert!(g.closed_loop.is_hurwitz());
}

#[test]
fn brunovsky_gain_matches_published_values() {
    let g = chain_lqr_gain(3, &[300.0, 250.0, 200.0, 200.0, 250.0], [0.07, 0.07]).unwrap();
    let want = [65.4654, 104.0206, 55.3641, 0.0, 0.0, 0.0, 0.0, 0.0, 53.4522, 60.6493];
    assert_rel(&g.k, &want, 1e-4);
}

#[test]
fn placement_pole_sets() {
    let ss = nominal();
    let sets: Vec<Vec<C64>> = vec![
        real_poles(&[-0.8, -0.9, -0.7, -1.1, -1.0]),
        real_poles(&[-300.0, -0.9, -280.0, -5.0, -70.0]),
        vec![
            C64::new(-8.0, 0.05),
            C64::new(-8.0, -0.05),
            C64::new(-200.0, 0.0),
            C64::new(-250.0, 0.0),
            C64::new(-0.1, 0.0),
        ],
        real_poles(&[-0.7, -0.8, -0.5, -0.9, -0.8]),
    ];
    for p in sets {
        let g = place_poles(&ss.a, &ss.b, &p).unwrap();
        let spec = eigenvalues(&(&ss.a - &ss.b * &g.k)).unwrap();
        assert!(spec.distance(&p) <= 1e-6, "{p:?} -> {spec:?}");
    }
}

#[test]
fn identity_placement() {
    let ss = nominal();
    let open = eigenvalues(&ss.a).unwrap();
    let g = place_poles(&ss.a, &ss.b, &open.0).unwrap();
    assert!(g.closed_loop.distance(&open.0) <= 1e-6);
}

#[test]
fn voltage_alone_makes_the_plant_observable() {
    let ss = nominal().select_outputs(&[0]);
    let want = real_poles(&[-2.0, -3.0, -4.0, -5.0, -6.0]);
    let obs = observer_gain(&ss, &ObserverPoles::Explicit(want.clone()), 3).unwrap();
    assert!(obs.estimator.distance(&want) <= 1e-6);
    let dual = place_poles(&ss.a.transpose(), &ss.c.transpose(), &want).unwrap();
    let dual_seeded = smib::design::place_poles_seeded(&ss.a.transpose(), &ss.c.transpose(), &want, 3).unwrap();
    assert_eq!(obs.l, dual_seeded.k.transpose());
    assert_eq!(dual.k.shape(), (1, 5));
}

#[test]
fn scaled_observer_and_separation() {
    let ss = nominal();
    let ctrl = place_poles(&ss.a, &ss.b, &real_poles(&[-0.7, -0.8, -0.5, -0.9, -0.8])).unwrap();
    let poles = ObserverPoles::Scaled { controller: ctrl.closed_loop.clone(), rho: 12.0 };
    let obs = observer_gain(&ss, &poles, 7).unwrap();
    let want: Vec<C64> = ctrl.closed_loop.iter().map(|p| p * 12.0).collect();
    assert!(obs.estimator.distance(&want) <= 1e-6);
    let sep = eigenvalues(&separation_matrix(&ss.a, &ss.b, &ss.c, &ctrl.k, &obs.l)).unwrap();
    let mut union = ctrl.closed_loop.0.clone();
    union.extend(obs.estimator.iter());
    assert!(sep.distance(&union) <= 1e-6, "{sep:?}");
}

#[test]
fn recovery_gain_approaches_input_matrix() {
    let ss = nominal();
    let mut last = f64::INFINITY;
    for q in [10.0, 30.0, 100.0, 300.0] {
        let h = kalman_ltr_gain(&ss, &LtrSchedule::identity(5, 2, 2, q)).unwrap();
        assert!(h.estimator.is_hurwitz());
        let gap = (&h.l / q - &ss.b).norm();
        assert!(gap < last, "q = {q}: {gap} !< {last}");
        last = gap;
    }
}

#[test]
fn zero_recovery_is_the_nominal_kalman_gain() {
    let ss = nominal();
    let h = kalman_ltr_gain(&ss, &LtrSchedule::identity(5, 2, 2, 0.0)).unwrap();
    let sol = smib::numlin::solve_care(&ss.a.transpose(), &ss.c.transpose(), &Matrix::identity(5, 5), &Matrix::identity(2, 2))
        .unwrap();
    assert!((&h.l - sol.p * ss.c.transpose()).abs().max() < 1e-12);
}

#[test]
fn truth_style_schedule_is_stable() {
    let ss = nominal();
    let sched = LtrSchedule {
        v10: Matrix::identity(5, 5),
        v20: Matrix::identity(2, 2) * 0.65,
        v: Matrix::identity(2, 2),
        q: 5.25,
    };
    assert!(kalman_ltr_gain(&ss, &sched).unwrap().estimator.is_hurwitz());
}
