//! Scenario runs through the library front end: configuration handling,
//! simulation contracts and the acceptance report's sensitivity to a
//! tampered coefficient.

use smib::cli::{find, simulate, verify, RunOptions, Workbench, COEFFICIENT_SECTION};
use smib::config::Config;

fn default_bench() -> Workbench {
    Workbench::new(Config::default()).unwrap()
}

#[test]
fn non_positive_field_resistance_is_a_validation_error() {
    for v in ["0", "-0.001"] {
        let err = Config::parse(&format!("[machine]\nr_F = {v}\n")).unwrap_err();
        assert!(err.to_string().contains("r_F"), "{err}");
    }
}

#[test]
fn unknown_coefficient_override_is_rejected() {
    let cfg = Config::parse(&format!("[{COEFFICIENT_SECTION}]\nf99 = 1\n")).unwrap();
    let Err(err) = Workbench::new(cfg) else { panic!("unknown symbol accepted") };
    assert!(err.to_string().contains("f99"), "{err}");
}

#[test]
fn tampered_flux_coefficient_fails_the_table_check() {
    let cfg = Config::parse(&format!("[{COEFFICIENT_SECTION}]\nf11 = -0.6\n")).unwrap();
    let wb = Workbench::new(cfg).unwrap();
    assert_eq!(wb.reduced.flux[0], -0.6);
    let report = verify(&wb);
    let table = report.checks.iter().find(|c| c.criterion == 2).expect("table check");
    assert!(!table.passed, "{table}");
    assert!(table.detail.contains("f11"), "{table}");
}

#[test]
fn runs_are_bit_identical() {
    let wb = default_bench();
    let sc = find("sec7.3.3-observer-lqr-reduced").unwrap();
    let opts = RunOptions::default();
    let a = simulate(&wb, &sc, &opts).unwrap();
    let b = simulate(&wb, &sc, &opts).unwrap();
    assert_eq!(a.trajectory.to_csv(), b.trajectory.to_csv());
    assert_eq!(a.metrics.to_text(), b.metrics.to_text());
}

#[test]
fn sample_times_increase_and_samples_are_finite() {
    let wb = default_bench();
    let out = simulate(&wb, &find("sec7.1.2-lqr-reduced").unwrap(), &RunOptions::default()).unwrap();
    let tr = &out.trajectory;
    assert!(!tr.diverged());
    assert_eq!(tr.t[0], 0.0);
    assert!(tr.t.windows(2).all(|w| w[1] > w[0]));
    for name in tr.channels() {
        assert!(tr.channel(&name).unwrap().iter().all(|v| v.is_finite()), "{name}");
    }
}

#[test]
fn limits_bound_every_logged_field_voltage() {
    let wb = default_bench();
    // this loop saturates the exciter when limits are on
    let mut sc = find("sec6.6-pid-truth").unwrap();
    sc.actuator_limits = true;
    sc.horizon = 10.0;
    let out = simulate(&wb, &sc, &RunOptions::default()).unwrap();
    let efd = out.trajectory.channel("E_FD").unwrap();
    let (lo, hi) = (wb.params.efd_min, wb.params.efd_max);
    assert!(efd.iter().all(|v| *v >= lo && *v <= hi));
    assert!(efd.iter().any(|v| *v == lo || *v == hi), "expected saturation");
}

#[test]
fn observer_error_envelope_shrinks() {
    let wb = default_bench();
    let out = simulate(&wb, &find("sec7.3.1-observer-lqr-linear").unwrap(), &RunOptions::default()).unwrap();
    let tr = &out.trajectory;
    let states = ["E_q_prime", "omega", "delta", "T_m", "G_V"];
    let err: Vec<f64> = (0..tr.len())
        .map(|k| {
            states
                .iter()
                .map(|s| {
                    let x = tr.channel(&format!("d_{s}")).unwrap()[k];
                    let xh = tr.channel(&format!("hat_{s}")).unwrap()[k];
                    (x - xh).powi(2)
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let w = err.len() / 5;
    let peaks: Vec<f64> = (0..5).map(|i| err[i * w..(i + 1) * w].iter().copied().fold(0.0, f64::max)).collect();
    assert!(peaks[0] > 1e-3, "{peaks:?}");
    for p in peaks.windows(2) {
        assert!(p[1] <= p[0] || p[1] < 1e-9, "{peaks:?}");
    }
}

#[test]
fn nominal_ltr_run_settles_near_published_voltage() {
    let wb = default_bench();
    let out = simulate(&wb, &find("sec9-ltr-op3").unwrap(), &RunOptions::default()).unwrap();
    let vt = out.metrics.final_value("V_t").unwrap();
    assert!((vt - 1.403).abs() <= 5e-3, "{vt}");
}

#[test]
fn fixed_step_option_switches_the_integrator() {
    let wb = default_bench();
    let mut sc = find("sec7.1.1-lqr-linear").unwrap();
    sc.horizon = 5.0;
    let opts = RunOptions { fixed_step: Some(2e-3), ..Default::default() };
    let out = simulate(&wb, &sc, &opts).unwrap();
    assert_eq!(out.trajectory.meta.integrator, "rk4");
    let adaptive = simulate(&wb, &sc, &RunOptions::default()).unwrap();
    let a = out.trajectory.channel("d_delta").unwrap();
    let b = adaptive.trajectory.channel("d_delta").unwrap();
    let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn shipped_config_matches_the_built_in_defaults() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/default.ini");
    assert_eq!(Config::load(&path).unwrap(), Config::default());
}

#[test]
fn scenario_section_moves_the_initial_angle() {
    let cfg = Config::parse("[scenario.sec7.1.1-lqr-linear]\nangle_offset = 0.1\n").unwrap();
    let wb = Workbench::new(cfg).unwrap();
    let mut sc = find("sec7.1.1-lqr-linear").unwrap();
    sc.horizon = 1.0;
    let out = simulate(&wb, &sc, &RunOptions::default()).unwrap();
    assert_eq!(out.trajectory.channel("d_delta").unwrap()[0], 0.1);
}
