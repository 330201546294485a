//! Exit criteria. Each test prints one `PASS` or `FAIL` line.
//!
//! Run with `cargo test -p wallwalk-cli --test acceptance -- --nocapture`
//! to see the lines.

use std::cell::Cell;
use std::fs;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use wallwalk::continuum::{check_clifford, convergence_study, ConvergenceSetup};
use wallwalk::{
    dense_step_matrix, evolve, make_gaussian_packet, probability_density, rotation_set, slab_mass, step, AngleMode,
    Axis, Coin2x2, DomainWallParams, EvolveOptions, Flavor, LatticeGeometry, ObservableSeries, SpinorField, StepPlan,
};
use wallwalk_cli::{preset, run, run_preset, Overrides, RunConfig, FIG2_MASS};

/// Half-width of the slab around the wall plane, physical units (2 sites at ε = 0.1).
const SLAB_HALF_WIDTH: f64 = 0.2;
/// Relative spread allowed for a plateau or a saturated width.
const PLATEAU: f64 = 0.10;

fn verdict(name: &str, ok: bool, detail: String) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.1} s", t.as_secs_f64()))
}

/// `(max − min) / max` over a slice.
fn relative_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    (max - min) / max
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn last_fraction(v: &[f64], num: usize, den: usize) -> &[f64] {
    &v[v.len() * (den - num) / den..]
}

#[test]
fn unitarity_suite() {
    let start = Instant::now();
    let geometry = prop_oneof![
        (2usize..9, 2usize..9).prop_map(|(a, b)| (Flavor::TwoD, vec![a, b])),
        (2usize..5, 2usize..5, 2usize..5).prop_map(|(a, b, c)| (Flavor::ThreeD, vec![a, b, c])),
    ];
    let draws = (
        geometry,
        0.01f64..0.5,
        0.0f64..12.0,
        1.0f64..100.0,
        -80.0f64..80.0,
        any::<bool>(),
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4..16),
    );
    let worst = Cell::new((0.0f64, 0.0f64));
    let config = Config {
        failure_persistence: None,
        ..Config::with_cases(20)
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let outcome = runner.run(&draws, |((flavor, sizes), eps, mass, lambda, coupling, index, values)| {
        let g = LatticeGeometry::new(&sizes, eps).unwrap();
        let params = DomainWallParams::new(mass, lambda, coupling, eps).unwrap();
        let mode = if index { AngleMode::Index } else { AngleMode::Physical };
        let plan = StepPlan::new(flavor, &g, &params, mode).unwrap();
        let u = dense_step_matrix(&plan, &g).unwrap();
        let defect = u.unitarity_defect();

        let len = g.sites() * flavor.spin_dim();
        let amps = (0..len).map(|i| {
            let (re, im) = values[i % values.len()];
            Complex64::new(re + 1e-3 * i as f64, im)
        });
        let f = SpinorField::from_amplitudes(g, flavor.spin_dim(), amps.collect()).unwrap();
        let streamed = step(&f, &plan).unwrap();
        let dense = u.apply(&f).unwrap();
        let diff = streamed
            .amplitudes()
            .iter()
            .zip(dense.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let (d0, d1) = worst.get();
        worst.set((d0.max(defect), d1.max(diff)));
        prop_assert!(defect < 1e-12, "unitarity defect {defect:e}");
        prop_assert!(diff < 1e-12, "step differs from dense by {diff:e}");
        Ok(())
    });
    let (fast, took) = within(Duration::from_secs(60), start);
    verdict(
        "unitarity suite",
        outcome.is_ok() && fast,
        format!(
            "20 draws, max ‖U†U − I‖ {:.1e}, max |step − dense| {:.1e}, {took} {}",
            worst.get().0,
            worst.get().1,
            outcome.err().map(|e| e.to_string()).unwrap_or_default()
        ),
    );
}

#[test]
fn zeroth_order_condition() {
    let r = rotation_set();
    let defect = r.zeroth_order_product().max_abs_diff(&Coin2x2::identity());
    let exact = r.ry == r.rx * r.rz;
    verdict(
        "zeroth-order condition",
        defect <= 1e-15 && exact,
        format!("max |R_z R_x R_y − I| = {defect:.1e}, R_y == R_x R_z bitwise: {exact}"),
    );
}

#[test]
fn clifford_suite() {
    let start = Instant::now();
    let config = preset("fig4").unwrap();
    let g = config.geometry().unwrap();
    let plan = StepPlan::new(Flavor::ThreeD, &g, &config.params(), config.angle_mode).unwrap();
    let report = check_clifford(&plan).unwrap();
    let worst = report.relations.iter().map(|r| r.residual).fold(0.0, f64::max);
    let (fast, took) = within(Duration::from_secs(60), start);
    verdict(
        "Clifford suite",
        report.passed && report.b0_from_coupling_exact && fast,
        format!(
            "{} relations on {:?}, worst residual {worst:.1e}, B_0 exact: {}, {took} {:?}",
            report.relations.len(),
            report.lattice,
            report.b0_from_coupling_exact,
            report.failures
        ),
    );
}

#[test]
fn continuum_convergence() {
    let start = Instant::now();
    let table = convergence_study(&ConvergenceSetup::standard()).unwrap();
    let in_band = table.ratios.iter().all(|r| (1.5..=4.0).contains(r));
    let errors: Vec<String> = table.rows.iter().map(|r| format!("{:.3e}", r.error)).collect();
    let ratios: Vec<String> = table.ratios.iter().map(|r| format!("{r:.3}")).collect();
    let (fast, took) = within(Duration::from_secs(300), start);
    verdict(
        "continuum convergence",
        table.monotone && in_band && fast,
        format!("errors [{}], ratios [{}], {took}", errors.join(", "), ratios.join(", ")),
    );
}

fn fig2_series(mass: f64) -> ObservableSeries {
    let dir = tempfile::tempdir().unwrap();
    let overrides = Overrides {
        mass: Some(mass),
        out_dir: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    run_preset("fig2", &overrides).unwrap().series
}

#[test]
fn localization_phenomenology() {
    let start = Instant::now();
    let free = fig2_series(0.0);
    let bound = fig2_series(FIG2_MASS);
    assert!(free.boundary_warnings.is_empty() && bound.boundary_warnings.is_empty());

    let free_y = free.sigma_over_t(Axis::Y);
    let plateau = relative_spread(last_fraction(&free_y, 1, 4));
    let bound_y = bound.sigma_over_t(Axis::Y);
    let bound_x = bound.sigma_over_t(Axis::X);
    let decays = strictly_decreasing(last_fraction(&bound_y, 1, 2));
    let x_spread = relative_spread(last_fraction(&bound_x, 1, 2));
    let (fast, took) = within(Duration::from_secs(300), start);
    verdict(
        "localization phenomenology",
        plateau < PLATEAU && decays && x_spread < PLATEAU && fast,
        format!(
            "m=0 σ_y/t spread {plateau:.3}; m={FIG2_MASS} σ_y/t {:.3} -> {:.3} decreasing: {decays}, σ_x/t spread {x_spread:.3}; {took}",
            last_fraction(&bound_y, 1, 2)[0],
            bound_y[bound_y.len() - 1],
        ),
    );
}

fn fig4_run(mass: f64) -> (Vec<f64>, LatticeGeometry, ObservableSeries) {
    let mut config = preset("fig4").unwrap();
    config.mass = mass;
    let g = config.geometry().unwrap();
    let plan = StepPlan::new(config.flavor, &g, &config.params(), config.angle_mode).unwrap();
    let initial = make_gaussian_packet(&g, &config.packet().unwrap()).unwrap();
    let (field, series) = evolve(initial, &plan, config.steps, &EvolveOptions::default(), &mut []).unwrap();
    (probability_density(&field), g, series)
}

#[test]
fn three_d_confinement() {
    let start = Instant::now();
    let (wall, g, series) = fig4_run(11.0);
    let (control, _, _) = fig4_run(0.0);
    assert!(series.boundary_warnings.is_empty());
    let slab = slab_mass(&wall, &g, Axis::Z, 0.0, SLAB_HALF_WIDTH).unwrap();
    let slab_control = slab_mass(&control, &g, Axis::Z, 0.0, SLAB_HALF_WIDTH).unwrap();
    let ratio = slab / slab_control;

    let sz = series.sigma(Axis::Z);
    let late_z = last_fraction(&sz, 1, 2);
    let z_growth = late_z[late_z.len() - 1] / late_z[0] - 1.0;
    let saturates = z_growth <= PLATEAU;
    let x_grows = strictly_increasing(last_fraction(&series.sigma(Axis::X), 1, 2));
    let y_grows = strictly_increasing(last_fraction(&series.sigma(Axis::Y), 1, 2));
    let (fast, took) = within(Duration::from_secs(600), start);
    verdict(
        "3D confinement",
        ratio >= 2.0 && saturates && x_grows && y_grows && fast,
        format!(
            "slab mass {slab:.3} vs control {slab_control:.3} (×{ratio:.2}); σ_z grows {:.0}% over the last half (limit {:.0}%); σ_x, σ_y growing: {x_grows}, {y_grows}; {took}",
            100.0 * z_growth,
            100.0 * PLATEAU
        ),
    );
}

#[test]
fn block_decoupling() {
    let g = LatticeGeometry::new(&[32, 32, 32], 0.1).unwrap();
    let plan = StepPlan::uniform(Flavor::ThreeD, &g, 0.0).unwrap();
    let packet = wallwalk::GaussianPacketSpec {
        center: vec![0.0, 0.0, 0.0],
        width: 0.2,
        polarization: vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
    };
    let mut field = make_gaussian_packet(&g, &packet).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        field = step(&field, &plan).unwrap();
        worst = worst.max(field.component_norm(&[2, 3]));
    }
    verdict(
        "block decoupling",
        worst < 1e-14,
        format!("max ψ² norm over 50 steps {worst:.1e}"),
    );
}

fn snapshot_bytes(config: &RunConfig) -> Vec<(String, Vec<u8>)> {
    let summary = run(config).unwrap();
    let mut files = vec!["series.csv".to_string()];
    files.extend(summary.snapshots);
    files
        .into_iter()
        .map(|f| {
            let bytes = fs::read(config.out_dir.join(&f)).unwrap();
            (f, bytes)
        })
        .collect()
}

#[test]
fn determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut compared = 0;
    for name in ["fig1", "fig3"] {
        let mut a = preset(name).unwrap();
        a.snapshot_every = 5;
        a.out_dir = dir.path().join(format!("{name}-a"));
        let mut b = a.clone();
        b.out_dir = dir.path().join(format!("{name}-b"));
        let (fa, fb) = (snapshot_bytes(&a), snapshot_bytes(&b));
        identical &= fa == fb;
        compared += fa.len();
    }
    verdict(
        "determinism",
        identical,
        format!("{compared} files compared across fig1 and fig3 runs"),
    );
}
