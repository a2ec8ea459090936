use std::path::Path;

use slitwall::sweep::{
    frontier_curve, incompatibility_frontier, is_monotone, CellStatus, SWEEP_SUPPORT_EPSILON,
};
use slitwall::{load_config, run_sweep, Scenario, SweepDescriptor, SweepResult};

fn scenario() -> Scenario {
    load_config(Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/paper_default.json")).unwrap()
}

fn default_sweep(s: &Scenario) -> SweepResult {
    run_sweep(s, s.sweep.as_ref().unwrap()).unwrap()
}

#[test]
fn visibility_follows_the_gaussian_law_and_decreases() {
    let s = scenario();
    let result = default_sweep(&s);
    for r in &result.rows {
        let closed = (-2.0 * s.k * s.k * r.sigma_q * r.sigma_q).exp();
        assert!((r.visibility - closed).abs() < 1e-4, "σ = {}: {} vs {closed}", r.param, r.visibility);
    }
    for w in result.rows.windows(2) {
        if w[1].visibility > 1e-12 {
            assert!(w[1].visibility < w[0].visibility, "not decreasing at σ = {}", w[1].param);
        }
    }
}

#[test]
fn accuracy_rises_with_position_spread() {
    let s = scenario();
    let result = default_sweep(&s);
    for w in result.rows.windows(2) {
        assert!(w[1].accuracy >= w[0].accuracy);
        assert!(w[1].accuracy_exact >= w[0].accuracy_exact - 1e-12);
        if w[0].accuracy < 1.0 {
            assert!(w[1].accuracy > w[0].accuracy, "flat below 1 at σ = {}", w[1].param);
        }
    }
}

#[test]
fn narrow_momentum_support_gives_reliable_paths() {
    let s = scenario();
    let result = default_sweep(&s);
    let mut checked = 0;
    for r in result.rows.iter().filter(|r| r.delta_p_support < 2.0 * s.k) {
        assert!(r.accuracy_exact >= 1.0 - SWEEP_SUPPORT_EPSILON, "σ = {}: {}", r.param, r.accuracy_exact);
        // binomial noise of the Monte Carlo estimate, four standard errors
        let se = (r.accuracy_exact * (1.0 - r.accuracy_exact) / s.samples as f64).sqrt();
        assert!((r.accuracy - r.accuracy_exact).abs() <= 4.0 * se + 1e-12);
        checked += 1;
    }
    assert!(checked >= 5);
}

#[test]
fn frontier_verdicts() {
    let s = scenario();
    let result = default_sweep(&s);
    assert!(!incompatibility_frontier(&result, 0.9, 0.99).compatible);
    assert!(incompatibility_frontier(&result, 0.0, 0.0).compatible);
    assert!(is_monotone(&frontier_curve(&result)));

    // rows far below the Kennard product would make the two goals compatible
    let mut synthetic = result.clone();
    for r in &mut synthetic.rows {
        r.visibility = 0.95;
        r.accuracy = 1.0;
        r.uncertainty_product = 1e-3;
    }
    let verdict = incompatibility_frontier(&synthetic, 0.9, 0.99);
    assert!(verdict.compatible);
    assert_eq!(verdict.witnesses.len(), synthetic.rows.len());
}

#[test]
fn uncertainty_product_stays_near_the_gaussian_value() {
    // σ_Q · ΔP(0.01) = σ_Q · 2·2.5758·σ_P = 2.5758ħ for every Gaussian
    let result = default_sweep(&scenario());
    for r in &result.rows {
        assert!((r.uncertainty_product - 2.5758).abs() < 0.05, "{}", r.uncertainty_product);
        assert_eq!(r.status, CellStatus::Ok);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let s = scenario();
    let run = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| default_sweep(&s))
    };
    assert_eq!(run(1).csv_body(), run(4).csv_body());
}

#[test]
fn failing_cells_are_recorded_and_the_sweep_continues() {
    let s = scenario();
    let d = SweepDescriptor {
        parameter: "wall.sigma".into(),
        start: 0.001,
        stop: 1.0,
        points: 4,
        spacing: slitwall::sweep::Spacing::Log,
    };
    let result = run_sweep(&s, &d).unwrap();
    // σ = 0.001 and 0.01 are both narrower than 16 samples of dx ≈ 0.0123
    assert!(matches!(result.rows[0].status, CellStatus::Failed(_)));
    assert!(matches!(result.rows[1].status, CellStatus::Failed(_)));
    assert!(result.rows[2..].iter().all(|r| r.status.is_usable()));
    let csv = result.csv_body();
    let first = csv.lines().nth(1).unwrap();
    assert_eq!(first.split(',').count(), 7, "{first}");
    assert!(first.contains("error: grid too coarse"));
}
