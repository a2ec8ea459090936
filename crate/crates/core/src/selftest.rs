//! Fast end-to-end battery behind the `selftest` verb. Small grids keep it
//! to a few seconds; the integration tests cover the full-size cases.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::grid::{GridSpec, Representation};
use crate::observables::{conditional_momentum, kennard_audit, screen_distribution, visibility, AuditStatus};
use crate::oracle::{self, DenseComposite};
use crate::recoil::{half_visibility_ratio, recoil_table, standard_scenarios};
use crate::runner::entangle;
use crate::slits::{Pipeline, SlitModel};
use crate::states::{build_state, StateSpec};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn fft_vs_dense() -> Result<(bool, String)> {
    let grid = GridSpec::new(2.0 * PI * 2.0, 128)?;
    let psi = build_state(&StateSpec::GaussianPosition { center: 0.4, sigma: 0.6, chirp: 0.3 }, grid)?;
    let fast = psi.to_momentum()?;
    let slow = oracle::dft_matrix(&grid) * DVector::from_column_slice(psi.amplitudes());
    let err = fast
        .amplitudes()
        .iter()
        .zip(slow.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok((err < 1e-12, format!("max |fft - dense| = {err:.2e}")))
}

fn gaussian_visibility() -> Result<(bool, String)> {
    let grid = GridSpec::new(2.0 * PI * 16.0, 4096)?;
    let mut worst: f64 = 0.0;
    for sigma in [0.25, 0.5, 1.0] {
        let xi = build_state(&StateSpec::GaussianPosition { center: 0.0, sigma, chirp: 0.0 }, grid)?;
        let v = visibility(&xi, 1.0)?.visibility;
        worst = worst.max((v - (-2.0 * sigma * sigma).exp()).abs());
    }
    Ok((worst < 1e-4, format!("max |V - exp(-2k²σ²)| = {worst:.2e}")))
}

fn sine_counterexample() -> Result<(bool, String)> {
    let grid = GridSpec::new(2.0 * PI * 64.0, 8192)?;
    let xi = build_state(&StateSpec::SineCounterexample { a: 1.0, b: 0.7, k: 1.0 }, grid)?;
    let v = visibility(&xi, 1.0)?.visibility;
    Ok((v < 1e-10, format!("V = {v:.2e}")))
}

fn kennard() -> Result<(bool, String)> {
    let grid = GridSpec::new(2.0 * PI * 16.0, 4096)?;
    let g = build_state(&StateSpec::GaussianPosition { center: 0.0, sigma: 0.7, chirp: 0.0 }, grid)?;
    let audit = kennard_audit(&g)?;
    let chirped = build_state(&StateSpec::GaussianPosition { center: 0.0, sigma: 0.7, chirp: 0.5 }, grid)?;
    let c = kennard_audit(&chirped)?;
    let ok = audit.status == AuditStatus::Satisfied
        && (audit.product - 0.5).abs() < 1e-6
        && c.status == AuditStatus::Satisfied;
    Ok((ok, format!("gaussian product {:.9}, chirped {:.6}", audit.product, c.product)))
}

fn composite_oracle() -> Result<(bool, String)> {
    let grid = GridSpec::new(2.0 * PI * 4.0, 128)?;
    let particle = build_state(&StateSpec::GaussianPosition { center: 0.0, sigma: 1.2, chirp: 0.0 }, grid)?;
    let wall = build_state(&StateSpec::GaussianPosition { center: 0.0, sigma: 1.0, chirp: 0.0 }, grid)?;
    let pipeline = Pipeline {
        mass_particle: 1.0,
        tau: 0.5,
        tau_prime: 1.0,
        k: 0.5,
        slits: SlitModel::Partition { x_divide: 0.0 },
    };
    let pair = pipeline.run(&particle, &wall)?;
    let dense = DenseComposite::product(grid, particle.amplitudes(), wall.amplitudes())?.run(&pipeline)?;
    let mut err = max_abs_diff(&screen_distribution(&pair)?, &dense.screen_marginal());
    for q in [-1.0, 0.0, 1.5] {
        let row = grid.nearest_index(Representation::Position, q).expect("on grid");
        err = err.max(max_abs_diff(&conditional_momentum(&pair, q)?, &dense.conditional_wall_momentum(row)));
    }
    Ok((err < 1e-8, format!("max deviation {err:.2e}")))
}

fn entanglement() -> Result<(bool, String)> {
    let r = entangle(4, 200, 11)?;
    Ok((
        r.passed,
        format!(
            "distribution {:.1e}, post-state {:.1e}, robertson slack {:.1e}",
            r.distribution_error, r.post_state_error, r.robertson_min_slack
        ),
    ))
}

fn recoil_numbers() -> Result<(bool, String)> {
    let rows = recoil_table(&standard_scenarios());
    let ok = (rows[0].velocity / 7.9e-3 - 1.0).abs() < 0.02 && (rows[1].velocity / 6.9e-6 - 1.0).abs() < 0.02;
    Ok((ok, format!("v = {:.4e}, {:.4e} m/s", rows[0].velocity, rows[1].velocity)))
}

fn half_visibility() -> Result<(bool, String)> {
    let grid = GridSpec::new(2.0 * PI * 16.0, 4096)?;
    let ratio = half_visibility_ratio(grid, 1.0)?;
    let expected = (std::f64::consts::LN_2 / 2.0).sqrt() / PI;
    Ok(((ratio - expected).abs() < 1e-6, format!("V = 1/2 at ΔQ = {ratio:.6} · λ/4")))
}

fn two_branch_orthogonal() -> Result<(bool, String)> {
    use crate::entangle::TwoBranchState;
    let e = |i: usize| DVector::from_fn(2, |r, _| Complex64::new(if r == i { 1.0 } else { 0.0 }, 0.0));
    let h = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    let s = TwoBranchState::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), h.clone(), e(0), e(0), e(1))?;
    Ok((s.visibility_factor() == 0.0, format!("|⟨ξ₁|ξ₂⟩| = {}", s.visibility_factor())))
}

/// Runs every check; the caller decides how to report failures.
pub fn run_all() -> Vec<Check> {
    vec![
        check("fft matches dense DFT", fft_vs_dense()),
        check("gaussian visibility law", gaussian_visibility()),
        check("sine counterexample", sine_counterexample()),
        check("kennard audit", kennard()),
        check("composite oracle", composite_oracle()),
        check("entanglement oracles", entanglement()),
        check("orthogonal meters", two_branch_orthogonal()),
        check("recoil velocities", recoil_numbers()),
        check("half-visibility width", half_visibility()),
    ]
}
