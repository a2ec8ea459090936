//! Photon-recoil estimates in SI units for an interferometer mirror made of
//! a single atom or a condensate.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, HBAR};
use crate::observables::visibility;
use crate::states::{build_state, StateSpec};

/// Planck constant, J·s (exact SI).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s. Derived from [`PLANCK`] so that
/// `πħ/k = λ/4` holds to rounding.
pub const HBAR_SI: f64 = PLANCK / (2.0 * std::f64::consts::PI);
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_07e-27;
/// Standard atomic weight of mercury.
pub const MERCURY_WEIGHT: f64 = 200.59;
/// Standard atomic weight of sodium.
pub const SODIUM_WEIGHT: f64 = 22.989_769_3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoilScenario {
    pub label: String,
    /// Meters.
    pub wavelength: f64,
    /// Kilograms.
    pub mass: f64,
}

impl RecoilScenario {
    pub fn new(label: impl Into<String>, wavelength: f64, mass: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::contract(format!("wavelength must be > 0, got {wavelength}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::contract(format!("mass must be > 0, got {mass}")));
        }
        Ok(RecoilScenario {
            label: label.into(),
            wavelength,
            mass,
        })
    }

    /// `count` atoms of the given atomic weight moving as one body.
    pub fn atoms(label: impl Into<String>, wavelength: f64, weight: f64, count: f64) -> Result<Self> {
        Self::new(label, wavelength, weight * count * ATOMIC_MASS_UNIT)
    }

    /// Photon momentum `h/λ`.
    pub fn photon_momentum(&self) -> f64 {
        PLANCK / self.wavelength
    }

    /// Momentum transferred by a reflected photon, `2h/λ`.
    pub fn kick(&self) -> f64 {
        2.0 * self.photon_momentum()
    }
}

/// `v = 2h/(Mλ)`.
pub fn recoil_velocity(s: &RecoilScenario) -> f64 {
    s.kick() / s.mass
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetSpread {
    /// `λ/4`
    pub quarter_wavelength: f64,
    /// `πħ/k` with `k = 2h/λ`
    pub from_kick: f64,
}

/// Largest target position spread that still leaves the photon path
/// unresolved.
pub fn max_target_spread(s: &RecoilScenario) -> TargetSpread {
    TargetSpread {
        quarter_wavelength: s.wavelength / 4.0,
        from_kick: std::f64::consts::PI * HBAR_SI / s.kick(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoilRow {
    pub target: String,
    pub wavelength: f64,
    pub mass: f64,
    pub velocity: f64,
    pub delta_q_max: f64,
}

/// Mercury atom and a 10⁴-atom sodium condensate at λ = 0.5 µm.
pub fn standard_scenarios() -> Vec<RecoilScenario> {
    let lambda = 0.5e-6;
    vec![
        RecoilScenario::atoms("mercury atom", lambda, MERCURY_WEIGHT, 1.0).expect("valid"),
        RecoilScenario::atoms("sodium BEC (1e4 atoms)", lambda, SODIUM_WEIGHT, 1.0e4).expect("valid"),
    ]
}

pub fn recoil_table(scenarios: &[RecoilScenario]) -> Vec<RecoilRow> {
    scenarios
        .iter()
        .map(|s| RecoilRow {
            target: s.label.clone(),
            wavelength: s.wavelength,
            mass: s.mass,
            velocity: recoil_velocity(s),
            delta_q_max: max_target_spread(s).quarter_wavelength,
        })
        .collect()
}

pub const RECOIL_CSV_HEADER: &str = "target,wavelength_m,mass_kg,velocity_m_per_s,delta_q_max_m";

pub fn render_csv(rows: &[RecoilRow]) -> String {
    let mut out = String::from(RECOIL_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.6e},{:.6e},{:.6e},{:.6e}",
            r.target, r.wavelength, r.mass, r.velocity, r.delta_q_max
        );
    }
    out
}

pub fn render_text(rows: &[RecoilRow]) -> String {
    let width = rows.iter().map(|r| r.target.len()).max().unwrap_or(0).max(6);
    let mut out = format!(
        "{:<width$}  {:>12}  {:>12}  {:>12}  {:>12}\n",
        "target", "lambda [m]", "mass [kg]", "v [m/s]", "dQ_max [m]"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12.4e}  {:>12.4e}  {:>12.4e}  {:>12.4e}",
            r.target, r.wavelength, r.mass, r.velocity, r.delta_q_max
        );
    }
    out
}

/// Gaussian wall width (natural units, ħ = 1) at which the grid visibility
/// falls to one half for kick `k`, found by bisection on the simulated
/// visibility rather than the closed form.
pub fn half_visibility_width(grid: GridSpec, k: f64) -> Result<f64> {
    let v = |sigma: f64| -> Result<f64> {
        let xi = build_state(&StateSpec::GaussianPosition { center: 0.0, sigma, chirp: 0.0 }, grid)?;
        Ok(visibility(&xi, k)?.visibility)
    };
    let (mut lo, mut hi) = (0.15 * HBAR / k, 2.0 * HBAR / k);
    if !(v(lo)? > 0.5 && v(hi)? < 0.5) {
        return Err(Error::Numerical("half-visibility width is not bracketed".into()));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if v(mid)? > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Half-visibility width divided by the `πħ/k` spread bound, both in
/// natural units. Scale-free, so it applies to every SI scenario.
pub fn half_visibility_ratio(grid: GridSpec, k: f64) -> Result<f64> {
    Ok(half_visibility_width(grid, k)? / (std::f64::consts::PI * HBAR / k))
}
