//! Initial states for the particle and the slit wall.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Representation, WaveFunction, HBAR};

/// Samples required across a state's narrowest feature.
pub const MIN_FEATURE_SAMPLES: f64 = 16.0;

/// Default ε for "support contained within" checks.
pub const DEFAULT_SUPPORT_EPSILON: f64 = 1e-6;

/// Description of a library state. Serialized as a JSON object tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// `exp(-(x-c)²/4σ² + i·chirp·(x-c)²/2ħ)`, built in position space.
    GaussianPosition {
        #[serde(default)]
        center: f64,
        sigma: f64,
        #[serde(default)]
        chirp: f64,
    },
    /// Gaussian momentum profile with momentum std-dev `sigma`, centered at
    /// `center` and displaced to mean position `position`.
    GaussianMomentum {
        #[serde(default)]
        center: f64,
        sigma: f64,
        #[serde(default)]
        position: f64,
    },
    /// Flat momentum profile of full width `width`, hard edges.
    TopHatMomentum {
        #[serde(default)]
        center: f64,
        width: f64,
    },
    /// `a·sin(2πP/2k)` on `[0, 2k]`, `b·sin(4πP/2k)` on `[-2k, 0]`, zero elsewhere.
    SineCounterexample { a: f64, b: f64, k: f64 },
    /// Gaussian envelope with carrier momentum `p0`.
    PlaneWavePacket {
        #[serde(default)]
        center: f64,
        sigma: f64,
        p0: f64,
    },
}

impl StateSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            StateSpec::GaussianPosition { .. } => "gaussian_position",
            StateSpec::GaussianMomentum { .. } => "gaussian_momentum",
            StateSpec::TopHatMomentum { .. } => "top_hat_momentum",
            StateSpec::SineCounterexample { .. } => "sine_counterexample",
            StateSpec::PlaneWavePacket { .. } => "plane_wave_packet",
        }
    }

    /// Representation in which the state is constructed.
    pub fn natural_representation(&self) -> Representation {
        match self {
            StateSpec::GaussianPosition { .. } | StateSpec::PlaneWavePacket { .. } => {
                Representation::Position
            }
            _ => Representation::Momentum,
        }
    }

    /// Parameter-level problems, as `(field, message)` pairs. Grid-dependent
    /// checks happen in [`build_state`].
    pub fn validate(&self) -> Vec<(&'static str, String)> {
        let mut problems = Vec::new();
        let mut positive = |field: &'static str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                problems.push((field, format!("must be finite and > 0, got {v}")));
            }
        };
        match *self {
            StateSpec::GaussianPosition { sigma, .. }
            | StateSpec::GaussianMomentum { sigma, .. }
            | StateSpec::PlaneWavePacket { sigma, .. } => positive("sigma", sigma),
            StateSpec::TopHatMomentum { width, .. } => positive("width", width),
            StateSpec::SineCounterexample { a, b, k } => {
                positive("k", k);
                if a == 0.0 && b == 0.0 {
                    problems.push(("a", "a and b must not both be zero".to_string()));
                }
            }
        }
        let finite: &[(&'static str, f64)] = match self {
            StateSpec::GaussianPosition { center, chirp, .. } => {
                &[("center", *center), ("chirp", *chirp)]
            }
            StateSpec::GaussianMomentum {
                center, position, ..
            } => &[("center", *center), ("position", *position)],
            StateSpec::TopHatMomentum { center, .. } => &[("center", *center)],
            StateSpec::SineCounterexample { a, b, .. } => &[("a", *a), ("b", *b)],
            StateSpec::PlaneWavePacket { center, p0, .. } => &[("center", *center), ("p0", *p0)],
        };
        for (field, v) in finite {
            if !v.is_finite() {
                problems.push((field, format!("must be finite, got {v}")));
            }
        }
        problems
    }
}

fn ensure_resolved(what: &str, feature: f64, step: f64) -> Result<()> {
    if feature < MIN_FEATURE_SAMPLES * step {
        return Err(Error::GridTooCoarse(format!(
            "{what} {feature} spans fewer than {MIN_FEATURE_SAMPLES} samples of spacing {step}"
        )));
    }
    Ok(())
}

/// Builds a normalized state on `grid` in its natural representation.
pub fn build_state(spec: &StateSpec, grid: GridSpec) -> Result<WaveFunction> {
    if let Some((field, msg)) = spec.validate().into_iter().next() {
        return Err(Error::contract(format!("{} {field} {msg}", spec.kind_name())));
    }
    let dx = grid.spacing();
    let dp = grid.momentum_spacing();
    let smooth = |psi: WaveFunction| -> Result<WaveFunction> {
        psi.check_edges()?;
        match psi.representation() {
            Representation::Position => psi.to_momentum()?.check_edges()?,
            Representation::Momentum => psi.to_position()?.check_edges()?,
        }
        Ok(psi)
    };
    match *spec {
        StateSpec::GaussianPosition {
            center,
            sigma,
            chirp,
        } => {
            // ±2σ core must hold 16 samples
            ensure_resolved("gaussian 4σ width", 4.0 * sigma, dx)?;
            let psi = WaveFunction::from_fn(grid, Representation::Position, |x| {
                let u = x - center;
                Complex64::from_polar(
                    (-u * u / (4.0 * sigma * sigma)).exp(),
                    chirp * u * u / (2.0 * HBAR),
                )
            })?;
            smooth(psi)
        }
        StateSpec::PlaneWavePacket { center, sigma, p0 } => {
            ensure_resolved("wavepacket 4σ width", 4.0 * sigma, dx)?;
            if p0 != 0.0 {
                ensure_resolved("carrier wavelength", 2.0 * PI * HBAR / p0.abs(), dx / 4.0)?;
            }
            let psi = WaveFunction::from_fn(grid, Representation::Position, |x| {
                let u = x - center;
                Complex64::from_polar((-u * u / (4.0 * sigma * sigma)).exp(), p0 * x / HBAR)
            })?;
            smooth(psi)
        }
        StateSpec::GaussianMomentum {
            center,
            sigma,
            position,
        } => {
            ensure_resolved("momentum gaussian 4σ width", 4.0 * sigma, dp)?;
            let psi = WaveFunction::from_fn(grid, Representation::Momentum, |p| {
                let u = p - center;
                Complex64::from_polar(
                    (-u * u / (4.0 * sigma * sigma)).exp(),
                    -p * position / HBAR,
                )
            })?;
            smooth(psi)
        }
        StateSpec::TopHatMomentum { center, width } => {
            ensure_resolved("top-hat width", width, dp)?;
            let psi = WaveFunction::from_fn(grid, Representation::Momentum, |p| {
                if (p - center).abs() <= width / 2.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })?;
            psi.check_edges()?;
            Ok(psi)
        }
        StateSpec::SineCounterexample { a, b, k } => {
            let (_, k) = grid.snap_momentum(k);
            let narrowest = if b != 0.0 { k / 2.0 } else { k };
            ensure_resolved("sine half-period", narrowest, dp)?;
            let psi = WaveFunction::from_fn(grid, Representation::Momentum, |p| {
                let v = if (0.0..=2.0 * k).contains(&p) {
                    a * (2.0 * PI * p / (2.0 * k)).sin()
                } else if (-2.0 * k..0.0).contains(&p) {
                    b * (4.0 * PI * p / (2.0 * k)).sin()
                } else {
                    0.0
                };
                Complex64::new(v, 0.0)
            })?;
            psi.check_edges()?;
            Ok(psi)
        }
    }
}

/// Length of the smallest window of samples in `repr` holding at least
/// `1 - epsilon` of the probability. Each sample counts as one cell of width
/// equal to the grid spacing.
pub fn support_width(psi: &WaveFunction, epsilon: f64, repr: Representation) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(Error::contract(format!(
            "support epsilon must lie in (0, 0.1], got {epsilon}"
        )));
    }
    let psi = psi.in_representation(repr)?;
    let density = psi.density();
    let total: f64 = density.iter().sum();
    if !(total > 0.0) {
        return Err(Error::contract("support of a zero state is undefined"));
    }
    let mut prefix = Vec::with_capacity(density.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for d in &density {
        acc += d / total;
        prefix.push(acc);
    }
    let target = prefix[density.len()] - epsilon;
    let mut best = density.len();
    let mut hi = 0;
    for lo in 0..density.len() {
        if hi < lo {
            hi = lo;
        }
        while hi < density.len() && prefix[hi + 1] - prefix[lo] < target {
            hi += 1;
        }
        if hi == density.len() {
            break;
        }
        best = best.min(hi - lo + 1);
    }
    Ok(best as f64 * psi.measure())
}

/// ε-support width of the momentum distribution.
pub fn momentum_support_width(psi: &WaveFunction, epsilon: f64) -> Result<f64> {
    support_width(psi, epsilon, Representation::Momentum)
}

/// Closed interval `[min, max]` of coordinates whose amplitude exceeds
/// `threshold`, widened by half a cell on each side. `None` for a zero state.
pub fn support_hull(psi: &WaveFunction, threshold: f64) -> Option<(f64, f64)> {
    let coords = psi.coordinates();
    let half = psi.measure() / 2.0;
    let mut iter = psi
        .amplitudes()
        .iter()
        .zip(&coords)
        .filter(|(a, _)| a.norm() > threshold)
        .map(|(_, &x)| x);
    let first = iter.next()?;
    let last = iter.next_back().unwrap_or(first);
    Some((first - half, last + half))
}
