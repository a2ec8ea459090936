//! Free propagation, slit projection, momentum exchange and assembly of
//! the two-branch final state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::grid::{overlap, Representation, WaveFunction, HBAR};
use crate::states::build_state;

/// How the slit wall splits the particle wavefunction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SlitModel {
    /// `S₁ = 1[x ≥ x_divide]`, `S₂ = 1 - S₁`: an exact resolution of identity.
    Partition {
        #[serde(default)]
        x_divide: f64,
    },
    /// Disjoint windows of width `w` centred at `±d/2`; the passing part is
    /// renormalized jointly.
    Aperture { d: f64, w: f64 },
}

impl SlitModel {
    pub fn validate(&self) -> Vec<(&'static str, String)> {
        let mut problems = Vec::new();
        match *self {
            SlitModel::Partition { x_divide } => {
                if !x_divide.is_finite() {
                    problems.push(("x_divide", format!("must be finite, got {x_divide}")));
                }
            }
            SlitModel::Aperture { d, w } => {
                if !(d.is_finite() && d > 0.0) {
                    problems.push(("d", format!("must be finite and > 0, got {d}")));
                }
                if !(w.is_finite() && w > 0.0) {
                    problems.push(("w", format!("must be finite and > 0, got {w}")));
                }
                if w > d {
                    problems.push((
                        "w",
                        format!("aperture width {w} exceeds separation {d}: windows overlap"),
                    ));
                }
            }
        }
        problems
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KickDirection {
    Positive,
    Negative,
}

impl KickDirection {
    fn sign(self) -> i64 {
        match self {
            KickDirection::Positive => 1,
            KickDirection::Negative => -1,
        }
    }
}

/// Applies `exp(-i p² t / 2mħ)`.
///
/// States that are band-limited on entry must still decay at the position
/// edges afterwards; otherwise the periodic box has wrapped them and
/// [`Error::GridTooSmall`] is returned. Hard-edged states (the output of
/// slit projectors) are not band-limited and are propagated unchecked.
pub fn free_propagate(psi: &WaveFunction, mass: f64, t: f64) -> Result<WaveFunction> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::contract(format!("mass must be > 0, got {mass}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::contract(format!("time must be >= 0, got {t}")));
    }
    let band_limited = psi.is_band_limited()?;
    let phi = psi.in_representation(Representation::Momentum)?;
    let grid = *phi.grid();
    let evolved = phi.map_amplitudes(|m, a| {
        let p = grid.momentum(m);
        a * Complex64::from_polar(1.0, -p * p * t / (2.0 * mass * HBAR))
    });
    let position = evolved.to_position()?;
    if band_limited {
        position.check_edges()?;
    }
    match psi.representation() {
        Representation::Position => Ok(position),
        Representation::Momentum => Ok(evolved),
    }
}

/// Splits a position-space state into its slit-1 and slit-2 parts.
pub fn apply_slits(psi: &WaveFunction, model: &SlitModel) -> Result<(WaveFunction, WaveFunction)> {
    if psi.representation() != Representation::Position {
        return Err(Error::contract("slit projectors act on position-space states"));
    }
    if let Some((field, msg)) = model.validate().into_iter().next() {
        return Err(Error::contract(format!("slit model {field} {msg}")));
    }
    let grid = *psi.grid();
    let zero = Complex64::new(0.0, 0.0);
    match *model {
        SlitModel::Partition { x_divide } => {
            let s1 = psi.map_amplitudes(|j, a| if grid.position(j) >= x_divide { a } else { zero });
            let s2 = psi.map_amplitudes(|j, a| if grid.position(j) >= x_divide { zero } else { a });
            Ok((s1, s2))
        }
        SlitModel::Aperture { d, w } => {
            let inside = |x: f64, centre: f64| x >= centre - w / 2.0 && x < centre + w / 2.0;
            let s1 = psi.map_amplitudes(|j, a| if inside(grid.position(j), d / 2.0) { a } else { zero });
            let s2 = psi.map_amplitudes(|j, a| if inside(grid.position(j), -d / 2.0) { a } else { zero });
            let passed = s1.norm_sqr() + s2.norm_sqr();
            if !(passed > 1e-300) {
                return Err(Error::Numerical(
                    "no amplitude passes the apertures; cannot post-select".into(),
                ));
            }
            let scale = Complex64::new(1.0 / passed.sqrt(), 0.0);
            Ok((s1.scaled(scale), s2.scaled(scale)))
        }
    }
}

/// Multiplies by `exp(±ikx/ħ)`, shifting the momentum distribution by `±k`.
///
/// `k` is snapped to the momentum grid so the shift is an exact translation
/// by whole samples; the applied value is returned alongside the state.
pub fn momentum_kick(
    psi: &WaveFunction,
    k: f64,
    direction: KickDirection,
) -> Result<(WaveFunction, f64)> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::contract(format!("kick must be >= 0, got {k}")));
    }
    let grid = *psi.grid();
    let (steps, applied) = grid.snap_momentum(k);
    let shift = steps * direction.sign();
    let kicked = match psi.representation() {
        Representation::Position => {
            let p = shift as f64 * grid.momentum_spacing();
            psi.map_amplitudes(|j, a| a * Complex64::from_polar(1.0, p * grid.position(j) / HBAR))
        }
        Representation::Momentum => {
            let n = grid.n_points() as i64;
            let amps = psi.amplitudes();
            psi.map_amplitudes(|m, _| amps[(m as i64 - shift).rem_euclid(n) as usize])
        }
    };
    Ok((kicked, applied))
}

/// One term `|ψ_α⟩ ⊗ |ξ_α⟩` of the final state. The particle factor carries
/// the branch weight; the wall factor is normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub particle: WaveFunction,
    pub wall: WaveFunction,
}

impl Branch {
    pub fn weight(&self) -> f64 {
        self.particle.norm_sqr()
    }
}

/// Final state `|ψ₁⟩⊗e^{ikQ/ħ}|ξ⟩ + |ψ₂⟩⊗e^{-ikQ/ħ}|ξ⟩`, kept factored.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPair {
    pub branch1: Branch,
    pub branch2: Branch,
    /// Wall state before the kick.
    pub initial_wall: WaveFunction,
    /// Kick magnitude actually applied after snapping.
    pub applied_k: f64,
}

impl BranchPair {
    /// `‖branch1‖² + ‖branch2‖² + 2 Re⟨branch1|branch2⟩`.
    pub fn joint_norm_sqr(&self) -> Result<f64> {
        let cross = overlap(&self.branch1.particle, &self.branch2.particle)?
            * overlap(&self.branch1.wall, &self.branch2.wall)?;
        Ok(self.branch1.weight() + self.branch2.weight() + 2.0 * cross.re)
    }

    /// Largest particle amplitude left at the screen-grid edges.
    pub fn edge_leak(&self) -> f64 {
        self.branch1
            .particle
            .edge_amplitude()
            .max(self.branch2.particle.edge_amplitude())
    }
}

/// Timing, mass, kick and slit geometry of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pipeline {
    pub mass_particle: f64,
    pub tau: f64,
    pub tau_prime: f64,
    pub k: f64,
    pub slits: SlitModel,
}

impl Pipeline {
    /// Runs `Û(τ')e^{∓ikq/ħ}Ŝ_αÛ(τ)|ψ⟩` for the particle and pairs each
    /// branch with the oppositely kicked wall `e^{±ikQ/ħ}|ξ⟩`.
    pub fn run(&self, particle: &WaveFunction, wall: &WaveFunction) -> Result<BranchPair> {
        if particle.grid() != wall.grid() {
            return Err(Error::contract("particle and wall must share one grid"));
        }
        let psi = particle.in_representation(Representation::Position)?;
        let at_slits = free_propagate(&psi, self.mass_particle, self.tau)?;
        let (s1, s2) = apply_slits(&at_slits, &self.slits)?;
        let (p1, applied) = momentum_kick(&s1, self.k, KickDirection::Negative)?;
        let (p2, _) = momentum_kick(&s2, self.k, KickDirection::Positive)?;
        let psi1 = free_propagate(&p1, self.mass_particle, self.tau_prime)?;
        let psi2 = free_propagate(&p2, self.mass_particle, self.tau_prime)?;
        let (wall_plus, _) = momentum_kick(wall, self.k, KickDirection::Positive)?;
        let (wall_minus, _) = momentum_kick(wall, self.k, KickDirection::Negative)?;
        Ok(BranchPair {
            branch1: Branch {
                particle: psi1,
                wall: wall_plus,
            },
            branch2: Branch {
                particle: psi2,
                wall: wall_minus,
            },
            initial_wall: wall.clone(),
            applied_k: applied,
        })
    }
}

/// Builds the scenario's states and runs its pipeline.
pub fn run_pipeline(scenario: &Scenario) -> Result<BranchPair> {
    let particle = build_state(&scenario.particle, scenario.grid)?;
    let wall = build_state(&scenario.wall, scenario.grid)?;
    scenario.pipeline().run(&particle, &wall)
}
