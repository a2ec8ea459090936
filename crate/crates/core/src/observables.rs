//! Screen distribution, fringe visibility, conditional wall momentum,
//! which-path classification and the Kennard audit.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{moments, overlap, Representation, WaveFunction, EDGE_TOLERANCE, HBAR};
use crate::slits::BranchPair;

/// Largest disagreement tolerated between the two integral forms of the
/// visibility.
pub const VISIBILITY_FORM_TOLERANCE: f64 = 1e-9;

/// Tolerance below the bound at which a Kennard product still passes.
pub const KENNARD_TOLERANCE: f64 = 1e-9;

/// Largest share of a variance allowed to come from the outer eighth of the
/// grid before moments are considered unresolved.
pub const UNRESOLVED_TAIL_SHARE: f64 = 0.01;

/// `Prob(q)` marginalized over the wall coordinate, normalized on the grid.
pub fn screen_distribution(pair: &BranchPair) -> Result<Vec<f64>> {
    let psi1 = &pair.branch1.particle;
    let psi2 = &pair.branch2.particle;
    if psi1.representation() != Representation::Position
        || psi2.representation() != Representation::Position
    {
        return Err(Error::contract(
            "screen distribution needs position-space particle factors",
        ));
    }
    let wall_overlap = overlap(&pair.branch1.wall, &pair.branch2.wall)?;
    let density: Vec<f64> = psi1
        .amplitudes()
        .iter()
        .zip(psi2.amplitudes())
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr() + 2.0 * (a.conj() * b * wall_overlap).re)
        .collect();
    normalize_density(density, psi1.measure())
}

fn normalize_density(density: Vec<f64>, measure: f64) -> Result<Vec<f64>> {
    let peak = density.iter().cloned().fold(0.0, f64::max);
    let total: f64 = density.iter().sum::<f64>() * measure;
    if !(total > 0.0) {
        return Err(Error::Numerical("distribution has zero total probability".into()));
    }
    let floor = density.iter().cloned().fold(f64::INFINITY, f64::min);
    if floor < -1e-10 * peak.max(1.0) {
        return Err(Error::InternalConsistency(format!(
            "negative probability density {floor:e}"
        )));
    }
    Ok(density.into_iter().map(|d| d / total).collect())
}

/// Fringe visibility `𝒱` and phase `α` from `𝒱e^{iα} = ⟨ξ|e^{-2ikQ/ħ}|ξ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisibilityReport {
    pub visibility: f64,
    pub phase_alpha: f64,
    /// `∫ ξ*(Q) e^{-2ikQ/ħ} ξ(Q) dQ`
    pub overlap_position: Complex64,
    /// `∫ ξ̃*(P-k) ξ̃(P+k) dP`
    pub overlap_momentum: Complex64,
    pub applied_k: f64,
}

impl VisibilityReport {
    /// Optimal two-state discrimination score `√(1-𝒱²)` between the two
    /// kicked wall states. Reported as an extension figure of merit.
    pub fn helstrom_distinguishability(&self) -> f64 {
        (1.0 - self.visibility * self.visibility).max(0.0).sqrt()
    }
}

fn ensure_kick_fits(phi: &WaveFunction, steps: i64) -> Result<()> {
    let n = phi.grid().n_points();
    let band = (2 * steps.unsigned_abs() as usize).min(n);
    if band >= n / 2 {
        return Err(Error::GridTooSmall(format!(
            "a kick of {steps} momentum steps spans half of {}",
            phi.grid()
        )));
    }
    let amps = phi.amplitudes();
    let edge = amps[..band]
        .iter()
        .chain(&amps[n - band..])
        .map(|a| a.norm())
        .fold(0.0, f64::max);
    if edge >= EDGE_TOLERANCE {
        return Err(Error::GridTooSmall(format!(
            "momentum amplitude {edge:.3e} within 2k of the grid edge would wrap around"
        )));
    }
    Ok(())
}

/// Computes both integral forms of the visibility and checks that they agree.
pub fn visibility(xi: &WaveFunction, k: f64) -> Result<VisibilityReport> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::contract(format!("kick must be >= 0, got {k}")));
    }
    let grid = *xi.grid();
    let norm = xi.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::contract(format!(
            "visibility needs a normalized wall state, norm² = {norm}"
        )));
    }
    let (steps, applied) = grid.snap_momentum(k);
    let position = xi.in_representation(Representation::Position)?;
    let momentum = xi.in_representation(Representation::Momentum)?;
    ensure_kick_fits(&momentum, steps)?;

    let overlap_position: Complex64 = position
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, a)| a.norm_sqr() * Complex64::from_polar(1.0, -2.0 * applied * grid.position(j) / HBAR))
        .sum::<Complex64>()
        * grid.spacing();

    let n = grid.n_points() as i64;
    let amps = momentum.amplitudes();
    let at = |m: i64| amps[m.rem_euclid(n) as usize];
    let overlap_momentum: Complex64 = (0..n)
        .map(|m| at(m - steps).conj() * at(m + steps))
        .sum::<Complex64>()
        * grid.momentum_spacing();

    let disagreement = (overlap_position - overlap_momentum).norm();
    if disagreement > VISIBILITY_FORM_TOLERANCE {
        return Err(Error::InternalConsistency(format!(
            "position and momentum visibility integrals differ by {disagreement:e}"
        )));
    }
    let mut phase_alpha = overlap_position.arg();
    if phase_alpha <= -PI {
        phase_alpha = PI;
    }
    Ok(VisibilityReport {
        visibility: overlap_position.norm().min(1.0),
        phase_alpha,
        overlap_position,
        overlap_momentum,
        applied_k: applied,
    })
}

/// `Prob(P|q) ∝ |ψ₁(q) ξ̃(P-k) + ψ₂(q) ξ̃(P+k)|²` on the wall-momentum grid,
/// conditioned on the grid point nearest to `q`.
pub fn conditional_momentum(pair: &BranchPair, q: f64) -> Result<Vec<f64>> {
    let grid = *pair.branch1.particle.grid();
    let j = grid
        .nearest_index(Representation::Position, q)
        .ok_or_else(|| Error::contract(format!("screen position {q} lies outside {grid}")))?;
    let psi1 = pair.branch1.particle.in_representation(Representation::Position)?;
    let psi2 = pair.branch2.particle.in_representation(Representation::Position)?;
    let (c1, c2) = (psi1.amplitudes()[j], psi2.amplitudes()[j]);
    let xi_plus = pair.branch1.wall.in_representation(Representation::Momentum)?;
    let xi_minus = pair.branch2.wall.in_representation(Representation::Momentum)?;
    let density = xi_plus
        .amplitudes()
        .iter()
        .zip(xi_minus.amplitudes())
        .map(|(a, b)| (c1 * a + c2 * b).norm_sqr())
        .collect();
    normalize_density(density, grid.momentum_spacing())
        .map_err(|_| Error::Numerical(format!("both branches vanish at q = {q}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PathLabel {
    Slit1,
    Slit2,
    Ambiguous,
}

/// `(P₀, P₀+2k]` → slit 1, `[P₀-2k, P₀)` → slit 2, anything else ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathInferenceRule {
    pub pivot: f64,
    pub k: f64,
}

impl PathInferenceRule {
    pub fn new(pivot: f64, k: f64) -> Result<Self> {
        if !(pivot.is_finite() && k.is_finite() && k >= 0.0) {
            return Err(Error::contract(format!(
                "invalid path rule: pivot {pivot}, k {k}"
            )));
        }
        Ok(PathInferenceRule { pivot, k })
    }

    pub fn classify(&self, p: f64) -> PathLabel {
        classify_path(p, self)
    }
}

pub fn classify_path(p: f64, rule: &PathInferenceRule) -> PathLabel {
    let (p0, k) = (rule.pivot, rule.k);
    if p > p0 && p <= p0 + 2.0 * k {
        PathLabel::Slit1
    } else if p >= p0 - 2.0 * k && p < p0 {
        PathLabel::Slit2
    } else {
        PathLabel::Ambiguous
    }
}

/// Default pivot: the initial wall state's momentum mean.
pub fn default_pivot(wall: &WaveFunction) -> Result<f64> {
    Ok(moments(&wall.in_representation(Representation::Momentum)?)?.mean)
}

/// Wall-momentum distribution when only branch `label` reaches the screen,
/// i.e. `conditional_momentum` in the single-branch limit: `|ξ̃(P ∓ k)|²`.
pub fn branch_momentum_distribution(pair: &BranchPair, label: PathLabel) -> Result<Vec<f64>> {
    let wall = match label {
        PathLabel::Slit1 => &pair.branch1.wall,
        PathLabel::Slit2 => &pair.branch2.wall,
        PathLabel::Ambiguous => return Err(Error::contract("no branch is labelled ambiguous")),
    };
    let phi = wall.in_representation(Representation::Momentum)?;
    normalize_density(phi.density(), phi.measure())
}

struct DiscreteSampler {
    cdf: Vec<f64>,
}

impl DiscreteSampler {
    fn new(density: &[f64]) -> Self {
        let total: f64 = density.iter().sum();
        let mut acc = 0.0;
        let cdf = density
            .iter()
            .map(|d| {
                acc += d / total;
                acc
            })
            .collect();
        DiscreteSampler { cdf }
    }

    fn index(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Monte Carlo success rate of the window rule.
///
/// Each sample picks slit `α` with probability equal to its branch weight,
/// draws `P` from the single-branch conditional distribution of that slit
/// and scores the rule's label against `α`. The stream is a ChaCha8 RNG
/// seeded with `seed`.
pub fn classification_accuracy(
    pair: &BranchPair,
    rule: &PathInferenceRule,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::contract("at least one Monte Carlo sample is required"));
    }
    let (w1, w2) = (pair.branch1.weight(), pair.branch2.weight());
    if !(w1 + w2 > 0.0) {
        return Err(Error::Numerical("both branches are empty".into()));
    }
    let p_slit1 = w1 / (w1 + w2);
    let grid = *pair.branch1.wall.grid();
    let sampler1 = DiscreteSampler::new(&branch_momentum_distribution(pair, PathLabel::Slit1)?);
    let sampler2 = DiscreteSampler::new(&branch_momentum_distribution(pair, PathLabel::Slit2)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut correct = 0usize;
    for _ in 0..samples {
        let u_branch: f64 = rng.gen();
        let u_momentum: f64 = rng.gen();
        let (truth, sampler) = if u_branch < p_slit1 {
            (PathLabel::Slit1, &sampler1)
        } else {
            (PathLabel::Slit2, &sampler2)
        };
        let p = grid.momentum(sampler.index(u_momentum));
        if rule.classify(p) == truth {
            correct += 1;
        }
    }
    Ok(correct as f64 / samples as f64)
}

/// Exact success probability that [`classification_accuracy`] estimates:
/// branch weights times the single-branch mass inside the right window.
pub fn classification_probability(pair: &BranchPair, rule: &PathInferenceRule) -> Result<f64> {
    let (w1, w2) = (pair.branch1.weight(), pair.branch2.weight());
    if !(w1 + w2 > 0.0) {
        return Err(Error::Numerical("both branches are empty".into()));
    }
    let grid = *pair.branch1.wall.grid();
    let dp = grid.momentum_spacing();
    let hit = |label: PathLabel| -> Result<f64> {
        Ok(branch_momentum_distribution(pair, label)?
            .iter()
            .enumerate()
            .filter(|(m, _)| rule.classify(grid.momentum(*m)) == label)
            .map(|(_, d)| d * dp)
            .sum())
    };
    Ok((w1 * hit(PathLabel::Slit1)? + w2 * hit(PathLabel::Slit2)?) / (w1 + w2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditStatus {
    Satisfied,
    Violated,
    /// Moments are not resolvable on this grid; the audit was skipped.
    MomentsUnresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KennardAudit {
    pub sigma_q: f64,
    pub sigma_p: f64,
    pub product: f64,
    pub bound: f64,
    pub status: AuditStatus,
}

impl KennardAudit {
    pub fn satisfied(&self) -> bool {
        self.status == AuditStatus::Satisfied
    }
}

fn tail_share(psi: &WaveFunction) -> Result<f64> {
    let m = moments(psi)?;
    let coords = psi.coordinates();
    let n = coords.len();
    let band = n / 8;
    let (mut tail, mut total) = (0.0, 0.0);
    for (i, (x, a)) in coords.iter().zip(psi.amplitudes()).enumerate() {
        let c = (x - m.mean).powi(2) * a.norm_sqr();
        total += c;
        if i < band || i >= n - band {
            tail += c;
        }
    }
    Ok(if total > 0.0 { tail / total } else { 0.0 })
}

/// Checks `σ_Q σ_P ≥ ħ/2` for a single state.
pub fn kennard_audit(psi: &WaveFunction) -> Result<KennardAudit> {
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::contract(format!(
            "kennard audit needs a normalized state, norm² = {norm}"
        )));
    }
    let position = psi.in_representation(Representation::Position)?;
    let momentum = psi.in_representation(Representation::Momentum)?;
    let sigma_q = moments(&position)?.std_dev;
    let sigma_p = moments(&momentum)?.std_dev;
    let product = sigma_q * sigma_p;
    let bound = HBAR / 2.0;
    let unresolved =
        tail_share(&position)? > UNRESOLVED_TAIL_SHARE || tail_share(&momentum)? > UNRESOLVED_TAIL_SHARE;
    let status = if unresolved {
        AuditStatus::MomentsUnresolved
    } else if product >= bound - KENNARD_TOLERANCE {
        AuditStatus::Satisfied
    } else {
        AuditStatus::Violated
    };
    Ok(KennardAudit {
        sigma_q,
        sigma_p,
        product,
        bound,
        status,
    })
}
