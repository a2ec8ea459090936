//! Finite-dimensional two-branch states `c₁|ψ₁⟩⊗|ξ₁⟩ + c₂|ψ₂⟩⊗|ξ₂⟩`.
//!
//! Object-side and meter-side outcome statistics, the conditional object
//! state after a meter reading, and a Robertson audit for pairs of
//! observables. The same abstraction is reachable from the grid model via
//! [`link_to_slit_model`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{overlap, Representation, WaveFunction};
use crate::slits::BranchPair;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Probability below which a meter outcome cannot be conditioned on.
pub const UNREACHABLE_PROBABILITY: f64 = 1e-14;

const ORTHONORMAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoBranchState {
    c1: Complex64,
    c2: Complex64,
    psi1: CVector,
    psi2: CVector,
    xi1: CVector,
    xi2: CVector,
}

fn unit(v: &CVector, name: &str) -> Result<CVector> {
    let n = v.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::contract(format!("{name} must be a nonzero finite vector")));
    }
    Ok(v.unscale(n))
}

impl TwoBranchState {
    /// Normalizes the four vectors and rescales `c₁, c₂` jointly so the
    /// total state has unit norm.
    pub fn new(
        c1: Complex64,
        c2: Complex64,
        psi1: CVector,
        psi2: CVector,
        xi1: CVector,
        xi2: CVector,
    ) -> Result<Self> {
        if psi1.len() < 2 || xi1.len() < 2 {
            return Err(Error::contract("object and meter spaces need dimension >= 2"));
        }
        if psi1.len() != psi2.len() || xi1.len() != xi2.len() {
            return Err(Error::contract("branch vectors must share their space's dimension"));
        }
        let psi1 = unit(&psi1, "psi1")?;
        let psi2 = unit(&psi2, "psi2")?;
        let xi1 = unit(&xi1, "xi1")?;
        let xi2 = unit(&xi2, "xi2")?;
        let cross = c1.conj() * c2 * psi1.dotc(&psi2) * xi1.dotc(&xi2);
        let total = c1.norm_sqr() + c2.norm_sqr() + 2.0 * cross.re;
        if !(total > 1e-300) {
            return Err(Error::contract("two-branch state has zero norm"));
        }
        let s = total.sqrt();
        Ok(TwoBranchState {
            c1: c1 / s,
            c2: c2 / s,
            psi1,
            psi2,
            xi1,
            xi2,
        })
    }

    pub fn coefficients(&self) -> (Complex64, Complex64) {
        (self.c1, self.c2)
    }

    pub fn object_vectors(&self) -> (&CVector, &CVector) {
        (&self.psi1, &self.psi2)
    }

    pub fn meter_vectors(&self) -> (&CVector, &CVector) {
        (&self.xi1, &self.xi2)
    }

    pub fn object_dim(&self) -> usize {
        self.psi1.len()
    }

    pub fn meter_dim(&self) -> usize {
        self.xi1.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        let cross = self.c1.conj() * self.c2 * self.psi1.dotc(&self.psi2) * self.xi1.dotc(&self.xi2);
        self.c1.norm_sqr() + self.c2.norm_sqr() + 2.0 * cross.re
    }

    /// `⟨ξ₁|ξ₂⟩`; its modulus sets the visibility of object-side interference.
    pub fn meter_overlap(&self) -> Complex64 {
        self.xi1.dotc(&self.xi2)
    }

    pub fn visibility_factor(&self) -> f64 {
        self.meter_overlap().norm()
    }

    /// Same state with the object and meter roles exchanged.
    pub fn swap_roles(&self) -> TwoBranchState {
        TwoBranchState {
            c1: self.c1,
            c2: self.c2,
            psi1: self.xi1.clone(),
            psi2: self.xi2.clone(),
            xi1: self.psi1.clone(),
            xi2: self.psi2.clone(),
        }
    }

    /// `Prob_A(a)` for the orthonormal basis in the columns of `basis`.
    pub fn object_outcome_distribution(&self, basis: &CMatrix) -> Result<Vec<f64>> {
        branch_distribution(self.c1, self.c2, &self.psi1, &self.psi2, self.xi1.dotc(&self.xi2), basis)
    }

    /// `Prob_M(m)` for the orthonormal meter basis in the columns of `basis`.
    pub fn meter_outcome_distribution(&self, basis: &CMatrix) -> Result<Vec<f64>> {
        branch_distribution(self.c1, self.c2, &self.xi1, &self.xi2, self.psi1.dotc(&self.psi2), basis)
    }

    /// Normalized object state `c₁|ψ₁⟩⟨m|ξ₁⟩ + c₂|ψ₂⟩⟨m|ξ₂⟩` after meter
    /// outcome `outcome`, with the outcome's probability.
    pub fn post_measurement_state(&self, basis: &CMatrix, outcome: usize) -> Result<(CVector, f64)> {
        check_basis(basis, self.meter_dim())?;
        if outcome >= basis.ncols() {
            return Err(Error::contract(format!(
                "meter outcome {outcome} out of range for a {}-dimensional basis",
                basis.ncols()
            )));
        }
        let probability = self.meter_outcome_distribution(basis)?[outcome];
        if probability < UNREACHABLE_PROBABILITY {
            return Err(Error::OutcomeUnreachable { probability });
        }
        let m = basis.column(outcome);
        let a1 = m.dotc(&self.xi1);
        let a2 = m.dotc(&self.xi2);
        let v = self.psi1.map(|x| x * self.c1 * a1) + self.psi2.map(|x| x * self.c2 * a2);
        Ok((unit(&v, "post-measurement state")?, probability))
    }

    /// How a meter reading changes the statistics of object observable `B`.
    pub fn disturbance(
        &self,
        meter_basis: &CMatrix,
        outcome: usize,
        object_basis: &CMatrix,
    ) -> Result<DisturbanceReport> {
        let before = self.object_outcome_distribution(object_basis)?;
        let (post, probability) = self.post_measurement_state(meter_basis, outcome)?;
        let after = pure_distribution(&post, object_basis)?;
        let total_variation = 0.5 * before.iter().zip(&after).map(|(a, b)| (a - b).abs()).sum::<f64>();
        Ok(DisturbanceReport {
            outcome,
            outcome_probability: probability,
            before,
            after,
            total_variation,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisturbanceReport {
    pub outcome: usize,
    pub outcome_probability: f64,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub total_variation: f64,
}

fn check_basis(basis: &CMatrix, dim: usize) -> Result<()> {
    if basis.nrows() != dim || basis.ncols() != dim {
        return Err(Error::contract(format!(
            "basis must be {dim}x{dim}, got {}x{}",
            basis.nrows(),
            basis.ncols()
        )));
    }
    let gram = basis.adjoint() * basis;
    let deviation = (gram - CMatrix::identity(dim, dim)).norm();
    if deviation > ORTHONORMAL_TOLERANCE {
        return Err(Error::contract(format!(
            "basis is not orthonormal (‖B†B - I‖ = {deviation:e})"
        )));
    }
    Ok(())
}

fn branch_distribution(
    c1: Complex64,
    c2: Complex64,
    v1: &CVector,
    v2: &CVector,
    other_overlap: Complex64,
    basis: &CMatrix,
) -> Result<Vec<f64>> {
    check_basis(basis, v1.len())?;
    let raw: Vec<f64> = basis
        .column_iter()
        .map(|a| {
            let a1 = a.dotc(v1);
            let a2 = a.dotc(v2);
            (c1 * a1).norm_sqr()
                + (c2 * a2).norm_sqr()
                + 2.0 * (c1.conj() * c2 * a1.conj() * a2 * other_overlap).re
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numerical("outcome distribution has zero mass".into()));
    }
    Ok(raw.into_iter().map(|p| (p / total).max(0.0)).collect())
}

/// `|⟨b|v⟩|²` over a basis, for a normalized pure state.
pub fn pure_distribution(v: &CVector, basis: &CMatrix) -> Result<Vec<f64>> {
    check_basis(basis, v.len())?;
    Ok(basis.column_iter().map(|b| b.dotc(v).norm_sqr()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobertsonReport {
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub product: f64,
    /// `½|⟨[A,B]⟩|`
    pub bound: f64,
}

impl RobertsonReport {
    pub fn satisfied(&self, tolerance: f64) -> bool {
        self.product >= self.bound - tolerance
    }
}

fn expectation(op: &CMatrix, v: &CVector) -> Complex64 {
    v.dotc(&(op * v))
}

fn check_hermitian(op: &CMatrix, name: &str) -> Result<()> {
    if !op.is_square() {
        return Err(Error::contract(format!("{name} must be square")));
    }
    let deviation = (op - op.adjoint()).norm();
    if deviation > 1e-10 * op.norm().max(1.0) {
        return Err(Error::contract(format!("{name} is not Hermitian")));
    }
    Ok(())
}

/// `σ(A)σ(B)` against `½|⟨[A,B]⟩|` in the normalized state `v`.
pub fn robertson_audit(v: &CVector, a: &CMatrix, b: &CMatrix) -> Result<RobertsonReport> {
    check_hermitian(a, "A")?;
    check_hermitian(b, "B")?;
    if a.nrows() != v.len() || b.nrows() != v.len() {
        return Err(Error::contract("observables and state dimensions differ"));
    }
    let v = unit(v, "state")?;
    let sigma = |op: &CMatrix| {
        let mean = expectation(op, &v).re;
        let sq = expectation(&(op * op), &v).re;
        (sq - mean * mean).max(0.0).sqrt()
    };
    let sigma_a = sigma(a);
    let sigma_b = sigma(b);
    let commutator = a * b - b * a;
    Ok(RobertsonReport {
        sigma_a,
        sigma_b,
        product: sigma_a * sigma_b,
        bound: 0.5 * expectation(&commutator, &v).norm(),
    })
}

fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_vector<R: Rng>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| random_complex(rng))
}

pub fn random_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = random_vector(dim, rng);
        let n = v.norm();
        if n > 1e-6 {
            return v.unscale(n);
        }
    }
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let m = CMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    (&m + m.adjoint()).scale(0.5)
}

/// Orthonormal basis (as columns) from the QR factor of a random matrix.
pub fn random_basis<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let m = CMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    m.qr().q()
}

/// Basis whose first two columns span `v1, v2` (Gram-Schmidt), completed
/// with the standard basis.
pub fn basis_containing(v1: &CVector, v2: &CVector) -> Result<CMatrix> {
    let dim = v1.len();
    let mut cols: Vec<CVector> = Vec::with_capacity(dim);
    let candidates = [v1.clone(), v2.clone()]
        .into_iter()
        .chain((0..dim).map(|i| CVector::from_fn(dim, |r, _| if r == i { 1.0.into() } else { 0.0.into() })));
    for mut c in candidates {
        for e in &cols {
            let proj = e.dotc(&c);
            c -= e.map(|x| x * proj);
        }
        let n = c.norm();
        if n > 1e-9 {
            cols.push(c.unscale(n));
        }
        if cols.len() == dim {
            break;
        }
    }
    if cols.len() != dim {
        return Err(Error::Numerical("could not complete an orthonormal basis".into()));
    }
    Ok(CMatrix::from_columns(&cols))
}

/// Coordinates of two grid states in an orthonormal basis of their span
/// (padded to dimension 2 when they are parallel).
fn two_dim_coordinates(a: &WaveFunction, b: &WaveFunction) -> Result<(CVector, CVector)> {
    let aa = overlap(a, a)?.re;
    if !(aa > 0.0) {
        return Err(Error::contract("branch factor has zero norm"));
    }
    let na = aa.sqrt();
    let nb = overlap(b, b)?.re.sqrt();
    if !(nb > 0.0) {
        return Err(Error::contract("branch factor has zero norm"));
    }
    // e₁ = a/‖a‖, e₂ ∝ b − ⟨e₁|b⟩e₁
    let along = overlap(a, b)? / (na * nb);
    let perp = (1.0 - along.norm_sqr()).max(0.0).sqrt();
    let u = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let v = CVector::from_vec(vec![along, Complex64::new(perp, 0.0)]);
    Ok((u, v))
}

/// Projects the factored grid state onto the two-branch abstraction,
/// preserving `⟨ψ₁|ψ₂⟩`, `⟨ξ₊|ξ₋⟩` and the branch weights.
pub fn link_to_slit_model(pair: &BranchPair) -> Result<TwoBranchState> {
    let p1 = pair.branch1.particle.in_representation(Representation::Position)?;
    let p2 = pair.branch2.particle.in_representation(Representation::Position)?;
    let w1 = pair.branch1.wall.in_representation(Representation::Position)?;
    let w2 = pair.branch2.wall.in_representation(Representation::Position)?;
    let (psi1, psi2) = two_dim_coordinates(&p1, &p2)?;
    let (xi1, xi2) = two_dim_coordinates(&w1, &w2)?;
    let c1 = Complex64::new(p1.norm_sqr().sqrt(), 0.0);
    let c2 = Complex64::new(p2.norm_sqr().sqrt(), 0.0);
    TwoBranchState::new(c1, c2, psi1, psi2, xi1, xi2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e(dim: usize, i: usize) -> CVector {
        CVector::from_fn(dim, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn construction_normalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = TwoBranchState::new(
            c(0.3, 0.1),
            c(-0.2, 0.9),
            random_vector(3, &mut rng),
            random_vector(3, &mut rng),
            random_vector(4, &mut rng),
            random_vector(4, &mut rng),
        )
        .unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(TwoBranchState::new(c(1.0, 0.0), c(1.0, 0.0), e(1, 0), e(1, 0), e(2, 0), e(2, 1)).is_err());
    }

    #[test]
    fn orthogonal_meters_kill_interference() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (p1, p2) = (random_vector(4, &mut rng), random_vector(4, &mut rng));
        let s = TwoBranchState::new(c(1.0, 0.0), c(0.0, 1.0), p1.clone(), p2.clone(), e(3, 0), e(3, 1)).unwrap();
        let basis = random_basis(4, &mut rng);
        let got = s.object_outcome_distribution(&basis).unwrap();
        let (c1, c2) = s.coefficients();
        let (u1, u2) = s.object_vectors();
        let mix: Vec<f64> = basis
            .column_iter()
            .map(|a| (c1 * a.dotc(u1)).norm_sqr() + (c2 * a.dotc(u2)).norm_sqr())
            .collect();
        let total: f64 = mix.iter().sum();
        for (g, m) in got.iter().zip(&mix) {
            assert!((g - m / total).abs() < 1e-12);
        }
        assert_eq!(s.visibility_factor(), 0.0);
    }

    #[test]
    fn identical_meters_give_full_visibility() {
        let s = TwoBranchState::new(c(1.0, 0.0), c(1.0, 0.0), e(2, 0), e(2, 1), e(2, 0), e(2, 0)).unwrap();
        assert!((s.visibility_factor() - 1.0).abs() < 1e-15);
        // |+⟩ outcome carries everything
        let h = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)])
            .scale(std::f64::consts::FRAC_1_SQRT_2);
        let d = s.object_outcome_distribution(&h).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12 && d[1].abs() < 1e-12);
    }

    #[test]
    fn orthogonal_meter_reading_identifies_the_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (p1, p2) = (random_unit_vector(3, &mut rng), random_unit_vector(3, &mut rng));
        let s = TwoBranchState::new(c(0.6, 0.0), c(0.8, 0.0), p1.clone(), p2, e(2, 0), e(2, 1)).unwrap();
        let basis = CMatrix::identity(2, 2);
        let (post, prob) = s.post_measurement_state(&basis, 0).unwrap();
        assert!(prob > 0.0);
        let fidelity = post.dotc(&p1).norm();
        assert!((fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factored_state_is_not_disturbed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (p1, p2) = (random_unit_vector(3, &mut rng), random_unit_vector(3, &mut rng));
        let xi = random_unit_vector(3, &mut rng);
        let (c1, c2) = (c(0.5, 0.2), c(0.1, -0.7));
        let s = TwoBranchState::new(c1, c2, p1.clone(), p2.clone(), xi.clone(), xi).unwrap();
        let meter = random_basis(3, &mut rng);
        let expected = unit(&(p1.map(|x| x * c1) + p2.map(|x| x * c2)), "e").unwrap();
        for m in 0..3 {
            let (post, _) = s.post_measurement_state(&meter, m).unwrap();
            assert!((post.dotc(&expected).norm() - 1.0).abs() < 1e-12);
            let report = s.disturbance(&meter, m, &random_basis(3, &mut rng)).unwrap();
            assert!(report.total_variation < 1e-12);
        }
    }

    #[test]
    fn unreachable_outcome_is_reported() {
        let s = TwoBranchState::new(c(1.0, 0.0), c(1.0, 0.0), e(2, 0), e(2, 1), e(3, 0), e(3, 1)).unwrap();
        let err = s.post_measurement_state(&CMatrix::identity(3, 3), 2).unwrap_err();
        assert!(matches!(err, Error::OutcomeUnreachable { .. }));
    }

    #[test]
    fn non_orthonormal_basis_is_rejected() {
        let s = TwoBranchState::new(c(1.0, 0.0), c(1.0, 0.0), e(2, 0), e(2, 1), e(2, 0), e(2, 1)).unwrap();
        let bad = CMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(s.object_outcome_distribution(&bad), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn swapping_roles_swaps_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = TwoBranchState::new(
            c(0.4, 0.3),
            c(0.7, -0.1),
            random_vector(3, &mut rng),
            random_vector(3, &mut rng),
            random_vector(4, &mut rng),
            random_vector(4, &mut rng),
        )
        .unwrap();
        let t = s.swap_roles();
        let (ba, bm) = (random_basis(3, &mut rng), random_basis(4, &mut rng));
        assert_eq!(s.object_outcome_distribution(&ba).unwrap(), t.meter_outcome_distribution(&ba).unwrap());
        assert_eq!(s.meter_outcome_distribution(&bm).unwrap(), t.object_outcome_distribution(&bm).unwrap());
    }

    #[test]
    fn robertson_on_pauli_pair() {
        let sx = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let sy = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let up = e(2, 0);
        let r = robertson_audit(&up, &sx, &sy).unwrap();
        // σ_x σ_y = 1 = ½|⟨2iσ_z⟩|
        assert!((r.product - 1.0).abs() < 1e-12 && (r.bound - 1.0).abs() < 1e-12);
        assert!(robertson_audit(&up, &sx, &CMatrix::from_element(2, 2, c(0.0, 1.0))).is_err());
    }

    #[test]
    fn completed_basis_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (a, b) = (random_vector(5, &mut rng), random_vector(5, &mut rng));
        let basis = basis_containing(&a, &b).unwrap();
        check_basis(&basis, 5).unwrap();
        let a_hat = unit(&a, "a").unwrap();
        assert!((basis.column(0).dotc(&a_hat).norm() - 1.0).abs() < 1e-12);
    }
}
