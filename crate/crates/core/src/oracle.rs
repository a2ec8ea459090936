//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here touches the FFT backend or the factored branch algebra:
//! transforms are explicit matrices, the two-body state is stored densely
//! and integrals use adaptive Simpson quadrature on closed-form integrands.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, HBAR};
use crate::slits::{Pipeline, SlitModel};

/// Centred DFT as an explicit `n × n` matrix, unitary between the
/// `dx`-weighted and `dp`-weighted inner products:
/// `F[m, j] = dx/√(2πħ) · exp(-i p_m x_j / ħ)`.
pub fn dft_matrix(grid: &GridSpec) -> DMatrix<Complex64> {
    let n = grid.n_points();
    let scale = grid.spacing() / (2.0 * PI * HBAR).sqrt();
    DMatrix::from_fn(n, n, |m, j| {
        Complex64::from_polar(scale, -grid.momentum(m) * grid.position(j) / HBAR)
    })
}

/// Free evolution for time `t` as a dense position-space matrix.
pub fn free_evolution_matrix(grid: &GridSpec, mass: f64, t: f64) -> DMatrix<Complex64> {
    let f = dft_matrix(grid);
    let phases = DVector::from_fn(grid.n_points(), |m, _| {
        let p = grid.momentum(m);
        Complex64::from_polar(1.0, -p * p * t / (2.0 * mass * HBAR))
    });
    // inverse transform carries dp in place of dx
    let finv = f.adjoint() * Complex64::new(grid.momentum_spacing() / grid.spacing(), 0.0);
    let fp = DMatrix::from_fn(f.nrows(), f.ncols(), |m, j| f[(m, j)] * phases[m]);
    finv * fp
}

/// Joint wavefunction `Ψ(q, Q)`: rows index the particle grid, columns the
/// wall grid.
#[derive(Debug, Clone)]
pub struct DenseComposite {
    pub grid: GridSpec,
    pub amplitudes: DMatrix<Complex64>,
}

impl DenseComposite {
    /// Product state from position-space amplitude vectors.
    pub fn product(grid: GridSpec, particle: &[Complex64], wall: &[Complex64]) -> Result<Self> {
        let n = grid.n_points();
        if particle.len() != n || wall.len() != n {
            return Err(Error::contract("amplitude vectors must match the grid"));
        }
        if n > 1024 {
            return Err(Error::contract("dense composite oracle is limited to n <= 1024"));
        }
        Ok(DenseComposite {
            grid,
            amplitudes: DMatrix::from_fn(n, n, |i, j| particle[i] * wall[j]),
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        let dx = self.grid.spacing();
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx * dx
    }

    fn evolve_particle(&mut self, mass: f64, t: f64) {
        let u = free_evolution_matrix(&self.grid, mass, t);
        self.amplitudes = u * &self.amplitudes;
    }

    /// `Σ_α S_α(q) e^{∓ikq/ħ} e^{±ikQ/ħ}` applied pointwise, with
    /// post-selection renormalization in aperture mode.
    fn slit_interaction(&mut self, k: f64, slits: &SlitModel) -> Result<()> {
        let g = self.grid;
        let (_, k) = g.snap_momentum(k);
        let n = g.n_points();
        let in_slit = |x: f64| -> (bool, bool) {
            match *slits {
                SlitModel::Partition { x_divide } => (x >= x_divide, x < x_divide),
                SlitModel::Aperture { d, w } => (
                    x >= d / 2.0 - w / 2.0 && x < d / 2.0 + w / 2.0,
                    x >= -d / 2.0 - w / 2.0 && x < -d / 2.0 + w / 2.0,
                ),
            }
        };
        let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            let q = g.position(i);
            let (one, two) = in_slit(q);
            for j in 0..n {
                let big_q = g.position(j);
                let mut factor = Complex64::new(0.0, 0.0);
                if one {
                    factor += Complex64::from_polar(1.0, k * (big_q - q) / HBAR);
                }
                if two {
                    factor += Complex64::from_polar(1.0, -k * (big_q - q) / HBAR);
                }
                out[(i, j)] = factor * self.amplitudes[(i, j)];
            }
        }
        self.amplitudes = out;
        if matches!(slits, SlitModel::Aperture { .. }) {
            let norm = self.norm_sqr();
            if !(norm > 1e-300) {
                return Err(Error::Numerical("no amplitude passes the apertures".into()));
            }
            self.amplitudes /= Complex64::new(norm.sqrt(), 0.0);
        }
        Ok(())
    }

    /// Runs the whole experiment on the joint state.
    pub fn run(mut self, pipeline: &Pipeline) -> Result<Self> {
        self.evolve_particle(pipeline.mass_particle, pipeline.tau);
        self.slit_interaction(pipeline.k, &pipeline.slits)?;
        self.evolve_particle(pipeline.mass_particle, pipeline.tau_prime);
        Ok(self)
    }

    /// `Prob(q) = ∫ |Ψ(q, Q)|² dQ`, normalized on the grid.
    pub fn screen_marginal(&self) -> Vec<f64> {
        let dx = self.grid.spacing();
        let raw: Vec<f64> = self
            .amplitudes
            .row_iter()
            .map(|row| row.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx)
            .collect();
        let total: f64 = raw.iter().sum::<f64>() * dx;
        raw.into_iter().map(|r| r / total).collect()
    }

    /// `Prob(P | q_i)`: the wall index of row `i` transformed to momentum
    /// by the dense DFT, normalized with the momentum spacing.
    pub fn conditional_wall_momentum(&self, row: usize) -> Vec<f64> {
        let f = dft_matrix(&self.grid);
        let slice: DVector<Complex64> = self.amplitudes.row(row).transpose();
        let phi = f * slice;
        let dp = self.grid.momentum_spacing();
        let total: f64 = phi.iter().map(|a| a.norm_sqr()).sum::<f64>() * dp;
        phi.iter().map(|a| a.norm_sqr() / total).collect()
    }
}

/// Joint vector `c₁ψ₁⊗ξ₁ + c₂ψ₂⊗ξ₂` in the object-major tensor basis.
pub fn dense_two_branch(
    c1: Complex64,
    c2: Complex64,
    psi1: &DVector<Complex64>,
    psi2: &DVector<Complex64>,
    xi1: &DVector<Complex64>,
    xi2: &DVector<Complex64>,
) -> DVector<Complex64> {
    psi1.kronecker(xi1) * c1 + psi2.kronecker(xi2) * c2
}

/// `Tr_M |Ψ⟩⟨Ψ|` for a joint vector of dimension `d_a · d_m`.
pub fn reduced_object(joint: &DVector<Complex64>, d_a: usize, d_m: usize) -> DMatrix<Complex64> {
    let rho = joint * joint.adjoint();
    DMatrix::from_fn(d_a, d_a, |a, b| {
        (0..d_m).map(|m| rho[(a * d_m + m, b * d_m + m)]).sum()
    })
}

/// `Tr_A |Ψ⟩⟨Ψ|`.
pub fn reduced_meter(joint: &DVector<Complex64>, d_a: usize, d_m: usize) -> DMatrix<Complex64> {
    let rho = joint * joint.adjoint();
    DMatrix::from_fn(d_m, d_m, |m, n| {
        (0..d_a).map(|a| rho[(a * d_m + m, a * d_m + n)]).sum()
    })
}

/// `⟨b|ρ|b⟩` for each basis column, divided by `Tr ρ`.
pub fn basis_probabilities(rho: &DMatrix<Complex64>, basis: &DMatrix<Complex64>) -> Vec<f64> {
    let trace = rho.trace().re;
    basis
        .column_iter()
        .map(|b| (b.adjoint() * rho * b)[(0, 0)].re / trace)
        .collect()
}

/// `(I ⊗ ⟨m|)|Ψ⟩`, normalized.
pub fn conditional_object(
    joint: &DVector<Complex64>,
    d_a: usize,
    d_m: usize,
    meter_vector: &DVector<Complex64>,
) -> DVector<Complex64> {
    let v = DVector::from_fn(d_a, |a, _| {
        (0..d_m)
            .map(|m| meter_vector[m].conj() * joint[a * d_m + m])
            .sum::<Complex64>()
    });
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `∫ ρ(Q) e^{-2ikQ/ħ} dQ` over `[a, b]` by quadrature, for a position
/// density `ρ` given in closed form. Split into panels so the oscillating
/// integrand is resolved.
pub fn visibility_by_quadrature(
    density: &dyn Fn(f64) -> f64,
    k: f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Complex64 {
    let period = if k > 0.0 { PI * HBAR / k } else { b - a };
    let panels = (((b - a) / period).ceil() as usize).max(1) * 4;
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..panels {
        let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
        let re = adaptive_simpson(&|q| density(q) * (2.0 * k * q / HBAR).cos(), lo, hi, tol / panels as f64);
        let im = adaptive_simpson(&|q| -density(q) * (2.0 * k * q / HBAR).sin(), lo, hi, tol / panels as f64);
        total += Complex64::new(re, im);
    }
    total
}

/// Normal position density with standard deviation `sigma` centred at `center`.
pub fn gaussian_density(center: f64, sigma: f64) -> impl Fn(f64) -> f64 {
    move |q| (-(q - center).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
}
