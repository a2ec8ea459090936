//! Uniform periodic 1-D lattices and wavefunctions sampled on them.
//!
//! Position samples sit at `x_j = (j - n/2)·dx` and momentum samples at
//! `p_m = (m - n/2)·dp` with `dp = 2πħ/L`. The transform between the two is
//! the discretized unitary Fourier kernel `e^{-ipx/ħ}/√(2πħ)`, so
//! `Σ|ψ_j|² dx = Σ|ψ̃_m|² dp` holds exactly.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Reduced Planck constant. The simulation core works in natural units.
pub const HBAR: f64 = 1.0;

/// Largest amplitude a state may carry at the outermost grid samples.
pub const EDGE_TOLERANCE: f64 = 1e-8;

/// Smallest lattice accepted.
pub const MIN_POINTS: usize = 16;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    length: f64,
    n_points: usize,
}

impl GridSpec {
    pub fn new(length: f64, n_points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::contract(format!(
                "grid length must be finite and positive, got {length}"
            )));
        }
        if n_points < MIN_POINTS || !n_points.is_power_of_two() {
            return Err(Error::contract(format!(
                "grid n_points must be a power of two and at least {MIN_POINTS}, got {n_points}"
            )));
        }
        Ok(GridSpec { length, n_points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn momentum_spacing(&self) -> f64 {
        2.0 * PI * HBAR / self.length
    }

    fn centered(&self, j: usize) -> f64 {
        j as f64 - (self.n_points / 2) as f64
    }

    pub fn position(&self, j: usize) -> f64 {
        self.centered(j) * self.spacing()
    }

    pub fn momentum(&self, m: usize) -> f64 {
        self.centered(m) * self.momentum_spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.position(j)).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|m| self.momentum(m)).collect()
    }

    /// Sample coordinates of the given representation.
    pub fn coordinates(&self, repr: Representation) -> Vec<f64> {
        match repr {
            Representation::Position => self.positions(),
            Representation::Momentum => self.momenta(),
        }
    }

    /// Integration weight of the given representation.
    pub fn measure(&self, repr: Representation) -> f64 {
        match repr {
            Representation::Position => self.spacing(),
            Representation::Momentum => self.momentum_spacing(),
        }
    }

    /// Index of the sample nearest to `coordinate`, or `None` when the
    /// coordinate lies outside the sampled range.
    pub fn nearest_index(&self, repr: Representation, coordinate: f64) -> Option<usize> {
        let step = self.measure(repr);
        let idx = (coordinate / step).round() + (self.n_points / 2) as f64;
        if idx.is_finite() && idx >= 0.0 && idx < self.n_points as f64 {
            Some(idx as usize)
        } else {
            None
        }
    }

    /// Rounds a momentum to the nearest multiple of the momentum spacing.
    /// Returns the number of grid steps and the snapped value.
    pub fn snap_momentum(&self, p: f64) -> (i64, f64) {
        let steps = (p / self.momentum_spacing()).round() as i64;
        (steps, steps as f64 * self.momentum_spacing())
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "grid(length {}, {} points)", self.length, self.n_points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    Position,
    Momentum,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Position => f.write_str("position"),
            Representation::Momentum => f.write_str("momentum"),
        }
    }
}

/// Complex amplitudes on a [`GridSpec`], tagged with their representation.
///
/// Values are immutable once built; every operation returns a new state.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: GridSpec,
    amplitudes: Vec<Complex64>,
    representation: Representation,
}

impl WaveFunction {
    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(
        grid: GridSpec,
        amplitudes: Vec<Complex64>,
        representation: Representation,
    ) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::contract(format!(
                "expected {} amplitudes for {grid}, got {}",
                grid.n_points(),
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::contract("amplitudes must be finite"));
        }
        Ok(WaveFunction {
            grid,
            amplitudes,
            representation,
        })
    }

    /// Samples `f` at the coordinates of `representation` and normalizes.
    pub fn from_fn(
        grid: GridSpec,
        representation: Representation,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let amplitudes = grid.coordinates(representation).into_iter().map(f).collect();
        WaveFunction::from_amplitudes(grid, amplitudes, representation)?.normalized()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn coordinates(&self) -> Vec<f64> {
        self.grid.coordinates(self.representation)
    }

    pub fn measure(&self) -> f64 {
        self.grid.measure(self.representation)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.measure()
    }

    /// Probability density `|ψ|²` at each sample.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::contract("cannot normalize a state with zero norm"));
        }
        Ok(self.map_amplitudes(|_, a| a / norm))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.map_amplitudes(|_, a| a * factor)
    }

    /// Applies `f(index, amplitude)` samplewise, keeping grid and representation.
    pub fn map_amplitudes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        WaveFunction {
            grid: self.grid,
            amplitudes: self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(i, &a)| f(i, a))
                .collect(),
            representation: self.representation,
        }
    }

    /// Sum of two states on the same grid and representation.
    pub fn add(&self, other: &WaveFunction) -> Result<Self> {
        ensure_compatible(self, other)?;
        Ok(self.map_amplitudes(|i, a| a + other.amplitudes[i]))
    }

    /// Discretized unitary Fourier transform into the momentum representation.
    pub fn to_momentum(&self) -> Result<Self> {
        if self.representation != Representation::Position {
            return Err(Error::contract(
                "to_momentum expects a position-representation state",
            ));
        }
        let dx = self.grid.spacing();
        let scale = dx / (2.0 * PI * HBAR).sqrt();
        let amplitudes = centered_transform(&self.amplitudes, Direction::Forward, scale);
        Ok(WaveFunction {
            grid: self.grid,
            amplitudes,
            representation: Representation::Momentum,
        })
    }

    /// Inverse of [`WaveFunction::to_momentum`].
    pub fn to_position(&self) -> Result<Self> {
        if self.representation != Representation::Momentum {
            return Err(Error::contract(
                "to_position expects a momentum-representation state",
            ));
        }
        let dp = self.grid.momentum_spacing();
        let scale = dp / (2.0 * PI * HBAR).sqrt();
        let amplitudes = centered_transform(&self.amplitudes, Direction::Inverse, scale);
        Ok(WaveFunction {
            grid: self.grid,
            amplitudes,
            representation: Representation::Position,
        })
    }

    /// The same state expressed in `repr`; a clone when it already is.
    pub fn in_representation(&self, repr: Representation) -> Result<Self> {
        match (self.representation, repr) {
            (a, b) if a == b => Ok(self.clone()),
            (Representation::Position, Representation::Momentum) => self.to_momentum(),
            _ => self.to_position(),
        }
    }

    /// Largest amplitude magnitude among the first and last samples.
    pub fn edge_amplitude(&self) -> f64 {
        let n = self.amplitudes.len();
        self.amplitudes[0].norm().max(self.amplitudes[n - 1].norm())
    }

    /// Fails with [`Error::GridTooSmall`] when the edge samples exceed
    /// [`EDGE_TOLERANCE`].
    pub fn check_edges(&self) -> Result<()> {
        let edge = self.edge_amplitude();
        if edge >= EDGE_TOLERANCE {
            return Err(Error::GridTooSmall(format!(
                "{} amplitude {edge:.3e} at the edges of {} exceeds {EDGE_TOLERANCE:e}",
                self.representation, self.grid
            )));
        }
        Ok(())
    }

    /// True when the state decays at the edges in both representations,
    /// i.e. it is fully contained in the periodic box and band-limited.
    pub fn is_band_limited(&self) -> Result<bool> {
        let other = match self.representation {
            Representation::Position => self.to_momentum()?,
            Representation::Momentum => self.to_position()?,
        };
        Ok(self.edge_amplitude() < EDGE_TOLERANCE && other.edge_amplitude() < EDGE_TOLERANCE)
    }
}

pub(crate) fn ensure_compatible(a: &WaveFunction, b: &WaveFunction) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::contract(format!(
            "grid mismatch: {} vs {}",
            a.grid, b.grid
        )));
    }
    if a.representation != b.representation {
        return Err(Error::contract(format!(
            "representation mismatch: {} vs {}",
            a.representation, b.representation
        )));
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

// With c = n/2 the centered kernel factors as
//   e^{∓2πi(m-c)(j-c)/n} = (-1)^m (-1)^j e^{∓2πi mj/n},
// the constant e^{∓iπn/2} being 1 because n is a multiple of 4.
fn centered_transform(input: &[Complex64], direction: Direction, scale: f64) -> Vec<Complex64> {
    let n = input.len();
    let sign = |i: usize| if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut buffer: Vec<Complex64> = input
        .iter()
        .enumerate()
        .map(|(j, &a)| a * sign(j))
        .collect();
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let fft = match direction {
            Direction::Forward => planner.plan_fft_forward(n),
            Direction::Inverse => planner.plan_fft_inverse(n),
        };
        fft.process(&mut buffer);
    });
    buffer
        .iter_mut()
        .enumerate()
        .for_each(|(m, a)| *a *= sign(m) * scale);
    buffer
}

/// Mean and standard deviation of a state's coordinate distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub std_dev: f64,
}

/// First two moments of `|ψ|²` over the representation's coordinate.
pub fn moments(psi: &WaveFunction) -> Result<Moments> {
    let coords = psi.coordinates();
    let w = psi.measure();
    let norm = psi.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::contract("moments of a zero state are undefined"));
    }
    let (mut m1, mut m2) = (0.0, 0.0);
    for (x, a) in coords.iter().zip(psi.amplitudes()) {
        let p = a.norm_sqr() * w / norm;
        m1 += x * p;
        m2 += x * x * p;
    }
    let variance = m2 - m1 * m1;
    if variance < -1e-12 {
        return Err(Error::InternalConsistency(format!(
            "negative variance {variance:e}"
        )));
    }
    Ok(Moments {
        mean: m1,
        std_dev: variance.max(0.0).sqrt(),
    })
}

/// Inner product `⟨φ|χ⟩` on a shared grid and representation.
pub fn overlap(phi: &WaveFunction, chi: &WaveFunction) -> Result<Complex64> {
    ensure_compatible(phi, chi)?;
    let sum: Complex64 = phi
        .amplitudes()
        .iter()
        .zip(chi.amplitudes())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * phi.measure())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: GridSpec, center: f64, sigma: f64) -> WaveFunction {
        WaveFunction::from_fn(grid, Representation::Position, |x| {
            Complex64::new((-(x - center).powi(2) / (4.0 * sigma * sigma)).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(GridSpec::new(10.0, 8).is_err());
        assert!(GridSpec::new(10.0, 100).is_err());
        assert!(GridSpec::new(0.0, 64).is_err());
        assert!(GridSpec::new(f64::NAN, 64).is_err());
        let g = GridSpec::new(10.0, 64).unwrap();
        assert_eq!(g.position(32), 0.0);
        assert!((g.momentum_spacing() - 2.0 * PI / 10.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_transforms_to_half_width() {
        let grid = GridSpec::new(40.0, 1024).unwrap();
        let psi = gaussian(grid, 0.0, 1.0);
        let phi = psi.to_momentum().unwrap();
        let m = moments(&phi).unwrap();
        assert!(m.mean.abs() < 1e-10);
        assert!((m.std_dev - 0.5).abs() < 1e-6, "{}", m.std_dev);
        // analytic amplitude (2/π)^{1/4} e^{-p²} for σ_Q = 1
        let m0 = grid.n_points() / 2;
        let expected = (2.0 / PI).powf(0.25);
        assert!((phi.amplitudes()[m0].re - expected).abs() < 1e-10);
        assert!(phi.amplitudes()[m0].im.abs() < 1e-12);
    }

    #[test]
    fn carrier_shifts_momentum() {
        let grid = GridSpec::new(40.0, 1024).unwrap();
        let k0 = 5.0 * grid.momentum_spacing();
        let psi = WaveFunction::from_fn(grid, Representation::Position, |x| {
            Complex64::from_polar((-x * x / 4.0).exp(), k0 * x / HBAR)
        })
        .unwrap();
        let base = gaussian(grid, 0.0, 1.0).to_momentum().unwrap();
        let shifted = psi.to_momentum().unwrap();
        for m in 5..grid.n_points() {
            assert!((shifted.amplitudes()[m] - base.amplitudes()[m - 5]).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let grid = GridSpec::new(30.0, 256).unwrap();
        let psi = WaveFunction::from_fn(grid, Representation::Position, |x| {
            Complex64::from_polar((-(x - 1.0).powi(2) / 3.0).exp(), 0.7 * x + 0.1 * x * x)
        })
        .unwrap();
        let phi = psi.to_momentum().unwrap();
        assert!((phi.norm_sqr() - 1.0).abs() < 1e-12);
        let back = phi.to_position().unwrap();
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn wrong_representation_is_rejected() {
        let grid = GridSpec::new(40.0, 256).unwrap();
        let psi = gaussian(grid, 0.0, 1.0);
        assert!(matches!(psi.to_position(), Err(Error::ContractViolation(_))));
        let phi = psi.to_momentum().unwrap();
        assert!(matches!(phi.to_momentum(), Err(Error::ContractViolation(_))));
        assert!(overlap(&psi, &phi).is_err());
    }

    #[test]
    fn moments_of_gaussian_and_top_hat() {
        let grid = GridSpec::new(40.0, 2048).unwrap();
        let m = moments(&gaussian(grid, 2.0, 0.7)).unwrap();
        assert!((m.mean - 2.0).abs() < 1e-6);
        assert!((m.std_dev - 0.7).abs() < 1e-6);

        let flat = WaveFunction::from_fn(grid, Representation::Position, |_| Complex64::new(1.0, 0.0))
            .unwrap();
        let m = moments(&flat).unwrap();
        // discrete uniform on n points: var = (n²-1)dx²/12, shifted mean -dx/2
        let l = grid.length();
        assert!((m.std_dev - l / 12f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn symmetric_state_has_zero_mean() {
        let grid = GridSpec::new(40.0, 1024).unwrap();
        let psi = WaveFunction::from_fn(grid, Representation::Position, |x| {
            Complex64::new((-(x - 3.0).powi(2)).exp() + (-(x + 3.0).powi(2)).exp(), 0.0)
        })
        .unwrap();
        // sample n/2 is x = 0 but sample 0 (x = -L/2) has no mirror; it is ~0
        assert!(moments(&psi).unwrap().mean.abs() < 1e-10);
    }

    #[test]
    fn overlap_properties() {
        let grid = GridSpec::new(80.0, 1024).unwrap();
        let a = gaussian(grid, -5.0, 0.5);
        let b = gaussian(grid, 5.0, 0.5);
        assert!((overlap(&a, &a).unwrap() - 1.0).norm() < 1e-12);
        assert!(overlap(&a, &b).unwrap().norm() < 1e-10);

        let c = WaveFunction::from_fn(grid, Representation::Position, |x| {
            Complex64::from_polar((-(x - 0.5).powi(2) / 2.0).exp(), 0.3 * x)
        })
        .unwrap();
        let d = gaussian(grid, -0.5, 1.2);
        let pos = overlap(&c, &d).unwrap();
        let mom = overlap(&c.to_momentum().unwrap(), &d.to_momentum().unwrap()).unwrap();
        assert!((pos - mom).norm() < 1e-10);
        assert!(pos.norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn snapping_and_nearest_index() {
        let grid = GridSpec::new(2.0 * PI * 4.0, 64).unwrap();
        assert_eq!(grid.momentum_spacing(), 0.25);
        assert_eq!(grid.snap_momentum(1.1), (4, 1.0));
        assert_eq!(grid.snap_momentum(-0.6), (-2, -0.5));
        assert_eq!(grid.nearest_index(Representation::Position, 0.0), Some(32));
        assert_eq!(grid.nearest_index(Representation::Position, 1e6), None);
    }
}
