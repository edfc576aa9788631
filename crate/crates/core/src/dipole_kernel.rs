//! Dipole–dipole coupling kernels, the collective decay matrix `J = γ + iΩ`
//! and its analytic eigensystem on the ring.
//!
//! Units: `k_L = 2π` (lengths in laser wavelengths) and `Γ = 1`.

use std::f64::consts::PI;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::{Direction, RingLattice, Vec3};
use crate::numeric::cis;

/// Laser wavenumber `k_L` in inverse wavelengths.
pub const WAVENUMBER: f64 = 2.0 * PI;

/// Single-atom decay rate `Γ`.
pub const SINGLE_ATOM_RATE: f64 = 1.0;

/// Real parts of collective rates below this are treated as this value in
/// denominators.
pub const RATE_FLOOR: f64 = 1e-12 * SINGLE_ATOM_RATE;

/// Below this `κ` the `γ` kernel switches to its Taylor series.
const SERIES_CUTOFF: f64 = 0.1;

/// The classical drive mapping `|s⟩` to photons; fixes the wavevector
/// `k_L` that imprints phases on the atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserDrive {
    direction: Direction,
}

impl LaserDrive {
    pub fn new(theta_l: f64, phi_l: f64) -> Result<Self> {
        Ok(LaserDrive {
            direction: Direction::new(theta_l, phi_l)?,
        })
    }

    pub fn from_direction(direction: Direction) -> Self {
        LaserDrive { direction }
    }

    /// Drive along `+z`, perpendicular to the ring.
    pub fn perpendicular() -> Self {
        LaserDrive {
            direction: Direction::zenith(),
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn wavenumber(&self) -> f64 {
        WAVENUMBER
    }

    pub fn single_atom_rate(&self) -> f64 {
        SINGLE_ATOM_RATE
    }

    pub fn wavevector(&self) -> Vec3 {
        self.direction.unit() * WAVENUMBER
    }

    pub fn is_perpendicular(&self) -> bool {
        self.direction.theta().abs() < 1e-12
    }
}

/// Dissipative coupling `γ(κ)` between two dipoles separated by `κ = k_L r`,
/// with `cos_dr = d̂·r̂`. Returns `Γ` in the `κ → 0` limit.
pub fn gamma_pair(kappa: f64, cos_dr: f64) -> f64 {
    let k = kappa.abs();
    let c2 = cos_dr * cos_dr;
    let (radial, transverse) = if k < SERIES_CUTOFF {
        (near_field_series(k), sinc_series(k))
    } else {
        let (s, c) = k.sin_cos();
        (c / (k * k) - s / (k * k * k), s / k)
    };
    1.5 * SINGLE_ATOM_RATE * ((1.0 - 3.0 * c2) * radial + (1.0 - c2) * transverse)
}

/// Coherent (exchange) coupling `Ω(κ)`; diverges at `κ = 0`, which is
/// rejected.
pub fn omega_pair(kappa: f64, cos_dr: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid(format!("omega_pair needs kappa > 0, got {kappa}")));
    }
    let k = kappa;
    let c2 = cos_dr * cos_dr;
    let (s, c) = k.sin_cos();
    let radial = s / (k * k) + c / (k * k * k);
    let transverse = c / k;
    Ok(1.5 * SINGLE_ATOM_RATE * ((1.0 - 3.0 * c2) * radial - (1.0 - c2) * transverse))
}

// cos κ/κ² − sin κ/κ³ = Σ_{n≥1} (−1)ⁿ 2n κ^{2n−2}/(2n+1)!
fn near_field_series(k: f64) -> f64 {
    let k2 = k * k;
    let mut sum = 0.0;
    let mut pow = 1.0;
    let mut fact = 6.0; // (2n+1)! at n = 1
    for n in 1..=6u32 {
        let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
        sum += sign * 2.0 * n as f64 * pow / fact;
        pow *= k2;
        let m = 2.0 * n as f64;
        fact *= (m + 2.0) * (m + 3.0);
    }
    sum
}

// sin κ/κ = Σ_{n≥0} (−1)ⁿ κ^{2n}/(2n+1)!
fn sinc_series(k: f64) -> f64 {
    let k2 = k * k;
    let mut sum = 0.0;
    let mut term = 1.0;
    for n in 0..6u32 {
        sum += term;
        let m = 2.0 * n as f64;
        term *= -k2 / ((m + 2.0) * (m + 3.0));
    }
    sum
}

/// Collective decay matrix `J = γ + iΩ` in units of `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayMatrix {
    gamma: DMatrix<f64>,
    omega: DMatrix<f64>,
}

impl DecayMatrix {
    /// Pairwise kernels for dipoles along `z` at arbitrary positions.
    ///
    /// Diagonal convention: `γ_αα = Γ` (the `κ → 0` limit) and `Ω_αα = 0`
    /// (the divergent self-energy is absorbed into the transition frequency).
    pub fn from_positions(positions: &[Vec3]) -> Self {
        let n = positions.len();
        let mut gamma = DMatrix::zeros(n, n);
        let mut omega = DMatrix::zeros(n, n);
        for a in 0..n {
            gamma[(a, a)] = SINGLE_ATOM_RATE;
            for b in (a + 1)..n {
                let r = positions[a] - positions[b];
                let dist = r.norm();
                let kappa = WAVENUMBER * dist;
                let cos_dr = if dist > 0.0 { r.z / dist } else { 0.0 };
                let g = gamma_pair(kappa, cos_dr);
                // Coincident sites carry no finite exchange term.
                let o = omega_pair(kappa, cos_dr).unwrap_or(0.0);
                gamma[(a, b)] = g;
                gamma[(b, a)] = g;
                omega[(a, b)] = o;
                omega[(b, a)] = o;
            }
        }
        DecayMatrix { gamma, omega }
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn j(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim(), self.dim(), |a, b| {
            Complex64::new(self.gamma[(a, b)], self.omega[(a, b)])
        })
    }

    /// Largest deviation between row `r+1` and row `r` shifted right by one.
    pub fn circulant_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for m in [&self.gamma, &self.omega] {
            for r in 0..n.saturating_sub(1) {
                for c in 0..n {
                    let shifted = m[(r, c)];
                    let next = m[(r + 1, (c + 1) % n)];
                    worst = worst.max((shifted - next).abs());
                }
            }
        }
        worst
    }
}

pub fn build_decay_matrix(lattice: &RingLattice) -> DecayMatrix {
    DecayMatrix::from_positions(lattice.positions())
}

/// Fourier eigenbasis of a circulant `J`: `M_γk = e^{iφ_k(γ−1)}/√N` and
/// `D_k = Σ_n J_{1n} e^{iφ_k(n−1)}`.
#[derive(Debug, Clone)]
pub struct CollectiveModeBasis {
    vectors: DMatrix<Complex64>,
    eigenvalues: Vec<Complex64>,
    clamped: Vec<usize>,
}

impl CollectiveModeBasis {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Modes whose decay rate fell below [`RATE_FLOOR`].
    pub fn clamped_modes(&self) -> &[usize] {
        &self.clamped
    }

    /// `D_k` with its real part floored at [`RATE_FLOOR`].
    pub fn damped_eigenvalue(&self, k: usize) -> Complex64 {
        let d = self.eigenvalues[k];
        Complex64::new(d.re.max(RATE_FLOOR), d.im)
    }

    /// `D_m + D_n*`, the residue denominator of the frequency integrals.
    pub fn pair_denominator(&self, m: usize, n: usize) -> Complex64 {
        self.damped_eigenvalue(m) + self.damped_eigenvalue(n).conj()
    }

    /// `M diag(D) M†`
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        &self.vectors * d * self.vectors.adjoint()
    }
}

pub fn circulant_modes(decay: &DecayMatrix) -> Result<CollectiveModeBasis> {
    let residual = decay.circulant_residual();
    if residual > 1e-9 {
        return Err(Error::NotCirculant { residual });
    }
    let n = decay.dim();
    let norm = 1.0 / (n as f64).sqrt();
    let mode_angle = |k: usize| 2.0 * PI * k as f64 / n as f64;
    let vectors = DMatrix::from_fn(n, n, |gamma, k| cis(mode_angle(k) * gamma as f64) * norm);
    let j = decay.j();
    let eigenvalues: Vec<Complex64> = (0..n)
        .map(|k| {
            (0..n)
                .map(|col| j[(0, col)] * cis(mode_angle(k) * col as f64))
                .sum()
        })
        .collect();
    let clamped: Vec<usize> = eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, d)| d.re < RATE_FLOOR)
        .map(|(k, _)| k)
        .collect();
    for &k in &clamped {
        warn!(
            "collective mode {k} has decay rate {:.3e} below floor; clamped to {RATE_FLOOR:e}",
            eigenvalues[k].re
        );
    }
    Ok(CollectiveModeBasis {
        vectors,
        eigenvalues,
        clamped,
    })
}

/// `Γ_col = max_k Re D_k`.
pub fn degree_of_collectivity(basis: &CollectiveModeBasis) -> f64 {
    basis
        .eigenvalues()
        .iter()
        .map(|d| d.re)
        .fold(f64::NEG_INFINITY, f64::max)
}
