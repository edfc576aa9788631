//! Angular photon observables in closed form.
//!
//! Everything is built on the direction-resolved, frequency-integrated
//! kernel in the collective-mode basis,
//!
//! ```text
//! K_mn(Ω) = (3Γ sin²θ / 4πN) · B_m(Ω) B_n(Ω)* / (D_m + D_n*)
//! ```
//!
//! where `B_n` is the discrete Fourier sum of the emission phases around the
//! ring. The frequency integral of the Lorentzian mode amplitudes is taken
//! over the whole real line with a flat density of states near `ω_L`, which
//! produces the `1/(D_m + D_n*)` residue factors; the same normalization
//! makes a single atom emit exactly one photon.
//!
//! Atomic amplitudes are carried into the mode basis by the dressing matrix
//! `A = M† diag(e^{i k_L·r_α})`, which absorbs the phases imprinted by the
//! mapping laser:
//!
//! * single excitation `c`: `ŝ = A c`, `I(Ω) = Σ_mn K_mn ŝ_m ŝ_n*`
//! * pair amplitude `ψ`: `ψ̂ = A ψ Aᵀ`, `I(Ω) = 4 Σ_mn K_mn (ψ̂ ψ̂†)_mn`
//! * joint detection: `G(Ω,Ω') = 4 Σ ψ̂_{mm'} ψ̂*_{nn'} K_mn(Ω) K_{m'n'}(Ω')`
//!
//! The pair intensity above is the same double sum as the site-basis form
//! `(3Γ sin²θ/πN²) Σ_mn B_m B_n*/(D_m + D_n*) Σ_jk C_jk e^{...}` with
//! `C = ψψ†`; `tests::pair_intensity_matches_site_basis_sum` checks this.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::atomic_states::{spin_wave, SpinWave, TwoExcitationAmplitude};
use crate::dipole_kernel::{
    build_decay_matrix, circulant_modes, CollectiveModeBasis, DecayMatrix, LaserDrive,
    SINGLE_ATOM_RATE, WAVENUMBER,
};
use crate::error::{invalid, Error, Result};
use crate::geometry::{AngularGrid, Direction, RingLattice, Vec3};
use crate::numeric::{bessel_j0, cis, NeumaierSum};

/// Largest negative round-off tolerated in intensities and correlations.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// Intensities below this make `g₂` undefined.
pub const G2_DENOMINATOR_FLOOR: f64 = 1e-14;

/// Dipole radiation prefactor `3Γ/4π`.
fn dipole_prefactor() -> f64 {
    3.0 * SINGLE_ATOM_RATE / (4.0 * PI)
}

/// `B_n(Ω) = Σ_γ e^{−i k_L R q̂·r̂_γ} e^{iφ_γ(n−1)}` with zero-based `n`.
pub fn geometric_factor_b(lattice: &RingLattice, drive: &LaserDrive, n: usize, dir: &Direction) -> Complex64 {
    let phases = emission_phases(lattice, drive.wavenumber(), dir);
    let count = lattice.n_sites();
    phases
        .iter()
        .enumerate()
        .map(|(g, p)| p * cis(2.0 * PI * (g * n % count) as f64 / count as f64))
        .sum()
}

/// All `B_n(Ω)` for `n = 0..N`.
pub fn geometric_factors(lattice: &RingLattice, dir: &Direction) -> DVector<Complex64> {
    let phases = emission_phases(lattice, WAVENUMBER, dir);
    let count = lattice.n_sites();
    let roots: Vec<Complex64> = (0..count)
        .map(|j| cis(2.0 * PI * j as f64 / count as f64))
        .collect();
    DVector::from_fn(count, |n, _| {
        phases
            .iter()
            .enumerate()
            .map(|(g, p)| p * roots[g * n % count])
            .sum()
    })
}

// e^{−i k R q̂·r̂_γ} for each site.
fn emission_phases(lattice: &RingLattice, k: f64, dir: &Direction) -> Vec<Complex64> {
    let kr = k * lattice.radius() * dir.theta().sin();
    (0..lattice.n_sites())
        .map(|g| cis(-kr * (dir.phi() - lattice.site_angle(g)).cos()))
        .collect()
}

/// Description of the inputs that produced a map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSource {
    pub observable: String,
    pub n_sites: usize,
    pub spacing: f64,
    pub theta_l: f64,
    pub phi_l: f64,
}

/// Photon number per solid angle sampled on a grid.
#[derive(Debug, Clone)]
pub struct IntensityMap {
    pub grid: AngularGrid,
    pub values: Vec<f64>,
    /// Grid quadrature of the values, `∫ I dΩ`.
    pub integral: f64,
    pub source: MapSource,
}

impl IntensityMap {
    /// Evaluates `f` at every node in parallel; node order is preserved.
    pub fn evaluate<F>(grid: &AngularGrid, source: MapSource, f: F) -> Result<Self>
    where
        F: Fn(&Direction) -> f64 + Sync,
    {
        let raw: Vec<f64> = grid.nodes().par_iter().map(&f).collect();
        let values = raw
            .into_iter()
            .enumerate()
            .map(|(node, v)| clamp_round_off(node, v))
            .collect::<Result<Vec<_>>>()?;
        let integral = grid.integrate_values(&values);
        Ok(IntensityMap {
            grid: grid.clone(),
            values,
            integral,
            source,
        })
    }

    pub fn value(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[self.grid.index(i_theta, i_phi)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// `g₂(Ω_ref, Ω)` over a grid; `None` where an intensity is too small.
#[derive(Debug, Clone)]
pub struct CorrelationMap {
    pub grid: AngularGrid,
    pub reference: Direction,
    pub values: Vec<Option<f64>>,
    pub undefined_count: usize,
    pub source: MapSource,
}

fn clamp_round_off(node: usize, v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -NEGATIVE_TOLERANCE {
        Ok(0.0)
    } else {
        Err(Error::NegativeValue { node, value: v })
    }
}

/// Closed-form emission from a ring driven by one laser.
#[derive(Debug, Clone)]
pub struct EmissionKernel {
    lattice: RingLattice,
    drive: LaserDrive,
    decay: DecayMatrix,
    basis: CollectiveModeBasis,
    dressing: DMatrix<Complex64>,
}

impl EmissionKernel {
    pub fn new(lattice: RingLattice, drive: LaserDrive) -> Result<Self> {
        let decay = build_decay_matrix(&lattice);
        let basis = circulant_modes(&decay)?;
        let k = drive.wavevector();
        let m = basis.vectors();
        let n = lattice.n_sites();
        let dressing = DMatrix::from_fn(n, n, |mode, site| {
            m[(site, mode)].conj() * cis(k.dot(&lattice.positions()[site]))
        });
        Ok(EmissionKernel {
            lattice,
            drive,
            decay,
            basis,
            dressing,
        })
    }

    pub fn lattice(&self) -> &RingLattice {
        &self.lattice
    }

    pub fn drive(&self) -> &LaserDrive {
        &self.drive
    }

    pub fn decay(&self) -> &DecayMatrix {
        &self.decay
    }

    pub fn basis(&self) -> &CollectiveModeBasis {
        &self.basis
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites()
    }

    fn source(&self, observable: &str) -> MapSource {
        MapSource {
            observable: observable.to_string(),
            n_sites: self.lattice.n_sites(),
            spacing: self.lattice.spacing(),
            theta_l: self.drive.direction().theta(),
            phi_l: self.drive.direction().phi(),
        }
    }

    /// `K(Ω)`, Hermitian and positive semidefinite.
    pub fn kernel_matrix(&self, dir: &Direction) -> DMatrix<Complex64> {
        let b = geometric_factors(&self.lattice, dir);
        let n = self.n_sites();
        let scale = dipole_prefactor() * dir.theta().sin().powi(2) / n as f64;
        DMatrix::from_fn(n, n, |m, k| {
            b[m] * b[k].conj() * scale / self.basis.pair_denominator(m, k)
        })
    }

    /// Mode-basis amplitude `ŝ = A c` of a single excitation.
    pub fn project_spin_wave(&self, wave: &SpinWave) -> Result<DVector<Complex64>> {
        self.check_len(wave.len())?;
        Ok(&self.dressing * wave.amplitudes())
    }

    /// Mode-basis amplitude `ψ̂ = A ψ Aᵀ`; the amplitude must be normalized.
    pub fn project_pair(&self, psi: &TwoExcitationAmplitude) -> Result<PairProjection> {
        self.check_len(psi.n_sites())?;
        let norm = psi.bosonic_norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized { norm });
        }
        let hat = &self.dressing * psi.psi() * self.dressing.transpose();
        let density = &hat * hat.adjoint();
        Ok(PairProjection { hat, density })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites(),
                found: len,
            });
        }
        Ok(())
    }

    /// Single-photon intensity from the uniform spin wave.
    pub fn single_photon_intensity(&self, dir: &Direction) -> f64 {
        let wave = spin_wave(self.n_sites()).expect("lattice has at least one site");
        let s = &self.dressing * wave.amplitudes();
        self.quadratic_form(&s, dir)
    }

    /// Single-photon intensity from an arbitrary spin wave.
    pub fn spin_wave_intensity(&self, wave: &SpinWave, dir: &Direction) -> Result<f64> {
        let s = self.project_spin_wave(wave)?;
        Ok(self.quadratic_form(&s, dir))
    }

    fn quadratic_form(&self, s: &DVector<Complex64>, dir: &Direction) -> f64 {
        let k = self.kernel_matrix(dir);
        (s.adjoint() * k.transpose() * s)[(0, 0)].re
    }

    pub fn pair_intensity(&self, psi: &TwoExcitationAmplitude, dir: &Direction) -> Result<f64> {
        Ok(self.project_pair(psi)?.intensity(self, dir))
    }

    pub fn pair_correlation_g(
        &self,
        psi: &TwoExcitationAmplitude,
        dir_a: &Direction,
        dir_b: &Direction,
    ) -> Result<f64> {
        Ok(self.project_pair(psi)?.joint(self, dir_a, dir_b))
    }

    /// `g₂ = G/(I I') − 1`, or `None` when either intensity is below
    /// [`G2_DENOMINATOR_FLOOR`].
    pub fn pair_correlation_g2(
        &self,
        psi: &TwoExcitationAmplitude,
        dir_a: &Direction,
        dir_b: &Direction,
    ) -> Result<Option<f64>> {
        let proj = self.project_pair(psi)?;
        let ia = proj.intensity(self, dir_a);
        let ib = proj.intensity(self, dir_b);
        if ia <= G2_DENOMINATOR_FLOOR || ib <= G2_DENOMINATOR_FLOOR {
            return Ok(None);
        }
        Ok(Some(proj.joint(self, dir_a, dir_b) / (ia * ib) - 1.0))
    }

    pub fn single_photon_map(&self, grid: &AngularGrid) -> Result<IntensityMap> {
        let wave = spin_wave(self.n_sites())?;
        let s = self.project_spin_wave(&wave)?;
        IntensityMap::evaluate(grid, self.source("single-photon intensity"), |d| {
            self.quadratic_form(&s, d)
        })
    }

    pub fn pair_intensity_map(&self, psi: &TwoExcitationAmplitude, grid: &AngularGrid) -> Result<IntensityMap> {
        let proj = self.project_pair(psi)?;
        IntensityMap::evaluate(grid, self.source("pair intensity"), |d| {
            proj.intensity(self, d)
        })
    }

    /// `G(Ω_ref, Ω)` over the grid.
    pub fn joint_detection_map(
        &self,
        psi: &TwoExcitationAmplitude,
        reference: &Direction,
        grid: &AngularGrid,
    ) -> Result<IntensityMap> {
        let proj = self.project_pair(psi)?;
        let conditioned = proj.conditioned(self, reference);
        IntensityMap::evaluate(grid, self.source("joint detection"), |d| {
            4.0 * elementwise_sum(&self.kernel_matrix(d), &conditioned)
        })
    }

    pub fn g2_map(
        &self,
        psi: &TwoExcitationAmplitude,
        reference: &Direction,
        grid: &AngularGrid,
    ) -> Result<CorrelationMap> {
        let proj = self.project_pair(psi)?;
        let i_ref = proj.intensity(self, reference);
        let conditioned = proj.conditioned(self, reference);
        let raw: Vec<(f64, f64)> = grid
            .nodes()
            .par_iter()
            .map(|d| {
                let k = self.kernel_matrix(d);
                let joint = 4.0 * elementwise_sum(&k, &conditioned);
                let intensity = 4.0 * elementwise_sum(&k, &proj.density);
                (joint, intensity)
            })
            .collect();
        let mut values = Vec::with_capacity(raw.len());
        let mut undefined = 0;
        for (node, (joint, intensity)) in raw.into_iter().enumerate() {
            let joint = clamp_round_off(node, joint)?;
            let intensity = clamp_round_off(node, intensity)?;
            if i_ref <= G2_DENOMINATOR_FLOOR || intensity <= G2_DENOMINATOR_FLOOR {
                undefined += 1;
                values.push(None);
            } else {
                values.push(Some(joint / (i_ref * intensity) - 1.0));
            }
        }
        Ok(CorrelationMap {
            grid: grid.clone(),
            reference: *reference,
            values,
            undefined_count: undefined,
            source: self.source("g2"),
        })
    }
}

/// A pair amplitude carried into the dressed mode basis.
#[derive(Debug, Clone)]
pub struct PairProjection {
    hat: DMatrix<Complex64>,
    density: DMatrix<Complex64>,
}

impl PairProjection {
    /// `ψ̂`
    pub fn amplitude(&self) -> &DMatrix<Complex64> {
        &self.hat
    }

    pub fn intensity(&self, kernel: &EmissionKernel, dir: &Direction) -> f64 {
        4.0 * elementwise_sum(&kernel.kernel_matrix(dir), &self.density)
    }

    /// `ψ̂ᵀ K(Ω_ref) ψ̂*`, so that `G(Ω_ref, Ω) = 4 Σ K(Ω) ∘ (this)`.
    fn conditioned(&self, kernel: &EmissionKernel, reference: &Direction) -> DMatrix<Complex64> {
        self.hat.transpose() * kernel.kernel_matrix(reference) * self.hat.conjugate()
    }

    pub fn joint(&self, kernel: &EmissionKernel, a: &Direction, b: &Direction) -> f64 {
        4.0 * elementwise_sum(&kernel.kernel_matrix(b), &self.conditioned(kernel, a))
    }
}

// Re Σ_mn X_mn Y_mn
fn elementwise_sum(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> f64 {
    let mut acc = NeumaierSum::default();
    for (a, b) in x.iter().zip(y.iter()) {
        acc.add((a * b).re);
    }
    acc.total()
}

/// Independent-atom limit for rings much larger than the wavelength:
/// `(3 sin²θ/8πN) |Σ_γ e^{i k_L R (q̂ − k̂_L)·r̂_γ}|²`.
pub fn far_field_intensity(lattice: &RingLattice, drive: &LaserDrive, dir: &Direction) -> f64 {
    let delta: Vec3 = dir.unit() - drive.direction().unit();
    let k = drive.wavenumber();
    let sum: Complex64 = lattice
        .positions()
        .iter()
        .map(|r| cis(k * delta.dot(r)))
        .sum();
    let n = lattice.n_sites() as f64;
    3.0 * dir.theta().sin().powi(2) / (8.0 * PI * n) * sum.norm_sqr()
}

/// Intensity for a drive along `+z`, where only the symmetric mode is
/// populated: `(3Γ/4πN) sin²θ/(D₁+D₁*) |Σ_γ e^{−i k_L R q̂·r̂_γ}|²`.
pub fn perpendicular_intensity(kernel: &EmissionKernel, dir: &Direction) -> Result<f64> {
    if !kernel.drive().is_perpendicular() {
        return Err(Error::DriveNotPerpendicular {
            theta: kernel.drive().direction().theta(),
        });
    }
    let lattice = kernel.lattice();
    let sum: Complex64 = emission_phases(lattice, WAVENUMBER, dir).iter().sum();
    let n = lattice.n_sites() as f64;
    let denom = kernel.basis().pair_denominator(0, 0).re;
    Ok(dipole_prefactor() / n * dir.theta().sin().powi(2) / denom * sum.norm_sqr())
}

/// Continuum-ring approximation of [`perpendicular_intensity`]:
/// `(3ΓN/4π) sin²θ/(D₁+D₁*) J₀²(k_L R sin θ)`.
pub fn bessel_approximation(lattice: &RingLattice, basis: &CollectiveModeBasis, dir: &Direction) -> f64 {
    let n = lattice.n_sites() as f64;
    let denom = basis.pair_denominator(0, 0).re;
    let j0 = bessel_j0(WAVENUMBER * lattice.radius() * dir.theta().sin());
    dipole_prefactor() * n * dir.theta().sin().powi(2) / denom * j0 * j0
}

/// One photon mode: direction, detuning `ω_q − ω_L` (units of `Γ`) and a
/// polarization index into [`Direction::polarization_basis`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMode {
    pub direction: Direction,
    pub detuning: f64,
    pub polarization: usize,
}

/// Coupling `K_qλ` with the dipole along `z`, normalized so that
/// `Σ_λ ∫ |g|² dω` is the photon number per solid angle.
pub fn coupling_constant(mode: &PhotonMode) -> Result<f64> {
    let pols = mode.direction.polarization_basis();
    let e = pols
        .get(mode.polarization)
        .ok_or_else(|| invalid(format!("polarization index {} not in 0..2", mode.polarization)))?;
    Ok((3.0 * SINGLE_ATOM_RATE / (8.0 * PI * PI)).sqrt() * e.z)
}

/// Atom→photon mapping coefficient for excitation at `atom` after the
/// emission has completed:
///
/// `g = −i K e^{−i(δt − k_L·r_α)} Σ_{γk} e^{−i q·r_γ} M_γk M⁻¹_kα / (iδ − D_k)`
///
/// `sites` are the atom positions (they may be rigidly displaced from the
/// lattice the basis was built on).
pub fn mapping_coefficient_g(
    basis: &CollectiveModeBasis,
    sites: &[Vec3],
    drive: &LaserDrive,
    mode: &PhotonMode,
    atom: usize,
    t: f64,
) -> Result<Complex64> {
    let n = basis.dim();
    if sites.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sites.len(),
        });
    }
    if atom >= n {
        return Err(invalid(format!("atom index {atom} out of range")));
    }
    let coupling = coupling_constant(mode)?;
    let q = mode.direction.unit() * WAVENUMBER;
    let m = basis.vectors();
    let i = Complex64::i();
    let delta = mode.detuning;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let resolvent = 1.0 / (i * delta - basis.damped_eigenvalue(k));
        let emitted: Complex64 = (0..n).map(|g| cis(-q.dot(&sites[g])) * m[(g, k)]).sum();
        sum += emitted * m[(atom, k)].conj() * resolvent;
    }
    let phase = cis(-(delta * t - drive.wavevector().dot(&sites[atom])));
    Ok(-i * coupling * phase * sum)
}
