//! Brute-force reference for the closed-form emission module.
//!
//! The photon field is discretized into explicit modes (direction ×
//! frequency × polarization) and the atom→photon mapping coefficients are
//! evaluated literally from a dense Schur factorization `J = Q T Q†`. The
//! resolvent `(iδ − J)⁻¹ = Q (iδ − T)⁻¹ Q†` needs only triangular solves, so
//! neither the Fourier structure of `J` nor its eigenvectors are used.
//!
//! Frequencies are integrated on a finite band `[−W, W]` around `ω_L` with
//! a flat density of states, the same approximation the closed forms make.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::atomic_states::{SpinWave, TwoExcitationAmplitude};
use crate::dipole_kernel::{build_decay_matrix, LaserDrive, RATE_FLOOR, SINGLE_ATOM_RATE, WAVENUMBER};
use crate::emission::{IntensityMap, MapSource};
use crate::error::{invalid, Error, Result};
use crate::geometry::{gauss_legendre, AngularGrid, Direction, RingLattice, Vec3};
use crate::numeric::{cis, NeumaierSum};

/// Minimum band half-width in units of `Γ_col`.
pub const MIN_BANDWIDTH_FACTOR: f64 = 50.0;

/// Default band half-width in units of `Γ_col`.
pub const DEFAULT_BANDWIDTH_FACTOR: f64 = 200.0;

const NODES_PER_PANEL: usize = 8;

/// `Q` and upper-triangular `T` with `J = Q T Q†`.
fn schur(j: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let s = j
        .clone()
        .try_schur(1e-14, 10_000)
        .ok_or(Error::EigensolverFailed)?;
    Ok(s.unpack())
}

/// Eigenvalues of a general complex matrix (diagonal of its Schur form).
pub fn dense_eigenvalues(j: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let (_, t) = schur(j)?;
    Ok(t.diagonal().iter().copied().collect())
}

/// The decay matrix of a lattice in dense Schur form.
#[derive(Debug, Clone)]
pub struct DenseSystem {
    positions: Vec<Vec3>,
    q: DMatrix<Complex64>,
    t: DMatrix<Complex64>,
}

impl DenseSystem {
    pub fn new(lattice: &RingLattice) -> Result<Self> {
        let j = build_decay_matrix(lattice).j();
        let (q, mut t) = schur(&j)?;
        for k in 0..t.nrows() {
            if t[(k, k)].re < RATE_FLOOR {
                t[(k, k)].re = RATE_FLOOR;
            }
        }
        Ok(DenseSystem {
            positions: lattice.positions().to_vec(),
            q,
            t,
        })
    }

    pub fn dim(&self) -> usize {
        self.positions.len()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.t.diagonal().iter().copied().collect()
    }

    /// Largest collective decay rate.
    pub fn collectivity(&self) -> f64 {
        self.t.diagonal().iter().map(|d| d.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Row vector `wᵀ (iδ − T)⁻¹`, by forward substitution on the transpose.
    fn left_solve(&self, w: &DVector<Complex64>, delta: f64) -> DVector<Complex64> {
        let n = self.dim();
        let shift = Complex64::new(0.0, delta);
        let mut x = DVector::zeros(n);
        for i in 0..n {
            let mut acc = w[i];
            for k in 0..i {
                acc += self.t[(k, i)] * x[k];
            }
            x[i] = acc / (shift - self.t[(i, i)]);
        }
        x
    }

    /// Site-resolved emission amplitudes into direction `dir` at each
    /// frequency: row `i` holds `Σ_γ e^{−iq·r_γ} [(iδ_i − J)⁻¹]_{γα} e^{ik_L·r_α}`.
    fn site_amplitudes(&self, drive: &LaserDrive, dir: &Direction, freqs: &FrequencyGrid) -> DMatrix<Complex64> {
        let q = dir.unit() * WAVENUMBER;
        let kl = drive.wavevector();
        let outgoing = DVector::from_iterator(self.dim(), self.positions.iter().map(|r| cis(-q.dot(r))));
        let w = self.q.transpose() * outgoing;
        let imprint = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.positions.iter().map(|r| cis(kl.dot(r))),
        ));
        let back = self.q.adjoint() * imprint;
        let mut rows = DMatrix::zeros(freqs.len(), self.dim());
        for (i, &delta) in freqs.nodes().iter().enumerate() {
            let x = self.left_solve(&w, delta);
            rows.set_row(i, &(x.transpose() * &back));
        }
        rows
    }
}

/// Quadrature over the detuning `δ = ω − ω_L` on `[−W, W]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    bandwidth: f64,
    breakpoints: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl FrequencyGrid {
    /// Gauss–Legendre panels between sorted breakpoints.
    fn from_breakpoints(mut breakpoints: Vec<f64>, per_panel: usize) -> Self {
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        let (x, w) = gauss_legendre(per_panel);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in breakpoints.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        let bandwidth = breakpoints.last().copied().unwrap_or(0.0);
        FrequencyGrid {
            bandwidth,
            breakpoints,
            nodes,
            weights,
        }
    }

    /// Evenly spaced panels of `NODES_PER_PANEL` points; `n_nodes` is
    /// rounded up to a whole number of panels.
    pub fn uniform(bandwidth: f64, n_nodes: usize) -> Result<Self> {
        if bandwidth.is_nan() || bandwidth <= 0.0 || n_nodes == 0 {
            return Err(invalid("frequency band and node count must be positive"));
        }
        let panels = n_nodes.div_ceil(NODES_PER_PANEL);
        let breaks = (0..=panels)
            .map(|i| -bandwidth + 2.0 * bandwidth * i as f64 / panels as f64)
            .collect();
        Ok(Self::from_breakpoints(breaks, NODES_PER_PANEL))
    }

    /// Panels refined geometrically towards every Lorentzian centre
    /// `Im λ` on the scale of its width `Re λ`.
    pub fn graded(eigenvalues: &[Complex64], bandwidth: f64) -> Result<Self> {
        if bandwidth.is_nan() || bandwidth <= 0.0 {
            return Err(invalid("frequency band must be positive"));
        }
        let mut breaks = vec![-bandwidth, bandwidth];
        for lambda in eigenvalues {
            let centre = lambda.im;
            let width = lambda.re.max(RATE_FLOOR);
            if centre.abs() < bandwidth {
                breaks.push(centre);
            }
            let mut step = 0.25 * width;
            while step < 2.0 * bandwidth {
                for x in [centre - step, centre + step] {
                    if x.abs() < bandwidth {
                        breaks.push(x);
                    }
                }
                step *= 2.0;
            }
        }
        Ok(Self::from_breakpoints(breaks, NODES_PER_PANEL))
    }

    /// Every panel split in half.
    pub fn refined(&self) -> Self {
        let mut breaks = self.breakpoints.clone();
        breaks.extend(self.breakpoints.windows(2).map(|p| 0.5 * (p[0] + p[1])));
        Self::from_breakpoints(breaks, NODES_PER_PANEL)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Explicit photon modes: directions, frequencies and two transverse
/// polarizations per direction.
#[derive(Debug, Clone)]
pub struct ModeGrid {
    pub directions: AngularGrid,
    pub frequencies: FrequencyGrid,
}

impl ModeGrid {
    /// Graded band of half-width `DEFAULT_BANDWIDTH_FACTOR · Γ_col`.
    pub fn for_system(directions: AngularGrid, system: &DenseSystem) -> Result<Self> {
        let w = DEFAULT_BANDWIDTH_FACTOR * system.collectivity();
        Ok(ModeGrid {
            directions,
            frequencies: FrequencyGrid::graded(&system.eigenvalues(), w)?,
        })
    }

    pub fn polarizations(&self, node: usize) -> [Vec3; 2] {
        self.directions.nodes()[node].polarization_basis()
    }
}

fn check_bandwidth(system: &DenseSystem, freqs: &FrequencyGrid) -> Result<()> {
    let required = MIN_BANDWIDTH_FACTOR * system.collectivity();
    if freqs.bandwidth() < required {
        return Err(Error::InsufficientBandwidth {
            bandwidth: freqs.bandwidth(),
            required,
        });
    }
    Ok(())
}

/// `Σ_λ K_qλ²` for the `z` dipole.
fn polarization_weight(dir: &Direction) -> f64 {
    let k2 = 3.0 * SINGLE_ATOM_RATE / (8.0 * PI * PI);
    dir.polarization_basis().iter().map(|e| k2 * e.z * e.z).sum()
}

/// Photon number per solid angle from a single excitation, summed over
/// polarizations and integrated over the frequency band.
pub fn oracle_single_intensity(
    lattice: &RingLattice,
    drive: &LaserDrive,
    wave: &SpinWave,
    modes: &ModeGrid,
) -> Result<IntensityMap> {
    if wave.len() != lattice.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: lattice.n_sites(),
            found: wave.len(),
        });
    }
    let system = DenseSystem::new(lattice)?;
    check_bandwidth(&system, &modes.frequencies)?;
    let source = MapSource {
        observable: "oracle single-photon intensity".to_string(),
        n_sites: lattice.n_sites(),
        spacing: lattice.spacing(),
        theta_l: drive.direction().theta(),
        phi_l: drive.direction().phi(),
    };
    let c = wave.amplitudes();
    IntensityMap::evaluate(&modes.directions, source, |dir| {
        let amps = system.site_amplitudes(drive, dir, &modes.frequencies) * c;
        let mut acc = NeumaierSum::default();
        for (a, w) in amps.iter().zip(modes.frequencies.weights()) {
            acc.add(w * a.norm_sqr());
        }
        polarization_weight(dir) * acc.total()
    })
}

/// Joint photon density `G(Ω_A, Ω_B)` from the symmetrized two-photon
/// amplitude `T = 2 Σ ψ_kk' g_k g_k'`, integrated over both frequencies.
pub fn oracle_pair_correlation(
    lattice: &RingLattice,
    drive: &LaserDrive,
    psi: &TwoExcitationAmplitude,
    freqs: &FrequencyGrid,
    dir_a: &Direction,
    dir_b: &Direction,
) -> Result<f64> {
    let system = DenseSystem::new(lattice)?;
    oracle_pair_correlation_with(&system, drive, psi, freqs, dir_a, dir_b)
}

/// As [`oracle_pair_correlation`] with a precomputed factorization.
pub fn oracle_pair_correlation_with(
    system: &DenseSystem,
    drive: &LaserDrive,
    psi: &TwoExcitationAmplitude,
    freqs: &FrequencyGrid,
    dir_a: &Direction,
    dir_b: &Direction,
) -> Result<f64> {
    if psi.n_sites() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: psi.n_sites(),
        });
    }
    check_bandwidth(system, freqs)?;
    let a = system.site_amplitudes(drive, dir_a, freqs);
    let b = system.site_amplitudes(drive, dir_b, freqs);
    let left = a * psi.psi();
    let weights = freqs.weights();
    const CHUNK: usize = 128;
    let partial: Vec<f64> = (0..freqs.len())
        .step_by(CHUNK)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&start| {
            let rows = CHUNK.min(freqs.len() - start);
            let x = left.rows(start, rows) * b.transpose();
            let mut acc = NeumaierSum::default();
            for i in 0..rows {
                let wi = weights[start + i];
                for (j, wj) in weights.iter().enumerate() {
                    acc.add(wi * wj * x[(i, j)].norm_sqr());
                }
            }
            acc.total()
        })
        .collect();
    let mut total = NeumaierSum::default();
    for p in partial {
        total.add(p);
    }
    Ok(4.0 * polarization_weight(dir_a) * polarization_weight(dir_b) * total.total())
}
