//! Ring-lattice site positions, emission directions and solid-angle grids.
//!
//! Lengths are measured in units of the laser wavelength, so the laser
//! wavenumber is `2π`.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{invalid, Result};

pub type Vec3 = Vector3<f64>;

/// `N` atoms equally spaced on a circle of radius `R` in the `xy`-plane.
///
/// The spacing `a` is the arc length between neighbours, so `R = aN/2π`
/// exactly and neighbouring chord distances are slightly below `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingLattice {
    n_sites: usize,
    spacing: f64,
    radius: f64,
    positions: Vec<Vec3>,
}

impl RingLattice {
    pub fn new(n_sites: usize, spacing: f64) -> Result<Self> {
        build_ring(n_sites, spacing)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Azimuth `φ_α = 2π(α-1)/N` of site `α` (zero-based here).
    pub fn site_angle(&self, site: usize) -> f64 {
        2.0 * PI * site as f64 / self.n_sites as f64
    }

    /// Chord distance between two sites.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        (self.positions[a] - self.positions[b]).norm()
    }
}

/// Builds the ring with `R = spacing·n_sites/2π`.
pub fn build_ring(n_sites: usize, spacing: f64) -> Result<RingLattice> {
    if n_sites == 0 {
        return Err(invalid("n_sites must be at least 1"));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(invalid(format!("spacing must be positive, got {spacing}")));
    }
    let radius = spacing * n_sites as f64 / (2.0 * PI);
    let positions = (0..n_sites)
        .map(|alpha| {
            let phi = 2.0 * PI * alpha as f64 / n_sites as f64;
            Vec3::new(radius * phi.cos(), radius * phi.sin(), 0.0)
        })
        .collect();
    Ok(RingLattice {
        n_sites,
        spacing,
        radius,
        positions,
    })
}

/// A direction on the unit sphere, polar angle `theta` from `+z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    /// `theta` must lie in `[0, π]`; `phi` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(invalid("direction angles must be finite"));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(invalid(format!("theta must lie in [0, pi], got {theta}")));
        }
        Ok(Self::wrapped(theta, phi))
    }

    pub(crate) fn wrapped(theta: f64, phi: f64) -> Self {
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Direction { theta, phi }
    }

    pub fn zenith() -> Self {
        Direction {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vec3::new(st * cp, st * sp, ct)
    }

    /// Transverse polarization pair `(θ̂, φ̂)`.
    pub fn polarization_basis(&self) -> [Vec3; 2] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [Vec3::new(ct * cp, ct * sp, -st), Vec3::new(-sp, cp, 0.0)]
    }
}

/// Product quadrature on the sphere: Gauss–Legendre in `cos θ` crossed with
/// a uniform azimuthal rule.
///
/// Nodes are stored theta-major: node `i·n_phi + j` has polar index `i`
/// (theta ascending) and azimuthal index `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    n_theta: usize,
    n_phi: usize,
    thetas: Vec<f64>,
    theta_weights: Vec<f64>,
    nodes: Vec<Direction>,
    weights: Vec<f64>,
}

impl AngularGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        build_angular_grid(n_theta, n_phi)
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Direction] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Polar node angles, ascending.
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.n_phi).map(|j| self.phi_at(j)).collect()
    }

    pub fn phi_at(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    pub fn phi_step(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    pub fn index(&self, i_theta: usize, i_phi: usize) -> usize {
        i_theta * self.n_phi + i_phi
    }

    /// Polar spacing around node `i_theta` (mean of the adjacent gaps).
    pub fn theta_step(&self, i_theta: usize) -> f64 {
        let t = &self.thetas;
        let n = t.len();
        if n < 2 {
            PI
        } else if i_theta == 0 {
            t[1] - t[0]
        } else if i_theta + 1 >= n {
            t[n - 1] - t[n - 2]
        } else {
            0.5 * (t[i_theta + 1] - t[i_theta - 1])
        }
    }

    /// `∫ f dΩ` by the grid rule.
    pub fn integrate<F: FnMut(&Direction) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = crate::numeric::NeumaierSum::default();
        for (node, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(node));
        }
        acc.total()
    }

    /// Weighted sum of precomputed node values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        crate::numeric::weighted_sum(&self.weights, values)
    }
}

pub fn build_angular_grid(n_theta: usize, n_phi: usize) -> Result<AngularGrid> {
    if n_theta < 2 {
        return Err(invalid(format!("n_theta must be at least 2, got {n_theta}")));
    }
    if n_phi < 4 {
        return Err(invalid(format!("n_phi must be at least 4, got {n_phi}")));
    }
    let (xs, ws) = gauss_legendre(n_theta);
    // xs ascending in cos θ, so reverse for ascending θ.
    let thetas: Vec<f64> = xs.iter().rev().map(|x| x.acos()).collect();
    let theta_weights: Vec<f64> = ws.iter().rev().copied().collect();
    let dphi = 2.0 * PI / n_phi as f64;

    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (theta, wt) in thetas.iter().zip(&theta_weights) {
        for j in 0..n_phi {
            nodes.push(Direction {
                theta: *theta,
                phi: dphi * j as f64,
            });
            weights.push(wt * dphi);
        }
    }
    Ok(AngularGrid {
        n_theta,
        n_phi,
        thetas,
        theta_weights,
        nodes,
        weights,
    })
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        xs[n / 2] = 0.0;
    }
    (xs, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
