//! Atomic resource states in the low-excitation (bosonic) approximation.
//!
//! Single excitations are complex site amplitudes. Double excitations are
//! symmetric `N×N` amplitude matrices `ψ` for the state
//! `Σ_{kk'} ψ_{kk'} σ_k σ_{k'} |0⟩`; treating the `σ` as bosons, the inner
//! product of two such states is `2 Σ conj(a_{kk'}) b_{kk'}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::numeric::cis;

/// A single delocalized excitation, `Σ_α c_α σ_α |0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinWave {
    amplitudes: DVector<Complex64>,
}

impl SpinWave {
    /// Normalizes `amplitudes`; rejects the zero vector.
    pub fn from_amplitudes(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("spin wave amplitudes must be non-zero"));
        }
        Ok(SpinWave {
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    /// Spin wave carrying angular momentum `l`: `e^{ilφ_k}/√N`.
    pub fn with_momentum(n_sites: usize, l: i64) -> Result<Self> {
        if n_sites == 0 {
            return Err(invalid("n_sites must be at least 1"));
        }
        let norm = 1.0 / (n_sites as f64).sqrt();
        let amplitudes = DVector::from_fn(n_sites, |k, _| {
            cis(l as f64 * 2.0 * PI * k as f64 / n_sites as f64) * norm
        });
        Ok(SpinWave { amplitudes })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }
}

/// Uniform spin wave `1/√N Σ_α σ_α |0⟩`.
pub fn spin_wave(n_sites: usize) -> Result<SpinWave> {
    SpinWave::with_momentum(n_sites, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeLabel {
    /// Rydberg-prepared pair state `Ψ_{2p}`.
    Pair(usize),
    /// Opposite-momentum pair mode `Ξ_l`.
    Mode(usize),
    Generic,
}

/// Symmetric two-excitation amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoExcitationAmplitude {
    psi: DMatrix<Complex64>,
    label: AmplitudeLabel,
}

impl TwoExcitationAmplitude {
    /// Accepts any square matrix, symmetrizing it as `(ψ + ψᵀ)/2`. No
    /// normalization is applied.
    pub fn generic(psi: DMatrix<Complex64>) -> Result<Self> {
        if !psi.is_square() || psi.nrows() == 0 {
            return Err(invalid("two-excitation amplitude must be a non-empty square matrix"));
        }
        let sym = (&psi + psi.transpose()) * Complex64::new(0.5, 0.0);
        Ok(TwoExcitationAmplitude {
            psi: sym,
            label: AmplitudeLabel::Generic,
        })
    }

    /// Both excitations in the same single-particle mode `u`:
    /// `ψ = u uᵀ/√2`, normalized.
    pub fn product(u: &SpinWave) -> Self {
        let a = u.amplitudes();
        let psi = a * a.transpose() * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        TwoExcitationAmplitude {
            psi,
            label: AmplitudeLabel::Generic,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.psi.nrows()
    }

    pub fn psi(&self) -> &DMatrix<Complex64> {
        &self.psi
    }

    pub fn label(&self) -> AmplitudeLabel {
        self.label
    }

    /// `2 Σ |ψ_{kk'}|²`
    pub fn bosonic_norm(&self) -> f64 {
        2.0 * self.psi.norm_squared()
    }

    /// Rescales so that the bosonic norm is one.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.bosonic_norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized { norm: n });
        }
        self.psi /= Complex64::new(n.sqrt(), 0.0);
        Ok(self)
    }
}

/// `ψ_{kk'} = (1/N) sin[(2π/N)(p − ½)|k − k'|]` for `1 ≤ p ≤ ⌊N/2⌋`.
pub fn pair_state(n_sites: usize, p: usize) -> Result<TwoExcitationAmplitude> {
    if p < 1 || p > n_sites / 2 {
        return Err(invalid(format!(
            "pair index p = {p} outside 1..={} for N = {n_sites}",
            n_sites / 2
        )));
    }
    let n = n_sites as f64;
    let freq = 2.0 * PI / n * (p as f64 - 0.5);
    let psi = DMatrix::from_fn(n_sites, n_sites, |k, kp| {
        Complex64::new((freq * k.abs_diff(kp) as f64).sin() / n, 0.0)
    });
    Ok(TwoExcitationAmplitude {
        psi,
        label: AmplitudeLabel::Pair(p),
    })
}

/// Two spin waves with angular momenta `+l` and `−l`:
/// `ψ_{kk'} = cos[l(φ_k − φ_{k'})]/(N√(1+δ))`, `0 ≤ l ≤ N/2`.
///
/// `δ` is one at `l = 0` and, for even `N`, at `l = N/2`, where the two spin
/// waves coincide and the state is a doubly occupied single mode.
pub fn momentum_mode_pair(n_sites: usize, l: usize) -> Result<TwoExcitationAmplitude> {
    if n_sites == 0 {
        return Err(invalid("n_sites must be at least 1"));
    }
    if 2 * l > n_sites {
        return Err(invalid(format!(
            "mode index l = {l} outside 0..={} for N = {n_sites}",
            n_sites / 2
        )));
    }
    let n = n_sites as f64;
    let degenerate = l == 0 || 2 * l == n_sites;
    let scale = if degenerate {
        1.0 / (n * 2f64.sqrt())
    } else {
        1.0 / n
    };
    let psi = DMatrix::from_fn(n_sites, n_sites, |k, kp| {
        let dphi = 2.0 * PI * (k as f64 - kp as f64) / n;
        Complex64::new((l as f64 * dphi).cos() * scale, 0.0)
    });
    Ok(TwoExcitationAmplitude {
        psi,
        label: AmplitudeLabel::Mode(l),
    })
}

/// `⟨a|b⟩ = 2 Σ_{kk'} conj(a_{kk'}) b_{kk'}`.
pub fn bosonic_overlap(a: &TwoExcitationAmplitude, b: &TwoExcitationAmplitude) -> Result<Complex64> {
    if a.n_sites() != b.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: a.n_sites(),
            found: b.n_sites(),
        });
    }
    let sum: Complex64 = a
        .psi
        .iter()
        .zip(b.psi.iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(sum * 2.0)
}

/// Overlaps `ξ_{pl} = ⟨Ξ_l|Ψ_{2p}⟩` for `l = 0 ..= N/2`.
pub fn mode_decomposition(n_sites: usize, p: usize) -> Result<Vec<Complex64>> {
    let target = pair_state(n_sites, p)?;
    (0..=n_sites / 2)
        .map(|l| bosonic_overlap(&momentum_mode_pair(n_sites, l)?, &target))
        .collect()
}

/// Rydberg excitation parameters (van-der-Waals `C₆`, single-atom Rabi
/// frequency `Ω_gr`), in any consistent units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparationParams {
    c6: f64,
    rabi_gr: f64,
}

impl PreparationParams {
    pub fn new(c6: f64, rabi_gr: f64) -> Result<Self> {
        if !(c6.is_finite() && c6 > 0.0 && rabi_gr.is_finite() && rabi_gr > 0.0) {
            return Err(invalid("C6 and the Rabi frequency must be positive"));
        }
        Ok(PreparationParams { c6, rabi_gr })
    }

    pub fn c6(&self) -> f64 {
        self.c6
    }

    pub fn rabi_gr(&self) -> f64 {
        self.rabi_gr
    }
}

/// `r_b = (C₆/Ω_gr)^{1/6}`
pub fn blockade_radius(params: &PreparationParams) -> f64 {
    (params.c6 / params.rabi_gr).powf(1.0 / 6.0)
}

/// Collective Rabi frequency `√N Ω_gr` of a fully blockaded ensemble and the
/// duration `π/Ω` of the pulse that prepares the spin wave.
pub fn collective_rabi(params: &PreparationParams, n_sites: usize) -> (f64, f64) {
    let rabi = (n_sites as f64).sqrt() * params.rabi_gr;
    (rabi, PI / rabi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn uniform_spin_waves() {
        let one = spin_wave(1).unwrap();
        assert_abs_diff_eq!(one.amplitudes()[0].re, 1.0, epsilon = 1e-15);
        let four = spin_wave(4).unwrap();
        for a in four.amplitudes().iter() {
            assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
        for n in [1usize, 2, 7, 33] {
            assert_abs_diff_eq!(spin_wave(n).unwrap().norm_squared(), 1.0, epsilon = 1e-12);
        }
        assert!(spin_wave(0).is_err());
    }

    #[test]
    fn pair_state_entries() {
        let psi = pair_state(40, 10).unwrap();
        for k in 0..40 {
            assert_eq!(psi.psi()[(k, k)].norm(), 0.0);
        }
        let expected = (2.0 * PI * 9.5 / 40.0).sin() / 40.0;
        assert_abs_diff_eq!(psi.psi()[(0, 1)].re, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.psi()[(1, 0)].re, expected, epsilon = 1e-15);
        assert_eq!(psi.label(), AmplitudeLabel::Pair(10));
        assert!(pair_state(40, 0).is_err());
        assert!(pair_state(40, 21).is_err());
        assert!(pair_state(3, 2).is_err());
    }

    // The amplitude depends on |k−k'| only through a function that is
    // periodic in N, so every pair state is circulant.
    #[test]
    fn pair_state_is_circulant() {
        let psi = pair_state(11, 3).unwrap();
        let m = psi.psi();
        for r in 0..10 {
            for c in 0..11 {
                assert_abs_diff_eq!(m[(r, c)].re, m[(r + 1, (c + 1) % 11)].re, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn momentum_modes() {
        let xi0 = momentum_mode_pair(6, 0).unwrap();
        for v in xi0.psi().iter() {
            assert_abs_diff_eq!(v.re, 1.0 / (6.0 * 2f64.sqrt()), epsilon = 1e-15);
        }
        for n in [5usize, 8, 12, 40] {
            for l in 0..=n / 2 {
                let a = momentum_mode_pair(n, l).unwrap();
                let norm = bosonic_overlap(&a, &a).unwrap();
                assert_abs_diff_eq!(norm.re, 1.0, epsilon = 1e-10);
                for lp in 0..l {
                    let b = momentum_mode_pair(n, lp).unwrap();
                    assert_abs_diff_eq!(bosonic_overlap(&a, &b).unwrap().norm(), 0.0, epsilon = 1e-10);
                }
            }
        }
        assert!(momentum_mode_pair(6, 4).is_err());
    }

    #[test]
    fn zero_mode_is_doubly_occupied_uniform_wave() {
        let prod = TwoExcitationAmplitude::product(&spin_wave(9).unwrap());
        let xi0 = momentum_mode_pair(9, 0).unwrap();
        assert_abs_diff_eq!((prod.psi() - xi0.psi()).camax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn overlap_rejects_mismatched_sizes() {
        let a = pair_state(10, 2).unwrap();
        let b = pair_state(12, 2).unwrap();
        assert!(bosonic_overlap(&a, &b).is_err());
    }

    #[test]
    fn p1_is_mostly_zero_mode() {
        let xi = mode_decomposition(40, 1).unwrap();
        let w0 = xi[0].norm_sqr();
        assert!((w0 - 0.8).abs() < 0.05, "|xi_10|^2 = {w0}");
        let (lmax, _) = xi
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap();
        assert_eq!(lmax, 0);
    }

    // The two dominant modes sit at l = p−1 and l = p with opposite signs.
    // Their weights approach 4/π² each (the half-integer sine spreads as
    // 1/(l − p + ½)² over l), not 1/2.
    #[test]
    fn higher_pairs_split_between_neighbouring_modes() {
        for p in [5usize, 10] {
            let xi = mode_decomposition(40, p).unwrap();
            let mut order: Vec<usize> = (0..xi.len()).collect();
            order.sort_by(|a, b| xi[*b].norm_sqr().total_cmp(&xi[*a].norm_sqr()));
            let mut top = [order[0], order[1]];
            top.sort();
            assert_eq!(top, [p - 1, p]);
            assert!(xi[p - 1].re * xi[p].re < 0.0);
            let pair_weight = xi[p - 1].norm_sqr() + xi[p].norm_sqr();
            assert!(pair_weight > 0.8 && pair_weight < 0.85, "weight {pair_weight}");
            for x in &xi {
                assert!(x.im.abs() < 1e-10);
            }
        }
        let xi = mode_decomposition(40, 10).unwrap();
        let four_over_pi2 = 4.0 / (PI * PI);
        assert!((xi[9].norm_sqr() - four_over_pi2).abs() < 0.01);
        assert!((xi[10].norm_sqr() - four_over_pi2).abs() < 0.01);
    }

    #[test]
    fn scalar_preparation_formulas() {
        let unit = PreparationParams::new(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(blockade_radius(&unit), 1.0, epsilon = 1e-15);
        let p = PreparationParams::new(64.0, 1.0).unwrap();
        assert_abs_diff_eq!(blockade_radius(&p), 2.0, epsilon = 1e-14);
        let q = PreparationParams::new(3.7, 0.4).unwrap();
        let q64 = PreparationParams::new(3.7 * 64.0, 0.4).unwrap();
        assert_abs_diff_eq!(blockade_radius(&q64), 2.0 * blockade_radius(&q), epsilon = 1e-14);

        let (r, t) = collective_rabi(&unit, 1);
        assert_abs_diff_eq!(r, 1.0);
        assert_abs_diff_eq!(t, PI);
        let (r, t) = collective_rabi(&unit, 4);
        assert_abs_diff_eq!(r, 2.0);
        assert_abs_diff_eq!(t, PI / 2.0);
        let (r, t) = collective_rabi(&PreparationParams::new(1.0, 2.0).unwrap(), 9);
        assert_abs_diff_eq!(r, 6.0);
        assert_abs_diff_eq!(t, PI / 6.0, epsilon = 1e-15);
        assert!(PreparationParams::new(0.0, 1.0).is_err());
        assert!(PreparationParams::new(1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn pair_states_are_normalized_and_complete(n in 2usize..=40, seed in 0usize..1000) {
            let p = 1 + seed % (n / 2);
            let psi = pair_state(n, p).unwrap();
            prop_assert!((psi.bosonic_norm() - 1.0).abs() < 1e-10);
            let self_overlap = bosonic_overlap(&psi, &psi).unwrap();
            prop_assert!((self_overlap.re - 1.0).abs() < 1e-10);
            let xi = mode_decomposition(n, p).unwrap();
            let total: f64 = xi.iter().map(|x| x.norm_sqr()).sum();
            prop_assert!((total - 1.0).abs() < 1e-8, "completeness deficit {}", 1.0 - total);
            for (k, row) in psi.psi().row_iter().enumerate() {
                for (kp, v) in row.iter().enumerate() {
                    prop_assert_eq!(*v, psi.psi()[(kp, k)]);
                }
            }
        }
    }
}
