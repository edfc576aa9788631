//! Small numerical helpers shared across modules.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Compensated (Neumaier) summation with a fixed reduction order.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn weighted_sum(weights: &[f64], values: &[f64]) -> f64 {
    let mut acc = NeumaierSum::default();
    for (w, v) in weights.iter().zip(values) {
        acc.add(w * v);
    }
    acc.total()
}

/// `e^{iθ}`
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

/// Bessel function of the first kind, order zero.
///
/// Uses the trapezoidal rule on `J₀(x) = (1/π)∫₀^π cos(x sin τ) dτ`. The
/// integrand is smooth and `π`-periodic, so with `n` points the error is
/// bounded by `2|J_{2n}(x)|`, which is below machine precision once
/// `n > |x|/2 + 30`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 1.0;
    }
    let n = (x / 2.0).ceil() as usize + 32;
    let mut acc = NeumaierSum::default();
    for j in 0..n {
        let tau = PI * j as f64 / n as f64;
        acc.add((x * tau.sin()).cos());
    }
    acc.total() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Ascending power series, adequate for small arguments.
    fn j0_series(x: f64) -> f64 {
        let q = -(x * x) / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            term *= q / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn j0_reference_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert_abs_diff_eq!(bessel_j0(1.0), 0.765_197_686_557_966_6, epsilon = 1e-14);
        assert_abs_diff_eq!(bessel_j0(10.0), -0.245_935_764_451_348_3, epsilon = 1e-14);
        assert_abs_diff_eq!(bessel_j0(2.404_825_557_695_773), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bessel_j0(-3.0), bessel_j0(3.0), epsilon = 1e-16);
    }

    #[test]
    fn j0_agrees_with_power_series() {
        for i in 0..200 {
            let x = 0.05 * i as f64;
            assert_abs_diff_eq!(bessel_j0(x), j0_series(x), epsilon = 1e-12);
        }
    }

    #[test]
    fn j0_large_argument_asymptote() {
        let x: f64 = 500.0;
        let asym = (2.0 / (PI * x)).sqrt() * (x - PI / 4.0).cos();
        assert_abs_diff_eq!(bessel_j0(x), asym, epsilon = 1e-4);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = NeumaierSum::default();
        s.add(1e16);
        s.add(1.0);
        s.add(-1e16);
        assert_eq!(s.total(), 1.0);
    }
}
