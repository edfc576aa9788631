//! Post-processing of sampled maps: peak finding and distances.

use num_complex::Complex64;

use crate::geometry::{AngularGrid, Direction};
use crate::numeric::NeumaierSum;

/// A grid node that dominates its 3×3 neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub i_theta: usize,
    pub i_phi: usize,
    pub direction: Direction,
    pub value: f64,
}

/// Local maxima of `values` sampled on `grid`, largest first.
///
/// `φ` wraps around; `θ` does not. A node counts when no neighbour is
/// strictly larger and its value is positive.
pub fn local_maxima(grid: &AngularGrid, values: &[f64]) -> Vec<Peak> {
    assert_eq!(values.len(), grid.len(), "values do not match grid");
    let (nt, np) = (grid.n_theta(), grid.n_phi());
    let mut peaks = Vec::new();
    for i in 0..nt {
        for j in 0..np {
            let v = values[grid.index(i, j)];
            if v <= 0.0 {
                continue;
            }
            let mut dominant = true;
            'scan: for di in -1i64..=1 {
                let ii = i as i64 + di;
                if ii < 0 || ii >= nt as i64 {
                    continue;
                }
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let jj = (j as i64 + dj).rem_euclid(np as i64) as usize;
                    if values[grid.index(ii as usize, jj)] > v {
                        dominant = false;
                        break 'scan;
                    }
                }
            }
            if dominant {
                peaks.push(Peak {
                    i_theta: i,
                    i_phi: j,
                    direction: grid.nodes()[grid.index(i, j)],
                    value: v,
                });
            }
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
    peaks
}

/// Interior maxima of a one-dimensional profile, returned as
/// `(abscissa, value)` pairs, largest first.
pub fn profile_maxima(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])
        .map(|i| (xs[i], ys[i]))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// Weighted relative L² distance `‖t − r‖ / ‖r‖`.
pub fn relative_l2(test: &[f64], reference: &[f64], weights: &[f64]) -> f64 {
    let mut num = NeumaierSum::default();
    let mut den = NeumaierSum::default();
    for ((t, r), w) in test.iter().zip(reference).zip(weights) {
        num.add(w * (t - r) * (t - r));
        den.add(w * r * r);
    }
    (num.total() / den.total()).sqrt()
}

/// Largest distance between paired elements after greedily matching each
/// element of `a` with its nearest unmatched element of `b`.
/// Infinite when the lengths differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (best, dist) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("lengths are equal");
        used[best] = true;
        worst = worst.max(dist);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_angular_grid;
    use std::f64::consts::PI;

    #[test]
    fn finds_isolated_bumps() {
        let grid = build_angular_grid(40, 40).unwrap();
        let bump = |d: &Direction, t0: f64, p0: f64, h: f64| {
            let dp = (d.phi() - p0 + PI).rem_euclid(2.0 * PI) - PI;
            h * (-((d.theta() - t0).powi(2) + dp * dp) / 0.05).exp()
        };
        let values: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|d| bump(d, 0.8, 0.05, 1.0) + bump(d, 2.2, 3.0, 0.5))
            .collect();
        let peaks = local_maxima(&grid, &values);
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].direction.theta() - 0.8).abs() < 0.1);
        // wraps across φ = 0
        assert!(peaks[0].direction.phi() < 0.2 || peaks[0].direction.phi() > 2.0 * PI - 0.2);
        assert!((peaks[1].direction.theta() - 2.2).abs() < 0.1);
        assert!(peaks[0].value > peaks[1].value);
    }

    #[test]
    fn profile_maxima_are_interior() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (2.0 * x).sin() + 2.0 * x).collect();
        assert!(profile_maxima(&xs, &ys).is_empty());
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let m = profile_maxima(&xs, &ys);
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn relative_l2_scaling() {
        let r = [1.0, 2.0, 3.0];
        let t: Vec<f64> = r.iter().map(|x| 1.01 * x).collect();
        assert!((relative_l2(&t, &r, &[1.0; 3]) - 0.01).abs() < 1e-12);
        assert_eq!(relative_l2(&r, &r, &[0.3; 3]), 0.0);
    }

    #[test]
    fn multiset_matching() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)];
        let b = [Complex64::new(0.0, 2.0), Complex64::new(1.0, 1e-9), Complex64::new(1.0, 0.0)];
        assert!(multiset_distance(&a, &b) < 2e-9);
        assert_eq!(multiset_distance(&a, &b[..2]), f64::INFINITY);
        let c = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(0.0, 2.0)];
        assert!(multiset_distance(&a, &c) > 1.0);
    }
}
