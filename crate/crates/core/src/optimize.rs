//! Derivative-free Nelder–Mead simplex minimization.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::fabs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Spread of objective values across the simplex fell below the
    /// tolerance before `max_iter` was reached.
    pub converged: bool,
}

/// Minimizes `f` from `x0` with an initial simplex of per-coordinate `step`s.
/// Non-finite objective values are treated as `+inf`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], max_iter: usize, tol: f64) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = alloc::vec![0.0; n];
    let mut trial = alloc::vec![0.0; n];

    while iterations < max_iter {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        let spread = values[worst] - values[best];
        if spread.is_finite() && fabs(spread) <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / n as f64;
            }
        }
        let point = |coef: f64, out: &mut Vec<f64>, worst: &[f64]| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(worst) {
                *o = c + coef * (w - c);
            }
        };

        point(-1.0, &mut trial, &simplex[worst]);
        let f_reflect = eval(&trial);
        if f_reflect < values[best] {
            let reflected = trial.clone();
            point(-2.0, &mut trial, &simplex[worst]);
            let f_expand = eval(&trial);
            if f_expand < f_reflect {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_expand;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[second_worst] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_reflect;
            continue;
        }
        // Contraction, outside or inside.
        let outside = f_reflect < values[worst];
        point(if outside { -0.5 } else { 0.5 }, &mut trial, &simplex[worst]);
        let f_contract = eval(&trial);
        if f_contract < f_reflect.min(values[worst]) {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_contract;
            continue;
        }
        // Shrink towards the best vertex.
        let best_x = simplex[best].clone();
        for &i in &order[1..] {
            for (x, b) in simplex[i].iter_mut().zip(&best_x) {
                *x = b + 0.5 * (*x - b);
            }
            values[i] = eval(&simplex[i]);
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum { x: simplex[best].clone(), f: values[best], iterations, evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(rosen, &[-1.2, 1.0], &[0.5, 0.5], 5000, 1e-14);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn respects_iteration_cap() {
        let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let m = nelder_mead(sphere, &[3.0, -2.0, 1.0], &[1.0; 3], 5, 1e-12);
        assert!(!m.converged);
        assert_eq!(m.iterations, 5);
    }

    #[test]
    fn treats_nan_as_infinite() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 2.0).powi(2) };
        let m = nelder_mead(f, &[0.5], &[1.0], 500, 1e-12);
        assert!((m.x[0] - 2.0).abs() < 1e-5);
    }
}
