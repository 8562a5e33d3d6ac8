//! Penalty-based projected descent for feasible incumbents.

use crate::error::{Error, Result};
use crate::geometry::{separated_all, GeometryConfig, HeadingVector, Instance, PairGeometry, PairState};

use super::SolverConfig;

/// Relative inflation of `d` targeted by the penalty, so that converged points
/// clear the true safety distance by more than rounding noise.
const DISTANCE_MARGIN: f64 = 1e-7;
const PENALTY_SCHEDULE: [f64; 7] = [1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6];
const MAX_INNER_ITERS: usize = 400;

struct Problem<'a> {
    inst: &'a Instance,
    pairs: Vec<PairGeometry>,
    bounds: Vec<(f64, f64)>,
    target_sq: f64,
    d_sq: f64,
    geo: GeometryConfig,
}

impl Problem<'_> {
    /// Sum of squared normalised shortfalls `(d_t^2 - miss^2) / d^2`.
    fn penalty(&self, theta: &[f64]) -> f64 {
        self.pairs
            .iter()
            .map(|pg| {
                let st = PairState::new(self.inst, pg, theta[pg.i], theta[pg.j]);
                let x_sq = pg.d * pg.d + pg.e * pg.e;
                let miss_sq = if st.v_sq > self.geo.eps_v && st.x_dot_v < 0.0 {
                    x_sq - st.x_dot_v * st.x_dot_v / st.v_sq
                } else {
                    x_sq
                };
                let short = ((self.target_sq - miss_sq) / self.d_sq).max(0.0);
                short * short
            })
            .sum()
    }

    fn merit(&self, theta: &[f64], mu: f64) -> f64 {
        theta.iter().map(|t| t * t).sum::<f64>() + mu * self.penalty(theta)
    }

    fn project(&self, theta: &mut [f64]) {
        for (t, &(lo, hi)) in theta.iter_mut().zip(&self.bounds) {
            *t = t.clamp(lo, hi);
        }
    }

    fn gradient(&self, theta: &[f64], mu: f64, grad: &mut [f64]) {
        let h = 1e-7;
        let mut probe = theta.to_vec();
        for k in 0..theta.len() {
            probe[k] = theta[k] + h;
            let up = self.merit(&probe, mu);
            probe[k] = theta[k] - h;
            let down = self.merit(&probe, mu);
            probe[k] = theta[k];
            grad[k] = (up - down) / (2.0 * h);
        }
    }

    fn feasible(&self, theta: &[f64]) -> bool {
        separated_all(self.inst, &self.pairs, theta, &self.geo)
    }

    /// Projected gradient descent with Barzilai-Borwein steps and Armijo
    /// backtracking on the penalised merit function.
    fn descend(&self, theta: &mut Vec<f64>, mu: f64) {
        let n = theta.len();
        let mut grad = vec![0.0; n];
        let mut prev_theta = theta.clone();
        let mut prev_grad = vec![0.0; n];
        let mut step = 1e-2;
        let mut f = self.merit(theta, mu);
        self.gradient(theta, mu, &mut grad);

        for iter in 0..MAX_INNER_ITERS {
            if iter > 0 {
                let (mut ss, mut sy) = (0.0, 0.0);
                for k in 0..n {
                    let s = theta[k] - prev_theta[k];
                    ss += s * s;
                    sy += s * (grad[k] - prev_grad[k]);
                }
                step = if sy > 0.0 {
                    (ss / sy).clamp(1e-14, 1e2)
                } else {
                    step * 2.0
                };
            }
            let mut accepted = false;
            let mut trial = theta.clone();
            for _ in 0..40 {
                for k in 0..n {
                    trial[k] = theta[k] - step * grad[k];
                }
                self.project(&mut trial);
                let decrease: f64 = (0..n).map(|k| grad[k] * (theta[k] - trial[k])).sum();
                let ft = self.merit(&trial, mu);
                if ft <= f - 1e-4 * decrease && decrease > 0.0 {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            let moved: f64 = (0..n).map(|k| (trial[k] - theta[k]).abs()).fold(0.0, f64::max);
            prev_theta.clone_from(theta);
            prev_grad.clone_from(&grad);
            theta.clone_from(&trial);
            f = self.merit(theta, mu);
            self.gradient(theta, mu, &mut grad);
            if moved < 1e-13 {
                break;
            }
        }
    }

    /// Symmetric points such as a head-on pair at zero deviation are
    /// stationary for the penalty. A small turn to the same side for every
    /// aircraft breaks the tie.
    fn nudge(&self, theta: &mut [f64]) {
        let n = theta.len() as f64;
        for (k, (t, &(lo, hi))) in theta.iter_mut().zip(&self.bounds).enumerate() {
            *t += 1e-3 * (hi - lo) * (1.0 + k as f64 / n);
        }
        self.project(theta);
    }

    /// Shrink a feasible point towards the origin, first uniformly and then
    /// one coordinate at a time, keeping feasibility.
    fn polish(&self, theta: &mut [f64]) {
        let scaled = |lambda: f64| -> Vec<f64> {
            let mut t: Vec<f64> = theta.iter().map(|x| x * lambda).collect();
            self.project(&mut t);
            t
        };
        if let Some(lambda) = self.bisect_feasible(scaled) {
            theta.copy_from_slice(&scaled(lambda));
        }
        for _ in 0..3 {
            for k in 0..theta.len() {
                let base = theta.to_vec();
                let along = |lambda: f64| {
                    let mut t = base.clone();
                    t[k] = base[k] * lambda;
                    t
                };
                if let Some(lambda) = self.bisect_feasible(along) {
                    theta[k] = base[k] * lambda;
                }
            }
        }
    }

    /// Smallest `lambda` in `[0, 1]` (to bisection precision) with a feasible
    /// image, assuming the image at 1 is feasible.
    fn bisect_feasible(&self, image: impl Fn(f64) -> Vec<f64>) -> Option<f64> {
        if self.feasible(&image(0.0)) {
            return Some(0.0);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.feasible(&image(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (hi < 1.0).then_some(hi)
    }
}

/// Search for a feasible deviation vector near `start`.
///
/// Minimises `sum(theta^2)` plus an increasing penalty on closest-approach
/// shortfalls, projecting onto the deviation bounds, then shrinks the result
/// towards zero while it stays feasible. If `start` is feasible the result
/// is never worse than `start`.
pub fn local_search(inst: &Instance, start: &HeadingVector, cfg: &SolverConfig) -> Result<HeadingVector> {
    start.check_bounds(inst)?;
    let problem = Problem {
        inst,
        pairs: crate::geometry::all_pair_params(inst),
        bounds: inst.bounds(),
        target_sq: (inst.d() * (1.0 + DISTANCE_MARGIN)).powi(2),
        d_sq: inst.d() * inst.d(),
        geo: GeometryConfig {
            eps_feas: cfg.feas_tol,
            ..GeometryConfig::default()
        },
    };

    let start_feasible = problem.feasible(&start.0);
    let mut theta = start.0.clone();
    let mut found = None;
    for &mu in &PENALTY_SCHEDULE {
        if !problem.feasible(&theta) {
            problem.nudge(&mut theta);
        }
        problem.descend(&mut theta, mu);
        if problem.feasible(&theta) {
            found = Some(theta.clone());
            break;
        }
    }
    // Pushing the deviations outward often clears what the penalty left.
    if found.is_none() {
        for factor in [1.0001, 1.001, 1.01, 1.1, 1.5, 2.0] {
            let mut t: Vec<f64> = theta.iter().map(|x| x * factor).collect();
            problem.project(&mut t);
            if problem.feasible(&t) {
                found = Some(t);
                break;
            }
        }
    }

    let result = match found {
        Some(mut t) => {
            problem.polish(&mut t);
            t
        }
        None if start_feasible => start.0.clone(),
        None => return Err(Error::NoFeasiblePoint),
    };
    let obj = |t: &[f64]| t.iter().map(|x| x * x).sum::<f64>();
    if start_feasible && obj(&result) > obj(&start.0) {
        return Ok(start.clone());
    }
    Ok(HeadingVector(result))
}
