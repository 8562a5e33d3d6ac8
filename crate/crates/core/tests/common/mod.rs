//! Reference computations shared by the integration tests. Nothing here
//! calls into the solver or the term decomposition.

#![allow(dead_code)]

use deconflict_core::{Aircraft, Instance};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform(lo.ln(), hi.ln()).exp()
    }
}

/// Separation function `|V|^2 (|X|^2 - d^2) - (X.V)^2`, written out from
/// positions and velocities.
pub fn g_direct(a: &Aircraft, b: &Aircraft, ti: f64, tj: f64, d: f64) -> f64 {
    let (vx, vy) = rel_velocity(a, b, ti, tj);
    let (x, y) = (a.x0 - b.x0, a.y0 - b.y0);
    let vv = vx * vx + vy * vy;
    let xv = x * vx + y * vy;
    vv * (x * x + y * y - d * d) - xv * xv
}

pub fn rel_velocity(a: &Aircraft, b: &Aircraft, ti: f64, tj: f64) -> (f64, f64) {
    let (pa, pb) = (a.phi + ti, b.phi + tj);
    (a.v * pa.cos() - b.v * pb.cos(), a.v * pa.sin() - b.v * pb.sin())
}

/// Minimum distance over `t >= 0` by minimising the squared distance
/// polynomial `|P + V t|^2` on the half line.
pub fn miss_distance(a: &Aircraft, b: &Aircraft, ti: f64, tj: f64) -> f64 {
    let (vx, vy) = rel_velocity(a, b, ti, tj);
    let (px, py) = (a.x0 - b.x0, a.y0 - b.y0);
    let qa = vx * vx + vy * vy;
    let qb = 2.0 * (px * vx + py * vy);
    let t = if qa > 0.0 { (-qb / (2.0 * qa)).max(0.0) } else { 0.0 };
    ((px + vx * t).powi(2) + (py + vy * t).powi(2)).sqrt()
}

pub fn min_miss(inst: &Instance, theta: &[f64]) -> f64 {
    let ac = inst.aircraft();
    let mut m = f64::INFINITY;
    for i in 0..ac.len() {
        for j in i + 1..ac.len() {
            m = m.min(miss_distance(&ac[i], &ac[j], theta[i], theta[j]));
        }
    }
    m
}

pub fn separated(inst: &Instance, theta: &[f64]) -> bool {
    min_miss(inst, theta) >= inst.d()
}

/// Brute-force global minimum of `sum(theta^2)` subject to separation.
///
/// The objective is `rho^2` along a ray `rho * u`, so the optimum is the
/// smallest feasible radius over all directions. Directions are sampled on
/// a grid, the first feasible radius on each ray is found by scanning and
/// bisection, and the best directions are refined by a shrinking pattern
/// search over the direction angles.
pub fn radial_oracle(inst: &Instance) -> (f64, Vec<f64>) {
    let n = inst.len();
    let bounds: Vec<(f64, f64)> = inst.aircraft().iter().map(|a| (a.theta_min, a.theta_max)).collect();
    let r_max = bounds.iter().map(|(lo, hi)| lo.abs().max(hi.abs())).fold(0.0, f64::max) * (n as f64).sqrt();

    let point = |u: &[f64], rho: f64| -> Option<Vec<f64>> {
        let p: Vec<f64> = u.iter().map(|x| x * rho).collect();
        p.iter()
            .zip(&bounds)
            .all(|(x, (lo, hi))| x >= lo && x <= hi)
            .then_some(p)
    };
    let first_feasible = |u: &[f64]| -> Option<f64> {
        if separated(inst, &vec![0.0; n]) {
            return Some(0.0);
        }
        let steps = 400;
        let mut prev = 0.0;
        for k in 1..=steps {
            let rho = r_max * k as f64 / steps as f64;
            let p = point(u, rho)?;
            if separated(inst, &p) {
                let (mut lo, mut hi) = (prev, rho);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if separated(inst, &point(u, mid)?) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Some(hi);
            }
            prev = rho;
        }
        None
    };

    // Directions from hyperspherical angles.
    let dir = |ang: &[f64]| -> Vec<f64> {
        let mut u = vec![1.0; n];
        let mut s = 1.0;
        for (k, a) in ang.iter().enumerate() {
            u[k] = s * a.cos();
            s *= a.sin();
        }
        u[n - 1] = s;
        u
    };
    let mut grid: Vec<Vec<f64>> = Vec::new();
    match n {
        2 => {
            for k in 0..720 {
                grid.push(vec![std::f64::consts::TAU * k as f64 / 720.0]);
            }
        }
        3 => {
            for a in 0..=90 {
                for b in 0..180 {
                    grid.push(vec![
                        std::f64::consts::PI * a as f64 / 90.0,
                        std::f64::consts::TAU * b as f64 / 180.0,
                    ]);
                }
            }
        }
        _ => panic!("radial oracle supports n = 2 or 3"),
    }
    let mut scored: Vec<(f64, Vec<f64>)> = grid
        .into_iter()
        .filter_map(|ang| first_feasible(&dir(&ang)).map(|r| (r, ang)))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = (f64::INFINITY, Vec::new());
    for (r0, ang0) in scored.into_iter().take(8) {
        let (mut r, mut ang) = (r0, ang0);
        let mut step = 0.05;
        while step > 1e-10 {
            let mut improved = false;
            for k in 0..ang.len() {
                for sgn in [-1.0, 1.0] {
                    let mut trial = ang.clone();
                    trial[k] += sgn * step;
                    if let Some(rt) = first_feasible(&dir(&trial)) {
                        if rt < r {
                            r = rt;
                            ang = trial;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if r < best.0 {
            best = (r, dir(&ang).iter().map(|x| x * r).collect());
        }
    }
    (best.0 * best.0, best.1)
}
