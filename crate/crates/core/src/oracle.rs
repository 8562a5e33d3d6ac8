//! Independent separation check by simulating straight-line motion.
//!
//! Pairwise distances are sampled on a uniform time grid. Around the best
//! sample a parabola is fitted to the squared distance, which is exactly
//! quadratic in time for straight-line motion, and the distance is evaluated
//! again at the parabola's vertex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{HeadingVector, Instance};

/// Upper limit on samples per pair produced by [`OracleConfig::for_instance`].
const MAX_SAMPLES: f64 = 2e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub horizon: f64,
    pub dt: f64,
    /// A pair passes when its minimum distance is at least `d - tolerance`.
    pub tolerance: f64,
}

impl OracleConfig {
    /// Defaults for `inst` flown with deviations `theta`.
    ///
    /// The step is 1/3600 of the time a fast aircraft needs to cover the
    /// instance radius, the tolerance is `1e-4 d`, and the horizon covers
    /// twice the slowest crossing time and every closest approach with a 25%
    /// margin. For nearly parallel pairs the step is widened to keep the
    /// sample count bounded.
    pub fn for_instance(inst: &Instance, theta: &HeadingVector) -> Result<Self> {
        theta.check_bounds(inst)?;
        let ac = inst.aircraft();
        let n = ac.len() as f64;
        let cx = ac.iter().map(|a| a.x0).sum::<f64>() / n;
        let cy = ac.iter().map(|a| a.y0).sum::<f64>() / n;
        let radius = ac.iter().map(|a| (a.x0 - cx).hypot(a.y0 - cy)).fold(inst.d(), f64::max);
        let v_max = ac.iter().map(|a| a.v).fold(0.0, f64::max);
        let v_min = ac.iter().map(|a| a.v).fold(f64::INFINITY, f64::min);

        let mut horizon = 2.0 * radius / v_min;
        for (i, j) in inst.pairs() {
            if let Some(t) = approach_time(inst, theta, i, j) {
                horizon = horizon.max(1.25 * t);
            }
        }
        let dt = (radius / v_max / 3600.0).max(horizon / MAX_SAMPLES);
        Ok(Self {
            horizon,
            dt,
            tolerance: 1e-4 * inst.d(),
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.horizon > 0.0 && self.tolerance >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "oracle needs dt > 0, horizon > 0 and tolerance >= 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Time of closest approach if it lies strictly in the future.
fn approach_time(inst: &Instance, theta: &HeadingVector, i: usize, j: usize) -> Option<f64> {
    let (a, b) = (&inst.aircraft()[i], &inst.aircraft()[j]);
    let [avx, avy] = a.velocity(theta.0[i]);
    let [bvx, bvy] = b.velocity(theta.0[j]);
    let (vx, vy) = (avx - bvx, avy - bvy);
    let v_sq = vx * vx + vy * vy;
    if v_sq == 0.0 {
        return None;
    }
    let t = -((a.x0 - b.x0) * vx + (a.y0 - b.y0) * vy) / v_sq;
    (t > 0.0).then_some(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub i: usize,
    pub j: usize,
    pub min_distance: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub pass: bool,
    pub pairs: Vec<PairDistance>,
}

impl OracleReport {
    pub fn min_distance(&self) -> f64 {
        self.pairs.iter().map(|p| p.min_distance).fold(f64::INFINITY, f64::min)
    }
}

pub fn oracle_verify(inst: &Instance, theta: &HeadingVector, cfg: &OracleConfig) -> Result<OracleReport> {
    theta.check_bounds(inst)?;
    cfg.validate()?;
    let ac = inst.aircraft();
    let mut pairs = Vec::with_capacity(inst.num_pairs());
    for (i, j) in inst.pairs() {
        if let Some(t) = approach_time(inst, theta, i, j) {
            if t > cfg.horizon {
                return Err(Error::HorizonTooShort {
                    horizon: cfg.horizon,
                    t,
                    i: i + 1,
                    j: j + 1,
                });
            }
        }
        let (a, b) = (&ac[i], &ac[j]);
        let (ti, tj) = (theta.0[i], theta.0[j]);
        let dist_sq = |t: f64| {
            let [ax, ay] = a.position_at(ti, t);
            let [bx, by] = b.position_at(tj, t);
            (ax - bx).powi(2) + (ay - by).powi(2)
        };

        let steps = (cfg.horizon / cfg.dt).ceil() as u64;
        let (mut best_k, mut best) = (0u64, dist_sq(0.0));
        for k in 1..=steps {
            let s = dist_sq(k as f64 * cfg.dt);
            if s < best {
                best = s;
                best_k = k;
            }
        }
        let mut best_t = best_k as f64 * cfg.dt;

        // Vertex of the parabola through the neighbouring samples.
        if best_k > 0 && best_k < steps {
            let (t0, t1, t2) = ((best_k - 1) as f64 * cfg.dt, best_t, (best_k + 1) as f64 * cfg.dt);
            let (f0, f1, f2) = (dist_sq(t0), best, dist_sq(t2));
            let denom = f0 - 2.0 * f1 + f2;
            if denom > 0.0 {
                let t = (t1 + 0.5 * cfg.dt * (f0 - f2) / denom).clamp(t0, t2);
                let s = dist_sq(t);
                if s < best {
                    best = s;
                    best_t = t;
                }
            }
        }
        pairs.push(PairDistance {
            i,
            j,
            min_distance: best.sqrt(),
            time: best_t,
        });
    }
    let pass = pairs.iter().all(|p| p.min_distance >= inst.d() - cfg.tolerance);
    Ok(OracleReport { pass, pairs })
}
