//! Uniform-motion conflict geometry.
//!
//! Aircraft fly straight lines at constant speed after applying a heading
//! deviation `theta`. For a pair `(i, j)` the relative position at time zero
//! is `X = p_i - p_j` and the relative velocity is `V = v_i u(phi_i + theta_i) -
//! v_j u(phi_j + theta_j)`. The pair is separated iff the minimum distance over
//! `t >= 0` is at least `d`, which for converging pairs reduces to the sign of
//! `g = |V|^2 (|X|^2 - d^2) - (X.V)^2`.
//!
//! Units are abstract. The defaults elsewhere in the crate assume nautical
//! miles and knots (NM/h), but nothing here depends on that.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value of `|V|^2` a pair is treated as moving in parallel.
pub const DEFAULT_EPS_V: f64 = 1e-12;
/// Tolerance on `g` accepted as separated.
pub const DEFAULT_EPS_FEAS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aircraft {
    pub x0: f64,
    pub y0: f64,
    /// Ground speed, strictly positive.
    pub v: f64,
    /// Initial heading in radians.
    pub phi: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Aircraft {
    pub fn new(x0: f64, y0: f64, v: f64, phi: f64, theta_min: f64, theta_max: f64) -> Self {
        Self {
            x0,
            y0,
            v,
            phi,
            theta_min,
            theta_max,
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let fields = [self.x0, self.y0, self.v, self.phi, self.theta_min, self.theta_max];
        if fields.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "aircraft {} has a non-finite field",
                index + 1
            )));
        }
        if self.v <= 0.0 {
            return Err(Error::InvalidInstance(format!(
                "aircraft {} has non-positive speed {}",
                index + 1,
                self.v
            )));
        }
        if self.theta_min > self.theta_max {
            return Err(Error::InvalidInstance(format!(
                "aircraft {} has theta_min {} > theta_max {}",
                index + 1,
                self.theta_min,
                self.theta_max
            )));
        }
        Ok(())
    }

    /// Unit-speed direction scaled by `v` after deviating by `theta`.
    #[inline]
    pub fn velocity(&self, theta: f64) -> [f64; 2] {
        let psi = self.phi + theta;
        [psi.cos() * self.v, psi.sin() * self.v]
    }

    #[inline]
    pub fn position_at(&self, theta: f64, t: f64) -> [f64; 2] {
        let [vx, vy] = self.velocity(theta);
        [self.x0 + vx * t, self.y0 + vy * t]
    }
}

/// A validated deconfliction instance.
///
/// Construction checks that every pair is at least `d` apart at `t = 0`
/// (distance exactly `d` is accepted).
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    id: String,
    d: f64,
    aircraft: Vec<Aircraft>,
}

impl Instance {
    pub fn new(id: impl Into<String>, d: f64, aircraft: Vec<Aircraft>) -> Result<Self> {
        let inst = Self {
            id: id.into(),
            d,
            aircraft,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        if self.aircraft.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 aircraft, got {}",
                self.aircraft.len()
            )));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::InvalidInstance(format!(
                "safety distance must be positive, got {}",
                self.d
            )));
        }
        for (k, a) in self.aircraft.iter().enumerate() {
            a.validate(k)?;
        }
        for (i, j) in self.pairs() {
            let (a, b) = (&self.aircraft[i], &self.aircraft[j]);
            let dist = (a.x0 - b.x0).hypot(a.y0 - b.y0);
            if dist < self.d {
                return Err(Error::InitialConflict {
                    i: i + 1,
                    j: j + 1,
                    distance: dist,
                    d: self.d,
                });
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn aircraft(&self) -> &[Aircraft] {
        &self.aircraft
    }

    pub fn len(&self) -> usize {
        self.aircraft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aircraft.is_empty()
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// All pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.aircraft.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    pub fn num_pairs(&self) -> usize {
        let n = self.aircraft.len();
        n * (n - 1) / 2
    }

    /// Per-aircraft deviation bounds.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.aircraft.iter().map(|a| (a.theta_min, a.theta_max)).collect()
    }

    /// Zero deviation vector, clamped into the bounds.
    pub fn zero_heading(&self) -> HeadingVector {
        HeadingVector(
            self.aircraft
                .iter()
                .map(|a| 0.0f64.clamp(a.theta_min, a.theta_max))
                .collect(),
        )
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n = self.aircraft.len();
        if i >= j || j >= n {
            return Err(Error::InvalidPair { i, j, n });
        }
        Ok(())
    }
}

/// Heading deviations, one per aircraft, in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeadingVector(pub Vec<f64>);

impl HeadingVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Sum of squared deviations, the deconfliction objective.
    pub fn objective(&self) -> f64 {
        self.0.iter().map(|t| t * t).sum()
    }

    pub fn check_bounds(&self, inst: &Instance) -> Result<()> {
        if self.0.len() != inst.len() {
            return Err(Error::DimensionMismatch {
                expected: inst.len(),
                got: self.0.len(),
            });
        }
        for (index, (&value, a)) in self.0.iter().zip(inst.aircraft()).enumerate() {
            if !(value >= a.theta_min && value <= a.theta_max) {
                return Err(Error::OutOfBounds {
                    index: index + 1,
                    value,
                    lo: a.theta_min,
                    hi: a.theta_max,
                });
            }
        }
        Ok(())
    }
}

impl From<Vec<f64>> for HeadingVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Constants of a pair that do not depend on the decision variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub i: usize,
    pub j: usize,
    /// `|X|^2 - d^2`
    pub c: f64,
    /// `x_i - x_j`
    pub d: f64,
    /// `y_i - y_j`
    pub e: f64,
    /// `c * (v_i^2 + v_j^2)`
    pub h: f64,
}

pub fn pair_params(inst: &Instance, i: usize, j: usize) -> Result<PairGeometry> {
    inst.check_pair(i, j)?;
    Ok(pair_params_unchecked(inst, i, j))
}

pub(crate) fn pair_params_unchecked(inst: &Instance, i: usize, j: usize) -> PairGeometry {
    let (a, b) = (&inst.aircraft[i], &inst.aircraft[j]);
    let dx = a.x0 - b.x0;
    let dy = a.y0 - b.y0;
    let c = dx * dx + dy * dy - inst.d * inst.d;
    PairGeometry {
        i,
        j,
        c,
        d: dx,
        e: dy,
        h: c * (a.v * a.v + b.v * b.v),
    }
}

/// Pair geometry for every pair, in [`Instance::pairs`] order.
pub fn all_pair_params(inst: &Instance) -> Vec<PairGeometry> {
    inst.pairs().map(|(i, j)| pair_params_unchecked(inst, i, j)).collect()
}

/// Relative velocity `V_ij` for the deviations `theta_i`, `theta_j`.
#[inline]
pub fn relative_velocity_of(inst: &Instance, i: usize, j: usize, theta_i: f64, theta_j: f64) -> [f64; 2] {
    let [ax, ay] = inst.aircraft[i].velocity(theta_i);
    let [bx, by] = inst.aircraft[j].velocity(theta_j);
    [ax - bx, ay - by]
}

pub fn relative_velocity(inst: &Instance, i: usize, j: usize, theta: &HeadingVector) -> Result<[f64; 2]> {
    inst.check_pair(i, j)?;
    check_len(inst, theta)?;
    Ok(relative_velocity_of(inst, i, j, theta.0[i], theta.0[j]))
}

/// Closest-approach classification of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Approach {
    /// Minimum distance is reached at `t >= 0`.
    Converging(f64),
    /// The unconstrained minimiser lies in the past; distance grows from `t = 0`.
    Diverging(f64),
    /// `|V|^2` is below the parallel threshold; separation is constant.
    Parallel,
}

impl Approach {
    pub fn time(&self) -> Option<f64> {
        match *self {
            Approach::Converging(t) | Approach::Diverging(t) => Some(t),
            Approach::Parallel => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    pub eps_v: f64,
    pub eps_feas: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            eps_v: DEFAULT_EPS_V,
            eps_feas: DEFAULT_EPS_FEAS,
        }
    }
}

/// All per-pair quantities for one heading vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub x: [f64; 2],
    pub v: [f64; 2],
    pub v_sq: f64,
    pub x_dot_v: f64,
    pub g: f64,
}

impl PairState {
    pub fn new(inst: &Instance, pg: &PairGeometry, theta_i: f64, theta_j: f64) -> Self {
        let v = relative_velocity_of(inst, pg.i, pg.j, theta_i, theta_j);
        let v_sq = v[0] * v[0] + v[1] * v[1];
        let x_dot_v = pg.d * v[0] + pg.e * v[1];
        Self {
            x: [pg.d, pg.e],
            v,
            v_sq,
            x_dot_v,
            g: v_sq * pg.c - x_dot_v * x_dot_v,
        }
    }

    pub fn approach(&self, eps_v: f64) -> Approach {
        if self.v_sq < eps_v {
            return Approach::Parallel;
        }
        let t = -self.x_dot_v / self.v_sq;
        if t < 0.0 {
            Approach::Diverging(t)
        } else {
            Approach::Converging(t)
        }
    }

    /// Minimum distance over `t >= 0`.
    pub fn miss_distance(&self, eps_v: f64) -> f64 {
        let x_sq = self.x[0] * self.x[0] + self.x[1] * self.x[1];
        match self.approach(eps_v) {
            Approach::Converging(_) => (x_sq - self.x_dot_v * self.x_dot_v / self.v_sq).max(0.0).sqrt(),
            _ => x_sq.sqrt(),
        }
    }

    pub fn is_separated(&self, cfg: &GeometryConfig) -> bool {
        match self.approach(cfg.eps_v) {
            // Initial separation is guaranteed by `Instance`.
            Approach::Parallel | Approach::Diverging(_) => true,
            Approach::Converging(t) => t == 0.0 || self.g >= -cfg.eps_feas,
        }
    }
}

fn check_len(inst: &Instance, theta: &HeadingVector) -> Result<()> {
    if theta.0.len() != inst.len() {
        return Err(Error::DimensionMismatch {
            expected: inst.len(),
            got: theta.0.len(),
        });
    }
    Ok(())
}

pub fn closest_approach_time(inst: &Instance, i: usize, j: usize, theta: &HeadingVector) -> Result<Approach> {
    closest_approach_time_with(inst, i, j, theta, DEFAULT_EPS_V)
}

pub fn closest_approach_time_with(
    inst: &Instance,
    i: usize,
    j: usize,
    theta: &HeadingVector,
    eps_v: f64,
) -> Result<Approach> {
    let pg = pair_params(inst, i, j)?;
    check_len(inst, theta)?;
    Ok(PairState::new(inst, &pg, theta.0[i], theta.0[j]).approach(eps_v))
}

/// `g = |V|^2 (|X|^2 - d^2) - (X.V)^2`, without the activation factor.
pub fn separation_lhs(inst: &Instance, i: usize, j: usize, theta: &HeadingVector) -> Result<f64> {
    let pg = pair_params(inst, i, j)?;
    check_len(inst, theta)?;
    Ok(PairState::new(inst, &pg, theta.0[i], theta.0[j]).g)
}

/// A pair that loses separation.
#[derive(Debug, Clone, PartialEq)]
pub struct PairViolation {
    pub i: usize,
    pub j: usize,
    pub t_min: f64,
    pub miss_distance: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<PairViolation>,
}

pub fn is_feasible(inst: &Instance, theta: &HeadingVector) -> Result<FeasibilityReport> {
    is_feasible_with(inst, theta, &GeometryConfig::default())
}

pub fn is_feasible_with(inst: &Instance, theta: &HeadingVector, cfg: &GeometryConfig) -> Result<FeasibilityReport> {
    theta.check_bounds(inst)?;
    let mut violations = Vec::new();
    for (i, j) in inst.pairs() {
        let pg = pair_params_unchecked(inst, i, j);
        let st = PairState::new(inst, &pg, theta.0[i], theta.0[j]);
        if !st.is_separated(cfg) {
            violations.push(PairViolation {
                i,
                j,
                t_min: st.approach(cfg.eps_v).time().unwrap_or(0.0),
                miss_distance: st.miss_distance(cfg.eps_v),
                g: st.g,
            });
        }
    }
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    })
}

/// Fast feasibility test without bounds checks or a report.
pub(crate) fn separated_all(inst: &Instance, pairs: &[PairGeometry], theta: &[f64], cfg: &GeometryConfig) -> bool {
    pairs
        .iter()
        .all(|pg| PairState::new(inst, pg, theta[pg.i], theta[pg.j]).is_separated(cfg))
}
