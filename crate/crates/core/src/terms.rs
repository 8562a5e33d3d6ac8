//! Univariate decomposition of the separation condition.
//!
//! For a pair `(i, j)` with `psi_i = phi_i + theta_i` and `psi_j = phi_j + theta_j`,
//!
//! ```text
//! C |V|^2 - (X.V)^2 = Gamma(psi_i) + Delta(psi_j) + Lambda-(psi_i - psi_j) + Lambda+(psi_i + psi_j) + H
//! ```
//!
//! and `-(X.V) = Omega-(psi_i) + Omega+(psi_j)`. Each term is an affine sinusoid
//! (or minus the square of one), so its extrema over an interval have closed
//! forms. Those extrema give the BigM constants and the bounds used by the
//! branch-and-bound solver.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use web_time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::geometry::{pair_params_unchecked, Instance, PairGeometry};

/// `psi -> a cos(psi) + b sin(psi) + c` over `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidAffine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub lo: f64,
    pub hi: f64,
}

impl SinusoidAffine {
    pub fn new(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Self { a, b, c, lo, hi }
    }

    #[inline]
    pub fn eval(&self, psi: f64) -> f64 {
        self.a * psi.cos() + self.b * psi.sin() + self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
}

/// First point of `base + 2 pi k` inside `[lo, hi]`, if any.
fn shift_into(base: f64, lo: f64, hi: f64) -> Option<f64> {
    let k = ((lo - base) / TAU).ceil();
    let mut p = base + k * TAU;
    // `ceil` on a rounded quotient can land one period early or late.
    if p < lo {
        p += TAU;
    }
    if p - TAU >= lo {
        p -= TAU;
    }
    (p <= hi).then_some(p)
}

/// Exact extrema of an affine sinusoid over its interval.
///
/// Candidates are both endpoints and the two critical points
/// `atan2(b, a)` (maximum) and `atan2(b, a) + pi` (minimum), shifted by
/// multiples of `2 pi` into the interval.
pub fn sinusoid_extrema(s: &SinusoidAffine) -> Extrema {
    let mut ext = Extrema {
        min: s.eval(s.lo),
        argmin: s.lo,
        max: s.eval(s.lo),
        argmax: s.lo,
    };
    let mut consider = |psi: f64, val: f64| {
        if val < ext.min {
            ext.min = val;
            ext.argmin = psi;
        }
        if val > ext.max {
            ext.max = val;
            ext.argmax = psi;
        }
    };
    consider(s.hi, s.eval(s.hi));

    let amp = s.a.hypot(s.b);
    if amp > 0.0 {
        let crest = s.b.atan2(s.a);
        if let Some(p) = shift_into(crest, s.lo, s.hi) {
            consider(p, s.c + amp);
        }
        if let Some(p) = shift_into(crest + PI, s.lo, s.hi) {
            consider(p, s.c - amp);
        }
    }
    ext
}

/// Extrema of `-(a cos + b sin)^2` over an interval, from the extrema of
/// the inner sinusoid.
fn neg_square_extrema(inner: &SinusoidAffine) -> Extrema {
    let e = sinusoid_extrema(inner);
    let (min, argmin) = if e.max.abs() >= e.min.abs() {
        (-(e.max * e.max), e.argmax)
    } else {
        (-(e.min * e.min), e.argmin)
    };
    let (max, argmax) = if e.min <= 0.0 && e.max >= 0.0 {
        // A zero of the inner sinusoid lies in the interval.
        let node = inner.b.atan2(inner.a) + PI / 2.0;
        let root = shift_into(node, inner.lo, inner.hi)
            .or_else(|| shift_into(node + PI, inner.lo, inner.hi))
            .unwrap_or(if e.min.abs() <= e.max.abs() { e.argmin } else { e.argmax });
        (0.0, root)
    } else if e.min.abs() <= e.max.abs() {
        (-(e.min * e.min), e.argmin)
    } else {
        (-(e.max * e.max), e.argmax)
    };
    Extrema {
        min,
        argmin,
        max,
        argmax,
    }
}

/// Coefficients of the univariate terms for one pair.
///
/// Term arguments are the absolute headings `psi_i`, `psi_j` and their
/// difference and sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerms {
    pub pair: PairGeometry,
    pub phi_i: f64,
    pub phi_j: f64,
    pub v_i: f64,
    pub v_j: f64,
    /// `v_i v_j (D^2 + E^2 - 2C)`
    pub k_minus: f64,
    /// `v_i v_j (D^2 - E^2)`
    pub p_plus: f64,
    /// `2 v_i v_j D E`
    pub q_plus: f64,
}

impl PairTerms {
    pub fn new(pg: &PairGeometry, inst: &Instance) -> Self {
        let (a, b) = (&inst.aircraft()[pg.i], &inst.aircraft()[pg.j]);
        let vv = a.v * b.v;
        Self {
            pair: *pg,
            phi_i: a.phi,
            phi_j: b.phi,
            v_i: a.v,
            v_j: b.v,
            k_minus: vv * (pg.d * pg.d + pg.e * pg.e - 2.0 * pg.c),
            p_plus: vv * (pg.d * pg.d - pg.e * pg.e),
            q_plus: 2.0 * vv * pg.d * pg.e,
        }
    }

    pub fn gamma(&self, psi_i: f64) -> f64 {
        let (s, c) = psi_i.sin_cos();
        let (d, e, v) = (self.pair.d, self.pair.e, self.v_i);
        -(c * d * v).powi(2) - (s * e * v).powi(2) - c * s * 2.0 * d * e * v * v
    }

    pub fn delta(&self, psi_j: f64) -> f64 {
        let (s, c) = psi_j.sin_cos();
        let (d, e, v) = (self.pair.d, self.pair.e, self.v_j);
        -(c * d * v).powi(2) - (s * e * v).powi(2) - c * s * 2.0 * d * e * v * v
    }

    pub fn lambda_minus(&self, phi_minus: f64) -> f64 {
        phi_minus.cos() * self.k_minus
    }

    pub fn lambda_plus(&self, phi_plus: f64) -> f64 {
        phi_plus.cos() * self.p_plus + phi_plus.sin() * self.q_plus
    }

    pub fn omega_minus(&self, psi_i: f64) -> f64 {
        -self.pair.d * psi_i.cos() * self.v_i - self.pair.e * psi_i.sin() * self.v_i
    }

    pub fn omega_plus(&self, psi_j: f64) -> f64 {
        self.pair.d * psi_j.cos() * self.v_j + self.pair.e * psi_j.sin() * self.v_j
    }

    fn omega_minus_sinusoid(&self, lo: f64, hi: f64) -> SinusoidAffine {
        SinusoidAffine::new(-self.pair.d * self.v_i, -self.pair.e * self.v_i, 0.0, lo, hi)
    }

    fn omega_plus_sinusoid(&self, lo: f64, hi: f64) -> SinusoidAffine {
        SinusoidAffine::new(self.pair.d * self.v_j, self.pair.e * self.v_j, 0.0, lo, hi)
    }

    /// Extrema of every term over a box of deviations.
    ///
    /// `theta_i` and `theta_j` are deviation intervals; the reported
    /// arguments are in each term's own variable (`psi` or `Phi`).
    pub fn extrema(&self, theta_i: (f64, f64), theta_j: (f64, f64)) -> TermExtrema {
        let psi_i = (self.phi_i + theta_i.0, self.phi_i + theta_i.1);
        let psi_j = (self.phi_j + theta_j.0, self.phi_j + theta_j.1);
        let phi_minus = (psi_i.0 - psi_j.1, psi_i.1 - psi_j.0);
        let phi_plus = (psi_i.0 + psi_j.0, psi_i.1 + psi_j.1);

        let om = self.omega_minus_sinusoid(psi_i.0, psi_i.1);
        let op = self.omega_plus_sinusoid(psi_j.0, psi_j.1);
        TermExtrema {
            gamma: neg_square_extrema(&om),
            delta: neg_square_extrema(&op),
            lambda_minus: sinusoid_extrema(&SinusoidAffine::new(self.k_minus, 0.0, 0.0, phi_minus.0, phi_minus.1)),
            lambda_plus: sinusoid_extrema(&SinusoidAffine::new(
                self.p_plus,
                self.q_plus,
                0.0,
                phi_plus.0,
                phi_plus.1,
            )),
            omega_minus: sinusoid_extrema(&om),
            omega_plus: sinusoid_extrema(&op),
            h: self.pair.h,
        }
    }

    /// Ranges of the partial derivatives of `g` with respect to `theta_i`
    /// and `theta_j` over a box.
    ///
    /// `Gamma' = v^2 (D^2 - E^2) sin(2 psi) - 2 v^2 D E cos(2 psi)` and the
    /// derivatives of the `Lambda` terms are sinusoids in `Phi-` and `Phi+`,
    /// so every piece again has exact extrema.
    pub fn gradient_bounds(&self, theta_i: (f64, f64), theta_j: (f64, f64)) -> [Interval; 2] {
        let (d, e) = (self.pair.d, self.pair.e);
        let psi_i = (self.phi_i + theta_i.0, self.phi_i + theta_i.1);
        let psi_j = (self.phi_j + theta_j.0, self.phi_j + theta_j.1);
        let phi_minus = (psi_i.0 - psi_j.1, psi_i.1 - psi_j.0);
        let phi_plus = (psi_i.0 + psi_j.0, psi_i.1 + psi_j.1);
        let square_term = |v: f64, psi: (f64, f64)| {
            let v2 = v * v;
            let s = SinusoidAffine::new(-2.0 * v2 * d * e, v2 * (d * d - e * e), 0.0, 2.0 * psi.0, 2.0 * psi.1);
            Interval::of(&sinusoid_extrema(&s))
        };
        let gamma = square_term(self.v_i, psi_i);
        let delta = square_term(self.v_j, psi_j);
        let lm = Interval::of(&sinusoid_extrema(&SinusoidAffine::new(
            0.0,
            -self.k_minus,
            0.0,
            phi_minus.0,
            phi_minus.1,
        )));
        let lp = Interval::of(&sinusoid_extrema(&SinusoidAffine::new(
            self.q_plus,
            -self.p_plus,
            0.0,
            phi_plus.0,
            phi_plus.1,
        )));
        [
            Interval::new(gamma.lo + lm.lo + lp.lo, gamma.hi + lm.hi + lp.hi),
            Interval::new(delta.lo - lm.hi + lp.lo, delta.hi - lm.lo + lp.hi),
        ]
    }

    /// Mean-value enclosure of `g` over a box: the value at the centre plus
    /// the derivative ranges times the half-widths. Its overestimation
    /// shrinks quadratically with the box, unlike the sum of term ranges.
    pub fn centered_g(&self, theta_i: (f64, f64), theta_j: (f64, f64)) -> Interval {
        let ci = 0.5 * (theta_i.0 + theta_i.1);
        let cj = 0.5 * (theta_j.0 + theta_j.1);
        let g = self.eval(ci, cj).separation_sum();
        let [gi, gj] = self.gradient_bounds(theta_i, theta_j);
        let spread = |grad: Interval, lo: f64, hi: f64, c: f64| {
            let (a, b) = (lo - c, hi - c);
            let p = [grad.lo * a, grad.lo * b, grad.hi * a, grad.hi * b];
            (
                p.iter().copied().fold(f64::INFINITY, f64::min),
                p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        let (li, hi_) = spread(gi, theta_i.0, theta_i.1, ci);
        let (lj, hj) = spread(gj, theta_j.0, theta_j.1, cj);
        Interval::new(g + li + lj, g + hi_ + hj)
    }

    pub fn eval(&self, theta_i: f64, theta_j: f64) -> TermValues {
        let psi_i = self.phi_i + theta_i;
        let psi_j = self.phi_j + theta_j;
        let phi_minus = psi_i - psi_j;
        let phi_plus = psi_i + psi_j;
        TermValues {
            gamma: self.gamma(psi_i),
            delta: self.delta(psi_j),
            lambda_minus: self.lambda_minus(phi_minus),
            lambda_plus: self.lambda_plus(phi_plus),
            omega_minus: self.omega_minus(psi_i),
            omega_plus: self.omega_plus(psi_j),
            phi_minus,
            phi_plus,
            h: self.pair.h,
        }
    }
}

/// Term evaluators for every pair of an instance, in pair order.
pub fn separable_terms(inst: &Instance) -> Vec<PairTerms> {
    inst.pairs()
        .map(|(i, j)| PairTerms::new(&pair_params_unchecked(inst, i, j), inst))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermValues {
    pub gamma: f64,
    pub delta: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub h: f64,
}

impl TermValues {
    /// `Gamma + Delta + Lambda- + Lambda+ + H`, which equals `g`.
    pub fn separation_sum(&self) -> f64 {
        self.gamma + self.delta + self.lambda_minus + self.lambda_plus + self.h
    }

    /// `Omega- + Omega+`, which equals `-(X.V)`.
    pub fn omega_sum(&self) -> f64 {
        self.omega_minus + self.omega_plus
    }
}

pub fn eval_terms(pg: &PairGeometry, inst: &Instance, theta_i: f64, theta_j: f64) -> TermValues {
    PairTerms::new(pg, inst).eval(theta_i, theta_j)
}

/// Difference between the term sum and `C |V|^2 - (X.V)^2` computed directly.
pub fn identity_residual(pg: &PairGeometry, inst: &Instance, theta_i: f64, theta_j: f64) -> f64 {
    let sum = eval_terms(pg, inst, theta_i, theta_j).separation_sum();
    let direct = crate::geometry::PairState::new(inst, pg, theta_i, theta_j);
    sum - (pg.c * direct.v_sq - direct.x_dot_v * direct.x_dot_v)
}

/// Product-to-sum forms of the four cross products of `cos`/`sin` at
/// `psi_i` and `psi_j`: `(cc, ss, cs, sc)`.
pub fn product_to_sum(psi_i: f64, psi_j: f64) -> [f64; 4] {
    let (m, p) = (psi_i - psi_j, psi_i + psi_j);
    [
        0.5 * (m.cos() + p.cos()),
        0.5 * (m.cos() - p.cos()),
        0.5 * (p.sin() - m.sin()),
        0.5 * (m.sin() + p.sin()),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermExtrema {
    pub gamma: Extrema,
    pub delta: Extrema,
    pub lambda_minus: Extrema,
    pub lambda_plus: Extrema,
    pub omega_minus: Extrema,
    pub omega_plus: Extrema,
    pub h: f64,
}

/// BigM constants for one pair.
///
/// `m` bounds the separation sum from below. `m_minus` and `m_plus` are the
/// raw minimum and maximum of `Omega- + Omega+` (sum of per-term extrema);
/// `m_minus` is not negated here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigMBundle {
    pub i: usize,
    pub j: usize,
    pub m: f64,
    pub m_minus: f64,
    pub m_plus: f64,
}

pub fn compute_bigm(pg: &PairGeometry, inst: &Instance) -> BigMBundle {
    let (a, b) = (&inst.aircraft()[pg.i], &inst.aircraft()[pg.j]);
    let ext = PairTerms::new(pg, inst).extrema((a.theta_min, a.theta_max), (b.theta_min, b.theta_max));
    BigMBundle {
        i: pg.i,
        j: pg.j,
        m: ext.gamma.min + ext.delta.min + ext.lambda_minus.min + ext.lambda_plus.min + ext.h,
        m_minus: ext.omega_minus.min + ext.omega_plus.min,
        m_plus: ext.omega_minus.max + ext.omega_plus.max,
    }
}

pub fn compute_bigm_timed(pg: &PairGeometry, inst: &Instance) -> (BigMBundle, Duration) {
    let start = Instant::now();
    let bundle = compute_bigm(pg, inst);
    (bundle, start.elapsed())
}

/// BigM bundles for every pair, in pair order.
pub fn compute_bigm_all(inst: &Instance) -> Vec<BigMBundle> {
    let pairs = crate::geometry::all_pair_params(inst);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        pairs.par_iter().map(|pg| compute_bigm(pg, inst)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        pairs.iter().map(|pg| compute_bigm(pg, inst)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    fn of(e: &Extrema) -> Self {
        Self::new(e.min, e.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermBounds {
    pub gamma: Interval,
    pub delta: Interval,
    pub lambda_minus: Interval,
    pub lambda_plus: Interval,
    pub omega_sum: Interval,
    pub g: Interval,
    /// Sum of absolute term magnitudes; scale for rounding margins on `g`.
    pub g_scale: f64,
    pub omega_scale: f64,
}

impl TermExtrema {
    pub fn bounds(&self) -> TermBounds {
        let lo = self.gamma.min + self.delta.min + self.lambda_minus.min + self.lambda_plus.min + self.h;
        let hi = self.gamma.max + self.delta.max + self.lambda_minus.max + self.lambda_plus.max + self.h;
        let mag = |e: &Extrema| e.min.abs().max(e.max.abs());
        TermBounds {
            gamma: Interval::of(&self.gamma),
            delta: Interval::of(&self.delta),
            lambda_minus: Interval::of(&self.lambda_minus),
            lambda_plus: Interval::of(&self.lambda_plus),
            omega_sum: Interval::new(
                self.omega_minus.min + self.omega_plus.min,
                self.omega_minus.max + self.omega_plus.max,
            ),
            g: Interval::new(lo, hi),
            g_scale: mag(&self.gamma)
                + mag(&self.delta)
                + mag(&self.lambda_minus)
                + mag(&self.lambda_plus)
                + self.h.abs(),
            omega_scale: mag(&self.omega_minus) + mag(&self.omega_plus),
        }
    }
}

/// Per-term and aggregate bounds of a pair over a sub-box of deviations.
///
/// `sub_box` holds one `(lo, hi)` deviation interval per aircraft.
pub fn term_bounds_on_box(pg: &PairGeometry, inst: &Instance, sub_box: &[(f64, f64)]) -> Result<TermBounds> {
    if sub_box.len() != inst.len() {
        return Err(Error::DimensionMismatch {
            expected: inst.len(),
            got: sub_box.len(),
        });
    }
    for (index, &(lo, hi)) in sub_box.iter().enumerate() {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::EmptyBox {
                index: index + 1,
                lo,
                hi,
            });
        }
    }
    Ok(PairTerms::new(pg, inst).extrema(sub_box[pg.i], sub_box[pg.j]).bounds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pair_params, Aircraft};
    use std::f64::consts::{FRAC_PI_6, PI};

    fn head_on(bound: f64) -> Instance {
        Instance::new(
            "head-on",
            5.0,
            vec![
                Aircraft::new(-10.0, 0.0, 1.0, 0.0, -bound, bound),
                Aircraft::new(10.0, 0.0, 1.0, PI, -bound, bound),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sinusoid_extrema_examples() {
        let e = sinusoid_extrema(&SinusoidAffine::new(1.0, 0.0, 0.0, -FRAC_PI_6, FRAC_PI_6));
        assert!((e.min - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((e.argmin.abs() - FRAC_PI_6).abs() < 1e-15);
        assert!((e.max - 1.0).abs() < 1e-15 && e.argmax.abs() < 1e-15);

        let e = sinusoid_extrema(&SinusoidAffine::new(0.0, 1.0, 0.0, -FRAC_PI_6, FRAC_PI_6));
        assert!((e.min + 0.5).abs() < 1e-15);
        assert!((e.argmin + FRAC_PI_6).abs() < 1e-15);

        let e = sinusoid_extrema(&SinusoidAffine::new(-1.0, 0.0, 0.0, -FRAC_PI_6, FRAC_PI_6));
        assert!((e.min + 1.0).abs() < 1e-15 && e.argmin.abs() < 1e-15);
    }

    #[test]
    fn wide_interval_hits_global_extrema() {
        let s = SinusoidAffine::new(3.0, 4.0, 1.0, -10.0, 10.0);
        let e = sinusoid_extrema(&s);
        assert!((e.max - 6.0).abs() < 1e-12);
        assert!((e.min + 4.0).abs() < 1e-12);
        assert!((s.eval(e.argmax) - e.max).abs() < 1e-12);
        assert!((s.eval(e.argmin) - e.min).abs() < 1e-12);
    }

    #[test]
    fn constant_sinusoid() {
        let e = sinusoid_extrema(&SinusoidAffine::new(0.0, 0.0, 2.5, 0.0, 1.0));
        assert_eq!((e.min, e.max), (2.5, 2.5));
    }

    #[test]
    fn eval_terms_head_on() {
        let inst = head_on(FRAC_PI_6);
        let pg = pair_params(&inst, 0, 1).unwrap();
        let t = eval_terms(&pg, &inst, 0.0, 0.0);
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(t.gamma, -400.0));
        assert!(close(t.delta, -400.0));
        assert!(close(t.lambda_minus, 350.0));
        assert!(close(t.lambda_plus, -400.0));
        assert!(close(t.omega_minus, 20.0));
        assert!(close(t.omega_plus, 20.0));
        assert!(close(t.separation_sum(), -100.0));
        assert!(identity_residual(&pg, &inst, 0.0, 0.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_vanishes_when_cos_and_e_vanish() {
        let inst = Instance::new(
            "g0",
            5.0,
            vec![
                Aircraft::new(-10.0, 0.0, 1.0, std::f64::consts::FRAC_PI_2, -0.1, 0.1),
                Aircraft::new(10.0, 0.0, 1.0, PI, -0.1, 0.1),
            ],
        )
        .unwrap();
        let pg = pair_params(&inst, 0, 1).unwrap();
        assert!(eval_terms(&pg, &inst, 0.0, 0.0).gamma.abs() < 1e-12);
    }

    #[test]
    fn bigm_head_on() {
        let inst = head_on(FRAC_PI_6);
        let pg = pair_params(&inst, 0, 1).unwrap();
        let b = compute_bigm(&pg, &inst);
        assert!((b.m + 275.0).abs() < 1e-9, "{}", b.m);
        assert!((b.m_minus - 20.0 * 3f64.sqrt()).abs() < 1e-9);
        assert!((b.m_plus - 40.0).abs() < 1e-9);
    }

    #[test]
    fn bigm_point_box_is_exact() {
        let inst = head_on(0.0);
        let pg = pair_params(&inst, 0, 1).unwrap();
        let b = compute_bigm(&pg, &inst);
        assert!((b.m + 100.0).abs() < 1e-12);
    }

    #[test]
    fn full_box_bounds_match_bigm() {
        let inst = head_on(FRAC_PI_6);
        let pg = pair_params(&inst, 0, 1).unwrap();
        let tb = term_bounds_on_box(&pg, &inst, &inst.bounds()).unwrap();
        assert_eq!(tb.g.lo, compute_bigm(&pg, &inst).m);
    }

    #[test]
    fn point_box_bounds_are_tight() {
        let inst = head_on(FRAC_PI_6);
        let pg = pair_params(&inst, 0, 1).unwrap();
        let tb = term_bounds_on_box(&pg, &inst, &[(0.1, 0.1), (-0.2, -0.2)]).unwrap();
        assert!(tb.g.width() <= 1e-9);
        let exact = eval_terms(&pg, &inst, 0.1, -0.2).separation_sum();
        assert!(tb.g.contains(exact) || (tb.g.lo - exact).abs() < 1e-9);
    }

    #[test]
    fn empty_box_rejected() {
        let inst = head_on(FRAC_PI_6);
        let pg = pair_params(&inst, 0, 1).unwrap();
        let err = term_bounds_on_box(&pg, &inst, &[(0.1, 0.0), (0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::EmptyBox { index: 1, .. }));
    }

    #[test]
    fn product_to_sum_matches_products() {
        let (a, b) = (0.7_f64, -2.3_f64);
        let [cc, ss, cs, sc] = product_to_sum(a, b);
        assert!((cc - a.cos() * b.cos()).abs() < 1e-12);
        assert!((ss - a.sin() * b.sin()).abs() < 1e-12);
        assert!((cs - a.cos() * b.sin()).abs() < 1e-12);
        assert!((sc - a.sin() * b.cos()).abs() < 1e-12);
    }
}
