use crate::error::{Error, Result};
use crate::geometry::{all_pair_params, Instance, PairGeometry};
use crate::terms::{BigMBundle, PairTerms};

use super::{
    Constraint, Expr, Formulation, ModelIR, ModelMetadata, Objective, Relation, Sense, VarId, VarKind, Variable,
};

struct Builder {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn new() -> Self {
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
        }
    }

    fn var(&mut self, name: String, kind: VarKind, lower: Option<f64>, upper: Option<f64>) -> VarId {
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        self.variables.len() - 1
    }

    fn free(&mut self, name: String) -> VarId {
        self.var(name, VarKind::Continuous, None, None)
    }

    fn binary(&mut self, name: String) -> VarId {
        self.var(name, VarKind::Binary, Some(0.0), Some(1.0))
    }

    fn constrain(&mut self, name: String, body: Expr, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            name,
            body,
            relation,
            rhs,
        });
    }

    fn thetas(&mut self, inst: &Instance) -> Vec<VarId> {
        inst.aircraft()
            .iter()
            .enumerate()
            .map(|(k, a)| {
                self.var(
                    format!("theta_{}", k + 1),
                    VarKind::Continuous,
                    Some(a.theta_min),
                    Some(a.theta_max),
                )
            })
            .collect()
    }

    fn finish(self, formulation: Formulation, inst: &Instance, objective: Objective) -> ModelIR {
        ModelIR {
            metadata: ModelMetadata {
                formulation,
                instance_id: inst.id().to_string(),
            },
            variables: self.variables,
            objective,
            constraints: self.constraints,
        }
    }
}

fn tag(pg: &PairGeometry) -> String {
    format!("{}_{}", pg.i + 1, pg.j + 1)
}

fn sum_sq(thetas: &[VarId]) -> Expr {
    Expr::add(thetas.iter().map(|&t| Expr::pow(Expr::var(t), 2)).collect())
}

/// `phi + theta`
fn heading(phi: f64, theta: VarId) -> Expr {
    Expr::add(vec![Expr::c(phi), Expr::var(theta)])
}

/// Original formulation: heading deviations, closest-approach times,
/// relative velocity components and activation binaries per pair.
pub fn build_m1(inst: &Instance) -> ModelIR {
    let mut b = Builder::new();
    let thetas = b.thetas(inst);
    let ac = inst.aircraft();

    for pg in all_pair_params(inst) {
        let t = tag(&pg);
        let (ai, aj) = (&ac[pg.i], &ac[pg.j]);
        let y = b.binary(format!("y_{t}"));
        let tm = b.free(format!("tm_{t}"));
        let vx = b.free(format!("Vx_{t}"));
        let vy = b.free(format!("Vy_{t}"));
        let (ti, tj) = (thetas[pg.i], thetas[pg.j]);

        b.constrain(
            format!("vdef_x_{t}"),
            Expr::sub(
                Expr::var(vx),
                Expr::sub(
                    Expr::mul(vec![Expr::cos(heading(ai.phi, ti)), Expr::c(ai.v)]),
                    Expr::mul(vec![Expr::cos(heading(aj.phi, tj)), Expr::c(aj.v)]),
                ),
            ),
            Relation::Eq,
            0.0,
        );
        b.constrain(
            format!("vdef_y_{t}"),
            Expr::sub(
                Expr::var(vy),
                Expr::sub(
                    Expr::mul(vec![Expr::sin(heading(ai.phi, ti)), Expr::c(ai.v)]),
                    Expr::mul(vec![Expr::sin(heading(aj.phi, tj)), Expr::c(aj.v)]),
                ),
            ),
            Relation::Eq,
            0.0,
        );

        let v_sq = || Expr::add(vec![Expr::pow(Expr::var(vx), 2), Expr::pow(Expr::var(vy), 2)]);
        let x_dot_v = || {
            Expr::add(vec![
                Expr::mul(vec![Expr::c(pg.d), Expr::var(vx)]),
                Expr::mul(vec![Expr::c(pg.e), Expr::var(vy)]),
            ])
        };

        // y * (|V|^2 (|X|^2 - d^2) - (X.V)^2) >= 0
        b.constrain(
            format!("sep_{t}"),
            Expr::mul(vec![
                Expr::var(y),
                Expr::sub(Expr::mul(vec![v_sq(), Expr::c(pg.c)]), Expr::pow(x_dot_v(), 2)),
            ]),
            Relation::Ge,
            0.0,
        );
        // tm = -(X.V) / |V|^2
        b.constrain(
            format!("time_{t}"),
            Expr::sub(Expr::var(tm), Expr::neg(Expr::div(x_dot_v(), v_sq()))),
            Relation::Eq,
            0.0,
        );
        // tm (2y - 1) >= 0
        b.constrain(
            format!("act_{t}"),
            Expr::mul(vec![
                Expr::var(tm),
                Expr::sub(Expr::mul(vec![Expr::c(2.0), Expr::var(y)]), Expr::c(1.0)),
            ]),
            Relation::Ge,
            0.0,
        );
    }

    let objective = Objective {
        sense: Sense::Minimize,
        expr: sum_sq(&thetas),
    };
    b.finish(Formulation::M1, inst, objective)
}

/// `-(cos(h) D v)^2 - (sin(h) E v)^2 - cos(h) sin(h) 2 D E v^2`, for one heading.
fn neg_square_term(phi: f64, theta: VarId, d: f64, e: f64, v: f64) -> Expr {
    Expr::sub(
        Expr::sub(
            Expr::neg(Expr::pow(
                Expr::mul(vec![Expr::cos(heading(phi, theta)), Expr::c(d * v)]),
                2,
            )),
            Expr::pow(Expr::mul(vec![Expr::sin(heading(phi, theta)), Expr::c(e * v)]), 2),
        ),
        Expr::mul(vec![
            Expr::cos(heading(phi, theta)),
            Expr::sin(heading(phi, theta)),
            Expr::c(2.0 * d * e * v * v),
        ]),
    )
}

/// `sign * (D cos(h) v + E sin(h) v)`
fn omega_term(phi: f64, theta: VarId, d: f64, e: f64, v: f64, sign: f64) -> Expr {
    Expr::add(vec![
        Expr::mul(vec![Expr::c(sign * d), Expr::cos(heading(phi, theta)), Expr::c(v)]),
        Expr::mul(vec![Expr::c(sign * e), Expr::sin(heading(phi, theta)), Expr::c(v)]),
    ])
}

/// Separable reformulation with an epigraph objective and BigM activation.
///
/// `bigm` must contain a bundle for every pair of the instance. The term
/// variables `Gamma`, `Delta`, `Lambda-`, `Lambda+` are bounded above by
/// their defining expressions, so the separation constraint holds exactly
/// when `g >= 0` for active pairs. The activation band is
/// `m_minus (1 - y) <= Omega- + Omega+ <= m_plus y` with the raw minimum
/// `m_minus`.
pub fn build_m2(inst: &Instance, bigm: &[BigMBundle]) -> Result<ModelIR> {
    let mut b = Builder::new();
    let thetas = b.thetas(inst);
    let bound_sq: f64 = inst
        .aircraft()
        .iter()
        .map(|a| a.theta_min.powi(2).max(a.theta_max.powi(2)))
        .sum();
    let big_theta = b.var("Theta".into(), VarKind::Continuous, Some(0.0), Some(bound_sq));
    b.constrain(
        "epigraph".into(),
        Expr::sub(Expr::var(big_theta), sum_sq(&thetas)),
        Relation::Ge,
        0.0,
    );

    for pg in all_pair_params(inst) {
        let bundle = bigm
            .iter()
            .find(|m| m.i == pg.i && m.j == pg.j)
            .ok_or(Error::MissingBigM {
                i: pg.i + 1,
                j: pg.j + 1,
            })?;
        let terms = PairTerms::new(&pg, inst);
        let t = tag(&pg);
        let (ai, aj) = (&inst.aircraft()[pg.i], &inst.aircraft()[pg.j]);
        let (ti, tj) = (thetas[pg.i], thetas[pg.j]);

        let y = b.binary(format!("y_{t}"));
        let phim = b.var(
            format!("PhiM_{t}"),
            VarKind::Continuous,
            Some(ai.phi + ai.theta_min - aj.phi - aj.theta_max),
            Some(ai.phi + ai.theta_max - aj.phi - aj.theta_min),
        );
        let phip = b.var(
            format!("PhiP_{t}"),
            VarKind::Continuous,
            Some(ai.phi + ai.theta_min + aj.phi + aj.theta_min),
            Some(ai.phi + ai.theta_max + aj.phi + aj.theta_max),
        );
        let gamma = b.free(format!("Gamma_{t}"));
        let delta = b.free(format!("Delta_{t}"));
        let lam_m = b.free(format!("LambdaM_{t}"));
        let lam_p = b.free(format!("LambdaP_{t}"));
        let om_m = b.free(format!("OmegaM_{t}"));
        let om_p = b.free(format!("OmegaP_{t}"));

        b.constrain(
            format!("phim_{t}"),
            Expr::add(vec![Expr::var(phim), Expr::neg(Expr::var(ti)), Expr::var(tj)]),
            Relation::Eq,
            ai.phi - aj.phi,
        );
        b.constrain(
            format!("phip_{t}"),
            Expr::add(vec![
                Expr::var(phip),
                Expr::neg(Expr::var(ti)),
                Expr::neg(Expr::var(tj)),
            ]),
            Relation::Eq,
            ai.phi + aj.phi,
        );
        b.constrain(
            format!("gamma_{t}"),
            Expr::sub(Expr::var(gamma), neg_square_term(ai.phi, ti, pg.d, pg.e, ai.v)),
            Relation::Le,
            0.0,
        );
        b.constrain(
            format!("delta_{t}"),
            Expr::sub(Expr::var(delta), neg_square_term(aj.phi, tj, pg.d, pg.e, aj.v)),
            Relation::Le,
            0.0,
        );
        b.constrain(
            format!("lambdam_{t}"),
            Expr::sub(
                Expr::var(lam_m),
                Expr::mul(vec![Expr::cos(Expr::var(phim)), Expr::c(terms.k_minus)]),
            ),
            Relation::Le,
            0.0,
        );
        b.constrain(
            format!("lambdap_{t}"),
            Expr::sub(
                Expr::var(lam_p),
                Expr::add(vec![
                    Expr::mul(vec![Expr::cos(Expr::var(phip)), Expr::c(terms.p_plus)]),
                    Expr::mul(vec![Expr::sin(Expr::var(phip)), Expr::c(terms.q_plus)]),
                ]),
            ),
            Relation::Le,
            0.0,
        );

        let one_minus_y = || Expr::sub(Expr::c(1.0), Expr::var(y));
        b.constrain(
            format!("sep_{t}"),
            Expr::sub(
                Expr::add(vec![
                    Expr::var(gamma),
                    Expr::var(delta),
                    Expr::var(lam_m),
                    Expr::var(lam_p),
                    Expr::c(pg.h),
                ]),
                Expr::mul(vec![Expr::c(bundle.m), one_minus_y()]),
            ),
            Relation::Ge,
            0.0,
        );
        let omega_sum = || Expr::add(vec![Expr::var(om_m), Expr::var(om_p)]);
        b.constrain(
            format!("band_lo_{t}"),
            Expr::sub(omega_sum(), Expr::mul(vec![Expr::c(bundle.m_minus), one_minus_y()])),
            Relation::Ge,
            0.0,
        );
        b.constrain(
            format!("band_hi_{t}"),
            Expr::sub(omega_sum(), Expr::mul(vec![Expr::c(bundle.m_plus), Expr::var(y)])),
            Relation::Le,
            0.0,
        );
        b.constrain(
            format!("omegam_{t}"),
            Expr::sub(Expr::var(om_m), omega_term(ai.phi, ti, pg.d, pg.e, ai.v, -1.0)),
            Relation::Eq,
            0.0,
        );
        b.constrain(
            format!("omegap_{t}"),
            Expr::sub(Expr::var(om_p), omega_term(aj.phi, tj, pg.d, pg.e, aj.v, 1.0)),
            Relation::Eq,
            0.0,
        );
    }

    let objective = Objective {
        sense: Sense::Minimize,
        expr: Expr::var(big_theta),
    };
    Ok(b.finish(Formulation::M2, inst, objective))
}

/// Full M1 variable vector for given deviations and activation values.
///
/// `y` holds one entry per pair in pair order. Returns `None` when a pair has
/// zero relative velocity and the closest-approach time is undefined.
pub fn complete_m1_point(model: &ModelIR, inst: &Instance, theta: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let mut x = vec![0.0; model.variables.len()];
    x[..theta.len()].copy_from_slice(theta);
    for (k, pg) in all_pair_params(inst).iter().enumerate() {
        let st = crate::geometry::PairState::new(inst, pg, theta[pg.i], theta[pg.j]);
        if st.v_sq == 0.0 {
            return None;
        }
        let t = tag(pg);
        let id = |name: &str| model.var_id(&format!("{name}_{t}")).expect("M1 variable");
        x[id("y")] = y[k];
        x[id("tm")] = -st.x_dot_v / st.v_sq;
        x[id("Vx")] = st.v[0];
        x[id("Vy")] = st.v[1];
    }
    Some(x)
}

/// Full M2 variable vector: definitional variables take their defining
/// values, the term variables sit at their upper bounds and `Theta` equals
/// the sum of squares.
pub fn complete_m2_point(model: &ModelIR, inst: &Instance, theta: &[f64], y: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; model.variables.len()];
    x[..theta.len()].copy_from_slice(theta);
    x[model.var_id("Theta").expect("Theta")] = theta.iter().map(|t| t * t).sum();
    for (k, pg) in all_pair_params(inst).iter().enumerate() {
        let tv = PairTerms::new(pg, inst).eval(theta[pg.i], theta[pg.j]);
        let t = tag(pg);
        let id = |name: &str| model.var_id(&format!("{name}_{t}")).expect("M2 variable");
        x[id("y")] = y[k];
        x[id("PhiM")] = tv.phi_minus;
        x[id("PhiP")] = tv.phi_plus;
        x[id("Gamma")] = tv.gamma;
        x[id("Delta")] = tv.delta;
        x[id("LambdaM")] = tv.lambda_minus;
        x[id("LambdaP")] = tv.lambda_plus;
        x[id("OmegaM")] = tv.omega_minus;
        x[id("OmegaP")] = tv.omega_plus;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aircraft;
    use crate::instance::{gen_cp, CpConfig};
    use crate::terms::compute_bigm_all;
    use std::f64::consts::{FRAC_PI_6, PI};

    fn head_on() -> Instance {
        Instance::new(
            "head-on",
            5.0,
            vec![
                Aircraft::new(-10.0, 0.0, 1.0, 0.0, -FRAC_PI_6, FRAC_PI_6),
                Aircraft::new(10.0, 0.0, 1.0, PI, -FRAC_PI_6, FRAC_PI_6),
            ],
        )
        .unwrap()
    }

    #[test]
    fn m1_counts_two_aircraft() {
        let m = build_m1(&head_on());
        assert_eq!(m.variables.len(), 2 + 1 + 1 + 2);
        assert_eq!(m.num_binaries(), 1);
        assert_eq!(m.constraints.len(), 5);
        assert!(m.references_are_declared());
    }

    #[test]
    fn m1_counts_three_aircraft() {
        let inst = gen_cp(&CpConfig::with_n(3)).unwrap();
        let m = build_m1(&inst);
        assert_eq!(m.num_binaries(), 3);
        assert_eq!(m.constraints.len(), 15);
    }

    #[test]
    fn m2_counts_three_aircraft() {
        let inst = gen_cp(&CpConfig::with_n(3)).unwrap();
        let m = build_m2(&inst, &compute_bigm_all(&inst)).unwrap();
        assert_eq!(m.num_binaries(), 3);
        // theta (3) + Theta + 3 * (y + 8 auxiliaries)
        assert_eq!(m.variables.len(), 3 + 1 + 3 * 9);
        assert!(m.references_are_declared());
        let m1 = build_m1(&inst);
        assert!(m.variables.len() > m1.variables.len());
        assert!(m.constraints.len() > m1.constraints.len());
    }

    #[test]
    fn m2_requires_every_bundle() {
        let inst = gen_cp(&CpConfig::with_n(3)).unwrap();
        let mut bigm = compute_bigm_all(&inst);
        bigm.pop();
        assert!(matches!(build_m2(&inst, &bigm), Err(Error::MissingBigM { i: 2, j: 3 })));
    }

    #[test]
    fn m2_constraints_are_separable() {
        let inst = gen_cp(&CpConfig::with_n(4)).unwrap();
        let m = build_m2(&inst, &compute_bigm_all(&inst)).unwrap();
        for c in &m.constraints {
            assert!(c.body.is_separable(), "{} is not separable", c.name);
        }
        let m1 = build_m1(&inst);
        assert!(m1.constraints.iter().any(|c| !c.body.is_separable()));
    }

    #[test]
    fn head_on_m2_uses_bigm_constants() {
        let inst = head_on();
        let m = build_m2(&inst, &compute_bigm_all(&inst)).unwrap();
        let sep = m.constraints.iter().find(|c| c.name == "sep_1_2").unwrap();
        let mut consts = Vec::new();
        sep.body.walk(&mut |e| {
            if let Expr::Const(c) = e {
                consts.push(*c);
            }
        });
        assert!(consts.iter().any(|&c| (c + 275.0).abs() < 1e-9));
        let hi = m.constraints.iter().find(|c| c.name == "band_hi_1_2").unwrap();
        let mut consts = Vec::new();
        hi.body.walk(&mut |e| {
            if let Expr::Const(c) = e {
                consts.push(*c);
            }
        });
        assert!(consts.iter().any(|&c| (c - 40.0).abs() < 1e-9));
    }

    #[test]
    fn epigraph_binds_at_sum_of_squares() {
        let inst = head_on();
        let m = build_m2(&inst, &compute_bigm_all(&inst)).unwrap();
        let theta = [0.2, 0.3];
        let x = complete_m2_point(&m, &inst, &theta, &[1.0]);
        let obj = m.objective.expr.eval(&x);
        assert!((obj - 0.13).abs() < 1e-15);
        let epi = &m.constraints[0];
        assert!(epi.relative_violation(&x) == 0.0);
        let mut below = x.clone();
        below[m.var_id("Theta").unwrap()] -= 1e-3;
        assert!(epi.relative_violation(&below) > 0.0);
    }

    #[test]
    fn feasible_m2_point_is_feasible_for_m1() {
        let inst = head_on();
        let m1 = build_m1(&inst);
        let m2 = build_m2(&inst, &compute_bigm_all(&inst)).unwrap();
        // Both aircraft turn right by 0.3 rad: miss distance 20 sin(0.3) > 5.
        let theta = [-0.3, -0.3];
        let x2 = complete_m2_point(&m2, &inst, &theta, &[1.0]);
        assert!(m2.is_satisfied(&x2, 1e-7));
        let x1 = complete_m1_point(&m1, &inst, &theta, &[1.0]).unwrap();
        assert!(m1.is_satisfied(&x1, 1e-7));

        let theta = [0.0, 0.0];
        for y in [0.0, 1.0] {
            assert!(!m2.is_satisfied(&complete_m2_point(&m2, &inst, &theta, &[y]), 1e-7));
            assert!(!m1.is_satisfied(&complete_m1_point(&m1, &inst, &theta, &[y]).unwrap(), 1e-7));
        }
    }
}
