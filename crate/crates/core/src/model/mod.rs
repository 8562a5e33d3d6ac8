//! Solver-independent algebraic models of the deconfliction problem.
//!
//! [`build_m1`] produces the original disjunctive MINLP (trigonometric
//! relative velocity, closest-approach time and activation binaries) and
//! [`build_m2`] the separable reformulation, where every nonlinear function
//! depends on a single variable and the activation logic is expressed with
//! BigM constraints.

mod build;
mod export;

use serde::{Deserialize, Serialize};

pub use build::{build_m1, build_m2, complete_m1_point, complete_m2_point};
pub use export::{export_model, import_json, model_file_name, ModelFormat};

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(f64),
    Var(VarId),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn c(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn var(id: VarId) -> Self {
        Expr::Var(id)
    }

    pub fn add(terms: Vec<Expr>) -> Self {
        Expr::Add(terms)
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(factors: Vec<Expr>) -> Self {
        Expr::Mul(factors)
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Self {
        Expr::Neg(Box::new(a))
    }

    pub fn pow(a: Expr, k: i32) -> Self {
        Expr::Pow(Box::new(a), k)
    }

    pub fn sin(a: Expr) -> Self {
        Expr::Sin(Box::new(a))
    }

    pub fn cos(a: Expr) -> Self {
        Expr::Cos(Box::new(a))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_scaled(x).0
    }

    /// Value together with a magnitude scale: the same tree evaluated with
    /// every sum replaced by a sum of absolute values. Used to make residual
    /// tolerances relative.
    pub fn eval_scaled(&self, x: &[f64]) -> (f64, f64) {
        match self {
            Expr::Const(c) => (*c, c.abs()),
            Expr::Var(id) => (x[*id], x[*id].abs()),
            Expr::Add(ts) => ts.iter().fold((0.0, 0.0), |(v, s), t| {
                let (tv, ts) = t.eval_scaled(x);
                (v + tv, s + ts)
            }),
            Expr::Sub(a, b) => {
                let (av, as_) = a.eval_scaled(x);
                let (bv, bs) = b.eval_scaled(x);
                (av - bv, as_ + bs)
            }
            Expr::Mul(fs) => fs.iter().fold((1.0, 1.0), |(v, s), f| {
                let (fv, fs) = f.eval_scaled(x);
                (v * fv, s * fs)
            }),
            Expr::Div(a, b) => {
                let (av, as_) = a.eval_scaled(x);
                let (bv, _) = b.eval_scaled(x);
                (av / bv, as_ / bv.abs())
            }
            Expr::Neg(a) => {
                let (v, s) = a.eval_scaled(x);
                (-v, s)
            }
            Expr::Pow(a, k) => {
                let (v, s) = a.eval_scaled(x);
                (v.powi(*k), s.powi(*k))
            }
            Expr::Sin(a) => (a.eval(x).sin(), 1.0),
            Expr::Cos(a) => (a.eval(x).cos(), 1.0),
        }
    }

    /// Visit every node, parents before children.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Add(ts) | Expr::Mul(ts) => ts.iter().for_each(|t| t.walk(f)),
            Expr::Sub(a, b) | Expr::Div(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) => a.walk(f),
        }
    }

    /// Distinct variables referenced, sorted.
    pub fn variables(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Var(id) = e {
                out.push(*id);
            }
        });
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }

    /// True when the expression is a sum (or difference) of terms that each
    /// depend on at most one variable, with linear terms allowed to mix.
    pub fn is_separable(&self) -> bool {
        match self {
            Expr::Add(ts) => ts.iter().all(Expr::is_separable),
            Expr::Sub(a, b) => a.is_separable() && b.is_separable(),
            Expr::Neg(a) => a.is_separable(),
            Expr::Mul(fs) => {
                let nonconst: Vec<&Expr> = fs.iter().filter(|f| !f.is_constant()).collect();
                match nonconst.len() {
                    0 => true,
                    1 => nonconst[0].is_separable(),
                    _ => self.variables().len() <= 1,
                }
            }
            _ => self.variables().len() <= 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub body: Expr,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    /// Violation of the constraint at `x`, divided by `max(1, scale)`.
    pub fn relative_violation(&self, x: &[f64]) -> f64 {
        let (v, s) = self.body.eval_scaled(x);
        let diff = v - self.rhs;
        let viol = match self.relation {
            Relation::Le => diff.max(0.0),
            Relation::Ge => (-diff).max(0.0),
            Relation::Eq => diff.abs(),
        };
        if viol.is_nan() {
            return f64::INFINITY;
        }
        viol / s.max(self.rhs.abs()).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: Sense,
    pub expr: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    M1,
    M2,
}

impl Formulation {
    pub fn tag(&self) -> &'static str {
        match self {
            Formulation::M1 => "m1",
            Formulation::M2 => "m2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub formulation: Formulation,
    pub instance_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelIR {
    pub metadata: ModelMetadata,
    pub variables: Vec<Variable>,
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
}

impl ModelIR {
    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Every variable referenced by the objective or a constraint is declared.
    pub fn references_are_declared(&self) -> bool {
        let n = self.variables.len();
        std::iter::once(&self.objective.expr)
            .chain(self.constraints.iter().map(|c| &c.body))
            .all(|e| e.variables().iter().all(|&id| id < n))
    }

    /// Largest relative violation over constraints, bounds and integrality.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self.variables.iter().zip(x).map(|(v, &xi)| {
            let mut viol: f64 = 0.0;
            if let Some(lo) = v.lower {
                viol = viol.max((lo - xi) / lo.abs().max(1.0));
            }
            if let Some(hi) = v.upper {
                viol = viol.max((xi - hi) / hi.abs().max(1.0));
            }
            if v.kind == VarKind::Binary {
                viol = viol.max((xi - xi.round()).abs());
            }
            viol
        });
        self.constraints
            .iter()
            .map(|c| c.relative_violation(x))
            .chain(bounds)
            .fold(0.0, f64::max)
    }

    pub fn is_satisfied(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x) <= tol
    }
}
