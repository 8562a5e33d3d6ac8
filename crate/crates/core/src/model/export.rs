//! Text renderings of a [`ModelIR`]: AMPL model files and a JSON form that
//! round-trips exactly.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Expr, ModelIR, Relation, Sense, VarKind};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    /// AMPL `.mod` text with scalar variables and constraints.
    Ampl,
    /// Structured JSON, `.model.json`.
    Json,
}

impl ModelFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ModelFormat::Ampl => "mod",
            ModelFormat::Json => "model.json",
        }
    }
}

/// `<instance-id>.<m1|m2>.<ext>`
pub fn model_file_name(model: &ModelIR, format: ModelFormat) -> String {
    format!(
        "{}.{}.{}",
        model.metadata.instance_id,
        model.metadata.formulation.tag(),
        format.extension()
    )
}

pub fn export_model(model: &ModelIR, format: ModelFormat) -> Result<String> {
    check_finite(model)?;
    match format {
        ModelFormat::Ampl => Ok(to_ampl(model)),
        ModelFormat::Json => to_json(model),
    }
}

fn check_finite(model: &ModelIR) -> Result<()> {
    let mut bad = None;
    let exprs = std::iter::once(&model.objective.expr).chain(model.constraints.iter().map(|c| &c.body));
    for e in exprs {
        e.walk(&mut |node| {
            if let Expr::Const(c) = node {
                if !c.is_finite() && bad.is_none() {
                    bad = Some(*c);
                }
            }
        });
    }
    let bounds = model
        .variables
        .iter()
        .flat_map(|v| v.lower.into_iter().chain(v.upper))
        .chain(model.constraints.iter().map(|c| c.rhs));
    for b in bounds {
        if !b.is_finite() && bad.is_none() {
            bad = Some(b);
        }
    }
    match bad {
        Some(c) => Err(Error::Unsupported(format!("non-finite constant {c}"))),
        None => Ok(()),
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    model: ModelIR,
}

fn to_json(model: &ModelIR) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    })?;
    s.push('\n');
    Ok(s)
}

pub fn import_json(text: &str) -> Result<ModelIR> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::SchemaVersion {
            found: file.format_version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    Ok(file.model)
}

/// Shortest decimal that parses back to the same `f64`.
fn num(x: f64) -> String {
    if x < 0.0 {
        format!("({x})")
    } else {
        format!("{x}")
    }
}

// Binding strength used to decide on parentheses.
const P_ADD: u8 = 1;
const P_MUL: u8 = 2;
const P_UNARY: u8 = 3;
const P_POW: u8 = 4;
const P_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(ts) if ts.len() > 1 => P_ADD,
        Expr::Sub(..) => P_ADD,
        Expr::Mul(fs) if fs.len() > 1 => P_MUL,
        Expr::Div(..) => P_MUL,
        // Always parenthesised when nested.
        Expr::Neg(_) => 0,
        Expr::Pow(..) => P_POW,
        Expr::Add(ts) | Expr::Mul(ts) => ts.first().map_or(P_ATOM, precedence),
        _ => P_ATOM,
    }
}

struct AmplWriter<'a> {
    names: Vec<&'a str>,
}

impl AmplWriter<'_> {
    fn wrap(&self, e: &Expr, min: u8, out: &mut String) {
        if precedence(e) < min {
            out.push('(');
            self.expr(e, out);
            out.push(')');
        } else {
            self.expr(e, out);
        }
    }

    fn expr(&self, e: &Expr, out: &mut String) {
        match e {
            Expr::Const(c) => out.push_str(&num(*c)),
            Expr::Var(id) => out.push_str(self.names[*id]),
            Expr::Add(ts) if ts.is_empty() => out.push('0'),
            Expr::Add(ts) => {
                for (k, t) in ts.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" + ");
                    }
                    self.wrap(t, P_ADD, out);
                }
            }
            Expr::Sub(a, b) => {
                self.wrap(a, P_ADD, out);
                out.push_str(" - ");
                self.wrap(b, P_MUL, out);
            }
            Expr::Mul(fs) if fs.is_empty() => out.push('1'),
            Expr::Mul(fs) => {
                for (k, f) in fs.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" * ");
                    }
                    self.wrap(f, P_MUL, out);
                }
            }
            Expr::Div(a, b) => {
                self.wrap(a, P_MUL, out);
                out.push_str(" / ");
                self.wrap(b, P_UNARY, out);
            }
            Expr::Neg(a) => {
                out.push('-');
                self.wrap(a, P_POW, out);
            }
            Expr::Pow(a, k) => {
                self.wrap(a, P_ATOM, out);
                let _ = write!(out, "^{k}");
            }
            Expr::Sin(a) => {
                out.push_str("sin(");
                self.expr(a, out);
                out.push(')');
            }
            Expr::Cos(a) => {
                out.push_str("cos(");
                self.expr(a, out);
                out.push(')');
            }
        }
    }
}

fn to_ampl(model: &ModelIR) -> String {
    let w = AmplWriter {
        names: model.variables.iter().map(|v| v.name.as_str()).collect(),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# instance {}, formulation {}",
        model.metadata.instance_id,
        model.metadata.formulation.tag().to_uppercase()
    );
    out.push('\n');

    for v in &model.variables {
        let _ = write!(out, "var {}", v.name);
        match v.kind {
            VarKind::Binary => out.push_str(" binary"),
            VarKind::Continuous => {
                if let Some(lo) = v.lower {
                    let _ = write!(out, " >= {}", num(lo));
                }
                if let Some(hi) = v.upper {
                    if v.lower.is_some() {
                        out.push(',');
                    }
                    let _ = write!(out, " <= {}", num(hi));
                }
            }
        }
        out.push_str(";\n");
    }
    out.push('\n');

    let sense = match model.objective.sense {
        Sense::Minimize => "minimize",
        Sense::Maximize => "maximize",
    };
    let _ = write!(out, "{sense} obj: ");
    w.expr(&model.objective.expr, &mut out);
    out.push_str(";\n\n");

    for c in &model.constraints {
        let _ = write!(out, "subject to {}: ", c.name);
        w.expr(&c.body, &mut out);
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {rel} {};", num(c.rhs));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aircraft, Instance};
    use crate::model::{build_m1, build_m2, Constraint};
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
    fn json_round_trip() {
        let inst = head_on();
        for m in [build_m1(&inst), build_m2(&inst, &compute_bigm_all(&inst)).unwrap()] {
            let text = export_model(&m, ModelFormat::Json).unwrap();
            assert_eq!(import_json(&text).unwrap(), m);
        }
    }

    #[test]
    fn ampl_head_on_m2_constants() {
        let inst = head_on();
        let m = build_m2(&inst, &compute_bigm_all(&inst)).unwrap();
        let text = export_model(&m, ModelFormat::Ampl).unwrap();
        let sep = text.lines().find(|l| l.starts_with("subject to sep_1_2:")).unwrap();
        assert!(sep.contains("-275"), "{sep}");
        let hi = text.lines().find(|l| l.starts_with("subject to band_hi_1_2:")).unwrap();
        assert!(hi.contains("40 * y_1_2"), "{hi}");
        assert!(text.contains("var y_1_2 binary;"));
        assert!(text.contains("minimize obj: Theta;"));
    }

    #[test]
    fn ampl_m1_shape() {
        let text = export_model(&build_m1(&head_on()), ModelFormat::Ampl).unwrap();
        assert!(text.contains("minimize obj: theta_1^2 + theta_2^2;"));
        assert!(
            text.contains("subject to act_1_2: tm_1_2 * (2 * y_1_2 - 1) >= 0;"),
            "{text}"
        );
        assert!(text.contains("cos(3.141592653589793 + theta_2)"));
    }

    #[test]
    fn file_names() {
        let m = build_m1(&head_on());
        assert_eq!(model_file_name(&m, ModelFormat::Ampl), "head-on.m1.mod");
        assert_eq!(model_file_name(&m, ModelFormat::Json), "head-on.m1.model.json");
    }

    #[test]
    fn non_finite_constant_rejected() {
        let mut m = build_m1(&head_on());
        m.constraints.push(Constraint {
            name: "bad".into(),
            body: Expr::c(f64::NAN),
            relation: Relation::Le,
            rhs: 0.0,
        });
        assert!(matches!(
            export_model(&m, ModelFormat::Ampl),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            export_model(&m, ModelFormat::Json),
            Err(Error::Unsupported(_))
        ));
    }
}
