//! Benchmark manifests, per-instance runs and CSV reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::error::Result;
use crate::geometry::Instance;
use crate::instance::{gen_cp, gen_rcp, read_instance, CpConfig, RcpConfig};
use crate::model::Formulation;
use crate::oracle::{oracle_verify, OracleConfig};
use crate::solver::{solve, SolveStatus, SolverConfig};
use crate::terms::compute_bigm_all;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifestEntry {
    /// An instance file; relative paths are resolved against the manifest.
    File {
        path: PathBuf,
    },
    Cp(CpConfig),
    Rcp(RcpConfig),
    /// One RCP instance per seed, sharing the remaining parameters.
    RcpBatch {
        #[serde(flatten)]
        config: RcpConfig,
        seeds: Vec<u64>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub entries: Vec<ManifestEntry>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut m = Self::parse(&std::fs::read_to_string(path)?)?;
        m.base_dir = path.parent().map(Path::to_path_buf);
        Ok(m)
    }

    /// Instances in manifest order, or the error that prevented building each.
    /// The label of a failed entry stands in for its id.
    pub fn instances(&self) -> Vec<(String, Result<Instance>)> {
        let mut out = Vec::new();
        for entry in &self.entries {
            match entry {
                ManifestEntry::File { path } => {
                    let full = match &self.base_dir {
                        Some(dir) if path.is_relative() => dir.join(path),
                        _ => path.clone(),
                    };
                    out.push((path.display().to_string(), read_instance(full)));
                }
                ManifestEntry::Cp(cfg) => out.push((format!("cp-{}", cfg.n), gen_cp(cfg))),
                ManifestEntry::Rcp(cfg) => out.push((format!("rcp-{}-{}", cfg.cp.n, cfg.seed), gen_rcp(cfg))),
                ManifestEntry::RcpBatch { config, seeds } => {
                    for &seed in seeds {
                        let cfg = RcpConfig { seed, ..*config };
                        out.push((format!("rcp-{}-{}", cfg.cp.n, seed), gen_rcp(&cfg)));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub solver: SolverConfig,
    pub formulation: Formulation,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            formulation: Formulation::M2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub id: String,
    pub n: usize,
    pub formulation: Formulation,
    pub time_s: f64,
    pub primal: Option<f64>,
    pub dual: Option<f64>,
    /// Solver status, or `error` when the instance could not be run.
    pub status: String,
    pub verified: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// Per-`n` summary of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    pub count: usize,
    /// Mean dual bound over rows that have one.
    pub dual_mean: Option<f64>,
    /// Rows solved to optimality.
    pub solved: usize,
    /// Rows with a verified feasible solution, optimal ones included.
    pub feasible: usize,
}

fn run_one(inst: &Instance, cfg: &BenchConfig) -> Result<BenchRow> {
    let start = Instant::now();
    if cfg.formulation == Formulation::M2 {
        // The bounds are part of the M2 pipeline even though the solver
        // bounds each node itself.
        let _ = compute_bigm_all(inst);
    }
    let res = solve(inst, &cfg.solver)?;
    let time_s = start.elapsed().as_secs_f64();
    let verified = match &res.theta {
        Some(theta) => oracle_verify(inst, theta, &OracleConfig::for_instance(inst, theta)?)?.pass,
        None => false,
    };
    Ok(BenchRow {
        id: inst.id().to_string(),
        n: inst.len(),
        formulation: cfg.formulation,
        time_s,
        primal: res.primal,
        dual: res.dual.is_finite().then_some(res.dual),
        status: res.status.as_str().to_string(),
        verified,
        error: None,
    })
}

/// Solve every manifest entry. Failures are recorded in their row and the
/// run continues. Rows are ordered by instance id, numbers compared by value.
pub fn run_bench(manifest: &Manifest, cfg: &BenchConfig) -> BenchReport {
    let mut rows: Vec<BenchRow> = manifest
        .instances()
        .into_iter()
        .map(|(label, inst)| {
            let n = inst.as_ref().map_or(0, Instance::len);
            inst.and_then(|i| run_one(&i, cfg)).unwrap_or_else(|e| BenchRow {
                id: label,
                n,
                formulation: cfg.formulation,
                time_s: 0.0,
                primal: None,
                dual: None,
                status: "error".into(),
                verified: false,
                error: Some(e.to_string()),
            })
        })
        .collect();
    rows.sort_by(|a, b| natural_key(&a.id).cmp(&natural_key(&b.id)));
    BenchReport { rows }
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Chunk<'a> {
    Num(u128),
    Text(&'a str),
}

fn natural_key(s: &str) -> Vec<Chunk<'_>> {
    let mut out = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let digits = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if digits > 0 {
            match rest[..digits].parse() {
                Ok(v) => out.push(Chunk::Num(v)),
                Err(_) => out.push(Chunk::Text(&rest[..digits])),
            }
            rest = &rest[digits..];
        } else {
            let text = rest.find(|c: char| c.is_ascii_digit()).unwrap_or(rest.len());
            out.push(Chunk::Text(&rest[..text]));
            rest = &rest[text..];
        }
    }
    out
}

/// Six significant digits in scientific notation, independent of locale.
pub fn fmt_sig6(x: f64) -> String {
    format!("{x:.5e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig6).unwrap_or_default()
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "id,n,formulation,time,primal,dual,status,verified";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.id,
                r.n,
                r.formulation.tag(),
                fmt_sig6(r.time_s),
                opt(r.primal),
                opt(r.dual),
                r.status,
                r.verified
            );
        }
        out
    }

    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut ns: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        ns.sort_unstable();
        ns.dedup();
        ns.into_iter()
            .map(|n| {
                let rows: Vec<&BenchRow> = self.rows.iter().filter(|r| r.n == n).collect();
                let duals: Vec<f64> = rows.iter().filter_map(|r| r.dual).collect();
                AggregateRow {
                    n,
                    count: rows.len(),
                    dual_mean: (!duals.is_empty()).then(|| duals.iter().sum::<f64>() / duals.len() as f64),
                    solved: rows
                        .iter()
                        .filter(|r| r.status == SolveStatus::Optimal.as_str())
                        .count(),
                    feasible: rows.iter().filter(|r| r.verified).count(),
                }
            })
            .collect()
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = String::from("n,count,dual_mean,solved,feasible\n");
        for a in self.aggregate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                a.n,
                a.count,
                opt(a.dual_mean),
                a.solved,
                a.feasible
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_entries_parse() {
        let m = Manifest::parse(
            r#"{"entries": [
                {"kind": "cp", "n": 4},
                {"kind": "rcp", "n": 5, "seed": 7},
                {"kind": "rcp_batch", "n": 6, "seeds": [1, 2]},
                {"kind": "file", "path": "a.inst.json"}
            ]}"#,
        )
        .unwrap();
        assert_eq!(m.entries.len(), 4);
        assert_eq!(m.entries[0], ManifestEntry::Cp(CpConfig::with_n(4)));
        assert_eq!(m.entries[1], ManifestEntry::Rcp(RcpConfig::new(5, 7)));
        let ids: Vec<String> = m.instances().into_iter().map(|(l, _)| l).collect();
        assert_eq!(ids, ["cp-4", "rcp-5-7", "rcp-6-1", "rcp-6-2", "a.inst.json"]);
    }

    #[test]
    fn empty_manifest_gives_empty_report() {
        let report = run_bench(&Manifest::default(), &BenchConfig::default());
        assert!(report.rows.is_empty());
        assert_eq!(report.to_csv(), format!("{}\n", BenchReport::CSV_HEADER));
    }

    #[test]
    fn missing_file_is_recorded() {
        let m = Manifest::parse(r#"{"entries": [{"kind": "file", "path": "/nonexistent/x.inst.json"}]}"#).unwrap();
        let report = run_bench(&m, &BenchConfig::default());
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].status, "error");
        assert!(!report.rows[0].verified);
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_sig6(0.000625), "6.25000e-4");
        assert_eq!(fmt_sig6(1234567.0), "1.23457e6");
    }

    #[test]
    fn natural_order() {
        let mut ids = vec!["cp-10", "cp-3", "cp-20", "rcp-3-1"];
        ids.sort_by(|a, b| natural_key(a).cmp(&natural_key(b)));
        assert_eq!(ids, ["cp-3", "cp-10", "cp-20", "rcp-3-1"]);
    }
}
