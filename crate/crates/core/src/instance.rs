//! Circle (CP) and randomised circle (RCP) instance families, and the
//! instance file format.
//!
//! The defaults (radius 200, speed 400, safety distance 5, deviations within
//! +-pi/6, RCP jitter of +-5% speed, +-pi/6 heading and +-10 radial position)
//! are conventional en-route values, not values taken from a published test bed.
//!
//! Randomness comes from ChaCha8 seeded with a `u64`, and uniform draws use the
//! top 53 bits of each output word, so generated instances are identical on
//! every platform.

use std::f64::consts::{FRAC_PI_6, TAU};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aircraft, Instance};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MAX_RETRIES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CpConfig {
    pub n: usize,
    pub radius: f64,
    pub speed: f64,
    pub d: f64,
    /// Deviations are bounded by `[-theta_bound, theta_bound]`.
    pub theta_bound: f64,
}

impl Default for CpConfig {
    fn default() -> Self {
        Self {
            n: 3,
            radius: 200.0,
            speed: 400.0,
            d: 5.0,
            theta_bound: FRAC_PI_6,
        }
    }
}

impl CpConfig {
    pub fn with_n(n: usize) -> Self {
        Self { n, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "speed must be positive, got {}",
                self.speed
            )));
        }
        if !(self.d > 0.0 && self.radius > self.d && self.radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "need radius > d > 0, got radius {} and d {}",
                self.radius, self.d
            )));
        }
        if !(self.theta_bound >= 0.0 && self.theta_bound.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "theta_bound must be finite and non-negative, got {}",
                self.theta_bound
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RcpConfig {
    #[serde(flatten)]
    pub cp: CpConfig,
    pub seed: u64,
    /// Relative speed perturbation: `v = speed * (1 + u)`.
    pub speed_jitter: (f64, f64),
    /// Additive heading perturbation in radians.
    pub heading_jitter: (f64, f64),
    /// Additive radial position perturbation.
    pub position_jitter: (f64, f64),
    pub max_retries: usize,
}

impl Default for RcpConfig {
    fn default() -> Self {
        Self {
            cp: CpConfig::default(),
            seed: 0,
            speed_jitter: (-0.05, 0.05),
            heading_jitter: (-FRAC_PI_6, FRAC_PI_6),
            position_jitter: (-10.0, 10.0),
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

impl RcpConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            cp: CpConfig::with_n(n),
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        self.cp.validate()?;
        for (name, (lo, hi)) in [
            ("speed_jitter", self.speed_jitter),
            ("heading_jitter", self.heading_jitter),
            ("position_jitter", self.position_jitter),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be a finite interval, got [{lo}, {hi}]"
                )));
            }
        }
        if self.speed_jitter.0 <= -1.0 {
            return Err(Error::InvalidConfig(
                "speed_jitter would allow non-positive speeds".into(),
            ));
        }
        Ok(())
    }
}

fn cp_id(n: usize) -> String {
    format!("cp-{n}")
}

/// Aircraft evenly spaced on a circle, all heading to its centre.
pub fn gen_cp(cfg: &CpConfig) -> Result<Instance> {
    cfg.validate()?;
    let nearest = 2.0 * cfg.radius * (std::f64::consts::PI / cfg.n as f64).sin();
    if nearest < cfg.d {
        return Err(Error::InvalidConfig(format!(
            "radius {} is too small for {} aircraft: neighbours start {nearest:.6} apart, below d = {}",
            cfg.radius, cfg.n, cfg.d
        )));
    }
    let aircraft = (0..cfg.n)
        .map(|k| {
            let alpha = TAU * k as f64 / cfg.n as f64;
            Aircraft::new(
                cfg.radius * alpha.cos(),
                cfg.radius * alpha.sin(),
                cfg.speed,
                (alpha + std::f64::consts::PI).rem_euclid(TAU),
                -cfg.theta_bound,
                cfg.theta_bound,
            )
        })
        .collect();
    Instance::new(cp_id(cfg.n), cfg.d, aircraft)
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + (hi - lo) * u
}

/// CP instance with seeded speed, heading and radial jitter.
///
/// Draws that put two aircraft closer than `d` at `t = 0` are discarded and
/// redrawn from the same stream.
pub fn gen_rcp(cfg: &RcpConfig) -> Result<Instance> {
    cfg.validate()?;
    let base = gen_cp(&cfg.cp)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let id = format!("rcp-{}-{}", cfg.cp.n, cfg.seed);

    for _ in 0..=cfg.max_retries {
        let aircraft: Vec<Aircraft> = base
            .aircraft()
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let alpha = TAU * k as f64 / cfg.cp.n as f64;
                let dv = uniform(&mut rng, cfg.speed_jitter);
                let dphi = uniform(&mut rng, cfg.heading_jitter);
                let dr = uniform(&mut rng, cfg.position_jitter);
                let r = cfg.cp.radius + dr;
                let (x0, y0) = if dr == 0.0 {
                    (a.x0, a.y0)
                } else {
                    (r * alpha.cos(), r * alpha.sin())
                };
                Aircraft::new(x0, y0, a.v * (1.0 + dv), a.phi + dphi, a.theta_min, a.theta_max)
            })
            .collect();
        match Instance::new(id.clone(), cfg.cp.d, aircraft) {
            Ok(inst) => return Ok(inst),
            Err(Error::InitialConflict { .. }) | Err(Error::InvalidInstance(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetriesExhausted {
        retries: cfg.max_retries,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    schema_version: u32,
    id: String,
    d: f64,
    aircraft: Vec<Aircraft>,
}

/// Serialise an instance to the versioned JSON schema.
pub fn instance_to_string(inst: &Instance) -> String {
    let file = InstanceFile {
        schema_version: SCHEMA_VERSION,
        id: inst.id().to_string(),
        d: inst.d(),
        aircraft: inst.aircraft().to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serialises");
    s.push('\n');
    s
}

pub fn instance_from_str(s: &str) -> Result<Instance> {
    let value: serde_json::Value = serde_json::from_str(s)?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::InvalidInstance("missing schema_version".into()))?;
    if found != SCHEMA_VERSION as u64 {
        return Err(Error::SchemaVersion {
            found: found as u32,
            expected: SCHEMA_VERSION,
        });
    }
    let file: InstanceFile = serde_json::from_value(value)?;
    Instance::new(file.id, file.d, file.aircraft)
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, instance_to_string(inst))?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    instance_from_str(&std::fs::read_to_string(path)?)
}

/// Conventional file name, `<id>.inst.json`.
pub fn instance_file_name(inst: &Instance) -> String {
    format!("{}.inst.json", inst.id())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn cp_four_aircraft_geometry() {
        let inst = gen_cp(&CpConfig {
            n: 4,
            radius: 100.0,
            ..CpConfig::default()
        })
        .unwrap();
        let expected = [
            (100.0, 0.0, PI),
            (0.0, 100.0, 3.0 * FRAC_PI_2),
            (-100.0, 0.0, 0.0),
            (0.0, -100.0, FRAC_PI_2),
        ];
        for (a, (x, y, phi)) in inst.aircraft().iter().zip(expected) {
            assert!((a.x0 - x).abs() < 1e-12 && (a.y0 - y).abs() < 1e-12);
            assert!((a.phi - phi).abs() < 1e-12, "{} vs {}", a.phi, phi);
        }
    }

    #[test]
    fn cp_rejects_crowded_circle() {
        let err = gen_cp(&CpConfig {
            n: 200,
            radius: 100.0,
            ..CpConfig::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn rcp_zero_jitter_equals_cp() {
        let cfg = RcpConfig {
            speed_jitter: (0.0, 0.0),
            heading_jitter: (0.0, 0.0),
            position_jitter: (0.0, 0.0),
            ..RcpConfig::new(6, 9)
        };
        let rcp = gen_rcp(&cfg).unwrap();
        let cp = gen_cp(&cfg.cp).unwrap();
        assert_eq!(rcp.aircraft(), cp.aircraft());
        assert_eq!(rcp.d(), cp.d());
    }

    #[test]
    fn rcp_same_seed_same_bytes() {
        let cfg = RcpConfig::new(10, 42);
        let a = instance_to_string(&gen_rcp(&cfg).unwrap());
        let b = instance_to_string(&gen_rcp(&cfg).unwrap());
        assert_eq!(a, b);
        let c = instance_to_string(&gen_rcp(&RcpConfig::new(10, 43)).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn rcp_hundred_seeds_valid() {
        for seed in 0..100 {
            let inst = gen_rcp(&RcpConfig::new(10, seed)).unwrap();
            assert_eq!(inst.len(), 10);
        }
    }

    #[test]
    fn rcp_retry_budget() {
        // Every draw puts aircraft on top of each other.
        let cfg = RcpConfig {
            cp: CpConfig {
                n: 3,
                radius: 10.0,
                d: 5.0,
                ..CpConfig::default()
            },
            position_jitter: (-10.0, -10.0),
            max_retries: 3,
            ..RcpConfig::default()
        };
        assert!(matches!(gen_rcp(&cfg), Err(Error::RetriesExhausted { retries: 3 })));
    }

    #[test]
    fn file_round_trip() {
        let inst = gen_rcp(&RcpConfig::new(5, 7)).unwrap();
        let back = instance_from_str(&instance_to_string(&inst)).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn coincident_file_names_pair() {
        let text = r#"{"schema_version":1,"id":"x","d":5.0,"aircraft":[
            {"x0":0,"y0":0,"v":1,"phi":0,"theta_min":0,"theta_max":0},
            {"x0":0,"y0":0,"v":1,"phi":1,"theta_min":0,"theta_max":0}]}"#;
        match instance_from_str(text) {
            Err(Error::InitialConflict { i: 1, j: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_version_mismatch() {
        let text = r#"{"schema_version":9,"id":"x","d":5.0,"aircraft":[]}"#;
        assert!(matches!(
            instance_from_str(text),
            Err(Error::SchemaVersion { found: 9, .. })
        ));
    }

    #[test]
    fn malformed_file() {
        assert!(matches!(instance_from_str("{not json"), Err(Error::Parse(_))));
        let text = r#"{"schema_version":1,"id":"x","d":5.0}"#;
        assert!(matches!(instance_from_str(text), Err(Error::Parse(_))));
    }
}
