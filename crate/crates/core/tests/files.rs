mod common;

use deconflict_core::instance::{
    instance_file_name, instance_from_str, instance_to_string, read_instance, write_instance,
};
use deconflict_core::model::{build_m1, build_m2, export_model, import_json, model_file_name, ModelFormat};
use deconflict_core::terms::compute_bigm_all;
use deconflict_core::{gen_cp, gen_rcp, oracle_verify, CpConfig, Error, HeadingVector, OracleConfig, RcpConfig};

#[test]
fn instance_files_round_trip_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..20 {
        let inst = gen_rcp(&RcpConfig::new(3 + (seed as usize % 5), seed)).unwrap();
        let path = dir.path().join(instance_file_name(&inst));
        write_instance(&inst, &path).unwrap();
        let back = read_instance(&path).unwrap();
        assert_eq!(back.id(), inst.id());
        assert_eq!(back.d().to_bits(), inst.d().to_bits());
        for (a, b) in inst.aircraft().iter().zip(back.aircraft()) {
            for (x, y) in [
                (a.x0, b.x0),
                (a.y0, b.y0),
                (a.v, b.v),
                (a.phi, b.phi),
                (a.theta_min, b.theta_min),
            ] {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert_eq!(instance_to_string(&back), std::fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn generators_are_byte_deterministic() {
    let a = instance_to_string(&gen_rcp(&RcpConfig::new(7, 42)).unwrap());
    let b = instance_to_string(&gen_rcp(&RcpConfig::new(7, 42)).unwrap());
    let c = instance_to_string(&gen_rcp(&RcpConfig::new(7, 43)).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn unknown_schema_version_is_rejected() {
    let text = instance_to_string(&gen_cp(&CpConfig::with_n(3)).unwrap())
        .replace("\"schema_version\": 1", "\"schema_version\": 99");
    assert!(matches!(
        instance_from_str(&text),
        Err(Error::SchemaVersion { found: 99, .. })
    ));
}

#[test]
fn model_files_are_named_and_round_trip() {
    let inst = gen_cp(&CpConfig::with_n(4)).unwrap();
    let m1 = build_m1(&inst);
    let m2 = build_m2(&inst, &compute_bigm_all(&inst)).unwrap();
    assert_eq!(model_file_name(&m1, ModelFormat::Ampl), format!("{}.m1.mod", inst.id()));
    assert_eq!(
        model_file_name(&m2, ModelFormat::Json),
        format!("{}.m2.model.json", inst.id())
    );
    for model in [&m1, &m2] {
        let json = export_model(model, ModelFormat::Json).unwrap();
        assert_eq!(&import_json(&json).unwrap(), model);
        let ampl = export_model(model, ModelFormat::Ampl).unwrap();
        assert_eq!(ampl, export_model(model, ModelFormat::Ampl).unwrap());
        assert!(ampl.contains("minimize"));
    }
}

#[test]
fn oracle_agrees_with_analytic_check() {
    let mut rng = common::Rng::new(11);
    let mut checked = 0;
    for k in 0..200u64 {
        let inst = gen_rcp(&RcpConfig::new(3 + (k as usize % 3), k)).unwrap();
        let theta: Vec<f64> = inst
            .aircraft()
            .iter()
            .map(|a| rng.uniform(a.theta_min, a.theta_max))
            .collect();
        let miss = common::min_miss(&inst, &theta);
        // The sampled oracle is only meaningful away from the tolerance band.
        if (miss - inst.d()).abs() < 1e-3 * inst.d() {
            continue;
        }
        let h = HeadingVector(theta);
        let cfg = OracleConfig::for_instance(&inst, &h).unwrap();
        let report = oracle_verify(&inst, &h, &cfg).unwrap();
        assert_eq!(report.pass, miss >= inst.d(), "{}", inst.id());
        checked += 1;
    }
    assert!(checked > 150);
}
