use stairsolve_core::experiment::{write_records_csv, write_records_json, CSV_HEADER};
use stairsolve_core::spectrum::write_spectrum_csv;
use stairsolve_core::{run_experiment, BenchmarkProblem, ExperimentRecord, PcgConfig, PreconditionerKind, ProblemName};

fn csv_bytes(name: ProblemName) -> (Vec<u8>, Vec<u8>) {
    let out = run_experiment(
        &BenchmarkProblem::new(name),
        &PreconditionerKind::SYMMETRIC,
        &PcgConfig::default(),
    )
    .unwrap();
    let mut table = Vec::new();
    write_records_csv(&mut table, &out.records).unwrap();
    let mut eig = Vec::new();
    write_spectrum_csv(&mut eig, &out.spectra).unwrap();
    (table, eig)
}

#[test]
fn output_is_deterministic() {
    for name in [ProblemName::Pendulum, ProblemName::CartPole] {
        assert_eq!(csv_bytes(name), csv_bytes(name));
    }
}

#[test]
fn records_order_and_relative_conditioning() {
    let out = run_experiment(
        &BenchmarkProblem::new(ProblemName::CartPole),
        &PreconditionerKind::SYMMETRIC,
        &PcgConfig::default(),
    )
    .unwrap();
    let names: Vec<_> = out.records.iter().map(|r| r.preconditioner.as_str()).collect();
    assert_eq!(names, ["jacobi", "block-jacobi", "additive-stair", "symmetric-stair"]);
    let sym = &out.records[3];
    assert!(sym.cond_rel_jacobi < 1.0);
    assert!(sym.lambda_max <= 1.0 + 1e-9 && sym.lambda_min > 0.0);
    assert!(out.records.iter().all(|r| r.converged && r.n == 16 && r.m == 4));
    assert_eq!(out.spectra.len(), 4);
    assert!(out.spectra.iter().all(|(_, _, s)| s.eigenvalues.len() == 64));
}

#[test]
fn json_roundtrips_records() {
    let out = run_experiment(
        &BenchmarkProblem::new(ProblemName::Pendulum),
        &[PreconditionerKind::SymmetricStair],
        &PcgConfig::default(),
    )
    .unwrap();
    let mut buf = Vec::new();
    write_records_json(&mut buf, &out.records).unwrap();
    let back: Vec<ExperimentRecord> = serde_json::from_slice(&buf).unwrap();
    assert_eq!(back, out.records);
}

#[test]
fn spectrum_csv_shape() {
    let (_, eig) = csv_bytes(ProblemName::Pendulum);
    let text = String::from_utf8(eig).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("problem,preconditioner,index,eigenvalue"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 4 * 32);
    assert!(rows[0].starts_with("pendulum,jacobi,0,"));
    let table = String::from_utf8(csv_bytes(ProblemName::Pendulum).0).unwrap();
    assert_eq!(table.lines().next(), Some(CSV_HEADER));
}
