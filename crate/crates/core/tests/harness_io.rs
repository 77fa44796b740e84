use myopic_core::adversary::{
    jam, AdversaryPower, AdversaryView, AttackStrategy, EdgeAssignment, Knowledge, Regime,
};
use myopic_core::codebook::{Codebook, SamplingMode};
use myopic_core::gf::Gf;
use myopic_core::harness::{
    emit_results, load_report, read_trials_csv, run_trials, write_trials_csv, ExperimentConfig,
    OutputFormat, Verdict,
};
use myopic_core::network::{LinearNetworkCode, Topology};
use myopic_core::subspace::Subspace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const HEADER: &str = "trial,message,verdict,compatible_count,dim_ro,dim_u,dim_jam";

fn config(extra: &str) -> ExperimentConfig {
    let mut base = serde_json::json!({
        "field": {"p": 2},
        "topology": "parallel:4",
        "coding": "identity",
        "codebook": {"n": 6, "m": 32},
        "trials": 1000,
        "seed": 41
    });
    let over: serde_json::Value =
        serde_json::from_str(&format!("{{{}}}", extra.trim_start_matches(','))).unwrap();
    for (k, v) in over.as_object().unwrap() {
        base[k] = v.clone();
    }
    ExperimentConfig::from_json(&base.to_string()).unwrap()
}

#[test]
fn empty_trial_list_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_trials_csv(&[], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().trim_end(), HEADER);
    assert!(read_trials_csv(&path).unwrap().is_empty());
}

#[test]
fn thousand_trials_give_1001_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_trials(&config("")).unwrap();
    let files = emit_results(&out, &dir.path().join("run.csv"), OutputFormat::Csv).unwrap();
    assert_eq!(files.len(), 1);
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(text.lines().count(), 1001);
    assert_eq!(text.lines().next().unwrap(), HEADER);
    let back = read_trials_csv(&files[0]).unwrap();
    let orig = &out.cases[0].trials;
    assert_eq!(back.len(), orig.len());
    for (a, b) in back.iter().zip(orig) {
        assert_eq!(
            (a.trial, a.message, a.verdict, a.compatible_count),
            (b.trial, b.message, b.verdict, b.compatible_count)
        );
    }
}

#[test]
fn json_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_trials(&config(r#", "trials": 50, "power": {"z_ro": 1, "z_wo": 1, "z_rw": 0}, "strategy": "symmetrization""#)).unwrap();
    let files = emit_results(&out, &dir.path().join("run.json"), OutputFormat::Json).unwrap();
    let back = load_report(&files[0]).unwrap();
    assert_eq!(back, out.report);
    assert_eq!(back.seed, 41);
    assert_eq!(back.config["codebook"]["n"], 6);
}

#[test]
fn verdicts_partition_trials() {
    let out = run_trials(&config(r#", "power": {"z_ro": 0, "z_wo": 1, "z_rw": 0}, "strategy": ["no_attack", "random_noise", "symmetrization"]"#)).unwrap();
    for case in &out.cases {
        let s = &case.summary;
        assert_eq!(s.histogram.values().sum::<usize>(), s.trials);
        assert_eq!(s.trials - s.histogram["Correct"], s.errors);
        let errors = case
            .trials
            .iter()
            .filter(|t| t.verdict != Verdict::Correct)
            .count();
        assert_eq!(errors, s.errors);
        assert!(s.wilson_low <= s.error_probability && s.error_probability <= s.wilson_high);
    }
}

#[test]
fn symmetrization_is_no_better_for_the_receiver_than_no_attack() {
    let out = run_trials(&config(
        r#", "codebook": {"n": 8, "m": 4, "mode": "distinct"}, "topology": "parallel:2",
           "power": {"z_ro": 0, "z_wo": 0, "z_rw": 1}, "assignment": {"read_write": [1]},
           "strategy": ["no_attack", "symmetrization"], "decoder_radius": 1"#,
    ))
    .unwrap();
    let quiet = &out.cases[0].summary;
    let loud = &out.cases[1].summary;
    assert_eq!(loud.regime, Regime::Strong);
    assert!(loud.wilson_high >= quiet.wilson_low);
    assert!(loud.error_probability >= quiet.error_probability);
}

#[test]
fn adversary_footprint_is_bounded_in_weak_trials() {
    let power = AdversaryPower::new(1, 1, 0);
    let out = run_trials(&config(
        r#", "topology": "butterfly", "coding": "rlnc", "field": {"p": 5}, "codebook": {"n": 5, "m": 64},
           "power": {"z_ro": 1, "z_wo": 1, "z_rw": 0}, "assignment": "sweep", "trials": 200,
           "strategy": ["random_noise", "symmetrization", "push_toward_compatible"]"#,
    ))
    .unwrap();
    let mut within = 0;
    let mut total = 0;
    for case in &out.cases {
        for t in &case.trials {
            total += 1;
            within += usize::from(t.dim_ro + t.dim_jam <= power.z());
        }
    }
    assert!(within * 100 >= total * 99, "{within} of {total}");
}

#[test]
fn symmetrized_output_keeps_most_of_the_codeword() {
    let f = Gf::prime(3).unwrap();
    let c = 4;
    let topo = Topology::parallel(c).unwrap();
    let code = LinearNetworkCode::identity(&topo, &f, c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for assignment in [
        EdgeAssignment::new(vec![0], vec![1], vec![]),
        EdgeAssignment::new(vec![], vec![], vec![2]),
        EdgeAssignment::new(vec![3], vec![], vec![0]),
    ] {
        let z_w = assignment.power().z_w();
        let transfer = code.transfer_matrices(&assignment).unwrap();
        for _ in 0..50 {
            let cb = Codebook::build_random(&f, 6, c, 8, SamplingMode::Distinct, &mut rng).unwrap();
            let x = cb.encode(3).unwrap();
            let z = transfer.t_aj.mat_mul(x).unwrap();
            let view = AdversaryView {
                codebook: &cb,
                assignment: &assignment,
                transfer: &transfer,
                z: &z,
                knowledge: Knowledge::Full,
            };
            let j = jam(AttackStrategy::Symmetrization, &view, &mut rng).unwrap();
            let y = code.transmit(x, &assignment, j.as_ref()).unwrap().y;
            let kept = Subspace::from_matrix(&y)
                .intersection_dim(&Subspace::from_matrix(x))
                .unwrap();
            assert!(kept >= c - z_w, "kept {kept} of {c} with z_w = {z_w}");
        }
    }
}
