use std::process::Command;

use proptest::prelude::*;

use sparse_ldp::bench::{
    gen_synthetic, linf_error, mse, read_metrics, run_experiment, Dataset, ExperimentConfig, Level, ProbePolicy,
    Synthetic,
};

#[test]
fn truth_matches_dense_average() {
    let ds = gen_synthetic(500, 80, 6, Synthetic::default(), 2).unwrap();
    let mut dense = vec![0.0; 80];
    for v in ds.vectors() {
        for (acc, x) in dense.iter_mut().zip(v.to_dense()) {
            *acc += x;
        }
    }
    for (m, s) in ds.mean().iter().zip(&dense) {
        assert!((m - s / 500.0).abs() < 1e-12);
    }
}

#[test]
fn event_level_error_is_flat_in_k() {
    let cfg = ExperimentConfig {
        runs: 10,
        levels: vec![Level::Event],
        n: vec![10_000],
        d: vec![512],
        k: vec![1, 4, 16, 64],
        probe: "all".into(),
        timing: false,
        ..ExperimentConfig::default()
    };
    let linf: Vec<f64> = run_experiment(&cfg).unwrap().iter().map(|r| r.linf).collect();
    let (lo, hi) = linf.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi <= 1.5 * lo, "{linf:?}");
}

proptest! {
    #[test]
    fn metrics_agree_with_scalar_recompute(
        pairs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..200),
    ) {
        let (truth, est): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let mut worst = 0.0f64;
        let mut sq = 0.0;
        for i in 0..truth.len() {
            let e = est[i] - truth[i];
            if e.abs() > worst {
                worst = e.abs();
            }
            sq += e * e;
        }
        prop_assert_eq!(linf_error(&truth, &est).unwrap(), worst);
        prop_assert!((mse(&truth, &est).unwrap() - sq / truth.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn top_m_probes_dominate_the_rest(truth in prop::collection::vec(-1.0f64..1.0, 1..100), m in 1usize..50) {
        let picked = ProbePolicy::Top(m).select(&truth);
        prop_assert_eq!(picked.len(), m.min(truth.len()));
        let floor = picked.iter().map(|&i| truth[i].abs()).fold(f64::MAX, f64::min);
        for (i, t) in truth.iter().enumerate() {
            if !picked.contains(&i) {
                prop_assert!(t.abs() <= floor);
            }
        }
    }
}

#[test]
fn cli_end_to_end() {
    let bin = env!("CARGO_BIN_EXE_sparse-ldp");
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.txt");
    let status = Command::new(bin)
        .args(["gen", "--n", "400", "--d", "60", "--k", "4", "--seed", "3", "--out"])
        .arg(&data)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(Dataset::read(&data).unwrap().n(), 400);

    let csv = dir.path().join("ratings.csv");
    std::fs::write(&csv, "user_id,item_id,value\na,x,1\na,y,5\nb,x,4\n").unwrap();
    let ingested = dir.path().join("ratings.txt");
    let status = Command::new(bin)
        .args(["ingest", "--k", "2", "--lo", "1", "--hi", "5", "--out"])
        .arg(&ingested)
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(Dataset::read(&ingested).unwrap().d(), 2);

    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "runs = 1\nmechanisms = [\"ours\", \"naive\"]\nprobe = \"all\"\ntiming = false\ndataset = {:?}\n",
            data.display().to_string()
        ),
    )
    .unwrap();
    let metrics = dir.path().join("metrics.csv");
    for _ in 0..2 {
        let status = Command::new(bin).arg("run").arg(&config).arg("--out").arg(&metrics).status().unwrap();
        assert!(status.success());
    }
    let rows = read_metrics(&metrics).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.is_ok() && r.n == 400));
    assert_eq!(rows[..4], rows[4..]);

    let out = Command::new(bin).args(["audit", "--k", "8", "--d", "100", "--pairs", "5"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("max L1 diff"));

    let bad = Command::new(bin).args(["audit", "--level", "sideways"]).output().unwrap();
    assert!(!bad.status.success());
}
