use std::process::{Command, Output};

use coalition_forge_cli::record::ReportRecord;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coalition-forge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_record(args: &[&str]) -> ReportRecord {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let mut lines = text.lines();
    let record = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!(lines.next().is_none());
    record
}

#[test]
fn analyze_two_players_strong_adamant() {
    let r = json_record(&["analyze", "--n", "2", "--eta", "1", "--format", "json"]);
    assert_eq!(r.ne_partitions, ["GC", "ALC"]);
    assert!((r.poa - 1.125).abs() < 1e-12);
    assert!(r.adamant && !r.multiple_partition_ne);
    assert!(r.runtime_ms.is_some());
}

#[test]
fn analyze_three_players_pair_regime() {
    let r = json_record(&["analyze", "--n", "3", "--eta", "0.45", "--format", "json"]);
    assert_eq!(r.ne_partitions, ["P2°", "ALC°"]);
    assert_eq!(r.so_partitions, ["P2°"]);
    assert!((r.poa - 1.5).abs() < 1e-12);
}

#[test]
fn analyze_four_players_without_adamant() {
    let r = json_record(&[
        "analyze",
        "--n",
        "4",
        "--eta",
        "0",
        "--no-adamant",
        "--format",
        "json",
    ]);
    assert_eq!(r.ne_partitions, ["GC°", "TTC°", "ALC°"]);
    assert!(!r.adamant);
    assert!((r.poa - 4.0).abs() < 1e-12);
    let bare = json_record(&["analyze", "--n", "4", "--no-adamant", "--format", "json"]);
    assert_eq!(bare.ne_partitions, r.ne_partitions);
}

#[test]
fn analyze_without_symmetry_agrees() {
    let a = json_record(&["analyze", "--n", "3", "--eta", "0.2", "--format", "json"]);
    let b = json_record(&[
        "analyze",
        "--n",
        "3",
        "--eta",
        "0.2",
        "--format",
        "json",
        "--no-symmetry",
    ]);
    assert_eq!(a.ne_partitions, b.ne_partitions);
    assert_eq!(a.poa, b.poa);
}

#[test]
fn analyze_json_round_trips() {
    let out = run(&["analyze", "--n", "5", "--eta", "0.9", "--format", "json"]);
    let line = stdout(&out);
    let record: ReportRecord = serde_json::from_str(line.trim()).unwrap();
    let again = serde_json::to_string(&record).unwrap();
    assert_eq!(
        serde_json::from_str::<ReportRecord>(&again).unwrap(),
        record
    );
    let value: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    for key in [
        "n",
        "eta",
        "adamant",
        "ne_partitions",
        "so_partitions",
        "so_value",
        "worst_ne_sum",
        "poa",
        "multiple_partition_ne",
    ] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn analyze_text_and_csv() {
    let text = stdout(&run(&["analyze", "--n", "2", "--eta", "1"]));
    assert!(text.contains("price of anarchy:         1.125"), "{text}");
    let csv = stdout(&run(&[
        "analyze", "--n", "2", "--eta", "1", "--format", "csv", "--seed", "7",
    ]));
    assert_eq!(
        csv,
        "n,eta,adamant,ne_partitions,so_partitions,so_value,worst_ne_sum,poa,multiple_partition_ne\n\
         2,1,true,GC;ALC,GC,0.25,0.2222222222222222,1.125,false\n"
    );
}

#[test]
fn analyze_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&[
        "analyze",
        "--n",
        "2",
        "--eta",
        "0.6",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: ReportRecord =
        serde_json::from_str(std::fs::read_to_string(&path).unwrap().trim()).unwrap();
    assert_eq!(r.ne_partitions, ["ALC"]);
}

#[test]
fn invalid_arguments_exit_2() {
    for args in [
        &["analyze", "--n", "2", "--eta", "1", "--no-adamant"][..],
        &["analyze", "--n", "0", "--eta", "1"],
        &["analyze", "--n", "2", "--eta", "-1"],
        &["analyze", "--n", "2"],
        &["analyze", "--n", "2", "--eta", "1", "--format", "xml"],
        &["tables", "--which", "n5"],
        &["tables", "--which", "n2", "--tolerance", "0.5"],
        &[
            "sweep",
            "--n",
            "2",
            "--eta-min",
            "0",
            "--eta-max",
            "1",
            "--steps",
            "1",
        ],
        &[
            "sweep",
            "--n",
            "2",
            "--eta-min",
            "0",
            "--eta-max",
            "1",
            "--log",
        ],
        &["oracle", "--k", "0", "--eta", "1"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn budget_exceeded_exits_3() {
    assert_eq!(
        run(&["analyze", "--n", "7", "--eta", "1"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&["analyze", "--n", "5", "--eta", "1", "--no-symmetry"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn tables_pass() {
    for (which, summary) in [
        ("n2", "n2: 4/4 rows pass"),
        ("n3", "n3: 8/8 rows pass"),
        ("n4", "n4: 7/7 rows pass"),
        ("large", "large(n=5): 5/5 rows pass"),
        ("noadamant", "noadamant: 4/4 rows pass"),
    ] {
        let out = run(&["tables", "--which", which]);
        assert_eq!(out.status.code(), Some(0), "{which}");
        assert!(stdout(&out).contains(summary), "{which}");
    }
}

#[test]
fn tables_flag_rounded_pair_threshold() {
    let text = stdout(&run(&["tables", "--which", "n3"]));
    assert!(
        text.contains("boundary 0.57: nearest switch 0.560660"),
        "{text}"
    );
    assert!(text.contains("FLAGGED"));
}

#[test]
fn sweep_two_steps_gives_two_rows() {
    let text = stdout(&run(&[
        "sweep",
        "--n",
        "3",
        "--eta-min",
        "0.2",
        "--eta-max",
        "2",
        "--steps",
        "2",
    ]));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.records().count(), 2);
}

fn sweep_csv(extra: &[&str]) -> Vec<(f64, f64)> {
    let mut args = vec!["sweep"];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[1].parse().unwrap(), r[7].parse().unwrap())
        })
        .collect()
}

#[test]
fn sweep_poa_dips_at_intermediate_strength() {
    let rows = sweep_csv(&[
        "--n",
        "4",
        "--eta-min",
        "0.01",
        "--eta-max",
        "3",
        "--steps",
        "300",
    ]);
    assert_eq!(rows.len(), 300);
    let first = rows.first().unwrap().1;
    let last = rows.last().unwrap().1;
    let lowest = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let at_lowest = rows.iter().find(|r| r.1 == lowest).unwrap().0;
    assert!(lowest < first.min(last) - 0.5);
    assert!(at_lowest > 0.1 && at_lowest < 2.0);
}

#[test]
fn sweep_log_endpoints_approach_two() {
    let rows = sweep_csv(&[
        "--n",
        "2",
        "--eta-min",
        "0.001",
        "--eta-max",
        "1000",
        "--steps",
        "25",
        "--log",
    ]);
    assert!((rows.first().unwrap().0 - 0.001).abs() < 1e-15);
    assert_eq!(rows.last().unwrap().0, 1000.0);
    assert!((rows.first().unwrap().1 - 2.0).abs() < 0.01);
    assert!((rows.last().unwrap().1 - 2.0).abs() < 0.01);
}

#[test]
fn sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.csv", "b.csv"]
        .iter()
        .map(|f| dir.path().join(f))
        .collect();
    for (path, threads) in paths.iter().zip(["1", "4"]) {
        let out = Command::new(env!("CARGO_BIN_EXE_coalition-forge"))
            .env("COALITION_FORGE_THREADS", threads)
            .args([
                "sweep",
                "--n",
                "4",
                "--eta-min",
                "0",
                "--eta-max",
                "3",
                "--steps",
                "60",
            ])
            .args(["--out", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 61);
}

#[test]
fn sweep_json_lines_round_trip() {
    let out = run(&[
        "sweep",
        "--n",
        "3",
        "--eta-min",
        "0.1",
        "--eta-max",
        "3",
        "--steps",
        "7",
        "--format",
        "json",
    ]);
    let text = stdout(&out);
    let records: Vec<ReportRecord> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 7);
    assert!(records.windows(2).all(|w| w[0].eta < w[1].eta));
    assert!(records.iter().all(|r| r.runtime_ms.is_none()));
}

#[test]
fn oracle_examples() {
    let out = run(&["oracle", "--k", "1", "--eta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["oracle", "--k", "3", "--eta", "0.6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let adamant = text
        .lines()
        .find(|l| l.starts_with("adamant utility"))
        .unwrap();
    let values: Vec<f64> = adamant
        .split_whitespace()
        .skip(2)
        .take(2)
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(values, [0.0, 0.0]);
    let out = run(&["oracle", "--k", "2", "--eta", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("2.500000000000000e-1"));
}

#[test]
fn oracle_unreachable_tolerance_exits_1() {
    assert_eq!(
        run(&["oracle", "--k", "4", "--eta", "2", "--tolerance", "1e-30"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn bad_thread_count_exits_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_coalition-forge"))
        .env("COALITION_FORGE_THREADS", "0")
        .args(["analyze", "--n", "2", "--eta", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_small_suite_passes() {
    let out = run(&["verify", "--n-max", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| !l.starts_with("FAIL")));
}
