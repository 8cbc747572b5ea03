use std::process::{Command, Output};

use serde_json::Value;

fn kglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kglab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn meta_of(csv: &str) -> Value {
    let line = csv.lines().next().unwrap();
    serde_json::from_str(line.strip_prefix("# meta: ").unwrap()).unwrap()
}

#[test]
fn count_csv_layout() {
    let o = kglab(&["count", "--psi", "pow:1,3/4", "--Q", "30,60", "--trials", "10", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\r\n"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "seed,Q,N,psi_exact,psi_paper,chi,err_norm,gamma_id,psi_id");
    assert_eq!(lines.len(), 2 + 20);
    assert!(lines[2].starts_with("4,30,"));
    assert!(lines[21].starts_with("13,60,"));

    let meta = meta_of(&text);
    for key in ["tool", "version", "command", "config", "config_hash", "rng", "scale_bits", "shell_count_mode", "psi_normalization", "zero_vector"] {
        assert!(meta.get(key).is_some(), "meta lacks {key}");
    }
    assert_eq!(meta["config"]["Q"], serde_json::json!([30, 60]));
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn jsonl_records_carry_report_fields() {
    let o = kglab(&["count", "--psi", "pow:1,3/4", "--Q", "25", "--trials", "2", "--format", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let first: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!(first.get("meta").is_some());
    let rec: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    for key in ["seed", "trial", "Q", "N", "psi_exact", "psi_paper", "chi", "err_norm", "gamma_id", "psi_id"] {
        assert!(rec.get(key).is_some(), "record lacks {key}");
    }
    assert_eq!(lines.count(), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(kglab(&["count", "--psi", "bogus", "--Q", "5"]).status.code(), Some(2));
    assert_eq!(kglab(&["count", "--Q", "5"]).status.code(), Some(2));
    assert_eq!(kglab(&["no-such-command"]).status.code(), Some(2));
    let o = kglab(&["count", "--psi", "pow:1,3/4", "--Q", "200", "--scale-bits", "64"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("73"));
    let rational = kglab(&["count", "--psi", "pow:1,3/4", "--Q", "5", "--gamma", "surd:1,0,4,2"]);
    assert_eq!(rational.status.code(), Some(2));
    let missing = kglab(&["--config", "/nonexistent/kglab.toml", "count", "--Q", "5"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn config_file_with_command_line_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "psi = \"pow:1,3/4\"\nQ = [40]\ntrials = 3\nseed = 7\n").unwrap();
    let path = cfg.to_str().unwrap();

    let o = kglab(&["--config", path, "count"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2 + 3);
    assert!(text.lines().nth(2).unwrap().starts_with("7,40,"));

    let o = kglab(&["--config", path, "count", "--seed", "9", "--trials", "1"]);
    let text = stdout(&o);
    assert_eq!(meta_of(&text)["config"]["seed"], 9);
    assert_eq!(text.lines().count(), 3);

    std::fs::write(&cfg, "psi = \"pow:1,3/4\"\nbogus = 1\n").unwrap();
    assert_eq!(kglab(&["--config", path, "count"]).status.code(), Some(2));
}

#[test]
fn output_file_and_config_hash_ignore_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = kglab(&["count", "--psi", "pow:1,3/4", "--Q", "20", "-o", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap();
    assert_eq!(meta_of(&ta)["config_hash"], meta_of(&tb)["config_hash"]);
    assert_eq!(ta.lines().skip(1).collect::<Vec<_>>(), tb.lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn overlap_reports_product_rule_and_oracle() {
    let o = kglab(&["overlap", "--q", "(1,2)", "--r", "(3,1)", "--psi", "const:1/10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rec: Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    assert_eq!(rec["exact"], "1/25");
    assert_eq!(rec["tag"], "independent");
    assert_eq!(rec["status"], "agree");

    let o = kglab(&["overlap", "--a", "3,1/7,1/20", "--b", "5,2/9,1/10"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn lemma3_sweep_csv_and_summary() {
    let o = kglab(&["lemma3-sweep", "--psi", "pow:1/4,1/2", "--Q", "140", "--eta", "1", "--c", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().nth(1).unwrap(), "d,e,r,q,threshold,overlap,bound,status");
    assert!(text.lines().any(|l| l.ends_with("zero-confirmed")));
    assert!(!text.contains("VIOLATION"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("violations"));
}

#[test]
fn gcdsum_primorials_increase() {
    let o = kglab(&["gcdsum", "--primorials", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let vals: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["normalized_f64"].as_f64().unwrap())
        .collect();
    assert_eq!(vals.len(), 6);
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn variance_window_and_cf_and_hausdorff_run() {
    for args in [
        &["variance", "--psi", "pow:1/4,1/2", "--Q", "6,12"][..],
        &["variance", "--psi", "pow:1/4,1/2", "--window", "10,300"],
        &["cf", "--gamma", "sqrt:3", "--terms", "8"],
        &["hausdorff", "--psi", "pow:1,2", "--probe-n", "2000"],
    ] {
        let o = kglab(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        for line in stdout(&o).lines() {
            serde_json::from_str::<Value>(line).unwrap();
        }
    }
}
