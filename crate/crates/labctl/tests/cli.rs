use std::path::Path;
use std::process::{Command, Output};

fn labctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_labctl")).args(args).output().expect("spawn labctl")
}

fn labctl_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_labctl")).args(args).env(key, val).output().expect("spawn labctl")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn generate(dir: &Path, name: &str, seed: &str) -> (String, serde_json::Value) {
    let out = dir.join(name);
    let o = labctl(&["generate", "--k", "1", "--d", "1", "--w", "2", "--seed", seed, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let side = std::fs::read_to_string(dir.join(format!("{name}.truth.json"))).unwrap();
    (text, serde_json::from_str(&side).unwrap())
}

#[test]
fn generate_writes_stream_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..6 {
        let (text, side) = generate(dir.path(), "s.dgs", &seed.to_string());
        let stream = mstlab::stream::parse_stream(&text).unwrap();
        assert_eq!(text.lines().count(), 2 + stream.ops.len());
        let w = side["mst_weight"].as_u64().unwrap();
        assert!(w == 6 || w == 7, "{w}");
        assert_eq!(side["decision"].as_bool().unwrap(), w == 7);
        for key in ["n", "threshold", "targets", "answers", "hint"] {
            assert!(side.get(key).is_some(), "{key}");
        }
        assert!(!text.contains("mst_weight"));
    }
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.dgs", "17");
    let b = generate(dir.path(), "b.dgs", "17");
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
}

#[test]
fn exit_codes() {
    let o = labctl(&["generate", "--d", "41", "--w", "3", "--out", "/tmp/never"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("64 bits"));
    assert_eq!(labctl(&["generate", "--k", "0", "--out", "/tmp/never"]).status.code(), Some(2));
    assert_eq!(labctl(&["generate"]).status.code(), Some(2));
    assert_eq!(labctl(&["bench", "--delta", "1.5"]).status.code(), Some(2));
    assert_eq!(labctl(&["bench", "--p", "0"]).status.code(), Some(2));
    assert_eq!(labctl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(labctl_env(&["verify", "info"], "LABCTL_THREADS", "zero").status.code(), Some(2));
    let o = labctl(&["generate", "--out", "/nonexistent-dir/x/s.dgs"]);
    assert_eq!(o.status.code(), Some(3));
    let o = labctl(&["verify", "info", "--out", "/nonexistent-dir/x/r.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_suites_pass() {
    let o = labctl(&["verify", "structure"]);
    assert!(o.status.success());
    let r = json(&o);
    assert_eq!(r["pass"], true);
    assert!(r["groups"][0]["checked"].as_u64().unwrap() >= 128);
    let o = labctl(&["verify", "weight", "--trials", "1000"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["groups"][0]["checked"], 1000);
    assert!(labctl(&["verify", "info", "--trials", "300"]).status.success());
    let o = labctl(&["verify", "protocol", "--k", "8", "--format", "csv"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("suite,check,checked,failed\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0")), "{text}");
}

#[test]
fn verify_single_thread_matches() {
    let a = labctl_env(&["verify", "weight", "--trials", "200", "--seed", "4"], "LABCTL_THREADS", "1");
    let b = labctl_env(&["verify", "weight", "--trials", "200", "--seed", "4"], "LABCTL_THREADS", "3");
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bench_csv() {
    let args = ["bench", "--k", "1", "--d", "2", "--w", "3", "--p", "1,3", "--trials", "2", "--seed", "9"];
    let o = labctl(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alg,n,p,bits_peak,decision,truth,failed"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for chunk in rows.chunks(3) {
        assert_eq!((chunk[0][0], chunk[1][0], chunk[2][0]), ("single-pass", "multipass", "multipass"));
        let p1: u64 = chunk[1][3].parse().unwrap();
        let p3: u64 = chunk[2][3].parse().unwrap();
        assert!(p1 > p3, "{p1} vs {p3}");
    }
    assert_eq!(labctl_env(&args, "LABCTL_THREADS", "1").stdout, o.stdout);
    let bad = labctl(&["bench", "--W", "2", "--d", "1", "--w", "2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn protocol_reports() {
    let r = json(&labctl(&["protocol", "majority-xor", "--k", "6"]));
    assert_eq!(r["matches"], true);
    assert_eq!(r["expected"], "21/32");
    let r = json(&labctl(&["protocol", "hint-guess"]));
    assert_eq!(r["report"]["success_exact"], "3/4");
    assert_eq!(r["overhead_bits"], 1);
    let r = json(&labctl(&["protocol", "round-elim"]));
    assert_eq!(r.as_array().unwrap().len(), 3);
    assert!(r.as_array().unwrap().iter().all(|x| x["holds"] == true));
    let r = json(&labctl(&["protocol", "one-way", "--w", "5"]));
    assert!(r["violations"].as_array().unwrap().is_empty());
    let o = labctl(&["protocol", "compiled", "--trials", "20", "--seed", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["rounds"], 1);
    assert!(r["cc_max"].as_u64().unwrap() <= r["space_bound"].as_u64().unwrap());
    assert!(r["agree"].as_u64().unwrap() >= 17);
    let r = json(&labctl(&["protocol", "compiled", "--p", "2", "--trials", "5"]));
    assert_eq!(r["rounds"], 3);
    assert_eq!(labctl(&["protocol", "one-way", "--w", "2"]).status.code(), Some(2));
}
