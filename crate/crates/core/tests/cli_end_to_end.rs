use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_relaysec");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn config(protocol: &str, k: usize, extra: &str) -> String {
    let fractions = vec!["0.5"; k].join(", ");
    format!(
        "[scenario]\nprotocol = \"{protocol}\"\nk_relays = {k}\nrho_db = 20.0\nrate_bpcu = 1.0\n{extra}\n\
         [scenario.geometry]\nrelay_fractions = [{fractions}]\ndirect_link_present = {}\n",
        protocol != "dbj"
    )
}

fn csv_rows(bytes: &[u8]) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(bytes).records().map(|r| r.unwrap()).collect()
}

#[test]
fn analyze_direct_message_table_decreases_with_n() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "direct.toml",
        config("direct", 1, "") + "[run]\nn_values = [2, 4, 6, 8, 10, 12, 14, 16, 18, 20]\n",
    );
    let out = run(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 10);
    let logs: Vec<f64> = rows.iter().map(|r| r[13].parse().unwrap()).collect();
    assert!(logs.windows(2).all(|w| w[1] < w[0]), "{logs:?}");
    assert!(rows.iter().all(|r| r[10].is_empty()));
}

#[test]
fn analyze_af_reports_bounds() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "af.toml", config("af", 2, ""));
    let out = run(&["analyze", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &v["rows"][0];
    assert!(row["p1_analytic"].is_null());
    let (lo, hi) = (row["p1_lower"].as_f64().unwrap(), row["p1_upper"].as_f64().unwrap());
    assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
}

#[test]
fn dbj_with_alpha_one_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "dbj.toml", config("dbj", 2, "alpha = 1.0"));
    let out = run(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_and_missing_configs_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.toml", "[scenario]\nprotocol = \"df\"\nk_relays = \n");
    assert_eq!(run(&["analyze", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let unknown = write(dir.path(), "unknown.toml", config("df", 1, "colour = 3"));
    assert_eq!(run(&["analyze", "--config", unknown.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(run(&["analyze", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "df.toml", config("df", 2, "") + "[run]\ntrials = 20000\nseed = 9\n");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let rows = csv_rows(&bytes);
    assert_eq!(&rows[0][15], "20000");
    assert_eq!(&rows[0][16], "9");
    let p: f64 = rows[0][10].parse().unwrap();
    assert!((0.0..=1.0).contains(&p));

    let other = dir.path().join("c.csv");
    let o = run(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--out", other.to_str().unwrap(), "--seed", "10",
    ]);
    assert!(o.status.success());
    assert_ne!(bytes, std::fs::read(&other).unwrap());
}

#[test]
fn dbj_sweep_writes_deviation_sidecar() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "dbj.toml",
        config("dbj", 2, "alpha = 0.5") + "[sweep]\nanalytic_only = true\nfractions = [0.3, 0.5]\n",
    );
    let out = dir.path().join("dbj.csv");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&std::fs::read(&out).unwrap()).len(), 2);
    let side = dir.path().join("dbj.csv.deviations.json");
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(side).unwrap()).unwrap();
    assert!(!v.as_array().unwrap().is_empty());
}

#[test]
fn race_without_end_exits_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "dead.toml",
        config("direct", 1, "").replace("rho_db = 20.0", "rho_db = -200.0") + "[run]\ntrials = 1\n",
    );
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

fn packet_file(n: u32, bits: u32, padded: u32, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    for v in [n, bits, padded] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(payload);
    out
}

#[test]
fn codec_round_trip_even_block() {
    let dir = TempDir::new().unwrap();
    let original = packet_file(4, 12, 0, &[0xC0, 0x10, 0xA0, 0x20, 0x60, 0x30, 0x10, 0x40]);
    let input = write(dir.path(), "in.bin", &original);
    let enc = dir.path().join("enc.bin");
    let dec = dir.path().join("dec.bin");
    assert!(run(&["codec-encode", "--in", input.to_str().unwrap(), "--out", enc.to_str().unwrap()]).status.success());
    let encoded = std::fs::read(&enc).unwrap();
    assert_eq!(encoded.len(), original.len());
    assert_ne!(encoded, original);
    assert!(run(&["codec-decode", "--in", enc.to_str().unwrap(), "--out", dec.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read(&dec).unwrap(), original);
}

#[test]
fn codec_pads_odd_blocks() {
    let dir = TempDir::new().unwrap();
    let original = packet_file(3, 8, 0, &[0x01, 0x02, 0x03]);
    let input = write(dir.path(), "odd.bin", &original);
    let enc = dir.path().join("enc.bin");
    let dec = dir.path().join("dec.bin");
    assert!(run(&["codec-encode", "--in", input.to_str().unwrap(), "--out", enc.to_str().unwrap(), "--seed", "4"]).status.success());
    let encoded = std::fs::read(&enc).unwrap();
    assert_eq!(&encoded[0..4], &4u32.to_le_bytes());
    assert_eq!(&encoded[8..12], &1u32.to_le_bytes());
    assert!(run(&["codec-decode", "--in", enc.to_str().unwrap(), "--out", dec.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read(&dec).unwrap(), original);
}

#[test]
fn corrupted_packet_files_exit_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.bin");
    for (name, bytes) in [
        ("short.bin", vec![1, 0, 0]),
        ("flag.bin", packet_file(2, 8, 7, &[1, 2])),
        ("length.bin", packet_file(2, 8, 0, &[1, 2, 3])),
        ("empty.bin", packet_file(0, 8, 0, &[])),
    ] {
        let input = write(dir.path(), name, bytes);
        for cmd in ["codec-encode", "codec-decode"] {
            let o = run(&[cmd, "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(2), "{cmd} {name}");
        }
    }
}
