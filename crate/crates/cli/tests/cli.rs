use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use brex_cli::config::Metadata;
use brex_cli::BenchConfig;
use tempfile::TempDir;

const SMALL: &str = r#"
lambda0_factor = 0.02
solvers = ["fbs", "irl1", "iht", "oracle"]
seeds = [3, 1, 2]

[dataset]
m = 8
n = 10
k_star = 3
corr_rho = 0.9
lower = -1.5
upper = 1.5
fidelity = { kind = "ls", snr = 10.0 }
"#;

fn brex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn bench(config: &Path, out: &Path) -> Output {
    brex(&[
        "bench",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ])
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bench_writes_results_summaries_and_metadata() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let out = tmp.path().join("out");
    let o = bench(&cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let (header, rows) = read_csv(&out.join("results.csv"));
    assert_eq!(
        header.join(","),
        "seed,solver,J0,Jpsi,support_size,iters,converged,wall_ms,polish_applied"
    );
    assert_eq!(rows.len(), 12);
    // seed order from the config, solver order within each seed
    let order: Vec<(String, String)> = rows.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    let want: Vec<(String, String)> = ["3", "1", "2"]
        .iter()
        .flat_map(|s| {
            ["fbs", "irl1", "iht", "oracle"]
                .iter()
                .map(move |v| (s.to_string(), v.to_string()))
        })
        .collect();
    assert_eq!(order, want);

    for seed_rows in rows.chunks(4) {
        let j0 = |i: usize| seed_rows[i][2].parse::<f64>().unwrap();
        let oracle = j0(3);
        assert!(j0(0).min(j0(1)) >= oracle - 1e-8);
        assert!(j0(2) >= oracle - 1e-8);
        assert_eq!(seed_rows[2][3], "", "IHT has no relaxed objective");
        assert_eq!(seed_rows[0][8], "true");
        assert_eq!(seed_rows[2][8], "false");
    }

    for (i, solver) in ["fbs", "irl1", "iht", "oracle"].iter().enumerate() {
        let (header, sorted) = read_csv(&out.join(format!("ordered_{solver}.csv")));
        assert_eq!(header, vec!["J0_sorted"]);
        let got: Vec<f64> = sorted.iter().map(|r| r[0].parse().unwrap()).collect();
        let mut want: Vec<f64> = rows.iter().skip(i).step_by(4).map(|r| r[2].parse().unwrap()).collect();
        want.sort_by(f64::total_cmp);
        assert_eq!(got, want);
    }

    let meta: Metadata = toml::from_str(&std::fs::read_to_string(out.join("metadata.toml")).unwrap()).unwrap();
    let mut original = BenchConfig::from_toml(SMALL).unwrap();
    original.output_dir = out.clone();
    assert_eq!(meta.config, original);
    assert!(meta.prng.contains("ChaCha20"));
    assert_eq!(meta.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn bench_output_is_deterministic_apart_from_wall_time() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let strip = |dir: &Path| -> Vec<Vec<String>> {
        read_csv(&dir.join("results.csv"))
            .1
            .into_iter()
            .map(|mut r| {
                r.remove(7);
                r
            })
            .collect()
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(bench(&cfg, &a).status.code(), Some(0));
    assert_eq!(
        brex(&[
            "bench",
            cfg.to_str().unwrap(),
            "--out",
            b.to_str().unwrap(),
            "--jobs",
            "1"
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(strip(&a), strip(&b));
    for f in ["ordered_fbs.csv", "ordered_oracle.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn desk_scale_least_squares_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/ls_desk.toml");
    let out = tmp.path().join("ls");
    let o = bench(&cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_csv(&out.join("results.csv")).1.len(), 60);
    for solver in ["fbs", "irl1", "iht"] {
        assert_eq!(read_csv(&out.join(format!("ordered_{solver}.csv"))).1.len(), 20);
    }
    assert!(!out.join("ordered_oracle.csv").exists());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        BenchConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn invalid_input_exits_2_without_files() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    for (name, text) in [
        ("empty_seeds.toml", SMALL.replace("seeds = [3, 1, 2]", "seeds = []")),
        ("big_oracle.toml", SMALL.replace("n = 10", "n = 30")),
        ("bad_factor.toml", SMALL.replace("0.02", "2.0")),
        ("not_toml.toml", "this is = = not toml".to_string()),
    ] {
        let cfg = write_config(tmp.path(), name, &text);
        let o = bench(&cfg, &out);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(!out.exists(), "{name} created output");
    }
    assert_eq!(brex(&["bench"]).status.code(), Some(2));
    assert_eq!(brex(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn io_failures_exit_3() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("missing.toml");
    assert_eq!(bench(&missing, &tmp.path().join("out")).status.code(), Some(3));

    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    assert_eq!(bench(&cfg, &blocker.join("out")).status.code(), Some(3));
}

#[test]
fn certify_passes_on_small_batches() {
    let tmp = TempDir::new().unwrap();
    for (name, text) in [
        ("plain.toml", SMALL.to_string()),
        ("big_margin.toml", format!("gamma_margin = 10.0\n{SMALL}")),
        ("heavy.toml", SMALL.replace("0.02", "0.99")),
    ] {
        let cfg = write_config(tmp.path(), name, &text);
        let out = tmp.path().join(format!("{name}.out"));
        let o = brex(&["certify", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{name}: {}{}",
            stdout(&o),
            String::from_utf8_lossy(&o.stderr)
        );
        let (header, rows) = read_csv(&out.join("certify_report.csv"));
        assert_eq!(header, vec!["seed", "check", "status", "detail"]);
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| r[2] != "fail"));
    }
}

#[test]
fn certify_rejects_large_problems() {
    let tmp = TempDir::new().unwrap();
    let text = SMALL
        .replace("n = 10", "n = 25")
        .replace("\"oracle\"", "\"iht\"")
        .replace("\"iht\", \"iht\"", "\"iht\"");
    let cfg = write_config(tmp.path(), "big.toml", &text);
    let o = brex(&[
        "certify",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn check_battery_passes_and_is_repeatable() {
    let a = brex(&["check"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let table = stdout(&a);
    assert!(table.lines().filter(|l| l.ends_with("PASS")).count() >= 4, "{table}");
    assert_eq!(table, stdout(&brex(&["check"])));
}

#[test]
fn check_catches_injected_prox_fault() {
    let o = brex(&["check", "--inject-fault", "prox-sign"]);
    assert_eq!(o.status.code(), Some(1));
    let text = format!("{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(text.contains("prox vs grid oracle"));
    assert!(text.contains("first failing case"));
}
