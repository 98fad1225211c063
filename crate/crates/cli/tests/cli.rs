//! End-to-end tests of the `trispin` binary: file formats, exit codes, and
//! determinism of the command surface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use trispin_core::experiment::{counts_to_csv, exact_records};
use trispin_core::states::FamilyParams;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trispin"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("trispin-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn json_value(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn prepare_writes_w_state() {
    let dir = tempdir("prepare-w");
    let out = run(
        &["prepare", "--family", "w", "--phi", "45", "--theta", "15", "--out", "w.json"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("norm 1.000000000000"));
    let state = json_value(&dir.join("w.json"));
    assert_eq!(state["family"], "w");
    assert_eq!(state["phi_deg"], 45.0);
    // three nonzero amplitudes once realized
    let params = FamilyParams::from_json(&std::fs::read_to_string(dir.join("w.json")).unwrap())
        .unwrap();
    let realized = params.state().unwrap();
    let nonzero = realized
        .amplitudes()
        .iter()
        .filter(|z| z.norm() > 1e-12)
        .count();
    assert_eq!(nonzero, 3);
}

#[test]
fn prepare_ghz_and_custom() {
    let dir = tempdir("prepare-ghz");
    let out = run(
        &["prepare", "--family", "ghz", "--phi-prime", "30", "--out", "g.json"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(json_value(&dir.join("g.json"))["phi_prime_deg"], 30.0);

    // custom amplitudes with a norm error beyond 1e-6 are rejected (usage)
    let inv = format!("{},0", std::f64::consts::FRAC_1_SQRT_2);
    let out = run(
        &[
            "prepare", "--family", "custom", "--amplitudes", "0.9,0", "0,0", "0,0", &inv,
            "0,0", "0,0", "0,0", "0,0", "--out", "c.json",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("norm"));

    let out = run(
        &[
            "prepare", "--family", "custom", "--amplitudes", "0,0", "0,0", "0,0", &inv, "0,0",
            "0,0", &inv, "0,0", "--out", "c.json",
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn prepare_validates_fields() {
    let dir = tempdir("prepare-bad");
    let out = run(&["prepare", "--family", "w", "--phi", "45"], &dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--theta"), "{}", stderr(&out));

    let out = run(
        &["prepare", "--family", "ghz", "--phi-prime", "30", "--phi", "10"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--phi"));

    let out = run(&["prepare", "--family", "bell", "--phi", "1", "--theta", "2"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_reports_invariants() {
    let dir = tempdir("analyze");
    run(
        &["prepare", "--family", "w", "--phi", "45", "--theta", "45", "--out", "s.json"],
        &dir,
    );
    let out = run(
        &["analyze", "--state", "s.json", "--out", "report.json"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json_value(&dir.join("report.json"));
    let iso_sum = report["invariance"]["iso_sum"].as_f64().unwrap();
    assert!((iso_sum - 1.0).abs() < 1e-10);
    assert!(report["invariance"]["max_aniso_deviation"].as_f64().unwrap() < 1e-10);
    // frozen exact Horodecki parameters for (45°,45°)
    assert!((report["monogamy"]["m_ab"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((report["monogamy"]["m_ac"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(report["three_tangle"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn analyze_rejects_malformed_state_file() {
    let dir = tempdir("analyze-bad");
    std::fs::write(dir.join("broken.json"), "{\"family\": \"w\"").unwrap();
    let out = run(&["analyze", "--state", "broken.json"], &dir);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));

    std::fs::write(dir.join("wrong.json"), "{\"family\": \"w\", \"phi_deg\": 1.0}").unwrap();
    let out = run(&["analyze", "--state", "wrong.json"], &dir);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("theta_deg"));
}

#[test]
fn analyze_accepts_directions_file() {
    let dir = tempdir("analyze-dirs");
    run(
        &["prepare", "--family", "w", "--phi", "45", "--theta", "45", "--out", "s.json"],
        &dir,
    );
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    std::fs::write(
        dir.join("dirs.json"),
        format!(
            "{{\"a1\":[1,0,0],\"a2\":[0,1,0],\"b1\":[{inv},{inv},0],\"b2\":[{inv},{},0]}}",
            -inv
        ),
    )
    .unwrap();
    let out = run(
        &["analyze", "--state", "s.json", "--directions", "dirs.json", "--out", "r.json"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json_value(&dir.join("r.json"));
    // frozen: ⟨B_AB⟩²/4 = 0.5 at the published directions
    let chsh_ab_sq = report["monogamy"]["chsh_ab_sq"].as_f64().unwrap();
    assert!((chsh_ab_sq / 4.0 - 0.5).abs() < 1e-9);

    std::fs::write(dir.join("bad.json"), "{\"a1\":[1,1,0],\"a2\":[0,1,0],\"b1\":[1,0,0],\"b2\":[0,1,0]}").unwrap();
    let out = run(
        &["analyze", "--state", "s.json", "--directions", "bad.json"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn simulate_writes_deterministic_counts() {
    let dir = tempdir("simulate");
    run(
        &["prepare", "--family", "w", "--phi", "30", "--theta", "30", "--out", "s.json"],
        &dir,
    );
    let out = run(
        &["simulate", "--state", "s.json", "--shots", "400", "--seed", "1", "--out", "a.csv"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let a = std::fs::read(dir.join("a.csv")).unwrap();
    let text = String::from_utf8(a.clone()).unwrap();
    assert_eq!(text.lines().count(), 217);
    assert_eq!(text.lines().next().unwrap(), "j,k,l,alpha,beta,gamma,count");

    // byte-identical rerun with the same seed
    run(
        &["simulate", "--state", "s.json", "--shots", "400", "--seed", "1", "--out", "b.csv"],
        &dir,
    );
    assert_eq!(a, std::fs::read(dir.join("b.csv")).unwrap());

    // total counts within Poisson spread of 27 × shots
    let total: u64 = text
        .lines()
        .skip(1)
        .map(|line| line.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    let expected = 27.0 * 400.0;
    assert!((total as f64 - expected).abs() < 6.0 * expected.sqrt());
}

#[test]
fn simulate_jitter_changes_counts() {
    let dir = tempdir("simulate-jitter");
    run(
        &["prepare", "--family", "w", "--phi", "30", "--theta", "0", "--out", "s.json"],
        &dir,
    );
    run(
        &["simulate", "--state", "s.json", "--shots", "400", "--seed", "2", "--out", "a.csv"],
        &dir,
    );
    run(
        &[
            "simulate", "--state", "s.json", "--shots", "400", "--seed", "2", "--jitter", "0.5",
            "--out", "b.csv",
        ],
        &dir,
    );
    assert_ne!(
        std::fs::read(dir.join("a.csv")).unwrap(),
        std::fs::read(dir.join("b.csv")).unwrap()
    );
}

#[test]
fn estimate_matches_analyze_on_exact_counts() {
    let dir = tempdir("estimate-exact");
    run(
        &["prepare", "--family", "w", "--phi", "45", "--theta", "15", "--out", "s.json"],
        &dir,
    );
    // exact-frequency records, written through the library
    let params = FamilyParams::W {
        phi_deg: 45.0,
        theta_deg: 15.0,
    };
    let records = exact_records(&params.state().unwrap(), 1_000_000_000_000);
    std::fs::write(dir.join("counts.csv"), counts_to_csv(&records)).unwrap();

    run(
        &["analyze", "--state", "s.json", "--out", "analyze.json"],
        &dir,
    );
    let out = run(
        &[
            "estimate", "--counts", "counts.csv", "--state", "s.json", "--resamples", "120",
            "--seed", "1", "--out", "estimate.json",
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let analyze = json_value(&dir.join("analyze.json"));
    let estimate = json_value(&dir.join("estimate.json"));

    // spectral statistics agree to 1e-10 on noiseless counts
    let stats = estimate["statistics"].as_array().unwrap();
    let stat = |name: &str| -> f64 {
        stats
            .iter()
            .find(|s| s["name"] == name)
            .unwrap_or_else(|| panic!("statistic {name}"))["value"]
            .as_f64()
            .unwrap()
    };
    assert!((stat("iso-sum") - analyze["invariance"]["iso_sum"].as_f64().unwrap()).abs() < 1e-10);
    for (pair_idx, pair) in ["ab", "ac", "bc"].iter().enumerate() {
        let exact = analyze["pairs"][pair_idx]["delta"][0].as_f64().unwrap();
        assert!((stat(&format!("delta-s1-{pair}")) - exact).abs() < 1e-10);
        let exact_m = analyze["pairs"][pair_idx]["horodecki"].as_f64().unwrap();
        assert!((stat(&format!("horodecki-{pair}")) - exact_m).abs() < 1e-10);
    }
    // concurrence-based statistics go through an eigenvalue square root and
    // carry ~1e-7 noise at rank-2 inputs
    let exact_tangle = analyze["three_tangle"].as_f64().unwrap();
    assert!((stat("three-tangle") - exact_tangle).abs() < 5e-6);

    // noiseless tomography: unit fidelity
    let fidelity = estimate["tomography"]["fidelity"].as_f64().unwrap();
    assert!(fidelity > 1.0 - 1e-10);
}

#[test]
fn estimate_flags_incomplete_counts() {
    let dir = tempdir("estimate-incomplete");
    let params = FamilyParams::W {
        phi_deg: 30.0,
        theta_deg: 0.0,
    };
    let records = exact_records(&params.state().unwrap(), 100_000);
    let text = counts_to_csv(&records);
    // drop the whole (3,3,3) block
    let filtered: Vec<&str> = text
        .lines()
        .filter(|line| !line.starts_with("3,3,3,"))
        .collect();
    std::fs::write(dir.join("partial.csv"), filtered.join("\n")).unwrap();
    let out = run(&["estimate", "--counts", "partial.csv"], &dir);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("(3, 3, 3)"), "{}", stderr(&out));

    // a malformed row is a parse error, not incomplete data
    let mangled = text.replace("1,1,1,1,1,1,", "1,1,1,2,1,1,");
    std::fs::write(dir.join("broken.csv"), mangled).unwrap();
    let out = run(&["estimate", "--counts", "broken.csv"], &dir);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn report_exact_markdown_and_csv() {
    let dir = tempdir("report");
    let out = run(
        &["report", "--table", "1", "--mode", "exact", "--format", "markdown", "--out", "t1.md"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let md = std::fs::read_to_string(dir.join("t1.md")).unwrap();
    assert!(md.contains("| (20,0) |"));
    assert!(md.contains("delta_s1^AB"));
    assert!(!md.contains("disagrees"));

    let out = run(
        &["report", "--table", "6", "--mode", "exact", "--format", "csv", "--out", "t6.csv"],
        &dir,
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("t6.csv")).unwrap();
    assert!(csv.starts_with("# table=T6 mode=exact"));

    let out = run(&["report", "--table", "4", "--mode", "exact"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_simulated_json() {
    let dir = tempdir("report-sim");
    let out = run(
        &[
            "report", "--table", "2", "--mode", "simulated", "--shots", "600", "--seed", "3",
            "--resamples", "120", "--format", "json", "--out", "t2.json",
        ],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json_value(&dir.join("t2.json"));
    assert_eq!(report["provenance"]["mode"], "simulated");
    assert_eq!(report["provenance"]["seed"], 3);
    assert_eq!(report["provenance"]["shots_per_setting"], 600);
    // Eq.-bound under noise: every CHSH cell stays below its M cell + 3σ
    for row in report["rows"].as_array().unwrap() {
        let cells = row["cells"].as_array().unwrap();
        for (m_idx, b_idx) in [(0, 2), (1, 3)] {
            let m = cells[m_idx]["value"].as_f64().unwrap();
            let b = cells[b_idx]["value"].as_f64().unwrap();
            let sigma = cells[b_idx]["std_error"].as_f64().unwrap();
            assert!(b <= m + 3.0 * sigma + 1e-9, "row {row}");
        }
    }
}

#[test]
fn verify_suites_pass_and_reject_unknown() {
    let dir = tempdir("verify");
    for suite in ["invariance", "monogamy", "ordering", "chsh-optimality"] {
        let out = run(
            &["verify", "--suite", suite, "--trials", "60", "--seed", "5"],
            &dir,
        );
        assert!(out.status.success(), "{suite}: {}", stderr(&out));
        assert!(stdout(&out).contains("PASS"));
    }
    let out = run(
        &["verify", "--suite", "estimator-consistency", "--trials", "4", "--seed", "5"],
        &dir,
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let out = run(&["verify", "--suite", "bogus", "--trials", "5"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_error_on_unknown_flag() {
    let dir = tempdir("usage");
    let out = run(&["analyze", "--nonsense"], &dir);
    assert_eq!(out.status.code(), Some(2));
}
