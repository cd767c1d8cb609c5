//! End-to-end tests of the command-line surface and exit-code contract.

mod common;

use common::{corpus_dir, exit_code, shapebench, stderr_str, stdout_str, workspace_root};
use std::fs;

#[test]
fn compare_solution_with_itself_passes() {
    let solution = corpus_dir().join("chair-basic/solution.shape");
    let solution = solution.to_str().unwrap();
    let output = shapebench(&["compare", solution, solution]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
    let line = stdout_str(&output);
    assert!(line.contains("verdict=pass"), "{line}");
    assert!(line.contains("chamfer=0.000000000000"), "{line}");
}

#[test]
fn compare_against_mutation_fails_with_exit_1() {
    let solution = corpus_dir().join("chair-basic/solution.shape");
    let mutated = corpus_dir().join("chair-basic/mutations/structural.shape");
    let output = shapebench(&[
        "compare",
        mutated.to_str().unwrap(),
        solution.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(stdout_str(&output).contains("verdict=fail"));
}

#[test]
fn compare_malformed_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.shape");
    fs::write(&bad, "cuboid(size=(1,1,1)").unwrap();
    let solution = corpus_dir().join("chair-basic/solution.shape");
    let output = shapebench(&["compare", bad.to_str().unwrap(), solution.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_str(&output).contains("syntax error"));
}

#[test]
fn compare_accepts_obj_input() {
    let obj = workspace_root().join("crates/core/tests/data/external_cuboid.obj");
    let dir = tempfile::tempdir().unwrap();
    let shape = dir.path().join("cuboid.shape");
    fs::write(
        &shape,
        "cuboid(size=(2,1,0.5), at=(0.4,-0.2,0.9), rot=(0,0,0.7));\n",
    )
    .unwrap();
    let output = shapebench(&["compare", obj.to_str().unwrap(), shape.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
}

#[test]
fn compare_rejects_unknown_extension() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("model.stl");
    fs::write(&file, "whatever").unwrap();
    let output = shapebench(&["compare", file.to_str().unwrap(), file.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn render_writes_three_views() {
    let dir = tempfile::tempdir().unwrap();
    let solution = corpus_dir().join("arch-blocks/solution.shape");
    let output = shapebench(&[
        "render",
        solution.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--size",
        "128",
        "--png",
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
    for name in ["front", "side", "top"] {
        let ppm = dir.path().join(format!("{name}.ppm"));
        assert!(ppm.exists(), "missing {name}.ppm");
        assert!(dir.path().join(format!("{name}.png")).exists());
        let bytes = fs::read(ppm).unwrap();
        assert!(bytes.starts_with(b"P6\n128 128\n255\n"));
    }
}

#[test]
fn render_empty_program_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.shape");
    fs::write(&empty, "let unused = 1;\n").unwrap();
    let output = shapebench(&[
        "render",
        empty.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_str(&output).contains("no geometry"));
}

#[test]
fn render_matches_committed_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let solution = corpus_dir().join("arch-blocks/solution.shape");
    let output = shapebench(&[
        "render",
        solution.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--size",
        "128",
    ]);
    assert_eq!(exit_code(&output), 0);
    for name in ["front", "side", "top"] {
        let got = fs::read(dir.path().join(format!("{name}.ppm"))).unwrap();
        let golden =
            fs::read(workspace_root().join(format!("crates/cli/tests/data/golden_{name}.ppm")))
                .unwrap();
        assert_eq!(got, golden, "golden mismatch for {name} view");
    }
}

#[test]
fn validate_shipped_corpus_passes() {
    let output = shapebench(&["validate", corpus_dir().to_str().unwrap()]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
    assert!(stdout_str(&output).contains("15 sample(s)"));
}

#[test]
fn validate_broken_corpus_lists_ids_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // One good sample, two broken ones.
    let good = dir.path().join("aaa-good");
    fs::create_dir(&good).unwrap();
    fs::write(good.join("prompt.txt"), "a block").unwrap();
    fs::write(
        good.join("solution.shape"),
        "cuboid(size=(2,1,0.5), at=(0,0,0));",
    )
    .unwrap();
    fs::write(
        good.join("meta.json"),
        r#"{"id": "aaa-good", "category": "other"}"#,
    )
    .unwrap();
    let broken1 = dir.path().join("bbb-no-solution");
    fs::create_dir(&broken1).unwrap();
    fs::write(broken1.join("prompt.txt"), "x").unwrap();
    fs::write(
        broken1.join("meta.json"),
        r#"{"id": "bbb-no-solution", "category": "other"}"#,
    )
    .unwrap();
    let broken2 = dir.path().join("ccc-bad-program");
    fs::create_dir(&broken2).unwrap();
    fs::write(broken2.join("prompt.txt"), "x").unwrap();
    fs::write(broken2.join("solution.shape"), "cuboid(size=(1,1,1));").unwrap();
    fs::write(
        broken2.join("meta.json"),
        r#"{"id": "ccc-bad-program", "category": "other"}"#,
    )
    .unwrap();

    let output = shapebench(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&output), 1);
    let errors = stderr_str(&output);
    assert!(errors.contains("bbb-no-solution"), "{errors}");
    assert!(errors.contains("ccc-bad-program"), "{errors}");
    assert!(!errors.contains("aaa-good"), "{errors}");
}

#[test]
fn validate_empty_directory_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let output = shapebench(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&output), 1);
}

#[test]
fn validate_missing_directory_exits_2() {
    let output = shapebench(&["validate", "/nonexistent/corpus/path"]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn run_emits_reports_and_report_rerenders_csv() {
    let out = tempfile::tempdir().unwrap();
    let output = shapebench(&[
        "run",
        "--config",
        "fixtures/run.toml",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
    assert!(stdout_str(&output).contains("pass@1 = 0.500000"));

    let json_path = out.path().join("report.json");
    let csv_path = out.path().join("report.csv");
    assert!(json_path.exists());
    assert!(csv_path.exists());
    assert!(out.path().join("run_meta.json").exists());

    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("strategy,regime,model,samples,attempts_per_sample,pass@1\n"));
    assert!(csv.contains("zero_shot,greedy,mock-model,6,1,0.500000"));

    // `report` re-renders the same CSV from the JSON.
    let rerendered = out.path().join("again.csv");
    let output = shapebench(&[
        "report",
        json_path.to_str().unwrap(),
        "--csv",
        rerendered.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    assert_eq!(fs::read(&rerendered).unwrap(), fs::read(&csv_path).unwrap());
}

#[test]
fn run_with_missing_fixture_is_incomplete_exit_2() {
    let out = tempfile::tempdir().unwrap();
    let fixtures = tempfile::tempdir().unwrap(); // empty: every sample misses
    let config = format!(
        r#"
corpus = "fixtures/corpus6"
strategy = "zero_shot"
provider = "mock"
fixtures = "{}"
out_dir = "{}"
"#,
        fixtures.path().display(),
        out.path().display()
    );
    let config_path = out.path().join("run.toml");
    fs::write(&config_path, config).unwrap();
    let output = shapebench(&["run", "--config", config_path.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 2);
    assert!(
        stderr_str(&output).contains("fixture missing")
            || stderr_str(&output).contains("no sample completed")
    );
}

#[test]
fn run_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.toml");
    fs::write(
        &config_path,
        "corpus = \"corpus\"\nstrategy = \"mystery\"\nprovider = \"mock\"\nfixtures = \"x\"\nout_dir = \"out\"\n",
    )
    .unwrap();
    let output = shapebench(&["run", "--config", config_path.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_str(&output).contains("unknown strategy"));
}

#[test]
fn ks_out_of_range_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.toml");
    fs::write(
        &config_path,
        "corpus = \"fixtures/corpus6\"\nstrategy = \"zero_shot\"\nregime = \"greedy\"\nks = [1, 3]\nprovider = \"mock\"\nfixtures = \"fixtures/responses\"\nout_dir = \"out\"\n",
    )
    .unwrap();
    let output = shapebench(&["run", "--config", config_path.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr_str(&output).contains("out of range"));
}

#[test]
fn nucleus_run_reports_three_pass_at_k_columns() {
    let out = tempfile::tempdir().unwrap();
    let output = shapebench(&[
        "run",
        "--config",
        "fixtures/run_nucleus.toml",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));

    let csv = fs::read_to_string(out.path().join("report.csv")).unwrap();
    assert!(
        csv.starts_with("strategy,regime,model,samples,attempts_per_sample,pass@1,pass@3,pass@5\n")
    );

    // Expected values from the closed form: three samples always pass
    // (c=5), two never do (c=0), the gate recovers once (c=1 of n=5).
    let gate = |k: u64| shapebench_core::metrics::pass_at_k(5, 1, k).unwrap();
    let expect = |k: u64| (3.0 + gate(k)) / 6.0;
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    for k in [1u64, 3, 5] {
        let got = report["metrics"]["pass_at_k"][k.to_string()]
            .as_f64()
            .unwrap();
        assert!(
            (got - expect(k)).abs() < 1e-12,
            "pass@{k}: got {got}, expected {}",
            expect(k)
        );
    }
}

#[test]
fn refine_run_recovers_every_sample() {
    let out = tempfile::tempdir().unwrap();
    let rerun = tempfile::tempdir().unwrap();
    for dir in [&out, &rerun] {
        let output = shapebench(&[
            "run",
            "--config",
            "fixtures/run_refine.toml",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0, "stderr: {}", stderr_str(&output));
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["metrics"]["pass_at_k"]["1"], 1.0);
    assert_eq!(report["metrics"]["category_counts"]["pass"], 6);

    // Failing samples took a feedback round; clean ones passed in one.
    let transcripts = report["transcripts"].as_array().unwrap();
    assert_eq!(transcripts.len(), 6);
    for t in transcripts {
        let id = t["sample_id"].as_str().unwrap();
        let rounds = t["attempts"][0]["rounds"].as_array().unwrap();
        let expected_rounds =
            if id.starts_with("f04") || id.starts_with("f05") || id.starts_with("f06") {
                2
            } else {
                1
            };
        assert_eq!(rounds.len(), expected_rounds, "sample {id}");
        assert_eq!(t["attempts"][0]["terminated_by"], "pass", "sample {id}");
    }

    // The refine path is as deterministic as the single-shot one.
    assert_eq!(
        fs::read(out.path().join("report.json")).unwrap(),
        fs::read(rerun.path().join("report.json")).unwrap()
    );
}

#[test]
fn compare_rejects_non_positive_thresholds() {
    let solution = corpus_dir().join("chair-basic/solution.shape");
    let solution = solution.to_str().unwrap();
    for flags in [
        ["--delta-abs", "0"],
        ["--delta-rel", "-0.1"],
        ["--tie-tol", "1.5"],
    ] {
        let output = shapebench(&["compare", solution, solution, flags[0], flags[1]]);
        assert_eq!(exit_code(&output), 2, "{flags:?} should be rejected");
    }
}
