//! Command-line harness for the shape-equivalence benchmark engine.
//!
//! Exit codes: 0 success (or pass verdict), 1 semantic failure (fail
//! verdict, invalid corpus), 2 usage or environment error.

mod config;
mod runner;

use clap::{Parser, Subcommand};
use config::RunConfig;
use shapebench_core::corpus::{import_obj, load_corpus, CorpusError};
use shapebench_core::geomtest::{evaluate_pair, Delta, MatchConfig, Verdict};
use shapebench_core::meshgen::{
    assemble, extract_vertices, PointCloud, TessellationDefaults, TriMesh,
};
use shapebench_core::render::render_views;
use shapebench_core::shapescript::{evaluate, parse, ExecLimits};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "shapebench",
    about = "Evaluate parametric modeling programs for geometric equivalence",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare two models (.shape programs or .obj meshes): pass/fail plus
    /// Chamfer distance. Exit 0 = pass, 1 = fail, 2 = error.
    Compare {
        /// Candidate model file.
        candidate: PathBuf,
        /// Ground-truth model file.
        truth: PathBuf,
        /// Absolute match threshold in meters (overrides --delta-rel).
        #[arg(long)]
        delta_abs: Option<f64>,
        /// Relative match threshold as a fraction of the truth bbox
        /// diagonal (default 0.005).
        #[arg(long)]
        delta_rel: Option<f64>,
        /// Relative eigenvalue tie tolerance for alignment candidates.
        #[arg(long)]
        tie_tol: Option<f64>,
    },
    /// Run a full generation + evaluation benchmark from a config file.
    Run {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override worker parallelism.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Render front/side/top orthographic views of a model to PPM files.
    Render {
        /// Model file (.shape or .obj).
        file: PathBuf,
        /// Output directory for front.ppm, side.ppm, top.ppm.
        #[arg(long)]
        out: PathBuf,
        /// Square image size in pixels (min 64).
        #[arg(long, default_value_t = 256)]
        size: u32,
        /// Also write PNG copies.
        #[arg(long)]
        png: bool,
    },
    /// Validate every sample in a corpus directory. Exit 0 = all valid,
    /// 1 = failures listed, 2 = unreadable corpus.
    Validate {
        /// Corpus directory.
        corpus: PathBuf,
    },
    /// Re-render the CSV grid from an existing report.json.
    Report {
        /// Path to report.json.
        report: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        csv: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Compare {
            candidate,
            truth,
            delta_abs,
            delta_rel,
            tie_tol,
        } => cmd_compare(&candidate, &truth, delta_abs, delta_rel, tie_tol),
        Command::Run {
            config,
            out,
            parallelism,
        } => cmd_run(&config, out, parallelism),
        Command::Render {
            file,
            out,
            size,
            png,
        } => cmd_render(&file, &out, size, png),
        Command::Validate { corpus } => cmd_validate(&corpus),
        Command::Report { report, csv } => cmd_report(&report, &csv),
    }
}

/// Loads a model file into a point cloud by extension.
fn load_cloud(path: &Path) -> anyhow::Result<PointCloud> {
    let mesh = load_mesh(path)?;
    Ok(extract_vertices(&mesh))
}

fn load_mesh(path: &Path) -> anyhow::Result<TriMesh> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase();
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    match ext.as_str() {
        "shape" => {
            let program = parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            let instances = evaluate(&program, &ExecLimits::default())
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            assemble(&instances, &TessellationDefaults::default())
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
        }
        "obj" => import_obj(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display())),
        other => Err(anyhow::anyhow!(
            "{}: unsupported extension `{other}` (expected .shape or .obj)",
            path.display()
        )),
    }
}

fn cmd_compare(
    candidate_path: &Path,
    truth_path: &Path,
    delta_abs: Option<f64>,
    delta_rel: Option<f64>,
    tie_tol: Option<f64>,
) -> anyhow::Result<ExitCode> {
    for (name, value) in [("--delta-rel", delta_rel), ("--delta-abs", delta_abs)] {
        if let Some(v) = value {
            if !(v.is_finite() && v > 0.0) {
                anyhow::bail!("{name} must be positive and finite, got {v}");
            }
        }
    }
    if let Some(tol) = tie_tol {
        if !(tol > 0.0 && tol < 1.0) {
            anyhow::bail!("--tie-tol must be in (0, 1), got {tol}");
        }
    }
    let candidate = load_cloud(candidate_path)?;
    let truth = load_cloud(truth_path)?;
    let mut cfg = MatchConfig::default();
    if let Some(rel) = delta_rel {
        cfg.delta = Delta::Relative(rel);
    }
    if let Some(abs) = delta_abs {
        cfg.delta = Delta::Absolute(abs);
    }
    if let Some(tol) = tie_tol {
        cfg.eigen_tie_tol = tol;
    }
    let outcome = evaluate_pair(&candidate, &truth, &cfg)?;
    let verdict = match outcome.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    };
    println!(
        "verdict={verdict} worst_match={:.9} delta={:.9} chamfer={:.12} alignment={}",
        outcome.worst_match_distance, outcome.delta_used, outcome.chamfer, outcome.chosen_alignment
    );
    Ok(match outcome.verdict {
        Verdict::Pass => ExitCode::SUCCESS,
        Verdict::Fail => ExitCode::from(1),
    })
}

fn cmd_run(
    config_path: &Path,
    out: Option<PathBuf>,
    parallelism: Option<usize>,
) -> anyhow::Result<ExitCode> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(dir) = out {
        config.out_dir = dir;
    }
    if let Some(par) = parallelism {
        config.parallelism = par;
    }
    let outcome = runner::execute_run(&config)?;
    runner::write_reports(&config.out_dir, &outcome)?;
    for (k, v) in &outcome.report.metrics.pass_at_k {
        println!("pass@{k} = {v:.6}");
    }
    for (category, count) in &outcome.report.metrics.category_counts {
        if *count > 0 {
            println!("{category}: {count}");
        }
    }
    if let Some(failure) = &outcome.failure {
        eprintln!("run incomplete: {failure}");
        return Ok(ExitCode::from(2));
    }
    println!(
        "report written to {}",
        config.out_dir.join("report.json").display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_render(file: &Path, out: &Path, size: u32, png: bool) -> anyhow::Result<ExitCode> {
    let mesh = load_mesh(file)?;
    let views = render_views(&mesh, size)?;
    std::fs::create_dir_all(out)?;
    for view in &views {
        let ppm_path = out.join(format!("{}.ppm", view.view.name()));
        std::fs::write(&ppm_path, view.to_ppm())?;
        println!("wrote {}", ppm_path.display());
        if png {
            let png_path = out.join(format!("{}.png", view.view.name()));
            std::fs::write(&png_path, view.to_png()?)?;
            println!("wrote {}", png_path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(corpus_dir: &Path) -> anyhow::Result<ExitCode> {
    if !corpus_dir.is_dir() {
        return Err(anyhow::anyhow!(
            "corpus directory {} does not exist",
            corpus_dir.display()
        ));
    }
    // Collect every failing sample rather than stopping at the first.
    let mut failures: Vec<String> = Vec::new();
    let mut count = 0usize;
    match load_corpus(corpus_dir) {
        Ok(samples) => {
            count = samples.len();
            if samples.is_empty() {
                failures.push("corpus contains no samples".to_string());
            }
        }
        Err(first_error) => {
            // Re-walk per-sample so all broken ids are listed.
            let (CorpusError::Format { sample, .. } | CorpusError::Validation { sample, .. }) =
                &first_error;
            let sample = sample.clone();
            failures.push(first_error.to_string());
            let mut dirs: Vec<_> = std::fs::read_dir(corpus_dir)?
                .filter_map(|e| e.ok())
                .filter(|e| e.path().is_dir())
                .map(|e| e.path())
                .collect();
            dirs.sort();
            for dir in dirs {
                let name = dir
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                if name == sample {
                    continue;
                }
                let single = tempfile_corpus(&dir)?;
                if let Err(e) = load_corpus(single.path()) {
                    failures.push(e.to_string());
                } else {
                    count += 1;
                }
            }
        }
    }
    if failures.is_empty() {
        println!("corpus valid: {count} sample(s)");
        Ok(ExitCode::SUCCESS)
    } else {
        for failure in &failures {
            eprintln!("invalid: {failure}");
        }
        Ok(ExitCode::from(1))
    }
}

/// Isolates one sample directory for independent validation.
fn tempfile_corpus(sample_dir: &Path) -> anyhow::Result<tempdir::TempCorpus> {
    tempdir::TempCorpus::link(sample_dir)
}

mod tempdir {
    use std::path::{Path, PathBuf};

    pub struct TempCorpus {
        root: PathBuf,
    }

    impl TempCorpus {
        pub fn link(sample_dir: &Path) -> anyhow::Result<TempCorpus> {
            let name = sample_dir
                .file_name()
                .ok_or_else(|| anyhow::anyhow!("bad sample path"))?;
            let root = std::env::temp_dir().join(format!(
                "shapebench-validate-{}-{}",
                std::process::id(),
                name.to_string_lossy()
            ));
            let target = root.join(name);
            std::fs::create_dir_all(&target)?;
            for entry in std::fs::read_dir(sample_dir)? {
                let entry = entry?;
                if entry.path().is_file() {
                    std::fs::copy(entry.path(), target.join(entry.file_name()))?;
                }
            }
            Ok(TempCorpus { root })
        }

        pub fn path(&self) -> &Path {
            &self.root
        }
    }

    impl Drop for TempCorpus {
        fn drop(&mut self) {
            let _ = std::fs::remove_dir_all(&self.root);
        }
    }
}

fn cmd_report(report_path: &Path, csv_path: &Path) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(report_path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", report_path.display()))?;
    let report: runner::FullReport = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("bad report {}: {e}", report_path.display()))?;
    std::fs::write(csv_path, runner::report_csv(&report))?;
    println!("wrote {}", csv_path.display());
    Ok(ExitCode::SUCCESS)
}
