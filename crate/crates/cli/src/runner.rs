//! The `run` pipeline: generation, evaluation, aggregation, and report
//! emission.

use crate::config::RunConfig;
use anyhow::{anyhow, Context};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use shapebench_core::corpus::{load_corpus, Sample};
use shapebench_core::genclient::{
    api_key_from_env, build_prompt, extract_code, refine_loop, ExecSummary, FeedbackKind,
    HttpProvider, HttpProviderConfig, MockProvider, Provider, RefineConfig, RefineRound,
    RefineTranscript, SamplingRegime, Strategy, TemplateSet, Termination,
};
use shapebench_core::geomtest::{evaluate_pair, MatchConfig, Verdict};
use shapebench_core::meshgen::{
    assemble, extract_vertices, MeshError, PointCloud, TessellationDefaults,
};
use shapebench_core::metrics::{
    aggregate, classify_error, AttemptResult, ClassifyConfig, RunReport, SampleRuns,
};
use shapebench_core::shapescript::{evaluate, parse, ExecLimits};
use std::path::Path;

/// The normative report: id-sorted, timestamp-free, byte-stable across
/// reruns and parallelism settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullReport {
    pub strategy: String,
    pub regime: String,
    pub model: String,
    pub provider: String,
    pub template_version: String,
    pub attempts_per_sample: u32,
    pub ks: Vec<u64>,
    /// False when a provider/config error aborted some samples.
    pub complete: bool,
    pub metrics: RunReport,
    pub transcripts: Vec<SampleTranscripts>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleTranscripts {
    pub sample_id: String,
    pub attempts: Vec<RefineTranscript>,
}

pub struct RunOutcome {
    pub report: FullReport,
    /// The first per-sample failure, when the run is incomplete.
    pub failure: Option<String>,
}

pub fn execute_run(config: &RunConfig) -> anyhow::Result<RunOutcome> {
    config.validate()?;
    let samples = load_corpus(&config.corpus).map_err(|e| anyhow!("corpus: {e}"))?;
    if samples.is_empty() {
        return Err(anyhow!("corpus at {} is empty", config.corpus.display()));
    }

    let templates = match &config.templates {
        Some(dir) => TemplateSet::load(dir).map_err(|e| anyhow!("templates: {e}"))?,
        None => TemplateSet::builtin(),
    };
    let provider = build_provider(config)?;
    let strategy_kind = config.strategy_kind()?;
    let regime = config.sampling_regime()?;

    // Dispatch order is shuffled by the seed; reports are id-ordered, so
    // this only exercises order independence.
    let mut order: Vec<&Sample> = samples.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    order.shuffle(&mut rng);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .context("building worker pool")?;

    let results: Vec<(String, anyhow::Result<SampleResult>)> = pool.install(|| {
        use rayon::prelude::*;
        order
            .par_iter()
            .map(|sample| {
                let result = run_sample(
                    sample,
                    &samples,
                    provider.as_ref(),
                    &templates,
                    strategy_kind,
                    regime,
                    config,
                );
                (sample.id.clone(), result)
            })
            .collect()
    });

    let mut runs = Vec::new();
    let mut transcripts = Vec::new();
    let mut failure = None;
    for (sample_id, result) in results {
        match result {
            Ok(sample_result) => {
                runs.push(sample_result.runs);
                transcripts.push(SampleTranscripts {
                    sample_id,
                    attempts: sample_result.transcripts,
                });
            }
            Err(e) => {
                if failure.is_none() {
                    failure = Some(format!("sample {sample_id}: {e}"));
                }
            }
        }
    }
    runs.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    transcripts.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

    if runs.is_empty() {
        return Err(anyhow!(
            "no sample completed; first failure: {}",
            failure.unwrap_or_default()
        ));
    }

    let metrics = aggregate(&runs, &config.ks, &config.classify_config())
        .map_err(|e| anyhow!("aggregation: {e}"))?;

    let report = FullReport {
        strategy: strategy_kind.name().to_string(),
        regime: config.regime.clone(),
        model: config.model.clone(),
        provider: config.provider.clone(),
        template_version: templates.version.clone(),
        attempts_per_sample: config.attempts_per_sample(),
        ks: config.ks.clone(),
        complete: failure.is_none(),
        metrics,
        transcripts,
    };
    Ok(RunOutcome { report, failure })
}

struct SampleResult {
    runs: SampleRuns,
    transcripts: Vec<RefineTranscript>,
}

fn build_provider(config: &RunConfig) -> anyhow::Result<Box<dyn Provider>> {
    match config.provider.as_str() {
        "mock" => {
            let dir = config
                .fixtures
                .as_ref()
                .ok_or_else(|| anyhow!("mock provider requires `fixtures`"))?;
            Ok(Box::new(MockProvider::new(dir.clone())))
        }
        "live" => {
            let live = &config.provider_live;
            let api_key =
                api_key_from_env(&live.api_key_env).map_err(|e| anyhow!("credential: {e}"))?;
            let mut provider_config = HttpProviderConfig::new(live.endpoint.clone(), api_key);
            provider_config.supports_images = live.supports_images;
            provider_config.max_concurrent = live.max_concurrent;
            Ok(Box::new(HttpProvider::new(provider_config)))
        }
        other => Err(anyhow!("unknown provider `{other}`")),
    }
}

fn run_sample(
    sample: &Sample,
    corpus: &[Sample],
    provider: &dyn Provider,
    templates: &TemplateSet,
    strategy_kind: shapebench_core::genclient::StrategyKind,
    regime: SamplingRegime,
    config: &RunConfig,
) -> anyhow::Result<SampleResult> {
    let strategy = Strategy::with_default_exemplars(strategy_kind, corpus, &sample.id)
        .map_err(|e| anyhow!("strategy: {e}"))?;
    let match_cfg = sample.match_config(&config.match_config());
    let limits = config.limits();
    let tessellation = config.tessellation();
    let truth = sample
        .truth_cloud(&limits, &tessellation)
        .map_err(|e| anyhow!("truth geometry: {e}"))?;
    let classify_cfg = config.classify_config();

    let mut attempts = Vec::new();
    let mut transcripts = Vec::new();

    if config.refine_rounds == 1 {
        // One request for all samples of the attempt budget.
        let messages = build_prompt(&strategy, sample, corpus, templates)
            .map_err(|e| anyhow!("prompt: {e}"))?;
        let request =
            regime.build_request(config.model.clone(), messages, config.attempts_per_sample());
        let response = provider
            .generate(&request)
            .map_err(|e| anyhow!("provider: {e}"))?;
        for reply in &response.completions {
            let program = extract_code(reply);
            let attempt = evaluate_attempt(
                &program,
                &truth,
                &match_cfg,
                &limits,
                &tessellation,
                &classify_cfg,
            );
            transcripts.push(single_round_transcript(
                sample,
                reply.clone(),
                program,
                &attempt,
            ));
            attempts.push(attempt);
        }
    } else {
        // Sequential refinement per attempt; each round consumes one
        // completion.
        let refine_cfg = RefineConfig {
            model: config.model.clone(),
            regime,
            max_rounds: config.refine_rounds,
            match_config: match_cfg,
            limits,
            tessellation,
            render_size: 256,
        };
        for _ in 0..config.attempts_per_sample() {
            let transcript =
                refine_loop(provider, sample, &strategy, corpus, templates, &refine_cfg)
                    .map_err(|e| anyhow!("provider: {e}"))?;
            let attempt = evaluate_attempt(
                &transcript.final_program,
                &truth,
                &match_cfg,
                &limits,
                &tessellation,
                &classify_cfg,
            );
            attempts.push(attempt);
            transcripts.push(transcript);
        }
    }

    Ok(SampleResult {
        runs: SampleRuns::from_attempts(sample.id.clone(), attempts),
        transcripts,
    })
}

/// Executes one generated program and compares it against the truth cloud.
pub fn evaluate_attempt(
    program_source: &str,
    truth: &PointCloud,
    match_cfg: &MatchConfig,
    limits: &ExecLimits,
    tessellation: &TessellationDefaults,
    classify_cfg: &ClassifyConfig,
) -> AttemptResult {
    let parsed = match parse(program_source) {
        Ok(p) => p,
        Err(e) => {
            return AttemptResult::ExecFailure {
                message: e.to_string(),
            }
        }
    };
    let instances = match evaluate(&parsed, limits) {
        Ok(i) => i,
        Err(e) => {
            return AttemptResult::ExecFailure {
                message: e.to_string(),
            }
        }
    };
    let mesh = match assemble(&instances, tessellation) {
        Ok(m) => m,
        Err(MeshError::EmptyObject) => return AttemptResult::EmptyObject,
        Err(e) => {
            return AttemptResult::ExecFailure {
                message: e.to_string(),
            }
        }
    };
    let cloud = extract_vertices(&mesh);
    match evaluate_pair(&cloud, truth, match_cfg) {
        Ok(mut outcome) => {
            let provisional = AttemptResult::Evaluated {
                outcome: outcome.clone(),
            };
            outcome.error_category = Some(classify_error(&provisional, classify_cfg));
            AttemptResult::Evaluated { outcome }
        }
        Err(e) => AttemptResult::ExecFailure {
            message: e.to_string(),
        },
    }
}

fn single_round_transcript(
    sample: &Sample,
    reply: String,
    program: String,
    attempt: &AttemptResult,
) -> RefineTranscript {
    let exec = match attempt {
        AttemptResult::ExecFailure { message } => ExecSummary::Error {
            message: message.clone(),
        },
        AttemptResult::EmptyObject => ExecSummary::EmptyObject,
        AttemptResult::Evaluated { outcome } => ExecSummary::Evaluated {
            verdict: outcome.verdict,
            chamfer: outcome.chamfer,
            worst: outcome.worst_match_distance,
            delta: outcome.delta_used,
        },
    };
    let passed = matches!(
        attempt,
        AttemptResult::Evaluated { outcome } if outcome.verdict == Verdict::Pass
    );
    RefineTranscript {
        sample_id: sample.id.clone(),
        rounds: vec![RefineRound {
            model_reply: reply,
            program: program.clone(),
            exec,
            feedback: FeedbackKind::None,
        }],
        final_program: program,
        terminated_by: if passed {
            Termination::Pass
        } else {
            Termination::MaxRounds
        },
    }
}

// ── report files ────────────────────────────────────────────────

pub fn report_json(report: &FullReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

/// The strategy-by-pass@k grid.
pub fn report_csv(report: &FullReport) -> String {
    let mut header = String::from("strategy,regime,model,samples,attempts_per_sample");
    for k in &report.ks {
        header.push_str(&format!(",pass@{k}"));
    }
    let mut row = format!(
        "{},{},{},{},{}",
        report.strategy,
        report.regime,
        report.model,
        report.metrics.samples.len(),
        report.attempts_per_sample
    );
    for k in &report.ks {
        row.push_str(&format!(",{:.6}", report.metrics.pass_at_k[k]));
    }
    format!("{header}\n{row}\n")
}

pub fn write_reports(out_dir: &Path, outcome: &RunOutcome) -> anyhow::Result<()> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    std::fs::write(out_dir.join("report.json"), report_json(&outcome.report))?;
    std::fs::write(out_dir.join("report.csv"), report_csv(&outcome.report))?;
    // Timestamps live in a sidecar so the normative reports stay diffable.
    let sidecar = serde_json::json!({
        "finished_at_unix": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        "failure": outcome.failure,
    });
    std::fs::write(
        out_dir.join("run_meta.json"),
        format!("{}\n", serde_json::to_string_pretty(&sidecar)?),
    )?;
    Ok(())
}
