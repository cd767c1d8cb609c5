//! Regenerates committed fixture and golden files through the production
//! code paths. Run explicitly after intentional changes to templates,
//! corpus samples, hashing, or the rasterizer:
//!
//! ```text
//! cargo test -p shapebench-cli --test regen -- --ignored
//! ```

mod common;

use common::{fenced, fixtures_dir, workspace_root, SeedingProvider};
use shapebench_core::corpus::load_corpus;
use shapebench_core::genclient::{
    build_prompt, message_hash, refine_loop, RefineConfig, Strategy, StrategyKind, TemplateSet,
    Termination,
};
use shapebench_core::meshgen::{assemble, TessellationDefaults};
use shapebench_core::render::render_views;
use shapebench_core::shapescript::{evaluate, parse, ExecLimits};

fn broken_syntax() -> String {
    fenced("cuboid(size=(0.4, 0.2, 0.02), at=(0, 0, 0.01)")
}

fn unbound_identifier() -> String {
    fenced(
        "cuboid(size=(w, 0.08, 0.5), at=(0, 0, 0.25));\n\
         cuboid(size=(0.1, 0.12, 0.03), at=(0, 0, 0.515));",
    )
}

/// Gate with the beam 3% too long: executes, fails the match, spatial
/// bucket.
fn gate_beam_off() -> String {
    fenced(
        "let post_h = 0.5;\n\
         cuboid(size=(0.05, 0.05, post_h), at=(-0.2, 0, post_h/2));\n\
         cuboid(size=(0.05, 0.05, post_h), at=(0.2, 0, post_h/2));\n\
         cuboid(size=(0.515, 0.05, 0.06), at=(0, 0, 0.53));",
    )
}

/// Five scripted completions per fixture sample. The greedy regime reads
/// only the first section; the nucleus regime reads all five.
///
/// First sections: 3 correct, 2 syntax-broken, 1 spatially off. Under
/// nucleus sampling the gate sample additionally recovers in its third
/// completion (c = 1 of n = 5).
fn fixture_sections(sample_id: &str, canonical: &str) -> Vec<String> {
    match sample_id {
        "f01-box-pair" | "f02-ell" | "f03-tower" => vec![fenced(canonical); 5],
        "f04-plank" => vec![broken_syntax(); 5],
        "f05-post" => vec![unbound_identifier(); 5],
        "f06-gate" => vec![
            gate_beam_off(),
            gate_beam_off(),
            fenced(canonical),
            gate_beam_off(),
            gate_beam_off(),
        ],
        other => panic!("unknown fixture sample {other}"),
    }
}

/// Chair with the seat (and the backrest that follows it) built half-size,
/// the classic size-parameter slip the visual round repairs.
const CHAIR_SEAT_HALVED: &str = "\
let seat_w = 0.4;
let seat_d = 0.42;
let seat_t = 0.05;
let leg_h = 0.4;
let leg_t = 0.04;
let back_h = 0.45;
let back_t = 0.04;

fn leg(x, y) {
    cuboid(size=(leg_t, leg_t, leg_h), at=(x, y, leg_h/2));
}

leg(seat_w/2 - leg_t/2, seat_d/2 - leg_t/2);
leg(seat_w/2 - leg_t/2, leg_t/2 - seat_d/2);
leg(leg_t/2 - seat_w/2, seat_d/2 - leg_t/2);
leg(leg_t/2 - seat_w/2, leg_t/2 - seat_d/2);
cuboid(size=(seat_w/2, seat_d/2, seat_t), at=(0, 0, leg_h + seat_t/2));
cuboid(size=(seat_w/2, back_t, back_h), at=(0, back_t/2 - seat_d/4, leg_h + seat_t + back_h/2));
";

#[test]
#[ignore = "regenerates committed fixtures; run explicitly"]
fn regen_all() {
    let templates = TemplateSet::builtin();

    // 1. Mock-run responses for the 6-sample fixture corpus: one file per
    // sample, five completions separated by `%%%` lines.
    let corpus6 = load_corpus(&fixtures_dir().join("corpus6")).unwrap();
    assert_eq!(corpus6.len(), 6);
    let responses_dir = fixtures_dir().join("responses");
    std::fs::create_dir_all(&responses_dir).unwrap();
    for stale in std::fs::read_dir(&responses_dir).unwrap().flatten() {
        std::fs::remove_file(stale.path()).unwrap();
    }
    for sample in &corpus6 {
        let strategy =
            Strategy::with_default_exemplars(StrategyKind::ZeroShot, &corpus6, &sample.id).unwrap();
        let messages = build_prompt(&strategy, sample, &corpus6, &templates).unwrap();
        let hash = message_hash(&messages);
        let path = responses_dir.join(format!("{hash}.txt"));
        let sections = fixture_sections(&sample.id, &sample.canonical_program);
        std::fs::write(&path, sections.join("\n%%%\n")).unwrap();
        println!("fixture {} -> {}", sample.id, path.display());
    }

    // 1b. Refine-capable responses for the same corpus: failing samples
    // recover with the canonical program when the diagnostic or visual
    // feedback comes back. Seeding through refine_loop keeps the hashes
    // exactly what the runner will compute.
    let refine6_dir = fixtures_dir().join("refine6");
    std::fs::create_dir_all(&refine6_dir).unwrap();
    for stale in std::fs::read_dir(&refine6_dir).unwrap().flatten() {
        std::fs::remove_file(stale.path()).unwrap();
    }
    for sample in &corpus6 {
        let script = match sample.id.as_str() {
            "f01-box-pair" | "f02-ell" | "f03-tower" => {
                vec![fenced(&sample.canonical_program)]
            }
            "f04-plank" => vec![broken_syntax(), fenced(&sample.canonical_program)],
            "f05-post" => vec![unbound_identifier(), fenced(&sample.canonical_program)],
            "f06-gate" => vec![gate_beam_off(), fenced(&sample.canonical_program)],
            other => panic!("unknown fixture sample {other}"),
        };
        let rounds = script.len();
        let provider = SeedingProvider::new(&refine6_dir, script);
        let strategy =
            Strategy::with_default_exemplars(StrategyKind::ZeroShot, &corpus6, &sample.id).unwrap();
        let transcript = refine_loop(
            &provider,
            sample,
            &strategy,
            &corpus6,
            &templates,
            &RefineConfig::new("mock-model"),
        )
        .unwrap();
        assert_eq!(transcript.terminated_by, Termination::Pass, "{}", sample.id);
        assert_eq!(transcript.rounds.len(), rounds, "{}", sample.id);
    }
    println!("refine-run fixtures written to {}", refine6_dir.display());

    // 2. Refine-loop fixtures: broken seat, then the canonical program.
    let corpus = load_corpus(&common::corpus_dir()).unwrap();
    let chair = corpus.iter().find(|s| s.id == "chair-basic").unwrap();
    let refine_dir = fixtures_dir().join("refine");
    std::fs::create_dir_all(&refine_dir).unwrap();
    for stale in std::fs::read_dir(&refine_dir).unwrap().flatten() {
        std::fs::remove_file(stale.path()).unwrap();
    }
    let provider = SeedingProvider::new(
        &refine_dir,
        vec![fenced(CHAIR_SEAT_HALVED), fenced(&chair.canonical_program)],
    );
    let strategy =
        Strategy::with_default_exemplars(StrategyKind::OneShotCot, &corpus, &chair.id).unwrap();
    let transcript = refine_loop(
        &provider,
        chair,
        &strategy,
        &corpus,
        &templates,
        &RefineConfig::new("mock-model"),
    )
    .unwrap();
    assert_eq!(transcript.rounds.len(), 2, "expected a 2-round transcript");
    assert_eq!(transcript.terminated_by, Termination::Pass);
    println!("refine fixtures written to {}", refine_dir.display());

    // 3. Golden renders for the arch-blocks sample at 128 px.
    let arch = corpus.iter().find(|s| s.id == "arch-blocks").unwrap();
    let program = parse(&arch.canonical_program).unwrap();
    let instances = evaluate(&program, &ExecLimits::default()).unwrap();
    let mesh = assemble(&instances, &TessellationDefaults::default()).unwrap();
    let views = render_views(&mesh, 128).unwrap();
    let golden_dir = workspace_root().join("crates/cli/tests/data");
    std::fs::create_dir_all(&golden_dir).unwrap();
    for view in &views {
        let path = golden_dir.join(format!("golden_{}.ppm", view.view.name()));
        std::fs::write(&path, view.to_ppm()).unwrap();
        println!("golden {}", path.display());
    }
}
