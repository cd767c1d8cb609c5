//! Sample-set loading and validation, plus Wavefront OBJ interop.
//!
//! A corpus directory holds one subdirectory per sample:
//!
//! ```text
//! corpus/<id>/prompt.txt      object description, fully parameterized
//! corpus/<id>/solution.shape  canonical ShapeScript program
//! corpus/<id>/meta.json       {"id", "category", "delta"?, "notes"?}
//! ```
//!
//! Every sample is validated on load: the canonical program must parse,
//! evaluate within default limits, produce geometry, and pass the
//! equivalence test against itself with Chamfer distance below 1e-9.

use crate::geom::Vec3;
use crate::geomtest::{evaluate_pair, Delta, MatchConfig, Verdict};
use crate::meshgen::{assemble, extract_vertices, PointCloud, TessellationDefaults, TriMesh};
use crate::shapescript::{evaluate, parse, ExecLimits};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;
use thiserror::Error;

pub const CATEGORIES: [&str; 4] = ["furniture", "toy", "decorative", "other"];

/// One benchmark sample: a prompt and its canonical modeling program.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub category: String,
    pub prompt: String,
    pub canonical_program: String,
    /// Per-sample delta override from meta.json, if any.
    pub delta_override: Option<Delta>,
    pub notes: Option<String>,
}

impl Sample {
    /// The match configuration for this sample: the base config with the
    /// sample's delta override applied.
    pub fn match_config(&self, base: &MatchConfig) -> MatchConfig {
        match self.delta_override {
            Some(delta) => MatchConfig { delta, ..*base },
            None => *base,
        }
    }

    /// Evaluates the canonical program to its vertex cloud.
    pub fn truth_cloud(
        &self,
        limits: &ExecLimits,
        defaults: &TessellationDefaults,
    ) -> Result<PointCloud, String> {
        program_to_cloud(&self.canonical_program, limits, defaults)
    }
}

/// Parse, execute, assemble, and extract vertices for a program source.
pub fn program_to_cloud(
    source: &str,
    limits: &ExecLimits,
    defaults: &TessellationDefaults,
) -> Result<PointCloud, String> {
    let program = parse(source).map_err(|e| e.to_string())?;
    let instances = evaluate(&program, limits).map_err(|e| e.to_string())?;
    let mesh = assemble(&instances, defaults).map_err(|e| e.to_string())?;
    Ok(extract_vertices(&mesh))
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CorpusError {
    #[error("sample `{sample}`: format error: {message}")]
    Format { sample: String, message: String },
    #[error("sample `{sample}`: validation error: {message}")]
    Validation { sample: String, message: String },
}

impl CorpusError {
    fn format(sample: impl Into<String>, message: impl Into<String>) -> Self {
        CorpusError::Format {
            sample: sample.into(),
            message: message.into(),
        }
    }

    fn validation(sample: impl Into<String>, message: impl Into<String>) -> Self {
        CorpusError::Validation {
            sample: sample.into(),
            message: message.into(),
        }
    }
}

/// meta.json schema. Unknown fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaFile {
    id: String,
    category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<Delta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
}

/// Loads and validates every sample under `path`, in id order.
pub fn load_corpus(path: &Path) -> Result<Vec<Sample>, CorpusError> {
    let entries = fs::read_dir(path).map_err(|e| {
        CorpusError::format(
            "",
            format!("cannot read corpus directory {}: {e}", path.display()),
        )
    })?;
    let mut dirs: Vec<_> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.path())
        .collect();
    dirs.sort();

    let mut samples = Vec::new();
    for dir in dirs {
        let sample_name = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        samples.push(load_sample(&dir, &sample_name)?);
    }
    samples.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(samples)
}

fn load_sample(dir: &Path, sample_name: &str) -> Result<Sample, CorpusError> {
    let read = |file: &str| -> Result<String, CorpusError> {
        fs::read_to_string(dir.join(file)).map_err(|e| {
            CorpusError::format(sample_name, format!("missing or unreadable {file}: {e}"))
        })
    };
    let prompt = read("prompt.txt")?;
    let solution = read("solution.shape")?;
    let meta_text = read("meta.json")?;
    let meta: MetaFile = serde_json::from_str(&meta_text)
        .map_err(|e| CorpusError::format(sample_name, format!("bad meta.json: {e}")))?;

    if meta.id != sample_name {
        return Err(CorpusError::format(
            sample_name,
            format!("meta.json id `{}` does not match directory name", meta.id),
        ));
    }
    if !CATEGORIES.contains(&meta.category.as_str()) {
        return Err(CorpusError::format(
            sample_name,
            format!(
                "category `{}` is not one of {:?}",
                meta.category, CATEGORIES
            ),
        ));
    }
    if let Some(Delta::Absolute(d) | Delta::Relative(d)) = meta.delta {
        if !(d.is_finite() && d > 0.0) {
            return Err(CorpusError::format(
                sample_name,
                format!("delta must be positive and finite, got {d}"),
            ));
        }
    }

    let sample = Sample {
        id: meta.id,
        category: meta.category,
        prompt,
        canonical_program: solution,
        delta_override: meta.delta,
        notes: meta.notes,
    };
    validate_sample(&sample)?;
    Ok(sample)
}

/// The canonical self-test: the solution must execute and pass against
/// itself with Chamfer below 1e-9.
fn validate_sample(sample: &Sample) -> Result<(), CorpusError> {
    let cloud = sample
        .truth_cloud(&ExecLimits::default(), &TessellationDefaults::default())
        .map_err(|e| CorpusError::validation(&sample.id, e))?;
    let cfg = sample.match_config(&MatchConfig::default());
    let outcome = evaluate_pair(&cloud, &cloud, &cfg)
        .map_err(|e| CorpusError::validation(&sample.id, e.to_string()))?;
    if outcome.verdict != Verdict::Pass || outcome.chamfer >= 1e-9 {
        return Err(CorpusError::validation(
            &sample.id,
            format!(
                "canonical program fails its own test: verdict {:?}, chamfer {}",
                outcome.verdict, outcome.chamfer
            ),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Wavefront OBJ subset: `v` and triangular `f` records.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ObjError {
    #[error("OBJ line {line}: {message}")]
    Format { line: usize, message: String },
}

impl ObjError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ObjError::Format {
            line,
            message: message.into(),
        }
    }
}

/// Serializes a mesh as OBJ text. Coordinates use the shortest decimal form
/// that round-trips f64 exactly, so import recovers them bit for bit.
pub fn export_obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        out.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
    }
    for t in &mesh.triangles {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    out
}

/// Parses the OBJ subset: `v` records (3 coordinates, optional w ignored)
/// and triangular `f` records with positive 1-based indices. Normal, UV,
/// material, and grouping records are ignored.
pub fn import_obj(text: &str) -> Result<TriMesh, ObjError> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<([u64; 3], usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let keyword = parts.next().unwrap();
        match keyword {
            "v" => {
                let coords: Vec<&str> = parts.collect();
                if coords.len() < 3 || coords.len() > 4 {
                    return Err(ObjError::at(
                        line_no,
                        format!("`v` takes 3 coordinates, got {}", coords.len()),
                    ));
                }
                let mut xyz = [0.0f64; 3];
                for (k, c) in coords.iter().take(3).enumerate() {
                    xyz[k] = c
                        .parse()
                        .map_err(|_| ObjError::at(line_no, format!("invalid coordinate `{c}`")))?;
                    if !xyz[k].is_finite() {
                        return Err(ObjError::at(line_no, "non-finite coordinate"));
                    }
                }
                vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
            }
            "f" => {
                let refs: Vec<&str> = parts.collect();
                if refs.len() != 3 {
                    return Err(ObjError::at(
                        line_no,
                        format!("face must be triangular, got {} vertices", refs.len()),
                    ));
                }
                let mut tri = [0u64; 3];
                for (k, r) in refs.iter().enumerate() {
                    let vertex_ref = r.split('/').next().unwrap_or("");
                    if vertex_ref.starts_with('-') {
                        return Err(ObjError::at(line_no, "negative indices are not supported"));
                    }
                    let ix: u64 = vertex_ref.parse().map_err(|_| {
                        ObjError::at(line_no, format!("invalid vertex index `{r}`"))
                    })?;
                    if ix == 0 {
                        return Err(ObjError::at(line_no, "OBJ indices are 1-based"));
                    }
                    tri[k] = ix;
                }
                faces.push((tri, line_no));
            }
            // Ignored records: normals, texture coords, materials, groups.
            _ => {}
        }
    }

    let n = vertices.len() as u64;
    let mut triangles = Vec::with_capacity(faces.len());
    for (tri, line_no) in faces {
        for &ix in &tri {
            if ix > n {
                return Err(ObjError::at(
                    line_no,
                    format!("vertex index {ix} out of range (have {n} vertices)"),
                ));
            }
        }
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(ObjError::at(line_no, "face repeats a vertex index"));
        }
        triangles.push([
            (tri[0] - 1) as u32,
            (tri[1] - 1) as u32,
            (tri[2] - 1) as u32,
        ]);
    }

    Ok(TriMesh {
        vertices,
        triangles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen::tessellate;
    use crate::shapescript::{PrimitiveInstance, ShapeParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_cuboid_mesh() -> TriMesh {
        let inst = PrimitiveInstance {
            shape: ShapeParams::Cuboid { size: Vec3::ONE },
            location: Vec3::ZERO,
            rotation: Vec3::ZERO,
            scale: Vec3::ONE,
        };
        tessellate(&inst, &TessellationDefaults::default()).unwrap()
    }

    fn workspace_corpus() -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
    }

    #[test]
    fn builtin_corpus_loads_with_enough_coverage() {
        let samples = load_corpus(&workspace_corpus()).unwrap();
        assert!(samples.len() >= 12, "only {} samples", samples.len());
        let categories: std::collections::BTreeSet<&str> =
            samples.iter().map(|s| s.category.as_str()).collect();
        assert!(categories.len() >= 3, "categories: {categories:?}");
        // Sorted by id.
        for pair in samples.windows(2) {
            assert!(pair[0].id < pair[1].id);
        }
    }

    #[test]
    fn every_builtin_sample_passes_its_own_test() {
        // load_corpus validates internally; spell the invariant out anyway.
        let samples = load_corpus(&workspace_corpus()).unwrap();
        for sample in &samples {
            let cloud = sample
                .truth_cloud(&ExecLimits::default(), &TessellationDefaults::default())
                .unwrap();
            let outcome = evaluate_pair(
                &cloud,
                &cloud,
                &sample.match_config(&MatchConfig::default()),
            )
            .unwrap();
            assert_eq!(outcome.verdict, Verdict::Pass, "sample {}", sample.id);
            assert!(outcome.chamfer < 1e-9, "sample {}", sample.id);
        }
    }

    #[test]
    fn builtin_samples_have_stable_principal_axes() {
        // No sample may have an exactly degenerate covariance spectrum;
        // otherwise PCA orientation is undefined under rigid motion.
        let samples = load_corpus(&workspace_corpus()).unwrap();
        for sample in &samples {
            let cloud = sample
                .truth_cloud(&ExecLimits::default(), &TessellationDefaults::default())
                .unwrap();
            let norm = crate::geomtest::normalize(&cloud).unwrap();
            let [l1, l2, l3] = norm.eigenvalues;
            let min_gap = (l1 - l2).min(l2 - l3) / l1;
            assert!(
                min_gap > 1e-4,
                "sample {} has near-degenerate spectrum: {:?}",
                sample.id,
                norm.eigenvalues
            );
        }
    }

    #[test]
    fn missing_solution_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let sample_dir = dir.path().join("broken-sample");
        fs::create_dir(&sample_dir).unwrap();
        fs::write(sample_dir.join("prompt.txt"), "a cube").unwrap();
        fs::write(
            sample_dir.join("meta.json"),
            r#"{"id": "broken-sample", "category": "other"}"#,
        )
        .unwrap();
        let err = load_corpus(dir.path()).unwrap_err();
        match err {
            CorpusError::Format { sample, message } => {
                assert_eq!(sample, "broken-sample");
                assert!(message.contains("solution.shape"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn failing_canonical_program_is_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let sample_dir = dir.path().join("bad-solution");
        fs::create_dir(&sample_dir).unwrap();
        fs::write(sample_dir.join("prompt.txt"), "an impossible object").unwrap();
        fs::write(sample_dir.join("solution.shape"), "cuboid(size=(1,1,1));").unwrap();
        fs::write(
            sample_dir.join("meta.json"),
            r#"{"id": "bad-solution", "category": "other"}"#,
        )
        .unwrap();
        let err = load_corpus(dir.path()).unwrap_err();
        assert!(matches!(err, CorpusError::Validation { .. }), "{err:?}");
    }

    #[test]
    fn meta_mismatch_and_unknown_fields_are_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let sample_dir = dir.path().join("sample-a");
        fs::create_dir(&sample_dir).unwrap();
        fs::write(sample_dir.join("prompt.txt"), "x").unwrap();
        fs::write(
            sample_dir.join("solution.shape"),
            "cuboid(size=(2,1,0.5), at=(0,0,0));",
        )
        .unwrap();
        fs::write(
            sample_dir.join("meta.json"),
            r#"{"id": "other-name", "category": "other"}"#,
        )
        .unwrap();
        assert!(matches!(
            load_corpus(dir.path()),
            Err(CorpusError::Format { .. })
        ));

        fs::write(
            sample_dir.join("meta.json"),
            r#"{"id": "sample-a", "category": "other", "surprise": 1}"#,
        )
        .unwrap();
        assert!(matches!(
            load_corpus(dir.path()),
            Err(CorpusError::Format { .. })
        ));
    }

    #[test]
    fn delta_override_is_honored() {
        let dir = tempfile::tempdir().unwrap();
        let sample_dir = dir.path().join("tight");
        fs::create_dir(&sample_dir).unwrap();
        fs::write(sample_dir.join("prompt.txt"), "x").unwrap();
        fs::write(
            sample_dir.join("solution.shape"),
            "cuboid(size=(2,1,0.5), at=(0,0,0));",
        )
        .unwrap();
        fs::write(
            sample_dir.join("meta.json"),
            r#"{"id": "tight", "category": "other", "delta": {"absolute": 0.002}}"#,
        )
        .unwrap();
        let samples = load_corpus(dir.path()).unwrap();
        assert_eq!(samples[0].delta_override, Some(Delta::Absolute(0.002)));
        let cfg = samples[0].match_config(&MatchConfig::default());
        assert_eq!(cfg.delta, Delta::Absolute(0.002));
    }

    // ── OBJ ─────────────────────────────────────────────────────

    #[test]
    fn unit_cuboid_exports_8_vertices_12_faces_and_round_trips() {
        let mesh = unit_cuboid_mesh();
        let text = export_obj(&mesh);
        let v_lines = text.lines().filter(|l| l.starts_with("v ")).count();
        let f_lines = text.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(v_lines, 8);
        assert_eq!(f_lines, 12);
        let back = import_obj(&text).unwrap();
        assert_eq!(back, mesh);
    }

    #[test]
    fn quad_face_is_format_error() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let err = import_obj(text).unwrap_err();
        assert!(err.to_string().contains("triangular"));
    }

    #[test]
    fn import_rejects_bad_indices() {
        let base = "v 0 0 0\nv 1 0 0\nv 0 1 0\n";
        assert!(import_obj(&format!("{base}f 1 2 4\n"))
            .unwrap_err()
            .to_string()
            .contains("out of range"));
        assert!(import_obj(&format!("{base}f 1 2 -1\n"))
            .unwrap_err()
            .to_string()
            .contains("negative"));
        assert!(import_obj(&format!("{base}f 0 1 2\n"))
            .unwrap_err()
            .to_string()
            .contains("1-based"));
        assert!(import_obj(&format!("{base}f 1 1 2\n"))
            .unwrap_err()
            .to_string()
            .contains("repeats"));
    }

    #[test]
    fn import_ignores_non_geometry_records() {
        let text = "\
# exported by an external modeling tool
mtllib scene.mtl
o cuboid
v 0 0 0
v 1 0 0
v 0 1 0
vn 0 0 1
vt 0.5 0.5
usemtl gray
s off
f 1/1/1 2/1/1 3/1/1
";
        let mesh = import_obj(text).unwrap();
        assert_eq!(mesh.vertices.len(), 3);
        assert_eq!(mesh.triangles, vec![[0, 1, 2]]);
    }

    #[test]
    fn obj_round_trip_is_lossless_for_random_meshes() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let n = rng.gen_range(3..60);
            let vertices: Vec<Vec3> = (0..n)
                .map(|_| {
                    Vec3::new(
                        rng.gen_range(-100.0..100.0),
                        rng.gen_range(-1e-3..1e-3),
                        rng.gen_range(-1e6..1e6),
                    )
                })
                .collect();
            let triangles: Vec<[u32; 3]> = (0..rng.gen_range(1..40))
                .map(|_| loop {
                    let a = rng.gen_range(0..n) as u32;
                    let b = rng.gen_range(0..n) as u32;
                    let c = rng.gen_range(0..n) as u32;
                    if a != b && b != c && a != c {
                        return [a, b, c];
                    }
                })
                .collect();
            let mesh = TriMesh {
                vertices,
                triangles,
            };
            let back = import_obj(&export_obj(&mesh)).unwrap();
            assert_eq!(back.triangles, mesh.triangles);
            for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
                // Shortest round-trip printing gives exact recovery, which
                // subsumes the 9-significant-digit contract.
                assert_eq!(a.x.to_bits(), b.x.to_bits());
                assert_eq!(a.y.to_bits(), b.y.to_bits());
                assert_eq!(a.z.to_bits(), b.z.to_bits());
            }
        }
    }

    #[test]
    fn external_obj_cuboid_passes_against_dsl_cuboid() {
        let text = std::fs::read_to_string(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/external_cuboid.obj"),
        )
        .unwrap();
        let external = import_obj(&text).unwrap();
        external.validate().unwrap();
        let external_cloud = extract_vertices(&external);
        let dsl_cloud = program_to_cloud(
            "cuboid(size=(2,1,0.5), at=(0,0,0));",
            &ExecLimits::default(),
            &TessellationDefaults::default(),
        )
        .unwrap();
        let outcome = evaluate_pair(&external_cloud, &dsl_cloud, &MatchConfig::default()).unwrap();
        assert_eq!(outcome.verdict, Verdict::Pass);
    }
}
