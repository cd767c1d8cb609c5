//! Shared helpers for CLI integration and acceptance tests.

// Each test target compiles this module separately and uses a subset.
#![allow(dead_code)]

use shapebench_core::genclient::{GenRequest, GenResponse, MockProvider, Provider, ProviderError};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Mutex;

/// Repository root (two levels up from the cli crate).
pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root exists")
}

pub fn corpus_dir() -> PathBuf {
    workspace_root().join("corpus")
}

pub fn fixtures_dir() -> PathBuf {
    workspace_root().join("fixtures")
}

/// Runs the shapebench binary from the workspace root.
pub fn shapebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapebench"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

pub fn exit_code(output: &Output) -> i32 {
    output.status.code().unwrap_or(-1)
}

pub fn stdout_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

pub fn stderr_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Mock provider that seeds missing fixture files from a script, used only
/// by the explicit regeneration test. Delegating to the real MockProvider
/// keeps the recorded fixtures exactly what normal runs will read.
pub struct SeedingProvider {
    inner: MockProvider,
    script: Mutex<Vec<String>>,
}

impl SeedingProvider {
    pub fn new(dir: impl Into<PathBuf>, script: Vec<String>) -> SeedingProvider {
        SeedingProvider {
            inner: MockProvider::new(dir),
            script: Mutex::new(script),
        }
    }
}

impl Provider for SeedingProvider {
    fn generate(&self, request: &GenRequest) -> Result<GenResponse, ProviderError> {
        match self.inner.generate(request) {
            Err(ProviderError::FixtureMissing { path, .. }) => {
                let mut script = self.script.lock().unwrap();
                assert!(!script.is_empty(), "seeding script exhausted for {path:?}");
                std::fs::write(&path, script.remove(0)).expect("fixture write");
                self.inner.generate(request)
            }
            other => other,
        }
    }

    fn supports_images(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "seeding-mock"
    }
}

pub fn fenced(program: &str) -> String {
    format!("Here is the program.\n```\n{}\n```\n", program.trim_end())
}
