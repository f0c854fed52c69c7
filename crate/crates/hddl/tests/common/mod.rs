//! Shared helpers for integration tests.

use std::fs;
use std::path::{Path, PathBuf};

#[allow(dead_code)]
pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

#[allow(dead_code)]
pub fn corpus_path(name: &str) -> PathBuf {
    corpus_dir().join(name)
}

#[allow(dead_code)]
pub fn read_corpus(name: &str) -> String {
    let path = corpus_path(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

/// All parseable corpus files (the `invalid/` subdirectory is excluded).
#[allow(dead_code)]
pub fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "hddl").unwrap_or(false))
        .collect();
    files.sort();
    files
}

#[allow(dead_code)]
pub fn is_problem_file(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .map(|n| n.ends_with(".problem.hddl"))
        .unwrap_or(false)
}

#[allow(dead_code)]
pub fn load_model(domain_file: &str, problem_file: &str) -> hddl::model::Model {
    let domain = hddl::syntax::parse_domain(domain_file, &read_corpus(domain_file)).expect("domain parses");
    let problem =
        hddl::syntax::parse_problem(problem_file, &read_corpus(problem_file)).expect("problem parses");
    let (model, diags) =
        hddl::model::analyze(&domain, &problem, &hddl::model::AnalyzeOptions::default());
    model.unwrap_or_else(|| {
        panic!(
            "analysis failed:\n{}",
            diags.iter().map(|d| d.render_text(false)).collect::<Vec<_>>().join("\n")
        )
    })
}
