//! Corpus directories: one sub-directory per case holding `program.src`,
//! `tests.json`, `faults.json` and `expected.json`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::golden::{motivating_example, Expectations};
use super::programs::BASE_PROGRAMS;
use super::seed::{
    chain_ground_truth, generate_suite, seed_faults, Fault, FaultBundle, MutationKind,
};
use crate::error::{Error, Result};
use crate::minilang::{execute_suite, parse, DEFAULT_STEP_LIMIT};
use crate::spectrum::TestCase;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusCase {
    pub name: String,
    /// Text of `program.src`: the faulty program.
    pub source: String,
    pub bundle: FaultBundle,
    pub expected: Expectations,
}

#[derive(Debug, Serialize, Deserialize)]
struct FaultsFile {
    base_source: String,
    faults: Vec<Fault>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::json(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("corpus files serialize");
    s.push('\n');
    s
}

pub fn write_case(root: &Path, case: &CorpusCase) -> Result<PathBuf> {
    let dir = root.join(&case.name);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write(&dir.join("program.src"), &case.source)?;
    write(&dir.join("tests.json"), &to_json(&case.bundle.tests))?;
    write(
        &dir.join("faults.json"),
        &to_json(&FaultsFile {
            base_source: case.bundle.base.to_string(),
            faults: case.bundle.faults.clone(),
        }),
    )?;
    write(&dir.join("expected.json"), &to_json(&case.expected))?;
    Ok(dir)
}

pub fn load_case(dir: &Path) -> Result<CorpusCase> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| Error::Input(format!("`{}` is not a case directory", dir.display())))?;
    let source = read(&dir.join("program.src"))?;
    let faulty = parse(&source)?;
    let tests: Vec<TestCase> = read_json(&dir.join("tests.json"))?;
    let faults: FaultsFile = read_json(&dir.join("faults.json"))?;
    let base = parse(&faults.base_source)?;
    if base.len() != faulty.len() {
        return Err(Error::Input(format!(
            "case `{name}`: base and faulty programs differ in shape"
        )));
    }
    for f in &faults.faults {
        if base.index_of(&f.statement).is_none() {
            return Err(Error::UnknownStatement(f.statement.clone()));
        }
    }
    let expected_path = dir.join("expected.json");
    let expected = if expected_path.exists() {
        read_json(&expected_path)?
    } else {
        Expectations::default()
    };
    Ok(CorpusCase {
        bundle: FaultBundle {
            name: name.clone(),
            base,
            faulty,
            faults: faults.faults,
            tests,
        },
        name,
        source,
        expected,
    })
}

/// Case directories under `root` in name order, each with its load result.
pub fn load_corpus(root: &Path) -> Result<Vec<(String, Result<CorpusCase>)>> {
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs
        .into_iter()
        .map(|d| {
            let name = d
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            (name, load_case(&d))
        })
        .collect())
}

fn with_chain_truth(mut case: CorpusCase) -> Result<CorpusCase> {
    let executed = execute_suite(&case.bundle.faulty, &case.bundle.tests, DEFAULT_STEP_LIMIT)?;
    case.expected.chain_truth = chain_ground_truth(
        &case.bundle.faulty,
        &executed,
        &case.bundle.fault_statements(),
    )
    .into_iter()
    .collect();
    let order = case.bundle.faulty.ids();
    case.expected
        .chain_truth
        .sort_by_key(|s| order.iter().position(|o| o == s));
    Ok(case)
}

pub fn golden_case() -> Result<CorpusCase> {
    let g = motivating_example();
    let base = parse(&g.fixed_source)?;
    let faulty = parse(&g.source)?;
    with_chain_truth(CorpusCase {
        name: g.name.clone(),
        bundle: FaultBundle {
            name: g.name,
            base,
            faulty,
            faults: vec![Fault {
                statement: "S9".into(),
                kind: MutationKind::WrongVariable,
                original: "a".into(),
                mutated: "b".into(),
            }],
            tests: g.tests,
        },
        source: g.source,
        expected: g.expected,
    })
}

/// The golden case followed by one seeded case per base program, with 1 to
/// 3 faults and 50 to 200 tests each. Deterministic in `seed`.
pub fn generate_corpus(seed: u64) -> Result<Vec<CorpusCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = vec![golden_case()?];
    for (i, spec) in BASE_PROGRAMS.iter().enumerate() {
        let base = parse(spec.source)?;
        let size = rng.gen_range(50..=200);
        let faults = 1 + i % 3;
        let suite = generate_suite(spec, &base, size, &mut rng)?;
        let name = format!("seeded-{:02}-{}", i + 1, spec.name);
        let bundle = seed_faults(&name, &base, &suite, faults, &MutationKind::ALL, rng.gen())?;
        cases.push(with_chain_truth(CorpusCase {
            name,
            source: bundle.faulty.to_string(),
            bundle,
            expected: Expectations::default(),
        })?);
    }
    Ok(cases)
}

pub fn write_corpus(root: &Path, cases: &[CorpusCase]) -> Result<()> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    for c in cases {
        write_case(root, c)?;
    }
    Ok(())
}
