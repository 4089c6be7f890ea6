//! Reader for the subset of SMPS (CORE/TIME/STOCH) described in
//! `docs/smps-subset.md`: MPS core files, IMPLICIT two-period time files
//! and INDEP DISCRETE stochastic files.

mod assemble;
mod core;
mod stoch;
mod time;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::TwoStageProblem;

pub use self::assemble::assemble;
pub use self::core::{parse_core, CoreModel, Row, RowKind, RowRef};
pub use self::stoch::{parse_stoch, StochEntry, StochModel};
pub use self::time::{parse_time, PeriodSplit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmpsError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed section at line {line}: {message}")]
    MalformedSection { line: usize, message: String },
    #[error("duplicate name {0}")]
    DuplicateName(String),
    #[error("unknown row {0}")]
    UnknownRow(String),
    #[error("unknown name {0}")]
    UnknownName(String),
    #[error("the time file must split the model into exactly two non-empty periods")]
    NotTwoPeriods,
    #[error("probabilities for {0} do not sum to one")]
    ProbabilityNotSummingToOne(String),
    #[error("unsupported stochastic section type {0}")]
    UnsupportedStochType(String),
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
}

pub(crate) struct DataLine {
    pub line: usize,
    pub header: bool,
    pub tokens: Vec<String>,
    pub raw: String,
}

const KEYWORDS: &[&str] = &[
    "NAME",
    "ROWS",
    "COLUMNS",
    "RHS",
    "RANGES",
    "BOUNDS",
    "ENDATA",
    "OBJSENSE",
    "OBJSENS",
    "TIME",
    "PERIODS",
    "STOCH",
    "INDEP",
    "BLOCKS",
    "SCENARIOS",
    "NODES",
    "DISTRIB",
];

/// Non-blank, non-comment lines. A line is a section header when it starts
/// in column one and either begins with a known keyword or is a single
/// upper-case word.
pub(crate) fn data_lines(text: &str) -> Vec<DataLine> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            if raw.starts_with('*') {
                return None;
            }
            let tokens: Vec<String> = raw.split_whitespace().map(str::to_string).collect();
            if tokens.is_empty() {
                return None;
            }
            let first = &tokens[0];
            let at_margin = !raw.starts_with(char::is_whitespace);
            let header = at_margin
                && (KEYWORDS.contains(&first.to_ascii_uppercase().as_str())
                    || (tokens.len() == 1 && first.chars().all(|c| c.is_ascii_uppercase())));
            Some(DataLine { line: i + 1, header, tokens, raw: raw.to_string() })
        })
        .collect()
}

fn read(path: &Path) -> Result<String, SmpsError> {
    std::fs::read_to_string(path).map_err(|e| SmpsError::Io { path: path.to_path_buf(), message: e.to_string() })
}

/// Paths of the time and stoch files next to a core file: the same stem
/// with extension `.tim`/`.sto` (or `.time`/`.stoch`).
pub fn sibling_paths(core_path: &Path) -> (PathBuf, PathBuf) {
    let pick = |exts: &[&str]| {
        exts.iter().map(|e| core_path.with_extension(e)).find(|p| p.exists()).unwrap_or_else(|| core_path.with_extension(exts[0]))
    };
    (pick(&["tim", "time"]), pick(&["sto", "stoch"]))
}

/// Loads a CORE/TIME/STOCH triple.
pub fn load_triple(core_path: &Path, time_path: &Path, stoch_path: &Path) -> Result<TwoStageProblem, SmpsError> {
    let core = parse_core(&read(core_path)?)?;
    let split = parse_time(&read(time_path)?, &core)?;
    let stoch = parse_stoch(&read(stoch_path)?, &core, &split)?;
    assemble(&core, &split, &stoch)
}

/// Loads `<stem>.cor` together with its sibling time and stoch files.
pub fn load(core_path: &Path) -> Result<TwoStageProblem, SmpsError> {
    let (tim, sto) = sibling_paths(core_path);
    load_triple(core_path, &tim, &sto)
}
