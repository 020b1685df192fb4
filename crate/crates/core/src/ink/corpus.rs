//! Study corpus and its on-disk layout:
//! `<corpus>/<subject>/<set>/task<k>.ink`, with an optional
//! `<corpus>/<subject>/<set>/aux.tsv` sidecar per set.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{is_valid_subject_id, parse_task_file, serialize_task, SetId, TaskId, TaskRecord};
use crate::error::{Error, Result};
use crate::protocol::AuxRecord;

pub const AUX_FILE: &str = "aux.tsv";

/// Identity of one corpus cell. Orders by subject, then set, then task.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub subject: String,
    pub set: SetId,
    pub task: TaskId,
}

/// Cells absent for subjects that appear in the corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub missing: Vec<CellKey>,
}

impl GapReport {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyCorpus {
    records: BTreeMap<CellKey, TaskRecord>,
    aux: BTreeMap<(String, SetId), AuxRecord>,
}

impl StudyCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a record, refusing a second record for the same cell.
    pub fn insert(&mut self, record: TaskRecord) -> Result<()> {
        let key = record.key();
        if self.records.contains_key(&key) {
            return Err(Error::Duplicate {
                subject: key.subject,
                set: key.set,
                task: key.task,
            });
        }
        self.records.insert(key, record);
        Ok(())
    }

    pub fn insert_aux(&mut self, subject: impl Into<String>, set: SetId, aux: AuxRecord) {
        self.aux.insert((subject.into(), set), aux);
    }

    pub fn get(&self, subject: &str, set: SetId, task: TaskId) -> Option<&TaskRecord> {
        self.records.get(&CellKey {
            subject: subject.to_string(),
            set,
            task,
        })
    }

    pub fn aux(&self, subject: &str, set: SetId) -> Option<&AuxRecord> {
        self.aux.get(&(subject.to_string(), set))
    }

    pub fn aux_records(&self) -> impl Iterator<Item = (&str, SetId, &AuxRecord)> {
        self.aux.iter().map(|((s, set), a)| (s.as_str(), *set, a))
    }

    /// Records in (subject, set, task) order.
    pub fn records(&self) -> impl Iterator<Item = &TaskRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn subjects(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self
            .records
            .keys()
            .map(|k| k.subject.as_str())
            .chain(self.aux.keys().map(|(s, _)| s.as_str()))
            .collect();
        set.into_iter().collect()
    }

    pub fn gaps(&self) -> GapReport {
        let mut missing = Vec::new();
        for subject in self.subjects() {
            for set in SetId::ALL {
                for task in TaskId::all() {
                    if self.get(subject, set, task).is_none() {
                        missing.push(CellKey {
                            subject: subject.to_string(),
                            set,
                            task,
                        });
                    }
                }
            }
        }
        GapReport { missing }
    }
}

/// A problem found while validating a corpus directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.path.display(), line, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

enum Entry {
    Task {
        path: PathBuf,
        subject: String,
        set: SetId,
        task: TaskId,
    },
    Aux {
        path: PathBuf,
        subject: String,
        set: SetId,
    },
}

impl Entry {
    fn path(&self) -> &Path {
        match self {
            Entry::Task { path, .. } | Entry::Aux { path, .. } => path,
        }
    }
}

fn sorted_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Walks the layout, returning recognised files in lexicographic path order
/// and layout problems as diagnostics.
fn scan(root: &Path) -> Result<(Vec<Entry>, Vec<Diagnostic>)> {
    let mut entries = Vec::new();
    let mut problems = Vec::new();
    let mut problem = |path: &Path, message: String| {
        problems.push(Diagnostic {
            path: path.to_path_buf(),
            line: None,
            message,
        })
    };

    for subject_dir in sorted_dir(root)? {
        if !subject_dir.is_dir() {
            continue;
        }
        let subject = file_name(&subject_dir);
        if !is_valid_subject_id(&subject) {
            problem(&subject_dir, format!("invalid subject directory name {subject:?}"));
            continue;
        }
        for set_dir in sorted_dir(&subject_dir)? {
            if !set_dir.is_dir() {
                continue;
            }
            let Ok(set) = file_name(&set_dir).parse::<SetId>() else {
                problem(&set_dir, "set directory must be named S1..S5".to_string());
                continue;
            };
            for path in sorted_dir(&set_dir)? {
                let name = file_name(&path);
                if name == AUX_FILE {
                    entries.push(Entry::Aux {
                        path,
                        subject: subject.clone(),
                        set,
                    });
                } else if let Some(stem) = name.strip_suffix(".ink") {
                    match stem.strip_prefix("task").map(str::parse::<TaskId>) {
                        Some(Ok(task)) => entries.push(Entry::Task {
                            path,
                            subject: subject.clone(),
                            set,
                            task,
                        }),
                        _ => problem(&path, "task file must be named task1.ink..task9.ink".into()),
                    }
                }
            }
        }
    }
    Ok((entries, problems))
}

enum Parsed {
    Task(TaskRecord),
    Aux(String, SetId, AuxRecord),
}

fn read_entry(entry: &Entry) -> Result<Parsed> {
    let path = entry.path();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match entry {
        Entry::Task { subject, set, task, .. } => {
            let record = parse_task_file(&text).map_err(|e| Error::at(path, e))?;
            if record.subject_id != *subject || record.set != *set || record.task != *task {
                return Err(Error::at(
                    path,
                    Error::Layout(format!(
                        "header says subject={} set={} task={}, path says subject={} set={} task={}",
                        record.subject_id, record.set, record.task, subject, set, task
                    )),
                ));
            }
            Ok(Parsed::Task(record))
        }
        Entry::Aux { subject, set, .. } => {
            let aux = AuxRecord::parse_tsv(&text).map_err(|e| Error::at(path, e))?;
            Ok(Parsed::Aux(subject.clone(), *set, aux))
        }
    }
}

/// Loads every task file under `dir`. Files are parsed in parallel and
/// merged in path order, so the result does not depend on scheduling.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<(StudyCorpus, GapReport)> {
    let root = dir.as_ref();
    let (entries, problems) = scan(root)?;
    if let Some(first) = problems.into_iter().next() {
        return Err(Error::at(first.path, Error::Layout(first.message)));
    }
    let parsed: Vec<Result<Parsed>> = entries.par_iter().map(read_entry).collect();
    let mut corpus = StudyCorpus::new();
    for (entry, item) in entries.iter().zip(parsed) {
        match item? {
            Parsed::Task(record) => corpus.insert(record).map_err(|e| Error::at(entry.path(), e))?,
            Parsed::Aux(subject, set, aux) => corpus.insert_aux(subject, set, aux),
        }
    }
    let gaps = corpus.gaps();
    Ok((corpus, gaps))
}

/// Checks every file under `dir` and reports all problems instead of
/// stopping at the first one. Only an unreadable root is an `Err`.
pub fn validate_corpus(dir: impl AsRef<Path>) -> Result<Vec<Diagnostic>> {
    let (entries, mut diagnostics) = scan(dir.as_ref())?;
    let parsed: Vec<Result<Parsed>> = entries.par_iter().map(read_entry).collect();
    let mut corpus = StudyCorpus::new();
    for (entry, item) in entries.iter().zip(parsed) {
        let result = item.and_then(|p| match p {
            Parsed::Task(record) => corpus.insert(record),
            Parsed::Aux(..) => Ok(()),
        });
        if let Err(err) = result {
            let line = err.line();
            let inner = match err {
                Error::AtPath { error, .. } => *error,
                other => other,
            };
            // the diagnostic carries path and line itself
            let message = match inner {
                Error::Format { message, .. } => message,
                Error::ChannelRange { channel, value, .. } => {
                    format!("{channel} value {value} out of range")
                }
                other => other.to_string(),
            };
            diagnostics.push(Diagnostic {
                path: entry.path().to_path_buf(),
                line,
                message,
            });
        }
    }
    diagnostics.sort_by(|a, b| (&a.path, a.line).cmp(&(&b.path, b.line)));
    Ok(diagnostics)
}

/// Writes the corpus in the directory layout understood by [`load_corpus`].
pub fn write_corpus(corpus: &StudyCorpus, dir: impl AsRef<Path>) -> Result<()> {
    let root = dir.as_ref();
    let set_dir = |subject: &str, set: SetId| root.join(subject).join(set.as_str());
    for record in corpus.records() {
        let dir = set_dir(&record.subject_id, record.set);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join(format!("task{}.ink", record.task));
        fs::write(&path, serialize_task(record)).map_err(|e| Error::io(&path, e))?;
    }
    for (subject, set, aux) in corpus.aux_records() {
        let dir = set_dir(subject, set);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join(AUX_FILE);
        fs::write(&path, aux.to_tsv()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
