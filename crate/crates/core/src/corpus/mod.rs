//! Dataset ingestion and annotation bookkeeping.
//!
//! Raw data is one JSONL file per split. Records carry `text` plus either a
//! class label (`"label": "neg"`) or character spans
//! (`"labels": [[0, 6, "LOC"]]`). Conversion assigns global ids densely in
//! corpus order (train, then dev, then test), so train ids are `0..|train|`.

mod binary;
mod convert;
mod state;

pub use binary::{read_converted, write_converted, write_label_sidecar, read_label_sidecar};
pub use convert::{convert_raw, raw_digest, RawDocument, RawGold};
pub use state::AnnotationState;

pub type DocId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Classification,
    SpanLabeling,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub label: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gold {
    Class(u32),
    Spans(Vec<Span>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub id: DocId,
    pub text: String,
    pub gold: Gold,
}

impl AnnotatedDocument {
    pub fn gold_label(&self) -> Option<u32> {
        match self.gold {
            Gold::Class(c) => Some(c),
            Gold::Spans(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitName {
    Train,
    Dev,
    Test,
}

impl SplitName {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub task: TaskKind,
    /// Label names in first-appearance order; class indices point here.
    pub labels: Vec<String>,
    pub train: Vec<AnnotatedDocument>,
    pub dev: Vec<AnnotatedDocument>,
    pub test: Vec<AnnotatedDocument>,
}

impl DatasetSplit {
    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn split(&self, name: SplitName) -> &[AnnotatedDocument] {
        match name {
            SplitName::Train => &self.train,
            SplitName::Dev => &self.dev,
            SplitName::Test => &self.test,
        }
    }

    /// Train document by global id (train ids are dense from zero).
    pub fn train_doc(&self, id: DocId) -> Option<&AnnotatedDocument> {
        self.train.get(usize::try_from(id).ok()?).filter(|d| d.id == id)
    }

    pub fn train_ids(&self) -> Vec<DocId> {
        self.train.iter().map(|d| d.id).collect()
    }

    pub fn require_classification(&self) -> crate::Result<()> {
        match self.task {
            TaskKind::Classification => Ok(()),
            TaskKind::SpanLabeling => Err(crate::Error::SpanTaskUnsupported),
        }
    }
}
