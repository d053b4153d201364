use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use log::warn;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{AnnotatedDocument, DatasetSplit, DocId, Gold, Span, SplitName, TaskKind};
use crate::config::DataConfig;
use crate::error::{Error, Result};

/// The gold annotation of a raw record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawGold {
    Label(String),
    /// `(start, end, label)` in character offsets, end exclusive.
    Spans(Vec<(usize, usize, String)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: Option<u64>,
    pub text: String,
    pub gold: RawGold,
}

impl RawDocument {
    /// Parses one JSONL record. The span schema is always read from `labels`.
    pub fn from_json(value: &Value, text_field: &str, label_field: &str) -> Result<Self, String> {
        let obj = value.as_object().ok_or("record is not a JSON object")?;
        let text = obj
            .get(text_field)
            .ok_or_else(|| format!("missing `{text_field}` field"))?
            .as_str()
            .ok_or_else(|| format!("`{text_field}` must be a string"))?
            .to_string();
        if text.is_empty() {
            return Err(format!("`{text_field}` must not be empty"));
        }
        let id = match obj.get("id") {
            None | Some(Value::Null) => None,
            Some(v) => Some(v.as_u64().ok_or("`id` must be a non-negative integer")?),
        };

        let gold = match obj.get(label_field) {
            Some(Value::String(s)) => RawGold::Label(s.clone()),
            Some(Value::Array(_)) if label_field == "labels" => parse_spans(&obj["labels"], &text)?,
            Some(Value::Array(_)) => {
                return Err(format!("`{label_field}` holds a list; multi-label records are unsupported"))
            }
            Some(_) => return Err(format!("`{label_field}` must be a string")),
            None => match obj.get("labels") {
                Some(spans @ Value::Array(_)) => parse_spans(spans, &text)?,
                _ => {
                    return Err(format!(
                        "unknown schema: neither a `{label_field}` string nor a `labels` span list"
                    ))
                }
            },
        };
        Ok(Self { id, text, gold })
    }
}

fn parse_spans(value: &Value, text: &str) -> Result<RawGold, String> {
    let len = text.chars().count();
    let items = value.as_array().ok_or("`labels` must be a list")?;
    let mut spans = Vec::with_capacity(items.len());
    for item in items {
        let triple = item.as_array().filter(|t| t.len() == 3).ok_or("each span must be [start, end, label]")?;
        let start = triple[0].as_u64().ok_or("span start must be a non-negative integer")? as usize;
        let end = triple[1].as_u64().ok_or("span end must be a non-negative integer")? as usize;
        let label = triple[2].as_str().ok_or("span label must be a string")?;
        if !(start < end && end <= len) {
            return Err(format!(
                "span offsets [{start}, {end}) out of range for text of length {len}"
            ));
        }
        spans.push((start, end, label.to_string()));
    }
    Ok(RawGold::Spans(spans))
}

fn read_split(path: &Path, data: &DataConfig) -> Result<Vec<RawDocument>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let value: Value = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        docs.push(RawDocument::from_json(&value, &data.text_field, &data.label_field).map_err(malformed)?);
    }
    if docs.is_empty() {
        return Err(Error::Corpus(format!("empty split: {}", path.display())));
    }
    Ok(docs)
}

fn split_paths(raw_dir: &Path, data: &DataConfig) -> [(SplitName, PathBuf); 3] {
    [
        (SplitName::Train, raw_dir.join(&data.train_file)),
        (SplitName::Dev, raw_dir.join(&data.dev_file)),
        (SplitName::Test, raw_dir.join(&data.test_file)),
    ]
}

/// SHA-256 over the three raw split files, in train/dev/test order.
pub fn raw_digest(raw_dir: &Path, data: &DataConfig) -> Result<String> {
    let mut hasher = Sha256::new();
    for (name, path) in split_paths(raw_dir, data) {
        let mut file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(|e| Error::io(&path, e))?;
        hasher.update(name.as_str().as_bytes());
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Reads the raw JSONL splits and produces the id-assigned dataset.
///
/// Pre-assigned `id`s are kept only when every record has one, they cover
/// `0..N` exactly once, and train ids < dev ids < test ids; each split is then
/// ordered by id. Otherwise ids are reassigned sequentially with a warning.
pub fn convert_raw(raw_dir: &Path, data: &DataConfig) -> Result<DatasetSplit> {
    let mut raw = Vec::with_capacity(3);
    for (name, path) in split_paths(raw_dir, data) {
        raw.push((name, read_split(&path, data)?));
    }

    let all = || raw.iter().flat_map(|(_, docs)| docs.iter());
    let spans = all().filter(|d| matches!(d.gold, RawGold::Spans(_))).count();
    let total = all().count();
    let task = match spans {
        0 => TaskKind::Classification,
        n if n == total => TaskKind::SpanLabeling,
        _ => {
            return Err(Error::Corpus(
                "dataset mixes class-label and span records".to_string(),
            ))
        }
    };

    let mut labels: Vec<String> = Vec::new();
    let mut label_index: HashMap<String, u32> = HashMap::new();
    let mut intern = |name: &str| -> u32 {
        if let Some(&i) = label_index.get(name) {
            return i;
        }
        let i = labels.len() as u32;
        labels.push(name.to_string());
        label_index.insert(name.to_string(), i);
        i
    };

    let honored = preassigned_ids_usable(&raw);
    if !honored && all().any(|d| d.id.is_some()) {
        warn!("pre-assigned ids are not dense, unique and split-ordered; reassigning");
    }

    let mut next_id: DocId = 0;
    let mut out: Vec<Vec<AnnotatedDocument>> = Vec::with_capacity(3);
    for (_, docs) in &raw {
        let mut converted = Vec::with_capacity(docs.len());
        for d in docs {
            let gold = match &d.gold {
                RawGold::Label(l) => Gold::Class(intern(l)),
                RawGold::Spans(s) => Gold::Spans(
                    s.iter()
                        .map(|(start, end, l)| Span {
                            start: *start,
                            end: *end,
                            label: intern(l),
                        })
                        .collect(),
                ),
            };
            let id = if honored { d.id.unwrap() } else { next_id };
            next_id += 1;
            converted.push(AnnotatedDocument {
                id,
                text: d.text.clone(),
                gold,
            });
        }
        if honored {
            converted.sort_by_key(|d| d.id);
        }
        out.push(converted);
    }
    let test = out.pop().unwrap();
    let dev = out.pop().unwrap();
    let train = out.pop().unwrap();
    Ok(DatasetSplit {
        task,
        labels,
        train,
        dev,
        test,
    })
}

fn preassigned_ids_usable(raw: &[(SplitName, Vec<RawDocument>)]) -> bool {
    let mut offset = 0u64;
    let mut seen = HashSet::new();
    for (_, docs) in raw {
        let n = docs.len() as u64;
        for d in docs {
            match d.id {
                Some(id) if id >= offset && id < offset + n && seen.insert(id) => {}
                _ => return false,
            }
        }
        offset += n;
    }
    true
}
