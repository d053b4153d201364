//! Converted corpus format.
//!
//! ```text
//! "ALSIMCV1" | u8 task | u64 n_train | u64 n_dev | u64 n_test
//! per document: u32 body_len | body
//! body: u64 id | u32 text_len | text (UTF-8) | gold
//! gold: class -> u32 label
//!       spans -> u32 n | n x (u64 start | u64 end | u32 label)
//! ```
//!
//! All integers little-endian. Label names live in a JSON-lines sidecar, one
//! JSON string per line in index order.

use super::{AnnotatedDocument, DatasetSplit, Gold, Span, TaskKind};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"ALSIMCV1";

pub fn write_converted(split: &DatasetSplit) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(match split.task {
        TaskKind::Classification => 0,
        TaskKind::SpanLabeling => 1,
    });
    for part in [&split.train, &split.dev, &split.test] {
        out.extend_from_slice(&(part.len() as u64).to_le_bytes());
    }
    for doc in split.train.iter().chain(&split.dev).chain(&split.test) {
        let body = encode_doc(doc);
        out.extend_from_slice(&(body.len() as u32).to_le_bytes());
        out.extend_from_slice(&body);
    }
    out
}

fn encode_doc(doc: &AnnotatedDocument) -> Vec<u8> {
    let mut b = Vec::with_capacity(doc.text.len() + 16);
    b.extend_from_slice(&doc.id.to_le_bytes());
    b.extend_from_slice(&(doc.text.len() as u32).to_le_bytes());
    b.extend_from_slice(doc.text.as_bytes());
    match &doc.gold {
        Gold::Class(c) => b.extend_from_slice(&c.to_le_bytes()),
        Gold::Spans(spans) => {
            b.extend_from_slice(&(spans.len() as u32).to_le_bytes());
            for s in spans {
                b.extend_from_slice(&(s.start as u64).to_le_bytes());
                b.extend_from_slice(&(s.end as u64).to_le_bytes());
                b.extend_from_slice(&s.label.to_le_bytes());
            }
        }
    }
    b
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| corrupt("truncated"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn corrupt(message: &str) -> Error {
    Error::CorruptArtifact {
        name: "converted corpus".into(),
        message: message.to_string(),
    }
}

pub fn read_converted(bytes: &[u8], labels: Vec<String>) -> Result<DatasetSplit> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let task = match r.take(1)?[0] {
        0 => TaskKind::Classification,
        1 => TaskKind::SpanLabeling,
        _ => return Err(corrupt("unknown task byte")),
    };
    let counts = [r.u64()?, r.u64()?, r.u64()?];
    let mut parts: Vec<Vec<AnnotatedDocument>> = Vec::with_capacity(3);
    for count in counts {
        let mut docs = Vec::new();
        for _ in 0..count {
            let len = r.u32()? as usize;
            let mut body = Reader { buf: r.take(len)?, pos: 0 };
            let id = body.u64()?;
            let text_len = body.u32()? as usize;
            let text = std::str::from_utf8(body.take(text_len)?)
                .map_err(|_| corrupt("text is not UTF-8"))?
                .to_string();
            let gold = match task {
                TaskKind::Classification => Gold::Class(body.u32()?),
                TaskKind::SpanLabeling => {
                    let n = body.u32()?;
                    let mut spans = Vec::new();
                    for _ in 0..n {
                        spans.push(Span {
                            start: body.u64()? as usize,
                            end: body.u64()? as usize,
                            label: body.u32()?,
                        });
                    }
                    Gold::Spans(spans)
                }
            };
            if body.pos != body.buf.len() {
                return Err(corrupt("trailing bytes in record"));
            }
            let max_label = match &gold {
                Gold::Class(c) => Some(*c),
                Gold::Spans(s) => s.iter().map(|s| s.label).max(),
            };
            if max_label.is_some_and(|l| l as usize >= labels.len()) {
                return Err(corrupt("label index out of range"));
            }
            docs.push(AnnotatedDocument { id, text, gold });
        }
        parts.push(docs);
    }
    if r.pos != bytes.len() {
        return Err(corrupt("trailing bytes"));
    }
    let test = parts.pop().unwrap();
    let dev = parts.pop().unwrap();
    let train = parts.pop().unwrap();
    Ok(DatasetSplit {
        task,
        labels,
        train,
        dev,
        test,
    })
}

pub fn write_label_sidecar(labels: &[String]) -> String {
    labels
        .iter()
        .map(|l| serde_json::to_string(l).expect("string serializes") + "\n")
        .collect()
}

pub fn read_label_sidecar(text: &str) -> Result<Vec<String>> {
    text.lines()
        .map(|l| serde_json::from_str::<String>(l).map_err(|e| corrupt(&format!("label sidecar: {e}"))))
        .collect()
}
