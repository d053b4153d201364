//! Synthetic corpora with known structure, written as JSONL splits.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};

/// Two-class corpus without label noise. An easy document draws its keywords
/// from a handful of frequent, redundant class keywords; a hard document draws
/// them from a large set of rare ones. Any token is replaced by a distractor
/// shared by both classes with probability `distractor_rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedKeywords {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
    pub easy_fraction: f64,
    pub easy_keywords: usize,
    pub hard_keywords: usize,
    pub distractors: usize,
    pub distractor_rate: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub seed: u64,
}

impl Default for PlantedKeywords {
    fn default() -> Self {
        Self {
            train: 2000,
            dev: 500,
            test: 500,
            easy_fraction: 0.6,
            easy_keywords: 5,
            hard_keywords: 5000,
            distractors: 300,
            distractor_rate: 0.2,
            min_tokens: 3,
            max_tokens: 6,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDoc {
    pub text: String,
    pub label: String,
}

pub const CLASS_NAMES: [&str; 2] = ["pos", "neg"];

impl PlantedKeywords {
    fn document(&self, rng: &mut ChaCha8Rng) -> SynthDoc {
        let class = rng.gen_range(0..2usize);
        let easy = rng.gen::<f64>() < self.easy_fraction;
        let len = rng.gen_range(self.min_tokens..=self.max_tokens);
        let words: Vec<String> = (0..len)
            .map(|i| {
                // the first token is always a keyword
                if i > 0 && rng.gen::<f64>() < self.distractor_rate {
                    format!("filler{}", rng.gen_range(0..self.distractors))
                } else if easy {
                    format!("{}common{}", CLASS_NAMES[class], rng.gen_range(0..self.easy_keywords))
                } else {
                    format!("{}rare{}", CLASS_NAMES[class], rng.gen_range(0..self.hard_keywords))
                }
            })
            .collect();
        SynthDoc {
            text: words.join(" "),
            label: CLASS_NAMES[class].to_string(),
        }
    }

    /// Train, dev and test documents.
    pub fn generate(&self) -> [Vec<SynthDoc>; 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        [self.train, self.dev, self.test].map(|n| (0..n).map(|_| self.document(&mut rng)).collect())
    }
}

/// `clusters` groups of documents over pairwise disjoint vocabularies. The
/// label of each document is its cluster index.
pub fn disjoint_vocabulary_clusters(
    clusters: usize,
    docs_per_cluster: usize,
    vocabulary: usize,
    tokens_per_doc: usize,
    seed: u64,
) -> Vec<(String, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(clusters * docs_per_cluster);
    for c in 0..clusters {
        for _ in 0..docs_per_cluster {
            let words: Vec<String> = (0..tokens_per_doc)
                .map(|_| format!("c{c}w{}", rng.gen_range(0..vocabulary)))
                .collect();
            out.push((words.join(" "), c));
        }
    }
    out
}

fn write_jsonl(path: &Path, docs: &[SynthDoc]) -> Result<()> {
    let mut text = String::new();
    for d in docs {
        text.push_str(&json!({"text": d.text, "label": d.label}).to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `train.jsonl`, `dev.jsonl` and `test.jsonl` into `dir`.
pub fn write_splits(dir: &Path, splits: &[Vec<SynthDoc>; 3]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, docs) in ["train.jsonl", "dev.jsonl", "test.jsonl"].iter().zip(splits) {
        write_jsonl(&dir.join(name), docs)?;
    }
    Ok(())
}
