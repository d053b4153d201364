//! Tokenization, n-gram vocabulary fitting and TF-IDF vectorization.
//!
//! Tokens are lowercased runs of alphanumeric codepoints; n-grams of order 2
//! and 3 join consecutive tokens with a single space. The idf is smoothed as
//! `1 + ln((1 + N) / (1 + df))` and every vector is L2-normalized.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Sparse vector with strictly increasing indices and no explicit zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds a vector from unsorted pairs; duplicate indices are summed and
    /// zeros dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc += w,
                _ => entries.push((i, w)),
            }
        }
        entries.retain(|&(_, w)| w != 0.0);
        Self { entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(i, &w)| (i as u32, w))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn norm_squared(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, w)| w * dense[i as usize])
            .sum()
    }

    /// Squared euclidean distance to a dense point, summed term by term.
    pub fn squared_distance_dense(&self, dense: &[f64], dense_norm_squared: f64) -> f64 {
        let mut d = dense_norm_squared;
        for &(i, w) in &self.entries {
            let c = dense[i as usize];
            d += (w - c) * (w - c) - c * c;
        }
        d.max(0.0)
    }

    pub fn max_index(&self) -> Option<u32> {
        self.entries.last().map(|&(i, _)| i)
    }
}

/// Lowercases, splits on non-alphanumeric codepoints and appends every
/// contiguous n-gram up to `ngram_order`, shorter orders first.
pub fn tokenize(text: &str, ngram_order: usize) -> Vec<String> {
    let unigrams: Vec<String> = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect();
    let mut out = unigrams.clone();
    for n in 2..=ngram_order {
        for window in unigrams.windows(n) {
            out.push(window.join(" "));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<u64>,
    index: HashMap<String, u32>,
    fitted_docs: u64,
    ngram_order: usize,
}

impl Vocabulary {
    /// Fits over `texts`, keeping at most `cap` terms ranked by document
    /// frequency (descending) then term (ascending). Indices follow that rank.
    pub fn fit<'a, I>(texts: I, ngram_order: usize, cap: Option<usize>) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        if cap == Some(0) {
            return Err(Error::validation("trainer.vocab_cap", "must be at least 1"));
        }
        if !(1..=3).contains(&ngram_order) {
            return Err(Error::validation("trainer.ngram_order", "must be 1, 2 or 3"));
        }
        let mut df: HashMap<String, u64> = HashMap::new();
        let mut n_docs = 0u64;
        for text in texts {
            n_docs += 1;
            let unique: HashSet<String> = tokenize(text, ngram_order).into_iter().collect();
            for t in unique {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        if n_docs == 0 {
            return Err(Error::Corpus("cannot fit a vocabulary on zero documents".into()));
        }
        let mut ranked: Vec<(String, u64)> = df.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if let Some(cap) = cap {
            ranked.truncate(cap);
        }
        Ok(Self::from_ranked(ranked, n_docs, ngram_order))
    }

    fn from_ranked(ranked: Vec<(String, u64)>, fitted_docs: u64, ngram_order: usize) -> Self {
        let index = ranked
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), i as u32))
            .collect();
        let (terms, doc_freq) = ranked.into_iter().unzip();
        Self {
            terms,
            doc_freq,
            index,
            fitted_docs,
            ngram_order,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn fitted_docs(&self) -> u64 {
        self.fitted_docs
    }

    pub fn ngram_order(&self) -> usize {
        self.ngram_order
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, term: &str) -> Option<u64> {
        self.index_of(term).map(|i| self.doc_freq[i as usize])
    }

    pub fn term(&self, index: u32) -> &str {
        &self.terms[index as usize]
    }

    pub fn idf(&self, index: u32) -> f64 {
        let n = self.fitted_docs as f64;
        let df = self.doc_freq[index as usize] as f64;
        1.0 + ((1.0 + n) / (1.0 + df)).ln()
    }

    /// L2-normalized tf-idf vector of `text`; out-of-vocabulary tokens are
    /// ignored and a text without known tokens maps to the empty vector.
    pub fn tfidf(&self, text: &str) -> SparseVector {
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        for tok in tokenize(text, self.ngram_order) {
            if let Some(i) = self.index_of(&tok) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        let mut entries: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(i, tf)| (i, tf as f64 * self.idf(i)))
            .collect();
        let norm = entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for e in &mut entries {
                e.1 /= norm;
            }
        }
        SparseVector::from_pairs(entries)
    }

    /// Text artifact: a header line, then `term<TAB>index<TAB>df` per term.
    pub fn to_artifact(&self) -> String {
        let mut out = format!("# docs={} ngram_order={}\n", self.fitted_docs, self.ngram_order);
        for (i, (t, df)) in self.terms.iter().zip(&self.doc_freq).enumerate() {
            writeln!(out, "{t}\t{i}\t{df}").unwrap();
        }
        out
    }

    pub fn from_artifact(text: &str) -> Result<Self> {
        let corrupt = |m: &str| Error::CorruptArtifact {
            name: "vocabulary".into(),
            message: m.to_string(),
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| corrupt("empty file"))?;
        let mut fitted_docs = None;
        let mut ngram_order = None;
        for part in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = part.strip_prefix("docs=") {
                fitted_docs = v.parse().ok();
            } else if let Some(v) = part.strip_prefix("ngram_order=") {
                ngram_order = v.parse().ok();
            }
        }
        let (fitted_docs, ngram_order) = fitted_docs
            .zip(ngram_order)
            .ok_or_else(|| corrupt("bad header"))?;
        let mut ranked = Vec::new();
        for (expected, line) in lines.enumerate() {
            let mut f = line.split('\t');
            let (t, i, df) = match (f.next(), f.next(), f.next(), f.next()) {
                (Some(t), Some(i), Some(df), None) => (t, i, df),
                _ => return Err(corrupt("bad term line")),
            };
            if i.parse::<usize>().ok() != Some(expected) {
                return Err(corrupt("indices are not dense"));
            }
            let df: u64 = df.parse().map_err(|_| corrupt("bad document frequency"))?;
            ranked.push((t.to_string(), df));
        }
        Ok(Self::from_ranked(ranked, fitted_docs, ngram_order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("It's good!", 1), vec!["it", "s", "good"]);
        assert_eq!(tokenize("a b", 2), vec!["a", "b", "a b"]);
        assert!(tokenize("", 1).is_empty());
        assert_eq!(tokenize("x y z", 3), vec!["x", "y", "z", "x y", "y z", "x y z"]);
        assert_eq!(tokenize("Ünïcode ÉTÉ", 1), vec!["ünïcode", "été"]);
    }

    #[test]
    fn vocabulary_document_frequencies_and_cap() {
        let v = Vocabulary::fit(["a b", "a"], 1, None).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.doc_freq("a"), Some(2));
        assert_eq!(v.doc_freq("b"), Some(1));
        let capped = Vocabulary::fit(["a b", "a"], 1, Some(1)).unwrap();
        assert_eq!(capped.len(), 1);
        assert_eq!(capped.index_of("a"), Some(0));
        assert!(capped.index_of("b").is_none());
        assert!(matches!(
            Vocabulary::fit(["a"], 1, Some(0)),
            Err(Error::Validation { .. })
        ));
        assert!(Vocabulary::fit(std::iter::empty::<&str>(), 1, None).is_err());
    }

    #[test]
    fn ties_break_lexicographically() {
        let v = Vocabulary::fit(["zeta alpha", "mid"], 1, Some(2)).unwrap();
        assert_eq!(v.term(0), "alpha");
        assert_eq!(v.term(1), "mid");
    }

    #[test]
    fn idf_of_term_in_every_doc_is_one() {
        let v = Vocabulary::fit(["a b", "a"], 1, None).unwrap();
        assert_eq!(v.idf(v.index_of("a").unwrap()), 1.0);
    }

    #[test]
    fn unknown_tokens_give_empty_vector() {
        let v = Vocabulary::fit(["a b", "a"], 1, None).unwrap();
        assert!(v.tfidf("zzz qqq").is_empty());
        assert!(v.tfidf("").is_empty());
    }

    /// Independent scalar recomputation over a 3-document corpus.
    #[test]
    fn tfidf_matches_scalar_recomputation() {
        let docs = ["the cat sat", "the dog sat down", "cat cat dog"];
        let v = Vocabulary::fit(docs, 1, None).unwrap();
        let n = 3.0_f64;
        let df = |t: &str| docs.iter().filter(|d| d.split(' ').any(|w| w == t)).count() as f64;
        for doc in docs {
            let words: Vec<&str> = doc.split(' ').collect();
            let mut uniq = words.clone();
            uniq.sort();
            uniq.dedup();
            let raw: Vec<(String, f64)> = uniq
                .iter()
                .map(|t| {
                    let tf = words.iter().filter(|w| *w == t).count() as f64;
                    (t.to_string(), tf * (1.0 + ((1.0 + n) / (1.0 + df(t))).ln()))
                })
                .collect();
            let norm = raw.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            let vec = v.tfidf(doc);
            assert_eq!(vec.nnz(), raw.len());
            for (t, w) in raw {
                let i = v.index_of(&t).unwrap();
                let got = vec.entries().iter().find(|e| e.0 == i).unwrap().1;
                assert!((got - w / norm).abs() < 1e-12, "{t}: {got} vs {}", w / norm);
            }
        }
        // "cat cat dog": tf(cat)=2, df(cat)=2, df(dog)=2
        let idf = 1.0 + (4.0_f64 / 3.0).ln();
        let (c, d) = (2.0 * idf, idf);
        let norm = (c * c + d * d).sqrt();
        let vec = v.tfidf("cat cat dog");
        let cat = vec.entries().iter().find(|e| e.0 == v.index_of("cat").unwrap()).unwrap().1;
        assert!((cat - c / norm).abs() < 1e-12);
    }

    #[test]
    fn artifact_round_trip() {
        let v = Vocabulary::fit(["a b c", "a b", "a"], 2, None).unwrap();
        let back = Vocabulary::from_artifact(&v.to_artifact()).unwrap();
        assert_eq!(v, back);
        assert!(Vocabulary::from_artifact("# docs=3 ngram_order=1\na\t1\t2\n").is_err());
    }

    #[test]
    fn sparse_distance_matches_dense() {
        let x = SparseVector::from_dense(&[0.0, 3.0, 0.0, 4.0]);
        let c = [1.0, 1.0, 2.0, 0.0];
        let cn: f64 = c.iter().map(|v| v * v).sum();
        let dense: f64 = [0.0, 3.0, 0.0, 4.0]
            .iter()
            .zip(&c)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        assert!((x.squared_distance_dense(&c, cn) - dense).abs() < 1e-12);
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["apple", "pear", "fig", "kiwi", "plum", "lime"]).prop_map(String::from)
    }

    proptest! {
        #[test]
        fn tfidf_norm_is_zero_or_one(words in prop::collection::vec(word(), 0..12)) {
            let corpus = ["apple pear", "fig kiwi pear", "plum"];
            let v = Vocabulary::fit(corpus, 1, None).unwrap();
            let vec = v.tfidf(&words.join(" "));
            let n = vec.norm_squared().sqrt();
            prop_assert!(n.abs() < 1e-12 || (n - 1.0).abs() < 1e-12);
            for w in vec.entries().windows(2) {
                prop_assert!(w[0].0 < w[1].0);
            }
        }

        #[test]
        fn tfidf_ignores_token_order(mut words in prop::collection::vec(word(), 1..12), seed in 0u64..1000) {
            let corpus = ["apple pear", "fig kiwi pear", "plum lime"];
            let v = Vocabulary::fit(corpus, 1, None).unwrap();
            let a = v.tfidf(&words.join(" "));
            let k = (seed as usize) % words.len();
            words.rotate_left(k);
            words.reverse();
            let b = v.tfidf(&words.join(" "));
            prop_assert_eq!(a.entries().len(), b.entries().len());
            for (x, y) in a.entries().iter().zip(b.entries()) {
                prop_assert_eq!(x.0, y.0);
                prop_assert!((x.1 - y.1).abs() < 1e-12);
            }
        }
    }
}
