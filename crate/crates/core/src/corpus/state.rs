use std::collections::{BTreeSet, HashSet};

use super::DocId;
use crate::error::{Error, Result};

/// Partition of the train pool into labeled ids (in proposal order) and the
/// remaining unlabeled ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationState {
    labeled: Vec<DocId>,
    unlabeled: BTreeSet<DocId>,
}

impl AnnotationState {
    pub fn new(pool: impl IntoIterator<Item = DocId>) -> Self {
        Self {
            labeled: Vec::new(),
            unlabeled: pool.into_iter().collect(),
        }
    }

    pub fn labeled(&self) -> &[DocId] {
        &self.labeled
    }

    pub fn unlabeled(&self) -> &BTreeSet<DocId> {
        &self.unlabeled
    }

    /// Unlabeled ids in ascending order.
    pub fn potential_ids(&self) -> Vec<DocId> {
        self.unlabeled.iter().copied().collect()
    }

    pub fn remaining(&self) -> usize {
        self.unlabeled.len()
    }

    pub fn is_exhausted(&self) -> bool {
        self.unlabeled.is_empty()
    }

    /// Moves `ids` to the labeled list, appending in the given order. The
    /// whole batch is checked before anything changes.
    pub fn mark_labeled(&mut self, ids: &[DocId]) -> Result<()> {
        let mut seen = HashSet::with_capacity(ids.len());
        let labeled: HashSet<DocId> = self.labeled.iter().copied().collect();
        for &id in ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateId(id));
            }
            if !self.unlabeled.contains(&id) {
                return Err(if labeled.contains(&id) {
                    Error::AlreadyLabeled(id)
                } else {
                    Error::UnknownId(id)
                });
            }
        }
        for &id in ids {
            self.unlabeled.remove(&id);
            self.labeled.push(id);
        }
        Ok(())
    }
}
