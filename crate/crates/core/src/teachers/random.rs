use super::{sample_without_replacement, ProposeContext, Teacher};
use crate::corpus::DocId;
use crate::error::Result;

/// Baseline: a uniform sample of `actual_step_size` unlabeled ids.
#[derive(Debug, Default, Clone, Copy)]
pub struct RandomTeacher;

impl Teacher for RandomTeacher {
    fn name(&self) -> &str {
        "random"
    }

    fn propose(&mut self, ctx: &mut ProposeContext<'_>) -> Result<Vec<DocId>> {
        Ok(sample_without_replacement(
            ctx.potential_ids,
            ctx.actual_step_size,
            ctx.rng,
        ))
    }
}
