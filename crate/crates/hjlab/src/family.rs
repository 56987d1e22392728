//! Shifted families: a color class of a rule, intersected with left-quotient
//! shifts by finite prefix sets.
//!
//! For a set E of constant words and a finite prefix set F, the shift E_F is
//! {z : wz ∈ E for every w ∈ F}. Membership in the accumulated family
//! E ∩ E_{F_0} ∩ (E ∩ E_{F_0})_{F_1} ∩ ... expands into plain rule
//! evaluations: z belongs iff c(uz) hits the selected class for every u in
//! the closure {∅} ∪ {products of one element from each subset of the F-list
//! in order}.

use thiserror::Error;

use crate::rule::{ColoringRule, RuleError};
use crate::word::Word;

#[derive(Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("class {class} out of range for a rule with {colors} colors")]
    ClassOutOfRange { class: u32, colors: u32 },
    #[error("prefix sets must be nonempty")]
    EmptyPrefixSet,
    #[error("prefix sets contain constant words only")]
    VariableInPrefixSet,
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// One color class of a rule, shifted by a list of prefix sets.
#[derive(Debug, Clone)]
pub struct ShiftedFamily {
    rule: ColoringRule,
    class: u32,
    prefix_sets: Vec<Vec<Word>>,
}

impl ShiftedFamily {
    /// The unshifted family: color class `class` of `rule`.
    pub fn class_of(rule: ColoringRule, class: u32) -> Result<ShiftedFamily, FamilyError> {
        if class >= rule.color_count() {
            return Err(FamilyError::ClassOutOfRange { class, colors: rule.color_count() });
        }
        Ok(ShiftedFamily { rule, class, prefix_sets: Vec::new() })
    }

    pub fn rule(&self) -> &ColoringRule {
        &self.rule
    }

    pub fn class(&self) -> u32 {
        self.class
    }

    /// The family G ∩ G_F for this family G: everything still in G whose
    /// every F-prefixed extension is in G too.
    pub fn shift(&self, prefix_set: &[Word]) -> Result<ShiftedFamily, FamilyError> {
        if prefix_set.is_empty() {
            return Err(FamilyError::EmptyPrefixSet);
        }
        if prefix_set.iter().any(|w| !w.is_constant()) {
            return Err(FamilyError::VariableInPrefixSet);
        }
        let mut shifted = self.clone();
        shifted.prefix_sets.push(prefix_set.to_vec());
        Ok(shifted)
    }

    /// Every membership test of z reduces to rule evaluations of uz over
    /// these context words. The list always starts with the empty word and
    /// enumerates subsets of the prefix-set list in subset-mask order,
    /// choices within a subset in odometer order.
    pub fn contexts(&self) -> Vec<Word> {
        let mut out = Vec::new();
        for mask in 0..1usize << self.prefix_sets.len() {
            let chosen: Vec<&Vec<Word>> = self
                .prefix_sets
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, f)| f)
                .collect();
            let mut choice = vec![0usize; chosen.len()];
            loop {
                let product: Vec<&Word> =
                    choice.iter().zip(&chosen).map(|(&c, f)| &f[c]).collect();
                out.push(Word::concat(product));
                let mut slot = chosen.len();
                loop {
                    if slot == 0 {
                        break;
                    }
                    slot -= 1;
                    choice[slot] += 1;
                    if choice[slot] < chosen[slot].len() {
                        break;
                    }
                    choice[slot] = 0;
                }
                if choice.iter().all(|&c| c == 0) {
                    break;
                }
            }
        }
        out
    }

    /// True iff z lies in the family; total up to rule errors (a table rule
    /// can run past its bound on a shifted word).
    pub fn contains(&self, z: &Word) -> Result<bool, RuleError> {
        for u in self.contexts() {
            if self.rule.color(&u.append(z))? != self.class {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
