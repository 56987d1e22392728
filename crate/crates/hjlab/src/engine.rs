//! The constructive engines: monochromatic-word search over shifted
//! families, depth-bounded largeness refutation, the avoiding-sequence
//! builder, and the certificate pipeline.
//!
//! Everything here runs against an eventually-periodic ambient sequence
//! (canonically (x, x, ...)) to finite depth with explicit budgets. Positive
//! results are always re-validated before they are returned: mono words by
//! independent re-substitution, avoiding sequences by span disjointness, and
//! certificates by the verifier in [`crate::cert`].

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cert::{self, Certificate, Verdict};
use crate::extract::{self, AmbientSeq, BlockWitness, ExtractError, ExtractGrading};
use crate::family::{FamilyError, ShiftedFamily};
use crate::hj::{self, HjError};
use crate::rule::{ColoringRule, RuleError};
use crate::span::{self, Grading, SpanError};
use crate::word::{Letter, Letters, Symbol, VariableWord, Word};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("depth and budgets must be at least 1")]
    BadParameters,
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Span(#[from] SpanError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Hj(#[from] HjError),
}

/// Caps for the incremental searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Most ambient items a single search step may consume.
    pub max_block: usize,
    /// Longest candidate word considered.
    pub max_word_len: usize,
}

/// Where an exhausted search stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frontier {
    pub blocks_scanned: usize,
    pub candidates_tried: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonoOutcome {
    /// A word in the variable span of the ambient prefix of length m+1 whose
    /// every substitution lands in the family.
    Found { m: usize, word: VariableWord },
    Exhausted { frontier: Frontier },
}

fn mono_ok(
    family: &ShiftedFamily,
    w: &VariableWord,
    subs: &[Letter],
) -> Result<bool, RuleError> {
    for &a in subs {
        if !family.contains(&w.substitute(Symbol::Letter(a)))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The search core shared by the public op and the certificate pipeline:
/// substitutions come from `subs`, span fillers are staged by ambient
/// position starting at `span_base` (the pipeline probes tails, where the
/// two stages differ).
fn mono_search(
    family: &ShiftedFamily,
    ambient: &AmbientSeq,
    subs: &[Letter],
    letters: &Letters,
    span_base: usize,
    budget: SearchBudget,
) -> Result<MonoOutcome, EngineError> {
    let grading = Grading::for_letters(letters, span_base);
    let mut seen: BTreeSet<VariableWord> = BTreeSet::new();
    let mut tried = 0usize;
    for m in 0..budget.max_block {
        let window = ambient.window(m + 1);
        for w in span::variable_span(&window, &grading)? {
            if w.len() > budget.max_word_len || !seen.insert(w.clone()) {
                continue;
            }
            tried += 1;
            if mono_ok(family, &w, subs)? {
                // independent re-substitution before returning
                for &a in subs {
                    assert!(
                        family.contains(&w.substitute(Symbol::Letter(a)))?,
                        "mono word must survive re-substitution"
                    );
                }
                return Ok(MonoOutcome::Found { m, word: w });
            }
        }
    }
    Ok(MonoOutcome::Exhausted {
        frontier: Frontier {
            blocks_scanned: budget.max_block,
            candidates_tried: tried,
        },
    })
}

/// Finds a variable word in the ambient's span whose every substitution by a
/// letter of stage `grade` lands in the family. Search order: increasing
/// ambient prefix length m, then canonical word order among the new
/// candidates.
pub fn find_mono_word(
    family: &ShiftedFamily,
    ambient: &AmbientSeq,
    letters: &Letters,
    grade: usize,
    budget: SearchBudget,
) -> Result<MonoOutcome, EngineError> {
    if budget.max_block == 0 || budget.max_word_len == 0 {
        return Err(EngineError::BadParameters);
    }
    mono_search(family, ambient, letters.stage_letters(grade), letters, grade, budget)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefuteOutcome {
    /// An extracted sequence whose graded constant span misses the family:
    /// finite evidence against largeness.
    Witness {
        words: Vec<VariableWord>,
        cuts: BlockWitness,
    },
    /// Exhaustive search at these bounds found none. Within a length bound
    /// this is evidence only, not a proof of largeness.
    NoWitness { depth: usize, max_len: usize },
}

/// Scans every extracted sequence of the given depth (items of length at
/// most `max_len`, canonical order) for one whose constant span is disjoint
/// from the family.
pub fn refute_large(
    family: &ShiftedFamily,
    ambient: &AmbientSeq,
    depth: usize,
    max_len: usize,
    letters: &Letters,
    grade: usize,
) -> Result<RefuteOutcome, EngineError> {
    if depth == 0 || max_len == 0 {
        return Err(EngineError::BadParameters);
    }
    let extraction = ExtractGrading::for_letters(letters, grade);
    let span_grading = Grading::for_letters(letters, grade);
    for candidate in extract::enumerate_extracted(ambient, depth, max_len, &extraction)? {
        let mut disjoint = true;
        for z in span::constant_span(&candidate, &span_grading)? {
            if family.contains(&z)? {
                disjoint = false;
                break;
            }
        }
        if disjoint {
            let cuts = extract::check_extracted(&candidate, ambient, &extraction, None)?
                .expect("enumerated sequences extract from the ambient");
            return Ok(RefuteOutcome::Witness { words: candidate, cuts });
        }
    }
    Ok(RefuteOutcome::NoWitness { depth, max_len })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AvoidOutcome {
    /// A depth-d extracted sequence whose constant span lies in the
    /// family's complement; doubles as a refutation witness.
    Avoiding {
        words: Vec<VariableWord>,
        cuts: BlockWitness,
    },
    /// The step at which every block length within budget failed.
    FailedAt(usize),
}

/// The constant word of one cube point: block items substituted by the
/// letters named by the point's base-p digits, most significant first.
fn cube_point_word(window: &[VariableWord], letters: &[Letter], point: usize) -> Word {
    let p = letters.len();
    let mut digits = vec![0usize; window.len()];
    let mut rest = point;
    for slot in (0..window.len()).rev() {
        digits[slot] = rest % p;
        rest /= p;
    }
    let parts: Vec<Word> = window
        .iter()
        .zip(&digits)
        .map(|(item, &d)| item.substitute(Symbol::Letter(letters[d])))
        .collect();
    Word::concat(&parts)
}

/// Maps a line generator over cube letter ids back to a block word: variable
/// slots keep x, letter slots substitute the named stage letter.
fn instantiate_generator(
    window: &[VariableWord],
    generator: &VariableWord,
    letters: &[Letter],
) -> VariableWord {
    let parts: Vec<Word> = window
        .iter()
        .zip(generator.word().symbols())
        .map(|(item, g)| {
            let filler = match g {
                Symbol::Variable => Symbol::Variable,
                Symbol::Letter(Letter(d)) => Symbol::Letter(letters[*d as usize]),
            };
            item.substitute(filler)
        })
        .collect();
    VariableWord::new(Word::concat(&parts)).expect("line generators have a variable slot")
}

/// Builds an avoiding sequence step by step: at step n the contexts are
/// {∅} ∪ the constant span of the words chosen so far; the next block's
/// constant products are trace-colored over those contexts, and a
/// combinatorial line whose points all trace to "outside the family in every
/// context" names the next word. Block lengths grow until the budget dies.
pub fn build_avoiding(
    family: &ShiftedFamily,
    ambient: &AmbientSeq,
    depth: usize,
    letters: &Letters,
    grade: usize,
    budget: SearchBudget,
) -> Result<AvoidOutcome, EngineError> {
    if depth == 0 || budget.max_block == 0 || budget.max_word_len == 0 {
        return Err(EngineError::BadParameters);
    }
    let mut words: Vec<VariableWord> = Vec::new();
    let mut cuts = vec![0usize];
    let mut start = 0usize;
    'steps: for n in 0..depth {
        let mut contexts = vec![Word::empty()];
        if !words.is_empty() {
            contexts.extend(span::constant_span(&words, &Grading::for_letters(letters, grade))?);
        }
        let step_letters = letters.stage_letters(grade + n).to_vec();
        let p = step_letters.len();
        let all_outside = vec![false; contexts.len()];
        for block in 1..=budget.max_block {
            let window = ambient.tail(start).window(block);
            let total: usize = window.iter().map(|w| w.len()).sum();
            if total > budget.max_word_len {
                break;
            }
            let num_points = p.pow(block as u32);
            let point_words: Vec<Word> = (0..num_points)
                .map(|i| cube_point_word(&window, &step_letters, i))
                .collect();
            let patterns =
                hj::trace_coloring(&contexts, |w| family.contains(w), &point_words)?;
            // dense cube colors; the all-outside pattern is pinned to 0
            let mut ids: BTreeMap<Vec<bool>, u32> = BTreeMap::new();
            ids.insert(all_outside.clone(), 0);
            let colors: Vec<u32> = point_words
                .iter()
                .map(|w| {
                    let next = ids.len() as u32;
                    *ids.entry(patterns[w].clone()).or_insert(next)
                })
                .collect();
            let cube = hj::CubeColoring::new(p, block, ids.len(), colors)?;
            if let Some(generator) = hj::find_line_colored(&cube, 0) {
                let w = instantiate_generator(&window, &generator, &step_letters);
                // the line promised every context stays outside; hold it to that
                for &a in &step_letters {
                    let point = w.substitute(Symbol::Letter(a));
                    for u in &contexts {
                        assert!(
                            !family.contains(&u.append(&point))?,
                            "accepted line must avoid the family in every context"
                        );
                    }
                }
                words.push(w);
                start += block;
                cuts.push(start);
                continue 'steps;
            }
        }
        return Ok(AvoidOutcome::FailedAt(n));
    }
    for z in span::constant_span(&words, &Grading::for_letters(letters, grade))? {
        assert!(
            !family.contains(&z)?,
            "avoiding span must be disjoint from the family"
        );
    }
    Ok(AvoidOutcome::Avoiding { words, cuts: BlockWitness { cuts } })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Greedy: shift the family by the span of the words so far and ask the
    /// mono-word finder for the next one; restart with doubled budgets.
    Baumgartner,
    /// Plain backtracking over canonical variable words, validating the
    /// certificate predicate directly.
    Dfs,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Strategy, String> {
        match s {
            "baumgartner" => Ok(Strategy::Baumgartner),
            "dfs" => Ok(Strategy::Dfs),
            other => Err(format!("unknown strategy {other:?} (expected baumgartner or dfs)")),
        }
    }
}

/// Per-step bookkeeping of a pipeline run: the grade each word's
/// substitutions were checked at, the ambient position its block starts at,
/// and the size of the accumulated prefix family. The recorded invariant:
/// positions dominate grades.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EngineTrace {
    pub grades: Vec<usize>,
    pub positions: Vec<usize>,
    pub prefix_family_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlsonReport {
    pub certificate: Certificate,
    pub trace: EngineTrace,
}

/// How far one class got before its budget died.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassFrontier {
    pub class: u32,
    pub max_len_cap: usize,
    pub steps_completed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CarlsonOutcome {
    Done(CarlsonReport),
    Exhausted { per_class: Vec<ClassFrontier> },
}

/// The family E_class ∩ E_{F} for F = the graded constant span of `chosen`.
fn shifted_by_span(
    family0: &ShiftedFamily,
    letters: &Letters,
    chosen: &[VariableWord],
) -> Result<ShiftedFamily, EngineError> {
    if chosen.is_empty() {
        return Ok(family0.clone());
    }
    let f: Vec<Word> = span::constant_span(chosen, &Grading::for_letters(letters, 0))?
        .into_iter()
        .collect();
    Ok(family0.shift(&f)?)
}

enum Attempt {
    Done { words: Vec<VariableWord>, cuts: Vec<usize> },
    Stuck { step: usize },
}

fn baumgartner_attempt(
    family0: &ShiftedFamily,
    letters: &Letters,
    ambient: &AmbientSeq,
    depth: usize,
    cap: usize,
) -> Result<Attempt, EngineError> {
    let mut words = Vec::new();
    let mut cuts = vec![0usize];
    let mut start = 0usize;
    for n in 0..depth {
        let family = shifted_by_span(family0, letters, &words)?;
        let tail = ambient.tail(start);
        let budget = SearchBudget { max_block: cap, max_word_len: cap };
        match mono_search(&family, &tail, letters.stage_letters(n), letters, start, budget)? {
            MonoOutcome::Found { m, word } => {
                words.push(word);
                start += m + 1;
                cuts.push(start);
            }
            MonoOutcome::Exhausted { .. } => return Ok(Attempt::Stuck { step: n }),
        }
    }
    Ok(Attempt::Done { words, cuts })
}

fn dfs_attempt(
    family0: &ShiftedFamily,
    letters: &Letters,
    ambient: &AmbientSeq,
    depth: usize,
    cap: usize,
) -> Result<Attempt, EngineError> {
    let mut words = Vec::new();
    let mut cuts = vec![0usize];
    let mut deepest = 0usize;
    if dfs_step(family0, letters, ambient, depth, cap, &mut words, &mut cuts, &mut deepest)? {
        Ok(Attempt::Done { words, cuts })
    } else {
        Ok(Attempt::Stuck { step: deepest })
    }
}

#[allow(clippy::too_many_arguments)]
fn dfs_step(
    family0: &ShiftedFamily,
    letters: &Letters,
    ambient: &AmbientSeq,
    depth: usize,
    cap: usize,
    words: &mut Vec<VariableWord>,
    cuts: &mut Vec<usize>,
    deepest: &mut usize,
) -> Result<bool, EngineError> {
    if words.len() == depth {
        return Ok(true);
    }
    let n = words.len();
    *deepest = (*deepest).max(n);
    let start = *cuts.last().expect("cuts start at 0");
    let family = shifted_by_span(family0, letters, words)?;
    let subs = letters.stage_letters(n).to_vec();
    let tail = ambient.tail(start);
    let grading = Grading::for_letters(letters, start);
    let mut seen: BTreeSet<VariableWord> = BTreeSet::new();
    for block in 1..=cap {
        let window = tail.window(block);
        for w in span::variable_span(&window, &grading)? {
            if w.len() > cap || !seen.insert(w.clone()) {
                continue;
            }
            if mono_ok(&family, &w, &subs)? {
                words.push(w);
                cuts.push(start + block);
                if dfs_step(family0, letters, ambient, depth, cap, words, cuts, deepest)? {
                    return Ok(true);
                }
                words.pop();
                cuts.pop();
            }
        }
    }
    Ok(false)
}

fn trace_for(
    words: &[VariableWord],
    cuts: &[usize],
    letters: &Letters,
) -> Result<EngineTrace, EngineError> {
    let mut trace = EngineTrace::default();
    for n in 0..words.len() {
        trace.grades.push(n);
        trace.positions.push(cuts[n]);
        assert!(cuts[n] >= n, "block positions must dominate grades");
        let size = span::constant_span(&words[..=n], &Grading::for_letters(letters, 0))?.len();
        trace.prefix_family_sizes.push(size);
    }
    Ok(trace)
}

/// Searches for a certificate of the given depth: a sequence of variable
/// words extracted from (x, x, ...) all of whose staged products share one
/// color. Classes are tried round-robin in index order under geometrically
/// growing budget caps, so the least class that succeeds at a budget level
/// wins regardless of scheduling.
pub fn carlson_run(
    rule: &ColoringRule,
    letters: &Letters,
    depth: usize,
    max_len: usize,
    strategy: Strategy,
) -> Result<CarlsonOutcome, EngineError> {
    if depth == 0 || max_len == 0 {
        return Err(EngineError::BadParameters);
    }
    let ambient = AmbientSeq::all_variables();
    let classes = rule.color_count();
    let mut caps = Vec::new();
    let mut cap = 2usize.min(max_len);
    loop {
        caps.push(cap);
        if cap >= max_len {
            break;
        }
        cap = (cap * 2).min(max_len);
    }
    let mut per_class: Vec<ClassFrontier> = (0..classes)
        .map(|class| ClassFrontier { class, max_len_cap: 0, steps_completed: 0 })
        .collect();
    for &cap in &caps {
        for class in 0..classes {
            let family0 = ShiftedFamily::class_of(rule.clone(), class)?;
            let attempt = match strategy {
                Strategy::Baumgartner => {
                    baumgartner_attempt(&family0, letters, &ambient, depth, cap)?
                }
                Strategy::Dfs => dfs_attempt(&family0, letters, &ambient, depth, cap)?,
            };
            match attempt {
                Attempt::Done { words, cuts } => {
                    let trace = trace_for(&words, &cuts, letters)?;
                    let certificate = Certificate {
                        letters: letters.clone(),
                        rule: rule.clone(),
                        depth,
                        color: class,
                        words,
                        blocks: Some(BlockWitness { cuts }),
                    };
                    // never emit an unverified certificate
                    match cert::verify_certificate(&certificate) {
                        Ok(Verdict::Pass { .. }) => {}
                        other => {
                            panic!("pipeline produced an unverifiable certificate: {other:?}")
                        }
                    }
                    return Ok(CarlsonOutcome::Done(CarlsonReport { certificate, trace }));
                }
                Attempt::Stuck { step } => {
                    let frontier = &mut per_class[class as usize];
                    frontier.max_len_cap = cap;
                    frontier.steps_completed = frontier.steps_completed.max(step);
                }
            }
        }
    }
    Ok(CarlsonOutcome::Exhausted { per_class })
}
