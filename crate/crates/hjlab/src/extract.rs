//! Extracted subsequences of ambient variable-word sequences.
//!
//! A finite sequence t = (t_0, ..., t_l) *extracts* from an ambient sequence
//! s when the ambient can be cut into gapless blocks 0 = m_0 < m_1 < ... <
//! m_{l+1} with each t_i in the variable span of its block (s_n for m_i ≤ n <
//! m_{i+1}). In the graded variant the span of every block draws its letters
//! from chain stage (base + n) for ambient position n.
//!
//! Ambient sequences are represented as eventually periodic (a finite prefix
//! followed by a repeating period), which makes every decision procedure here
//! total: any extractable candidate has a witness whose last cut is below a
//! bound computable from the candidate's total length, the prefix, the period
//! and the chain (see [`derived_bound`]).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::span::{self, Grading, SpanError};
use crate::word::{Alphabet, AlphabetChain, Letters, Symbol, VariableWord, Word, WordError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("candidate sequence must be nonempty")]
    EmptyCandidate,
    #[error("period must be nonempty")]
    EmptyPeriod,
    #[error("depth and max_len must both be at least 1")]
    InvalidBounds,
    #[error("no witness within the overridden search bound {overridden} (derived bound {derived})")]
    SearchBoundExceeded { overridden: usize, derived: usize },
    #[error("inner grade {inner} exceeds outer grade {outer}")]
    IncompatibleGrades { inner: usize, outer: usize },
    #[error("inner witness cut {cut} exceeds the {covered} items covered by the outer witness")]
    IncompatibleWitnesses { cut: usize, covered: usize },
    #[error("ambient text must be \"prefix: <words> / period: <words>\" or \"period: <words>\"")]
    BadAmbientFormat,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Span(#[from] SpanError),
}

/// An eventually periodic infinite sequence of variable words: a finite
/// prefix, then a nonempty period repeated forever. The canonical ambient
/// (x, x, x, ...) is `prefix: (empty) / period: ("x")`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbientSeq {
    prefix: Vec<VariableWord>,
    period: Vec<VariableWord>,
}

impl AmbientSeq {
    pub fn new(prefix: Vec<VariableWord>, period: Vec<VariableWord>) -> Result<Self, ExtractError> {
        if period.is_empty() {
            return Err(ExtractError::EmptyPeriod);
        }
        Ok(AmbientSeq { prefix, period })
    }

    /// The ambient (x, x, x, ...), the starting point of every pipeline run.
    pub fn all_variables() -> Self {
        let x = VariableWord::new(Word::from_symbols(vec![Symbol::Variable]))
            .expect("\"x\" is a variable word");
        AmbientSeq { prefix: Vec::new(), period: vec![x] }
    }

    /// Parses `"prefix: a x ; x b / period: x"`; the prefix part may be
    /// omitted (`"period: x"`).
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self, ExtractError> {
        let mut prefix = None;
        let mut period = None;
        for part in text.split('/') {
            let part = part.trim();
            if let Some(rest) = part.strip_prefix("prefix:") {
                if prefix.replace(parse_seq(rest, alphabet)?).is_some() {
                    return Err(ExtractError::BadAmbientFormat);
                }
            } else if let Some(rest) = part.strip_prefix("period:") {
                if period.replace(parse_seq(rest, alphabet)?).is_some() {
                    return Err(ExtractError::BadAmbientFormat);
                }
            } else {
                return Err(ExtractError::BadAmbientFormat);
            }
        }
        let Some(period) = period else {
            return Err(ExtractError::BadAmbientFormat);
        };
        AmbientSeq::new(prefix.unwrap_or_default(), period)
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        let period = render_seq(&self.period, alphabet);
        if self.prefix.is_empty() {
            format!("period: {period}")
        } else {
            format!("prefix: {} / period: {period}", render_seq(&self.prefix, alphabet))
        }
    }

    pub fn item(&self, n: usize) -> &VariableWord {
        if n < self.prefix.len() {
            &self.prefix[n]
        } else {
            &self.period[(n - self.prefix.len()) % self.period.len()]
        }
    }

    /// The first `len` items, materialized.
    pub fn window(&self, len: usize) -> Vec<VariableWord> {
        (0..len).map(|n| self.item(n).clone()).collect()
    }

    /// The ambient with its first `n` items dropped.
    pub fn tail(&self, n: usize) -> AmbientSeq {
        if n <= self.prefix.len() {
            AmbientSeq {
                prefix: self.prefix[n..].to_vec(),
                period: self.period.clone(),
            }
        } else {
            let r = (n - self.prefix.len()) % self.period.len();
            let mut period = self.period[r..].to_vec();
            period.extend_from_slice(&self.period[..r]);
            AmbientSeq { prefix: Vec::new(), period }
        }
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }
}

fn parse_seq(text: &str, alphabet: &Alphabet) -> Result<Vec<VariableWord>, ExtractError> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| VariableWord::parse(s, alphabet).map_err(ExtractError::from))
        .collect()
}

pub(crate) fn render_seq(seq: &[VariableWord], alphabet: &Alphabet) -> String {
    let parts: Vec<String> = seq.iter().map(|w| w.render(alphabet)).collect();
    parts.join(" ; ")
}

/// The gapless block cuts 0 = m_0 < m_1 < ... < m_{l+1} of an extraction
/// witness: candidate item i was built inside ambient block [m_i, m_{i+1}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockWitness {
    pub cuts: Vec<usize>,
}

impl BlockWitness {
    /// The witness (0, 1, ..., depth) — every sequence extracts from itself
    /// with unit blocks.
    pub fn unit(depth: usize) -> Self {
        BlockWitness { cuts: (0..=depth).collect() }
    }

    /// Shape check: starts at 0, strictly increasing, one block per item.
    pub fn well_formed(&self, depth: usize) -> bool {
        self.cuts.len() == depth + 1
            && self.cuts.first() == Some(&0)
            && self.cuts.windows(2).all(|w| w[0] < w[1])
    }
}

/// Which letters the span of an ambient block admits.
#[derive(Debug, Clone, Copy)]
pub enum ExtractGrading<'a> {
    /// Every ambient position admits every letter.
    Ungraded(&'a Alphabet),
    /// Ambient position n admits the letters of chain stage (base + n).
    Graded {
        chain: &'a AlphabetChain,
        base: usize,
    },
}

impl<'a> ExtractGrading<'a> {
    /// Ungraded for a plain alphabet, staged by ambient position from `base`
    /// for a chain.
    pub fn for_letters(letters: &'a Letters, base: usize) -> ExtractGrading<'a> {
        match letters {
            Letters::Plain(a) => ExtractGrading::Ungraded(a),
            Letters::Chain(c) => ExtractGrading::Graded { chain: c, base },
        }
    }

    /// The span grading for a block starting at `block_start`: slot j of the
    /// block is ambient position block_start + j.
    fn block_grading(&self, block_start: usize) -> Grading<'a> {
        match self {
            ExtractGrading::Ungraded(a) => Grading::Uniform(a),
            ExtractGrading::Graded { chain, base } => Grading::ByIndex {
                chain,
                base: base + block_start,
            },
        }
    }

    fn stage_slack(&self) -> usize {
        match self {
            ExtractGrading::Ungraded(_) => 0,
            ExtractGrading::Graded { chain, .. } => chain.num_stages(),
        }
    }

    fn position_letters(&self, n: usize) -> &'a [crate::word::Letter] {
        match self {
            ExtractGrading::Ungraded(a) => a.letters(),
            ExtractGrading::Graded { chain, base } => chain.stage_letters(base + n),
        }
    }
}

/// An upper bound on the last cut of a witness, when any witness exists.
///
/// Any witness can be shifted left greedily: each used ambient item is
/// re-selected at the earliest position after its predecessor where the item
/// value recurs (within one period once past the prefix) and, in the graded
/// case, where the forced filler's stage has been reached (chains are
/// nondecreasing, so this is a fixed threshold below the stage count). A
/// candidate of total symbol length T uses at most T ambient items, so the
/// shifted witness ends at or below prefix + stages + T·period + 1.
pub fn derived_bound(total_len: usize, ambient: &AmbientSeq, grading: &ExtractGrading) -> usize {
    ambient.prefix_len() + grading.stage_slack() + total_len * ambient.period_len() + 1
}

fn total_len(t: &[VariableWord]) -> usize {
    t.iter().map(VariableWord::len).sum()
}

/// Greedy least-cuts search. Feasibility of a block end is monotone (a
/// longer block has a larger span), and moving a block start left only
/// enlarges its span, so taking the least feasible end for every block in
/// turn finds a witness whenever one exists — and it is the
/// lexicographically least one.
fn cut_search(
    t: &[VariableWord],
    window: &[VariableWord],
    grading: &ExtractGrading,
    bound: usize,
    cuts: &mut Vec<usize>,
) -> bool {
    let mut start = 0;
    for item in t {
        let block_grading = grading.block_grading(start);
        let Some(end) = ((start + 1)..=bound).find(|&end| {
            span::factorize_unguarded(item.word(), &window[start..end], &block_grading).is_some()
        }) else {
            return false;
        };
        cuts.push(end);
        start = end;
    }
    true
}

/// Decides extraction of `t` from `ambient` and returns the canonical
/// (least-cuts) witness, searching up to the derived bound — or up to
/// `bound_override` when given. `None` is definitive; an override below the
/// derived bound that finds nothing yields [`ExtractError::SearchBoundExceeded`]
/// instead, since no conclusion is possible there.
pub fn check_extracted(
    t: &[VariableWord],
    ambient: &AmbientSeq,
    grading: &ExtractGrading,
    bound_override: Option<usize>,
) -> Result<Option<BlockWitness>, ExtractError> {
    if t.is_empty() {
        return Err(ExtractError::EmptyCandidate);
    }
    let derived = derived_bound(total_len(t), ambient, grading);
    let bound = bound_override.unwrap_or(derived).min(derived);
    let window = ambient.window(bound);
    let mut cuts = vec![0];
    if cut_search(t, &window, grading, bound, &mut cuts) {
        return Ok(Some(BlockWitness { cuts }));
    }
    if bound < derived {
        return Err(ExtractError::SearchBoundExceeded { overridden: bound, derived });
    }
    Ok(None)
}

/// Decides extraction of `t` from a finite outer sequence; the bound is the
/// outer length, so `None` is always definitive.
pub fn check_extracted_within(
    t: &[VariableWord],
    outer: &[VariableWord],
    grading: &ExtractGrading,
) -> Result<Option<BlockWitness>, ExtractError> {
    if t.is_empty() {
        return Err(ExtractError::EmptyCandidate);
    }
    let mut cuts = vec![0];
    if cut_search(t, outer, grading, outer.len(), &mut cuts) {
        return Ok(Some(BlockWitness { cuts }));
    }
    Ok(None)
}

/// Re-validates a recorded witness: shape, then span membership of every
/// item in its block.
pub fn validate_witness(
    t: &[VariableWord],
    ambient: &AmbientSeq,
    grading: &ExtractGrading,
    witness: &BlockWitness,
) -> bool {
    if t.is_empty() || !witness.well_formed(t.len()) {
        return false;
    }
    let window = ambient.window(*witness.cuts.last().expect("nonempty cuts"));
    t.iter().enumerate().all(|(i, item)| {
        let (start, end) = (witness.cuts[i], witness.cuts[i + 1]);
        let block = &window[start..end];
        span::factorize_unguarded(item.word(), block, &grading.block_grading(start)).is_some()
    })
}

/// Every extracted sequence of exactly `depth` items, each of symbol length
/// at most `max_len`, in canonical order (total symbol length, then
/// elementwise word order). Finite by the derived bound.
pub fn enumerate_extracted(
    ambient: &AmbientSeq,
    depth: usize,
    max_len: usize,
    grading: &ExtractGrading,
) -> Result<Vec<Vec<VariableWord>>, ExtractError> {
    if depth == 0 || max_len == 0 {
        return Err(ExtractError::InvalidBounds);
    }
    let bound = derived_bound(depth * max_len, ambient, grading);
    let window = ambient.window(bound);

    // Per block start, all (end, item) pairs where `item` lies in the
    // variable span of [start, end) and `end` is tight (the last used ambient
    // position is end − 1). Tight ends make every witness normalized, so
    // chaining never double-counts across block boundaries.
    let mut per_start: Vec<Vec<(usize, VariableWord)>> = Vec::with_capacity(bound + 1);
    for start in 0..=bound {
        let mut found = BTreeSet::new();
        block_items(&window, grading, start, max_len, &mut Vec::new(), &mut found);
        per_start.push(found.into_iter().collect());
    }

    let mut out = BTreeSet::new();
    let mut current = Vec::with_capacity(depth);
    chain_blocks(&per_start, depth, 0, &mut current, &mut out);
    Ok(out.into_iter().map(|(_, seq)| seq).collect())
}

/// DFS over used ambient positions from `start`, recording every variable
/// product of length ≤ max_len together with its tight end.
fn block_items(
    window: &[VariableWord],
    grading: &ExtractGrading,
    start: usize,
    max_len: usize,
    chosen: &mut Vec<(usize, Symbol)>,
    found: &mut BTreeSet<(usize, VariableWord)>,
) {
    let used_len: usize = chosen.iter().map(|(n, _)| window[*n].len()).sum();
    if let Some(&(last, _)) = chosen.last() {
        let parts: Vec<Word> = chosen
            .iter()
            .map(|(n, f)| window[*n].substitute(*f))
            .collect();
        let product = Word::concat(parts.iter());
        if let Ok(item) = VariableWord::new(product) {
            found.insert((last + 1, item));
        }
    }
    if used_len >= max_len {
        return;
    }
    let next = chosen.last().map_or(start, |&(n, _)| n + 1);
    for pos in next..window.len() {
        if used_len + window[pos].len() > max_len {
            continue;
        }
        chosen.push((pos, Symbol::Variable));
        block_items(window, grading, start, max_len, chosen, found);
        chosen.pop();
        for &letter in grading.position_letters(pos) {
            chosen.push((pos, Symbol::Letter(letter)));
            block_items(window, grading, start, max_len, chosen, found);
            chosen.pop();
        }
    }
}

fn chain_blocks(
    per_start: &[Vec<(usize, VariableWord)>],
    depth: usize,
    start: usize,
    current: &mut Vec<VariableWord>,
    out: &mut BTreeSet<(usize, Vec<VariableWord>)>,
) {
    if current.len() == depth {
        out.insert((total_len(current), current.clone()));
        return;
    }
    for (end, item) in &per_start[start] {
        current.push(item.clone());
        chain_blocks(per_start, depth, *end, current, out);
        current.pop();
    }
}

/// Composes witnesses: if `inner` witnesses (w over t) and `outer` witnesses
/// (t over s), the result witnesses (w over s) with cuts outer[inner[i]].
///
/// Graded composition requires the inner grade at most the outer grade; the
/// composed witness then holds at the outer grade (the inner fillers reach
/// ambient positions at least as deep as their own index, where the
/// nondecreasing chain has caught up).
pub fn compose_extraction(
    inner: &BlockWitness,
    outer: &BlockWitness,
    grades: Option<(usize, usize)>,
) -> Result<BlockWitness, ExtractError> {
    if let Some((k, l)) = grades {
        if k > l {
            return Err(ExtractError::IncompatibleGrades { inner: k, outer: l });
        }
    }
    let cuts = inner
        .cuts
        .iter()
        .map(|&c| {
            outer
                .cuts
                .get(c)
                .copied()
                .ok_or(ExtractError::IncompatibleWitnesses { cut: c, covered: outer.cuts.len() - 1 })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BlockWitness { cuts })
}
