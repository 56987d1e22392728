//! Spans of variable-word sequences.
//!
//! Given a finite sequence of variable words, its *constant span* is the set
//! of all concatenations obtained by picking a nonempty strictly increasing
//! subsequence of items and substituting a letter into each; the *variable
//! span* also admits the variable itself as a filler, keeping only results
//! that still contain it. The *boxed* products use every item exactly once.
//!
//! All four constructions take the admissible letters per slot from a
//! [`Grading`]: either one alphabet for every slot, or a stage of an alphabet
//! chain selected by the slot's index within the sequence.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::word::{Alphabet, AlphabetChain, Letter, Letters, Symbol, VariableWord, Word};

/// Factorization searches reject sequences longer than this.
pub const MAX_SEQ_LEN: usize = 16;
/// Factorization searches reject target words longer than this.
pub const MAX_WORD_LEN: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpanError {
    #[error("sequence must be nonempty")]
    EmptySequence,
    #[error("sequence has {0} items, more than the supported {MAX_SEQ_LEN}")]
    SequenceTooLong(usize),
    #[error("word has {0} symbols, more than the supported {MAX_WORD_LEN}")]
    WordTooLong(usize),
}

/// Which letters may be substituted into slot `i` of a sequence.
///
/// The slot index is always the item's index within the sequence at hand;
/// callers whose slots carry non-consecutive stages use [`Grading::PerSlot`].
#[derive(Debug, Clone, Copy)]
pub enum Grading<'a> {
    /// Every slot admits every letter of one alphabet (the ungraded setting).
    Uniform(&'a Alphabet),
    /// Slot `i` admits the letters of chain stage `base + i`.
    ByIndex {
        chain: &'a AlphabetChain,
        base: usize,
    },
    /// Slot `i` admits the letters of chain stage `stages[i]`.
    PerSlot {
        chain: &'a AlphabetChain,
        stages: &'a [usize],
    },
}

impl<'a> Grading<'a> {
    /// Uniform for a plain alphabet, staged by slot index from `base` for a
    /// chain.
    pub fn for_letters(letters: &'a Letters, base: usize) -> Grading<'a> {
        match letters {
            Letters::Plain(a) => Grading::Uniform(a),
            Letters::Chain(c) => Grading::ByIndex { chain: c, base },
        }
    }
}

impl Grading<'_> {
    pub fn slot_letters(&self, i: usize) -> &[Letter] {
        match self {
            Grading::Uniform(a) => a.letters(),
            Grading::ByIndex { chain, base } => chain.stage_letters(base + i),
            Grading::PerSlot { chain, stages } => chain.stage_letters(stages[i]),
        }
    }

    /// True iff `letter` may fill slot `i`.
    pub fn admits(&self, i: usize, letter: Letter) -> bool {
        self.slot_letters(i).contains(&letter)
    }
}

/// A witness that a word lies in a span: the chosen item indices (strictly
/// increasing) and the filler substituted into each.
///
/// Given the indices the fillers are forced — every item contains the
/// variable at least once, so the filler can be read off the target word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Decomposition {
    pub indices: Vec<usize>,
    pub fillers: Vec<Symbol>,
}

fn check_seq(seq: &[VariableWord]) -> Result<(), SpanError> {
    if seq.is_empty() {
        return Err(SpanError::EmptySequence);
    }
    if seq.len() > MAX_SEQ_LEN {
        return Err(SpanError::SequenceTooLong(seq.len()));
    }
    Ok(())
}

/// Enumerates products over the index subsets selected by `masks`, with the
/// admissible fillers given per slot. Constant results only when
/// `require_variable` is false; otherwise only results containing the
/// variable survive.
fn products<F>(
    seq: &[VariableWord],
    masks: impl Iterator<Item = u32>,
    slot_fillers: F,
    require_variable: bool,
) -> BTreeSet<Word>
where
    F: Fn(usize) -> Vec<Symbol>,
{
    let mut out = BTreeSet::new();
    for mask in masks {
        let indices: Vec<usize> = (0..seq.len()).filter(|i| mask >> i & 1 == 1).collect();
        let fillers_per_slot: Vec<Vec<Symbol>> =
            indices.iter().map(|&i| slot_fillers(i)).collect();
        // Odometer over the filler choices of the selected slots.
        let mut choice = vec![0usize; indices.len()];
        'odometer: loop {
            let parts: Vec<Word> = indices
                .iter()
                .enumerate()
                .map(|(slot, &i)| seq[i].substitute(fillers_per_slot[slot][choice[slot]]))
                .collect();
            let word = Word::concat(parts.iter());
            if !require_variable || !word.is_constant() {
                out.insert(word);
            }
            for slot in (0..choice.len()).rev() {
                choice[slot] += 1;
                if choice[slot] < fillers_per_slot[slot].len() {
                    continue 'odometer;
                }
                choice[slot] = 0;
            }
            break;
        }
    }
    out
}

fn all_nonempty_masks(n: usize) -> impl Iterator<Item = u32> {
    1..(1u32 << n)
}

/// All concatenations over nonempty increasing index subsequences with letter
/// fillers admissible for their slot.
pub fn constant_span(
    seq: &[VariableWord],
    grading: &Grading,
) -> Result<BTreeSet<Word>, SpanError> {
    check_seq(seq)?;
    Ok(products(
        seq,
        all_nonempty_masks(seq.len()),
        |i| grading.slot_letters(i).iter().map(|l| Symbol::Letter(*l)).collect(),
        false,
    ))
}

/// Same construction with the variable admitted as a filler, keeping only
/// results that still contain it.
pub fn variable_span(
    seq: &[VariableWord],
    grading: &Grading,
) -> Result<BTreeSet<VariableWord>, SpanError> {
    check_seq(seq)?;
    let words = products(
        seq,
        all_nonempty_masks(seq.len()),
        |i| {
            let mut fillers = vec![Symbol::Variable];
            fillers.extend(grading.slot_letters(i).iter().map(|l| Symbol::Letter(*l)));
            fillers
        },
        true,
    );
    Ok(words
        .into_iter()
        .map(|w| VariableWord::new(w).expect("filtered to variable words"))
        .collect())
}

/// Full products using every item exactly once, each filled by a letter of
/// `fillers`.
pub fn boxed_const(
    seq: &[VariableWord],
    fillers: &[Letter],
) -> Result<BTreeSet<Word>, SpanError> {
    check_seq(seq)?;
    Ok(products(
        seq,
        std::iter::once((1u32 << seq.len()) - 1),
        |_| fillers.iter().map(|l| Symbol::Letter(*l)).collect(),
        false,
    ))
}

/// Full products with fillers from `fillers` plus the variable, at least one
/// slot keeping the variable.
pub fn boxed_var(
    seq: &[VariableWord],
    fillers: &[Letter],
) -> Result<BTreeSet<VariableWord>, SpanError> {
    check_seq(seq)?;
    let mut with_variable = vec![Symbol::Variable];
    with_variable.extend(fillers.iter().map(|l| Symbol::Letter(*l)));
    let words = products(
        seq,
        std::iter::once((1u32 << seq.len()) - 1),
        |_| with_variable.clone(),
        true,
    );
    Ok(words
        .into_iter()
        .map(|w| VariableWord::new(w).expect("filtered to variable words"))
        .collect())
}

/// Matches `item` against an equally long window of the target, returning the
/// forced filler. Letter positions must agree exactly; all variable positions
/// must carry one and the same symbol — the filler.
fn match_item(item: &VariableWord, window: &[Symbol]) -> Option<Symbol> {
    debug_assert_eq!(item.len(), window.len());
    let mut filler = None;
    for (is, ws) in item.word().symbols().iter().zip(window) {
        match is {
            Symbol::Variable => match filler {
                None => filler = Some(*ws),
                Some(f) if f == *ws => {}
                Some(_) => return None,
            },
            letter if letter == ws => {}
            _ => return None,
        }
    }
    filler
}

fn factorize_from(
    target: &[Symbol],
    pos: usize,
    next: usize,
    seq: &[VariableWord],
    grading: &Grading,
    indices: &mut Vec<usize>,
    fillers: &mut Vec<Symbol>,
    out: &mut Vec<Decomposition>,
    first_only: bool,
) -> bool {
    if pos == target.len() {
        if !indices.is_empty() {
            out.push(Decomposition {
                indices: indices.clone(),
                fillers: fillers.clone(),
            });
            return first_only;
        }
        return false;
    }
    for i in next..seq.len() {
        let len = seq[i].len();
        if pos + len > target.len() {
            continue;
        }
        let Some(filler) = match_item(&seq[i], &target[pos..pos + len]) else {
            continue;
        };
        let admissible = match filler {
            Symbol::Variable => true,
            Symbol::Letter(l) => grading.admits(i, l),
        };
        if !admissible {
            continue;
        }
        indices.push(i);
        fillers.push(filler);
        if factorize_from(target, pos + len, i + 1, seq, grading, indices, fillers, out, first_only) {
            return true;
        }
        indices.pop();
        fillers.pop();
    }
    false
}

fn check_factorize_input(w: &Word, seq: &[VariableWord]) -> Result<(), SpanError> {
    check_seq(seq)?;
    if w.len() > MAX_WORD_LEN {
        return Err(SpanError::WordTooLong(w.len()));
    }
    Ok(())
}

/// The canonical decomposition of `w` over `seq` — least by indices, fillers
/// forced — or `None` when `w` lies in neither span.
///
/// A constant `w` with a decomposition lies in the constant span; a variable
/// `w` with one lies in the variable span (the variable can only enter
/// through a filler).
pub fn factorize(
    w: &Word,
    seq: &[VariableWord],
    grading: &Grading,
) -> Result<Option<Decomposition>, SpanError> {
    check_factorize_input(w, seq)?;
    let mut out = Vec::new();
    factorize_from(
        w.symbols(),
        0,
        0,
        seq,
        grading,
        &mut Vec::new(),
        &mut Vec::new(),
        &mut out,
        true,
    );
    Ok(out.into_iter().next())
}

/// As [`factorize`], without the desk-scale input guards. For internal
/// callers (block searches) whose inputs are bounded by their own search
/// bounds rather than by [`MAX_SEQ_LEN`]/[`MAX_WORD_LEN`].
pub(crate) fn factorize_unguarded(
    w: &Word,
    seq: &[VariableWord],
    grading: &Grading,
) -> Option<Decomposition> {
    let mut out = Vec::new();
    factorize_from(
        w.symbols(),
        0,
        0,
        seq,
        grading,
        &mut Vec::new(),
        &mut Vec::new(),
        &mut out,
        true,
    );
    out.into_iter().next()
}

/// Every decomposition of `w` over `seq`, in canonical order.
pub fn factorize_all(
    w: &Word,
    seq: &[VariableWord],
    grading: &Grading,
) -> Result<Vec<Decomposition>, SpanError> {
    check_factorize_input(w, seq)?;
    let mut out = Vec::new();
    factorize_from(
        w.symbols(),
        0,
        0,
        seq,
        grading,
        &mut Vec::new(),
        &mut Vec::new(),
        &mut out,
        false,
    );
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::parse("a,b").unwrap()
    }

    fn seq(texts: &[&str], alphabet: &Alphabet) -> Vec<VariableWord> {
        texts
            .iter()
            .map(|t| VariableWord::parse(t, alphabet).unwrap())
            .collect()
    }

    fn rendered(set: &BTreeSet<Word>, alphabet: &Alphabet) -> Vec<String> {
        set.iter().map(|w| w.render(alphabet)).collect()
    }

    fn rendered_var(set: &BTreeSet<VariableWord>, alphabet: &Alphabet) -> Vec<String> {
        set.iter().map(|w| w.render(alphabet)).collect()
    }

    #[test]
    fn constant_span_of_two_items() {
        let alphabet = ab();
        let s = seq(&["a x", "x b"], &alphabet);
        let span = constant_span(&s, &Grading::Uniform(&alphabet)).unwrap();
        assert_eq!(
            rendered(&span, &alphabet),
            ["a a", "a b", "b b", "a a a b", "a a b b", "a b a b", "a b b b"]
        );
    }

    #[test]
    fn variable_span_of_two_items() {
        let alphabet = ab();
        let s = seq(&["a x", "x b"], &alphabet);
        let span = variable_span(&s, &Grading::Uniform(&alphabet)).unwrap();
        assert_eq!(
            rendered_var(&span, &alphabet),
            ["x b", "a x", "a x x b", "a x a b", "a x b b", "a a x b", "a b x b"]
        );
        for w in &span {
            assert!(!w.word().is_constant());
        }
    }

    #[test]
    fn variable_span_single_item_keeps_only_variable_filler() {
        let alphabet = ab();
        let s = seq(&["a x"], &alphabet);
        let span = variable_span(&s, &Grading::Uniform(&alphabet)).unwrap();
        assert_eq!(rendered_var(&span, &alphabet), ["a x"]);
    }

    #[test]
    fn boxed_products_of_two_items() {
        let alphabet = ab();
        let s = seq(&["a x", "x b"], &alphabet);
        let c = boxed_const(&s, alphabet.letters()).unwrap();
        assert_eq!(
            rendered(&c, &alphabet),
            ["a a a b", "a a b b", "a b a b", "a b b b"]
        );
        let v = boxed_var(&s, alphabet.letters()).unwrap();
        assert_eq!(
            rendered_var(&v, &alphabet),
            ["a x x b", "a x a b", "a x b b", "a a x b", "a b x b"]
        );
    }

    #[test]
    fn boxed_const_keeps_item_order() {
        let alphabet = ab();
        let s = seq(&["x x", "x"], &alphabet);
        let c = boxed_const(&s, alphabet.letters()).unwrap();
        assert_eq!(rendered(&c, &alphabet), ["a a a", "a a b", "b b a", "b b b"]);
    }

    #[test]
    fn boxed_var_over_single_letter() {
        let alphabet = Alphabet::parse("a").unwrap();
        let s = seq(&["x", "x"], &alphabet);
        let v = boxed_var(&s, alphabet.letters()).unwrap();
        assert_eq!(rendered_var(&v, &alphabet), ["x x", "x a", "a x"]);
    }

    #[test]
    fn graded_span_restricts_early_slots() {
        let chain = AlphabetChain::parse("a | a,b").unwrap();
        let union = chain.union().clone();
        let s = seq(&["x x", "x x"], &union);
        let grading = Grading::ByIndex { chain: &chain, base: 0 };
        let span = constant_span(&s, &grading).unwrap();
        assert_eq!(rendered(&span, &union), ["a a", "b b", "a a a a", "a a b b"]);

        let single = seq(&["x"], &union);
        let vspan = variable_span(&single, &grading).unwrap();
        assert_eq!(rendered_var(&vspan, &union), ["x"]);
    }

    #[test]
    fn graded_span_grows_with_the_base() {
        // Raising the base grade of an increasing chain only adds products.
        let chain = AlphabetChain::parse("a | a,b | a,b,c").unwrap();
        let union = chain.union().clone();
        for items in [&["x"][..], &["x x"], &["x", "a x"], &["x x", "x", "c x"]] {
            let s = seq(items, &union);
            for k in 0..3 {
                for m in 0..3 {
                    let lo = constant_span(&s, &Grading::ByIndex { chain: &chain, base: k }).unwrap();
                    let hi =
                        constant_span(&s, &Grading::ByIndex { chain: &chain, base: k + m }).unwrap();
                    assert!(lo.is_subset(&hi), "base {k} vs {} on {items:?}", k + m);
                }
            }
        }
    }

    #[test]
    fn boxed_products_sit_inside_spans() {
        let alphabet = ab();
        let pool = ["x", "a x", "x b", "x x", "b x a"];
        for i in 0..pool.len() {
            for j in 0..pool.len() {
                let s = seq(&[pool[i], pool[j]], &alphabet);
                let grading = Grading::Uniform(&alphabet);
                let c = boxed_const(&s, alphabet.letters()).unwrap();
                assert!(c.is_subset(&constant_span(&s, &grading).unwrap()));
                let v = boxed_var(&s, alphabet.letters()).unwrap();
                assert!(v.is_subset(&variable_span(&s, &grading).unwrap()));
            }
        }
    }

    #[test]
    fn boxed_cardinality_on_disjoint_unit_items() {
        let alphabet = ab();
        for n in 1..=3 {
            let s = seq(&vec!["x"; n], &alphabet);
            let c = boxed_const(&s, alphabet.letters()).unwrap();
            assert_eq!(c.len(), 2usize.pow(n as u32));
        }
    }

    #[test]
    fn factorize_prefers_least_indices() {
        let alphabet = ab();
        let s = seq(&["a x", "x b"], &alphabet);
        let grading = Grading::Uniform(&alphabet);
        let b = Symbol::Letter(alphabet.lookup("b").unwrap());
        let a = Symbol::Letter(alphabet.lookup("a").unwrap());

        let w = Word::parse("a b", &alphabet).unwrap();
        let first = factorize(&w, &s, &grading).unwrap().unwrap();
        assert_eq!(first, Decomposition { indices: vec![0], fillers: vec![b] });
        let all = factorize_all(&w, &s, &grading).unwrap();
        assert_eq!(
            all,
            [
                Decomposition { indices: vec![0], fillers: vec![b] },
                Decomposition { indices: vec![1], fillers: vec![a] },
            ]
        );

        let w = Word::parse("a b b b", &alphabet).unwrap();
        let first = factorize(&w, &s, &grading).unwrap().unwrap();
        assert_eq!(first, Decomposition { indices: vec![0, 1], fillers: vec![b, b] });

        let w = Word::parse("x a", &alphabet).unwrap();
        assert_eq!(factorize(&w, &s, &grading).unwrap(), None);
    }

    #[test]
    fn factorize_agrees_with_enumeration() {
        // Membership by search matches membership by exhaustive listing on a
        // small family, for both constant and variable targets.
        let alphabet = ab();
        let pool = ["x", "a x", "x b", "x x"];
        let grading_alphabet = alphabet.clone();
        for i in 0..pool.len() {
            for j in 0..pool.len() {
                let s = seq(&[pool[i], pool[j]], &alphabet);
                let grading = Grading::Uniform(&grading_alphabet);
                let cspan = constant_span(&s, &grading).unwrap();
                let vspan = variable_span(&s, &grading).unwrap();
                // all words up to the maximal span length
                let max_len = s.iter().map(VariableWord::len).sum::<usize>();
                let mut symbols = vec![Symbol::Variable];
                symbols.extend(alphabet.letters().iter().map(|l| Symbol::Letter(*l)));
                let mut layer = vec![Word::empty()];
                for _ in 0..max_len {
                    let mut next = Vec::new();
                    for w in &layer {
                        for sym in &symbols {
                            let mut v = w.symbols().to_vec();
                            v.push(*sym);
                            next.push(Word::from_symbols(v));
                        }
                    }
                    for w in &next {
                        let found = factorize(w, &s, &grading).unwrap().is_some();
                        let member = if w.is_constant() {
                            cspan.contains(w)
                        } else {
                            VariableWord::new(w.clone())
                                .map(|vw| vspan.contains(&vw))
                                .unwrap_or(false)
                        };
                        assert_eq!(found, member, "word {:?}", w.render(&alphabet));
                    }
                    layer = next;
                }
            }
        }
    }

    #[test]
    fn graded_factorize_respects_stages() {
        let chain = AlphabetChain::parse("a | a,b").unwrap();
        let union = chain.union().clone();
        let s = seq(&["x x", "x x"], &union);
        let grading = Grading::ByIndex { chain: &chain, base: 0 };
        let bb = Word::parse("b b", &union).unwrap();
        // "b b" is only reachable as item 1 with filler b; item 0 admits a only.
        let d = factorize(&bb, &s, &grading).unwrap().unwrap();
        assert_eq!(d.indices, [1]);
        let bbbb = Word::parse("b b b b", &union).unwrap();
        assert_eq!(factorize(&bbbb, &s, &grading).unwrap(), None);
    }

    #[test]
    fn guards_reject_oversized_inputs() {
        let alphabet = ab();
        assert_eq!(
            constant_span(&[], &Grading::Uniform(&alphabet)),
            Err(SpanError::EmptySequence)
        );
        let long = seq(&vec!["x"; MAX_SEQ_LEN + 1], &alphabet);
        assert_eq!(
            constant_span(&long, &Grading::Uniform(&alphabet)),
            Err(SpanError::SequenceTooLong(MAX_SEQ_LEN + 1))
        );
        let s = seq(&["x"], &alphabet);
        let w = Word::from_symbols(vec![Symbol::Variable; MAX_WORD_LEN + 1]);
        assert_eq!(
            factorize(&w, &s, &Grading::Uniform(&alphabet)),
            Err(SpanError::WordTooLong(MAX_WORD_LEN + 1))
        );
    }

    #[test]
    fn per_slot_grading_overrides_index_rule() {
        let chain = AlphabetChain::parse("a | a,b").unwrap();
        let union = chain.union().clone();
        let s = seq(&["x", "x"], &union);
        // Both slots pinned to stage 1: the full ungraded span.
        let stages = [1, 1];
        let grading = Grading::PerSlot { chain: &chain, stages: &stages };
        let span = constant_span(&s, &grading).unwrap();
        let rendered: Vec<String> = span.iter().map(|w| w.render(&union)).collect();
        assert_eq!(rendered, ["a", "b", "a a", "a b", "b a", "b b"]);
    }
}
