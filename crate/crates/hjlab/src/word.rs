//! Words over a finite alphabet, with one reserved variable symbol.
//!
//! A *constant word* is a finite (possibly empty) sequence of letters; a
//! *variable word* additionally contains the reserved variable `x` at least
//! once. Substituting a letter for every occurrence of `x` turns a variable
//! word into a constant one of the same length.
//!
//! Letters are dense integer ids into an [`Alphabet`], which owns the
//! printable names. Within one alphabet, equality is by id; across the stages
//! of an [`AlphabetChain`] letters are identified by name and re-indexed into
//! the final (largest) stage, so every word in a graded computation lives
//! over a single ambient alphabet.

use std::fmt;

use thiserror::Error;

/// The reserved token for the variable symbol in every text format.
pub const VARIABLE_TOKEN: &str = "x";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
    #[error("alphabet must have at least one letter")]
    EmptyAlphabet,
    #[error("duplicate letter {0:?}")]
    DuplicateLetter(String),
    #[error("invalid letter name {0:?} (names are alphanumeric tokens, and {VARIABLE_TOKEN:?} is reserved)")]
    InvalidLetterName(String),
    #[error("word contains no variable")]
    NotVariable,
    #[error("chain must have at least one stage")]
    EmptyChain,
    #[error("chain stage {later} does not contain letter {letter:?} of stage {earlier}")]
    ChainNotIncreasing {
        earlier: usize,
        later: usize,
        letter: String,
    },
}

/// A letter, as a dense id into the alphabet it came from.
///
/// The id is only meaningful relative to that alphabet (or to the union
/// alphabet of a chain); use [`Alphabet::name`] to print it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub u8);

/// A finite, nonempty, ordered set of named letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    // All letter ids in declared order, so callers can borrow a slice.
    ids: Vec<Letter>,
}

fn valid_letter_name(name: &str) -> bool {
    name != VARIABLE_TOKEN
        && !name.is_empty()
        && name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(WordError::EmptyAlphabet);
        }
        if names.len() > u8::MAX as usize {
            return Err(WordError::InvalidLetterName(format!(
                "{} letters exceed the supported maximum of {}",
                names.len(),
                u8::MAX
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if !valid_letter_name(name) {
                return Err(WordError::InvalidLetterName(name.clone()));
            }
            if names[..i].contains(name) {
                return Err(WordError::DuplicateLetter(name.clone()));
            }
        }
        let ids = (0..names.len()).map(|i| Letter(i as u8)).collect();
        Ok(Alphabet { names, ids })
    }

    /// Parses the comma-separated text format, e.g. `"a,b,c"`.
    pub fn parse(text: &str) -> Result<Self, WordError> {
        let names: Vec<&str> = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        Alphabet::new(names)
    }

    pub fn render(&self) -> String {
        self.names.join(",")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one letter
    }

    pub fn letters(&self) -> &[Letter] {
        &self.ids
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.names[letter.0 as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<Letter> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Letter(i as u8))
    }

    pub fn contains(&self, letter: Letter) -> bool {
        (letter.0 as usize) < self.names.len()
    }
}

/// One position of a word: the variable, or a letter.
///
/// The derived order puts the variable before every letter; this is the
/// symbol order behind every canonical enumeration in the crate (it is what
/// makes line searches prefer variable slots early).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Variable,
    Letter(Letter),
}

/// A finite sequence of symbols. Empty words are legal and constant.
///
/// `Ord` is length-lexicographic (shortlex): shorter words first, ties broken
/// by the symbol order. This is the canonical word order used by every
/// deterministic enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_symbols(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True iff no variable symbol occurs (vacuously true for the empty word).
    pub fn is_constant(&self) -> bool {
        !self.0.contains(&Symbol::Variable)
    }

    /// Parses whitespace-separated symbol tokens; `"x"` is the variable.
    /// The empty token sequence is the empty word.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self, WordError> {
        let mut symbols = Vec::new();
        for token in text.split_whitespace() {
            if token == VARIABLE_TOKEN {
                symbols.push(Symbol::Variable);
            } else {
                let letter = alphabet
                    .lookup(token)
                    .ok_or_else(|| WordError::UnknownLetter(token.to_string()))?;
                symbols.push(Symbol::Letter(letter));
            }
        }
        Ok(Word(symbols))
    }

    /// Renders as whitespace-separated tokens; inverse of [`Word::parse`].
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let tokens: Vec<&str> = self
            .0
            .iter()
            .map(|s| match s {
                Symbol::Variable => VARIABLE_TOKEN,
                Symbol::Letter(l) => alphabet.name(*l),
            })
            .collect();
        tokens.join(" ")
    }

    /// Replaces every occurrence of the variable by `s`. Length is preserved;
    /// a constant word is returned unchanged.
    pub fn substitute(&self, s: Symbol) -> Word {
        Word(
            self.0
                .iter()
                .map(|sym| if *sym == Symbol::Variable { s } else { *sym })
                .collect(),
        )
    }

    pub fn concat<'a, I>(parts: I) -> Word
    where
        I: IntoIterator<Item = &'a Word>,
    {
        let mut symbols = Vec::new();
        for part in parts {
            symbols.extend_from_slice(&part.0);
        }
        Word(symbols)
    }

    /// `self` followed by `other`.
    pub fn append(&self, other: &Word) -> Word {
        Word::concat([self, other])
    }

    pub fn first(&self) -> Option<Symbol> {
        self.0.first().copied()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A word containing the variable at least once; the only kind of word that
/// can be substituted into meaningfully.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableWord(Word);

impl VariableWord {
    pub fn new(word: Word) -> Result<Self, WordError> {
        if word.is_constant() {
            return Err(WordError::NotVariable);
        }
        Ok(VariableWord(word))
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self, WordError> {
        VariableWord::new(Word::parse(text, alphabet)?)
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // variable words contain at least one symbol
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        self.0.render(alphabet)
    }

    /// Substitution t(s): replaces every variable position by `s`.
    pub fn substitute(&self, s: Symbol) -> Word {
        self.0.substitute(s)
    }
}

impl From<VariableWord> for Word {
    fn from(v: VariableWord) -> Word {
        v.0
    }
}

/// A nondecreasing chain of alphabets A_0 ⊆ A_1 ⊆ ..., constant after its
/// last declared stage.
///
/// Stages are identified by letter *name* and re-indexed into the final
/// stage, the *union alphabet*; all words of a graded computation are parsed
/// and rendered against the union. A single-stage chain recovers the
/// ungraded setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphabetChain {
    stages: Vec<Alphabet>,
    // Per stage: its letters as ids of the union alphabet, in union order.
    stage_ids: Vec<Vec<Letter>>,
}

impl AlphabetChain {
    pub fn new(stages: Vec<Alphabet>) -> Result<Self, WordError> {
        if stages.is_empty() {
            return Err(WordError::EmptyChain);
        }
        for i in 1..stages.len() {
            for letter in stages[i - 1].letters() {
                let name = stages[i - 1].name(*letter);
                if stages[i].lookup(name).is_none() {
                    return Err(WordError::ChainNotIncreasing {
                        earlier: i - 1,
                        later: i,
                        letter: name.to_string(),
                    });
                }
            }
        }
        let union = stages.last().expect("nonempty").clone();
        let stage_ids = stages
            .iter()
            .map(|stage| {
                let mut ids: Vec<Letter> = stage
                    .letters()
                    .iter()
                    .map(|l| union.lookup(stage.name(*l)).expect("stage is a subset"))
                    .collect();
                ids.sort();
                ids
            })
            .collect();
        Ok(AlphabetChain { stages, stage_ids })
    }

    /// A one-stage chain: the ungraded setting as a degenerate grading.
    pub fn constant(alphabet: Alphabet) -> Self {
        AlphabetChain::new(vec![alphabet]).expect("single stage is a valid chain")
    }

    /// Parses the `"a | a,b | a,b,c"` text format.
    pub fn parse(text: &str) -> Result<Self, WordError> {
        let stages = text
            .split('|')
            .map(Alphabet::parse)
            .collect::<Result<Vec<_>, _>>()?;
        AlphabetChain::new(stages)
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self.stages.iter().map(Alphabet::render).collect();
        parts.join(" | ")
    }

    /// The final stage; every letter of every stage has an id in it.
    pub fn union(&self) -> &Alphabet {
        self.stages.last().expect("nonempty")
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    /// Stage n, clamped to the last declared stage (chains are constant from
    /// there on).
    pub fn stage(&self, n: usize) -> &Alphabet {
        &self.stages[n.min(self.stages.len() - 1)]
    }

    /// The letters of stage n as union-alphabet ids, sorted.
    pub fn stage_letters(&self, n: usize) -> &[Letter] {
        &self.stage_ids[n.min(self.stage_ids.len() - 1)]
    }

    /// True iff every stage equals the union (the ungraded embedding).
    pub fn is_constant(&self) -> bool {
        self.stage_ids.iter().all(|ids| ids.len() == self.union().len())
    }

    /// The least stage index whose alphabet contains `letter`, if any.
    pub fn first_stage_with(&self, letter: Letter) -> Option<usize> {
        (0..self.stages.len()).find(|&n| self.stage_ids[n].binary_search(&letter).is_ok())
    }
}

/// A plain alphabet or a staged chain: the uniform input every engine takes,
/// so graded and ungraded instances flow through one code path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Letters {
    Plain(Alphabet),
    Chain(AlphabetChain),
}

impl Letters {
    /// The alphabet all words are parsed and rendered against: the alphabet
    /// itself, or a chain's union.
    pub fn union(&self) -> &Alphabet {
        match self {
            Letters::Plain(a) => a,
            Letters::Chain(c) => c.union(),
        }
    }

    /// The letters admissible at stage n: everything when plain, the chain
    /// stage when graded.
    pub fn stage_letters(&self, n: usize) -> &[Letter] {
        match self {
            Letters::Plain(a) => a.letters(),
            Letters::Chain(c) => c.stage_letters(n),
        }
    }

    pub fn is_graded(&self) -> bool {
        matches!(self, Letters::Chain(c) if !c.is_constant())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
