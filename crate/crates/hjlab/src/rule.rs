//! Coloring rules: total, finitely described colorings of the constant words
//! over a fixed alphabet.
//!
//! Rules are written in a one-token DSL: `len%r`, `count:<letter>%r`,
//! `first`, `dfa:<path>`, `table:<path>`. The file-backed kinds are loaded
//! and validated eagerly at parse time, so a successfully parsed rule is
//! total on its domain (the table kind up to its declared length bound).

use std::collections::BTreeMap;
use std::fs;

use thiserror::Error;

use crate::word::{Alphabet, Letter, Symbol, Word};

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error(
        "unrecognized rule {0:?}: expected len%r, count:<letter>%r, first, dfa:<path> or table:<path>"
    )]
    BadRuleSyntax(String),
    #[error("bad dfa file {path}: {reason}")]
    BadDfaFile { path: String, reason: String },
    #[error("bad table file {path}: {reason}")]
    BadTableFile { path: String, reason: String },
    #[error("table rule is only defined up to length {max_len}, word has length {len}")]
    TableOutOfRange { len: usize, max_len: usize },
    #[error("rules color constant words, not variable words")]
    VariableWordColored,
}

/// A deterministic automaton over letter ids; the color of a word is the
/// label of the state reached from the start state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    path: String,
    start: usize,
    state_colors: Vec<u32>,
    /// transitions\[state\]\[letter id\]
    transitions: Vec<Vec<usize>>,
}

/// An explicit word-to-color map, total up to a declared length bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    path: String,
    max_len: usize,
    colors: u32,
    map: BTreeMap<Word, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColoringRule {
    /// Word length modulo r.
    LengthMod(u32),
    /// Count of one letter modulo r.
    LetterCountMod { letter: Letter, name: String, modulus: u32 },
    /// Empty word gets color 0, a word starting with the alphabet's letter j
    /// gets color j+1. The empty word needs a convention because the domain
    /// contains it; 0 keeps letter classes aligned with letter indices.
    FirstLetter { colors: u32 },
    Dfa(Dfa),
    Table(Table),
}

impl ColoringRule {
    /// Parses a DSL token against an alphabet, loading and validating any
    /// referenced file eagerly.
    pub fn parse(token: &str, alphabet: &Alphabet) -> Result<ColoringRule, RuleError> {
        let bad = || RuleError::BadRuleSyntax(token.to_string());
        if token == "first" {
            return Ok(ColoringRule::FirstLetter { colors: alphabet.len() as u32 + 1 });
        }
        if let Some(rest) = token.strip_prefix("len%") {
            let modulus: u32 = rest.parse().map_err(|_| bad())?;
            if modulus == 0 {
                return Err(bad());
            }
            return Ok(ColoringRule::LengthMod(modulus));
        }
        if let Some(rest) = token.strip_prefix("count:") {
            let (name, modulus) = rest.split_once('%').ok_or_else(bad)?;
            let modulus: u32 = modulus.parse().map_err(|_| bad())?;
            if modulus == 0 {
                return Err(bad());
            }
            let letter = alphabet.lookup(name).ok_or_else(bad)?;
            return Ok(ColoringRule::LetterCountMod {
                letter,
                name: name.to_string(),
                modulus,
            });
        }
        if let Some(path) = token.strip_prefix("dfa:") {
            return Ok(ColoringRule::Dfa(Dfa::load(path, alphabet)?));
        }
        if let Some(path) = token.strip_prefix("table:") {
            return Ok(ColoringRule::Table(Table::load(path, alphabet)?));
        }
        Err(bad())
    }

    /// The DSL token this rule was built from.
    pub fn render(&self) -> String {
        match self {
            ColoringRule::LengthMod(r) => format!("len%{r}"),
            ColoringRule::LetterCountMod { name, modulus, .. } => {
                format!("count:{name}%{modulus}")
            }
            ColoringRule::FirstLetter { .. } => "first".to_string(),
            ColoringRule::Dfa(dfa) => format!("dfa:{}", dfa.path),
            ColoringRule::Table(table) => format!("table:{}", table.path),
        }
    }

    /// Number of colors; every color this rule emits is below it.
    pub fn color_count(&self) -> u32 {
        match self {
            ColoringRule::LengthMod(r) => *r,
            ColoringRule::LetterCountMod { modulus, .. } => *modulus,
            ColoringRule::FirstLetter { colors } => *colors,
            ColoringRule::Dfa(dfa) => {
                dfa.state_colors.iter().copied().max().unwrap_or(0) + 1
            }
            ColoringRule::Table(table) => table.colors,
        }
    }

    /// Colors a constant word.
    pub fn color(&self, w: &Word) -> Result<u32, RuleError> {
        if !w.is_constant() {
            return Err(RuleError::VariableWordColored);
        }
        Ok(match self {
            ColoringRule::LengthMod(r) => (w.len() % *r as usize) as u32,
            ColoringRule::LetterCountMod { letter, modulus, .. } => {
                let count = w
                    .symbols()
                    .iter()
                    .filter(|&&s| s == Symbol::Letter(*letter))
                    .count();
                (count % *modulus as usize) as u32
            }
            ColoringRule::FirstLetter { .. } => match w.first() {
                None => 0,
                Some(Symbol::Letter(Letter(id))) => id as u32 + 1,
                Some(Symbol::Variable) => unreachable!("constant word"),
            },
            ColoringRule::Dfa(dfa) => {
                let mut state = dfa.start;
                for s in w.symbols() {
                    match s {
                        Symbol::Letter(Letter(id)) => {
                            state = dfa.transitions[state][*id as usize]
                        }
                        Symbol::Variable => unreachable!("constant word"),
                    }
                }
                dfa.state_colors[state]
            }
            ColoringRule::Table(table) => {
                if w.len() > table.max_len {
                    return Err(RuleError::TableOutOfRange {
                        len: w.len(),
                        max_len: table.max_len,
                    });
                }
                *table.map.get(w).expect("validated total up to max_len")
            }
        })
    }
}

impl Dfa {
    /// Reads an automaton file:
    /// line 1 `states=n start=s`, then `state <i> color <c>` lines, then
    /// `trans <i> <letter> <j>` lines, total over the alphabet.
    fn load(path: &str, alphabet: &Alphabet) -> Result<Dfa, RuleError> {
        let fail = |reason: &str| RuleError::BadDfaFile {
            path: path.to_string(),
            reason: reason.to_string(),
        };
        let text = fs::read_to_string(path)
            .map_err(|e| fail(&format!("cannot read: {e}")))?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| fail("empty file"))?;
        let (states, start) = parse_header(header, "states", "start")
            .ok_or_else(|| fail("first line must be \"states=n start=s\""))?;
        if states == 0 || start >= states {
            return Err(fail("start state out of range"));
        }
        let mut state_colors: Vec<Option<u32>> = vec![None; states];
        let mut transitions: Vec<Vec<Option<usize>>> =
            vec![vec![None; alphabet.len()]; states];
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["state", i, "color", c] => {
                    let i: usize = i.parse().map_err(|_| fail(line))?;
                    let c: u32 = c.parse().map_err(|_| fail(line))?;
                    let slot = state_colors
                        .get_mut(i)
                        .ok_or_else(|| fail(&format!("state {i} out of range")))?;
                    if slot.replace(c).is_some() {
                        return Err(fail(&format!("state {i} colored twice")));
                    }
                }
                ["trans", i, letter, j] => {
                    let i: usize = i.parse().map_err(|_| fail(line))?;
                    let j: usize = j.parse().map_err(|_| fail(line))?;
                    let Letter(id) = alphabet
                        .lookup(letter)
                        .ok_or_else(|| fail(&format!("unknown letter {letter}")))?;
                    if i >= states || j >= states {
                        return Err(fail(&format!("state out of range in {line:?}")));
                    }
                    if transitions[i][id as usize].replace(j).is_some() {
                        return Err(fail(&format!("duplicate transition in {line:?}")));
                    }
                }
                _ => return Err(fail(&format!("unrecognized line {line:?}"))),
            }
        }
        let state_colors = state_colors
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| fail(&format!("state {i} has no color"))))
            .collect::<Result<Vec<u32>, _>>()?;
        let transitions = transitions
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(id, t)| {
                        t.ok_or_else(|| {
                            fail(&format!(
                                "missing transition from state {i} on {}",
                                alphabet.name(Letter(id as u8))
                            ))
                        })
                    })
                    .collect::<Result<Vec<usize>, _>>()
            })
            .collect::<Result<Vec<Vec<usize>>, _>>()?;
        Ok(Dfa { path: path.to_string(), start, state_colors, transitions })
    }
}

impl Table {
    /// Reads an explicit map file: header `maxlen=L colors=r`, then one line
    /// per word `<tokens...> <color>` (the empty word's line is the bare
    /// color). The map must be total up to the bound.
    fn load(path: &str, alphabet: &Alphabet) -> Result<Table, RuleError> {
        let fail = |reason: &str| RuleError::BadTableFile {
            path: path.to_string(),
            reason: reason.to_string(),
        };
        let text = fs::read_to_string(path)
            .map_err(|e| fail(&format!("cannot read: {e}")))?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| fail("empty file"))?;
        let (max_len, colors) = parse_header(header, "maxlen", "colors")
            .ok_or_else(|| fail("first line must be \"maxlen=L colors=r\""))?;
        if colors == 0 {
            return Err(fail("colors must be at least 1"));
        }
        let mut map = BTreeMap::new();
        for line in lines {
            let mut fields: Vec<&str> = line.split_whitespace().collect();
            let color: u32 = fields
                .pop()
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| fail(&format!("line {line:?} has no color")))?;
            if color as usize >= colors {
                return Err(fail(&format!("color out of range in {line:?}")));
            }
            let word = Word::parse(&fields.join(" "), alphabet)
                .map_err(|e| fail(&format!("bad word in {line:?}: {e}")))?;
            if !word.is_constant() || word.len() > max_len {
                return Err(fail(&format!("word out of domain in {line:?}")));
            }
            if map.insert(word, color).is_some() {
                return Err(fail(&format!("duplicate entry {line:?}")));
            }
        }
        let expected: usize = (0..=max_len as u32)
            .map(|l| alphabet.len().pow(l))
            .sum();
        if map.len() != expected {
            return Err(fail(&format!(
                "map has {} entries but needs {expected} to be total up to length {max_len}",
                map.len()
            )));
        }
        Ok(Table { path: path.to_string(), max_len, colors: colors as u32, map })
    }
}

/// Parses `"<a>=x <b>=y"` headers.
fn parse_header(line: &str, a: &str, b: &str) -> Option<(usize, usize)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 2 {
        return None;
    }
    let x = fields[0].strip_prefix(a)?.strip_prefix('=')?.parse().ok()?;
    let y = fields[1].strip_prefix(b)?.strip_prefix('=')?.parse().ok()?;
    Some((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn ab() -> Alphabet {
        Alphabet::parse("a,b").unwrap()
    }

    fn parse_word(text: &str) -> Word {
        Word::parse(text, &ab()).unwrap()
    }

    fn temp_file(name: &str, content: &str) -> String {
        let path: PathBuf =
            std::env::temp_dir().join(format!("hjlab-rule-{}-{name}", std::process::id()));
        fs::write(&path, content).unwrap();
        path.to_str().unwrap().to_string()
    }

    #[test]
    fn built_in_rules_parse_and_render() {
        let alphabet = ab();
        for token in ["len%2", "count:b%3", "first", "len%1"] {
            let rule = ColoringRule::parse(token, &alphabet).unwrap();
            assert_eq!(rule.render(), token);
        }
        for token in ["len%", "len%0", "count:z%2", "count:b", "parity", ""] {
            assert_eq!(
                ColoringRule::parse(token, &alphabet),
                Err(RuleError::BadRuleSyntax(token.to_string())),
                "token {token:?}"
            );
        }
    }

    #[test]
    fn length_and_count_rules_color_by_arithmetic() {
        let alphabet = ab();
        let len2 = ColoringRule::parse("len%2", &alphabet).unwrap();
        assert_eq!(len2.color(&parse_word("a b a")).unwrap(), 1);
        assert_eq!(len2.color(&parse_word("")).unwrap(), 0);
        assert_eq!(len2.color_count(), 2);

        let count = ColoringRule::parse("count:b%2", &alphabet).unwrap();
        assert_eq!(count.color(&parse_word("b b a")).unwrap(), 0);
        assert_eq!(count.color(&parse_word("a b a")).unwrap(), 1);
    }

    #[test]
    fn first_letter_convention() {
        let alphabet = ab();
        let first = ColoringRule::parse("first", &alphabet).unwrap();
        assert_eq!(first.color_count(), 3);
        assert_eq!(first.color(&parse_word("")).unwrap(), 0);
        assert_eq!(first.color(&parse_word("a b b")).unwrap(), 1);
        assert_eq!(first.color(&parse_word("b a")).unwrap(), 2);
    }

    #[test]
    fn variable_words_are_rejected() {
        let alphabet = ab();
        let rule = ColoringRule::parse("len%2", &alphabet).unwrap();
        let w = Word::parse("a x", &alphabet).unwrap();
        assert_eq!(rule.color(&w), Err(RuleError::VariableWordColored));
    }

    #[test]
    fn dfa_rule_tracks_states() {
        // accepts iff the word contains the letter b
        let path = temp_file(
            "contains-b.dfa",
            "states=2 start=0\nstate 0 color 0\nstate 1 color 1\n\
             trans 0 a 0\ntrans 0 b 1\ntrans 1 a 1\ntrans 1 b 1\n",
        );
        let rule = ColoringRule::parse(&format!("dfa:{path}"), &ab()).unwrap();
        assert_eq!(rule.color_count(), 2);
        assert_eq!(rule.color(&parse_word("")).unwrap(), 0);
        assert_eq!(rule.color(&parse_word("a a")).unwrap(), 0);
        assert_eq!(rule.color(&parse_word("a b a")).unwrap(), 1);
        assert_eq!(rule.render(), format!("dfa:{path}"));
    }

    #[test]
    fn dfa_files_are_validated_eagerly() {
        let alphabet = ab();
        match ColoringRule::parse("dfa:this-file-does-not-exist.dfa", &alphabet) {
            Err(RuleError::BadDfaFile { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let path = temp_file(
            "partial.dfa",
            "states=1 start=0\nstate 0 color 0\ntrans 0 a 0\n",
        );
        match ColoringRule::parse(&format!("dfa:{path}"), &alphabet) {
            Err(RuleError::BadDfaFile { reason, .. }) => {
                assert!(reason.contains("missing transition"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn table_rule_is_total_up_to_its_bound() {
        let path = temp_file("tiny.table", "maxlen=1 colors=2\n0\na 1\nb 0\n");
        let rule = ColoringRule::parse(&format!("table:{path}"), &ab()).unwrap();
        assert_eq!(rule.color(&parse_word("")).unwrap(), 0);
        assert_eq!(rule.color(&parse_word("a")).unwrap(), 1);
        assert_eq!(
            rule.color(&parse_word("a b")),
            Err(RuleError::TableOutOfRange { len: 2, max_len: 1 })
        );

        let partial = temp_file("partial.table", "maxlen=1 colors=2\n0\na 1\n");
        match ColoringRule::parse(&format!("table:{partial}"), &ab()) {
            Err(RuleError::BadTableFile { reason, .. }) => {
                assert!(reason.contains("total"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
