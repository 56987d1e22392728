//! Monochromatic-product certificates and their independent verifier.
//!
//! A certificate names an alphabet (or staged chain), a coloring rule, a
//! color, and a sequence of variable words t_0..t_{d−1} extracted from the
//! ambient (x, x, ...). Its claim: every product t_{m_0}(a_0)...t_{m_n}(a_n)
//! over a nonempty index subset m_0 < ... < m_n < d — letters drawn from
//! stage m_i in the graded case — evaluates to the certificate's color. The
//! verifier re-enumerates every product and re-derives the extraction
//! witness; it never trusts the producer.

use thiserror::Error;

use crate::extract::{self, AmbientSeq, BlockWitness, ExtractGrading};
use crate::rule::ColoringRule;
use crate::word::{Letter, Letters, Symbol, VariableWord, Word};

pub const CERT_HEADER: &str = "carlson-certificate v1";

#[derive(Debug, Error, PartialEq)]
pub enum CertError {
    #[error("malformed certificate: {0}")]
    Malformed(String),
}

fn malformed(reason: impl Into<String>) -> CertError {
    CertError::Malformed(reason.into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub letters: Letters,
    pub rule: ColoringRule,
    pub depth: usize,
    pub color: u32,
    pub words: Vec<VariableWord>,
    /// Extraction witness against (x, x, ...); re-derived when absent.
    pub blocks: Option<BlockWitness>,
}

/// One failed product: which certificate indices, which letters, the word
/// they produce, and the color it got instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub indices: Vec<usize>,
    pub letters: Vec<Letter>,
    pub product: Word,
    pub color: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// All products monochromatic; the count that was checked.
    Pass { products: usize },
    /// Every off-color product, in canonical enumeration order.
    Violations(Vec<Violation>),
}

impl Certificate {
    /// The canonical text form: lowercase keywords, single spaces, one
    /// newline-terminated line each.
    pub fn to_text(&self) -> String {
        let union = self.letters.union();
        let mut out = String::new();
        out.push_str(CERT_HEADER);
        out.push('\n');
        match &self.letters {
            Letters::Plain(a) => {
                out.push_str(&format!("alphabet {}\n", a.render()));
            }
            Letters::Chain(c) => {
                out.push_str(&format!("chain {}\n", c.render()));
            }
        }
        out.push_str(&format!("rule {}\n", self.rule.render()));
        out.push_str(&format!("depth {}\n", self.depth));
        out.push_str(&format!("color {}\n", self.color));
        for (i, t) in self.words.iter().enumerate() {
            out.push_str(&format!("t{i} = {}\n", t.render(union)));
        }
        if let Some(witness) = &self.blocks {
            let cuts: Vec<String> = witness.cuts.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("blocks = {}\n", cuts.join(" ")));
        }
        out
    }

    /// Parses the text form. File-backed rules load their files here, so a
    /// parsed certificate is ready to verify.
    pub fn parse(text: &str) -> Result<Certificate, CertError> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let line_at = |pos: usize, what: &str| {
            lines
                .get(pos)
                .copied()
                .ok_or_else(|| malformed(format!("missing {what} line")))
        };

        if line_at(0, "header")?.trim() != CERT_HEADER {
            return Err(malformed(format!("first line must be {CERT_HEADER:?}")));
        }
        let letters_line = line_at(1, "alphabet or chain")?;
        let letters = if let Some(spec) = letters_line.strip_prefix("alphabet ") {
            Letters::Plain(
                crate::word::Alphabet::parse(spec)
                    .map_err(|e| malformed(format!("bad alphabet: {e}")))?,
            )
        } else if let Some(spec) = letters_line.strip_prefix("chain ") {
            Letters::Chain(
                crate::word::AlphabetChain::parse(spec)
                    .map_err(|e| malformed(format!("bad chain: {e}")))?,
            )
        } else {
            return Err(malformed("second line must declare an alphabet or chain"));
        };
        let rule_token = line_at(2, "rule")?
            .strip_prefix("rule ")
            .ok_or_else(|| malformed("third line must declare the rule"))?;
        let rule = ColoringRule::parse(rule_token, letters.union())
            .map_err(|e| malformed(format!("bad rule: {e}")))?;
        let depth: usize = line_at(3, "depth")?
            .strip_prefix("depth ")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| malformed("bad depth line"))?;
        let color: u32 = line_at(4, "color")?
            .strip_prefix("color ")
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| malformed("bad color line"))?;

        let mut words = Vec::with_capacity(depth);
        for i in 0..depth {
            let line = line_at(5 + i, &format!("t{i}"))?;
            let tokens = line
                .strip_prefix(&format!("t{i} = "))
                .ok_or_else(|| malformed(format!("expected \"t{i} = ...\", got {line:?}")))?;
            let word = VariableWord::parse(tokens, letters.union())
                .map_err(|e| malformed(format!("bad word in {line:?}: {e}")))?;
            words.push(word);
        }
        let mut pos = 5 + depth;
        let mut blocks = None;
        if let Some(&line) = lines.get(pos) {
            if let Some(cut_text) = line.strip_prefix("blocks = ") {
                let cuts = cut_text
                    .split_whitespace()
                    .map(|c| c.parse::<usize>())
                    .collect::<Result<Vec<usize>, _>>()
                    .map_err(|_| malformed("bad blocks line"))?;
                blocks = Some(BlockWitness { cuts });
                pos += 1;
            }
        }
        if let Some(&line) = lines.get(pos) {
            return Err(malformed(format!("unexpected trailing line {line:?}")));
        }
        Ok(Certificate { letters, rule, depth, color, words, blocks })
    }
}

/// Re-checks a certificate from scratch: shape, extraction witness against
/// (x, x, ...), and every product over every nonempty index subset, in
/// canonical order (subset size, then indices, then letters).
pub fn verify_certificate(cert: &Certificate) -> Result<Verdict, CertError> {
    if cert.depth == 0 {
        return Err(malformed("depth must be at least 1"));
    }
    if cert.words.len() != cert.depth {
        return Err(malformed(format!(
            "depth {} but {} words",
            cert.depth,
            cert.words.len()
        )));
    }
    if cert.color >= cert.rule.color_count() {
        return Err(malformed(format!(
            "color {} out of range for a rule with {} colors",
            cert.color,
            cert.rule.color_count()
        )));
    }

    // extraction witness: validate the recorded one, or re-derive
    let ambient = AmbientSeq::all_variables();
    let grading = ExtractGrading::for_letters(&cert.letters, 0);
    match &cert.blocks {
        Some(witness) => {
            if !extract::validate_witness(&cert.words, &ambient, &grading, witness) {
                return Err(malformed(
                    "extraction witness does not validate against the ambient (x, x, ...)",
                ));
            }
        }
        None => {
            let derived = extract::check_extracted(&cert.words, &ambient, &grading, None)
                .map_err(|e| malformed(format!("extraction check failed: {e}")))?;
            if derived.is_none() {
                return Err(malformed(
                    "words do not extract from the ambient (x, x, ...)",
                ));
            }
        }
    }

    // every product over every nonempty index subset
    let mut products = 0usize;
    let mut violations = Vec::new();
    for size in 1..=cert.depth {
        for indices in combinations(cert.depth, size) {
            let letter_choices: Vec<&[Letter]> = indices
                .iter()
                .map(|&m| cert.letters.stage_letters(m))
                .collect();
            let mut choice = vec![0usize; size];
            loop {
                let letters: Vec<Letter> =
                    choice.iter().zip(&letter_choices).map(|(&c, ls)| ls[c]).collect();
                let parts: Vec<Word> = indices
                    .iter()
                    .zip(&letters)
                    .map(|(&m, &a)| cert.words[m].substitute(Symbol::Letter(a)))
                    .collect();
                let product = Word::concat(&parts);
                let color = cert
                    .rule
                    .color(&product)
                    .map_err(|e| malformed(format!("rule failed on a product: {e}")))?;
                products += 1;
                if color != cert.color {
                    violations.push(Violation {
                        indices: indices.clone(),
                        letters,
                        product,
                        color,
                    });
                }
                // odometer, last slot fastest: letter tuples in lex order
                let mut slot = size;
                loop {
                    if slot == 0 {
                        break;
                    }
                    slot -= 1;
                    choice[slot] += 1;
                    if choice[slot] < letter_choices[slot].len() {
                        break;
                    }
                    choice[slot] = 0;
                }
                if choice.iter().all(|&c| c == 0) {
                    break;
                }
            }
        }
    }
    if !cert.letters.is_graded() {
        let expected = (1 + cert.letters.union().len()).pow(cert.depth as u32) - 1;
        assert_eq!(products, expected, "product enumeration must be complete");
    }
    if violations.is_empty() {
        Ok(Verdict::Pass { products })
    } else {
        Ok(Verdict::Violations(violations))
    }
}

/// All size-k index subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(n, k, i + 1, current, out);
            current.pop();
        }
    }
    rec(n, k, 0, &mut current, &mut out);
    out
}
