//! A laboratory for combinatorics on words: spans of variable-word
//! sequences, extracted subsequences of ambient sequences, finite
//! Hales–Jewett line search with exact small-instance certification, and a
//! pipeline that produces independently verified monochromatic product
//! certificates for finite colorings of the constant words.

pub mod cert;
pub mod cli;
pub mod engine;
pub mod extract;
pub mod family;
pub mod hj;
pub mod rule;
pub mod span;
pub mod word;

// The guide's code blocks compile and run with the doc-tests, so the book
// cannot drift from the library.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/words.md")]
    mod words {}
    #[doc = include_str!("../../../book/src/spans.md")]
    mod spans {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/hales-jewett.md")]
    mod hales_jewett {}
    #[doc = include_str!("../../../book/src/largeness.md")]
    mod largeness {}
    #[doc = include_str!("../../../book/src/carlson.md")]
    mod carlson {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
