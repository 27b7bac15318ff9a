//! Citation-ranked article quality across Wikipedia language editions.
//!
//! The crate reads MediaWiki and Wikidata dumps and produces, per language
//! edition and topic, the average quality score of the K most cited articles:
//!
//! 1. [`dump`] streams the `page`, `pagelinks`, `linktarget` SQL dumps, the
//!    pages-articles XML export and the Wikidata JSON dump.
//! 2. [`index`] counts incoming wikilinks from main-namespace articles and
//!    ranks pages by that count.
//! 3. [`features`] measures length, references, reference density, images,
//!    sections and quality-flaw templates from raw wikitext.
//! 4. [`score`] normalizes features against per-language medians of the best
//!    articles and applies the flaw-template penalty.
//! 5. [`topics`] assigns articles to topics through Wikidata `P31` values.
//! 6. [`pipeline`] runs the stages end to end and writes the matrix.

pub mod dump;
pub mod features;
pub mod index;
pub mod pipeline;
pub mod score;
pub mod title;
pub mod topics;

pub use dump::PageId;
