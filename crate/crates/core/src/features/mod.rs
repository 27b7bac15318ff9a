//! The five article features and the quality-flaw template count.

mod counters;
mod lexicon;

pub use counters::{count_images, count_qft, count_references, count_sections, strip_comments};
pub use lexicon::{LanguageLexicon, LexiconError};

use crate::dump::ArticleText;
use crate::PageId;

/// Measured features of one article.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticleFeatures {
    pub page_id: PageId,
    /// UTF-8 bytes of raw wikitext.
    pub length: u64,
    pub references: u64,
    /// References per 1000 bytes of wikitext; 0 for empty text.
    pub ref_density: f64,
    pub images: u64,
    pub sections: u64,
    /// Quality-flaw template instances.
    pub qft: u64,
}

impl ArticleFeatures {
    /// Build from raw counts, deriving `ref_density`.
    pub fn from_counts(page_id: PageId, length: u64, references: u64, images: u64, sections: u64, qft: u64) -> Self {
        ArticleFeatures {
            page_id,
            length,
            references,
            ref_density: ref_density(references, length),
            images,
            sections,
            qft,
        }
    }

    /// Values in benchmark order: length, references, ref_density, images,
    /// sections.
    pub fn values(&self) -> [f64; 5] {
        [
            self.length as f64,
            self.references as f64,
            self.ref_density,
            self.images as f64,
            self.sections as f64,
        ]
    }
}

pub fn ref_density(references: u64, length: u64) -> f64 {
    if length == 0 {
        0.0
    } else {
        references as f64 * 1000.0 / length as f64
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("page {page_id} is in namespace {namespace}; only articles (namespace 0) are scored")]
    NotAnArticle { page_id: PageId, namespace: i32 },
}

/// Measure an article. Only main-namespace pages are accepted.
pub fn extract_features(article: &ArticleText, lexicon: &LanguageLexicon) -> Result<ArticleFeatures, FeatureError> {
    if article.namespace != 0 {
        return Err(FeatureError::NotAnArticle {
            page_id: article.page_id,
            namespace: article.namespace,
        });
    }
    Ok(features_of(article.page_id, &article.wikitext, lexicon))
}

/// Measure raw wikitext without a namespace check.
pub fn features_of(page_id: PageId, wikitext: &str, lexicon: &LanguageLexicon) -> ArticleFeatures {
    let visible = strip_comments(wikitext);
    ArticleFeatures::from_counts(
        page_id,
        wikitext.len() as u64,
        counters::references_in(&visible),
        counters::images_in(&visible, lexicon),
        counters::sections_in(&visible),
        counters::qft_in(&visible, lexicon),
    )
}
