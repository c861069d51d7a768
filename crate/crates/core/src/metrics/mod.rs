//! Text metrics used for filtering and evaluation: WER, CER, n-gram
//! similarity, shingle Jaccard and corpus BLEU.

mod bleu;
mod edit;
mod normalize;
mod similarity;

pub use bleu::{bleu, bleu_stats, BleuStats};
pub use edit::{align, cer, wer, EditCounts, EditSummary};
pub use normalize::{collapse_whitespace, normalize, normalize_with};
pub use similarity::{
    jaccard_shingles, jaccard_sorted, ngram_cosine, padded_ngram_counts, shingles,
};
