//! Serializable run configuration. It is echoed into every export and
//! manifest, and a manifest's copy is enough to replay a build.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use topictree_core::{HnmfConfig, KRange, NmfParams, RangePolicy};

use crate::error::{Error, Result};
use crate::ingest::IngestFilter;
use crate::tokenize::{Normalizer, StopwordSource, TokenPipelineConfig, DEFAULT_DROP_LIST, DEFAULT_MIN_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NormalizerKind {
    Identity,
    #[default]
    Stemmer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenSettings {
    /// Stopword file; the built-in English list when absent.
    pub stopwords: Option<PathBuf>,
    pub drop_list: Vec<String>,
    pub normalizer: NormalizerKind,
    pub min_len: usize,
    pub lowercase: bool,
    pub include_title: bool,
}

impl Default for TokenSettings {
    fn default() -> Self {
        TokenSettings {
            stopwords: None,
            drop_list: DEFAULT_DROP_LIST.iter().map(|s| s.to_string()).collect(),
            normalizer: NormalizerKind::Stemmer,
            min_len: DEFAULT_MIN_LEN,
            lowercase: true,
            include_title: true,
        }
    }
}

impl TokenSettings {
    pub fn pipeline(&self) -> TokenPipelineConfig {
        TokenPipelineConfig {
            stopwords: self
                .stopwords
                .clone()
                .map_or(StopwordSource::Builtin, StopwordSource::File),
            drop_list: self.drop_list.clone(),
            normalizer: match self.normalizer {
                NormalizerKind::Identity => Normalizer::Identity,
                NormalizerKind::Stemmer => Normalizer::Stemmer,
            },
            min_len: self.min_len,
            lowercase: self.lowercase,
            include_title: self.include_title,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub alpha: f64,
    /// Largest leaf that is not split further.
    pub m: usize,
    pub q: usize,
    pub max_depth: usize,
    pub seed: u64,
    /// Candidate topic range per layer as `"k1:k2"`; empty selects the
    /// range from the variance increments at every split.
    pub ranges: Vec<String>,
    pub min_df: usize,
    pub max_df_ratio: f64,
    /// Required language tag; all languages when absent.
    pub language: Option<String>,
    pub tokens: TokenSettings,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub variance_k_max: usize,
    pub drop_ratio: f64,
    pub keywords: usize,
}

pub const DEFAULT_MIN_DF: usize = 5;
pub const DEFAULT_MAX_DF_RATIO: f64 = 0.95;

impl Default for BuildConfig {
    fn default() -> Self {
        let h = HnmfConfig::default();
        BuildConfig {
            alpha: h.alpha,
            m: h.max_leaf_size,
            q: h.q,
            max_depth: h.max_depth,
            seed: h.seed_master,
            ranges: Vec::new(),
            min_df: DEFAULT_MIN_DF,
            max_df_ratio: DEFAULT_MAX_DF_RATIO,
            language: Some("en".into()),
            tokens: TokenSettings::default(),
            max_iters: h.nmf.max_iters,
            rel_tol: h.nmf.rel_tol,
            variance_k_max: h.variance_k_max,
            drop_ratio: h.drop_ratio,
            keywords: h.keywords,
        }
    }
}

/// Parses `"k1:k2"`.
pub fn parse_range(s: &str) -> Result<KRange> {
    let bad = || Error::Argument(format!("range must be k1:k2 with 1 <= k1 <= k2, found {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let k1 = a.trim().parse().map_err(|_| bad())?;
    let k2 = b.trim().parse().map_err(|_| bad())?;
    KRange::new(k1, k2).map_err(|_| bad())
}

impl BuildConfig {
    pub fn hnmf(&self) -> Result<HnmfConfig> {
        let range = if self.ranges.is_empty() {
            RangePolicy::Auto
        } else {
            RangePolicy::Fixed(self.ranges.iter().map(|r| parse_range(r)).collect::<Result<_>>()?)
        };
        let cfg = HnmfConfig {
            alpha: self.alpha,
            max_leaf_size: self.m,
            q: self.q,
            max_depth: self.max_depth,
            range,
            seed_master: self.seed,
            nmf: NmfParams {
                max_iters: self.max_iters,
                rel_tol: self.rel_tol,
                ..NmfParams::default()
            },
            variance_k_max: self.variance_k_max,
            drop_ratio: self.drop_ratio,
            keywords: self.keywords,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn filter(&self) -> IngestFilter {
        IngestFilter {
            language: self.language.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hnmf()?;
        if self.min_df == 0 || !(self.max_df_ratio > 0.0 && self.max_df_ratio <= 1.0) {
            return Err(Error::Argument(
                "need min_df >= 1 and 0 < max_df_ratio <= 1".into(),
            ));
        }
        if self.tokens.min_len == 0 {
            return Err(Error::Argument("minimum token length must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("2:6").unwrap(), KRange::new(2, 6).unwrap());
        assert_eq!(parse_range(" 3 : 3").unwrap(), KRange::new(3, 3).unwrap());
        for bad in ["6:2", "0:3", "2-6", "a:b", "2:"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn defaults_echo_tree_defaults() {
        let c = BuildConfig::default();
        assert_eq!((c.alpha, c.m, c.q), (0.05, 1400, 30));
        assert!(c.validate().is_ok());
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<BuildConfig>(&json).unwrap(), c);
    }
}
