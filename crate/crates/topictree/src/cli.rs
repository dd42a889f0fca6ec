//! Command-line driver.

use std::collections::BTreeMap;
use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::api::{serve, ApiBundle};
use crate::config::{parse_range, BuildConfig, NormalizerKind};
use crate::error::{Error, Result};
use crate::pipeline::{build, prepare, replay, run_eval, write_build, EvalOptions, Scope, Weighting};

#[derive(Debug, Parser)]
#[command(name = "topictree", version, about = "Hierarchical NMF topic trees for document corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a corpus file and report what the filters and vocabulary keep.
    Ingest {
        corpus: PathBuf,
        #[command(flatten)]
        opts: CorpusArgs,
    },
    /// Build the topic tree and write the export, series and manifest.
    Build(BuildArgs),
    /// Score a built tree: coherence per topic and the topic distance heatmap.
    Eval(EvalArgs),
    /// Write the API responses as static files for serverless browsing.
    Export(ExportArgs),
    /// Serve the API and the UI assets over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args, Default)]
pub struct CorpusArgs {
    #[arg(long)]
    pub min_df: Option<usize>,
    #[arg(long)]
    pub max_df_ratio: Option<f64>,
    /// Stopword file, one word per line (default: built-in English list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Comma-separated words and phrases to drop.
    #[arg(long, value_delimiter = ',')]
    pub drop_list: Option<Vec<String>>,
    /// Leave titles out of the token stream.
    #[arg(long)]
    pub no_title: bool,
    #[arg(long, value_enum)]
    pub normalizer: Option<NormalizerKind>,
    #[arg(long)]
    pub min_token_len: Option<usize>,
    /// Language tag to keep, or `any`.
    #[arg(long)]
    pub language: Option<String>,
}

impl CorpusArgs {
    fn is_empty(&self) -> bool {
        self.min_df.is_none()
            && self.max_df_ratio.is_none()
            && self.stopwords.is_none()
            && self.drop_list.is_none()
            && !self.no_title
            && self.normalizer.is_none()
            && self.min_token_len.is_none()
            && self.language.is_none()
    }

    fn apply(&self, c: &mut BuildConfig) {
        if let Some(v) = self.min_df {
            c.min_df = v;
        }
        if let Some(v) = self.max_df_ratio {
            c.max_df_ratio = v;
        }
        if let Some(v) = &self.stopwords {
            c.tokens.stopwords = Some(v.clone());
        }
        if let Some(v) = &self.drop_list {
            c.tokens.drop_list = v.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        }
        if self.no_title {
            c.tokens.include_title = false;
        }
        if let Some(v) = self.normalizer {
            c.tokens.normalizer = v;
        }
        if let Some(v) = self.min_token_len {
            c.tokens.min_len = v;
        }
        if let Some(v) = &self.language {
            c.language = (!v.eq_ignore_ascii_case("any")).then(|| v.clone());
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Line-delimited JSON corpus.
    #[arg(required_unless_present = "manifest")]
    pub corpus: Option<PathBuf>,
    /// Replay the run recorded in a manifest.
    #[arg(long, conflicts_with = "corpus")]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Membership threshold on normalized coding weights.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Largest leaf left unsplit.
    #[arg(long)]
    pub m: Option<usize>,
    /// Seed pairs compared per candidate topic count.
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Candidate topic range `k1:k2`; repeat for successive layers.
    #[arg(long)]
    pub range: Vec<String>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[command(flatten)]
    pub corpus_opts: CorpusArgs,
    /// Also write the root factorization to factors.bin.
    #[arg(long)]
    pub dump_factors: bool,
}

impl BuildArgs {
    fn overrides_given(&self) -> bool {
        self.alpha.is_some()
            || self.m.is_some()
            || self.q.is_some()
            || self.max_depth.is_some()
            || self.seed.is_some()
            || !self.range.is_empty()
            || self.max_iters.is_some()
            || self.rel_tol.is_some()
            || !self.corpus_opts.is_empty()
    }

    pub fn config(&self) -> Result<BuildConfig> {
        let mut c = BuildConfig::default();
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.m {
            c.m = v;
        }
        if let Some(v) = self.q {
            c.q = v;
        }
        if let Some(v) = self.max_depth {
            c.max_depth = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        for r in &self.range {
            parse_range(r)?;
        }
        c.ranges = self.range.clone();
        if let Some(v) = self.max_iters {
            c.max_iters = v;
        }
        if let Some(v) = self.rel_tol {
            c.rel_tol = v;
        }
        self.corpus_opts.apply(&mut c);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory written by `build`.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Word vectors in word2vec text format.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Corpus file (default: the one recorded in the manifest).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Fail when a topic has a smaller fraction of embedded words.
    #[arg(long, default_value_t = 0.5)]
    pub coverage_floor: f64,
    #[arg(long, default_value_t = topictree_core::eval::COHERENCE_WORDS)]
    pub coherence_words: usize,
    #[arg(long, value_enum, default_value_t = Scope::Topic)]
    pub scope: Scope,
    #[arg(long, value_enum, default_value_t = Weighting::Uniform)]
    pub weighting: Weighting,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Directory written by `build` (and optionally `eval`).
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Destination of the static site.
    #[arg(long)]
    pub static_dir: PathBuf,
    /// UI assets copied next to the `api/` directory.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

fn copy_tree(from: &Path, to: &Path) -> Result<()> {
    fs::create_dir_all(to).map_err(|e| Error::io(to, e))?;
    for entry in fs::read_dir(from).map_err(|e| Error::io(from, e))? {
        let entry = entry.map_err(|e| Error::io(from, e))?;
        let src = entry.path();
        let dst = to.join(entry.file_name());
        if src.is_dir() {
            copy_tree(&src, &dst)?;
        } else {
            fs::copy(&src, &dst).map_err(|e| Error::io(&src, e))?;
        }
    }
    Ok(())
}

/// Runs one command, printing a short report to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { corpus, opts } => {
            let mut cfg = BuildConfig::default();
            opts.apply(&mut cfg);
            cfg.validate()?;
            let prepared = prepare(&corpus, &cfg, &mut BTreeMap::new())?;
            let report = serde_json::json!({
                "stats": prepared.ingested.stats,
                "n_docs": prepared.matrix.n_docs(),
                "n_terms": prepared.matrix.n_terms(),
                "excluded": prepared.matrix.excluded(),
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Command::Build(args) => {
            let mut run = match &args.manifest {
                Some(m) => {
                    if args.overrides_given() {
                        return Err(Error::Argument(
                            "--manifest replays a recorded configuration and takes no other options".into(),
                        ));
                    }
                    replay(m)?
                }
                None => {
                    let corpus = args.corpus.as_deref().expect("clap requires a corpus");
                    build(corpus, &args.config()?)?
                }
            };
            let outputs = write_build(&mut run, &args.out_dir, args.dump_factors)?;
            let layers: Vec<String> = run
                .manifest
                .layer_k
                .iter()
                .map(|l| format!("{}:{}={}", l.layer, l.node, l.k_star))
                .collect();
            println!(
                "{} documents, {} terms, {} topics over {} layers (k* {})",
                run.corpus.matrix.n_docs(),
                run.corpus.matrix.n_terms(),
                run.tree.nodes_by_layer().len(),
                run.tree.depth(),
                layers.join(" ")
            );
            println!("wrote {} files to {}", outputs.len(), args.out_dir.display());
        }
        Command::Eval(args) => {
            let opts = EvalOptions {
                coherence_words: args.coherence_words,
                scope: args.scope,
                weighting: args.weighting,
                coverage_floor: args.coverage_floor,
            };
            let eval = run_eval(&args.out_dir, args.corpus.as_deref(), &args.embeddings, &opts)?;
            let h = &eval.heatmap;
            println!(
                "{} topics scored; distances in [{}, {}]; {} warnings",
                h.paths.len(),
                h.d_min,
                h.d_max,
                eval.warnings.len()
            );
        }
        Command::Export(args) => {
            let bundle = ApiBundle::load(&args.out_dir)?;
            if let Some(ui) = &args.ui_dir {
                copy_tree(ui, &args.static_dir)?;
            }
            let files = bundle.write_static(&args.static_dir)?;
            println!("wrote {} API files to {}", files.len(), args.static_dir.display());
        }
        Command::Serve(args) => {
            let bundle = ApiBundle::load(&args.out_dir)?;
            let addr = SocketAddr::new(args.host, args.port);
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Bind {
                addr: addr.to_string(),
                source: e,
            })?;
            println!("serving {} on http://{addr}", args.out_dir.display());
            rt.block_on(serve(bundle, args.ui_dir, addr))?;
        }
    }
    Ok(())
}
