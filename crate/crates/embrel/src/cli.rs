//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use embrel_core::classify::CvConfig;
use embrel_core::compose::{CompositionStrategy, ConcatOrder};
use embrel_core::dataset::{self, PostPairRecord};
use embrel_core::pipeline::{self, EmbeddedPairs, FeatureOptions, PairFeatures};
use embrel_core::simeval;
use log::{error, info, warn};

use crate::config::{GoldSource, NamedPath, Overrides, RunConfig, SEED_ENV};
use crate::error::{Error, Result};
use crate::report::RelatednessRow;
use crate::{formats, parallel, report};

#[derive(Debug, Parser)]
#[command(name = "embrel", version, about = "Evaluate word embeddings on similarity and post-relatedness tasks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score embeddings against word-similarity gold sets.
    EvalSim(RunArgs),
    /// Cross-validated KNN relatedness classification of post pairs.
    EvalRel(RunArgs),
    /// Learning curve of the relatedness classifier over training fractions.
    Curve(RunArgs),
    /// Majority-vote raw annotations into a labelled pairs file.
    DatasetAgg(AggArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with defaults for any of these options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Embedding table, repeatable.
    #[arg(long = "embeddings", value_name = "NAME=PATH")]
    pub embeddings: Vec<NamedPath>,
    /// Gold judgments; KIND is graded or binary. Repeatable.
    #[arg(long = "gold", value_name = "NAME=PATH:KIND")]
    pub gold: Vec<GoldSource>,
    /// Labelled pairs CSV with post, op_post, is_related columns.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Composition strategies: sum, con, con_pca.
    #[arg(long, value_delimiter = ',')]
    pub strategy: Vec<CompositionStrategy>,
    /// Number of neighbours.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Increasing training fractions in (0, 1].
    #[arg(long, value_delimiter = ',')]
    pub fractions: Vec<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tab-separated `form<TAB>lemma` dictionary.
    #[arg(long)]
    pub lemmas: Option<PathBuf>,
    /// Skip failing model/dataset cells instead of aborting.
    #[arg(long)]
    pub keep_going: bool,
    /// Concatenate the opening post before the post.
    #[arg(long)]
    pub swap_concat_order: bool,
    /// Fit PCA inside each training split.
    #[arg(long)]
    pub pca_per_fold: bool,
}

impl From<RunArgs> for Overrides {
    fn from(a: RunArgs) -> Self {
        Overrides {
            config: a.config,
            embeddings: a.embeddings,
            gold: a.gold,
            pairs: a.pairs,
            strategy: a.strategy,
            k: a.k,
            folds: a.folds,
            seed: a.seed,
            fractions: a.fractions,
            out: a.out,
            lemmas: a.lemmas,
            keep_going: a.keep_going,
            swap_concat_order: a.swap_concat_order,
            pca_per_fold: a.pca_per_fold,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AggArgs {
    /// CSV with pair_id, annotator_id, label columns.
    pub annotations: PathBuf,
    /// CSV with pair_id, post, op_post columns.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long, default_value = crate::config::DEFAULT_OUT)]
    pub out: PathBuf,
}

/// Process exit status for a command outcome.
pub fn exit_code<T>(result: &Result<T>) -> u8 {
    match result {
        Ok(_) => 0,
        Err(e) if e.is_input_error() => 2,
        Err(_) => 1,
    }
}

/// Runs a parsed command, reading the seed fallback from the environment.
/// Returns the summary table that `main` prints.
pub fn run(cli: Cli) -> Result<String> {
    let env_seed = std::env::var(SEED_ENV).ok();
    run_with_env(cli, env_seed.as_deref())
}

pub fn run_with_env(cli: Cli, env_seed: Option<&str>) -> Result<String> {
    match cli.command {
        Command::EvalSim(a) => {
            let cfg = RunConfig::resolve(a.into(), env_seed)?;
            cfg.require(true, true, false)?;
            eval_sim(&cfg)
        }
        Command::EvalRel(a) => {
            let cfg = RunConfig::resolve(a.into(), env_seed)?;
            cfg.require(true, false, true)?;
            eval_rel(&cfg)
        }
        Command::Curve(a) => {
            let cfg = RunConfig::resolve(a.into(), env_seed)?;
            cfg.require(true, false, true)?;
            curve(&cfg)
        }
        Command::DatasetAgg(a) => dataset_agg(&a),
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn file_stem(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' }).collect()
}

fn eval_sim(cfg: &RunConfig) -> Result<String> {
    prepare_out(&cfg.out)?;
    let gold = cfg
        .gold
        .iter()
        .map(|g| formats::load_judgments(&g.name, &g.path, g.kind))
        .collect::<Result<Vec<_>>>()?;
    let mut reports = Vec::new();
    let mut failures = 0usize;
    for model in &cfg.embeddings {
        let table = match formats::load_embeddings(&model.name, &model.path, None) {
            Ok(t) => t,
            Err(e) if cfg.keep_going => {
                error!("skipping {}: {e}", model.name);
                failures += gold.len();
                continue;
            }
            Err(e) => return Err(e),
        };
        info!("{}: {} tokens, dim {}", model.name, table.len(), table.dim());
        for set in &gold {
            match simeval::evaluate_similarity(&table, set) {
                Ok(r) => {
                    if r.pairs_dropped > 0 {
                        warn!(
                            "{} on {}: {} of {} pairs out of vocabulary",
                            r.model, r.dataset, r.pairs_dropped, r.pairs_total
                        );
                    }
                    reports.push(r);
                }
                Err(e) if cfg.keep_going => {
                    error!("skipping {} on {}: {e}", model.name, set.name());
                    failures += 1;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    if failures > 0 {
        warn!("{failures} model/dataset cells skipped");
    }
    formats::write_atomic(&cfg.out.join("similarity.csv"), report::similarity_csv(&reports).as_bytes())?;
    let table = report::similarity_table(&reports);
    formats::write_atomic(&cfg.out.join("similarity.txt"), table.as_bytes())?;
    Ok(table)
}

struct Prepared {
    records: Vec<PostPairRecord>,
    labels: Vec<bool>,
}

fn prepare_pairs(cfg: &RunConfig) -> Result<Prepared> {
    let path = cfg.pairs.as_deref().expect("checked by require");
    let records = formats::load_pairs(path)?;
    let summary = dataset::summarize(&records)?;
    info!(
        "{} pairs, {} related ({:.1}%), {} repeated opening posts",
        summary.records,
        summary.related,
        100.0 * summary.related_fraction(),
        summary.duplicate_op_posts
    );
    if summary.over_length_posts > 0 {
        warn!(
            "{} posts exceed {} characters",
            summary.over_length_posts,
            dataset::MAX_POST_CHARS
        );
    }
    let labels = records.iter().map(|r| r.is_related).collect();
    Ok(Prepared { records, labels })
}

fn options(cfg: &RunConfig, strategy: CompositionStrategy) -> FeatureOptions {
    FeatureOptions {
        strategy,
        order: if cfg.swap_concat_order { ConcatOrder::OpPostFirst } else { ConcatOrder::PostFirst },
        pca_per_fold: cfg.pca_per_fold,
    }
}

fn cv_config(cfg: &RunConfig) -> CvConfig {
    CvConfig { folds: cfg.folds, k: cfg.k, seed: cfg.seed }
}

/// Calls `cell` for every (model, strategy); failures are skipped under `--keep-going`.
fn for_each_cell(
    cfg: &RunConfig,
    data: &Prepared,
    mut cell: impl FnMut(&NamedPath, &EmbeddedPairs, CompositionStrategy, &PairFeatures) -> Result<()>,
) -> Result<()> {
    let lemmas = formats::load_lemmas(cfg.lemmas.as_deref())?;
    for model in &cfg.embeddings {
        let table = match formats::load_embeddings(&model.name, &model.path, None) {
            Ok(t) => t,
            Err(e) if cfg.keep_going => {
                error!("skipping {}: {e}", model.name);
                continue;
            }
            Err(e) => return Err(e),
        };
        let pairs = EmbeddedPairs::from_records(&table, &data.records, &lemmas);
        drop(table);
        let all_oov = pairs.all_oov_posts();
        if all_oov > 0 {
            warn!("{}: {all_oov} posts have no in-vocabulary token", model.name);
        }
        for &strategy in &cfg.strategies {
            let outcome = pipeline::build_features(&pairs, &options(cfg, strategy))
                .map_err(Error::from)
                .and_then(|features| cell(model, &pairs, strategy, &features));
            match outcome {
                Ok(()) => {}
                Err(e) if cfg.keep_going => error!("skipping {} / {strategy}: {e}", model.name),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

fn eval_rel(cfg: &RunConfig) -> Result<String> {
    prepare_out(&cfg.out)?;
    let data = prepare_pairs(cfg)?;
    let cv_cfg = cv_config(cfg);
    let mut rows = Vec::new();
    for_each_cell(cfg, &data, |model, pairs, strategy, features| {
        let plan = pipeline::plan_for(features, &data.labels, &cv_cfg, 1.0)?;
        let cv = parallel::cross_validate_plan(features, &data.labels, &plan, 1.0, cfg.k)?;
        let stem = format!("{}_{}", file_stem(&model.name), strategy.as_str());
        formats::write_atomic(&cfg.out.join(format!("cv_{stem}.csv")), report::cv_csv(&cv).as_bytes())?;
        if let PairFeatures::Fixed { pca: Some(pca), .. } = features {
            let path = cfg.out.join(format!("pca_{}.txt", file_stem(&model.name)));
            formats::write_atomic(&path, pca.to_text().as_bytes())?;
        }
        info!("{} / {strategy}: F1 {:.4} ± {:.4}", model.name, cv.mean_f1, cv.std_f1);
        rows.push(RelatednessRow {
            model: model.name.clone(),
            strategy,
            dim: features.dim(),
            folds: cfg.folds,
            k: cfg.k,
            mean_f1: cv.mean_f1,
            std_f1: cv.std_f1,
            all_oov_posts: pairs.all_oov_posts(),
        });
        Ok(())
    })?;
    formats::write_atomic(&cfg.out.join("relatedness.csv"), report::relatedness_csv(&rows).as_bytes())?;
    let table = report::relatedness_table(&rows);
    formats::write_atomic(&cfg.out.join("relatedness.txt"), table.as_bytes())?;
    Ok(table)
}

fn curve(cfg: &RunConfig) -> Result<String> {
    prepare_out(&cfg.out)?;
    let data = prepare_pairs(cfg)?;
    let cv_cfg = cv_config(cfg);
    let mut summary = String::new();
    for_each_cell(cfg, &data, |model, _, strategy, features| {
        let plan = pipeline::plan_for(features, &data.labels, &cv_cfg, cfg.fractions[0])?;
        let curve = parallel::learning_curve_plan(features, &data.labels, &plan, &cfg.fractions, cfg.k)?;
        let stem = format!("{}_{}", file_stem(&model.name), strategy.as_str());
        let text = report::curve_csv(&curve);
        formats::write_atomic(&cfg.out.join(format!("curve_{stem}.csv")), text.as_bytes())?;
        summary.push_str(&format!("# {} / {strategy}\n{text}", model.name));
        Ok(())
    })?;
    Ok(summary)
}

fn dataset_agg(args: &AggArgs) -> Result<String> {
    for p in std::iter::once(&args.annotations).chain(args.pairs.as_ref()) {
        if !p.is_file() {
            return Err(Error::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "file not found")));
        }
    }
    let annotations = formats::load_annotations(&args.annotations)?;
    let labels = dataset::majority_labels(&annotations)?;
    let stats = dataset::agreement_stats(&annotations)?;
    prepare_out(&args.out)?;
    let pairs_csv = match &args.pairs {
        Some(path) => {
            let texts: std::collections::HashMap<String, (String, String)> = formats::load_pair_texts(path)?
                .into_iter()
                .map(|(id, post, op)| (id, (post, op)))
                .collect();
            let records = labels
                .iter()
                .map(|(id, label)| {
                    let (post, op_post) = texts
                        .get(id)
                        .ok_or_else(|| Error::Config(format!("{}: no text for pair {id:?}", path.display())))?;
                    Ok(PostPairRecord { post: post.clone(), op_post: op_post.clone(), is_related: *label })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut buf = Vec::new();
            formats::write_pairs(&records, &mut buf)?;
            buf
        }
        None => {
            let mut buf = Vec::new();
            formats::write_pair_labels(&labels, &mut buf)?;
            buf
        }
    };
    formats::write_atomic(&args.out.join("pairs.csv"), &pairs_csv)?;
    let text = report::agreement_text(&stats, &labels);
    formats::write_atomic(&args.out.join("agreement.txt"), text.as_bytes())?;
    Ok(text)
}
