use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use log::info;
use wordspace::geo::{artificial_sentences, select_countries, SimilarityQuery, DEFAULT_EXCLUDED};
use wordspace::io::{
    emit_report, parse_csv_table, read_cities, read_countries, read_embeddings, read_lexicon, read_lines,
    read_similarity_pairs, read_vocab, Cell, ReportFormat, RunConfig, Table,
};
use wordspace::pipeline::{self, GeoSetup, IdentitySetup, TheoryCheck};

/// Geometry of contextual word-embedding clouds.
#[derive(Debug, Parser)]
#[command(name = "wordspace", version, about)]
struct Cli {
    /// Flat `key = value` run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Core-set approximation tolerance.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Report directory (default `reports`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json-lines.
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,
    #[command(subcommand)]
    command: Command,
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: wordspace::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-word cohort radii, optionally joined with a lexicon.
    Meb {
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Also solve each full cohort once instead of only sampled radii.
        #[arg(long)]
        full: bool,
    },
    /// Word-identity probes binned by lexical properties.
    ProbeIdentity {
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        source: Option<String>,
    },
    /// Context-retrieval probes from mask-token embeddings.
    ProbeContext {
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Cosine-versus-human calibration and residual correlations.
    Distortion {
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        source: Option<String>,
    },
    /// Country and city analyses.
    Geo {
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        countries: Option<PathBuf>,
        #[arg(long)]
        cities: Option<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Sentence templates; writes the artificial contexts as a table.
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Country names to drop, one per line (default: the built-in list).
        #[arg(long)]
        excluded: Option<PathBuf>,
        #[arg(long)]
        single_word_only: bool,
    },
    /// Monte Carlo check of the cosine-distance range bound.
    TheoryCheck {
        #[arg(long, default_value_t = 768)]
        dim: usize,
        #[arg(long, default_value_t = 10.0)]
        center_norm: f64,
        #[arg(long, default_value_t = 10)]
        radii: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Re-emit CSV report tables in `--format`.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 3 for a broken invariant anywhere in the error chain, 2 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    let invariant = err
        .chain()
        .filter_map(|e| e.downcast_ref::<wordspace::Error>())
        .any(wordspace::Error::is_invariant);
    if invariant {
        3
    } else {
        2
    }
}

fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| anyhow!("no {what} file given (flag --{what} or config key `{what}`)"))
}

fn pick(flag: Option<PathBuf>, config: &mut Option<PathBuf>) {
    if flag.is_some() {
        *config = flag;
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(e) = cli.epsilon {
        cfg.epsilon = e;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    let format = cli.format;
    let tables = match cli.command {
        Command::Meb { embeddings, lexicon, full } => {
            pick(embeddings, &mut cfg.embeddings);
            pick(lexicon, &mut cfg.lexicon);
            cfg.validate()?;
            let records = read_embeddings(require(&cfg.embeddings, "embeddings")?)?;
            let lexicon = cfg.lexicon.as_deref().map(read_lexicon).transpose()?;
            let cohorts = pipeline::cohorts_by_source(&records)?;
            info!("{} records in {} sources", records.len(), cohorts.len());
            let mut tables = pipeline::radius_tables(&cohorts, lexicon.as_ref(), &cfg.radius_params())?;
            if full {
                tables.push(pipeline::meb_table(&cohorts, cfg.epsilon)?);
            }
            tables
        }
        Command::ProbeIdentity { embeddings, lexicon, source } => {
            pick(embeddings, &mut cfg.embeddings);
            pick(lexicon, &mut cfg.lexicon);
            cfg.validate()?;
            let records = read_embeddings(require(&cfg.embeddings, "embeddings")?)?;
            let lexicon = read_lexicon(require(&cfg.lexicon, "lexicon")?)?;
            let (source, cohorts) = pipeline::single_source(pipeline::cohorts_by_source(&records)?, source.as_deref())?;
            info!("identity probes over {} words of source {source}", cohorts.len());
            let setup = IdentitySetup {
                models: cfg.models,
                classes_per_model: cfg.classes_per_model,
                test_per_class: cfg.test_per_class,
                freq_edges: cfg.freq_edges.clone(),
                seed: cfg.seed,
            };
            pipeline::identity_tables(&cohorts, &lexicon, &setup, &cfg.train_options())?
        }
        Command::ProbeContext { embeddings, lexicon } => {
            pick(embeddings, &mut cfg.embeddings);
            pick(lexicon, &mut cfg.lexicon);
            cfg.validate()?;
            let records = read_embeddings(require(&cfg.embeddings, "embeddings")?)?;
            let lexicon = read_lexicon(require(&cfg.lexicon, "lexicon")?)?;
            pipeline::context_tables(&records, &lexicon, cfg.contexts, &cfg.train_options())?
        }
        Command::Distortion { embeddings, pairs, lexicon, source } => {
            pick(embeddings, &mut cfg.embeddings);
            pick(pairs, &mut cfg.pairs);
            pick(lexicon, &mut cfg.lexicon);
            cfg.validate()?;
            let records = read_embeddings(require(&cfg.embeddings, "embeddings")?)?;
            let pairs = read_similarity_pairs(require(&cfg.pairs, "pairs")?)?;
            let lexicon = cfg.lexicon.as_deref().map(read_lexicon).transpose()?;
            let (source, cohorts) = pipeline::single_source(pipeline::cohorts_by_source(&records)?, source.as_deref())?;
            let records: Vec<_> = records.into_iter().filter(|r| r.source == source).collect();
            info!("{} pairs over {} cohorts of source {source}", pairs.len(), cohorts.len());
            pipeline::distortion_tables(pairs, &records, &cohorts, lexicon.as_ref(), &cfg.radius_params())?
        }
        Command::Geo {
            embeddings,
            countries,
            cities,
            vocab,
            templates,
            excluded,
            single_word_only,
        } => {
            pick(embeddings, &mut cfg.embeddings);
            pick(countries, &mut cfg.countries);
            pick(cities, &mut cfg.cities);
            pick(vocab, &mut cfg.vocab);
            pick(templates, &mut cfg.templates);
            cfg.single_word_only |= single_word_only;
            cfg.validate()?;
            let countries = read_countries(require(&cfg.countries, "countries")?)?;
            let excluded: Vec<String> = match excluded {
                Some(p) => read_lines(&p)?.into_iter().map(|l| l.trim().to_string()).collect(),
                None => DEFAULT_EXCLUDED.iter().map(|s| s.to_string()).collect(),
            };
            let mut tables = Vec::new();
            if let Some(p) = &cfg.templates {
                tables.push(sentence_table(&read_lines(p)?, &countries, &excluded, cfg.single_word_only)?);
            }
            if let Some(p) = &cfg.embeddings {
                let records = read_embeddings(p)?;
                let cohorts = pipeline::cohorts_by_source(&records)?;
                let coverage = match (&cfg.cities, &cfg.vocab) {
                    (Some(c), Some(v)) => Some((read_cities(c)?, read_vocab(v)?.into_iter().collect::<HashSet<_>>())),
                    _ => None,
                };
                let setup = GeoSetup {
                    excluded,
                    single_word_only: cfg.single_word_only,
                    query: SimilarityQuery {
                        threshold: cfg.threshold,
                        instances: cfg.instances,
                        reduction: cfg.reduction,
                        seed: cfg.seed,
                    },
                };
                let coverage_ref = coverage.as_ref().map(|(c, v)| (c.as_slice(), v));
                tables.extend(pipeline::geo_tables(&countries, &cohorts, coverage_ref, &setup, &cfg.radius_params())?);
            } else if tables.is_empty() {
                return Err(anyhow!("geo needs --embeddings, --templates or both"));
            }
            tables
        }
        Command::TheoryCheck {
            dim,
            center_norm,
            radii,
            samples,
        } => pipeline::theory_check(&TheoryCheck {
            dim,
            center_norm,
            radii,
            samples,
            seed: cfg.seed,
        })?,
        Command::Report { inputs } => inputs
            .iter()
            .map(|p| {
                let name = p
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .ok_or_else(|| anyhow!("bad report file name {}", p.display()))?;
                Ok(parse_csv_table(p, name)?)
            })
            .collect::<Result<Vec<Table>>>()?,
    };
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("reports"));
    let written = emit_report(&tables, &out, format).with_context(|| format!("writing reports to {}", out.display()))?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn sentence_table(
    templates: &[String],
    countries: &[wordspace::geo::CountryRecord],
    excluded: &[String],
    single_word_only: bool,
) -> Result<Table> {
    let mut table = Table::new("artificial_sentences", &["country", "template", "sentence"]);
    for c in select_countries(countries, excluded, single_word_only) {
        for (i, s) in artificial_sentences(templates, &c.name)?.into_iter().enumerate() {
            table.push(vec![c.name.as_str().into(), Cell::from(i), s.into()]);
        }
    }
    Ok(table)
}
