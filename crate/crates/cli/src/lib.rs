//! Command implementations behind the `tablemap` binary.

use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tablemap::answer::GoldLabels;
use tablemap::harvest::{extract_tables, write_jsonl};
use tablemap::index::Index;
use tablemap::model::{GridSpec, TuneOutcome};
use tablemap::pipeline::{
    bin_by_baseline, evaluate, run_query, tune, EvalReport, LabeledQuery, LabelingReport, QueryEntry, QueryOutcome,
    Timings,
};
use tablemap::{Algorithm, Config, Query, RawDocument, WebTable};

pub const CONFIG_ENV: &str = "TABLEMAP_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "tablemap", version, about = "Column-keyword search over HTML tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract data tables from HTML files, directories or JSON-lines documents.
    Harvest(HarvestArgs),
    /// Build an index directory from a harvested corpus.
    Index(IndexArgs),
    /// Answer one column-keyword query.
    Query(QueryArgs),
    /// Report F1 error of one or more algorithms against gold labels.
    Eval(EvalArgs),
    /// Fit model weights by grid search and write them to a config file.
    Tune(TuneArgs),
}

#[derive(Debug, Args)]
pub struct HarvestArgs {
    /// `.html`/`.htm` files, directories of them, or `.jsonl` files of `{url, html}` records.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    pub corpus: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Settings shared by commands that run the pipeline.
#[derive(Debug, Clone, Args)]
pub struct RunOptions {
    #[arg(long)]
    pub index: PathBuf,
    /// TOML or JSON config; falls back to the environment variable.
    #[arg(long, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub no_stage2: bool,
    #[arg(long)]
    pub pmi2: bool,
}

impl RunOptions {
    pub fn new(index: impl Into<PathBuf>) -> Self {
        Self {
            index: index.into(),
            config: None,
            seed: 0,
            top_k: None,
            no_stage2: false,
            pmi2: false,
        }
    }

    pub fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p).with_context(|| format!("loading config {}", p.display()))?,
            None => Config::default(),
        };
        if let Some(k) = self.top_k {
            cfg.retrieval.top_k = k;
        }
        if self.no_stage2 {
            cfg.retrieval.stage2 = false;
        }
        if self.pmi2 {
            cfg.model.use_pmi2 = true;
        }
        Ok(cfg)
    }

    pub fn load_index(&self) -> Result<Index> {
        if !self.index.join("manifest.json").is_file() {
            bail!("no index found at {}", self.index.display());
        }
        Index::load(&self.index).with_context(|| format!("loading index {}", self.index.display()))
    }
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub run: RunOptions,
    /// Pipe-separated column keywords, e.g. "country|capital".
    #[arg(long)]
    pub columns: Option<String>,
    /// One column's keywords; repeat for more columns.
    #[arg(long = "column")]
    pub column: Vec<String>,
    #[arg(long, default_value = "table-centric")]
    pub algo: Algorithm,
    /// Directory for answer.csv, answer.json, labeling.json and timings.json.
    /// Without it the answer CSV goes to stdout.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

impl QueryArgs {
    pub fn query(&self) -> Result<Query> {
        let mut cols: Vec<String> = Vec::new();
        if let Some(spec) = &self.columns {
            cols.extend(Query::parse(spec).columns);
        }
        cols.extend(self.column.iter().map(|c| c.trim().to_string()).filter(|c| !c.is_empty()));
        if cols.is_empty() {
            bail!("give at least one column with --columns or --column");
        }
        Ok(Query::new(cols))
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub run: RunOptions,
    /// JSON array of `{id, columns}`.
    #[arg(long)]
    pub queries: PathBuf,
    /// JSON array of `{query_id, labels: [[table_id, column, label]]}`.
    #[arg(long)]
    pub gold: PathBuf,
    /// Algorithms to compare; defaults to independent and table-centric.
    #[arg(long = "algo")]
    pub algos: Vec<Algorithm>,
    /// Also report mean errors in this many groups binned by the first algorithm's error.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Write the full report as JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub run: RunOptions,
    /// JSON array of `{id, columns, labels}`.
    #[arg(long)]
    pub train: PathBuf,
    /// TOML or JSON table of candidate values for w1..w5 and we.
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long, default_value = "table-centric")]
    pub algo: Algorithm,
    /// Config file to write.
    #[arg(short, long)]
    pub output: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Harvest(a) => {
            let n = cmd_harvest(&a.inputs, &a.output)?;
            eprintln!("harvested {n} tables into {}", a.output.display());
        }
        Command::Index(a) => {
            let n = cmd_index(&a.corpus, &a.output)?;
            eprintln!("indexed {n} tables into {}", a.output.display());
        }
        Command::Query(a) => {
            let q = a.query()?;
            let out = cmd_query(&a.run, &q, a.algo)?;
            match &a.out {
                Some(dir) => write_query_outputs(dir, &q, a.algo, a.run.seed, &out)?,
                None => {
                    print!("{}", out.answer.to_csv()?);
                    eprintln!("{}", format_timings(&out.timings));
                }
            }
        }
        Command::Eval(a) => {
            let algos = if a.algos.is_empty() {
                vec![Algorithm::Independent, Algorithm::TableCentric]
            } else {
                a.algos.clone()
            };
            let report = cmd_eval(&a.run, &a.queries, &a.gold, &algos)?;
            print!("{}", format_eval(&report, a.bins));
            if let Some(p) = &a.json {
                fs::write(p, serde_json::to_string_pretty(&report)?)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::Tune(a) => {
            let out = cmd_tune(&a.run, &a.train, &a.grid, a.algo, &a.output)?;
            let [w1, w2, w3, w4, w5, we] = out.weights.trainable();
            println!(
                "w1={w1} w2={w2} w3={w3} w4={w4} w5={w5} we={we} mean F1 error {:.4} over {} grid points",
                out.mean_error, out.evaluated
            );
        }
    }
    Ok(())
}

fn is_html(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("html") || e.eq_ignore_ascii_case("htm"))
}

/// Documents named by the inputs. HTML files take their file name as URL so
/// table ids do not depend on the working directory.
pub fn read_documents(inputs: &[PathBuf]) -> Result<Vec<RawDocument>> {
    let mut docs = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut files: Vec<PathBuf> = walkdir::WalkDir::new(input)
                .sort_by_file_name()
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .map(|e| e.into_path())
                .filter(|p| is_html(p))
                .collect();
            files.sort();
            for f in files {
                docs.push(html_document(&f)?);
            }
        } else if input.extension().is_some_and(|e| e == "jsonl") {
            let file = fs::File::open(input).with_context(|| format!("opening {}", input.display()))?;
            for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let doc: RawDocument = serde_json::from_str(&line)
                    .with_context(|| format!("{} line {}", input.display(), i + 1))?;
                docs.push(doc);
            }
        } else {
            docs.push(html_document(input)?);
        }
    }
    Ok(docs)
}

fn html_document(path: &Path) -> Result<RawDocument> {
    let html = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let url = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(RawDocument { url, html })
}

/// Returns the number of tables written.
pub fn cmd_harvest(inputs: &[PathBuf], output: &Path) -> Result<usize> {
    let mut tables: Vec<WebTable> = Vec::new();
    for doc in read_documents(inputs)? {
        match extract_tables(&doc) {
            Ok(ts) => tables.extend(ts),
            Err(e) => eprintln!("skipping {}: {e}", doc.url),
        }
    }
    let mut buf = Vec::new();
    write_jsonl(&tables, &mut buf)?;
    fs::write(output, buf).with_context(|| format!("writing {}", output.display()))?;
    Ok(tables.len())
}

pub fn cmd_index(corpus: &Path, output: &Path) -> Result<usize> {
    let file = fs::File::open(corpus).with_context(|| format!("opening {}", corpus.display()))?;
    let tables = tablemap::harvest::read_jsonl(std::io::BufReader::new(file))?;
    let index = Index::build(tables)?;
    index.save(output)?;
    Ok(index.len())
}

pub fn cmd_query(run: &RunOptions, query: &Query, algo: Algorithm) -> Result<QueryOutcome> {
    let cfg = run.config()?;
    let index = run.load_index()?;
    Ok(run_query(&index, query, &cfg, algo, run.seed)?)
}

/// Writes the answer, labeling and timings. Only timings.json varies between
/// identical runs.
pub fn write_query_outputs(dir: &Path, query: &Query, algo: Algorithm, seed: u64, out: &QueryOutcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, text: String| {
        fs::write(dir.join(name), text).with_context(|| format!("writing {}", dir.join(name).display()))
    };
    write("answer.csv", out.answer.to_csv()?)?;
    write("answer.json", serde_json::to_string_pretty(&out.answer)?)?;
    write(
        "labeling.json",
        serde_json::to_string_pretty(&LabelingReport::new(query, algo, seed, out))?,
    )?;
    write("timings.json", serde_json::to_string_pretty(&out.timings)?)
}

pub fn format_timings(t: &Timings) -> String {
    format!(
        "probe {:.4}s, read/parse {:.4}s, column map {:.4}s, consolidate {:.4}s, total {:.4}s",
        t.probe,
        t.read_parse,
        t.column_map,
        t.consolidate,
        t.total()
    )
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn cmd_eval(run: &RunOptions, queries: &Path, gold: &Path, algos: &[Algorithm]) -> Result<EvalReport> {
    let cfg = run.config()?;
    let index = run.load_index()?;
    let queries: Vec<QueryEntry> = read_json(queries)?;
    let gold: Vec<GoldLabels> = read_json(gold)?;
    Ok(evaluate(&index, &queries, &gold, &cfg, algos, run.seed)?)
}

/// Plain-text report with errors as percentages.
pub fn format_eval(report: &EvalReport, bins: Option<usize>) -> String {
    let mut s = String::from("query");
    for a in &report.algorithms {
        s += &format!("\t{a}");
    }
    s.push('\n');
    let pct = |e: Option<f64>| e.map_or_else(|| "-".to_string(), |e| format!("{:.1}", 100.0 * e));
    for row in &report.rows {
        s += &row.query_id;
        for &e in &row.errors {
            s += &format!("\t{}", pct(e));
        }
        if let Some(n) = &row.note {
            s += &format!("\t# {n}");
        }
        s.push('\n');
    }
    s += "mean";
    for &m in &report.means {
        s += &format!("\t{}", pct(m));
    }
    s.push('\n');
    if let Some(k) = bins {
        for (g, means) in bin_by_baseline(report, 0, k).iter().enumerate() {
            s += &format!("group {}", g + 1);
            for &m in means {
                s += &format!("\t{}", pct(Some(m)));
            }
            s.push('\n');
        }
    }
    s
}

pub fn cmd_tune(run: &RunOptions, train: &Path, grid: &Path, algo: Algorithm, output: &Path) -> Result<TuneOutcome> {
    let mut cfg = run.config()?;
    let index = run.load_index()?;
    let train: Vec<LabeledQuery> = read_json(train)?;
    let grid_text = fs::read_to_string(grid).with_context(|| format!("reading {}", grid.display()))?;
    let grid: GridSpec = if grid.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&grid_text)?
    } else {
        toml::from_str(&grid_text)?
    };
    let out = tune(&index, &train, &grid, &cfg, algo, run.seed)?;
    cfg.model = out.weights;
    let text = format!(
        "# mean F1 error {} with {} over {} grid points\n{}",
        out.mean_error,
        algo,
        out.evaluated,
        cfg.to_toml()?
    );
    fs::write(output, text).with_context(|| format!("writing {}", output.display()))?;
    Ok(out)
}
