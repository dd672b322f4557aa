//! Three-field inverted index over harvested tables, with boosted probes and
//! two-stage candidate retrieval.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::BufReader;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RetrievalConfig;
use crate::harvest::{read_jsonl, write_jsonl, HarvestError};
use crate::score::{CorpusSets, Query, TermWeights};
use crate::table::WebTable;
use crate::text::tokenize;

pub const FORMAT_VERSION: u32 = 1;
pub const BOOSTS: [f64; 3] = [2.0, 1.5, 1.0];
pub const FIELD_NAMES: [&str; 3] = ["header", "context", "content"];

const MANIFEST: &str = "manifest.json";
const POSTINGS: &str = "postings.json";
const TABLES: &str = "tables.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate table id {0}")]
    DuplicateId(String),
    #[error("index path {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("index file {file}")]
    Format {
        file: String,
        source: serde_json::Error,
    },
    #[error("unsupported index format version {0}")]
    Version(u32),
    #[error("index is inconsistent: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Harvest(#[from] HarvestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    Header = 0,
    Context = 1,
    Content = 2,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Header, Field::Context, Field::Content];
}

/// Token multisets of one table, per field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldedDoc {
    pub table_id: String,
    pub fields: [Vec<String>; 3],
}

impl FieldedDoc {
    /// Title rows and context snippets both land in the context field.
    pub fn from_table(t: &WebTable) -> Self {
        let header = t.header.iter().flatten().flat_map(|c| tokenize(c)).collect();
        let context = t
            .title_rows
            .iter()
            .map(String::as_str)
            .chain(t.context.iter().map(|s| s.text.as_str()))
            .flat_map(tokenize)
            .collect();
        let content = t.body.iter().flatten().flat_map(|c| tokenize(c)).collect();
        Self {
            table_id: t.id.clone(),
            fields: [header, context, content],
        }
    }
}

/// `term -> [(doc, term frequency)]`, docs ascending.
type Postings = BTreeMap<String, Vec<(u32, u32)>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    doc_count: usize,
    fields: Vec<String>,
    boosts: Vec<f64>,
    term_count: usize,
    files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PostingsFile {
    /// Documents containing each term in any field.
    df: BTreeMap<String, u32>,
    fields: Vec<Postings>,
}

/// Corpus statistics behind the term weights.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexStats {
    pub doc_count: usize,
    pub df: BTreeMap<String, u32>,
    /// Token count per document and field.
    pub field_lengths: Vec<[u32; 3]>,
}

#[derive(Debug, Clone)]
pub struct Index {
    tables: Vec<WebTable>,
    stats: IndexStats,
    postings: [Postings; 3],
    /// Euclidean norm of each document's TI-weighted term-presence vector.
    norms: Vec<[f64; 3]>,
}

impl Index {
    /// Builds an index; an empty corpus gives an index that matches nothing.
    pub fn build(tables: Vec<WebTable>) -> Result<Self, IndexError> {
        let mut seen = BTreeSet::new();
        for t in &tables {
            if !seen.insert(t.id.as_str()) {
                return Err(IndexError::DuplicateId(t.id.clone()));
            }
        }
        let mut postings: [Postings; 3] = Default::default();
        let mut df: BTreeMap<String, u32> = BTreeMap::new();
        for (d, t) in tables.iter().enumerate() {
            let doc = FieldedDoc::from_table(t);
            let mut terms = BTreeSet::new();
            for (f, toks) in doc.fields.iter().enumerate() {
                let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
                for w in toks {
                    *tf.entry(w).or_insert(0) += 1;
                    terms.insert(w.clone());
                }
                for (w, n) in tf {
                    postings[f].entry(w.to_string()).or_default().push((d as u32, n));
                }
            }
            for w in terms {
                *df.entry(w).or_insert(0) += 1;
            }
        }
        Self::assemble(tables, df, postings)
    }

    fn assemble(tables: Vec<WebTable>, df: BTreeMap<String, u32>, postings: [Postings; 3]) -> Result<Self, IndexError> {
        let n = tables.len();
        let mut field_lengths = vec![[0u32; 3]; n];
        let mut sq = vec![[0.0f64; 3]; n];
        let stats_n = n;
        let ti = |w: &str| ti_formula(stats_n, df.get(w).copied().unwrap_or(1));
        for (f, field) in postings.iter().enumerate() {
            for (w, list) in field {
                let weight = ti(w).powi(2);
                for &(d, tf) in list {
                    let d = d as usize;
                    if d >= n {
                        return Err(IndexError::Corrupt(format!("posting for {w:?} names document {d}")));
                    }
                    field_lengths[d][f] += tf;
                    sq[d][f] += weight;
                }
            }
        }
        let norms = sq.iter().map(|r| r.map(f64::sqrt)).collect();
        Ok(Self {
            tables,
            stats: IndexStats {
                doc_count: n,
                df,
                field_lengths,
            },
            postings,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn stats(&self) -> &IndexStats {
        &self.stats
    }

    pub fn tables(&self) -> &[WebTable] {
        &self.tables
    }

    pub fn table(&self, doc: usize) -> &WebTable {
        &self.tables[doc]
    }

    pub fn position(&self, table_id: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.id == table_id)
    }

    /// `ln(1 + N / df)`; unseen terms count as `df = 1`.
    pub fn tfidf_weight(&self, term: &str) -> f64 {
        ti_formula(self.stats.doc_count, self.stats.df.get(term).copied().unwrap_or(1))
    }

    /// Documents scored by `Σ_f boost_f · cos(K, field_f)`, best first, ties
    /// by table id. Field vectors weight each present term by TI. Only
    /// positive scores are returned.
    pub fn probe(&self, keywords: &[String], k: usize) -> Vec<(usize, f64)> {
        let terms: BTreeSet<&str> = keywords.iter().map(String::as_str).collect();
        if k == 0 || terms.is_empty() {
            return Vec::new();
        }
        let qnorm = terms.iter().map(|w| self.tfidf_weight(w).powi(2)).sum::<f64>().sqrt();
        let mut scores: BTreeMap<usize, f64> = BTreeMap::new();
        for f in Field::ALL {
            let f = f as usize;
            for w in &terms {
                let Some(list) = self.postings[f].get(*w) else { continue };
                let weight = self.tfidf_weight(w).powi(2);
                for &(d, _) in list {
                    let d = d as usize;
                    let denom = qnorm * self.norms[d][f];
                    if denom > 0.0 {
                        *scores.entry(d).or_insert(0.0) += BOOSTS[f] * weight / denom;
                    }
                }
            }
        }
        let mut ranked: Vec<(usize, f64)> = scores.into_iter().filter(|&(_, s)| s > 0.0).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| self.tables[a.0].id.cmp(&self.tables[b.0].id)));
        ranked.truncate(k);
        ranked
    }

    fn docs_with_all(&self, fields: &[Field], tokens: &[String]) -> BTreeSet<u32> {
        let mut acc: Option<BTreeSet<u32>> = None;
        for w in tokens {
            let mut docs = BTreeSet::new();
            for &f in fields {
                if let Some(list) = self.postings[f as usize].get(w) {
                    docs.extend(list.iter().map(|p| p.0));
                }
            }
            acc = Some(match acc {
                None => docs,
                Some(a) => a.intersection(&docs).copied().collect(),
            });
        }
        acc.unwrap_or_default()
    }

    pub fn save(&self, dir: &Path) -> Result<(), IndexError> {
        let io = |source| IndexError::Io {
            path: dir.display().to_string(),
            source,
        };
        fs::create_dir_all(dir).map_err(io)?;
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            doc_count: self.len(),
            fields: FIELD_NAMES.iter().map(|s| s.to_string()).collect(),
            boosts: BOOSTS.to_vec(),
            term_count: self.stats.df.len(),
            files: vec![POSTINGS.into(), TABLES.into()],
        };
        let postings = PostingsFile {
            df: self.stats.df.clone(),
            fields: self.postings.to_vec(),
        };
        write_json(dir, MANIFEST, &manifest)?;
        write_json(dir, POSTINGS, &postings)?;
        let mut buf = Vec::new();
        write_jsonl(&self.tables, &mut buf)?;
        fs::write(dir.join(TABLES), buf).map_err(io)
    }

    pub fn load(dir: &Path) -> Result<Self, IndexError> {
        let read = |file: &str| {
            fs::read_to_string(dir.join(file)).map_err(|source| IndexError::Io {
                path: dir.join(file).display().to_string(),
                source,
            })
        };
        let parse_err = |file: &str| {
            let file = file.to_string();
            move |source| IndexError::Format { file, source }
        };
        let manifest: Manifest = serde_json::from_str(&read(MANIFEST)?).map_err(parse_err(MANIFEST))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(IndexError::Version(manifest.format_version));
        }
        let postings: PostingsFile = serde_json::from_str(&read(POSTINGS)?).map_err(parse_err(POSTINGS))?;
        let file = fs::File::open(dir.join(TABLES)).map_err(|source| IndexError::Io {
            path: dir.join(TABLES).display().to_string(),
            source,
        })?;
        let tables = read_jsonl(BufReader::new(file))?;
        if tables.len() != manifest.doc_count {
            return Err(IndexError::Corrupt(format!(
                "manifest lists {} tables, found {}",
                manifest.doc_count,
                tables.len()
            )));
        }
        let fields: [Postings; 3] = postings
            .fields
            .try_into()
            .map_err(|_| IndexError::Corrupt("expected three posting fields".into()))?;
        Self::assemble(tables, postings.df, fields)
    }

    /// Postings of one field, for inspection.
    pub fn postings(&self, field: Field) -> &BTreeMap<String, Vec<(u32, u32)>> {
        &self.postings[field as usize]
    }
}

fn write_json<T: Serialize>(dir: &Path, file: &str, value: &T) -> Result<(), IndexError> {
    let text = serde_json::to_string_pretty(value).map_err(|source| IndexError::Format {
        file: file.into(),
        source,
    })?;
    fs::write(dir.join(file), text).map_err(|source| IndexError::Io {
        path: dir.join(file).display().to_string(),
        source,
    })
}

fn ti_formula(n: usize, df: u32) -> f64 {
    (1.0 + n as f64 / f64::from(df.max(1))).ln()
}

impl TermWeights for Index {
    fn ti(&self, term: &str) -> f64 {
        self.tfidf_weight(term)
    }
}

impl CorpusSets for Index {
    fn header_tables(&self, tokens: &[String]) -> BTreeSet<u32> {
        self.docs_with_all(&[Field::Header, Field::Context], tokens)
    }

    fn content_tables(&self, tokens: &[String]) -> BTreeSet<u32> {
        self.docs_with_all(&[Field::Content], tokens)
    }
}

/// What each retrieval stage contributed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retrieval {
    pub stage1: Vec<usize>,
    /// Tables whose rows seeded the second probe.
    pub seeds: Vec<usize>,
    pub sampled_rows: Vec<Vec<String>>,
    pub stage2: Vec<usize>,
    /// Stage-1 tables followed by new stage-2 tables.
    pub candidates: Vec<usize>,
}

/// Probe with all query keywords; if the mapper is very sure about up to
/// `stage2_tables` of the hits, probe again with rows sampled from them.
/// `relevance` returns a relevance probability for each table it is given.
pub fn two_stage_retrieve(
    index: &Index,
    query: &Query,
    cfg: &RetrievalConfig,
    seed: u64,
    relevance: &mut dyn FnMut(&[usize]) -> Vec<f64>,
) -> Retrieval {
    let keywords = query.all_tokens();
    let stage1: Vec<usize> = index.probe(&keywords, cfg.top_k).into_iter().map(|p| p.0).collect();
    let mut out = Retrieval {
        stage1: stage1.clone(),
        seeds: Vec::new(),
        sampled_rows: Vec::new(),
        stage2: Vec::new(),
        candidates: stage1.clone(),
    };
    if !cfg.stage2 || stage1.is_empty() {
        return out;
    }
    let probs = relevance(&stage1);
    let mut confident: Vec<(usize, f64)> = stage1
        .iter()
        .zip(probs)
        .filter(|&(_, p)| p >= cfg.stage2_threshold)
        .map(|(&d, p)| (d, p))
        .collect();
    confident.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| index.table(a.0).id.cmp(&index.table(b.0).id)));
    confident.truncate(cfg.stage2_tables);
    if confident.is_empty() {
        return out;
    }
    out.seeds = confident.iter().map(|c| c.0).collect();

    let pool: Vec<&Vec<String>> = out.seeds.iter().flat_map(|&d| index.table(d).body.iter()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.sampled_rows = pool
        .choose_multiple(&mut rng, cfg.stage2_rows.min(pool.len()))
        .map(|r| (*r).clone())
        .collect();

    let mut terms: BTreeSet<String> = keywords.into_iter().collect();
    terms.extend(out.sampled_rows.iter().flatten().flat_map(|c| tokenize(c)));
    let terms: Vec<String> = terms.into_iter().collect();
    out.stage2 = index.probe(&terms, cfg.top_k).into_iter().map(|p| p.0).collect();
    for &d in &out.stage2 {
        if !out.candidates.contains(&d) {
            out.candidates.push(d);
        }
    }
    out
}
