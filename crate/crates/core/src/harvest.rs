//! HTML to [`WebTable`]: span expansion, data-table filtering, title/header
//! detection and scored context snippets.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use ego_tree::NodeId;
use scraper::{ElementRef, Html, Node, Selector};

use crate::table::{ContextSnippet, RawDocument, WebTable};
use crate::text::{is_numeric, squash_whitespace};

#[derive(Debug, thiserror::Error)]
pub enum HarvestError {
    #[error("document {0} is empty")]
    EmptyDocument(String),
    #[error("document {0} has no element tree")]
    Unparseable(String),
    #[error("corpus line {line}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const MIN_COLUMNS: usize = 2;
const MIN_BODY_ROWS: usize = 3;
const MAX_CELL_CHARS: usize = 500;
const MIN_FILLED: f64 = 0.5;
const SIMILAR_SHARE: f64 = 0.7;
const LEFT_WEIGHT: f64 = 1.0;
const RIGHT_WEIGHT: f64 = 0.7;

const FORMAT_TAGS: [&str; 13] = ["h1", "h2", "h3", "h4", "h5", "h6", "b", "strong", "i", "em", "u", "title", "caption"];

/// Visual markers of one cell.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CellFormat {
    pub bold: bool,
    pub italic: bool,
    pub underline: bool,
    pub th: bool,
    /// Background colour and CSS classes of the cell and its row.
    pub layout: String,
    /// The cell is a colspan copy of the cell to its left.
    pub span_copy: bool,
}

struct RowSignal {
    bold: bool,
    italic: bool,
    underline: bool,
    capitalized: bool,
    th: bool,
    layout: String,
    numeric: bool,
    mean_len: f64,
}

fn majority(flags: impl Iterator<Item = bool>) -> bool {
    let (mut yes, mut all) = (0, 0);
    for f in flags {
        all += 1;
        yes += f as usize;
    }
    all > 0 && 2 * yes > all
}

fn row_signal(cells: &[String], formats: &[CellFormat]) -> RowSignal {
    let filled: Vec<usize> = (0..cells.len()).filter(|&c| !cells[c].trim().is_empty()).collect();
    let flag = |f: fn(&CellFormat) -> bool| majority(filled.iter().map(|&c| f(&formats[c])));
    let mut layouts: Vec<&str> = formats.iter().map(|f| f.layout.as_str()).collect();
    layouts.sort_unstable();
    layouts.dedup();
    let lens: Vec<usize> = filled.iter().map(|&c| cells[c].trim().chars().count()).collect();
    RowSignal {
        bold: flag(|f| f.bold || f.th),
        italic: flag(|f| f.italic),
        underline: flag(|f| f.underline),
        th: flag(|f| f.th),
        capitalized: majority(filled.iter().map(|&c| cells[c].trim().starts_with(char::is_uppercase))),
        layout: layouts.join(" "),
        numeric: majority(filled.iter().map(|&c| is_numeric(&cells[c]))),
        mean_len: if lens.is_empty() {
            0.0
        } else {
            lens.iter().sum::<usize>() as f64 / lens.len() as f64
        },
    }
}

fn similar(a: &RowSignal, b: &RowSignal) -> bool {
    let mut agree = 0;
    let mut compared = 0;
    for (x, y) in [
        (a.bold, b.bold),
        (a.italic, b.italic),
        (a.underline, b.underline),
        (a.capitalized, b.capitalized),
        (a.th, b.th),
    ] {
        if x || y {
            compared += 1;
            agree += (x == y) as usize;
        }
    }
    let (lo, hi) = (a.mean_len.min(b.mean_len), a.mean_len.max(b.mean_len));
    let len_close = hi == 0.0 || (lo > 0.0 && hi <= 2.0 * lo);
    for same in [a.layout == b.layout, a.numeric == b.numeric, len_close] {
        compared += 1;
        agree += same as usize;
    }
    agree as f64 >= SIMILAR_SHARE * compared as f64
}

fn different_from_below(signals: &[RowSignal], i: usize) -> bool {
    let below = &signals[i + 1..];
    let alike = below.iter().filter(|s| similar(&signals[i], s)).count();
    2 * alike < below.len()
}

fn title_shaped(cells: &[String], formats: &[CellFormat]) -> bool {
    !cells[0].trim().is_empty()
        && cells
            .iter()
            .zip(formats)
            .skip(1)
            .all(|(c, f)| c.trim().is_empty() || f.span_copy)
}

/// Splits a grid into title, header and body rows.
///
/// Rows are scanned from the top while each differs from most rows below
/// it. A different row before any header is a title when it carries a single
/// value (every later cell empty or spanned from the first); otherwise it
/// starts the header. Later header rows must also resemble the first header
/// row. `formats` must have the grid's shape.
pub fn classify_rows(grid: &[Vec<String>], formats: &[Vec<CellFormat>]) -> (usize, usize) {
    let signals: Vec<RowSignal> = grid.iter().zip(formats).map(|(r, f)| row_signal(r, f)).collect();
    let (mut titles, mut headers) = (0, 0);
    let mut first_header: Option<usize> = None;
    for i in 0..grid.len().saturating_sub(1) {
        if !different_from_below(&signals, i) {
            break;
        }
        match first_header {
            None if title_shaped(&grid[i], &formats[i]) => titles += 1,
            None => {
                first_header = Some(i);
                headers += 1;
            }
            Some(h) if similar(&signals[h], &signals[i]) => headers += 1,
            Some(_) => break,
        }
    }
    (titles, headers)
}

/// A table element expanded into a rectangular grid.
struct Grid {
    cells: Vec<Vec<String>>,
    formats: Vec<Vec<CellFormat>>,
}

fn attr_usize(el: &ElementRef, name: &str) -> usize {
    el.value()
        .attr(name)
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(1)
        .clamp(1, 100)
}

fn has_descendant(el: &ElementRef, names: &[&str]) -> bool {
    el.descendants()
        .filter_map(ElementRef::wrap)
        .any(|d| d.id() != el.id() && names.contains(&d.value().name()))
}

fn layout_of(el: &ElementRef) -> String {
    let v = el.value();
    let mut parts: Vec<String> = v.classes().map(str::to_string).collect();
    if let Some(bg) = v.attr("bgcolor") {
        parts.push(format!("bg:{}", bg.trim().to_ascii_lowercase()));
    }
    if let Some(style) = v.attr("style") {
        for decl in style.split(';') {
            let decl = decl.trim().to_ascii_lowercase();
            if decl.starts_with("background") {
                parts.push(decl.replace(' ', ""));
            }
        }
    }
    parts.sort();
    parts.join(" ")
}

fn cell_format(cell: &ElementRef, row_layout: &str) -> CellFormat {
    let style = cell.value().attr("style").unwrap_or("").to_ascii_lowercase();
    let own = layout_of(cell);
    CellFormat {
        th: cell.value().name() == "th",
        bold: has_descendant(cell, &["b", "strong"]) || style.contains("bold"),
        italic: has_descendant(cell, &["i", "em"]) || style.contains("italic"),
        underline: has_descendant(cell, &["u"]) || style.contains("underline"),
        layout: [row_layout, own.as_str()].iter().filter(|s| !s.is_empty()).copied().collect::<Vec<_>>().join(" "),
        span_copy: false,
    }
}

/// Nearest enclosing `<table>` of a node, excluding the node itself.
fn owning_table(el: &ElementRef) -> Option<NodeId> {
    el.ancestors()
        .find(|n| n.value().as_element().is_some_and(|e| e.name() == "table"))
        .map(|n| n.id())
}

fn text_of(el: &ElementRef) -> String {
    squash_whitespace(&el.text().collect::<Vec<_>>().join(" "))
}

fn expand(table: &ElementRef) -> Grid {
    let tr = Selector::parse("tr").expect("static selector");
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut formats: Vec<Vec<CellFormat>> = Vec::new();
    // Column -> (rows still covered, text, format) for rowspans.
    let mut carry: HashMap<usize, (usize, String, CellFormat)> = HashMap::new();

    for row in table.select(&tr).filter(|r| owning_table(r) == Some(table.id())) {
        let row_layout = layout_of(&row);
        let mut out_cells: Vec<String> = Vec::new();
        let mut out_fmt: Vec<CellFormat> = Vec::new();
        let mut col = 0;
        let take_carried = |col: &mut usize, oc: &mut Vec<String>, of: &mut Vec<CellFormat>, carry: &mut HashMap<usize, (usize, String, CellFormat)>| {
            while let Some((left, text, fmt)) = carry.get_mut(col) {
                oc.push(text.clone());
                of.push(fmt.clone());
                *left -= 1;
                if *left == 0 {
                    carry.remove(col);
                }
                *col += 1;
            }
        };
        for cell in row.children().filter_map(ElementRef::wrap) {
            if !matches!(cell.value().name(), "td" | "th") {
                continue;
            }
            take_carried(&mut col, &mut out_cells, &mut out_fmt, &mut carry);
            let text = text_of(&cell);
            let fmt = cell_format(&cell, &row_layout);
            let (colspan, rowspan) = (attr_usize(&cell, "colspan"), attr_usize(&cell, "rowspan"));
            for k in 0..colspan {
                let mut f = fmt.clone();
                f.span_copy = k > 0;
                if rowspan > 1 {
                    carry.insert(col, (rowspan - 1, text.clone(), f.clone()));
                }
                out_cells.push(text.clone());
                out_fmt.push(f);
                col += 1;
            }
        }
        take_carried(&mut col, &mut out_cells, &mut out_fmt, &mut carry);
        if !out_cells.is_empty() {
            cells.push(out_cells);
            formats.push(out_fmt);
        }
    }

    let width = cells.iter().map(Vec::len).max().unwrap_or(0);
    for (r, f) in cells.iter_mut().zip(&mut formats) {
        r.resize(width, String::new());
        f.resize(width, CellFormat::default());
    }
    Grid { cells, formats }
}

fn is_data_table(grid: &Grid, body_rows: usize) -> bool {
    let width = grid.cells.first().map_or(0, Vec::len);
    if width < MIN_COLUMNS || body_rows < MIN_BODY_ROWS {
        return false;
    }
    let all: Vec<&String> = grid.cells.iter().flatten().collect();
    if all.iter().any(|c| c.chars().count() > MAX_CELL_CHARS) {
        return false;
    }
    let filled = all.iter().filter(|c| !c.trim().is_empty()).count();
    filled as f64 >= MIN_FILLED * all.len() as f64
}

/// Format class of a context element: its own format tag, or that of a lone
/// element child carrying all its text, else `plain`.
fn format_class(el: &ElementRef) -> &'static str {
    let tag = |name: &str| FORMAT_TAGS.iter().copied().find(|t| *t == name);
    if let Some(t) = tag(el.value().name()) {
        return t;
    }
    let kids: Vec<ElementRef> = el.children().filter_map(ElementRef::wrap).collect();
    let loose_text = el
        .children()
        .any(|n| n.value().as_text().is_some_and(|t| !t.trim().is_empty()));
    if kids.len() == 1 && !loose_text {
        return format_class(&kids[0]);
    }
    "plain"
}

fn skip_subtree(name: &str) -> bool {
    matches!(name, "table" | "script" | "style" | "noscript")
}

/// Text of a node with tables, scripts and styles left out.
fn context_text(node: ego_tree::NodeRef<'_, Node>) -> String {
    let mut out = String::new();
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        match n.value() {
            Node::Text(t) => {
                out.push_str(t);
                out.push(' ');
            }
            Node::Element(e) if skip_subtree(e.name()) => {}
            Node::Element(_) | Node::Document | Node::Fragment => {
                let kids: Vec<_> = n.children().collect();
                stack.extend(kids.into_iter().rev());
            }
            _ => {}
        }
    }
    squash_whitespace(&out)
}

/// Share of text-bearing elements outside tables in each format class.
fn format_frequencies(doc: &Html) -> HashMap<&'static str, f64> {
    let mut counts: HashMap<&'static str, usize> = HashMap::new();
    let mut total = 0usize;
    for el in doc.root_element().descendants().filter_map(ElementRef::wrap) {
        if skip_subtree(el.value().name()) || owning_table(&el).is_some() {
            continue;
        }
        let has_text = el
            .children()
            .any(|n| n.value().as_text().is_some_and(|t| !t.trim().is_empty()));
        if !has_text {
            continue;
        }
        let class = el
            .ancestors()
            .filter_map(ElementRef::wrap)
            .map(|a| a.value().name())
            .chain(std::iter::once(el.value().name()))
            .find_map(|n| FORMAT_TAGS.iter().copied().find(|t| *t == n))
            .unwrap_or("plain");
        *counts.entry(class).or_insert(0) += 1;
        total += 1;
    }
    counts
        .into_iter()
        .map(|(k, v)| (k, v as f64 / total.max(1) as f64))
        .collect()
}

/// Context snippets of `table`: every sibling of a node on the path from the
/// table to the root, scored by `0.5^(d-1) · side · rarity`. `d` is 1 for
/// siblings of the table itself and grows by one per level up; preceding
/// siblings weigh 1.0 and following ones 0.7; `rarity = 1 - f/2` where `f`
/// is the document share of the snippet's format class.
pub fn extract_context(doc: &Html, table: &ElementRef) -> Vec<ContextSnippet> {
    let freq = format_frequencies(doc);
    let mut out = Vec::new();
    let mut node = Some(**table);
    let mut distance = 1;
    while let Some(n) = node {
        let Some(parent) = n.parent() else { break };
        let mut left = true;
        for sib in parent.children() {
            if sib.id() == n.id() {
                left = false;
                continue;
            }
            let (text, class) = match sib.value() {
                Node::Text(t) => (squash_whitespace(t), "plain"),
                Node::Element(e) if skip_subtree(e.name()) => continue,
                Node::Element(_) => {
                    let el = ElementRef::wrap(sib).expect("element node");
                    (context_text(sib), format_class(&el))
                }
                _ => continue,
            };
            if text.is_empty() {
                continue;
            }
            let side = if left { LEFT_WEIGHT } else { RIGHT_WEIGHT };
            let rarity = 1.0 - freq.get(class).copied().unwrap_or(0.0) / 2.0;
            out.push(ContextSnippet {
                text,
                score: 0.5f64.powi(distance - 1) * side * rarity,
            });
        }
        node = Some(parent);
        distance += 1;
    }
    out
}

/// All retained data tables of a document, in document order.
pub fn extract_tables(doc: &RawDocument) -> Result<Vec<WebTable>, HarvestError> {
    if doc.html.trim().is_empty() {
        return Err(HarvestError::EmptyDocument(doc.url.clone()));
    }
    let html = Html::parse_document(&doc.html);
    let table_sel = Selector::parse("table").expect("static selector");
    let inner_sel = Selector::parse("table table").expect("static selector");
    let outer: Vec<NodeId> = html
        .select(&inner_sel)
        .filter_map(|inner| owning_table(&inner))
        .collect();

    let mut out = Vec::new();
    for (k, table) in html.select(&table_sel).enumerate() {
        if outer.contains(&table.id()) {
            continue;
        }
        let grid = expand(&table);
        if grid.cells.is_empty() {
            continue;
        }
        let (titles, headers) = classify_rows(&grid.cells, &grid.formats);
        let body_rows = grid.cells.len() - titles - headers;
        if !is_data_table(&grid, body_rows) {
            continue;
        }
        let mut rows = grid.cells.into_iter();
        let title_rows = rows.by_ref().take(titles).map(|r| r[0].clone()).collect();
        let header = rows.by_ref().take(headers).collect();
        out.push(WebTable {
            id: format!("{}#{k}", doc.url),
            url: doc.url.clone(),
            title_rows,
            header,
            body: rows.collect(),
            context: extract_context(&html, &table),
        });
    }
    Ok(out)
}

pub fn write_jsonl<W: Write>(tables: &[WebTable], mut w: W) -> Result<(), HarvestError> {
    for t in tables {
        serde_json::to_writer(&mut w, t).map_err(|source| HarvestError::Json { line: 0, source })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<WebTable>, HarvestError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| HarvestError::Json { line: i + 1, source })?);
    }
    Ok(out)
}
