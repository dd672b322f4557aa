//! Small generated corpora for tests, benchmarks and demos.

use crate::answer::GoldLabels;
use crate::model::Label;
use crate::score::Query;
use crate::table::{ContextSnippet, WebTable};

const CAPITALS: [(&str, &str, &str); 16] = [
    ("France", "Paris", "67"),
    ("Germany", "Berlin", "83"),
    ("Italy", "Rome", "59"),
    ("Spain", "Madrid", "47"),
    ("Portugal", "Lisbon", "10"),
    ("Austria", "Vienna", "9"),
    ("Hungary", "Budapest", "10"),
    ("Poland", "Warsaw", "38"),
    ("Norway", "Oslo", "5"),
    ("Sweden", "Stockholm", "10"),
    ("Finland", "Helsinki", "6"),
    ("Denmark", "Copenhagen", "6"),
    ("Ireland", "Dublin", "5"),
    ("Greece", "Athens", "10"),
    ("Czechia", "Prague", "11"),
    ("Romania", "Bucharest", "19"),
];

/// Corpus, query and gold labels of one generated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub tables: Vec<WebTable>,
    pub query: Query,
    pub gold: GoldLabels,
}

fn table(id: &str, header: &[&str], context: &str, body: Vec<Vec<String>>) -> WebTable {
    WebTable {
        id: format!("synth://{id}#0"),
        url: format!("synth://{id}"),
        title_rows: Vec::new(),
        header: if header.is_empty() {
            Vec::new()
        } else {
            vec![header.iter().map(|s| s.to_string()).collect()]
        },
        body,
        context: if context.is_empty() {
            Vec::new()
        } else {
            vec![ContextSnippet {
                text: context.to_string(),
                score: 1.0,
            }]
        },
    }
}

fn pairs(rows: impl IntoIterator<Item = usize>) -> Vec<Vec<String>> {
    rows.into_iter()
        .map(|i| vec![CAPITALS[i].0.to_string(), CAPITALS[i].1.to_string()])
        .collect()
}

/// Eight tables for the query `country | capital`.
///
/// Three tables have matching headers. Three more hold the same kind of rows
/// with no header and unrelated context, so only their overlap with the
/// headed tables marks them relevant. Two distractors share a header word or
/// a column of countries but have no capitals.
pub fn collective_scenario() -> Scenario {
    let mut tables = vec![
        table("atlas", &["Country", "Capital"], "European capitals", pairs(0..8)),
        table("travel", &["Country", "Capital"], "", pairs(4..12)),
        table(
            "census",
            &["Country", "Capital city", "Population (millions)"],
            "",
            (8..16)
                .map(|i| {
                    let (c, k, p) = CAPITALS[i];
                    vec![c.to_string(), k.to_string(), p.to_string()]
                })
                .collect(),
        ),
        table("notes-a", &[], "Trip log", pairs([0, 2, 4, 6, 8, 10])),
        table("notes-b", &[], "Postcards", pairs([1, 3, 5, 7, 9, 11])),
        table("notes-c", &[], "Weekend plans", pairs(10..16)),
        table(
            "companies",
            &["Company", "Revenue"],
            "Largest companies by country",
            [("Acme", "12"), ("Globex", "9"), ("Initech", "4"), ("Umbrella", "7")]
                .iter()
                .map(|(a, b)| vec![a.to_string(), b.to_string()])
                .collect(),
        ),
        table(
            "players",
            &["Player", "Team", "Country"],
            "",
            [("Ada", "Lions", 0), ("Ben", "Bears", 1), ("Cy", "Hawks", 2), ("Dee", "Owls", 3)]
                .iter()
                .map(|&(p, t, c)| vec![p.to_string(), t.to_string(), CAPITALS[c].0.to_string()])
                .collect(),
        ),
    ];
    tables.sort_by(|a, b| a.id.cmp(&b.id));
    let mut labels = Vec::new();
    for t in &tables {
        let relevant = !matches!(t.url.as_str(), "synth://companies" | "synth://players");
        for c in 0..t.n_cols() {
            let l = match (relevant, c) {
                (false, _) => Label::Nr,
                (true, 0) => Label::Query(1),
                (true, 1) => Label::Query(2),
                (true, _) => Label::Na,
            };
            labels.push((t.id.clone(), c, l));
        }
    }
    Scenario {
        tables,
        query: Query::parse("country|capital"),
        gold: GoldLabels {
            query_id: "country-capital".into(),
            labels,
        },
    }
}
