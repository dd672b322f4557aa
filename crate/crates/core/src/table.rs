//! Harvested table records shared by every stage.

use serde::{Deserialize, Serialize};

use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub url: String,
    pub html: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSnippet {
    pub text: String,
    /// In `(0, 1]`; nearer and rarer-formatted text scores higher.
    pub score: f64,
}

/// A data table with its title rows, header rows, body and context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WebTable {
    pub id: String,
    pub url: String,
    pub title_rows: Vec<String>,
    /// `h` rows of `n_t` header cells.
    pub header: Vec<Vec<String>>,
    /// Body rows of `n_t` cells.
    pub body: Vec<Vec<String>>,
    pub context: Vec<ContextSnippet>,
}

impl WebTable {
    pub fn n_cols(&self) -> usize {
        self.header
            .first()
            .or(self.body.first())
            .map_or(0, Vec::len)
    }

    pub fn header_rows(&self) -> usize {
        self.header.len()
    }

    pub fn header_tokens(&self, r: usize, c: usize) -> Vec<String> {
        tokenize(&self.header[r][c])
    }

    /// All header tokens of column `c`, across header rows.
    pub fn column_header_tokens(&self, c: usize) -> Vec<String> {
        self.header.iter().flat_map(|row| tokenize(&row[c])).collect()
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = &str> {
        self.body.iter().map(move |row| row[c].as_str())
    }

    /// Checks the shape invariants: at least one column and every header
    /// and body row exactly `n_t` wide.
    pub fn is_well_formed(&self) -> bool {
        let n = self.n_cols();
        n >= 1 && self.header.iter().chain(&self.body).all(|row| row.len() == n)
    }
}

#[cfg(test)]
pub(crate) fn sample_table(id: &str, header: &[&str], body: &[&[&str]]) -> WebTable {
    WebTable {
        id: id.to_string(),
        url: format!("http://example.org/{id}"),
        title_rows: Vec::new(),
        header: if header.is_empty() {
            Vec::new()
        } else {
            vec![header.iter().map(|s| s.to_string()).collect()]
        },
        body: body.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        context: Vec::new(),
    }
}
