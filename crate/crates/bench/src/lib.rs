//! Input generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tablemap::model::{ColumnRef, Edge, Model, TableModel};
use tablemap::synth::collective_scenario;
use tablemap::WebTable;

/// A model with `tables` tables of `cols` columns and random potentials,
/// plus about `edges_per_table` random edges per table.
pub fn random_model(seed: u64, tables: usize, cols: usize, q: usize, edges_per_table: usize) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables: Vec<TableModel> = (0..tables)
        .map(|i| TableModel {
            id: format!("t{i}"),
            theta: (0..cols)
                .map(|_| {
                    let mut row: Vec<f64> = (0..q + 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    row[q] = 0.0;
                    row
                })
                .collect(),
        })
        .collect();
    let n = tables.len();
    let mut edges = Vec::new();
    for _ in 0..n * edges_per_table {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a == b {
            continue;
        }
        edges.push(Edge {
            a: ColumnRef {
                table: a.min(b),
                column: rng.gen_range(0..cols),
            },
            b: ColumnRef {
                table: a.max(b),
                column: rng.gen_range(0..cols),
            },
            sim: 1.0,
            nsim_ab: rng.gen_range(0.0..0.5),
            nsim_ba: rng.gen_range(0.0..0.5),
            gate_a: rng.gen_bool(0.5),
            gate_b: rng.gen_bool(0.5),
        });
    }
    Model {
        q,
        m: if q >= 2 { 2 } else { 1 },
        we: 1.0,
        tables,
        edges,
    }
}

/// The generated country/capital corpus repeated `copies` times under
/// distinct ids.
pub fn replicated_corpus(copies: usize) -> Vec<WebTable> {
    let base = collective_scenario().tables;
    (0..copies)
        .flat_map(|k| {
            base.iter().map(move |t| {
                let mut t = t.clone();
                t.id = format!("{}/{k}", t.id);
                t
            })
        })
        .collect()
}
