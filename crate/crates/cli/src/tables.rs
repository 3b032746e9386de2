//! Reading runner tables and grouping rows by parameter set.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{Context, Result};

use potts_csg::runner::{read_results, read_samples, ResultRow, SampleRow};

/// Parameter columns shared by every output table, temperature excluded.
pub const PARAM_COLUMNS: [&str; 8] = ["K", "J", "q", "t", "s", "r_minus", "r_plus", "branching"];

pub fn results(path: &Path) -> Result<Vec<ResultRow>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_results(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

pub fn samples(path: &Path) -> Result<Vec<SampleRow>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_samples(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

pub fn param_values(row: &ResultRow) -> Vec<String> {
    vec![
        row.k.to_string(),
        row.coupling.to_string(),
        row.q.to_string(),
        row.t.to_string(),
        row.s.to_string(),
        row.r_minus.to_string(),
        row.r_plus.to_string(),
        row.branching.clone(),
    ]
}

/// Values of a `name=value ...` sample group key, in column order.
pub fn group_values(group: &str) -> Vec<String> {
    group.split(' ').map(|kv| kv.split_once('=').map_or(kv, |(_, v)| v).to_string()).collect()
}

/// Splits items into groups by `key`, keeping first-appearance order.
pub fn group_by<T, K: PartialEq>(items: Vec<T>, key: impl Fn(&T) -> K) -> Vec<Vec<T>> {
    let mut keys: Vec<K> = Vec::new();
    let mut groups: Vec<Vec<T>> = Vec::new();
    for item in items {
        let k = key(&item);
        match keys.iter().position(|x| *x == k) {
            Some(i) => groups[i].push(item),
            None => {
                keys.push(k);
                groups.push(vec![item]);
            }
        }
    }
    groups
}

/// Rows of one observable, grouped by parameter set.
pub fn observable_groups(rows: Vec<ResultRow>, observable: &str) -> Vec<Vec<ResultRow>> {
    let rows: Vec<ResultRow> = rows.into_iter().filter(|r| r.observable == observable).collect();
    group_by(rows, |r| r.group_key())
}
