#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use chrono::NaiveDate;
use rand::rngs::StdRng;
use rand::Rng;
use statement_net::StatementSentence;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sample")
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn day(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

pub fn node(i: usize) -> String {
    format!("n{i:03}")
}

/// Core numbers by definition: for each k, repeatedly delete nodes with
/// fewer than k remaining neighbours; a node's core number is the largest k
/// it survives.
pub fn brute_force_cores(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        if a != b {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    let mut core = vec![0; n];
    for k in 1..=n {
        let mut alive: BTreeSet<usize> = (0..n).collect();
        loop {
            let doomed: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|&v| adj[v].iter().filter(|u| alive.contains(u)).count() < k)
                .collect();
            if doomed.is_empty() {
                break;
            }
            for v in doomed {
                alive.remove(&v);
            }
        }
        if alive.is_empty() {
            break;
        }
        for v in alive {
            core[v] = k;
        }
    }
    core
}

pub fn brute_force_core_map(edges: &[(String, String)]) -> BTreeMap<String, usize> {
    let names: BTreeSet<&String> = edges.iter().flat_map(|(a, b)| [a, b]).collect();
    let index: BTreeMap<&String, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let numeric: Vec<(usize, usize)> = edges.iter().map(|(a, b)| (index[a], index[b])).collect();
    let cores = brute_force_cores(names.len(), &numeric);
    names.into_iter().cloned().zip(cores).collect()
}

/// Erdős–Rényi G(n, p).
pub fn random_graph(rng: &mut StdRng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn statement(id: &str, date: NaiveDate, index: usize, entities: &[String]) -> StatementSentence {
    StatementSentence {
        article_id: id.to_owned(),
        source: "Wire".to_owned(),
        published: date,
        sentence_index: index,
        text: entities.join(" said "),
        entities: entities.to_vec(),
        trigger: "said".to_owned(),
    }
}

/// Reads every regular file of a directory into memory.
pub fn read_bundle(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}
