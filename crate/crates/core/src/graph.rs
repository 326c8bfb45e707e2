//! Statement networks and k-core decomposition.
//!
//! A [`StatementNetwork`] keeps every co-occurrence as an [`EdgeEvent`]
//! (with date and provenance) and collapses them into a simple undirected
//! graph. Core numbers are computed on the simple graph only; event
//! multiplicity matters for daily counts, not for cores.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{parse_day, DateRange};
use crate::error::{Error, Result};
use crate::extract::StatementSentence;

/// Unordered pair of distinct names, stored in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair(String, String);

impl Pair {
    /// `None` for a self-pair.
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Option<Self> {
        let (a, b) = (a.into(), b.into());
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Pair(a, b)),
            std::cmp::Ordering::Greater => Some(Pair(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn first(&self) -> &str {
        &self.0
    }

    pub fn second(&self) -> &str {
        &self.1
    }
}

/// All `n·(n−1)/2` unordered pairs of `entities`, in combination order.
pub fn pairs_from_statement<S: AsRef<str>>(entities: &[S]) -> Result<Vec<Pair>> {
    let mut seen = BTreeSet::new();
    for e in entities {
        if !seen.insert(e.as_ref()) {
            return Err(Error::DuplicateEntity(e.as_ref().to_owned()));
        }
    }
    if entities.len() < 2 {
        return Err(Error::TooFewEntities(entities.len()));
    }
    let mut pairs = Vec::with_capacity(entities.len() * (entities.len() - 1) / 2);
    for (i, a) in entities.iter().enumerate() {
        for b in &entities[i + 1..] {
            pairs.push(Pair::new(a.as_ref(), b.as_ref()).expect("entities are distinct"));
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeEvent {
    pub date: NaiveDate,
    pub article_id: String,
    pub sentence_index: usize,
    pub pair: Pair,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StatementNetwork {
    edges: BTreeMap<Pair, usize>,
    nodes: BTreeSet<String>,
    events: Vec<EdgeEvent>,
}

impl StatementNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    /// Network over the statements dated inside `window` (all when `None`).
    pub fn build<'a, I>(statements: I, window: Option<DateRange>) -> Result<Self>
    where
        I: IntoIterator<Item = &'a StatementSentence>,
    {
        let mut network = Self::new();
        for s in statements {
            if window.is_some_and(|w| !w.contains(s.published)) {
                continue;
            }
            network.add_statement(s)?;
        }
        network.events.sort();
        Ok(network)
    }

    pub fn add_statement(&mut self, statement: &StatementSentence) -> Result<()> {
        for pair in pairs_from_statement(&statement.entities)? {
            self.add_event(EdgeEvent {
                date: statement.published,
                article_id: statement.article_id.clone(),
                sentence_index: statement.sentence_index,
                pair,
            });
        }
        Ok(())
    }

    pub fn add_event(&mut self, event: EdgeEvent) {
        self.nodes.insert(event.pair.first().to_owned());
        self.nodes.insert(event.pair.second().to_owned());
        *self.edges.entry(event.pair.clone()).or_default() += 1;
        self.events.push(event);
    }

    pub(crate) fn sort_events(&mut self) {
        self.events.sort();
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    /// Simple edges with their event multiplicity.
    pub fn edges(&self) -> &BTreeMap<Pair, usize> {
        &self.edges
    }

    pub fn events(&self) -> &[EdgeEvent] {
        &self.events
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `nodeA<TAB>nodeB<TAB>event-count`, one simple edge per line.
    pub fn write_edges<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (pair, count) in &self.edges {
            writeln!(w, "{}\t{}\t{count}", pair.first(), pair.second())?;
        }
        Ok(())
    }

    /// `nodeA<TAB>nodeB<TAB>date<TAB>article_id`, one event per line.
    pub fn write_events<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.events {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                e.pair.first(),
                e.pair.second(),
                e.date,
                e.article_id
            )?;
        }
        Ok(())
    }
}

/// Parses an edge-list file back into `(pair, event-count)` entries.
pub fn read_edges<R: BufRead>(r: R) -> std::result::Result<Vec<(Pair, usize)>, String> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.is_empty() {
            continue;
        }
        let bad = |why: &str| format!("line {}: {why}", idx + 1);
        let fields: Vec<&str> = line.split('\t').collect();
        let [a, b, count] = fields.as_slice() else {
            return Err(bad("expected 3 tab-separated fields"));
        };
        let pair = Pair::new(*a, *b).ok_or_else(|| bad("self-loop"))?;
        let count = count.parse().map_err(|_| bad("bad event count"))?;
        out.push((pair, count));
    }
    Ok(out)
}

/// Parses an events file (`nodeA, nodeB, date, article_id`).
pub fn read_events<R: BufRead>(r: R) -> std::result::Result<Vec<(Pair, NaiveDate, String)>, String> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.is_empty() {
            continue;
        }
        let bad = |why: &str| format!("line {}: {why}", idx + 1);
        let fields: Vec<&str> = line.split('\t').collect();
        let [a, b, date, id] = fields.as_slice() else {
            return Err(bad("expected 4 tab-separated fields"));
        };
        let pair = Pair::new(*a, *b).ok_or_else(|| bad("self-loop"))?;
        let date = parse_day(date).ok_or_else(|| bad("bad date"))?;
        out.push((pair, date, id.to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CoreDecomposition {
    pub core_number: BTreeMap<String, usize>,
    pub max_core: usize,
    pub shells: BTreeMap<usize, BTreeSet<String>>,
}

impl CoreDecomposition {
    /// Nodes whose core number equals the maximum.
    pub fn top_core(&self) -> Result<BTreeSet<String>> {
        if self.core_number.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        Ok(self.shells.get(&self.max_core).cloned().unwrap_or_default())
    }

    /// Core number of `node`; 0 when it is not in the network.
    pub fn rank(&self, node: &str) -> usize {
        self.core_number.get(node).copied().unwrap_or(0)
    }

    /// Nodes of the k-core (core number ≥ k).
    pub fn k_core(&self, k: usize) -> BTreeSet<&str> {
        self.core_number
            .iter()
            .filter(|(_, &c)| c >= k)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    /// Number of distinct non-empty shells.
    pub fn shell_count(&self) -> usize {
        self.shells.len()
    }
}

pub fn top_core(decomposition: &CoreDecomposition) -> Result<BTreeSet<String>> {
    decomposition.top_core()
}

pub fn k_core_decompose(network: &StatementNetwork) -> CoreDecomposition {
    decompose_edges(network.nodes().iter().map(String::as_str), network.edges().keys())
}

/// Core numbers for the simple graph on `nodes` with `edges`. Duplicate
/// edges are ignored; endpoints missing from `nodes` are added.
pub fn decompose_edges<'a, N, E>(nodes: N, edges: E) -> CoreDecomposition
where
    N: IntoIterator<Item = &'a str>,
    E: IntoIterator<Item = &'a Pair>,
{
    let mut names: BTreeSet<&str> = nodes.into_iter().collect();
    let edges: BTreeSet<&Pair> = edges.into_iter().collect();
    for e in &edges {
        names.insert(e.first());
        names.insert(e.second());
    }
    let names: Vec<&str> = names.into_iter().collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut adjacency = vec![Vec::new(); names.len()];
    for e in edges {
        let (a, b) = (index[e.first()], index[e.second()]);
        adjacency[a].push(b);
        adjacency[b].push(a);
    }

    let cores = core_numbers(&adjacency);
    let mut decomposition = CoreDecomposition::default();
    for (name, core) in names.iter().zip(cores) {
        decomposition.core_number.insert(name.to_string(), core);
        decomposition.shells.entry(core).or_default().insert(name.to_string());
        decomposition.max_core = decomposition.max_core.max(core);
    }
    decomposition
}

/// Bucket-based min-degree peeling (Batagelj & Zaversnik) over an adjacency
/// list without duplicate edges or self-loops. Runs in O(n + m).
pub fn core_numbers(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let max_degree = degree.iter().copied().max().unwrap_or(0);

    // bin[d] = first position in `order` holding a vertex of degree d
    let mut bin = vec![0usize; max_degree + 1];
    for &d in &degree {
        bin[d] += 1;
    }
    let mut start = 0;
    for slot in bin.iter_mut() {
        let count = *slot;
        *slot = start;
        start += count;
    }
    let mut position = vec![0usize; n];
    let mut order = vec![0usize; n];
    for v in 0..n {
        position[v] = bin[degree[v]];
        order[position[v]] = v;
        bin[degree[v]] += 1;
    }
    for d in (1..=max_degree).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;

    for i in 0..n {
        let v = order[i];
        for &u in &adjacency[v] {
            if degree[u] > degree[v] {
                let du = degree[u];
                let pu = position[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    position[u] = pw;
                    position[w] = pu;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    degree
}
