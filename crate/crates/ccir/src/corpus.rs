//! Document corpora and citation graphs.
//!
//! A corpus is loaded from two line-oriented UTF-8 files: a documents file
//! (`<id><TAB><year>` per line, `#`-prefixed lines are comments) and an
//! edges file (`<id><TAB><id>` per line). Citation direction is discarded,
//! duplicate and reversed edges collapse to one, and self-citations are
//! dropped, so the resulting [`CitationGraph`] is a simple undirected graph.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// One document: an opaque id plus its publication year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub year: i32,
}

/// Immutable undirected citation graph over a set of documents.
///
/// Documents are interned: every document has a dense `u32` index assigned
/// in load order, and the rest of the toolkit works on those indexes. The
/// external string ids are kept for file I/O and reporting.
#[derive(Debug, Clone)]
pub struct CitationGraph {
    ids: Vec<String>,
    years: Vec<i32>,
    index: HashMap<String, u32>,
    adj: Vec<Vec<u32>>,
    edge_count: usize,
}

impl CitationGraph {
    /// Builds a graph from already-parsed records. Used by generators and
    /// tests; file loading goes through [`load_corpus`].
    pub fn from_parts<I, E>(documents: I, edges: E) -> Result<Self>
    where
        I: IntoIterator<Item = Document>,
        E: IntoIterator<Item = (String, String)>,
    {
        let mut builder = GraphBuilder::new("<memory>", "<memory>");
        for doc in documents {
            builder.add_document(doc, 0)?;
        }
        for (a, b) in edges {
            builder.add_edge(&a, &b, 0)?;
        }
        Ok(builder.finish())
    }

    /// Parses the documents and edges formats from in-memory text.
    /// `documents_label` / `edges_label` name the sources in error messages.
    pub fn parse(
        documents: &str,
        documents_label: &str,
        edges: &str,
        edges_label: &str,
    ) -> Result<Self> {
        let mut builder = GraphBuilder::new(documents_label, edges_label);
        for (lineno, raw) in documents.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let id = fields.next().unwrap_or("");
            let year = fields.next();
            if id.is_empty() || year.is_none() || fields.next().is_some() {
                return Err(Error::MalformedRecord {
                    path: documents_label.to_string(),
                    line: lineno + 1,
                    reason: format!("expected `<id><TAB><year>`, got {line:?}"),
                });
            }
            let year: i32 = year.unwrap().parse().map_err(|_| Error::MalformedRecord {
                path: documents_label.to_string(),
                line: lineno + 1,
                reason: format!("year is not an integer: {:?}", year.unwrap()),
            })?;
            builder.add_document(Document { id: id.to_string(), year }, lineno + 1)?;
        }
        for (lineno, raw) in edges.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let a = fields.next().unwrap_or("");
            let b = fields.next();
            if a.is_empty() || b.is_none_or(str::is_empty) || fields.next().is_some() {
                return Err(Error::MalformedRecord {
                    path: edges_label.to_string(),
                    line: lineno + 1,
                    reason: format!("expected `<id><TAB><id>`, got {line:?}"),
                });
            }
            builder.add_edge(a, b.unwrap(), lineno + 1)?;
        }
        Ok(builder.finish())
    }

    pub fn doc_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// External id of a document index. Panics on an out-of-range index.
    pub fn doc_id(&self, idx: u32) -> &str {
        &self.ids[idx as usize]
    }

    pub fn year(&self, idx: u32) -> i32 {
        self.years[idx as usize]
    }

    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    /// Neighbor indexes of `idx`, sorted ascending.
    pub fn neighbors(&self, idx: u32) -> &[u32] {
        &self.adj[idx as usize]
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.adj[a as usize].binary_search(&b).is_ok()
    }

    /// All document indexes in load order.
    pub fn all_docs(&self) -> Vec<u32> {
        (0..self.ids.len() as u32).collect()
    }

    pub fn documents(&self) -> impl Iterator<Item = Document> + '_ {
        self.ids
            .iter()
            .zip(&self.years)
            .map(|(id, &year)| Document { id: id.clone(), year })
    }

    /// Undirected edges as `(low index, high index)` pairs, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (a, nbrs) in self.adj.iter().enumerate() {
            let a = a as u32;
            for &b in nbrs {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Restricts the graph to documents with `min_year <= year <= max_year`.
    /// Edges incident to removed documents are removed with them.
    pub fn filter_by_year(&self, min_year: i32, max_year: i32) -> Result<Self> {
        if min_year > max_year {
            return Err(Error::invalid(
                "year window",
                format!("min_year {min_year} exceeds max_year {max_year}"),
            ));
        }
        let mut remap: Vec<Option<u32>> = vec![None; self.ids.len()];
        let mut ids = Vec::new();
        let mut years = Vec::new();
        let mut index = HashMap::new();
        for (old, (id, &year)) in self.ids.iter().zip(&self.years).enumerate() {
            if (min_year..=max_year).contains(&year) {
                let new = ids.len() as u32;
                remap[old] = Some(new);
                index.insert(id.clone(), new);
                ids.push(id.clone());
                years.push(year);
            }
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); ids.len()];
        let mut edge_count = 0;
        for (old, nbrs) in self.adj.iter().enumerate() {
            let Some(new) = remap[old] else { continue };
            for &nbr in nbrs {
                if let Some(new_nbr) = remap[nbr as usize] {
                    adj[new as usize].push(new_nbr);
                    if new < new_nbr {
                        edge_count += 1;
                    }
                }
            }
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Ok(CitationGraph { ids, years, index, adj, edge_count })
    }

    /// Writes the documents file format.
    pub fn write_documents<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (id, year) in self.ids.iter().zip(&self.years) {
            writeln!(w, "{id}\t{year}")?;
        }
        Ok(())
    }

    /// Writes the edges file format, one undirected edge per line.
    pub fn write_edges<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (a, b) in self.edges() {
            writeln!(w, "{}\t{}", self.ids[a as usize], self.ids[b as usize])?;
        }
        Ok(())
    }
}

/// Equality as document set plus edge set, independent of load order.
impl PartialEq for CitationGraph {
    fn eq(&self, other: &Self) -> bool {
        if self.ids.len() != other.ids.len() || self.edge_count != other.edge_count {
            return false;
        }
        for (id, &year) in self.ids.iter().zip(&self.years) {
            match other.index_of(id) {
                Some(idx) if other.years[idx as usize] == year => {}
                _ => return false,
            }
        }
        for (a, b) in self.edges() {
            let (Some(oa), Some(ob)) = (
                other.index_of(&self.ids[a as usize]),
                other.index_of(&self.ids[b as usize]),
            ) else {
                return false;
            };
            if !other.has_edge(oa, ob) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for CitationGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} documents, {} edges", self.doc_count(), self.edge_count())
    }
}

struct GraphBuilder {
    documents_label: String,
    edges_label: String,
    ids: Vec<String>,
    years: Vec<i32>,
    index: HashMap<String, u32>,
    adj: Vec<Vec<u32>>,
    edge_count: usize,
}

impl GraphBuilder {
    fn new(documents_label: &str, edges_label: &str) -> Self {
        GraphBuilder {
            documents_label: documents_label.to_string(),
            edges_label: edges_label.to_string(),
            ids: Vec::new(),
            years: Vec::new(),
            index: HashMap::new(),
            adj: Vec::new(),
            edge_count: 0,
        }
    }

    fn add_document(&mut self, doc: Document, line: usize) -> Result<()> {
        if self.index.contains_key(&doc.id) {
            return Err(Error::DuplicateDocument {
                path: self.documents_label.clone(),
                line,
                id: doc.id,
            });
        }
        let idx = self.ids.len() as u32;
        self.index.insert(doc.id.clone(), idx);
        self.ids.push(doc.id);
        self.years.push(doc.year);
        self.adj.push(Vec::new());
        Ok(())
    }

    fn add_edge(&mut self, a: &str, b: &str, line: usize) -> Result<()> {
        let ia = self.lookup(a, line)?;
        let ib = self.lookup(b, line)?;
        if ia == ib {
            return Ok(()); // self-citation
        }
        if self.adj[ia as usize].contains(&ib) {
            return Ok(()); // duplicate or reversed duplicate
        }
        self.adj[ia as usize].push(ib);
        self.adj[ib as usize].push(ia);
        self.edge_count += 1;
        Ok(())
    }

    fn lookup(&self, id: &str, line: usize) -> Result<u32> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownEndpoint {
            path: self.edges_label.clone(),
            line,
            id: id.to_string(),
        })
    }

    fn finish(mut self) -> CitationGraph {
        for nbrs in &mut self.adj {
            nbrs.sort_unstable();
        }
        CitationGraph {
            ids: self.ids,
            years: self.years,
            index: self.index,
            adj: self.adj,
            edge_count: self.edge_count,
        }
    }
}

/// Loads a corpus from a documents file and an edges file.
pub fn load_corpus(documents_path: &Path, edges_path: &Path) -> Result<CitationGraph> {
    let documents = fs::read_to_string(documents_path)
        .map_err(|e| Error::io(documents_path.display().to_string(), e))?;
    let edges = fs::read_to_string(edges_path)
        .map_err(|e| Error::io(edges_path.display().to_string(), e))?;
    CitationGraph::parse(
        &documents,
        &documents_path.display().to_string(),
        &edges,
        &edges_path.display().to_string(),
    )
}

/// Publication-year window for a task year: the window ends the year before
/// the task year and spans `span` calendar years, both ends inclusive.
pub fn year_window(task_year: i32, span: i32) -> Result<(i32, i32)> {
    if span < 1 {
        return Err(Error::invalid("year window", format!("span {span} < 1")));
    }
    let max_year = task_year - 1;
    let min_year = max_year - span + 1;
    Ok((min_year, max_year))
}
