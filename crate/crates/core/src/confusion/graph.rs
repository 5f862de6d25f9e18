use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// An undirected side-information graph. Vertices are 1-based in the text
/// format and in [`SideInfoGraph::from_edges`], 0-based in `neighbours`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SideInfoGraph {
    n: usize,
    adjacency: Vec<Vec<usize>>,
}

impl SideInfoGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("graph needs at least one vertex".into()));
        }
        if n > 64 {
            return Err(Error::Invalid(format!("at most 64 vertices supported, got {n}")));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w == 0 || w > n {
                    return Err(Error::OutOfRange {
                        what: "vertex index",
                        value: w as u64,
                        bound: n as u64 + 1,
                    });
                }
            }
            if u == v {
                return Err(Error::Invalid(format!("self-loop at vertex {u}")));
            }
            let (a, b) = (u - 1, v - 1);
            if !adjacency[a].contains(&b) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        Ok(SideInfoGraph { n, adjacency })
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::CycleTooShort(n));
        }
        let edges: Vec<(usize, usize)> = (1..=n).map(|i| (i, i % n + 1)).collect();
        SideInfoGraph::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 1..=n {
            for v in u + 1..=n {
                edges.push((u, v));
            }
        }
        SideInfoGraph::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 0-based neighbours of 0-based vertex `v`, ascending.
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// 1-based edges `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u + 1, v + 1));
                }
            }
        }
        out
    }

    /// `Some(n)` when the edges are exactly `{i, i+1 mod n}` for `n >= 3`.
    pub fn as_cycle(&self) -> Option<usize> {
        if self.n < 3 {
            return None;
        }
        let expected = SideInfoGraph::cycle(self.n).ok()?;
        (expected.adjacency == self.adjacency).then_some(self.n)
    }

    /// Edge-list text: the vertex count on the first line, then one `u v` per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the edge-list format. The header may be `<n>` or `n=<n>`;
    /// blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (k, header) = lines.next().ok_or_else(|| Error::parse(0, "empty graph file"))?;
        let header = header.strip_prefix("n=").unwrap_or(header).trim();
        let n: usize = header
            .parse()
            .map_err(|_| Error::parse(k, format!("bad vertex count {header:?}")))?;
        let mut edges = Vec::new();
        for (k, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::parse(k, format!("expected `u v`, got {line:?}")));
            }
            let parse = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(k, format!("bad vertex {t:?}")))
            };
            edges.push((parse(parts[0])?, parse(parts[1])?));
        }
        SideInfoGraph::from_edges(n, &edges)
    }
}
