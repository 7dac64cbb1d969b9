//! Interaction graphs with precomputed shortest-path distances.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INFINITE_DISTANCE: u32 = u32::MAX;

/// Simple undirected graph over vertices `0..n`, with all-pairs BFS distances.
#[derive(Debug, Clone)]
pub struct InteractionGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    dist: Vec<Vec<u32>>,
    max_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GraphKind {
    Chain { n: usize },
    Ring { n: usize },
    Grid { width: usize, height: usize },
    Explicit { n: usize, edges: Vec<(usize, usize)> },
}

/// Build a graph of the given kind; distances are precomputed (N <= 64).
pub fn build_graph(kind: &GraphKind) -> Result<InteractionGraph> {
    let (n, edges) = match kind {
        GraphKind::Chain { n } => {
            if *n == 0 {
                return Err(Error::Structural("chain needs at least one vertex".into()));
            }
            (*n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect())
        }
        GraphKind::Ring { n } => {
            if *n < 3 {
                return Err(Error::Structural("ring needs at least three vertices".into()));
            }
            let mut e: Vec<(usize, usize)> = (0..*n - 1).map(|i| (i, i + 1)).collect();
            e.push((*n - 1, 0));
            (*n, e)
        }
        GraphKind::Grid { width, height } => {
            if *width == 0 || *height == 0 {
                return Err(Error::Structural("grid needs positive dimensions".into()));
            }
            let idx = |x: usize, y: usize| y * width + x;
            let mut e = Vec::new();
            for y in 0..*height {
                for x in 0..*width {
                    if x + 1 < *width {
                        e.push((idx(x, y), idx(x + 1, y)));
                    }
                    if y + 1 < *height {
                        e.push((idx(x, y), idx(x, y + 1)));
                    }
                }
            }
            (width * height, e)
        }
        GraphKind::Explicit { n, edges } => (*n, edges.clone()),
    };
    InteractionGraph::new(n, edges)
}

impl InteractionGraph {
    pub fn new(n: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structural("graph needs at least one vertex".into()));
        }
        if n > 64 {
            return Err(Error::Resource(format!(
                "all-pairs distances are precomputed only for N <= 64 (got {n})"
            )));
        }
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
            if e.0 == e.1 {
                return Err(Error::Structural(format!("self-loop at vertex {}", e.0)));
            }
            if e.1 >= n {
                return Err(Error::Structural(format!(
                    "edge ({}, {}) references vertex out of range 0..{n}",
                    e.0, e.1
                )));
            }
        }
        edges.sort();
        let before = edges.len();
        edges.dedup();
        if edges.len() != before {
            return Err(Error::Structural("duplicate edge in graph".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
        }
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        let dist = (0..n).map(|s| bfs(&adj, s)).collect();
        Ok(Self { n, edges, adj, dist, max_degree })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Shortest-path distance; `INFINITE_DISTANCE` when disconnected.
    pub fn distance(&self, i: usize, j: usize) -> u32 {
        self.dist[i][j]
    }

    /// Largest pairwise distance within a vertex set.
    pub fn diameter_of(&self, set: impl IntoIterator<Item = usize> + Clone) -> u32 {
        let mut d = 0;
        for i in set.clone() {
            for j in set.clone() {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }

    /// True when every vertex degree is at most `k` and the graph is simple.
    pub fn is_chain(&self) -> bool {
        if self.n == 1 {
            return self.edges.is_empty();
        }
        self.edges.len() == self.n - 1
            && (0..self.n - 1).all(|i| self.edges.contains(&(i, i + 1)))
    }
}

fn bfs(adj: &[Vec<usize>], start: usize) -> Vec<u32> {
    let mut d = vec![INFINITE_DISTANCE; adj.len()];
    d[start] = 0;
    let mut q = VecDeque::from([start]);
    while let Some(v) = q.pop_front() {
        for &w in &adj[v] {
            if d[w] == INFINITE_DISTANCE {
                d[w] = d[v] + 1;
                q.push_back(w);
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_distances() {
        let g = build_graph(&GraphKind::Chain { n: 4 }).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(g.distance(0, 3), 3);
        assert_eq!(g.max_degree(), 2);
        assert!(g.is_chain());
    }

    #[test]
    fn grid_2x2_is_a_square() {
        let g = build_graph(&GraphKind::Grid { width: 2, height: 2 }).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.max_degree(), 2);
    }

    #[test]
    fn triangle_has_unit_distances() {
        let g = build_graph(&GraphKind::Ring { n: 3 }).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(g.distance(i, j) <= 1);
            }
        }
    }

    #[test]
    fn malformed_edges_rejected() {
        assert!(InteractionGraph::new(3, vec![(0, 3)]).is_err());
        assert!(InteractionGraph::new(3, vec![(1, 1)]).is_err());
        assert!(InteractionGraph::new(3, vec![(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn distance_is_a_metric() {
        let g = build_graph(&GraphKind::Grid { width: 3, height: 2 }).unwrap();
        let n = g.vertex_count();
        for i in 0..n {
            assert_eq!(g.distance(i, i), 0);
            for j in 0..n {
                assert_eq!(g.distance(i, j), g.distance(j, i));
                for k in 0..n {
                    assert!(g.distance(i, k) <= g.distance(i, j) + g.distance(j, k));
                }
            }
        }
    }
}
