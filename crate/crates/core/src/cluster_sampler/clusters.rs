//! Connected clusters: multisets of Hamiltonian terms whose underlying set is
//! connected in the term-overlap graph. Enumeration feeds the per-cluster
//! Moebius validation path; the production marginal uses the degree-tracked
//! Dyson recursion which sums the same series.

use super::params::TermOverlapGraph;

/// A multiset of term indices in canonical form: sorted `(term, multiplicity)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cluster {
    pub parts: Vec<(usize, usize)>,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.parts.iter().map(|&(_, m)| m).sum()
    }

    pub fn support_terms(&self) -> impl Iterator<Item = usize> + '_ {
        self.parts.iter().map(|&(t, _)| t)
    }
}

/// All connected multisets of total multiplicity `m`, canonical and
/// deduplicated.
pub fn enumerate_clusters(graph: &TermOverlapGraph, m: usize) -> Vec<Cluster> {
    let n = graph.adjacency.len();
    let mut out = Vec::new();
    if m == 0 || n == 0 {
        return out;
    }
    // connected subsets up to size m, then multiplicity compositions
    for set in connected_subsets(graph, m) {
        let u = set.len();
        for comp in compositions(m, u) {
            out.push(Cluster { parts: set.iter().copied().zip(comp).collect() });
        }
    }
    out.sort();
    out
}

/// Connected induced subsets of the overlap graph with size <= max_size.
/// Standard enumeration: grow each set only with neighbors of the current
/// set that are larger than the set's designated root, so each subset is
/// produced exactly once.
pub fn connected_subsets(graph: &TermOverlapGraph, max_size: usize) -> Vec<Vec<usize>> {
    let n = graph.adjacency.len();
    let mut out = Vec::new();
    for root in 0..n {
        let mut set = vec![root];
        let mut forbidden = vec![false; n];
        for v in 0..=root {
            forbidden[v] = true;
        }
        grow(graph, &mut set, &mut forbidden, max_size, &mut out);
    }
    out
}

fn grow(
    graph: &TermOverlapGraph,
    set: &mut Vec<usize>,
    forbidden: &mut Vec<bool>,
    max_size: usize,
    out: &mut Vec<Vec<usize>>,
) {
    out.push(set.clone());
    if set.len() == max_size {
        return;
    }
    // candidate extensions: neighbors of the current set, not forbidden
    let mut cands: Vec<usize> = Vec::new();
    for &v in set.iter() {
        for &w in &graph.adjacency[v] {
            if !forbidden[w] && !cands.contains(&w) {
                cands.push(w);
            }
        }
    }
    cands.sort_unstable();
    for (i, &c) in cands.iter().enumerate() {
        forbidden[c] = true;
        set.push(c);
        // forbid earlier candidates in the recursive call so each extension
        // order is canonical
        let mut newly = Vec::new();
        for &earlier in &cands[..i] {
            if !forbidden[earlier] {
                forbidden[earlier] = true;
                newly.push(earlier);
            }
        }
        grow(graph, set, forbidden, max_size, out);
        set.pop();
        for e in newly {
            forbidden[e] = false;
        }
        // c stays forbidden for later iterations at this level
    }
    for &c in &cands {
        forbidden[c] = false;
    }
}

/// Compositions of `total` into exactly `parts` positive integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if parts == 0 || parts > total {
        return out;
    }
    let mut cur = vec![0; parts];
    fn rec(total: usize, idx: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let parts = cur.len();
        if idx == parts - 1 {
            cur[idx] = total;
            out.push(cur.clone());
            return;
        }
        let remaining_parts = parts - idx - 1;
        for v in 1..=(total - remaining_parts) {
            cur[idx] = v;
            rec(total - v, idx + 1, cur, out);
        }
    }
    rec(total, 0, &mut cur, &mut out);
    out
}

/// Brute-force oracle: every multiset of size m over the terms, kept when its
/// underlying set is connected.
pub fn enumerate_clusters_brute(graph: &TermOverlapGraph, m: usize) -> Vec<Cluster> {
    let n = graph.adjacency.len();
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn rec(
        n: usize,
        m: usize,
        start: usize,
        pick: &mut Vec<usize>,
        graph: &TermOverlapGraph,
        out: &mut Vec<Cluster>,
    ) {
        if pick.len() == m {
            let mut set: Vec<usize> = pick.clone();
            set.dedup();
            if is_connected(graph, &set) {
                let mut parts: Vec<(usize, usize)> = Vec::new();
                for &t in pick.iter() {
                    if let Some(last) = parts.last_mut() {
                        if last.0 == t {
                            last.1 += 1;
                            continue;
                        }
                    }
                    parts.push((t, 1));
                }
                out.push(Cluster { parts });
            }
            return;
        }
        for t in start..n {
            pick.push(t);
            rec(n, m, t, pick, graph, out);
            pick.pop();
        }
    }
    rec(n, m, 0, &mut pick, graph, &mut out);
    out.sort();
    out
}

pub fn is_connected(graph: &TermOverlapGraph, set: &[usize]) -> bool {
    if set.is_empty() {
        return false;
    }
    let mut seen = vec![false; graph.adjacency.len()];
    let mut stack = vec![set[0]];
    seen[set[0]] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &graph.adjacency[v] {
            if set.contains(&w) && !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == set.len()
}
