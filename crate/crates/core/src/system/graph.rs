//! The control graph of a system: SCCs, simple cycles, flatness.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::CounterSystem;

/// Controls as nodes, transitions (by index) as edges.
#[derive(Clone, Debug)]
pub struct ControlGraph {
    nodes: Vec<u32>,
    index: BTreeMap<u32, usize>,
    edges: Vec<(usize, usize)>,
    out: Vec<Vec<usize>>,
}

impl ControlGraph {
    pub fn new(m: &CounterSystem) -> ControlGraph {
        let nodes: Vec<u32> = m.controls().iter().copied().collect();
        let index: BTreeMap<u32, usize> = nodes.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let edges: Vec<(usize, usize)> = m
            .transitions()
            .iter()
            .map(|t| (index[&t.source()], index[&t.target()]))
            .collect();
        ControlGraph::from_edges(nodes, edges)
    }

    /// A graph over nodes `0..n` named by `nodes`.
    pub fn from_edges(nodes: Vec<u32>, edges: Vec<(usize, usize)>) -> ControlGraph {
        let index = nodes.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let mut out = alloc::vec![Vec::new(); nodes.len()];
        for (e, &(s, _)) in edges.iter().enumerate() {
            out[s].push(e);
        }
        ControlGraph { nodes, index, edges, out }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, i: usize) -> u32 {
        self.nodes[i]
    }

    pub fn index_of(&self, q: u32) -> Option<usize> {
        self.index.get(&q).copied()
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn out_edges(&self, n: usize) -> &[usize] {
        &self.out[n]
    }

    /// Strongly connected components in reverse topological order (sinks
    /// first), each listed by node index.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        // iterative Tarjan
        let n = self.nodes.len();
        let mut idx = alloc::vec![usize::MAX; n];
        let mut low = alloc::vec![0usize; n];
        let mut on = alloc::vec![false; n];
        let mut stack = Vec::new();
        let mut out = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if idx[root] != usize::MAX {
                continue;
            }
            let mut work: Vec<(usize, usize)> = alloc::vec![(root, 0)];
            while let Some(&mut (v, ref mut pos)) = work.last_mut() {
                if *pos == 0 {
                    idx[v] = counter;
                    low[v] = counter;
                    counter += 1;
                    stack.push(v);
                    on[v] = true;
                }
                if *pos < self.out[v].len() {
                    let w = self.edges[self.out[v][*pos]].1;
                    *pos += 1;
                    if idx[w] == usize::MAX {
                        work.push((w, 0));
                    } else if on[w] {
                        low[v] = low[v].min(idx[w]);
                    }
                    continue;
                }
                work.pop();
                if let Some(&(u, _)) = work.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == idx[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
        out
    }

    /// Edges with both ends inside `comp`.
    pub fn internal_edges(&self, comp: &[usize]) -> Vec<usize> {
        let set: BTreeSet<usize> = comp.iter().copied().collect();
        (0..self.edges.len())
            .filter(|&e| set.contains(&self.edges[e].0) && set.contains(&self.edges[e].1))
            .collect()
    }

    /// No two distinct simple cycles share a node: every SCC with an
    /// internal edge is itself one simple cycle.
    pub fn is_flat(&self) -> bool {
        self.sccs().iter().all(|c| {
            let e = self.internal_edges(c);
            e.is_empty() || e.len() == c.len()
        })
    }

    /// Simple cycles as edge sequences, each starting at its smallest node.
    /// Stops after `limit` cycles.
    pub fn simple_cycles(&self, limit: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for start in 0..self.nodes.len() {
            let mut path = Vec::new();
            let mut visited = alloc::vec![false; self.nodes.len()];
            visited[start] = true;
            self.cycles_from(start, start, &mut visited, &mut path, &mut out, limit);
            if out.len() >= limit {
                out.truncate(limit);
                break;
            }
        }
        out
    }

    fn cycles_from(
        &self,
        start: usize,
        v: usize,
        visited: &mut [bool],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) {
        for &e in &self.out[v] {
            if out.len() >= limit {
                return;
            }
            let w = self.edges[e].1;
            if w == start {
                path.push(e);
                out.push(path.clone());
                path.pop();
            } else if w > start && !visited[w] {
                visited[w] = true;
                path.push(e);
                self.cycles_from(start, w, visited, path, out, limit);
                path.pop();
                visited[w] = false;
            }
        }
    }
}
