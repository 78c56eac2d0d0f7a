//! Bipartite support graphs, acyclicity and forest structure.
//!
//! A coupling is extremal exactly when the bipartite graph with one edge per
//! positive entry is a forest. When it is not, the first cycle met by a
//! depth-first search (neighbors visited in ascending order) is returned in
//! alternating form.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::measures::Coupling;
use crate::scalar::Scalar;

/// Row site `X(i)` or column site `Y(j)`. X nodes sort before Y nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Node {
    X(usize),
    Y(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportGraph {
    x_nodes: BTreeSet<usize>,
    y_nodes: BTreeSet<usize>,
    edges: BTreeSet<(usize, usize)>,
    x_adj: BTreeMap<usize, Vec<usize>>,
    y_adj: BTreeMap<usize, Vec<usize>>,
}

impl SupportGraph {
    /// Graph on exactly the sites touched by `edges`.
    pub fn from_edges(edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        let mut g = SupportGraph::default();
        for &(i, j) in &edges {
            g.x_nodes.insert(i);
            g.y_nodes.insert(j);
            g.x_adj.entry(i).or_default().push(j);
            g.y_adj.entry(j).or_default().push(i);
        }
        // BTreeSet iteration is lexicographic, so x_adj lists are already sorted.
        for list in g.y_adj.values_mut() {
            list.sort_unstable();
        }
        g.edges = edges;
        g
    }

    pub fn x_nodes(&self) -> &BTreeSet<usize> {
        &self.x_nodes
    }

    pub fn y_nodes(&self) -> &BTreeSet<usize> {
        &self.y_nodes
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn contains_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    pub fn node_count(&self) -> usize {
        self.x_nodes.len() + self.y_nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.x_nodes
            .iter()
            .map(|&i| Node::X(i))
            .chain(self.y_nodes.iter().map(|&j| Node::Y(j)))
    }

    /// Neighbors in ascending order.
    pub fn neighbors(&self, node: Node) -> Vec<Node> {
        match node {
            Node::X(i) => self
                .x_adj
                .get(&i)
                .map(|v| v.iter().map(|&j| Node::Y(j)).collect())
                .unwrap_or_default(),
            Node::Y(j) => self
                .y_adj
                .get(&j)
                .map(|v| v.iter().map(|&i| Node::X(i)).collect())
                .unwrap_or_default(),
        }
    }

    pub fn degree(&self, node: Node) -> usize {
        match node {
            Node::X(i) => self.x_adj.get(&i).map_or(0, Vec::len),
            Node::Y(j) => self.y_adj.get(&j).map_or(0, Vec::len),
        }
    }

    pub fn without_edge(&self, i: usize, j: usize) -> Self {
        Self::from_edges(self.edges.iter().copied().filter(|&e| e != (i, j)))
    }

    pub fn with_edge(&self, i: usize, j: usize) -> Self {
        Self::from_edges(self.edges.iter().copied().chain([(i, j)]))
    }

    /// Connected components, each sorted, listed by their smallest node.
    pub fn components(&self) -> Vec<Vec<Node>> {
        let mut seen: BTreeSet<Node> = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.nodes() {
            if seen.contains(&start) {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for w in self.neighbors(u) {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// One edge per positive entry; nodes are the sites touched by an edge.
pub fn build_support_graph<T: Scalar>(coupling: &Coupling<T>) -> SupportGraph {
    SupportGraph::from_edges(coupling.support())
}

/// Alternating cycle: `xs[i]` is joined to `ys[i]` and to `ys[(i + 1) % k]`.
///
/// Matches the pattern `(x1,y1), (x1,y2), (x2,y2), …, (xk,yk), (xk,y1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Edges `(x_i, y_i)`.
    pub fn even_edges(&self) -> Vec<(usize, usize)> {
        self.xs.iter().copied().zip(self.ys.iter().copied()).collect()
    }

    /// Edges `(x_i, y_{i+1})`.
    pub fn odd_edges(&self) -> Vec<(usize, usize)> {
        let k = self.len();
        (0..k).map(|i| (self.xs[i], self.ys[(i + 1) % k])).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = self.even_edges();
        e.extend(self.odd_edges());
        e
    }

    /// Distinct rows, distinct columns, `k >= 2`, all `2k` edges present.
    pub fn is_valid_in(&self, graph: &SupportGraph) -> bool {
        let k = self.len();
        let distinct_x: BTreeSet<_> = self.xs.iter().collect();
        let distinct_y: BTreeSet<_> = self.ys.iter().collect();
        k >= 2
            && self.ys.len() == k
            && distinct_x.len() == k
            && distinct_y.len() == k
            && self.edges().iter().all(|&(i, j)| graph.contains_edge(i, j))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestReport {
    pub is_forest: bool,
    pub components: Vec<Vec<Node>>,
    pub witness_cycle: Option<Cycle>,
}

pub fn acyclicity_test(graph: &SupportGraph) -> ForestReport {
    let witness_cycle = find_cycle(graph);
    ForestReport {
        is_forest: witness_cycle.is_none(),
        components: graph.components(),
        witness_cycle,
    }
}

fn find_cycle(graph: &SupportGraph) -> Option<Cycle> {
    let mut visited: BTreeSet<Node> = BTreeSet::new();
    for root in graph.nodes() {
        if visited.contains(&root) {
            continue;
        }
        visited.insert(root);
        // (node, parent, neighbors, next neighbor index)
        let mut stack: Vec<(Node, Option<Node>, Vec<Node>, usize)> =
            vec![(root, None, graph.neighbors(root), 0)];
        while let Some(top) = stack.last_mut() {
            let (u, parent) = (top.0, top.1);
            if top.3 >= top.2.len() {
                stack.pop();
                continue;
            }
            let w = top.2[top.3];
            top.3 += 1;
            if Some(w) == parent {
                continue;
            }
            if visited.contains(&w) {
                // First non-tree edge in DFS order always closes onto the stack path.
                let start = stack.iter().position(|f| f.0 == w)?;
                let mut path: Vec<Node> = stack[start..].iter().map(|f| f.0).collect();
                debug_assert_eq!(path.last(), Some(&u));
                // Walk the cycle as w, u, ..., so the alternating form lists
                // each x with its tree-path successor first.
                path[1..].reverse();
                return Some(alternating_form(&path));
            }
            visited.insert(w);
            stack.push((w, Some(u), graph.neighbors(w), 0));
        }
    }
    None
}

/// Converts a closed walk `v0, v1, …, v_{2k-1}` into `(xs, ys)` with
/// `xs[i] ~ ys[i]` and `xs[i] ~ ys[i+1]`.
fn alternating_form(walk: &[Node]) -> Cycle {
    let n = walk.len();
    let shift = walk.iter().position(|v| matches!(v, Node::X(_))).unwrap_or(0);
    let rotated: Vec<Node> = (0..n).map(|t| walk[(t + shift) % n]).collect();
    let k = n / 2;
    let mut xs = Vec::with_capacity(k);
    let mut ys = Vec::with_capacity(k);
    for i in 0..k {
        if let Node::X(x) = rotated[2 * i] {
            xs.push(x);
        }
        // ys[i] precedes xs[i] on the walk.
        let prev = rotated[(2 * i + n - 1) % n];
        if let Node::Y(y) = prev {
            ys.push(y);
        }
    }
    Cycle { xs, ys }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_disjoint_edges() {
        let g = SupportGraph::from_edges([(0, 0), (1, 1), (2, 2)]);
        let r = acyclicity_test(&g);
        assert!(r.is_forest);
        assert_eq!(r.components.len(), 3);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn k22_witness_matches_alternating_pattern() {
        let g = SupportGraph::from_edges([(0, 0), (0, 1), (1, 0), (1, 1)]);
        let r = acyclicity_test(&g);
        assert!(!r.is_forest);
        let c = r.witness_cycle.unwrap();
        assert_eq!(c, Cycle { xs: vec![0, 1], ys: vec![0, 1] });
        assert!(c.is_valid_in(&g));
    }

    #[test]
    fn permutation_is_forest() {
        let g = SupportGraph::from_edges([(0, 2), (1, 0), (2, 1)]);
        assert!(acyclicity_test(&g).is_forest);
    }

    #[test]
    fn six_cycle_witness_is_valid() {
        // x0-y0-x1-y1-x2-y2-x0
        let g = SupportGraph::from_edges([(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (0, 2), (3, 3)]);
        let r = acyclicity_test(&g);
        let c = r.witness_cycle.unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.is_valid_in(&g));
        assert_eq!(r.components.len(), 2);
    }

    #[test]
    fn empty_graph_is_forest() {
        let r = acyclicity_test(&SupportGraph::default());
        assert!(r.is_forest);
        assert!(r.components.is_empty());
    }

    #[test]
    fn build_from_coupling_skips_unused_sites() {
        let c = Coupling::new(3, 3, [(0, 0, 0.5), (2, 1, 0.5)]).unwrap();
        let g = build_support_graph(&c);
        assert_eq!(g.x_nodes().iter().copied().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(g.y_nodes().iter().copied().collect::<Vec<_>>(), vec![0, 1]);
    }
}
