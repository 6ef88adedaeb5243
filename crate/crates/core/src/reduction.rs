//! Encoding of Hamiltonian path as an EDD instance, and the way back.
//!
//! Node labels after augmentation: the original nodes keep `1..=l0`, then
//! `t = l0 + 1` and `z = l0 + 2`, so `l = l0 + 2`. The primed length of node
//! `v` is `v + l`. Lengths alone cannot identify fragments (several `a_v`
//! may coincide), so [`ReducedInstance`] keeps the fragment-to-node map.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::instance::{validate_consistency, EddInstance};
use crate::verifier::Solution;

/// Largest graph accepted by [`has_hamiltonian_path`].
pub const HP_ORACLE_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("graph has no nodes")]
    Empty,
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("edge {0}-{1} listed twice")]
    DuplicateEdge(usize, usize),
    #[error("edge endpoint {node} outside 1..={max}")]
    NodeOutOfRange { node: usize, max: usize },
    #[error("malformed solution: {0}")]
    MalformedSolution(String),
    #[error("Hamiltonian path oracle limited to {limit} nodes, graph has {nodes}")]
    CapExceeded { nodes: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct GraphParseError {
    /// 1-based; 0 when the problem is the document as a whole.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for GraphParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            0 => f.write_str(&self.message),
            n => write!(f, "line {n}: {}", self.message),
        }
    }
}

/// Undirected graph on nodes `1..=node_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    node_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, ReductionError> {
        if node_count == 0 {
            return Err(ReductionError::Empty);
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            for node in [u, v] {
                if node == 0 || node > node_count {
                    return Err(ReductionError::NodeOutOfRange {
                        node,
                        max: node_count,
                    });
                }
            }
            if u == v {
                return Err(ReductionError::SelfLoop(u));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(ReductionError::DuplicateEdge(u, v));
            }
        }
        Ok(SimpleGraph {
            node_count,
            edges: set,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.node_count + 1];
        let mut stack = vec![1];
        seen[1] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.node_count
    }

    /// Neighbour lists indexed by node; entry 0 is unused.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count + 1];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Whether `path` visits every node once along edges of the graph.
    pub fn is_hamiltonian_path(&self, path: &[usize]) -> bool {
        let mut seen = vec![false; self.node_count + 1];
        path.len() == self.node_count
            && path.iter().all(|&v| {
                (1..=self.node_count).contains(&v) && !std::mem::replace(&mut seen[v], true)
            })
            && path.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }
}

/// `GRAPH <n>` followed by one `u v` edge per line; `#` starts a comment.
pub fn parse_graph(text: &str) -> Result<SimpleGraph, GraphParseError> {
    let mut node_count = None;
    let mut edges = Vec::new();
    let err = |line: usize, message: String| GraphParseError { line, message };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let toks: Vec<&str> = raw
            .split('#')
            .next()
            .unwrap_or("")
            .split_whitespace()
            .collect();
        if toks.is_empty() {
            continue;
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(line, format!("`{s}` is not a node number")))
        };
        match node_count {
            None => {
                if toks.len() != 2 || toks[0] != "GRAPH" {
                    return Err(err(line, "expected `GRAPH <node_count>`".into()));
                }
                node_count = Some(num(toks[1])?);
            }
            Some(_) => {
                if toks.len() != 2 {
                    return Err(err(line, "expected an edge `u v`".into()));
                }
                edges.push((num(toks[0])?, num(toks[1])?, line));
            }
        }
    }
    let n = node_count.ok_or_else(|| err(0, "missing `GRAPH` header".into()))?;
    let pairs: Vec<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    SimpleGraph::new(n, &pairs).map_err(|e| {
        let line = match e {
            ReductionError::SelfLoop(u) => edges.iter().find(|x| x.0 == u && x.1 == u).map(|x| x.2),
            ReductionError::DuplicateEdge(u, v) => edges
                .iter()
                .filter(|x| (x.0.min(x.1), x.0.max(x.1)) == (u.min(v), u.max(v)))
                .nth(1)
                .map(|x| x.2),
            ReductionError::NodeOutOfRange { node, .. } => edges
                .iter()
                .find(|x| x.0 == node || x.1 == node)
                .map(|x| x.2),
            _ => None,
        };
        err(line.unwrap_or(1), e.to_string())
    })
}

pub fn serialize_graph(h: &SimpleGraph) -> String {
    let mut out = format!("GRAPH {}\n", h.node_count);
    for (u, v) in h.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// `h` plus a node `t` joined to every original node and a leaf `z` on `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedGraph {
    pub base: SimpleGraph,
    pub graph: SimpleGraph,
}

impl AugmentedGraph {
    pub fn l0(&self) -> usize {
        self.base.node_count
    }

    pub fn l(&self) -> usize {
        self.base.node_count + 2
    }

    pub fn t(&self) -> usize {
        self.l0() + 1
    }

    pub fn z(&self) -> usize {
        self.l0() + 2
    }

    /// Degree in the augmented graph.
    pub fn kappa(&self, v: usize) -> usize {
        self.graph
            .edges()
            .filter(|&(a, b)| a == v || b == v)
            .count()
    }

    pub fn prime(&self, v: usize) -> u64 {
        (v + self.l()) as u64
    }

    pub fn node_name(&self, v: usize) -> String {
        if v == self.t() {
            "t".into()
        } else if v == self.z() {
            "z".into()
        } else {
            v.to_string()
        }
    }
}

pub fn augment(h: &SimpleGraph) -> AugmentedGraph {
    let l0 = h.node_count;
    let (t, z) = (l0 + 1, l0 + 2);
    let mut edges: Vec<(usize, usize)> = h.edges().collect();
    edges.extend((1..=l0).map(|v| (v, t)));
    edges.push((t, z));
    AugmentedGraph {
        base: h.clone(),
        graph: SimpleGraph::new(l0 + 2, &edges).expect("augmentation adds only fresh edges"),
    }
}

/// Which node a B fragment encodes: `full` for `b_v = v + v'`, otherwise one
/// of the extra `v'` copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BNode {
    pub node: usize,
    pub full: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedInstance {
    pub instance: EddInstance,
    pub augmented: AugmentedGraph,
    /// A fragment `i` encodes node `a_nodes[i]`.
    pub a_nodes: Vec<usize>,
    pub b_nodes: Vec<BNode>,
}

impl ReducedInstance {
    /// EDD text with the fragment-to-node map as comments.
    pub fn to_text(&self) -> String {
        let aug = &self.augmented;
        let mut out = format!(
            "# reduced from a graph with {} nodes and {} edges; t = {}, z = {}, v' = v + {}\n",
            aug.l0(),
            aug.base.edge_count(),
            aug.t(),
            aug.z(),
            aug.l()
        );
        for (i, &v) in self.a_nodes.iter().enumerate() {
            let _ = writeln!(out, "# node A{} = {}", i + 1, aug.node_name(v));
        }
        for (j, b) in self.b_nodes.iter().enumerate() {
            let prime = if b.full { "" } else { "'" };
            let _ = writeln!(out, "# node B{} = {}{prime}", j + 1, aug.node_name(b.node));
        }
        out.push_str(&crate::instance::serialize_instance(&self.instance));
        out
    }
}

pub fn reduce(h: &SimpleGraph) -> ReducedInstance {
    let aug = augment(h);
    let adj = aug.graph.adjacency();
    let (t, z) = (aug.t(), aug.z());

    let mut a_lengths = Vec::with_capacity(aug.l());
    let mut ab_sets = Vec::with_capacity(aug.l());
    for (v, nbrs) in adj.iter().enumerate().skip(1) {
        let set: Vec<u64> = if v == z {
            vec![aug.prime(t)]
        } else {
            // z' is never used: z contributes nothing to AB_t.
            let mut s: Vec<u64> = nbrs
                .iter()
                .filter(|&&u| u != z)
                .map(|&u| aug.prime(u))
                .collect();
            s.push(v as u64);
            s
        };
        a_lengths.push(set.iter().sum());
        ab_sets.push(set);
    }

    let mut b_lengths = Vec::new();
    let mut ba_sets = Vec::new();
    let mut b_nodes = Vec::new();
    for (v, nbrs) in adj.iter().enumerate().take(z).skip(1) {
        b_lengths.push(v as u64 + aug.prime(v));
        ba_sets.push(vec![v as u64, aug.prime(v)]);
        b_nodes.push(BNode {
            node: v,
            full: true,
        });
        for _ in 1..nbrs.len() {
            b_lengths.push(aug.prime(v));
            ba_sets.push(vec![aug.prime(v)]);
            b_nodes.push(BNode {
                node: v,
                full: false,
            });
        }
    }

    let instance = EddInstance::new(a_lengths, b_lengths, ab_sets, ba_sets)
        .expect("reduced instances are well formed");
    let report = validate_consistency(&instance);
    assert!(
        report.is_consistent(),
        "reduction broke consistency: {report:?}"
    );
    ReducedInstance {
        instance,
        a_nodes: (1..=aug.l()).collect(),
        b_nodes,
        augmented: aug,
    }
}

/// Reads the node order off `pi_a` and drops `t` and `z` from the end they
/// occupy.
pub fn extract_path(
    sol: &Solution,
    reduced: &ReducedInstance,
) -> Result<Vec<usize>, ReductionError> {
    let aug = &reduced.augmented;
    let malformed = |m: String| ReductionError::MalformedSolution(m);
    if sol.pi_a.len() != reduced.a_nodes.len() {
        return Err(malformed(format!(
            "pi_A has {} entries, expected {}",
            sol.pi_a.len(),
            reduced.a_nodes.len()
        )));
    }
    let mut nodes = Vec::with_capacity(sol.pi_a.len());
    for &i in &sol.pi_a {
        let v = *reduced
            .a_nodes
            .get(i)
            .ok_or_else(|| malformed(format!("A index {} out of range", i + 1)))?;
        nodes.push(v);
    }
    for w in nodes.windows(2) {
        if !aug.graph.has_edge(w[0], w[1]) {
            return Err(malformed(format!(
                "{} and {} are consecutive in pi_A but not adjacent",
                aug.node_name(w[0]),
                aug.node_name(w[1])
            )));
        }
    }
    if nodes.first() == Some(&aug.z()) {
        nodes.reverse();
    }
    let n = nodes.len();
    if n < 2 || nodes[n - 1] != aug.z() || nodes[n - 2] != aug.t() {
        return Err(malformed("pi_A does not end with t, z".into()));
    }
    nodes.truncate(n - 2);
    if !aug.base.is_hamiltonian_path(&nodes) {
        return Err(malformed(
            "extracted order is not a Hamiltonian path".into(),
        ));
    }
    Ok(nodes)
}

/// Exhaustive search; graphs above [`HP_ORACLE_LIMIT`] nodes are refused.
pub fn has_hamiltonian_path(h: &SimpleGraph) -> Result<bool, ReductionError> {
    Ok(find_hamiltonian_path(h)?.is_some())
}

pub fn find_hamiltonian_path(h: &SimpleGraph) -> Result<Option<Vec<usize>>, ReductionError> {
    if h.node_count > HP_ORACLE_LIMIT {
        return Err(ReductionError::CapExceeded {
            nodes: h.node_count,
            limit: HP_ORACLE_LIMIT,
        });
    }
    let adj = h.adjacency();
    let mut used = vec![false; h.node_count + 1];
    let mut path = Vec::with_capacity(h.node_count);
    for start in 1..=h.node_count {
        used[start] = true;
        path.push(start);
        if extend(&adj, &mut used, &mut path, h.node_count) {
            return Ok(Some(path));
        }
        path.pop();
        used[start] = false;
    }
    Ok(None)
}

fn extend(adj: &[Vec<usize>], used: &mut [bool], path: &mut Vec<usize>, n: usize) -> bool {
    if path.len() == n {
        return true;
    }
    let last = *path.last().unwrap();
    for &w in &adj[last] {
        if !used[w] {
            used[w] = true;
            path.push(w);
            if extend(adj, used, path, n) {
                return true;
            }
            path.pop();
            used[w] = false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::verifier::{brute_force_solve, verify_permutation};

    fn g(n: usize, e: &[(usize, usize)]) -> SimpleGraph {
        SimpleGraph::new(n, e).unwrap()
    }

    #[test]
    fn augmentation() {
        let one = augment(&g(1, &[]));
        assert_eq!(one.l(), 3);
        assert_eq!(one.graph.edges().collect::<Vec<_>>(), vec![(1, 2), (2, 3)]);

        let edge = augment(&g(2, &[(1, 2)]));
        assert_eq!(edge.l(), 4);
        assert_eq!(
            edge.graph.edges().collect::<Vec<_>>(),
            vec![(1, 2), (1, 3), (2, 3), (3, 4)]
        );

        let tri = augment(&g(3, &[(1, 2), (2, 3), (1, 3)]));
        assert_eq!(tri.l(), 5);
        assert_eq!(tri.kappa(tri.t()), 4);
        assert_eq!(tri.kappa(tri.z()), 1);
    }

    #[test]
    fn edge_graph_reduction() {
        let r = reduce(&g(2, &[(1, 2)]));
        let inst = &r.instance;
        assert_eq!(inst.a_lengths, vec![14, 14, 14, 7]);
        assert_eq!(
            inst.ab_sets,
            vec![vec![1, 6, 7], vec![2, 5, 7], vec![3, 5, 6], vec![7]]
        );
        // b_1 = 6, one extra 5; b_2 = 8, one extra 6; b_t = 10, two extra 7s.
        assert_eq!(inst.b_lengths, vec![6, 5, 8, 6, 10, 7, 7]);
        assert_eq!(inst.c_len(), inst.p() + inst.q() - 1);
    }

    #[test]
    fn single_node_reduction() {
        let r = reduce(&g(1, &[]));
        let inst = &r.instance;
        // t = 2, z = 3, primes +3: a_1 = 1 + 5, a_t = 2 + 4, a_z = 5.
        assert_eq!(inst.a_lengths, vec![6, 6, 5]);
        assert_eq!(inst.ab_sets, vec![vec![1, 5], vec![2, 4], vec![5]]);
        assert_eq!(inst.b_lengths, vec![5, 7, 5]);
        assert_eq!(inst.ba_sets, vec![vec![1, 4], vec![2, 5], vec![5]]);
    }

    #[test]
    fn identity_map_in_text() {
        let r = reduce(&g(2, &[(1, 2)]));
        let text = r.to_text();
        assert!(text.contains("# node A3 = t\n"));
        assert!(text.contains("# node A4 = z\n"));
        assert!(text.contains("# node B6 = t'\n"));
        assert_eq!(parse_instance(&text).unwrap(), r.instance);
    }

    #[test]
    fn oracle_solutions_extract_to_paths() {
        // Larger graphs exceed the oracle's fragment limit.
        for h in [g(1, &[]), g(2, &[(1, 2)])] {
            let r = reduce(&h);
            let sols = brute_force_solve(&r.instance, 12).unwrap();
            assert!(!sols.is_empty());
            for s in &sols {
                assert!(verify_permutation(&r.instance, &s.pi_a, &s.pi_b).is_ok());
                let path = extract_path(s, &r).unwrap();
                assert!(h.is_hamiltonian_path(&path), "{path:?}");
            }
        }
    }

    #[test]
    fn edge_graph_identity_order_extracts() {
        let r = reduce(&g(2, &[(1, 2)]));
        let sol = Solution {
            pi_a: vec![0, 1, 2, 3],
            pi_b: vec![],
            pi_c: vec![],
        };
        assert_eq!(extract_path(&sol, &r).unwrap(), vec![1, 2]);
        let bad = Solution {
            pi_a: vec![3, 0, 1, 2],
            pi_b: vec![],
            pi_c: vec![],
        };
        assert!(matches!(
            extract_path(&bad, &r),
            Err(ReductionError::MalformedSolution(_))
        ));
    }

    #[test]
    fn hamiltonian_oracle() {
        assert!(has_hamiltonian_path(&g(3, &[(1, 2), (2, 3)])).unwrap());
        assert!(!has_hamiltonian_path(&g(4, &[(1, 2), (1, 3), (1, 4)])).unwrap());
        assert!(has_hamiltonian_path(&g(1, &[])).unwrap());
        assert!(!has_hamiltonian_path(&g(2, &[])).unwrap());
        assert!(matches!(
            has_hamiltonian_path(&g(11, &[])),
            Err(ReductionError::CapExceeded { .. })
        ));
    }

    #[test]
    fn graph_validation() {
        assert_eq!(SimpleGraph::new(0, &[]), Err(ReductionError::Empty));
        assert_eq!(
            SimpleGraph::new(2, &[(1, 1)]),
            Err(ReductionError::SelfLoop(1))
        );
        assert_eq!(
            SimpleGraph::new(2, &[(1, 2), (2, 1)]),
            Err(ReductionError::DuplicateEdge(2, 1))
        );
        assert!(SimpleGraph::new(2, &[(1, 3)]).is_err());
    }

    #[test]
    fn graph_file_round_trip() {
        let h = parse_graph("# triangle\nGRAPH 3\n1 2\n2 3 # last\n3 1\n").unwrap();
        assert_eq!(h, g(3, &[(1, 2), (2, 3), (1, 3)]));
        assert_eq!(serialize_graph(&h), "GRAPH 3\n1 2\n1 3\n2 3\n");
        assert_eq!(parse_graph(&serialize_graph(&h)).unwrap(), h);
        assert_eq!(parse_graph("GRAPH 3\n1 2\n2 1\n").unwrap_err().line, 3);
        assert!(parse_graph("1 2\n").is_err());
        assert!(parse_graph("").is_err());
    }
}
