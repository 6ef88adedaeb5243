//! The membership graph over all fragments.
//!
//! Nodes are the A fragments, the B fragments and the labeled elements of
//! `C`; each `C` node is joined to its A-owner and its B-owner. An instance
//! has a valid map exactly when this graph is a tree and every subtree hanging
//! off a diameter is a dangler: one `C` node plus one leaf fragment.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use crate::instance::{LabeledInstance, LabeledLength};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    A,
    B,
    C,
}

/// Dense node index: A nodes first, then B nodes, then C nodes, so the
/// natural order is `(kind, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    fn ix(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
pub struct DigestGraph {
    p: usize,
    q: usize,
    elements: Vec<LabeledLength>,
    offsets: Vec<u32>,
    targets: Vec<NodeId>,
}

/// Builds the graph in `O(n)`.
pub fn build_graph(inst: &LabeledInstance<'_>) -> DigestGraph {
    let p = inst.base.p();
    let q = inst.base.q();
    let n = inst.c_elements.len();
    let total = p + q + n;

    let mut degree = vec![0u32; total];
    for c in &inst.c_elements {
        degree[c.a_owner] += 1;
        degree[p + c.b_owner] += 1;
    }
    for d in &mut degree[p + q..] {
        *d = 2;
    }
    let mut offsets = Vec::with_capacity(total + 1);
    offsets.push(0u32);
    for d in &degree {
        offsets.push(offsets.last().unwrap() + d);
    }
    let mut fill: Vec<u32> = offsets[..total].to_vec();
    let mut targets = vec![NodeId(0); 4 * n];
    for (k, c) in inst.c_elements.iter().enumerate() {
        let cid = NodeId((p + q + k) as u32);
        let a = NodeId(c.a_owner as u32);
        let b = NodeId((p + c.b_owner) as u32);
        for (from, to) in [(a, cid), (b, cid), (cid, a), (cid, b)] {
            targets[fill[from.ix()] as usize] = to;
            fill[from.ix()] += 1;
        }
    }
    DigestGraph {
        p,
        q,
        elements: inst.c_elements.clone(),
        offsets,
        targets,
    }
}

impl DigestGraph {
    pub fn node_count(&self) -> usize {
        self.p + self.q + self.elements.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        let i = id.ix();
        if i < self.p {
            NodeKind::A
        } else if i < self.p + self.q {
            NodeKind::B
        } else {
            NodeKind::C
        }
    }

    /// 0-based index within the node's kind.
    pub fn index(&self, id: NodeId) -> usize {
        match self.kind(id) {
            NodeKind::A => id.ix(),
            NodeKind::B => id.ix() - self.p,
            NodeKind::C => id.ix() - self.p - self.q,
        }
    }

    pub fn a_node(&self, i: usize) -> NodeId {
        NodeId(i as u32)
    }

    pub fn b_node(&self, j: usize) -> NodeId {
        NodeId((self.p + j) as u32)
    }

    pub fn c_node(&self, k: usize) -> NodeId {
        NodeId((self.p + self.q + k) as u32)
    }

    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        let (s, e) = (self.offsets[id.ix()], self.offsets[id.ix() + 1]);
        &self.targets[s as usize..e as usize]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.neighbors(id).len()
    }

    /// The labeled length behind a C node.
    pub fn element(&self, id: NodeId) -> Option<&LabeledLength> {
        match self.kind(id) {
            NodeKind::C => Some(&self.elements[self.index(id)]),
            _ => None,
        }
    }

    pub fn name(&self, id: NodeId) -> String {
        match self.kind(id) {
            NodeKind::A => format!("A{}", self.index(id) + 1),
            NodeKind::B => format!("B{}", self.index(id) + 1),
            NodeKind::C => {
                let c = &self.elements[self.index(id)];
                format!("C{}#{}", c.value, c.copy_id)
            }
        }
    }

    fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count() as u32).map(NodeId)
    }

    /// One `u v` line per edge, A/B endpoint first, grouped by C node.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for k in 0..self.elements.len() {
            let c = self.c_node(k);
            for &owner in self.neighbors(c) {
                let _ = writeln!(out, "{} {}", self.name(owner), self.name(c));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureViolation {
    /// The component of `A1` is a tree but other nodes are unreachable; since
    /// `|E| = |V| - 1`, some other component holds `cycle`.
    NotConnected {
        reached: usize,
        total: usize,
        cycle: Vec<NodeId>,
    },
    HasCycle {
        cycle: Vec<NodeId>,
    },
    /// The subtree rooted at C node `root`, hanging on diameter node
    /// `attachment`, has more than two nodes.
    DeepSubtree {
        attachment: NodeId,
        root: NodeId,
    },
}

impl StructureViolation {
    pub fn code(&self) -> &'static str {
        match self {
            StructureViolation::NotConnected { .. } => "NOT_CONNECTED",
            StructureViolation::HasCycle { .. } => "HAS_CYCLE",
            StructureViolation::DeepSubtree { .. } => "DEEP_SUBTREE",
        }
    }

    /// Human-readable form using the graph's node names.
    pub fn describe(&self, g: &DigestGraph) -> String {
        let names = |ids: &[NodeId]| {
            ids.iter()
                .map(|&id| g.name(id))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            StructureViolation::NotConnected {
                reached,
                total,
                cycle,
            } => format!(
                "{}: reached {reached} of {total} nodes; cycle {}",
                self.code(),
                names(cycle)
            ),
            StructureViolation::HasCycle { cycle } => {
                format!("{}: cycle {}", self.code(), names(cycle))
            }
            StructureViolation::DeepSubtree { attachment, root } => format!(
                "{}: subtree at {} hanging on {} is not a dangler",
                self.code(),
                g.name(*root),
                g.name(*attachment)
            ),
        }
    }
}

impl fmt::Display for StructureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A two-node subtree hanging on the diameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dangler {
    pub attachment: NodeId,
    pub element: NodeId,
    pub leaf: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureVerdict {
    pub is_tree: bool,
    /// Leaf to leaf; empty unless `is_tree`.
    pub diameter: Vec<NodeId>,
    /// In diameter order, then by element.
    pub danglers: Vec<Dangler>,
    pub violation: Option<StructureViolation>,
}

impl StructureVerdict {
    pub fn is_solvable(&self) -> bool {
        self.violation.is_none()
    }
}

/// Decides whether `g` is a tree whose diameter carries only danglers, in
/// `O(n)`.
pub fn check_structure(g: &DigestGraph) -> StructureVerdict {
    let total = g.node_count();
    let mut visited = vec![false; total];
    let (reached, cycle) = traverse(g, NodeId(0), &mut visited);
    if let Some(cycle) = cycle {
        return rejected(StructureViolation::HasCycle { cycle });
    }
    if reached < total {
        let cycle = g
            .nodes()
            .find_map(|id| {
                if visited[id.ix()] {
                    None
                } else {
                    traverse(g, id, &mut visited).1
                }
            })
            .unwrap_or_default();
        return rejected(StructureViolation::NotConnected {
            reached,
            total,
            cycle,
        });
    }

    let start = g
        .nodes()
        .find(|&id| g.degree(id) == 1)
        .expect("a tree with at least two nodes has a leaf");
    let (x, _, _) = farthest(g, start);
    let (y, _, parent) = farthest(g, x);
    let mut diameter = vec![y];
    let mut at = y;
    while at != x {
        at = parent[at.ix()];
        diameter.push(at);
    }

    let mut on_diameter = vec![false; total];
    for id in &diameter {
        on_diameter[id.ix()] = true;
    }
    let mut danglers = Vec::new();
    for &u in &diameter[1..diameter.len() - 1] {
        if g.kind(u) == NodeKind::C {
            continue;
        }
        for &c in g.neighbors(u) {
            if on_diameter[c.ix()] {
                continue;
            }
            let leaf = other_end(g, c, u);
            if g.degree(leaf) != 1 {
                return StructureVerdict {
                    is_tree: true,
                    diameter,
                    danglers,
                    violation: Some(StructureViolation::DeepSubtree {
                        attachment: u,
                        root: c,
                    }),
                };
            }
            danglers.push(Dangler {
                attachment: u,
                element: c,
                leaf,
            });
        }
    }
    StructureVerdict {
        is_tree: true,
        diameter,
        danglers,
        violation: None,
    }
}

fn rejected(violation: StructureViolation) -> StructureVerdict {
    StructureVerdict {
        is_tree: false,
        diameter: Vec::new(),
        danglers: Vec::new(),
        violation: Some(violation),
    }
}

fn other_end(g: &DigestGraph, c: NodeId, from: NodeId) -> NodeId {
    let nb = g.neighbors(c);
    if nb[0] == from {
        nb[1]
    } else {
        nb[0]
    }
}

const NONE: u32 = u32::MAX;

/// Depth-first traversal of the component of `start`. Returns the number of
/// nodes reached and the first cycle closed, as a node sequence.
fn traverse(g: &DigestGraph, start: NodeId, visited: &mut [bool]) -> (usize, Option<Vec<NodeId>>) {
    let mut stack: Vec<(NodeId, usize)> = vec![(start, 0)];
    let mut stack_pos = vec![NONE; visited.len()];
    visited[start.ix()] = true;
    stack_pos[start.ix()] = 0;
    let mut reached = 1;
    while let Some(&(u, next)) = stack.last() {
        let nb = g.neighbors(u);
        if next == nb.len() {
            stack_pos[u.ix()] = NONE;
            stack.pop();
            continue;
        }
        stack.last_mut().unwrap().1 += 1;
        let v = nb[next];
        let parent = stack.len().checked_sub(2).map(|i| stack[i].0);
        if Some(v) == parent {
            continue;
        }
        if stack_pos[v.ix()] != NONE {
            let from = stack_pos[v.ix()] as usize;
            return (
                reached,
                Some(stack[from..].iter().map(|&(id, _)| id).collect()),
            );
        }
        if !visited[v.ix()] {
            visited[v.ix()] = true;
            reached += 1;
            stack_pos[v.ix()] = stack.len() as u32;
            stack.push((v, 0));
        }
    }
    (reached, None)
}

/// Breadth-first search; returns the farthest node (smallest id on ties), its
/// distance and the parent array.
fn farthest(g: &DigestGraph, source: NodeId) -> (NodeId, usize, Vec<NodeId>) {
    let mut dist = vec![usize::MAX; g.node_count()];
    let mut parent = vec![NodeId(NONE); g.node_count()];
    let mut queue = VecDeque::from([source]);
    dist[source.ix()] = 0;
    let mut best = (source, 0);
    while let Some(u) = queue.pop_front() {
        let d = dist[u.ix()];
        if d > best.1 || (d == best.1 && u < best.0) {
            best = (u, d);
        }
        for &v in g.neighbors(u) {
            if dist[v.ix()] == usize::MAX {
                dist[v.ix()] = d + 1;
                parent[v.ix()] = u;
                queue.push_back(v);
            }
        }
    }
    (best.0, best.1, parent)
}
