//! Diameter walk that turns a valid digest graph into all its maps.
//!
//! Walking the diameter from one end to the other and reading off every C
//! node, with the danglers at each node read in any order, gives an order of
//! `C` in which every fragment's pieces are consecutive. Grouping that order
//! into runs by A-owner and by B-owner yields the fragment orders. The freedom
//! in the dangler order is kept symbolic as a [`SolutionFamily`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::digestgraph::{
    build_graph, check_structure, DigestGraph, NodeKind, StructureVerdict, StructureViolation,
};
use crate::instance::{
    label_distinct, label_duplicates, validate_consistency, ConsistencyReport, EddInstance,
    LabelError, LabeledInstance, LabeledLength,
};
use crate::verifier::{Solution, SolutionKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Enzyme {
    A,
    B,
}

impl fmt::Display for Enzyme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Enzyme::A => "a",
            Enzyme::B => "b",
        })
    }
}

/// A single-digest fragment, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fragment {
    pub enzyme: Enzyme,
    pub index: usize,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.enzyme, self.index + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    Fixed(LabeledLength),
    /// Elements that may appear in any order; sorted by `(value, copy_id)`.
    Block {
        attachment: Fragment,
        elements: Vec<LabeledLength>,
    },
}

impl Slot {
    fn elements(&self) -> &[LabeledLength] {
        match self {
            Slot::Fixed(c) => std::slice::from_ref(c),
            Slot::Block { elements, .. } => elements,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum SigItem {
    Fixed(u64),
    Block(Enzyme, Vec<u64>),
    /// The owner shared by the two neighbouring slots.
    Shared(Enzyme),
}

/// All orders of `C` obtained by expanding each block in every order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionFamily {
    pub slots: Vec<Slot>,
    /// Set once the family reads in the smaller of its two directions.
    pub canonical_orientation: bool,
}

impl SolutionFamily {
    pub fn blocks(&self) -> impl Iterator<Item = &[LabeledLength]> {
        self.slots.iter().filter_map(|s| match s {
            Slot::Block { elements, .. } => Some(elements.as_slice()),
            Slot::Fixed(_) => None,
        })
    }

    /// Product of block-size factorials (before removing equal-valued
    /// duplicates and mirror images).
    pub fn expansion_count(&self) -> u128 {
        self.blocks()
            .map(|b| (2..=b.len() as u128).fold(1u128, |acc, k| acc.saturating_mul(k)))
            .fold(1, u128::saturating_mul)
    }

    /// Lengths plus the kind of cut between neighbours; two families with the
    /// same signature describe the same set of maps.
    fn signature(&self) -> Vec<SigItem> {
        let mut sig = Vec::with_capacity(2 * self.slots.len());
        for (i, slot) in self.slots.iter().enumerate() {
            if i > 0 {
                let prev = self.slots[i - 1].elements()[0];
                let cur = slot.elements()[0];
                sig.push(SigItem::Shared(if prev.a_owner == cur.a_owner {
                    Enzyme::A
                } else {
                    Enzyme::B
                }));
            }
            sig.push(match slot {
                Slot::Fixed(c) => SigItem::Fixed(c.value),
                Slot::Block {
                    attachment,
                    elements,
                } => SigItem::Block(
                    attachment.enzyme,
                    elements.iter().map(|c| c.value).collect(),
                ),
            });
        }
        sig
    }

    /// Reads the family in the lexicographically smaller direction.
    pub fn canonicalize(&mut self) {
        let sig = self.signature();
        if sig.iter().rev().cmp(sig.iter()).is_lt() {
            self.slots.reverse();
        }
        self.canonical_orientation = true;
    }
}

impl fmt::Display for SolutionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, slot) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match slot {
                Slot::Fixed(c) => write!(f, "{}", c.value)?,
                Slot::Block { elements, .. } => {
                    let vals: Vec<String> = elements.iter().map(|c| c.value.to_string()).collect();
                    write!(f, "[{}]", vals.join(" "))?;
                }
            }
        }
        Ok(())
    }
}

fn fragment_of(g: &DigestGraph, id: crate::digestgraph::NodeId) -> Fragment {
    let enzyme = match g.kind(id) {
        NodeKind::A => Enzyme::A,
        NodeKind::B => Enzyme::B,
        NodeKind::C => unreachable!("danglers attach to fragment nodes"),
    };
    Fragment {
        enzyme,
        index: g.index(id),
    }
}

/// Walks the diameter emitting its C nodes, with the danglers of each
/// fragment node gathered into one block right after the incoming C node.
/// At the two end fragment nodes the endpoint's own C node is
/// interchangeable with the danglers there and joins their block.
///
/// `verdict` must come from [`check_structure`] on `g` and carry no violation.
pub fn dangler_first_search(g: &DigestGraph, verdict: &StructureVerdict) -> SolutionFamily {
    debug_assert!(verdict.violation.is_none());
    let diameter = &verdict.diameter;
    let element = |id| *g.element(id).expect("odd diameter positions are C nodes");
    // diameter = v0, c1, v1, ..., c_m, v_m
    let m = diameter.len() / 2;
    let mut slots = Vec::with_capacity(g.node_count() / 2);
    if m == 1 {
        slots.push(Slot::Fixed(element(diameter[1])));
        return SolutionFamily {
            slots,
            canonical_orientation: false,
        };
    }
    let mut danglers = verdict.danglers.iter().peekable();
    for j in 1..m {
        let node = diameter[2 * j];
        let mut group = Vec::new();
        if j == 1 {
            group.push(element(diameter[1]));
        } else {
            slots.push(Slot::Fixed(element(diameter[2 * j - 1])));
        }
        while let Some(d) = danglers.next_if(|d| d.attachment == node) {
            group.push(element(d.element));
        }
        if j == m - 1 {
            group.push(element(diameter[2 * m - 1]));
        }
        match group.len() {
            0 => {}
            1 => slots.push(Slot::Fixed(group[0])),
            _ => {
                group.sort_unstable();
                slots.push(Slot::Block {
                    attachment: fragment_of(g, node),
                    elements: group,
                });
            }
        }
    }
    SolutionFamily {
        slots,
        canonical_orientation: false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InducedError {
    #[error("pieces of {0} are not consecutive")]
    NotConsecutive(Fragment),
    #[error("the order does not cover every fragment")]
    Incomplete,
}

/// Groups an order of `C` into maximal runs by A-owner and by B-owner.
pub fn induced_permutation(
    pc: &[LabeledLength],
    inst: &LabeledInstance<'_>,
) -> Result<Solution, InducedError> {
    induce(pc, inst.base.p(), inst.base.q())
}

fn induce(pc: &[LabeledLength], p: usize, q: usize) -> Result<Solution, InducedError> {
    fn runs(
        pc: &[LabeledLength],
        count: usize,
        enzyme: Enzyme,
        owner: impl Fn(&LabeledLength) -> usize,
    ) -> Result<Vec<usize>, InducedError> {
        let mut seen = vec![false; count];
        let mut order = Vec::with_capacity(count);
        let mut last = None;
        for c in pc {
            let o = owner(c);
            if last == Some(o) {
                continue;
            }
            if std::mem::replace(&mut seen[o], true) {
                return Err(InducedError::NotConsecutive(Fragment { enzyme, index: o }));
            }
            order.push(o);
            last = Some(o);
        }
        if order.len() != count {
            return Err(InducedError::Incomplete);
        }
        Ok(order)
    }
    Ok(Solution {
        pi_a: runs(pc, p, Enzyme::A, |c| c.a_owner)?,
        pi_b: runs(pc, q, Enzyme::B, |c| c.b_owner)?,
        pi_c: pc.to_vec(),
    })
}

/// Runs the full algorithm on one labeling: graph, structure check, diameter
/// walk. The family comes back in canonical orientation.
pub fn solve_labeled(inst: &LabeledInstance<'_>) -> Result<SolutionFamily, StructureViolation> {
    let g = build_graph(inst);
    let verdict = check_structure(&g);
    if let Some(v) = verdict.violation.clone() {
        return Err(v);
    }
    let mut family = dangler_first_search(&g, &verdict);
    family.canonicalize();
    Ok(family)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelingStrategy {
    /// One labeling per class of interchangeable copies ([`label_distinct`]).
    Distinct,
    /// Every bijection between copies ([`label_duplicates`]).
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveConfig {
    pub max_assignments: u128,
    pub max_expansions: usize,
    pub labeling: LabelingStrategy,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_assignments: 10_080,
            max_expansions: 10_000,
            labeling: LabelingStrategy::Distinct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("instance is inconsistent ({} violations)", .0.violations.len())]
    Inconsistent(ConsistencyReport),
    #[error(transparent)]
    Labeling(#[from] LabelError),
}

#[derive(Debug, Clone)]
pub struct FoundFamily<'a> {
    pub assignment_id: usize,
    pub labeled: LabeledInstance<'a>,
    pub family: SolutionFamily,
}

#[derive(Debug, Clone)]
pub struct SolveReport<'a> {
    /// In assignment order; families describing identical maps appear once.
    pub families: Vec<FoundFamily<'a>>,
    pub assignments: u128,
    pub rejected: usize,
    /// The first labeling whose graph failed, with the reason.
    pub first_rejection: Option<(usize, StructureViolation)>,
}

impl SolveReport<'_> {
    pub fn is_solvable(&self) -> bool {
        !self.families.is_empty()
    }
}

/// Tries every labeling of the duplicates and collects the families found.
pub fn solve<'a>(inst: &'a EddInstance, cfg: &SolveConfig) -> Result<SolveReport<'a>, SolveError> {
    let report = validate_consistency(inst);
    if !report.is_consistent() {
        return Err(SolveError::Inconsistent(report));
    }
    let labelings = match cfg.labeling {
        LabelingStrategy::Distinct => label_distinct(inst, cfg.max_assignments)?,
        LabelingStrategy::Exhaustive => label_duplicates(inst, cfg.max_assignments)?,
    };
    let assignments = labelings.total();
    let mut seen = HashSet::new();
    let mut families = Vec::new();
    let mut rejected = 0;
    let mut first_rejection = None;
    for (assignment_id, labeled) in labelings.enumerate() {
        match solve_labeled(&labeled) {
            Ok(family) => {
                if seen.insert(family.signature()) {
                    families.push(FoundFamily {
                        assignment_id,
                        labeled,
                        family,
                    });
                }
            }
            Err(v) => {
                rejected += 1;
                first_rejection.get_or_insert((assignment_id, v));
            }
        }
    }
    Ok(SolveReport {
        families,
        assignments,
        rejected,
        first_rejection,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    /// Distinct maps in canonical orientation, in enumeration order.
    pub solutions: Vec<Solution>,
    /// More distinct maps exist beyond the cap.
    pub truncated: bool,
}

/// Expands the blocks in lexicographic value order, keeping each distinct
/// map once.
pub fn expand_family(fam: &SolutionFamily, inst: &EddInstance, cap: usize) -> Expansion {
    let mut seen = HashSet::new();
    let mut solutions = Vec::new();
    let truncated = expand_into(fam, inst, cap, &mut seen, |s| solutions.push(s));
    Expansion {
        solutions,
        truncated,
    }
}

/// Returns true when stopped by `cap` with unseen maps remaining.
fn expand_into(
    fam: &SolutionFamily,
    inst: &EddInstance,
    cap: usize,
    seen: &mut HashSet<SolutionKey>,
    mut emit: impl FnMut(Solution),
) -> bool {
    let mut blocks: Vec<Vec<LabeledLength>> = fam.blocks().map(<[_]>::to_vec).collect();
    let mut emitted = 0;
    let n: usize = fam.slots.iter().map(|s| s.elements().len()).sum();
    loop {
        let mut pc = Vec::with_capacity(n);
        let mut next_block = 0;
        for slot in &fam.slots {
            match slot {
                Slot::Fixed(c) => pc.push(*c),
                Slot::Block { .. } => {
                    pc.extend_from_slice(&blocks[next_block]);
                    next_block += 1;
                }
            }
        }
        let sol = induce(&pc, inst.p(), inst.q())
            .expect("family expansions keep every fragment consecutive")
            .canonical(inst);
        if seen.insert(sol.key(inst)) {
            if emitted == cap {
                return true;
            }
            emit(sol);
            emitted += 1;
        }
        let advanced = blocks.iter_mut().rev().any(|b| {
            if next_value_permutation(b) {
                true
            } else {
                b.sort_unstable();
                false
            }
        });
        if !advanced {
            return false;
        }
    }
}

fn next_value_permutation(v: &mut [LabeledLength]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0].value < w[1].value) else {
        return false;
    };
    let j = v.iter().rposition(|x| x.value > v[i].value).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

#[derive(Debug, Clone)]
pub struct FoundSolution {
    pub assignment_id: usize,
    pub solution: Solution,
}

#[derive(Debug, Clone)]
pub struct SolutionSet {
    /// Distinct maps in canonical orientation, sorted by [`SolutionKey`].
    pub solutions: Vec<FoundSolution>,
    pub truncated: bool,
}

/// Expands the families of `report` in order, up to `cap` distinct maps.
/// `truncated` is set only when some map was left out.
pub fn expand_report(report: &SolveReport<'_>, inst: &EddInstance, cap: usize) -> SolutionSet {
    let mut seen = HashSet::new();
    let mut found: BTreeMap<SolutionKey, FoundSolution> = BTreeMap::new();
    let mut truncated = false;
    for f in &report.families {
        let left = cap - found.len();
        truncated = expand_into(&f.family, inst, left, &mut seen, |solution| {
            found.insert(
                solution.key(inst),
                FoundSolution {
                    assignment_id: f.assignment_id,
                    solution,
                },
            );
        });
        if truncated {
            break;
        }
    }
    SolutionSet {
        solutions: found.into_values().collect(),
        truncated,
    }
}

/// Solves and expands every family, up to `cfg.max_expansions` distinct maps.
pub fn solve_solutions(inst: &EddInstance, cfg: &SolveConfig) -> Result<SolutionSet, SolveError> {
    let report = solve(inst, cfg)?;
    Ok(expand_report(&report, inst, cfg.max_expansions))
}
