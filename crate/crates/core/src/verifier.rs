//! Direct checking of candidate maps, and the brute-force oracle.
//!
//! A candidate is a pair of orderings of the A and B fragments. Plotting both
//! on one line splits it into pieces at the union of the cut positions; the
//! candidate is valid when every fragment's pieces are exactly its
//! cross-digest multiset. Nothing here depends on the graph-based solver.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::instance::{EddInstance, LabeledLength};

/// Orderings of the A and B fragments plus the resulting order of `C`.
///
/// `pi_a` and `pi_b` hold 0-based fragment indices, left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    pub pi_a: Vec<usize>,
    pub pi_b: Vec<usize>,
    pub pi_c: Vec<LabeledLength>,
}

impl Solution {
    pub fn a_values(&self, inst: &EddInstance) -> Vec<u64> {
        self.pi_a.iter().map(|&i| inst.a_lengths[i]).collect()
    }

    pub fn b_values(&self, inst: &EddInstance) -> Vec<u64> {
        self.pi_b.iter().map(|&j| inst.b_lengths[j]).collect()
    }

    pub fn c_values(&self) -> Vec<u64> {
        self.pi_c.iter().map(|c| c.value).collect()
    }

    /// The same map read right to left.
    pub fn mirrored(&self) -> Solution {
        let rev = |v: &[usize]| v.iter().rev().copied().collect();
        Solution {
            pi_a: rev(&self.pi_a),
            pi_b: rev(&self.pi_b),
            pi_c: self.pi_c.iter().rev().copied().collect(),
        }
    }

    /// True when this reading direction is the canonical one.
    pub fn is_canonical(&self, inst: &EddInstance) -> bool {
        orientation(&self.a_values(inst), &self.b_values(inst)) != Ordering::Greater
    }

    pub fn canonical(self, inst: &EddInstance) -> Solution {
        if self.is_canonical(inst) {
            self
        } else {
            self.mirrored()
        }
    }

    /// Identity of the physical map, independent of reading direction and of
    /// which equal-valued fragment got which index.
    pub fn key(&self, inst: &EddInstance) -> SolutionKey {
        SolutionKey::new(self.a_values(inst), self.b_values(inst))
    }
}

/// Fragment lengths in canonical reading direction. The lengths fix every
/// cut position, so equal keys mean the same map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolutionKey {
    pub a_values: Vec<u64>,
    pub b_values: Vec<u64>,
}

impl SolutionKey {
    pub fn new(mut a_values: Vec<u64>, mut b_values: Vec<u64>) -> Self {
        if orientation(&a_values, &b_values) == Ordering::Greater {
            a_values.reverse();
            b_values.reverse();
        }
        SolutionKey { a_values, b_values }
    }
}

/// Compares a reading direction with its mirror: the piece-length sequence
/// decides, ties (palindromic pieces) fall back to the A then B sequences.
/// `Greater` means the mirror is canonical.
fn orientation(a_values: &[u64], b_values: &[u64]) -> Ordering {
    let pieces = piece_lengths(a_values, b_values);
    pieces
        .iter()
        .cmp(pieces.iter().rev())
        .then_with(|| a_values.iter().cmp(a_values.iter().rev()))
        .then_with(|| b_values.iter().cmp(b_values.iter().rev()))
}

/// Piece lengths from overlaying two length sequences; coinciding cuts are
/// merged rather than rejected.
fn piece_lengths(a_values: &[u64], b_values: &[u64]) -> Vec<u64> {
    let cuts_a = prefix_sums(a_values);
    let cuts_b = prefix_sums(b_values);
    let mut merged: Vec<u128> = cuts_a.into_iter().chain(cuts_b).collect();
    merged.sort_unstable();
    merged.dedup();
    let mut prev = 0u128;
    merged
        .into_iter()
        .map(|c| {
            let len = c - prev;
            prev = c;
            len as u64
        })
        .collect()
}

fn prefix_sums(values: &[u64]) -> Vec<u128> {
    values
        .iter()
        .scan(0u128, |acc, &v| {
            *acc += u128::from(v);
            Some(*acc)
        })
        .collect()
}

/// A maximal interval between consecutive cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Piece {
    pub start: u128,
    pub end: u128,
    pub a_owner: usize,
    pub b_owner: usize,
}

impl Piece {
    pub fn len(&self) -> u64 {
        (self.end - self.start) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub total_length: u128,
    /// Internal A cut positions, strictly increasing.
    pub a_boundaries: Vec<u128>,
    pub b_boundaries: Vec<u128>,
    pub pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("{which} ordering is not a permutation of the fragment indices")]
    NotAPermutation { which: char },
    #[error("A and B total lengths differ ({a_total} vs {b_total})")]
    SumMismatch { a_total: u128, b_total: u128 },
    #[error("A and B cut at the same position {position}")]
    CoincidentCut { position: u128 },
}

fn is_permutation(order: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    order.len() == n
        && order
            .iter()
            .all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

/// Overlays the A fragments in order `pa` and the B fragments in order `pb`.
pub fn layout(pa: &[usize], pb: &[usize], inst: &EddInstance) -> Result<Layout, LayoutError> {
    if !is_permutation(pa, inst.p()) {
        return Err(LayoutError::NotAPermutation { which: 'A' });
    }
    if !is_permutation(pb, inst.q()) {
        return Err(LayoutError::NotAPermutation { which: 'B' });
    }
    let a_ends = prefix_sums(&pa.iter().map(|&i| inst.a_lengths[i]).collect::<Vec<_>>());
    let b_ends = prefix_sums(&pb.iter().map(|&j| inst.b_lengths[j]).collect::<Vec<_>>());
    let a_total = *a_ends.last().unwrap();
    let b_total = *b_ends.last().unwrap();
    if a_total != b_total {
        return Err(LayoutError::SumMismatch { a_total, b_total });
    }

    let mut pieces = Vec::with_capacity(pa.len() + pb.len() - 1);
    let (mut i, mut j, mut start) = (0, 0, 0u128);
    while i < pa.len() && j < pb.len() {
        let end = a_ends[i].min(b_ends[j]);
        pieces.push(Piece {
            start,
            end,
            a_owner: pa[i],
            b_owner: pb[j],
        });
        match a_ends[i].cmp(&b_ends[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal if end == a_total => break,
            Ordering::Equal => return Err(LayoutError::CoincidentCut { position: end }),
        }
        start = end;
    }
    Ok(Layout {
        total_length: a_total,
        a_boundaries: a_ends[..a_ends.len() - 1].to_vec(),
        b_boundaries: b_ends[..b_ends.len() - 1].to_vec(),
        pieces,
    })
}

/// Why a candidate ordering is not a valid map.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("piece lengths differ from the multiset C")]
    PieceMultiset,
    #[error("pieces under a_{} differ from AB_{}", .index + 1, .index + 1)]
    AFragment { index: usize },
    #[error("pieces under b_{} differ from BA_{}", .index + 1, .index + 1)]
    BFragment { index: usize },
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::Layout(LayoutError::NotAPermutation { .. }) => "NOT_A_PERMUTATION",
            Rejection::Layout(LayoutError::SumMismatch { .. }) => "SUM_MISMATCH",
            Rejection::Layout(LayoutError::CoincidentCut { .. }) => "COINCIDENT_CUT",
            Rejection::PieceMultiset => "PIECE_MULTISET",
            Rejection::AFragment { .. } => "A_FRAGMENT",
            Rejection::BFragment { .. } => "B_FRAGMENT",
        }
    }
}

/// Accepts `(pa, pb)` when the overlay is physical (no shared cut) and every
/// fragment covers exactly its cross-digest multiset. Returns the layout.
pub fn verify_permutation(
    inst: &EddInstance,
    pa: &[usize],
    pb: &[usize],
) -> Result<Layout, Rejection> {
    let lay = layout(pa, pb, inst)?;
    let mut all: Vec<u64> = lay.pieces.iter().map(Piece::len).collect();
    all.sort_unstable();
    if all != inst.c_multiset() {
        return Err(Rejection::PieceMultiset);
    }
    let by_a = owned_lengths(&lay.pieces, inst.p(), |p| p.a_owner);
    if let Some(index) = (0..inst.p()).find(|&i| by_a[i] != inst.ab_sets[i]) {
        return Err(Rejection::AFragment { index });
    }
    let by_b = owned_lengths(&lay.pieces, inst.q(), |p| p.b_owner);
    if let Some(index) = (0..inst.q()).find(|&j| by_b[j] != inst.ba_sets[j]) {
        return Err(Rejection::BFragment { index });
    }
    Ok(lay)
}

/// Sorted piece lengths per owning fragment.
fn owned_lengths(
    pieces: &[Piece],
    fragments: usize,
    owner: impl Fn(&Piece) -> usize,
) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new(); fragments];
    for p in pieces {
        out[owner(p)].push(p.len());
    }
    for v in &mut out {
        v.sort_unstable();
    }
    out
}

/// Labels layout pieces as elements of `C`; copies of a value are numbered in
/// order of their A-owner index, matching [`crate::instance::label_duplicates`].
pub fn label_pieces(pieces: &[Piece]) -> Vec<LabeledLength> {
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by_key(|&k| (pieces[k].len(), pieces[k].a_owner, k));
    let mut copy = vec![0u32; pieces.len()];
    for (pos, &k) in order.iter().enumerate() {
        let same_as_prev = pos > 0 && pieces[order[pos - 1]].len() == pieces[k].len();
        copy[k] = if same_as_prev {
            copy[order[pos - 1]] + 1
        } else {
            1
        };
    }
    pieces
        .iter()
        .zip(copy)
        .map(|(p, copy_id)| LabeledLength {
            value: p.len(),
            copy_id,
            a_owner: p.a_owner,
            b_owner: p.b_owner,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("p + q = {fragments} exceeds the brute-force limit {limit}")]
    CapExceeded { fragments: usize, limit: usize },
}

/// Default limit on `p + q` for [`brute_force_solve`].
pub const ORACLE_FRAGMENT_LIMIT: usize = 12;

/// Tries all `p! * q!` ordering pairs and returns the distinct valid maps in
/// canonical orientation, sorted by [`SolutionKey`].
pub fn brute_force_solve(inst: &EddInstance, limit: usize) -> Result<Vec<Solution>, OracleError> {
    let fragments = inst.p() + inst.q();
    if fragments > limit {
        return Err(OracleError::CapExceeded { fragments, limit });
    }
    let mut found: BTreeMap<SolutionKey, Solution> = BTreeMap::new();
    let mut pa: Vec<usize> = (0..inst.p()).collect();
    loop {
        let mut pb: Vec<usize> = (0..inst.q()).collect();
        loop {
            if let Ok(lay) = verify_permutation(inst, &pa, &pb) {
                let sol = Solution {
                    pi_a: pa.clone(),
                    pi_b: pb.clone(),
                    pi_c: label_pieces(&lay.pieces),
                }
                .canonical(inst);
                found.entry(sol.key(inst)).or_insert(sol);
            }
            if !next_permutation(&mut pb) {
                break;
            }
        }
        if !next_permutation(&mut pa) {
            break;
        }
    }
    Ok(found.into_values().collect())
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{duplicate_example, sample90, single};

    // a = (9, 12, 15, 37, 17) and b = (6, 38, 46) as 0-based indices.
    const FIG1_PA: [usize; 5] = [0, 1, 2, 4, 3];
    const FIG1_PB: [usize; 3] = [0, 1, 2];

    #[test]
    fn sample90_layout_pieces() {
        let lay = layout(&FIG1_PA, &FIG1_PB, &sample90()).unwrap();
        let lens: Vec<u64> = lay.pieces.iter().map(Piece::len).collect();
        assert_eq!(lens, vec![6, 3, 12, 15, 8, 29, 17]);
        assert_eq!(lay.total_length, 90);
        assert_eq!(lay.a_boundaries, vec![9, 21, 36, 73]);
        assert_eq!(lay.b_boundaries, vec![6, 44]);
        // b_2 covers 3, 12, 15, 8.
        let under_b2: Vec<u64> = lay
            .pieces
            .iter()
            .filter(|p| p.b_owner == 1)
            .map(Piece::len)
            .collect();
        assert_eq!(under_b2, vec![3, 12, 15, 8]);
    }

    #[test]
    fn single_piece_layout() {
        let lay = layout(&[0], &[0], &single()).unwrap();
        assert_eq!(lay.pieces.len(), 1);
        assert_eq!(lay.pieces[0].len(), 5);
        assert!(verify_permutation(&single(), &[0], &[0]).is_ok());
    }

    #[test]
    fn coincident_cut_detected() {
        // pa = (18, 19), pb = (5, 13, 8, 7, 4): B prefix sums 5, 18, 26, 33.
        let inst = duplicate_example();
        let pb = [1, 4, 3, 2, 0];
        assert_eq!(
            layout(&[0, 1], &pb, &inst),
            Err(LayoutError::CoincidentCut { position: 18 })
        );
    }

    #[test]
    fn sum_mismatch_and_bad_permutations() {
        let mut inst = sample90();
        inst.a_lengths[0] = 10;
        assert!(matches!(
            layout(&FIG1_PA, &FIG1_PB, &inst),
            Err(LayoutError::SumMismatch { .. })
        ));
        assert_eq!(
            layout(&[0, 0, 2, 4, 3], &FIG1_PB, &sample90()),
            Err(LayoutError::NotAPermutation { which: 'A' })
        );
    }

    #[test]
    fn sample90_solution_verifies() {
        assert!(verify_permutation(&sample90(), &FIG1_PA, &FIG1_PB).is_ok());
    }

    #[test]
    fn reversing_only_b_fails() {
        let err = verify_permutation(&sample90(), &FIG1_PA, &[2, 1, 0]).unwrap_err();
        assert!(matches!(
            err,
            Rejection::PieceMultiset | Rejection::AFragment { .. } | Rejection::BFragment { .. }
        ));
    }

    #[test]
    fn mirrored_solution_verifies() {
        let pa: Vec<usize> = FIG1_PA.iter().rev().copied().collect();
        let pb: Vec<usize> = FIG1_PB.iter().rev().copied().collect();
        assert!(verify_permutation(&sample90(), &pa, &pb).is_ok());
    }

    #[test]
    fn oracle_sample90_has_two_solutions() {
        let sols = brute_force_solve(&sample90(), ORACLE_FRAGMENT_LIMIT).unwrap();
        assert_eq!(sols.len(), 2);
        let inst = sample90();
        assert_eq!(sols[0].a_values(&inst), vec![9, 12, 15, 37, 17]);
        assert_eq!(sols[1].a_values(&inst), vec![9, 15, 12, 37, 17]);
        for s in &sols {
            assert_eq!(s.b_values(&inst), vec![6, 38, 46]);
        }
        assert_eq!(sols[0].c_values(), vec![6, 3, 12, 15, 8, 29, 17]);
    }

    #[test]
    fn oracle_single_and_pair() {
        assert_eq!(brute_force_solve(&single(), 12).unwrap().len(), 1);
        let pair = EddInstance::new(
            vec![3, 4],
            vec![7],
            vec![vec![3], vec![4]],
            vec![vec![3, 4]],
        )
        .unwrap();
        let sols = brute_force_solve(&pair, 12).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].a_values(&pair), vec![3, 4]);
    }

    #[test]
    fn oracle_duplicate_example_nonempty() {
        let inst = duplicate_example();
        let sols = brute_force_solve(&inst, 12).unwrap();
        // Two blocks of two interchangeable pieces: 2! * 2! maps.
        assert_eq!(sols.len(), 4);
        for s in &sols {
            assert!(verify_permutation(&inst, &s.pi_a, &s.pi_b).is_ok());
            assert!(s.is_canonical(&inst));
        }
    }

    #[test]
    fn oracle_cap() {
        let inst =
            EddInstance::new(vec![1; 7], vec![1; 6], vec![vec![1]; 7], vec![vec![1]; 6]).unwrap();
        assert_eq!(
            brute_force_solve(&inst, 12),
            Err(OracleError::CapExceeded {
                fragments: 13,
                limit: 12
            })
        );
    }

    #[test]
    fn canonical_key_ignores_direction() {
        let k1 = SolutionKey::new(vec![9, 12, 15, 37, 17], vec![6, 38, 46]);
        let k2 = SolutionKey::new(vec![17, 37, 15, 12, 9], vec![46, 38, 6]);
        assert_eq!(k1, k2);
        assert_eq!(k1.a_values, vec![9, 12, 15, 37, 17]);
    }

    #[test]
    fn pieces_are_labeled_by_a_owner_order() {
        let inst = duplicate_example();
        // 5 7 6 | 7 4 8: a_1 = 18 then a_2 = 19; B = 5, 7, 13, 4, 8.
        let lay = verify_permutation(&inst, &[0, 1], &[1, 2, 4, 0, 3]).unwrap();
        let labels = label_pieces(&lay.pieces);
        let sevens: Vec<(u32, usize, usize)> = labels
            .iter()
            .filter(|c| c.value == 7)
            .map(|c| (c.copy_id, c.a_owner, c.b_owner))
            .collect();
        assert_eq!(sevens, vec![(1, 0, 2), (2, 1, 4)]);
    }
}
