//! Disambiguation of equal-valued subfragments.
//!
//! When `C` contains a length `v` several times, the data does not say which
//! copy in the AB sets is the same physical piece as which copy in the BA
//! sets. A labeling fixes that matching, giving every element of `C` exactly
//! one A-owner and one B-owner.

use thiserror::Error;

use super::EddInstance;

/// One element of `C` with its owners fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledLength {
    pub value: u64,
    /// 1-based rank among the copies of `value`, in AB-side order.
    pub copy_id: u32,
    pub a_owner: usize,
    pub b_owner: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledInstance<'a> {
    pub base: &'a EddInstance,
    /// Sorted by `(value, copy_id)`.
    pub c_elements: Vec<LabeledLength>,
}

impl LabeledInstance<'_> {
    pub fn n(&self) -> usize {
        self.c_elements.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("at least {at_least} duplicate assignments; the cap is {cap}")]
    AssignmentCapExceeded { at_least: u128, cap: u128 },
    #[error("length {value} occurs {ab} times in the AB sets but {ba} times in the BA sets")]
    Inconsistent { value: u64, ab: usize, ba: usize },
}

/// Copies of one repeated value.
#[derive(Debug, Clone)]
struct ValueGroup {
    value: u64,
    /// Position of the first copy in the element template.
    offset: usize,
    ab_owners: Vec<usize>,
    ba_owners: Vec<usize>,
}

/// Elements ordered by `(value, copy_id)`; `b_owner` is final for values
/// that occur once and a placeholder for repeated ones.
fn template(inst: &EddInstance) -> Result<(Vec<LabeledLength>, Vec<ValueGroup>), LabelError> {
    let mut ab: Vec<(u64, usize)> = owner_pairs(&inst.ab_sets);
    let mut ba: Vec<(u64, usize)> = owner_pairs(&inst.ba_sets);
    ab.sort_unstable();
    ba.sort_unstable();

    let mut elements = Vec::with_capacity(ab.len());
    let mut groups = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < ab.len() || j < ba.len() {
        let value = match (ab.get(i), ba.get(j)) {
            (Some(x), Some(y)) => x.0.min(y.0),
            (Some(x), None) => x.0,
            (None, Some(y)) => y.0,
            (None, None) => unreachable!(),
        };
        let i_end = i + ab[i..].iter().take_while(|x| x.0 == value).count();
        let j_end = j + ba[j..].iter().take_while(|y| y.0 == value).count();
        if i_end - i != j_end - j {
            return Err(LabelError::Inconsistent {
                value,
                ab: i_end - i,
                ba: j_end - j,
            });
        }
        if i_end - i == 1 {
            elements.push(LabeledLength {
                value,
                copy_id: 1,
                a_owner: ab[i].1,
                b_owner: ba[j].1,
            });
        } else {
            let offset = elements.len();
            for (k, &(_, a_owner)) in ab[i..i_end].iter().enumerate() {
                elements.push(LabeledLength {
                    value,
                    copy_id: k as u32 + 1,
                    a_owner,
                    b_owner: usize::MAX,
                });
            }
            groups.push(ValueGroup {
                value,
                offset,
                ab_owners: ab[i..i_end].iter().map(|x| x.1).collect(),
                ba_owners: ba[j..j_end].iter().map(|y| y.1).collect(),
            });
        }
        i = i_end;
        j = j_end;
    }
    Ok((elements, groups))
}

fn owner_pairs(sets: &[Vec<u64>]) -> Vec<(u64, usize)> {
    sets.iter()
        .enumerate()
        .flat_map(|(owner, set)| set.iter().map(move |&v| (v, owner)))
        .collect()
}

fn factorial_saturating(m: usize) -> u128 {
    (2..=m as u128).fold(1u128, |acc, k| acc.saturating_mul(k))
}

#[derive(Debug, Clone)]
enum Chooser {
    /// Current bijection: copy `k` goes to `ba_owners[perm[k]]`.
    Bijection { perm: Vec<usize> },
    /// Precomputed B-owner vectors, one per assignment.
    Listed { choices: Vec<Vec<usize>>, at: usize },
}

#[derive(Debug, Clone)]
struct GroupState {
    group: ValueGroup,
    chooser: Chooser,
}

impl GroupState {
    fn write(&self, elements: &mut [LabeledLength]) {
        let g = &self.group;
        let slots = &mut elements[g.offset..g.offset + g.ab_owners.len()];
        match &self.chooser {
            Chooser::Bijection { perm } => {
                for (e, &k) in slots.iter_mut().zip(perm) {
                    e.b_owner = g.ba_owners[k];
                }
            }
            Chooser::Listed { choices, at } => {
                for (e, &b) in slots.iter_mut().zip(&choices[*at]) {
                    e.b_owner = b;
                }
            }
        }
    }

    /// Steps to the next assignment; on wrap-around resets and returns false.
    fn advance(&mut self) -> bool {
        match &mut self.chooser {
            Chooser::Bijection { perm } => {
                if next_permutation(perm) {
                    true
                } else {
                    perm.sort_unstable();
                    false
                }
            }
            Chooser::Listed { choices, at } => {
                *at += 1;
                if *at < choices.len() {
                    true
                } else {
                    *at = 0;
                    false
                }
            }
        }
    }
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&x| x > perm[i]).unwrap();
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Lazy, deterministic sequence of labelings. Later values vary fastest.
#[derive(Debug, Clone)]
pub struct Labelings<'a> {
    base: &'a EddInstance,
    elements: Vec<LabeledLength>,
    groups: Vec<GroupState>,
    total: u128,
    finished: bool,
}

impl<'a> Labelings<'a> {
    /// Number of labelings this iterator yields in total.
    pub fn total(&self) -> u128 {
        self.total
    }
}

impl<'a> Iterator for Labelings<'a> {
    type Item = LabeledInstance<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        let mut c_elements = self.elements.clone();
        for g in &self.groups {
            g.write(&mut c_elements);
        }
        self.finished = !self.groups.iter_mut().rev().any(GroupState::advance);
        Some(LabeledInstance {
            base: self.base,
            c_elements,
        })
    }
}

/// Every bijection between AB-side and BA-side copies of every repeated
/// value: `Π_v m_v!` labelings, values ascending, bijections in
/// lexicographic order.
pub fn label_duplicates(inst: &EddInstance, cap: u128) -> Result<Labelings<'_>, LabelError> {
    let (elements, groups) = template(inst)?;
    let total = groups
        .iter()
        .map(|g| factorial_saturating(g.ab_owners.len()))
        .fold(1u128, u128::saturating_mul);
    if total > cap {
        return Err(LabelError::AssignmentCapExceeded {
            at_least: total,
            cap,
        });
    }
    let groups = groups
        .into_iter()
        .map(|group| GroupState {
            chooser: Chooser::Bijection {
                perm: (0..group.ab_owners.len()).collect(),
            },
            group,
        })
        .collect();
    Ok(Labelings {
        base: inst,
        elements,
        groups,
        total,
        finished: false,
    })
}

/// Labelings up to relabeling of interchangeable copies.
///
/// Copies of `v` inside one fragment are interchangeable, and so are whole
/// fragments whose cross-digest set is exactly `{v}`. Fragments holding
/// several copies of `v` and nothing else are kept apart: whether two
/// partners share one of them or not is a real choice. What remains of a labeling is, per value, a table of how
/// many copies each AB-side class sends to each BA-side class; one labeling is
/// produced per table. Every labeling from [`label_duplicates`] is isomorphic
/// to exactly one of these, with identical fragment lengths throughout.
pub fn label_distinct(inst: &EddInstance, cap: u128) -> Result<Labelings<'_>, LabelError> {
    let (elements, groups) = template(inst)?;
    let mut total = 1u128;
    let mut states = Vec::with_capacity(groups.len());
    for group in groups {
        let rows = classes(&group.ab_owners, group.value, &inst.ab_sets);
        let cols = classes(&group.ba_owners, group.value, &inst.ba_sets);
        let row_sums: Vec<usize> = rows.iter().map(Vec::len).collect();
        let col_sums: Vec<usize> = cols.iter().map(Vec::len).collect();
        let remaining_cap = cap / total;
        let tables = contingency_tables(&row_sums, &col_sums, remaining_cap);
        if tables.len() as u128 > remaining_cap {
            return Err(LabelError::AssignmentCapExceeded {
                at_least: total.saturating_mul(tables.len() as u128),
                cap,
            });
        }
        total *= tables.len() as u128;
        let choices = tables
            .iter()
            .map(|t| table_to_owners(t, &rows, &cols, &group))
            .collect();
        states.push(GroupState {
            group,
            chooser: Chooser::Listed { choices, at: 0 },
        });
    }
    Ok(Labelings {
        base: inst,
        elements,
        groups: states,
        total,
        finished: false,
    })
}

/// Splits copy positions `0..owners.len()` into interchangeable classes,
/// in order of first appearance. `owners` is sorted.
fn classes(owners: &[usize], value: u64, sets: &[Vec<u64>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    // Class index of the fragments whose set is exactly `{value}`.
    let mut singletons: Option<usize> = None;
    let mut k = 0;
    while k < owners.len() {
        let owner = owners[k];
        let end = k + owners[k..].iter().take_while(|&&o| o == owner).count();
        let singleton = sets[owner] == [value];
        match singletons.filter(|_| singleton) {
            Some(idx) => out[idx].extend(k..end),
            None => {
                if singleton {
                    singletons = Some(out.len());
                }
                out.push((k..end).collect());
            }
        }
        k = end;
    }
    out
}

/// Non-negative integer matrices with the given margins, in decreasing
/// row-major lexicographic order (the identity-like table first). Stops after `limit + 1` tables.
fn contingency_tables(rows: &[usize], cols: &[usize], limit: u128) -> Vec<Vec<Vec<usize>>> {
    fn fill(
        r: usize,
        c: usize,
        row_rem: &mut [usize],
        col_rem: &mut [usize],
        table: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
        limit: u128,
    ) {
        if out.len() as u128 > limit {
            return;
        }
        if r == row_rem.len() {
            out.push(table.clone());
            return;
        }
        let (next_r, next_c) = if c + 1 == col_rem.len() {
            (r + 1, 0)
        } else {
            (r, c + 1)
        };
        let later_cols: usize = col_rem[c + 1..].iter().sum();
        let hi = row_rem[r].min(col_rem[c]);
        let lo = row_rem[r].saturating_sub(later_cols);
        for x in (lo..=hi).rev() {
            table[r][c] = x;
            row_rem[r] -= x;
            col_rem[c] -= x;
            fill(next_r, next_c, row_rem, col_rem, table, out, limit);
            row_rem[r] += x;
            col_rem[c] += x;
        }
        table[r][c] = 0;
    }

    let mut out = Vec::new();
    let mut table = vec![vec![0; cols.len()]; rows.len()];
    fill(
        0,
        0,
        &mut rows.to_vec(),
        &mut cols.to_vec(),
        &mut table,
        &mut out,
        limit,
    );
    out
}

fn table_to_owners(
    table: &[Vec<usize>],
    rows: &[Vec<usize>],
    cols: &[Vec<usize>],
    group: &ValueGroup,
) -> Vec<usize> {
    let mut owners = vec![usize::MAX; group.ab_owners.len()];
    let mut cursor = vec![0; cols.len()];
    for (row, counts) in rows.iter().zip(table) {
        let mut copies = row.iter();
        for (h, &count) in counts.iter().enumerate() {
            for _ in 0..count {
                let copy = *copies.next().expect("row sum matches class size");
                owners[copy] = group.ba_owners[cols[h][cursor[h]]];
                cursor[h] += 1;
            }
        }
    }
    owners
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::instance::fixtures::{duplicate_example, sample90};

    /// Pieces 1 2 | 1 2 2 with B cuts at 1, 4, 6: values 1 (x2) and 2 (x3).
    fn two_and_three() -> EddInstance {
        EddInstance::new(
            vec![3, 5],
            vec![1, 3, 2, 2],
            vec![vec![1, 2], vec![1, 2, 2]],
            vec![vec![1], vec![1, 2], vec![2], vec![2]],
        )
        .unwrap()
    }

    fn assert_groups_recover_sets(l: &LabeledInstance<'_>) {
        let inst = l.base;
        for (i, set) in inst.ab_sets.iter().enumerate() {
            let mut got: Vec<u64> = l
                .c_elements
                .iter()
                .filter(|c| c.a_owner == i)
                .map(|c| c.value)
                .collect();
            got.sort_unstable();
            assert_eq!(&got, set);
        }
        for (j, set) in inst.ba_sets.iter().enumerate() {
            let mut got: Vec<u64> = l
                .c_elements
                .iter()
                .filter(|c| c.b_owner == j)
                .map(|c| c.value)
                .collect();
            got.sort_unstable();
            assert_eq!(&got, set);
        }
    }

    #[test]
    fn duplicate_free_has_one_labeling() {
        let inst = sample90();
        let all: Vec<_> = label_duplicates(&inst, 10).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].n(), 7);
        assert_groups_recover_sets(&all[0]);
        assert_eq!(label_distinct(&inst, 10).unwrap().count(), 1);
    }

    #[test]
    fn two_sevens_give_two_labelings() {
        let inst = duplicate_example();
        let all: Vec<_> = label_duplicates(&inst, 10).unwrap().collect();
        assert_eq!(all.len(), 2);
        let sevens = |l: &LabeledInstance<'_>| -> Vec<(u32, usize)> {
            l.c_elements
                .iter()
                .filter(|c| c.value == 7)
                .map(|c| (c.copy_id, c.b_owner))
                .collect()
        };
        // 7_1 is the copy in AB_1. First: 7_1 in BA_3, then 7_1 in BA_5.
        assert_eq!(sevens(&all[0]), vec![(1, 2), (2, 4)]);
        assert_eq!(sevens(&all[1]), vec![(1, 4), (2, 2)]);
        for l in &all {
            assert_groups_recover_sets(l);
        }
        let distinct: Vec<_> = label_distinct(&inst, 10).unwrap().collect();
        assert_eq!(distinct, all);
    }

    /// Independent count: every assignment of AB-side copies to BA-side copies,
    /// built by recursion over positions.
    fn brute_force_matchings(ab: &[usize], ba: &[usize]) -> usize {
        fn go(k: usize, ab: &[usize], ba: &[usize], used: &mut Vec<bool>) -> usize {
            if k == ab.len() {
                return 1;
            }
            let mut total = 0;
            for j in 0..ba.len() {
                if !used[j] {
                    used[j] = true;
                    total += go(k + 1, ab, ba, used);
                    used[j] = false;
                }
            }
            total
        }
        go(0, ab, ba, &mut vec![false; ba.len()])
    }

    #[test]
    fn multiplicities_two_and_three_give_twelve() {
        let inst = two_and_three();
        let labelings = label_duplicates(&inst, 100).unwrap();
        assert_eq!(labelings.total(), 12);
        let all: Vec<_> = labelings.collect();
        let (_, groups) = template(&inst).unwrap();
        let oracle: usize = groups
            .iter()
            .map(|g| brute_force_matchings(&g.ab_owners, &g.ba_owners))
            .product();
        assert_eq!(all.len(), oracle);
        assert_eq!(all.len(), 12);
        let unique: BTreeSet<Vec<LabeledLength>> =
            all.iter().map(|l| l.c_elements.clone()).collect();
        assert_eq!(unique.len(), 12);
        for l in &all {
            assert_groups_recover_sets(l);
        }
    }

    #[test]
    fn distinct_labelings_collapse_interchangeable_copies() {
        let inst = two_and_three();
        // Value 1: AB_1, AB_2 each one copy; BA_1 = {1} pure, BA_2 mixed -> 2 tables.
        // Value 2: AB_1 one copy, AB_2 two copies; BA_2 mixed, BA_3 and BA_4 pure
        // singletons merged -> rows (1, 2), cols (1, 2) -> 2 tables.
        let distinct: Vec<_> = label_distinct(&inst, 100).unwrap().collect();
        assert_eq!(distinct.len(), 4);
        for l in &distinct {
            assert_groups_recover_sets(l);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let inst = two_and_three();
        assert_eq!(
            label_duplicates(&inst, 11).unwrap_err(),
            LabelError::AssignmentCapExceeded {
                at_least: 12,
                cap: 11
            }
        );
        assert!(matches!(
            label_distinct(&inst, 3),
            Err(LabelError::AssignmentCapExceeded { .. })
        ));
        assert_eq!(label_distinct(&inst, 4).unwrap().total(), 4);
    }

    #[test]
    fn inconsistent_multiplicity_is_an_error() {
        let mut inst = sample90();
        inst.ba_sets[0] = vec![3, 3];
        assert!(matches!(
            label_duplicates(&inst, 10),
            Err(LabelError::Inconsistent { .. })
        ));
    }

    #[test]
    fn tables_have_requested_margins() {
        let tables = contingency_tables(&[2, 1], &[1, 2], 100);
        assert_eq!(
            tables,
            vec![vec![vec![1, 1], vec![0, 1]], vec![vec![0, 2], vec![1, 0]]]
        );
        assert_eq!(contingency_tables(&[1, 1, 1], &[1, 1, 1], 100).len(), 6);
    }
}
