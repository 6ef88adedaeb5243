//! Input data model for enhanced double digest instances.
//!
//! An instance holds the single-digest lengths `A` (enzyme A) and `B`
//! (enzyme B) together with the cross-digest multisets: `ab_sets[i]` is what
//! enzyme B cuts fragment `a_i` into, `ba_sets[j]` is what enzyme A cuts
//! fragment `b_j` into. Indices are 0-based in the API and 1-based in text.

mod format;
mod labeling;

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

pub use format::{parse_instance, serialize_instance, ParseError, ParseErrorKind};
pub use labeling::{
    label_distinct, label_duplicates, LabelError, LabeledInstance, LabeledLength, Labelings,
};

/// Largest accepted fragment length (63-bit unsigned).
pub const MAX_LENGTH: u64 = i64::MAX as u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("enzyme {0} produced no fragments")]
    NoFragments(char),
    #[error("expected {expected} {label} sets, found {found}")]
    SetCount {
        label: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{label}_{index} is empty")]
    EmptySet { label: &'static str, index: usize },
    #[error("length {0} is outside [1, 2^63-1]")]
    LengthOutOfRange(u64),
}

/// Length data gathered from one enhanced double digest experiment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EddInstance {
    pub a_lengths: Vec<u64>,
    pub b_lengths: Vec<u64>,
    /// Sorted ascending after construction.
    pub ab_sets: Vec<Vec<u64>>,
    /// Sorted ascending after construction.
    pub ba_sets: Vec<Vec<u64>>,
}

impl EddInstance {
    /// Checks the shape (counts, non-empty sets, length range) and sorts every
    /// multiset. Arithmetic consistency is left to [`validate_consistency`].
    pub fn new(
        a_lengths: Vec<u64>,
        b_lengths: Vec<u64>,
        mut ab_sets: Vec<Vec<u64>>,
        mut ba_sets: Vec<Vec<u64>>,
    ) -> Result<Self, ShapeError> {
        if a_lengths.is_empty() {
            return Err(ShapeError::NoFragments('A'));
        }
        if b_lengths.is_empty() {
            return Err(ShapeError::NoFragments('B'));
        }
        if ab_sets.len() != a_lengths.len() {
            return Err(ShapeError::SetCount {
                label: "AB",
                expected: a_lengths.len(),
                found: ab_sets.len(),
            });
        }
        if ba_sets.len() != b_lengths.len() {
            return Err(ShapeError::SetCount {
                label: "BA",
                expected: b_lengths.len(),
                found: ba_sets.len(),
            });
        }
        for (label, sets) in [("AB", &ab_sets), ("BA", &ba_sets)] {
            if let Some(index) = sets.iter().position(Vec::is_empty) {
                return Err(ShapeError::EmptySet {
                    label,
                    index: index + 1,
                });
            }
        }
        let all = a_lengths
            .iter()
            .chain(&b_lengths)
            .chain(ab_sets.iter().flatten())
            .chain(ba_sets.iter().flatten());
        for &v in all {
            if v == 0 || v > MAX_LENGTH {
                return Err(ShapeError::LengthOutOfRange(v));
            }
        }
        for set in ab_sets.iter_mut().chain(ba_sets.iter_mut()) {
            set.sort_unstable();
        }
        Ok(Self {
            a_lengths,
            b_lengths,
            ab_sets,
            ba_sets,
        })
    }

    pub fn p(&self) -> usize {
        self.a_lengths.len()
    }

    pub fn q(&self) -> usize {
        self.b_lengths.len()
    }

    /// Number of double-digest fragments as seen from the AB side.
    pub fn c_len(&self) -> usize {
        self.ab_sets.iter().map(Vec::len).sum()
    }

    /// The multiset `C` (union of the AB sets), sorted.
    pub fn c_multiset(&self) -> Vec<u64> {
        sorted_union(&self.ab_sets)
    }
}

fn sorted_union(sets: &[Vec<u64>]) -> Vec<u64> {
    let mut all: Vec<u64> = sets.iter().flatten().copied().collect();
    all.sort_unstable();
    all
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    SumA,
    SumB,
    UnionMismatch,
    Count,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::SumA => "SUM_A",
            Rule::SumB => "SUM_B",
            Rule::UnionMismatch => "UNION_MISMATCH",
            Rule::Count => "COUNT",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    /// 0-based fragment index for the per-fragment sum rules.
    pub index: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn rules(&self) -> Vec<Rule> {
        self.violations.iter().map(|v| v.rule).collect()
    }
}

/// Checks the three arithmetic properties every genuine digest satisfies:
/// fragment lengths equal the sums of their cross-digest pieces, both sides
/// describe the same multiset `C`, and `|C| = p + q - 1`. All failures are
/// reported.
pub fn validate_consistency(inst: &EddInstance) -> ConsistencyReport {
    let mut violations = Vec::new();
    let sides = [
        (Rule::SumA, 'a', "AB", &inst.a_lengths, &inst.ab_sets),
        (Rule::SumB, 'b', "BA", &inst.b_lengths, &inst.ba_sets),
    ];
    for (rule, name, set_name, lengths, sets) in sides {
        for (i, (&len, set)) in lengths.iter().zip(sets).enumerate() {
            let sum: u128 = set.iter().map(|&v| u128::from(v)).sum();
            if sum != u128::from(len) {
                violations.push(Violation {
                    rule,
                    index: Some(i),
                    detail: format!(
                        "{name}_{} = {len} but sum({set_name}_{}) = {sum}",
                        i + 1,
                        i + 1
                    ),
                });
            }
        }
    }

    let ab = sorted_union(&inst.ab_sets);
    let ba = sorted_union(&inst.ba_sets);
    if ab != ba {
        let (only_ab, only_ba) = multiset_difference(&ab, &ba);
        violations.push(Violation {
            rule: Rule::UnionMismatch,
            index: None,
            detail: format!(
                "only in AB union: {}; only in BA union: {}",
                join_or_none(&only_ab),
                join_or_none(&only_ba)
            ),
        });
    }

    let expected = inst.p() + inst.q() - 1;
    if ab.len() != expected {
        violations.push(Violation {
            rule: Rule::Count,
            index: None,
            detail: format!("|C| = {} but |A| + |B| - 1 = {expected}", ab.len()),
        });
    }
    ConsistencyReport { violations }
}

fn multiset_difference(left: &[u64], right: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let (mut i, mut j) = (0, 0);
    let (mut only_left, mut only_right) = (Vec::new(), Vec::new());
    while i < left.len() || j < right.len() {
        let ord = match (left.get(i), right.get(j)) {
            (Some(l), Some(r)) => l.cmp(r),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match ord {
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
            Ordering::Less => {
                only_left.push(left[i]);
                i += 1;
            }
            Ordering::Greater => {
                only_right.push(right[j]);
                j += 1;
            }
        }
    }
    (only_left, only_right)
}

fn join_or_none(values: &[u64]) -> String {
    if values.is_empty() {
        return "none".to_string();
    }
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn sample90_is_consistent() {
        assert!(validate_consistency(&sample90()).is_consistent());
    }

    #[test]
    fn duplicate_example_is_consistent() {
        let inst = duplicate_example();
        assert!(validate_consistency(&inst).is_consistent());
        assert_eq!(inst.c_len(), 6);
        assert_eq!(inst.c_len(), inst.p() + inst.q() - 1);
    }

    #[test]
    fn changed_ab_reports_sum_and_union() {
        let mut inst = sample90();
        inst.ab_sets[0] = vec![3, 7];
        let report = validate_consistency(&inst);
        assert_eq!(report.rules(), vec![Rule::SumA, Rule::UnionMismatch]);
        assert_eq!(report.violations[0].index, Some(0));
        assert_eq!(report.violations[0].detail, "a_1 = 9 but sum(AB_1) = 10");
        assert_eq!(
            report.violations[1].detail,
            "only in AB union: 7; only in BA union: 6"
        );
    }

    #[test]
    fn count_rule_alone() {
        let mut inst = sample90();
        inst.ab_sets[0] = vec![3, 3, 3];
        inst.ba_sets[0] = vec![3, 3];
        assert_eq!(validate_consistency(&inst).rules(), vec![Rule::Count]);
    }

    #[test]
    fn sum_b_reported_per_fragment() {
        let mut inst = sample90();
        inst.b_lengths[1] = 39;
        inst.b_lengths[2] = 45;
        let report = validate_consistency(&inst);
        assert_eq!(report.rules(), vec![Rule::SumB, Rule::SumB]);
        assert_eq!(report.violations[1].index, Some(2));
    }

    #[test]
    fn shape_errors() {
        assert_eq!(
            EddInstance::new(vec![], vec![5], vec![], vec![vec![5]]),
            Err(ShapeError::NoFragments('A'))
        );
        assert!(matches!(
            EddInstance::new(vec![5], vec![5], vec![vec![5], vec![1]], vec![vec![5]]),
            Err(ShapeError::SetCount { label: "AB", .. })
        ));
        assert!(matches!(
            EddInstance::new(vec![5], vec![5], vec![vec![]], vec![vec![5]]),
            Err(ShapeError::EmptySet { .. })
        ));
        assert_eq!(
            EddInstance::new(vec![0], vec![5], vec![vec![5]], vec![vec![5]]),
            Err(ShapeError::LengthOutOfRange(0))
        );
    }

    #[test]
    fn construction_sorts_multisets() {
        let inst = EddInstance::new(vec![9], vec![9], vec![vec![6, 3]], vec![vec![6, 3]]).unwrap();
        assert_eq!(inst.ab_sets[0], vec![3, 6]);
    }
}
