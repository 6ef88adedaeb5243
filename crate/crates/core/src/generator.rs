//! Instances with known answers, from simulated digests of a linear molecule.
//!
//! Random instances use `ChaCha8Rng` seeded through `SeedableRng::seed_from_u64`,
//! so a seed reproduces the same instance with this crate. Exchange
//! fixtures between implementations as EDD files, not seeds.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{EddInstance, LabeledLength, MAX_LENGTH};
use crate::verifier::Solution;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid cut model: {0}")]
    InvalidCuts(String),
    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),
    #[error("no instance with at least {wanted} duplicates after {attempts} attempts")]
    RetriesExhausted { wanted: usize, attempts: usize },
}

/// Restriction sites of two enzymes on a molecule of `total_length` bp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutModel {
    pub total_length: u64,
    pub cuts_a: Vec<u64>,
    pub cuts_b: Vec<u64>,
}

impl CutModel {
    /// Cuts must be strictly increasing, inside `(0, total_length)`, and the
    /// two enzymes never cut at the same site.
    pub fn new(total_length: u64, cuts_a: Vec<u64>, cuts_b: Vec<u64>) -> Result<Self, GenError> {
        if total_length == 0 || total_length > MAX_LENGTH {
            return Err(GenError::InvalidCuts(format!(
                "total length {total_length} out of range"
            )));
        }
        for (name, cuts) in [("A", &cuts_a), ("B", &cuts_b)] {
            if cuts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GenError::InvalidCuts(format!(
                    "{name} cuts are not strictly increasing"
                )));
            }
            if cuts.iter().any(|&c| c == 0 || c >= total_length) {
                return Err(GenError::InvalidCuts(format!(
                    "{name} cut outside (0, {total_length})"
                )));
            }
        }
        let a: HashSet<u64> = cuts_a.iter().copied().collect();
        if let Some(c) = cuts_b.iter().find(|c| a.contains(c)) {
            return Err(GenError::InvalidCuts(format!("both enzymes cut at {c}")));
        }
        Ok(CutModel {
            total_length,
            cuts_a,
            cuts_b,
        })
    }

    /// Sidecar lines recording the ground truth.
    pub fn truth_text(&self) -> String {
        let mut out = format!("GT-L {}\n", self.total_length);
        for (tag, cuts) in [("GT-A", &self.cuts_a), ("GT-B", &self.cuts_b)] {
            out.push_str(tag);
            for c in cuts {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
        out
    }
}

fn gaps(cuts: &[u64], total: u64) -> Vec<u64> {
    let mut prev = 0;
    cuts.iter()
        .chain(std::iter::once(&total))
        .map(|&c| {
            let g = c - prev;
            prev = c;
            g
        })
        .collect()
}

/// Digests the molecule. Fragments are indexed left to right, so the ground
/// truth is the identity order.
pub fn instance_from_cuts(m: &CutModel) -> (EddInstance, Solution) {
    let a_lengths = gaps(&m.cuts_a, m.total_length);
    let b_lengths = gaps(&m.cuts_b, m.total_length);
    let mut ab_sets = vec![Vec::new(); a_lengths.len()];
    let mut ba_sets = vec![Vec::new(); b_lengths.len()];
    let mut pieces = Vec::with_capacity(a_lengths.len() + b_lengths.len() - 1);

    let (mut i, mut j, mut start) = (0, 0, 0);
    let a_end = |i: usize| m.cuts_a.get(i).copied().unwrap_or(m.total_length);
    let b_end = |j: usize| m.cuts_b.get(j).copied().unwrap_or(m.total_length);
    while start < m.total_length {
        let end = a_end(i).min(b_end(j));
        let len = end - start;
        ab_sets[i].push(len);
        ba_sets[j].push(len);
        pieces.push((len, i, j));
        if a_end(i) == end {
            i += 1;
        }
        if b_end(j) == end {
            j += 1;
        }
        start = end;
    }

    // Copies of a value are numbered left to right, which is also A-owner order.
    let mut copies: std::collections::HashMap<u64, u32> = std::collections::HashMap::new();
    let pi_c = pieces
        .iter()
        .map(|&(value, a_owner, b_owner)| {
            let n = copies.entry(value).or_insert(0);
            *n += 1;
            LabeledLength {
                value,
                copy_id: *n,
                a_owner,
                b_owner,
            }
        })
        .collect();
    let truth = Solution {
        pi_a: (0..a_lengths.len()).collect(),
        pi_b: (0..b_lengths.len()).collect(),
        pi_c,
    };
    let inst = EddInstance::new(a_lengths, b_lengths, ab_sets, ba_sets)
        .expect("cut models always give well-formed instances");
    (inst, truth)
}

/// Draws `p - 1 + q - 1` distinct cut sites in `(0, total_length)` and
/// splits them at random between the enzymes.
pub fn random_cuts(seed: u64, p: usize, q: usize, total_length: u64) -> Result<CutModel, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_cuts(&mut rng, p, q, total_length)
}

fn draw_cuts(
    rng: &mut ChaCha8Rng,
    p: usize,
    q: usize,
    total_length: u64,
) -> Result<CutModel, GenError> {
    if p == 0 || q == 0 {
        return Err(GenError::InfeasibleParams(
            "p and q must be at least 1".into(),
        ));
    }
    let sites = p + q - 2;
    if total_length == 0 || total_length > MAX_LENGTH || (total_length - 1) < sites as u64 {
        return Err(GenError::InfeasibleParams(format!(
            "{sites} distinct cut sites do not fit in a molecule of length {total_length}"
        )));
    }
    let positions: Vec<u64> = if total_length - 1 <= usize::MAX as u64 {
        index::sample(rng, (total_length - 1) as usize, sites)
            .into_iter()
            .map(|x| x as u64 + 1)
            .collect()
    } else {
        let mut set = HashSet::with_capacity(sites);
        while set.len() < sites {
            set.insert(rng.gen_range(1..total_length));
        }
        set.into_iter().collect()
    };
    let to_a: HashSet<usize> = index::sample(rng, sites, p - 1).into_iter().collect();
    let mut cuts_a = Vec::with_capacity(p - 1);
    let mut cuts_b = Vec::with_capacity(q - 1);
    for (k, &pos) in positions.iter().enumerate() {
        if to_a.contains(&k) {
            cuts_a.push(pos);
        } else {
            cuts_b.push(pos);
        }
    }
    cuts_a.sort_unstable();
    cuts_b.sort_unstable();
    CutModel::new(total_length, cuts_a, cuts_b)
}

/// A seeded random instance and its ground truth.
pub fn random_instance(
    seed: u64,
    p: usize,
    q: usize,
    total_length: u64,
) -> Result<(EddInstance, Solution), GenError> {
    Ok(instance_from_cuts(&random_cuts(seed, p, q, total_length)?))
}

/// Number of elements of `C` that repeat an earlier value.
pub fn duplicate_count(inst: &EddInstance) -> usize {
    let mut c = inst.c_multiset();
    let n = c.len();
    c.dedup();
    n - c.len()
}

/// Rejection-samples until `C` has at least `min_duplicates` repeats. A small
/// `total_length` relative to `p + q` makes repeats likely.
pub fn random_instance_with_duplicates(
    seed: u64,
    p: usize,
    q: usize,
    total_length: u64,
    min_duplicates: usize,
    max_attempts: usize,
) -> Result<(EddInstance, Solution, CutModel), GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_attempts {
        let cuts = draw_cuts(&mut rng, p, q, total_length)?;
        let (inst, truth) = instance_from_cuts(&cuts);
        if duplicate_count(&inst) >= min_duplicates {
            return Ok((inst, truth, cuts));
        }
    }
    Err(GenError::RetriesExhausted {
        wanted: min_duplicates,
        attempts: max_attempts,
    })
}

/// An instance whose `n = p + q - 1` pieces have pairwise distinct lengths,
/// drawn from `1..=4n` in random order; `p - 1` of the piece boundaries are
/// A sites.
pub fn random_distinct_cuts(seed: u64, p: usize, q: usize) -> Result<CutModel, GenError> {
    if p == 0 || q == 0 {
        return Err(GenError::InfeasibleParams(
            "p and q must be at least 1".into(),
        ));
    }
    let n = p + q - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lengths: Vec<u64> = index::sample(&mut rng, 4 * n, n)
        .into_iter()
        .map(|x| x as u64 + 1)
        .collect();
    lengths.shuffle(&mut rng);
    let to_a: HashSet<usize> = index::sample(&mut rng, n - 1, p - 1).into_iter().collect();
    let mut cuts_a = Vec::with_capacity(p - 1);
    let mut cuts_b = Vec::with_capacity(q - 1);
    let mut pos = 0u64;
    for (k, len) in lengths[..n - 1].iter().enumerate() {
        pos += len;
        if to_a.contains(&k) {
            cuts_a.push(pos);
        } else {
            cuts_b.push(pos);
        }
    }
    let total = pos + lengths[n - 1];
    CutModel::new(total, cuts_a, cuts_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::sample90;
    use crate::instance::{serialize_instance, validate_consistency};
    use crate::verifier::verify_permutation;

    fn sorted_fragments(lengths: &[u64], sets: &[Vec<u64>]) -> Vec<(u64, Vec<u64>)> {
        let mut v: Vec<(u64, Vec<u64>)> =
            lengths.iter().copied().zip(sets.iter().cloned()).collect();
        v.sort();
        v
    }

    #[test]
    fn sample90_cuts_reproduce_sample90() {
        let m = CutModel::new(90, vec![9, 21, 36, 73], vec![6, 44]).unwrap();
        let (inst, truth) = instance_from_cuts(&m);
        let fig = sample90();
        // Identity order along the molecule: a = 9 12 15 37 17.
        assert_eq!(inst.a_lengths, vec![9, 12, 15, 37, 17]);
        assert_eq!(inst.b_lengths, fig.b_lengths);
        assert_eq!(inst.ba_sets, fig.ba_sets);
        assert_eq!(
            sorted_fragments(&inst.a_lengths, &inst.ab_sets),
            sorted_fragments(&fig.a_lengths, &fig.ab_sets)
        );
        assert!(validate_consistency(&inst).is_consistent());
        assert!(verify_permutation(&inst, &truth.pi_a, &truth.pi_b).is_ok());
        assert_eq!(truth.c_values(), vec![6, 3, 12, 15, 8, 29, 17]);
    }

    #[test]
    fn uncut_molecule() {
        let (inst, truth) = instance_from_cuts(&CutModel::new(5, vec![], vec![]).unwrap());
        assert_eq!(
            serialize_instance(&inst),
            "EDD 1\nA 5\nB 5\nAB 1 5\nBA 1 5\n"
        );
        assert_eq!(truth.pi_a, vec![0]);
    }

    #[test]
    fn duplicate_example_cuts() {
        // Pieces 5 7 6 | 7 4 8 with B sites at 5, 12, 25, 29.
        let (inst, truth) =
            instance_from_cuts(&CutModel::new(37, vec![18], vec![5, 12, 25, 29]).unwrap());
        assert_eq!(inst.a_lengths, vec![18, 19]);
        assert_eq!(inst.ab_sets, vec![vec![5, 6, 7], vec![4, 7, 8]]);
        assert_eq!(
            sorted_fragments(&inst.b_lengths, &inst.ba_sets),
            vec![
                (4, vec![4]),
                (5, vec![5]),
                (7, vec![7]),
                (8, vec![8]),
                (13, vec![6, 7])
            ]
        );
        assert!(validate_consistency(&inst).is_consistent());
        let sevens: Vec<u32> = truth
            .pi_c
            .iter()
            .filter(|c| c.value == 7)
            .map(|c| c.copy_id)
            .collect();
        assert_eq!(sevens, vec![1, 2]);
    }

    #[test]
    fn invalid_cut_models() {
        assert!(CutModel::new(10, vec![5], vec![5]).is_err());
        assert!(CutModel::new(10, vec![5, 3], vec![]).is_err());
        assert!(CutModel::new(10, vec![10], vec![]).is_err());
        assert!(CutModel::new(0, vec![], vec![]).is_err());
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let (a, _) = random_instance(1, 3, 2, 100).unwrap();
        let (b, _) = random_instance(1, 3, 2, 100).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.p(), a.q()), (3, 2));
        assert_eq!(a.a_lengths.iter().sum::<u64>(), 100);
        let (c, _) = random_instance(2, 3, 2, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_fragment_generation() {
        let (inst, _) = random_instance(7, 1, 1, 40).unwrap();
        assert_eq!(inst.a_lengths, vec![40]);
        assert_eq!(inst.c_len(), 1);
    }

    #[test]
    fn infeasible_parameters() {
        assert!(matches!(
            random_instance(1, 5, 5, 8),
            Err(GenError::InfeasibleParams(_))
        ));
        assert!(matches!(
            random_instance(1, 0, 2, 100),
            Err(GenError::InfeasibleParams(_))
        ));
    }

    #[test]
    fn forced_duplicates() {
        let (inst, truth, _) = random_instance_with_duplicates(3, 4, 4, 12, 2, 1000).unwrap();
        assert!(duplicate_count(&inst) >= 2);
        assert!(verify_permutation(&inst, &truth.pi_a, &truth.pi_b).is_ok());
        assert!(matches!(
            random_instance_with_duplicates(3, 2, 1, 1000, 5, 10),
            Err(GenError::RetriesExhausted { .. })
        ));
    }

    #[test]
    fn distinct_generator_has_no_duplicates() {
        let m = random_distinct_cuts(9, 40, 25).unwrap();
        let (inst, truth) = instance_from_cuts(&m);
        assert_eq!((inst.p(), inst.q()), (40, 25));
        assert_eq!(duplicate_count(&inst), 0);
        assert!(validate_consistency(&inst).is_consistent());
        assert!(verify_permutation(&inst, &truth.pi_a, &truth.pi_b).is_ok());
    }

    #[test]
    fn truth_sidecar() {
        let m = CutModel::new(90, vec![9, 21, 36, 73], vec![6, 44]).unwrap();
        assert_eq!(m.truth_text(), "GT-L 90\nGT-A 9 21 36 73\nGT-B 6 44\n");
    }
}
