//! Set partitions of a finite ground set and the lattice operations used by
//! the cumulant machinery.
//!
//! Elements are 0-based internally (`0..k`); `Display` prints them 1-based so
//! that `{{1,2},{3,4}}` reads the usual way.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the ground-set size for full enumeration (Bell(10) = 115975).
pub const ENUMERATION_CAP: usize = 10;

/// Default cap on `k` (ground set `2k`) for the exhaustive pairing audit.
pub const AUDIT_CAP: usize = 4;

/// Cap on `k` when large audits are explicitly allowed.
pub const AUDIT_CAP_LARGE: usize = 5;

/// A set partition in canonical form: every block sorted ascending, blocks
/// ordered by their minimum element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    ground: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from arbitrary blocks over `0..ground`.
    pub fn from_blocks(ground: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if ground == 0 {
            return Err(Error::domain("partition of an empty ground set"));
        }
        let mut labels = vec![usize::MAX; ground];
        for (label, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::domain("partition has an empty block"));
            }
            for &e in block {
                if e >= ground {
                    return Err(Error::domain(format!(
                        "element {e} outside ground set of size {ground}"
                    )));
                }
                if labels[e] != usize::MAX {
                    return Err(Error::domain(format!("element {e} appears in two blocks")));
                }
                labels[e] = label;
            }
        }
        if let Some(e) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::domain(format!("element {e} is not covered")));
        }
        Ok(Self::from_labels(&labels))
    }

    /// Builds the partition whose blocks are the level sets of `labels`.
    pub fn from_labels(labels: &[usize]) -> Self {
        assert!(!labels.is_empty(), "partition of an empty ground set");
        let mut index_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (e, &l) in labels.iter().enumerate() {
            let next = blocks.len();
            let idx = *index_of.entry(l).or_insert(next);
            if idx == blocks.len() {
                blocks.push(Vec::new());
            }
            blocks[idx].push(e);
        }
        Self {
            ground: labels.len(),
            blocks,
        }
    }

    pub fn singletons(k: usize) -> Self {
        Self::from_labels(&(0..k).collect::<Vec<_>>())
    }

    pub fn single_block(k: usize) -> Self {
        Self::from_labels(&vec![0; k])
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks, written `#Π`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index of every element (restricted-growth labelling).
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.ground];
        for (l, block) in self.blocks.iter().enumerate() {
            for &e in block {
                labels[e] = l;
            }
        }
        labels
    }

    /// Bitmask of each block (requires `ground ≤ 64`).
    pub fn block_masks(&self) -> Vec<u64> {
        self.blocks
            .iter()
            .map(|b| b.iter().fold(0u64, |m, &e| m | (1 << e)))
            .collect()
    }

    pub fn is_perfect_matching(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }

    pub fn has_no_singletons(&self) -> bool {
        self.blocks.iter().all(|b| b.len() >= 2)
    }

    /// True iff every block of `self` lies inside some block of `coarse`.
    pub fn refines(&self, coarse: &Partition) -> Result<bool> {
        same_ground(self, coarse)?;
        let coarse_labels = coarse.labels();
        Ok(self
            .blocks
            .iter()
            .all(|b| b.iter().all(|&e| coarse_labels[e] == coarse_labels[b[0]])))
    }

    /// Least upper bound `self ∨ other`: connected components of the union of
    /// the two block structures.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        same_ground(self, other)?;
        let mut uf = UnionFind::new(self.ground);
        for block in self.blocks.iter().chain(other.blocks.iter()) {
            for w in block.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        Ok(uf.partition())
    }

    /// Number of blocks of the join of several partitions over the same set.
    pub fn join_count(parts: &[&Partition]) -> usize {
        let ground = parts[0].ground;
        let mut uf = UnionFind::new(ground);
        for p in parts {
            debug_assert_eq!(p.ground, ground);
            for block in &p.blocks {
                for w in block.windows(2) {
                    uf.union(w[0], w[1]);
                }
            }
        }
        uf.components()
    }

    /// Every partition refining `self`, in canonical order.
    pub fn refinements(&self) -> Vec<Partition> {
        let per_block: Vec<Vec<Vec<usize>>> = self
            .blocks
            .iter()
            .map(|b| enumerate_labelings(b.len()))
            .collect();
        let mut out = Vec::new();
        let mut choice = vec![0usize; self.blocks.len()];
        loop {
            let mut labels = vec![0usize; self.ground];
            let mut offset = 0;
            for (bi, block) in self.blocks.iter().enumerate() {
                let rgs = &per_block[bi][choice[bi]];
                for (pos, &e) in block.iter().enumerate() {
                    labels[e] = offset + rgs[pos];
                }
                offset += block.len();
            }
            out.push(Partition::from_labels(&labels));
            // odometer over the per-block choices
            let mut i = 0;
            loop {
                if i == choice.len() {
                    out.sort();
                    return out;
                }
                choice[i] += 1;
                if choice[i] < per_block[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (j, e) in block.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", e + 1)?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

fn same_ground(a: &Partition, b: &Partition) -> Result<()> {
    if a.ground != b.ground {
        return Err(Error::domain(format!(
            "ground sizes differ: {} vs {}",
            a.ground, b.ground
        )));
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so labels stay stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    fn components(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }

    fn partition(&mut self) -> Partition {
        let labels: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Partition::from_labels(&labels)
    }
}

/// Restricted-growth strings of length `k` in lexicographic order.
fn enumerate_labelings(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut a = vec![0usize; k];
    // prefix_max[i] = max(a[0..i]), the largest label usable at position i is prefix_max[i] + 1
    let mut prefix_max = vec![0usize; k];
    loop {
        out.push(a.clone());
        let mut i = k;
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            if a[i] <= prefix_max[i] {
                a[i] += 1;
                break;
            }
        }
        for j in i + 1..k {
            a[j] = 0;
            prefix_max[j] = prefix_max[j - 1].max(a[j - 1]);
        }
    }
}

fn check_enumeration_cap(k: usize, cap: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::domain("partitions of an empty set"));
    }
    if k > cap {
        return Err(Error::Capacity {
            what: "partition ground size",
            requested: k,
            cap,
        });
    }
    Ok(())
}

/// All set partitions of `{1..k}` in restricted-growth-string order.
pub fn enumerate_partitions(k: usize) -> Result<Vec<Partition>> {
    enumerate_partitions_capped(k, ENUMERATION_CAP)
}

pub fn enumerate_partitions_capped(k: usize, cap: usize) -> Result<Vec<Partition>> {
    check_enumeration_cap(k, cap)?;
    Ok(enumerate_labelings(k)
        .iter()
        .map(|l| Partition::from_labels(l))
        .collect())
}

/// Partitions of `{1..k}` whose blocks all have at least two elements.
pub fn enumerate_no_singleton(k: usize) -> Result<Vec<Partition>> {
    enumerate_no_singleton_capped(k, ENUMERATION_CAP)
}

pub fn enumerate_no_singleton_capped(k: usize, cap: usize) -> Result<Vec<Partition>> {
    Ok(enumerate_partitions_capped(k, cap)?
        .into_iter()
        .filter(Partition::has_no_singletons)
        .collect())
}

/// All perfect matchings of `{1..size}` (`size` even).
pub fn perfect_matchings(size: usize) -> Result<Vec<Partition>> {
    if size == 0 || size % 2 == 1 {
        return Err(Error::domain(format!(
            "perfect matchings need a positive even ground size, got {size}"
        )));
    }
    fn recurse(free: &mut Vec<usize>, pairs: &mut Vec<Vec<usize>>, ground: usize, out: &mut Vec<Partition>) {
        if free.is_empty() {
            out.push(Partition::from_blocks(ground, pairs.clone()).expect("matching is valid"));
            return;
        }
        let first = free.remove(0);
        for i in 0..free.len() {
            let partner = free.remove(i);
            pairs.push(vec![first, partner]);
            recurse(free, pairs, ground, out);
            pairs.pop();
            free.insert(i, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    recurse(&mut (0..size).collect(), &mut Vec::new(), size, &mut out);
    Ok(out)
}

/// The standard matchings `(Π₀, Π₁)` of `{1..2k}` for block sizes `k₁..k_r`.
///
/// `Π₀` pairs `{2t−1, 2t}`. Within block `α` (elements `K_{α−1}+1..K_α`),
/// `Π₁` pairs `{K_{α−1}+2ν, K_{α−1}+2ν+1}` and wraps with `{K_α, K_{α−1}+1}`,
/// so `Π₀ ∨ Π₁` has one block of size `2k_α` per `α`.
pub fn standard_matchings(block_sizes: &[usize]) -> Result<(Partition, Partition)> {
    if block_sizes.is_empty() {
        return Err(Error::domain("standard matchings need at least one block"));
    }
    if block_sizes.contains(&0) {
        return Err(Error::domain("block sizes must be positive"));
    }
    let k: usize = block_sizes.iter().sum();
    let ground = 2 * k;
    let pi0 = (0..k).map(|t| vec![2 * t, 2 * t + 1]).collect();
    let mut pi1 = Vec::with_capacity(k);
    let mut start = 0;
    for &ka in block_sizes {
        let end = start + 2 * ka;
        for nu in 1..ka {
            pi1.push(vec![start + 2 * nu - 1, start + 2 * nu]);
        }
        pi1.push(vec![end - 1, start]);
        start = end;
    }
    Ok((
        Partition::from_blocks(ground, pi0)?,
        Partition::from_blocks(ground, pi1)?,
    ))
}

/// Möbius weight `∏_{A∈coarse} (−1)^{m_A−1} (m_A−1)!`, where `m_A` counts the
/// blocks of `fine` inside `A`.
pub fn mobius_weight(coarse: &Partition, fine: &Partition) -> Result<i64> {
    if !fine.refines(coarse)? {
        return Err(Error::domain(format!("{fine} does not refine {coarse}")));
    }
    let coarse_labels = coarse.labels();
    let mut counts = vec![0usize; coarse.len()];
    for block in fine.blocks() {
        counts[coarse_labels[block[0]]] += 1;
    }
    Ok(counts.iter().map(|&m| signed_factorial(m)).product())
}

/// `(−1)^{m−1} (m−1)!`
fn signed_factorial(m: usize) -> i64 {
    let f: i64 = (1..m as i64).product();
    if m % 2 == 0 {
        -f
    } else {
        f
    }
}

/// Join sizes and bounds for one `(Π₀, Π₁, Π)` triple of the pairing inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleBounds {
    pub k: usize,
    /// `#Π₀ ∨ Π₁`
    pub r: usize,
    /// `#Π₀ ∨ Π`
    pub join0: usize,
    /// `#Π₁ ∨ Π`
    pub join1: usize,
    /// `#Π`
    pub parts: usize,
    /// `#Π₀ ∨ Π₁ ∨ Π`
    pub total_join: usize,
}

impl TripleBounds {
    pub fn evaluate(pi0: &Partition, pi1: &Partition, pi: &Partition) -> Result<Self> {
        same_ground(pi0, pi1)?;
        same_ground(pi0, pi)?;
        if pi0.ground % 2 == 1 {
            return Err(Error::domain("ground size must be even"));
        }
        Ok(Self {
            k: pi0.ground / 2,
            r: Partition::join_count(&[pi0, pi1]),
            join0: Partition::join_count(&[pi0, pi]),
            join1: Partition::join_count(&[pi1, pi]),
            parts: pi.len(),
            total_join: Partition::join_count(&[pi0, pi1, pi]),
        })
    }

    pub fn join_sum(&self) -> usize {
        self.join0 + self.join1
    }

    /// `#Π₀∨Π + #Π₁∨Π ≤ 1 + #Π ≤ k + 1`
    pub fn holds_basic(&self) -> bool {
        self.join_sum() <= 1 + self.parts && 1 + self.parts <= self.k + 1
    }

    /// `k + 1 − ⌊r/2⌋`, the sharpened bound for `r > 1`.
    pub fn sharpened_bound(&self) -> usize {
        self.k + 1 - self.r / 2
    }

    pub fn holds_sharpened(&self) -> bool {
        self.r <= 1 || self.join_sum() <= self.sharpened_bound()
    }

    /// `k + 2 − r`; valid when `Π` is a perfect matching, false in general.
    pub fn matching_bound(&self) -> isize {
        self.k as isize + 2 - self.r as isize
    }

    pub fn holds_matching_bound(&self) -> bool {
        (self.join_sum() as isize) <= self.matching_bound()
    }

    /// Slack of the tightest applicable bound.
    pub fn slack(&self) -> isize {
        let bound = if self.r > 1 {
            self.sharpened_bound()
        } else {
            1 + self.parts
        };
        bound as isize - self.join_sum() as isize
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SlackSummary {
    pub count: usize,
    pub min_slack: isize,
    pub max_slack: isize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditViolation {
    pub pi1: Partition,
    pub pi: Partition,
    pub bounds: TripleBounds,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub k: usize,
    pub matchings: usize,
    pub candidates: usize,
    /// Connected triples that were checked.
    pub checked: usize,
    pub by_r: BTreeMap<usize, SlackSummary>,
    pub violations: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, pi1: &Partition, pi: &Partition, bounds: TripleBounds) {
        self.checked += 1;
        let slack = bounds.slack();
        let entry = self.by_r.entry(bounds.r).or_insert(SlackSummary {
            count: 0,
            min_slack: isize::MAX,
            max_slack: isize::MIN,
        });
        entry.count += 1;
        entry.min_slack = entry.min_slack.min(slack);
        entry.max_slack = entry.max_slack.max(slack);
        if !(bounds.holds_basic() && bounds.holds_sharpened()) {
            self.violations.push(AuditViolation {
                pi1: pi1.clone(),
                pi: pi.clone(),
                bounds,
            });
        }
    }
}

/// Exhaustively checks the pairing inequalities for every perfect matching
/// `Π₁` of `{1..2k}` and every singleton-free `Π` with `#Π₀∨Π₁∨Π = 1`, with
/// `Π₀` fixed to `{{1,2},{3,4},…}`.
pub fn audit_prop31(k: usize, allow_large: bool) -> Result<AuditReport> {
    let cap = if allow_large { AUDIT_CAP_LARGE } else { AUDIT_CAP };
    if k == 0 {
        return Err(Error::domain("audit needs k ≥ 1"));
    }
    if k > cap {
        return Err(Error::Capacity {
            what: "audit k",
            requested: k,
            cap,
        });
    }
    let (pi0, _) = standard_matchings(&[k])?;
    let matchings = perfect_matchings(2 * k)?;
    let candidates = enumerate_no_singleton_capped(2 * k, 2 * AUDIT_CAP_LARGE)?;
    let mut report = AuditReport {
        k,
        matchings: matchings.len(),
        candidates: candidates.len(),
        checked: 0,
        by_r: BTreeMap::new(),
        violations: Vec::new(),
    };
    for pi1 in &matchings {
        for pi in &candidates {
            if Partition::join_count(&[&pi0, pi1, pi]) != 1 {
                continue;
            }
            let bounds = TripleBounds::evaluate(&pi0, pi1, pi)?;
            report.record(pi1, pi, bounds);
        }
    }
    Ok(report)
}

/// A connected triple with `k = 6`, `#Π₀∨Π₁ = 5` and `#Π₀∨Π = #Π₁∨Π = 2`.
///
/// `Π` is not a matching. The triple satisfies both pairing inequalities but
/// breaks `#Π₀∨Π + #Π₁∨Π ≤ k + 2 − r`, a bound that holds for matchings
/// only. Returned as `(Π₀, Π₁, Π)`.
pub fn matching_bound_counterexample() -> (Partition, Partition, Partition) {
    let build = |blocks: &[&[usize]]| {
        Partition::from_blocks(12, blocks.iter().map(|b| b.iter().map(|e| e - 1).collect()).collect())
            .expect("fixture blocks are a partition of 12 points")
    };
    (
        build(&[&[1, 2], &[3, 4], &[5, 6], &[7, 8], &[9, 10], &[11, 12]]),
        build(&[&[2, 3], &[1, 4], &[5, 6], &[7, 8], &[9, 10], &[11, 12]]),
        build(&[&[1, 5, 6], &[2, 7, 8], &[3, 9, 10], &[4, 11, 12]]),
    )
}
