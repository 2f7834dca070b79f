//! Multi-indices, monotone sets, and sparse-grid bookkeeping.
//!
//! A multi-index `ν` assigns a level to each of countably many dimensions,
//! all but finitely many zero. A set `Λ` of multi-indices is monotone
//! (downward closed) when `ν ∈ Λ` implies `ν - e_m ∈ Λ` for every dimension
//! in the support of `ν`. Monotone sets are the index sets of the sparse
//! collocation operator; this module maintains them, enumerates admissible
//! neighbors and the classic total-degree and hyperbolic-cross families,
//! expands the inclusion-exclusion (combination technique) coefficients,
//! and enumerates the underlying sparse grids symbolically.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::Error;
use crate::hermite;
use crate::Result;

/// A finitely supported multi-index. Dimensions are 1-based.
///
/// Only nonzero levels are stored, as `(dimension, level)` pairs sorted by
/// dimension. The derived `Ord` on that canonical form is the total order
/// used for deterministic iteration and tie-breaking throughout the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<(u32, u32)>,
}

impl MultiIndex {
    /// The zero index.
    pub fn zero() -> Self {
        MultiIndex {
            entries: Vec::new(),
        }
    }

    /// The unit index `e_dim`.
    pub fn unit(dim: u32) -> Self {
        assert!(dim >= 1, "dimensions are 1-based");
        MultiIndex {
            entries: vec![(dim, 1)],
        }
    }

    /// Builds an index from `(dimension, level)` pairs. Zero levels are
    /// dropped; duplicate dimensions are a programming error.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut entries: Vec<(u32, u32)> = pairs.into_iter().filter(|&(_, l)| l > 0).collect();
        entries.sort_unstable();
        for pair in entries.windows(2) {
            assert!(pair[0].0 != pair[1].0, "duplicate dimension {}", pair[0].0);
        }
        assert!(
            entries.iter().all(|&(d, _)| d >= 1),
            "dimensions are 1-based"
        );
        MultiIndex { entries }
    }

    /// Builds an index from dense levels, position `p` meaning dimension
    /// `p + 1`.
    pub fn from_levels(levels: &[u32]) -> Self {
        Self::from_pairs(levels.iter().enumerate().map(|(p, &l)| (p as u32 + 1, l)))
    }

    /// The level in the given dimension.
    pub fn level(&self, dim: u32) -> u32 {
        self.entries
            .iter()
            .find(|&&(d, _)| d == dim)
            .map_or(0, |&(_, l)| l)
    }

    /// The stored `(dimension, level)` pairs, sorted by dimension.
    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    /// Iterates over the support.
    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|&(d, _)| d)
    }

    /// `|ν|₀`, the support size.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// `|ν|₁`, the sum of levels.
    pub fn total_level(&self) -> u64 {
        self.entries.iter().map(|&(_, l)| l as u64).sum()
    }

    /// The largest dimension in the support, `0` for the zero index.
    pub fn max_support_dim(&self) -> u32 {
        self.entries.last().map_or(0, |&(d, _)| d)
    }

    /// True for the zero index.
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `∏ (1 + ν_m)`, the cardinality of the rectangular envelope.
    pub fn envelope_len(&self) -> u128 {
        self.entries.iter().map(|&(_, l)| l as u128 + 1).product()
    }

    /// Componentwise `self ≤ other`.
    pub fn pointwise_leq(&self, other: &MultiIndex) -> bool {
        self.entries.iter().all(|&(d, l)| l <= other.level(d))
    }

    /// `self + e_dim`.
    pub fn incremented(&self, dim: u32) -> Self {
        assert!(dim >= 1, "dimensions are 1-based");
        let mut entries = self.entries.clone();
        match entries.binary_search_by_key(&dim, |&(d, _)| d) {
            Ok(pos) => entries[pos].1 += 1,
            Err(pos) => entries.insert(pos, (dim, 1)),
        }
        MultiIndex { entries }
    }

    /// `self - e_dim`, or `None` when the level there is already zero.
    pub fn decremented(&self, dim: u32) -> Option<Self> {
        let pos = self.entries.binary_search_by_key(&dim, |&(d, _)| d).ok()?;
        let mut entries = self.entries.clone();
        if entries[pos].1 == 1 {
            entries.remove(pos);
        } else {
            entries[pos].1 -= 1;
        }
        Some(MultiIndex { entries })
    }

    /// The rectangular envelope `R_ν = {k : k ≤ ν}` as a monotone set.
    pub fn envelope(&self) -> MonotoneSet {
        let mut members = vec![MultiIndex::zero()];
        for &(dim, level) in &self.entries {
            let mut extended = Vec::with_capacity(members.len() * (level as usize + 1));
            for base in &members {
                let mut grown = base.clone();
                extended.push(grown.clone());
                for _ in 0..level {
                    grown = grown.incremented(dim);
                    extended.push(grown.clone());
                }
            }
            members = extended;
        }
        MonotoneSet {
            members: members.into_iter().collect(),
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        write!(f, "(")?;
        let max_dim = self.max_support_dim();
        for dim in 1..=max_dim {
            if dim > 1 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.level(dim))?;
        }
        write!(f, ")")
    }
}

/// A downward-closed (monotone) set of multi-indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneSet {
    members: BTreeSet<MultiIndex>,
}

impl MonotoneSet {
    /// The set `{0}`, the seed of every adaptive run.
    pub fn singleton_zero() -> Self {
        let mut members = BTreeSet::new();
        members.insert(MultiIndex::zero());
        MonotoneSet { members }
    }

    /// Builds a set from members, verifying downward closure.
    pub fn from_members(iter: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        let members: BTreeSet<MultiIndex> = iter.into_iter().collect();
        for member in &members {
            for dim in member.support().collect::<Vec<_>>() {
                let predecessor = member
                    .decremented(dim)
                    .expect("support dimensions have positive level");
                if !members.contains(&predecessor) {
                    return Err(Error::NotMonotone {
                        member: member.clone(),
                        missing: predecessor,
                    });
                }
            }
        }
        Ok(MonotoneSet { members })
    }

    /// Inserts an index whose predecessors are all present. Inserting an
    /// existing member is a no-op.
    pub fn insert(&mut self, index: MultiIndex) -> Result<()> {
        if self.members.contains(&index) {
            return Ok(());
        }
        for dim in index.support().collect::<Vec<_>>() {
            let predecessor = index
                .decremented(dim)
                .expect("support dimensions have positive level");
            if !self.members.contains(&predecessor) {
                return Err(Error::InadmissibleInsert { index });
            }
        }
        self.members.insert(index);
        Ok(())
    }

    /// Membership test.
    pub fn contains(&self, index: &MultiIndex) -> bool {
        self.members.contains(index)
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// True when no member is present.
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Iterates members in the canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.members.iter()
    }

    /// The largest dimension active in any member, `0` for `{0}`.
    pub fn max_support_dim(&self) -> u32 {
        self.members
            .iter()
            .map(|m| m.max_support_dim())
            .max()
            .unwrap_or(0)
    }

    /// Number of dimensions active in at least one member.
    pub fn active_dims(&self) -> usize {
        let dims: BTreeSet<u32> = self.members.iter().flat_map(|m| m.support()).collect();
        dims.len()
    }

    /// The admissible neighbors of the set: indices `ν ∉ Λ` whose
    /// predecessors all lie in `Λ`, restricted to dimensions
    /// `m ≤ max(supp(Λ)) + m_buffer` (with `max(supp({0})) = 0`, so the
    /// first `m_buffer` dimensions are always reachable). Sorted in the
    /// canonical order.
    pub fn admissible_neighbors(&self, m_buffer: u32) -> Vec<MultiIndex> {
        let dim_cap = self.max_support_dim() + m_buffer;
        let mut found = BTreeSet::new();
        for member in &self.members {
            for dim in 1..=dim_cap {
                let candidate = member.incremented(dim);
                if self.members.contains(&candidate) || found.contains(&candidate) {
                    continue;
                }
                let admissible = candidate.support().collect::<Vec<_>>().iter().all(|&m| {
                    let predecessor = candidate
                        .decremented(m)
                        .expect("support dimensions have positive level");
                    self.members.contains(&predecessor)
                });
                if admissible {
                    found.insert(candidate);
                }
            }
        }
        found.into_iter().collect()
    }

    /// The total-degree set `{ν : Σ ν_m ≤ w, ν_m = 0 for m > dims}`.
    pub fn total_degree(w: u32, dims: u32) -> Result<Self> {
        if dims < 1 {
            return Err(Error::InvalidParameter {
                what: "total-degree dimension cap",
                value: dims as f64,
            });
        }
        let mut members = Vec::new();
        let mut levels = vec![0u32; dims as usize];
        enumerate_td(0, w, &mut levels, &mut members);
        Ok(MonotoneSet {
            members: members.into_iter().collect(),
        })
    }

    /// The hyperbolic-cross set `{ν : Π (ν_m + 1) ≤ w, ν_m = 0 for
    /// m > dims}`.
    pub fn hyperbolic_cross(w: u64, dims: u32) -> Result<Self> {
        if w < 1 {
            return Err(Error::InvalidParameter {
                what: "hyperbolic-cross budget",
                value: w as f64,
            });
        }
        if dims < 1 {
            return Err(Error::InvalidParameter {
                what: "hyperbolic-cross dimension cap",
                value: dims as f64,
            });
        }
        let mut members = Vec::new();
        let mut levels = vec![0u32; dims as usize];
        enumerate_hc(0, 1, w, &mut levels, &mut members);
        Ok(MonotoneSet {
            members: members.into_iter().collect(),
        })
    }

    /// Combination-technique coefficients: the unique integers with
    /// `Σ_{i∈Λ} Δ_i = Σ_k c_k ⊗U_{k_m}`, obtained by expanding every detail
    /// by inclusion-exclusion over its support.
    pub fn combination_coefficients(&self) -> CombinationCoefficients {
        let mut accumulated: BTreeMap<MultiIndex, i64> = BTreeMap::new();
        for member in &self.members {
            let support: Vec<u32> = member.support().collect();
            for mask in 0u32..(1 << support.len()) {
                let mut k = member.clone();
                let mut sign = 1i64;
                for (bit, &dim) in support.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        k = k
                            .decremented(dim)
                            .expect("support dimensions have positive level");
                        sign = -sign;
                    }
                }
                *accumulated.entry(k).or_insert(0) += sign;
            }
        }
        accumulated.retain(|_, c| *c != 0);
        CombinationCoefficients {
            pairs: accumulated.into_iter().collect(),
        }
    }

    /// The sparse grid `Ξ_Λ = ⋃_{i∈Λ} Ξ^{(i)}`, deduplicated symbolically
    /// and sorted.
    pub fn sparse_grid_points(&self) -> Vec<GridPoint> {
        let mut points = BTreeSet::new();
        for member in &self.members {
            for point in tensor_grid(member) {
                points.insert(point);
            }
        }
        points.into_iter().collect()
    }

    /// Exact sparse-grid size together with the quadratic bound
    /// `|Λ|(|Λ|+1)/2`.
    pub fn point_count(&self) -> PointCount {
        let exact = {
            let mut points = BTreeSet::new();
            for member in &self.members {
                points.extend(tensor_grid(member));
            }
            points.len()
        };
        let n = self.members.len() as u64;
        PointCount {
            exact,
            bound: n * (n + 1) / 2,
        }
    }
}

impl<'a> IntoIterator for &'a MonotoneSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::collections::btree_set::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

fn enumerate_td(dim: usize, remaining: u32, levels: &mut [u32], out: &mut Vec<MultiIndex>) {
    if dim == levels.len() {
        out.push(MultiIndex::from_levels(levels));
        return;
    }
    for level in 0..=remaining {
        levels[dim] = level;
        enumerate_td(dim + 1, remaining - level, levels, out);
    }
    levels[dim] = 0;
}

fn enumerate_hc(dim: usize, product: u64, w: u64, levels: &mut [u32], out: &mut Vec<MultiIndex>) {
    if dim == levels.len() {
        out.push(MultiIndex::from_levels(levels));
        return;
    }
    let mut level = 0u32;
    while product * (level as u64 + 1) <= w {
        levels[dim] = level;
        enumerate_hc(dim + 1, product * (level as u64 + 1), w, levels, out);
        level += 1;
    }
    levels[dim] = 0;
}

/// Exact and bounding sparse-grid sizes from [`MonotoneSet::point_count`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointCount {
    pub exact: usize,
    pub bound: u64,
}

/// Combination-technique coefficients of a monotone set.
///
/// Holds only nonzero coefficients; they sum to one because the operator
/// reproduces constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinationCoefficients {
    pairs: Vec<(MultiIndex, i64)>,
}

impl CombinationCoefficients {
    /// The nonzero `(k, c_k)` pairs in canonical index order.
    pub fn pairs(&self) -> &[(MultiIndex, i64)] {
        &self.pairs
    }

    /// The coefficient of a tensor index, `0` when absent.
    pub fn coefficient(&self, k: &MultiIndex) -> i64 {
        self.pairs
            .binary_search_by(|(index, _)| index.cmp(k))
            .map_or(0, |pos| self.pairs[pos].1)
    }

    /// Sum of all coefficients.
    pub fn sum(&self) -> i64 {
        self.pairs.iter().map(|&(_, c)| c).sum()
    }
}

/// A sparse-grid point, identified symbolically.
///
/// Each active dimension carries `(dimension, rule size, node index)`. The
/// only node shared between Gauss-Hermite rules of different sizes is the
/// origin, so entries whose node is the center of an odd rule are dropped;
/// after this reduction two points coincide exactly when their entries are
/// equal, and no floating-point comparison is ever needed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint {
    entries: Vec<(u32, u32, u32)>,
}

impl GridPoint {
    /// The all-zeros point.
    pub fn origin() -> Self {
        GridPoint {
            entries: Vec::new(),
        }
    }

    pub(crate) fn from_raw(raw: impl IntoIterator<Item = (u32, u32, u32)>) -> Self {
        let mut entries: Vec<(u32, u32, u32)> = raw
            .into_iter()
            .filter(|&(_, size, index)| !(size % 2 == 1 && index == size / 2))
            .collect();
        entries.sort_unstable();
        GridPoint { entries }
    }

    /// The `(dimension, rule size, node index)` entries, sorted by
    /// dimension. Dimensions pinned at the origin carry no entry.
    pub fn entries(&self) -> &[(u32, u32, u32)] {
        &self.entries
    }

    /// The largest dimension with a nonzero coordinate, `0` for the origin.
    pub fn max_dim(&self) -> u32 {
        self.entries.last().map_or(0, |&(d, _, _)| d)
    }

    /// Materializes the coordinates as a dense vector of at least
    /// `min_len` entries (position `p` is dimension `p + 1`).
    pub fn coordinates(&self, min_len: usize) -> Result<Vec<f64>> {
        let len = (self.max_dim() as usize).max(min_len);
        let mut coords = vec![0.0; len];
        for &(dim, size, index) in &self.entries {
            let rule = hermite::rule(size as usize)?;
            coords[dim as usize - 1] = rule.nodes()[index as usize];
        }
        Ok(coords)
    }
}

/// The full tensor grid `Ξ^{(i)} = ⨉_m Ξ^{(i_m)}`, where dimension `m`
/// contributes the nodes of the `i_m + 1`-point rule and inactive
/// dimensions stay at the origin. The result has exactly `∏ (1 + i_m)`
/// distinct points.
pub fn tensor_grid(index: &MultiIndex) -> Vec<GridPoint> {
    let mut points = vec![Vec::new()];
    for &(dim, level) in index.entries() {
        let size = level + 1;
        let mut extended = Vec::with_capacity(points.len() * size as usize);
        for base in &points {
            for node in 0..size {
                let mut entry = base.clone();
                entry.push((dim, size, node));
                extended.push(entry);
            }
        }
        points = extended;
    }
    points.into_iter().map(GridPoint::from_raw).collect()
}
