//! The poset of endgame moves for `2^n - 1` chips.
//!
//! An element `(i, j)` is the `j`-th-to-last fire of node `i`, kept when
//! `level(i) + j < n`. The order reads "larger fires earlier": `x <= y` when
//! `y` can never occur after `x`. Upper covers of `(i, j)` are `(2i, j)`,
//! `(2i + 1, j)` and `(parent(i), j + 1)`, restricted to the poset.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{stabilize, LabeledConfig, MoveLog, Strategy};
use crate::labeled::move_indices;
use crate::tree::{in_order, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("the endgame poset needs n >= 2, got {0}")]
    Degenerate(u32),
    #[error("n = {0} is too large to materialize")]
    TooLarge(u32),
    #[error("{0} is not an element of P_{1}")]
    NotAnElement(MoveIndex, u32),
}

/// `j`-th-to-last fire of `node` (`j = 0` is the last one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoveIndex {
    pub node: NodeId,
    pub j: u32,
}

impl MoveIndex {
    pub fn new(node: NodeId, j: u32) -> Self {
        MoveIndex { node, j }
    }

    pub fn rank(self) -> u32 {
        self.node.level() + 2 * self.j
    }

    pub fn is_endgame(self, n: u32) -> bool {
        self.node.level() + self.j < n
    }
}

impl fmt::Display for MoveIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.node, self.j)
    }
}

/// Order of the unrestricted poset, read off the tree path: the least
/// element of node `a` above `(u, p)` is `(a, p + level(u) - level(lca(u, a)))`.
pub fn le_unrestricted(x: MoveIndex, y: MoveIndex) -> bool {
    let w = x.node.lca(y.node);
    y.j >= x.j + (x.node.level() - w.level())
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(len: usize) -> Self {
        BitSet(vec![0; len.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
    fn intersection(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn is_superset(&self, other: &BitSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64)
                .filter(move |b| bits >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }
}

/// Explicit `P_n` with its cover relation and transitive closure.
#[derive(Debug, Clone)]
pub struct PosetPn {
    n: u32,
    elements: Vec<MoveIndex>,
    index: HashMap<MoveIndex, usize>,
    upper: Vec<Vec<usize>>,
    lower: Vec<Vec<usize>>,
    up: Vec<BitSet>,
    down: Vec<BitSet>,
}

pub const MAX_N: u32 = 14;

impl PosetPn {
    pub fn build(n: u32) -> Result<PosetPn, PosetError> {
        if n < 2 {
            return Err(PosetError::Degenerate(n));
        }
        if n > MAX_N {
            return Err(PosetError::TooLarge(n));
        }
        let mut elements = Vec::new();
        for level in 1..n {
            for node in crate::tree::level_nodes(level) {
                for j in 0..n - level {
                    elements.push(MoveIndex::new(node, j));
                }
            }
        }
        elements.sort_by_key(|e| (e.rank(), e.node, e.j));
        let index: HashMap<MoveIndex, usize> =
            elements.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let len = elements.len();
        let mut upper = vec![Vec::new(); len];
        let mut lower = vec![Vec::new(); len];
        for (x, e) in elements.iter().enumerate() {
            let mut cands = vec![
                MoveIndex::new(e.node.left(), e.j),
                MoveIndex::new(e.node.right(), e.j),
            ];
            if let Some(p) = e.node.tree_parent() {
                cands.push(MoveIndex::new(p, e.j + 1));
            }
            for c in cands {
                if let Some(&y) = index.get(&c) {
                    upper[x].push(y);
                    lower[y].push(x);
                }
            }
        }
        // elements are sorted by rank and covers raise rank, so one sweep in
        // each direction closes the relation
        let mut up = vec![BitSet::new(len); len];
        for x in (0..len).rev() {
            up[x].insert(x);
            for &y in &upper[x] {
                let above = up[y].clone();
                up[x].union_with(&above);
            }
        }
        let mut down = vec![BitSet::new(len); len];
        for y in 0..len {
            down[y].insert(y);
            for &x in &lower[y] {
                let below = down[x].clone();
                down[y].union_with(&below);
            }
        }
        Ok(PosetPn {
            n,
            elements,
            index,
            upper,
            lower,
            up,
            down,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements sorted by rank, then node, then `j`.
    pub fn elements(&self) -> &[MoveIndex] {
        &self.elements
    }

    pub fn contains(&self, e: MoveIndex) -> bool {
        self.index.contains_key(&e)
    }

    fn idx(&self, e: MoveIndex) -> usize {
        *self
            .index
            .get(&e)
            .unwrap_or_else(|| panic!("{e} is not in P_{}", self.n))
    }

    pub fn upper_covers(&self, e: MoveIndex) -> Vec<MoveIndex> {
        self.upper[self.idx(e)]
            .iter()
            .map(|&i| self.elements[i])
            .collect()
    }

    pub fn lower_covers(&self, e: MoveIndex) -> Vec<MoveIndex> {
        self.lower[self.idx(e)]
            .iter()
            .map(|&i| self.elements[i])
            .collect()
    }

    pub fn covers(&self) -> impl Iterator<Item = (MoveIndex, MoveIndex)> + '_ {
        self.upper.iter().enumerate().flat_map(move |(x, ys)| {
            ys.iter()
                .map(move |&y| (self.elements[x], self.elements[y]))
        })
    }

    /// `x <= y` from the transitive closure of the covers.
    pub fn le(&self, x: MoveIndex, y: MoveIndex) -> bool {
        self.up[self.idx(x)].contains(self.idx(y))
    }

    pub fn rank(&self, e: MoveIndex) -> Result<u32, PosetError> {
        if !self.contains(e) {
            return Err(PosetError::NotAnElement(e, self.n));
        }
        Ok(e.rank())
    }

    pub fn top(&self) -> MoveIndex {
        MoveIndex::new(NodeId::ROOT, self.n - 2)
    }

    pub fn bottom(&self) -> MoveIndex {
        MoveIndex::new(NodeId::ROOT, 0)
    }

    /// Least upper bound by scanning the common up-set.
    pub fn join_brute(&self, x: MoveIndex, y: MoveIndex) -> Option<MoveIndex> {
        let common = self.up[self.idx(x)].intersection(&self.up[self.idx(y)]);
        let found = common.iter().find(|&z| self.up[z].is_superset(&common));
        found.map(|z| self.elements[z])
    }

    /// Greatest lower bound by scanning the common down-set.
    pub fn meet_brute(&self, x: MoveIndex, y: MoveIndex) -> Option<MoveIndex> {
        let common = self.down[self.idx(x)].intersection(&self.down[self.idx(y)]);
        let found = common.iter().find(|&z| self.down[z].is_superset(&common));
        found.map(|z| self.elements[z])
    }

    /// Join via the tree-path chains, computed in the unrestricted poset.
    pub fn join(&self, x: MoveIndex, y: MoveIndex) -> MoveIndex {
        let z = match path_split(x, y) {
            Split::Comparable { upper, .. } => upper,
            Split::Incomparable { join, .. } => join,
        };
        assert!(
            self.contains(z),
            "join {z} of {x} and {y} left P_{}",
            self.n
        );
        z
    }

    /// Meet via the case split on the position of the join along the path.
    pub fn meet(&self, x: MoveIndex, y: MoveIndex) -> MoveIndex {
        let z = match path_split(x, y) {
            Split::Comparable { lower, .. } => lower,
            Split::Incomparable { meet, .. } => meet,
        };
        assert!(
            self.contains(z),
            "meet {z} of {x} and {y} left P_{}",
            self.n
        );
        z
    }

    pub fn rank_sizes(&self) -> Vec<u64> {
        let top = 2 * self.n - 3;
        let mut sizes = vec![0u64; top as usize];
        for e in &self.elements {
            sizes[e.rank() as usize - 1] += 1;
        }
        sizes
    }

    /// Hasse diagram in DOT. Positions: in-order slot of the node across,
    /// rank up.
    pub fn to_dot(&self) -> String {
        let slots: HashMap<NodeId, usize> = in_order(self.n - 1)
            .into_iter()
            .enumerate()
            .map(|(i, node)| (node, i))
            .collect();
        let mut out = format!(
            "digraph P{} {{\n  rankdir=BT;\n  node [shape=plaintext];\n",
            self.n
        );
        for e in &self.elements {
            let _ = writeln!(out, "  \"{e}\" [pos=\"{},{}!\"];", slots[&e.node], e.rank());
        }
        for (x, y) in self.covers() {
            let _ = writeln!(out, "  \"{x}\" -> \"{y}\";");
        }
        out.push_str("}\n");
        out
    }
}

enum Split {
    Comparable { lower: MoveIndex, upper: MoveIndex },
    Incomparable { join: MoveIndex, meet: MoveIndex },
}

/// Nodes from `start` up to (and including) `top`.
fn climb(start: NodeId, top: NodeId) -> Vec<NodeId> {
    let mut path = vec![start];
    let mut cur = start;
    while cur != top {
        cur = cur.parent();
        path.push(cur);
    }
    path
}

fn path_split(x: MoveIndex, y: MoveIndex) -> Split {
    if le_unrestricted(x, y) {
        return Split::Comparable { lower: x, upper: y };
    }
    if le_unrestricted(y, x) {
        return Split::Comparable { lower: y, upper: x };
    }
    let w = x.node.lca(y.node);
    // a: x.node = a[0] .. a[i] = w, b: y.node = b[0] .. b[j] = w
    let a = climb(x.node, w);
    let b = climb(y.node, w);
    let (i, j) = (a.len() - 1, b.len() - 1);
    let (p, q) = (x.j, y.j);
    // first element of the ascending half of chain C1 above y
    for k in 1..=i {
        let e = MoveIndex::new(a[k], p + k as u32);
        if le_unrestricted(y, e) {
            debug_assert_eq!(p + k as u32, q + j as u32);
            let meet = if j >= k {
                MoveIndex::new(b[k], q)
            } else {
                MoveIndex::new(a[i + j - k], p)
            };
            return Split::Incomparable { join: e, meet };
        }
    }
    // otherwise the same construction along C2 from y's side
    for k in 1..=j {
        let e = MoveIndex::new(b[k], q + k as u32);
        if le_unrestricted(x, e) {
            debug_assert_eq!(q + k as u32, p + i as u32);
            let meet = if i >= k {
                MoveIndex::new(a[k], p)
            } else {
                MoveIndex::new(b[i + j - k], q)
            };
            return Split::Incomparable { join: e, meet };
        }
    }
    unreachable!("incomparable pair {x}, {y} without an upper bound on either chain")
}

/// Rank sizes of the infinite poset: `(2^(r+1) - 1) / 3` for odd `r`,
/// `(2^(r+1) - 2) / 3` for even `r`.
pub fn f_infinity(r: u32) -> u64 {
    assert!((1..63).contains(&r));
    let p = 1u64 << (r + 1);
    if r % 2 == 1 {
        (p - 1) / 3
    } else {
        (p - 2) / 3
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ModularReport {
    pub elements: usize,
    pub bottom_rank: u32,
    pub top_rank: u32,
    /// Covers that do not raise the rank by exactly one.
    pub cover_rank_violations: Vec<(MoveIndex, MoveIndex)>,
    pub shortest_maximal_chain: u32,
    pub longest_maximal_chain: u32,
    /// Pairs whose join or meet disagrees with the closure.
    pub lattice_violations: Vec<(MoveIndex, MoveIndex)>,
    /// Pairs breaking `rank(x) + rank(y) = rank(x v y) + rank(x ^ y)`.
    pub modular_violations: Vec<(MoveIndex, MoveIndex)>,
}

impl ModularReport {
    pub fn graded(&self) -> bool {
        self.cover_rank_violations.is_empty()
            && self.shortest_maximal_chain == self.longest_maximal_chain
    }

    pub fn passed(&self) -> bool {
        self.graded() && self.lattice_violations.is_empty() && self.modular_violations.is_empty()
    }
}

/// Gradedness, lattice property against the closure, and the modular rank identity.
pub fn check_modular(p: &PosetPn) -> ModularReport {
    let mut report = ModularReport {
        elements: p.len(),
        bottom_rank: p.elements.iter().map(|e| e.rank()).min().unwrap_or(0),
        top_rank: p.elements.iter().map(|e| e.rank()).max().unwrap_or(0),
        ..Default::default()
    };
    for (x, y) in p.covers() {
        if y.rank() != x.rank() + 1 {
            report.cover_rank_violations.push((x, y));
        }
    }
    // chain lengths (in covers) from each minimal element to each maximal one
    let len = p.len();
    let mut shortest = vec![u32::MAX; len];
    let mut longest = vec![0u32; len];
    for x in (0..len).rev() {
        if p.upper[x].is_empty() {
            shortest[x] = 0;
            longest[x] = 0;
        } else {
            for &y in &p.upper[x] {
                shortest[x] = shortest[x].min(shortest[y] + 1);
                longest[x] = longest[x].max(longest[y] + 1);
            }
        }
    }
    let minimal: Vec<usize> = (0..len).filter(|&x| p.lower[x].is_empty()).collect();
    report.shortest_maximal_chain = minimal.iter().map(|&x| shortest[x]).min().unwrap_or(0);
    report.longest_maximal_chain = minimal.iter().map(|&x| longest[x]).max().unwrap_or(0);

    for (ix, &x) in p.elements.iter().enumerate() {
        for &y in &p.elements[ix..] {
            let (join, meet) = (p.join(x, y), p.meet(x, y));
            if p.join_brute(x, y) != Some(join) || p.meet_brute(x, y) != Some(meet) {
                report.lattice_violations.push((x, y));
            }
            if x.rank() + y.rank() != join.rank() + meet.rank() {
                report.modular_violations.push((x, y));
            }
        }
    }
    report
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SymmetryReport {
    pub vertical_failures: Vec<String>,
    pub horizontal_failures: Vec<String>,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        self.vertical_failures.is_empty() && self.horizontal_failures.is_empty()
    }
}

/// Mirror image `(i', j)` with `i' = 2^L + 2^(L-1) - 1 - i`, `L = level(i)`.
pub fn vertical_image(e: MoveIndex) -> MoveIndex {
    MoveIndex::new(e.node.mirror(), e.j)
}

/// `(i, n - 1 - level(i) - j)`.
pub fn horizontal_image(e: MoveIndex, n: u32) -> MoveIndex {
    MoveIndex::new(e.node, n - 1 - e.node.level() - e.j)
}

/// The mirror map must preserve covers and the `j`-flip must reverse them;
/// both must be involutions of the element set.
pub fn check_symmetry(p: &PosetPn) -> SymmetryReport {
    let mut report = SymmetryReport::default();
    let n = p.n;
    for &e in &p.elements {
        let v = vertical_image(e);
        if !p.contains(v) || vertical_image(v) != e {
            report
                .vertical_failures
                .push(format!("{e} -> {v} is not an involution on P_{n}"));
        }
        let h = horizontal_image(e, n);
        if !p.contains(h) || horizontal_image(h, n) != e {
            report
                .horizontal_failures
                .push(format!("{e} -> {h} is not an involution on P_{n}"));
        }
    }
    if !report.passed() {
        return report;
    }
    let covers: std::collections::HashSet<(MoveIndex, MoveIndex)> = p.covers().collect();
    for &(x, y) in &covers {
        let (vx, vy) = (vertical_image(x), vertical_image(y));
        if !covers.contains(&(vx, vy)) {
            report
                .vertical_failures
                .push(format!("cover {x} < {y} maps to non-cover {vx}, {vy}"));
        }
        let (hx, hy) = (horizontal_image(x, n), horizontal_image(y, n));
        if !covers.contains(&(hy, hx)) {
            report
                .horizontal_failures
                .push(format!("cover {x} < {y} maps to non-cover {hy} < {hx}"));
        }
    }
    report
}

/// Five elements forming the diamond sublattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct M3Witness {
    pub bottom: MoveIndex,
    pub middle: [MoveIndex; 3],
    pub top: MoveIndex,
}

impl fmt::Display for M3Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.middle;
        write!(f, "{{{}; {a}, {b}, {c}; {}}}", self.bottom, self.top)
    }
}

/// First diamond in element order: a bottom with three upper covers that
/// share an upper cover and pairwise join to it and meet to the bottom.
pub fn find_m3(p: &PosetPn) -> Option<M3Witness> {
    for &b in &p.elements {
        let ups = p.upper_covers(b);
        for x in 0..ups.len() {
            for y in x + 1..ups.len() {
                for z in y + 1..ups.len() {
                    let mids = [ups[x], ups[y], ups[z]];
                    let tops = p.upper_covers(mids[0]);
                    for t in tops {
                        if !mids[1..].iter().all(|&m| p.upper_covers(m).contains(&t)) {
                            continue;
                        }
                        let sublattice = [(0, 1), (0, 2), (1, 2)].iter().all(|&(s, u)| {
                            p.join(mids[s], mids[u]) == t && p.meet(mids[s], mids[u]) == b
                        });
                        if sublattice {
                            return Some(M3Witness {
                                bottom: b,
                                middle: mids,
                                top: t,
                            });
                        }
                    }
                }
            }
        }
    }
    None
}

/// A triple breaking `x ^ (y v z) = (x ^ y) v (x ^ z)`, if any.
pub fn distributive_failure(p: &PosetPn) -> Option<(MoveIndex, MoveIndex, MoveIndex)> {
    for &x in &p.elements {
        for &y in &p.elements {
            for &z in &p.elements {
                if p.meet(x, p.join(y, z)) != p.join(p.meet(x, y), p.meet(x, z)) {
                    return Some((x, y, z));
                }
            }
        }
    }
    None
}

/// Time step of every endgame move of a complete stabilization log.
pub fn endgame_times(log: &MoveLog, n: u32) -> BTreeMap<MoveIndex, usize> {
    move_indices(log)
        .into_iter()
        .enumerate()
        .filter(|(_, m)| m.is_endgame(n))
        .map(|(t, m)| (m, t))
        .collect()
}

/// The one place where poset order meets wall-clock order: the larger
/// element of a cover fires strictly earlier.
pub fn cover_respected(lower_time: usize, upper_time: usize) -> bool {
    upper_time < lower_time
}

/// Covers `x < y` of `p` whose realized times contradict the order,
/// plus elements missing from `times`.
pub fn linear_extension_violations(p: &PosetPn, times: &BTreeMap<MoveIndex, usize>) -> Vec<String> {
    let mut out = Vec::new();
    for e in &p.elements {
        if !times.contains_key(e) {
            out.push(format!("{e} never fired"));
        }
    }
    if times.len() != p.len() {
        out.push(format!(
            "{} endgame fires for {} elements",
            times.len(),
            p.len()
        ));
    }
    for (x, y) in p.covers() {
        if let (Some(&tx), Some(&ty)) = (times.get(&x), times.get(&y)) {
            if !cover_respected(tx, ty) {
                out.push(format!("{y} at step {ty} should precede {x} at step {tx}"));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DynamicsReport {
    pub runs: usize,
    pub failures: Vec<(u64, String)>,
    pub wave_failures: Vec<String>,
}

impl DynamicsReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.wave_failures.is_empty()
    }
}

/// Stabilizes `2^n - 1` labeled chips under each seed and checks that the
/// realized endgame order, and the wave schedule, are linear extensions.
pub fn consistency_with_dynamics(p: &PosetPn, seeds: &[u64]) -> DynamicsReport {
    let n = p.n;
    let initial = LabeledConfig::initial((1usize << n) - 1);
    let mut report = DynamicsReport::default();
    for &seed in seeds {
        report.runs += 1;
        match stabilize(&initial, &Strategy::UniformRandom { seed }) {
            Ok((_, log)) => {
                for v in linear_extension_violations(p, &endgame_times(&log, n)) {
                    report.failures.push((seed, v));
                }
            }
            Err(e) => report.failures.push((seed, e.to_string())),
        }
    }
    match stabilize(&initial, &Strategy::WaveEndgame) {
        Ok((_, log)) => {
            report.wave_failures = linear_extension_violations(p, &endgame_times(&log, n))
        }
        Err(e) => report.wave_failures.push(e.to_string()),
    }
    report
}
