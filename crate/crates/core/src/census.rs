//! Exhaustive enumeration of reachable terminal configurations for
//! `2^n - 1` labeled chips started at the root.
//!
//! States are chip-to-node position vectors. The chip counts of a state
//! determine how often each node has fired to reach it, so every path to a
//! state has the same length and a per-depth visited set deduplicates fully.

use std::collections::{BTreeMap, BTreeSet};
use std::hash::Hash;
use std::io::{self, Write};

use dashmap::DashSet;
use rayon::prelude::*;
use rustc_hash::{FxBuildHasher, FxHashSet};
use serde::Serialize;
use thiserror::Error;

use crate::config::{wave_order, Chip};
use crate::labeled::{TerminalView, ViewError};
use crate::tree::{in_order, NodeId};

/// Largest `n` enumerated without [`CensusOptions::allow_large_n`].
pub const MAX_SUPPORTED_N: u32 = 4;
/// Hard ceiling: node indices must fit a byte.
pub const MAX_N: u32 = 8;
/// Environment variable holding the memory budget in bytes.
pub const BUDGET_ENV: &str = "TREEFIRE_MEMORY_BUDGET";

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("census needs 1 <= n <= {MAX_SUPPORTED_N} (got {0}); larger n requires the override")]
    Unsupported(u32),
    #[error("n = {0} exceeds the hard limit of {MAX_N}")]
    TooLarge(u32),
    #[error("memory budget of {budget} bytes exceeded at depth {} with {} states in flight ({} terminals so far)", .stats.depth, .stats.frontier, .terminals_found)]
    Budget {
        budget: u64,
        stats: CensusStats,
        terminals_found: usize,
    },
    #[error("a chip left the tree of height {0}")]
    Escaped(u32),
    #[error(transparent)]
    View(#[from] ViewError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchOrder {
    /// Depth-stratified breadth-first search with a per-depth visited set.
    #[default]
    Breadth,
    /// Depth-first search with a global visited set.
    Depth,
}

#[derive(Debug, Clone)]
pub struct CensusOptions {
    /// Finish states that reach the endgame precondition with the wave schedule.
    pub collapse_endgame: bool,
    pub order: SearchOrder,
    /// Expand nodes and triples in descending order.
    pub reverse: bool,
    /// Worker threads for breadth-first search; 1 is the reference mode.
    pub workers: usize,
    /// Approximate cap on live search memory.
    pub budget_bytes: Option<u64>,
    pub allow_large_n: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            collapse_endgame: true,
            order: SearchOrder::Breadth,
            reverse: false,
            workers: 1,
            budget_bytes: None,
            allow_large_n: false,
        }
    }
}

impl CensusOptions {
    /// Defaults, with the budget read from [`BUDGET_ENV`] when set.
    pub fn from_env() -> Self {
        let budget_bytes = std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok());
        CensusOptions {
            budget_bytes,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CensusStats {
    /// Distinct non-terminal states expanded.
    pub states: u64,
    /// Deepest search level reached.
    pub depth: u64,
    /// Largest frontier (breadth) or stack plus visited set (depth).
    pub frontier: u64,
}

#[derive(Debug, Clone)]
pub struct CensusResult {
    pub n: u32,
    /// Sorted by in-order permutation.
    pub terminals: Vec<TerminalView>,
    pub count: usize,
    pub per_node_bounds: BTreeMap<NodeId, (Chip, Chip)>,
    pub forced_pairs: BTreeSet<(NodeId, NodeId)>,
    pub stats: CensusStats,
}

impl CensusResult {
    pub fn from_terminals(
        n: u32,
        mut terminals: Vec<TerminalView>,
        stats: CensusStats,
    ) -> CensusResult {
        terminals.sort_by(|a, b| a.perm().cmp(b.perm()));
        terminals.dedup();
        let per_node_bounds = per_node_bounds(&terminals);
        let forced_pairs = forced_inequalities(&terminals);
        CensusResult {
            n,
            count: terminals.len(),
            terminals,
            per_node_bounds,
            forced_pairs,
            stats,
        }
    }

    pub fn contains(&self, v: &TerminalView) -> bool {
        self.terminals
            .binary_search_by(|t| t.perm().cmp(v.perm()))
            .is_ok()
    }

    /// Nodes whose chip varies across terminals.
    pub fn free_nodes(&self) -> Vec<NodeId> {
        free_nodes(&self.per_node_bounds)
    }

    /// Nodes holding the same chip in every terminal.
    pub fn fixed_chips(&self) -> BTreeMap<NodeId, Chip> {
        self.per_node_bounds
            .iter()
            .filter(|(_, (lo, hi))| lo == hi)
            .map(|(&n, &(lo, _))| (n, lo))
            .collect()
    }

    /// Forced pairs with both ends free.
    pub fn forced_free_pairs(&self) -> BTreeSet<(NodeId, NodeId)> {
        let free: BTreeSet<NodeId> = self.free_nodes().into_iter().collect();
        self.forced_pairs
            .iter()
            .filter(|(u, v)| free.contains(u) && free.contains(v))
            .copied()
            .collect()
    }

    /// Free nodes in in-order; `x_k` is entry `k - 1`.
    pub fn x_labels(&self) -> Vec<NodeId> {
        let free: BTreeSet<NodeId> = self.free_nodes().into_iter().collect();
        in_order(self.n)
            .into_iter()
            .filter(|n| free.contains(n))
            .collect()
    }

    /// Witness terminals with `chip(u) < chip(v)` and with `chip(u) > chip(v)`.
    pub fn pair_witnesses(
        &self,
        u: NodeId,
        v: NodeId,
    ) -> (Option<&TerminalView>, Option<&TerminalView>) {
        let less = self.terminals.iter().find(|t| t.chip(u) < t.chip(v));
        let more = self.terminals.iter().find(|t| t.chip(u) > t.chip(v));
        (less, more)
    }

    /// Appendix-style listing: `[p1, ..., pN], <inversions>` per line.
    pub fn write_listing<W: Write>(&self, mut out: W) -> io::Result<()> {
        for t in &self.terminals {
            writeln!(out, "{}, {}", t.perm_string(), t.inversions())?;
        }
        Ok(())
    }
}

/// Exact min and max chip per node across `terminals`.
pub fn per_node_bounds(terminals: &[TerminalView]) -> BTreeMap<NodeId, (Chip, Chip)> {
    let mut out: BTreeMap<NodeId, (Chip, Chip)> = BTreeMap::new();
    for t in terminals {
        for node in t.nodes() {
            let c = t.chip(node).expect("in tree");
            let e = out.entry(node).or_insert((c, c));
            e.0 = e.0.min(c);
            e.1 = e.1.max(c);
        }
    }
    out
}

pub fn free_nodes(bounds: &BTreeMap<NodeId, (Chip, Chip)>) -> Vec<NodeId> {
    bounds
        .iter()
        .filter(|(_, (lo, hi))| lo != hi)
        .map(|(&n, _)| n)
        .collect()
}

/// Ordered pairs `(u, v)` with `chip(u) < chip(v)` in every terminal.
pub fn forced_inequalities(terminals: &[TerminalView]) -> BTreeSet<(NodeId, NodeId)> {
    let Some(first) = terminals.first() else {
        return BTreeSet::new();
    };
    let nodes: Vec<NodeId> = first.nodes().collect();
    let mut out = BTreeSet::new();
    for &u in &nodes {
        for &v in &nodes {
            if u != v && terminals.iter().all(|t| t.chip(u) < t.chip(v)) {
                out.insert((u, v));
            }
        }
    }
    out
}

/// A terminal where node `2^k i` fails to hold the smallest chip among `i`
/// and its first `k` levels of descendants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizationWitness {
    pub view: TerminalView,
    pub node: NodeId,
    pub k: u32,
    /// The node holding the true minimum.
    pub smaller: NodeId,
}

/// Scans `terminals` for the first node `i` (with `k` levels below it) whose
/// straight-left descendant at depth `k` does not hold the minimum of that
/// truncated subtree.
pub fn find_generalization_counterexample<'a, I>(
    terminals: I,
    k: u32,
) -> Option<GeneralizationWitness>
where
    I: IntoIterator<Item = &'a TerminalView>,
{
    for t in terminals {
        for i in t.nodes() {
            if i.level() + k > t.height() {
                continue;
            }
            if let Some(smaller) = truncated_min_failure(t, i, k) {
                return Some(GeneralizationWitness {
                    view: t.clone(),
                    node: i,
                    k,
                    smaller,
                });
            }
        }
    }
    None
}

/// Node holding the minimum of the depth-`k` truncated subtree of `i`, when
/// it is not `2^k i`.
pub fn truncated_min_failure(t: &TerminalView, i: NodeId, k: u32) -> Option<NodeId> {
    let target = NodeId::new(i.index() << k).expect("in tree");
    let mut best = target;
    let mut layer = vec![i];
    for _ in 0..=k {
        for &u in &layer {
            if t.chip(u) < t.chip(best) {
                best = u;
            }
        }
        layer = layer.iter().flat_map(|u| [u.left(), u.right()]).collect();
    }
    (best != target).then_some(best)
}

/// `(parent, child)` pairs breaking `left < parent < right`.
pub fn local_bst_violations(t: &TerminalView) -> Vec<(NodeId, NodeId)> {
    let mut out = Vec::new();
    for p in t.nodes() {
        if p.level() >= t.height() {
            continue;
        }
        if t.chip(p.left()) > t.chip(p) {
            out.push((p, p.left()));
        }
        if t.chip(p.right()) < t.chip(p) {
            out.push((p, p.right()));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Search

/// Position vector: entry `c` is the node index holding chip `c + 1`.
type Positions = Vec<u8>;

trait Packed: Clone + Eq + Hash + Send + Sync {
    fn pack(pos: &[u8]) -> Self;
    fn unpack(&self, chips: usize) -> Positions;
    const BYTES: u64;
}

/// Four bits per chip; fits `n <= 4` (15 chips, nodes below 16).
impl Packed for u64 {
    fn pack(pos: &[u8]) -> Self {
        pos.iter()
            .enumerate()
            .fold(0u64, |acc, (i, &p)| acc | (p as u64) << (4 * i))
    }
    fn unpack(&self, chips: usize) -> Positions {
        (0..chips).map(|i| (self >> (4 * i) & 0xf) as u8).collect()
    }
    const BYTES: u64 = 8;
}

impl Packed for Box<[u8]> {
    fn pack(pos: &[u8]) -> Self {
        pos.into()
    }
    fn unpack(&self, _chips: usize) -> Positions {
        self.to_vec()
    }
    const BYTES: u64 = 48;
}

struct Space {
    n: u32,
    chips: usize,
    nodes: usize,
    collapse: bool,
    reverse: bool,
    waves: Vec<u8>,
    /// Chip counts of the endgame precondition, indexed by node.
    endgame: Vec<u8>,
}

/// Reusable buffers for one worker.
struct Scratch {
    counts: Vec<u8>,
    next_counts: Vec<u8>,
    /// Chips grouped by node, ascending within a node.
    grouped: Vec<u8>,
    start: Vec<usize>,
    next: Vec<u8>,
}

impl Space {
    fn new(n: u32, opts: &CensusOptions) -> Space {
        let nodes = 1usize << n;
        let endgame = (0..nodes)
            .map(|i| match 64 - (i as u64).leading_zeros() {
                0 => 0,
                1 => 3,
                l if l < n => 2,
                _ => 0,
            })
            .collect();
        Space {
            n,
            chips: nodes - 1,
            nodes,
            collapse: opts.collapse_endgame && n >= 2,
            reverse: opts.reverse,
            waves: wave_order(n).into_iter().map(|v| v.index() as u8).collect(),
            endgame,
        }
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            counts: vec![0; self.nodes],
            next_counts: vec![0; self.nodes],
            grouped: vec![0; self.chips],
            start: vec![0; self.nodes + 1],
            next: vec![0; self.chips],
        }
    }

    fn initial(&self) -> Positions {
        vec![1; self.chips]
    }

    fn count_into(&self, pos: &[u8], counts: &mut [u8]) {
        counts.fill(0);
        for &p in pos {
            counts[p as usize] += 1;
        }
    }

    /// Fires the wave schedule in place; every wave node holds exactly three chips.
    fn run_waves(&self, pos: &mut [u8]) {
        for &v in &self.waves {
            let parent = if v == 1 { 1 } else { v / 2 };
            let mut dest = [2 * v, parent, 2 * v + 1].into_iter();
            for p in pos.iter_mut() {
                if *p == v {
                    *p = dest.next().expect("three chips at a wave node");
                }
            }
            debug_assert!(dest.next().is_none());
        }
    }

    /// Whether a state with these counts is finished, collapsing the
    /// endgame into `pos` when enabled.
    fn settle(&self, pos: &mut [u8], counts: &[u8]) -> bool {
        if counts.iter().all(|&c| c < 3) {
            return true;
        }
        if self.collapse && counts == self.endgame.as_slice() {
            self.run_waves(pos);
            return true;
        }
        false
    }

    /// Every successor of a live state over all fireable nodes and triples.
    /// `emit` receives the successor and whether it is terminal.
    fn expand(
        &self,
        pos: &[u8],
        sc: &mut Scratch,
        mut emit: impl FnMut(&[u8], bool),
    ) -> Result<(), CensusError> {
        self.count_into(pos, &mut sc.counts);
        sc.start[0] = 0;
        for v in 0..self.nodes {
            sc.start[v + 1] = sc.start[v] + sc.counts[v] as usize;
        }
        let mut fill = sc.start.clone();
        for (c, &p) in pos.iter().enumerate() {
            sc.grouped[fill[p as usize]] = c as u8;
            fill[p as usize] += 1;
        }
        let mut fireable: Vec<usize> = (1..self.nodes).filter(|&v| sc.counts[v] >= 3).collect();
        if self.reverse {
            fireable.reverse();
        }
        for v in fireable {
            if 2 * v + 1 >= self.nodes {
                return Err(CensusError::Escaped(self.n));
            }
            let parent = if v == 1 { 1 } else { v / 2 };
            sc.next_counts.copy_from_slice(&sc.counts);
            sc.next_counts[v] -= 3;
            sc.next_counts[2 * v] += 1;
            sc.next_counts[2 * v + 1] += 1;
            sc.next_counts[parent] += 1;
            let here = &sc.grouped[sc.start[v]..sc.start[v + 1]];
            let m = here.len();
            let mut triples = Vec::with_capacity(m * (m - 1) * (m - 2) / 6);
            for a in 0..m {
                for b in a + 1..m {
                    for c in b + 1..m {
                        triples.push([here[a], here[b], here[c]]);
                    }
                }
            }
            if self.reverse {
                triples.reverse();
            }
            for [lo, mid, hi] in triples {
                sc.next.copy_from_slice(pos);
                sc.next[lo as usize] = (2 * v) as u8;
                sc.next[mid as usize] = parent as u8;
                sc.next[hi as usize] = (2 * v + 1) as u8;
                let done = self.settle(&mut sc.next, &sc.next_counts);
                emit(&sc.next, done);
            }
        }
        Ok(())
    }

    fn view(&self, pos: &[u8]) -> Result<TerminalView, ViewError> {
        let mut by_node = vec![0 as Chip; self.chips + 1];
        for (c, &p) in pos.iter().enumerate() {
            by_node[p as usize] = c as Chip + 1;
        }
        let perm = in_order(self.n)
            .into_iter()
            .map(|v| by_node[v.index() as usize])
            .collect();
        TerminalView::from_perm(perm)
    }
}

/// All terminal configurations reachable from `2^n - 1` chips at the root.
pub fn enumerate_terminals(n: u32, opts: &CensusOptions) -> Result<CensusResult, CensusError> {
    if n == 0 || (n > MAX_SUPPORTED_N && !opts.allow_large_n) {
        return Err(CensusError::Unsupported(n));
    }
    if n > MAX_N {
        return Err(CensusError::TooLarge(n));
    }
    let space = Space::new(n, opts);
    let (terminals, stats) = if n <= 4 {
        search::<u64>(&space, opts)?
    } else {
        search::<Box<[u8]>>(&space, opts)?
    };
    let views = terminals
        .iter()
        .map(|p| space.view(p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CensusResult::from_terminals(n, views, stats))
}

fn search<K: Packed>(
    space: &Space,
    opts: &CensusOptions,
) -> Result<(Vec<Positions>, CensusStats), CensusError> {
    let mut start = space.initial();
    let mut counts = vec![0; space.nodes];
    space.count_into(&start, &mut counts);
    if space.settle(&mut start, &counts) {
        return Ok((vec![start], CensusStats::default()));
    }
    match opts.order {
        SearchOrder::Breadth if opts.workers > 1 => bfs_parallel::<K>(space, opts),
        SearchOrder::Breadth => bfs::<K>(space, opts),
        SearchOrder::Depth => dfs::<K>(space, opts),
    }
}

fn over_budget(opts: &CensusOptions, live: u64, per_state: u64) -> Option<u64> {
    opts.budget_bytes
        .filter(|&b| live.saturating_mul(per_state + 16) > b)
}

fn budget_error(
    budget: u64,
    stats: CensusStats,
    live: usize,
    terminals_found: usize,
) -> CensusError {
    CensusError::Budget {
        budget,
        stats: CensusStats {
            frontier: live as u64,
            ..stats
        },
        terminals_found,
    }
}

fn bfs<K: Packed>(
    space: &Space,
    opts: &CensusOptions,
) -> Result<(Vec<Positions>, CensusStats), CensusError> {
    let mut stats = CensusStats::default();
    let mut sc = space.scratch();
    let mut terminals: FxHashSet<K> = FxHashSet::default();
    let mut frontier: Vec<K> = vec![K::pack(&space.initial())];
    while !frontier.is_empty() {
        stats.depth += 1;
        stats.states += frontier.len() as u64;
        stats.frontier = stats.frontier.max(frontier.len() as u64);
        let mut next: FxHashSet<K> = FxHashSet::default();
        for (i, key) in frontier.iter().enumerate() {
            let pos = key.unpack(space.chips);
            space.expand(&pos, &mut sc, |p, done| {
                if done {
                    terminals.insert(K::pack(p));
                } else {
                    next.insert(K::pack(p));
                }
            })?;
            if i % 4096 == 0 {
                let live = frontier.len() + next.len();
                if let Some(budget) = over_budget(opts, live as u64, K::BYTES) {
                    return Err(budget_error(budget, stats, live, terminals.len()));
                }
            }
        }
        frontier = next.into_iter().collect();
    }
    Ok((
        terminals.iter().map(|k| k.unpack(space.chips)).collect(),
        stats,
    ))
}

fn bfs_parallel<K: Packed>(
    space: &Space,
    opts: &CensusOptions,
) -> Result<(Vec<Positions>, CensusStats), CensusError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .expect("thread pool");
    pool.install(|| {
        let mut stats = CensusStats::default();
        let terminals: DashSet<K, FxBuildHasher> = DashSet::default();
        let mut frontier: Vec<K> = vec![K::pack(&space.initial())];
        while !frontier.is_empty() {
            stats.depth += 1;
            stats.states += frontier.len() as u64;
            stats.frontier = stats.frontier.max(frontier.len() as u64);
            let next: DashSet<K, FxBuildHasher> = DashSet::default();
            frontier.par_iter().try_for_each_init(
                || space.scratch(),
                |sc, key| {
                    let pos = key.unpack(space.chips);
                    space.expand(&pos, sc, |p, done| {
                        if done {
                            terminals.insert(K::pack(p));
                        } else {
                            next.insert(K::pack(p));
                        }
                    })
                },
            )?;
            let live = frontier.len() + next.len();
            if let Some(budget) = over_budget(opts, live as u64, K::BYTES) {
                return Err(budget_error(budget, stats, live, terminals.len()));
            }
            frontier = next.into_iter().collect();
        }
        Ok((
            terminals.iter().map(|k| k.unpack(space.chips)).collect(),
            stats,
        ))
    })
}

fn dfs<K: Packed>(
    space: &Space,
    opts: &CensusOptions,
) -> Result<(Vec<Positions>, CensusStats), CensusError> {
    let mut stats = CensusStats::default();
    let mut sc = space.scratch();
    let mut terminals: FxHashSet<K> = FxHashSet::default();
    let mut visited: FxHashSet<K> = FxHashSet::default();
    let start = K::pack(&space.initial());
    visited.insert(start.clone());
    let mut stack = vec![(start, 0u64)];
    while let Some((key, depth)) = stack.pop() {
        stats.states += 1;
        stats.depth = stats.depth.max(depth + 1);
        let pos = key.unpack(space.chips);
        space.expand(&pos, &mut sc, |p, done| {
            let k = K::pack(p);
            if done {
                terminals.insert(k);
            } else if visited.insert(k.clone()) {
                stack.push((k, depth + 1));
            }
        })?;
        let live = visited.len() + stack.len();
        stats.frontier = stats.frontier.max(live as u64);
        if stats.states % 4096 == 0 {
            if let Some(budget) = over_budget(opts, live as u64, K::BYTES) {
                return Err(budget_error(budget, stats, live, terminals.len()));
            }
        }
    }
    Ok((
        terminals.iter().map(|k| k.unpack(space.chips)).collect(),
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ChipConfig, FiringMove, LabeledConfig, Payload};

    fn n(i: u64) -> NodeId {
        NodeId::new(i).unwrap()
    }

    #[test]
    fn small_counts() {
        let opts = CensusOptions::default();
        assert_eq!(enumerate_terminals(1, &opts).unwrap().count, 1);
        assert_eq!(enumerate_terminals(2, &opts).unwrap().count, 1);
        let r3 = enumerate_terminals(3, &opts).unwrap();
        assert_eq!(r3.count, 6);
        assert_eq!(r3.per_node_bounds[&n(1)], (3, 5));
        let fixed: Vec<(u64, Chip)> = r3
            .fixed_chips()
            .into_iter()
            .map(|(k, c)| (k.index(), c))
            .collect();
        assert_eq!(fixed, vec![(2, 2), (3, 6), (4, 1), (7, 7)]);
        assert!(r3.forced_free_pairs().is_empty());
        assert!(matches!(
            enumerate_terminals(5, &opts),
            Err(CensusError::Unsupported(5))
        ));
        assert!(matches!(
            enumerate_terminals(0, &opts),
            Err(CensusError::Unsupported(0))
        ));
    }

    #[test]
    fn packing_round_trip() {
        let pos: Vec<u8> = (0..15).map(|i| (i % 15 + 1) as u8).collect();
        assert_eq!(u64::pack(&pos).unpack(15), pos);
        assert_eq!(<Box<[u8]>>::pack(&pos).unpack(15), pos);
    }

    // the position-vector successor must agree with the configuration engine
    #[test]
    fn successors_match_engine() {
        let opts = CensusOptions {
            collapse_endgame: false,
            ..Default::default()
        };
        let space = Space::new(3, &opts);
        let to_config = |pos: &[u8]| {
            LabeledConfig::from_placements(
                pos.iter()
                    .enumerate()
                    .map(|(c, &p)| (n(p as u64), [c as Chip + 1])),
            )
            .unwrap()
        };
        let mut frontier = vec![space.initial()];
        for _ in 0..3 {
            let mut next = Vec::new();
            for pos in &frontier {
                let config = to_config(pos);
                let mut ours: Vec<LabeledConfig> = Vec::new();
                let mut sc = space.scratch();
                space
                    .expand(pos, &mut sc, |p, _| {
                        ours.push(to_config(p));
                        next.push(p.to_vec());
                    })
                    .unwrap();
                let mut engine = Vec::new();
                for node in config.fireable_nodes() {
                    let here = config.chips(node);
                    for a in 0..here.len() {
                        for b in a + 1..here.len() {
                            for c in b + 1..here.len() {
                                let mv = FiringMove {
                                    node,
                                    payload: Payload::Labeled([here[a], here[b], here[c]]),
                                };
                                engine.push(config.apply_move(&mv).unwrap());
                            }
                        }
                    }
                }
                assert_eq!(ours, engine);
            }
            frontier = next;
        }
    }

    #[test]
    fn orders_agree() {
        for size in 2..=3 {
            let reference = enumerate_terminals(size, &CensusOptions::default())
                .unwrap()
                .terminals;
            for opts in [
                CensusOptions {
                    order: SearchOrder::Depth,
                    ..Default::default()
                },
                CensusOptions {
                    reverse: true,
                    ..Default::default()
                },
                CensusOptions {
                    collapse_endgame: false,
                    ..Default::default()
                },
                CensusOptions {
                    workers: 3,
                    ..Default::default()
                },
            ] {
                assert_eq!(
                    enumerate_terminals(size, &opts).unwrap().terminals,
                    reference,
                    "{opts:?}"
                );
            }
        }
    }

    #[test]
    fn budget_error() {
        let opts = CensusOptions {
            budget_bytes: Some(64),
            collapse_endgame: false,
            ..Default::default()
        };
        match enumerate_terminals(3, &opts) {
            Err(CensusError::Budget { budget, .. }) => assert_eq!(budget, 64),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn generalization_scan_n3() {
        let r3 = enumerate_terminals(3, &CensusOptions::default()).unwrap();
        assert!(find_generalization_counterexample(&r3.terminals, 1).is_none());
        assert!(find_generalization_counterexample(&r3.terminals, 2).is_none());
    }

    #[test]
    fn truncated_min() {
        // in-order slots for height 3: 4,2,5,1,6,3,7
        let t = TerminalView::from_perm(vec![1, 2, 3, 5, 4, 6, 7]).unwrap();
        assert_eq!(truncated_min_failure(&t, n(1), 1), None);
        let t = TerminalView::from_perm(vec![1, 5, 3, 4, 2, 6, 7]).unwrap();
        assert_eq!(truncated_min_failure(&t, n(1), 1), Some(n(1)));
        assert_eq!(truncated_min_failure(&t, n(1), 2), None);
        assert_eq!(local_bst_violations(&t), vec![(n(1), n(2)), (n(2), n(5))]);
    }

    #[test]
    fn listing_format() {
        let r = enumerate_terminals(2, &CensusOptions::default()).unwrap();
        let mut buf = Vec::new();
        r.write_listing(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "[1, 2, 3], 0\n");
    }
}
