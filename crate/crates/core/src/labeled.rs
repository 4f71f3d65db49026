//! Properties of terminal labeled configurations and the endgame.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{
    height_for_full_tree, wave_order, Chip, ChipConfig, EngineError, FiringMove, LabeledConfig,
    MoveLog, Payload, StateKey, UnlabeledConfig,
};
use crate::poset::MoveIndex;
use crate::tree::{in_order, top_straight_ancestor, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViewError {
    #[error("configuration is not stable: node {0} can still fire")]
    NotStable(NodeId),
    #[error("{0} chips do not fill a perfect tree")]
    NotFull(usize),
    #[error("node {node} holds {count} chips, expected exactly one")]
    WrongShape { node: NodeId, count: usize },
    #[error("not a permutation of 1..={0}")]
    NotPermutation(usize),
    #[error("cannot parse permutation: {0}")]
    Parse(String),
}

/// A terminal configuration of `2^n - 1` labeled chips: one chip per node
/// of the perfect tree of height `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TerminalView {
    height: u32,
    /// Chips read in in-order (left to right).
    perm: Vec<Chip>,
    /// `by_node[i]` is the chip at node `i`; index 0 is unused.
    by_node: Vec<Chip>,
}

impl TerminalView {
    pub fn from_config(c: &LabeledConfig) -> Result<TerminalView, ViewError> {
        if let Some(&node) = c.fireable_nodes().first() {
            return Err(ViewError::NotStable(node));
        }
        let total = c.total_chips();
        let height = height_for_full_tree(total)
            .filter(|&h| h > 0)
            .ok_or(ViewError::NotFull(total))?;
        let mut by_node = vec![0; total + 1];
        for (node, chips) in c.iter() {
            let i = node.index() as usize;
            if i > total || chips.len() != 1 {
                return Err(ViewError::WrongShape {
                    node,
                    count: chips.len(),
                });
            }
            by_node[i] = chips[0];
        }
        if let Some(i) = (1..=total).find(|&i| by_node[i] == 0) {
            return Err(ViewError::WrongShape {
                node: NodeId::new(i as u64).expect("nonzero"),
                count: 0,
            });
        }
        let perm = in_order(height)
            .into_iter()
            .map(|n| by_node[n.index() as usize])
            .collect();
        Ok(TerminalView {
            height,
            perm,
            by_node,
        })
    }

    /// Decodes an in-order permutation back onto the tree.
    pub fn from_perm(perm: Vec<Chip>) -> Result<TerminalView, ViewError> {
        let total = perm.len();
        let height = height_for_full_tree(total)
            .filter(|&h| h > 0)
            .ok_or(ViewError::NotFull(total))?;
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &c)| c as usize != i + 1) {
            return Err(ViewError::NotPermutation(total));
        }
        let mut by_node = vec![0; total + 1];
        for (node, &chip) in in_order(height).into_iter().zip(&perm) {
            by_node[node.index() as usize] = chip;
        }
        Ok(TerminalView {
            height,
            perm,
            by_node,
        })
    }

    /// Parses `[p1, p2, ...]`, ignoring anything after the closing bracket.
    pub fn parse_perm(text: &str) -> Result<TerminalView, ViewError> {
        let text = text.trim();
        let body = text
            .strip_prefix('[')
            .and_then(|s| s.split_once(']'))
            .map(|(b, _)| b)
            .ok_or_else(|| ViewError::Parse(text.to_string()))?;
        let perm = body
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<Chip>()
                    .map_err(|e| ViewError::Parse(format!("{s:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        TerminalView::from_perm(perm)
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn perm(&self) -> &[Chip] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Chip at `node`, `None` outside the tree.
    pub fn chip(&self, node: NodeId) -> Option<Chip> {
        self.by_node.get(node.index() as usize).copied()
    }

    fn at(&self, node: NodeId) -> Chip {
        self.by_node[node.index() as usize]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (1..=self.perm.len() as u64).map(|i| NodeId::new(i).expect("nonzero"))
    }

    pub fn inversions(&self) -> u64 {
        inversions(&self.perm)
    }

    pub fn is_identity(&self) -> bool {
        self.perm
            .iter()
            .enumerate()
            .all(|(i, &c)| c as usize == i + 1)
    }

    pub fn to_config(&self) -> LabeledConfig {
        LabeledConfig::from_placements(self.nodes().map(|n| (n, [self.at(n)])))
            .expect("view holds a permutation")
    }

    /// `[p1, p2, ...]`.
    pub fn perm_string(&self) -> String {
        let parts: Vec<String> = self.perm.iter().map(|c| c.to_string()).collect();
        format!("[{}]", parts.join(", "))
    }
}

impl fmt::Display for TerminalView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.perm_string())
    }
}

/// Pairs `i < j` with `perm[i] > perm[j]`, by merge sort.
pub fn inversions(perm: &[Chip]) -> u64 {
    fn sort(v: &mut [Chip], buf: &mut Vec<Chip>) -> u64 {
        if v.len() < 2 {
            return 0;
        }
        let mid = v.len() / 2;
        let mut count = sort(&mut v[..mid], buf) + sort(&mut v[mid..], buf);
        buf.clear();
        let (mut i, mut j) = (0, mid);
        while i < mid && j < v.len() {
            if v[i] <= v[j] {
                buf.push(v[i]);
                i += 1;
            } else {
                buf.push(v[j]);
                count += (mid - i) as u64;
                j += 1;
            }
        }
        buf.extend_from_slice(&v[i..mid]);
        buf.extend_from_slice(&v[j..]);
        v.copy_from_slice(buf);
        count
    }
    let mut v = perm.to_vec();
    sort(&mut v, &mut Vec::with_capacity(perm.len()))
}

/// Which property a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// The bottom straight-left descendant holds the subtree minimum and the
    /// bottom straight-right descendant the maximum.
    SubtreeExtremes,
    /// A child whose top straight ancestor is its parent sits on the right
    /// side of the sorted order of the family.
    ParentAdjacent,
    /// A node on the second-to-last level holds the extreme chip of its top
    /// straight ancestor's truncated subtree.
    BottomParent,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::SubtreeExtremes => "subtree-extremes",
            Rule::ParentAdjacent => "parent-adjacent",
            Rule::BottomParent => "bottom-parent",
        }
    }
}

/// Serialized as `[rule, node, witness chips]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(into = "(String, u64, Vec<Chip>)")]
pub struct Violation {
    pub rule: Rule,
    pub node: NodeId,
    pub witness: Vec<Chip>,
}

impl From<Violation> for (String, u64, Vec<Chip>) {
    fn from(v: Violation) -> Self {
        (v.rule.id().to_string(), v.node.index(), v.witness)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at node {}: {:?}",
            self.rule.id(),
            self.node,
            self.witness
        )
    }
}

/// Subtree minima and maxima, indexed like `by_node`.
fn subtree_extremes(v: &TerminalView) -> (Vec<Chip>, Vec<Chip>) {
    let len = v.len();
    let mut lo = v.by_node.clone();
    let mut hi = v.by_node.clone();
    for i in (1..=len).rev() {
        for child in [2 * i, 2 * i + 1] {
            if child <= len {
                lo[i] = lo[i].min(lo[child]);
                hi[i] = hi[i].max(hi[child]);
            }
        }
    }
    (lo, hi)
}

/// For every node, its bottom straight-left descendant holds the subtree
/// minimum and its bottom straight-right descendant the maximum. Witness:
/// `[chip found, chip expected]`.
pub fn check_sorting_theorem(v: &TerminalView) -> Vec<Violation> {
    let (lo, hi) = subtree_extremes(v);
    let mut out = Vec::new();
    for node in v.nodes() {
        let depth = v.height - node.level();
        let i = node.index();
        let left = NodeId::new(i << depth).expect("in tree");
        let right = NodeId::new(((i + 1) << depth) - 1).expect("in tree");
        let i = i as usize;
        if v.at(left) != lo[i] {
            out.push(Violation {
                rule: Rule::SubtreeExtremes,
                node,
                witness: vec![v.at(left), lo[i]],
            });
        }
        if v.at(right) != hi[i] {
            out.push(Violation {
                rule: Rule::SubtreeExtremes,
                node,
                witness: vec![v.at(right), hi[i]],
            });
        }
    }
    out
}

/// For a non-root node `j` whose top straight ancestor is its parent `p`
/// with sibling `s`: a left child holds less than both, a right child more
/// than both. Witness: `[chip(j), chip(p), chip(s)]`.
pub fn check_lemma_parent_adjacent(v: &TerminalView) -> Vec<Violation> {
    let mut out = Vec::new();
    for node in v.nodes().skip(1) {
        let parent = node.parent();
        if top_straight_ancestor(node) != parent {
            continue;
        }
        let sibling = NodeId::new(node.index() ^ 1).expect("nonzero");
        let (c, p, s) = (v.at(node), v.at(parent), v.at(sibling));
        let ok = if node.is_left_child() {
            c < p && c < s
        } else {
            c > p && c > s
        };
        if !ok {
            out.push(Violation {
                rule: Rule::ParentAdjacent,
                node,
                witness: vec![c, p, s],
            });
        }
    }
    out
}

/// For a node `x` on level `n - 1` with top straight ancestor `t`, reached
/// by going left (right): `x` holds the minimum (maximum) of the subtree of
/// `t` without its bottom level. When `t` is the root the range is every
/// chip except the one at the bottom end of the same straight run, which
/// holds the global extreme. Witness: `[chip(x), expected chip]`.
pub fn check_lemma_bottom_parents(v: &TerminalView) -> Vec<Violation> {
    let n = v.height;
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    let len = v.len() as u64;
    for x in crate::tree::level_nodes(n - 1) {
        let t = top_straight_ancestor(x);
        let left = x.is_left_child();
        let pool: Vec<Chip> = if t.is_root() {
            let skip = if left { 1u64 << (n - 1) } else { len };
            (1..=len)
                .filter(|&i| i != skip)
                .map(|i| v.by_node[i as usize])
                .collect()
        } else {
            v.nodes()
                .filter(|&u| u.level() < n && t.is_ancestor_of(u))
                .map(|u| v.at(u))
                .collect()
        };
        let want = if left {
            pool.iter().min()
        } else {
            pool.iter().max()
        };
        let want = *want.expect("pool holds x");
        if v.at(x) != want {
            out.push(Violation {
                rule: Rule::BottomParent,
                node: x,
                witness: vec![v.at(x), want],
            });
        }
    }
    out
}

/// All three checks.
pub fn check_all(v: &TerminalView) -> Vec<Violation> {
    let mut out = check_sorting_theorem(v);
    out.extend(check_lemma_parent_adjacent(v));
    out.extend(check_lemma_bottom_parents(v));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndgameError {
    #[error("{0} chips is not of the form 2^n - 1 with n >= 2")]
    NotFull(usize),
    #[error("node {node} holds {found} chips, endgame needs {expected}")]
    Precondition {
        node: NodeId,
        found: usize,
        expected: usize,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Checks the endgame starting state: 3 chips at the root, 2 on every node
/// of levels `2..n`, nothing deeper. Returns `n`.
pub fn endgame_precondition<C: ChipConfig>(c: &C) -> Result<u32, EndgameError> {
    let total = c.total_chips();
    let n = height_for_full_tree(total)
        .filter(|&n| n >= 2)
        .ok_or(EndgameError::NotFull(total))?;
    let expected = |node: NodeId| match node.level() {
        1 => 3,
        l if l < n => 2,
        _ => 0,
    };
    for level in 1..n {
        for node in crate::tree::level_nodes(level) {
            let found = c.chips_at(node);
            if found != expected(node) {
                return Err(EndgameError::Precondition {
                    node,
                    found,
                    expected: expected(node),
                });
            }
        }
    }
    if let Some(&node) = c.occupied_nodes().iter().find(|node| node.level() >= n) {
        return Err(EndgameError::Precondition {
            node,
            found: c.chips_at(node),
            expected: 0,
        });
    }
    Ok(n)
}

/// The wave schedule from the endgame state, with the terminal it reaches.
/// Every fire moves exactly the three chips present at the node.
pub fn endgame_schedule<C: ChipConfig>(c: &C) -> Result<(C, MoveLog), EndgameError> {
    let n = endgame_precondition(c)?;
    let mut state = c.clone();
    let mut log = MoveLog::new();
    for node in wave_order(n) {
        debug_assert_eq!(state.chips_at(node), 3);
        let mv = FiringMove {
            node,
            payload: state.default_payload(node),
        };
        state.fire(&mv)?;
        log.push(mv);
    }
    Ok((state, log))
}

/// `(node, j)` for every fire, `j` counting back from that node's last fire.
pub fn move_indices(log: &MoveLog) -> Vec<MoveIndex> {
    let mut remaining: HashMap<NodeId, u32> = log
        .fire_counts()
        .iter()
        .map(|(&n, &k)| (n, k as u32))
        .collect();
    log.moves()
        .map(|mv| {
            let left = remaining.get_mut(&mv.node).expect("counted");
            *left -= 1;
            MoveIndex::new(mv.node, *left)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderViolation {
    pub rule: &'static str,
    pub step: usize,
    pub node: NodeId,
    pub j: u32,
    pub detail: String,
}

impl fmt::Display for OrderViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at step {} ({},{}): {}",
            self.rule, self.step, self.node, self.j, self.detail
        )
    }
}

/// Checks a full stabilization log of `2^n - 1` chips: every move is legal
/// on chip counts, every endgame move `(i, j)` fires with exactly three
/// chips present, and for `i` off the root the parent's fires bracket it:
/// `time(p, j + 1) < time(i, j) < time(p, j)`.
pub fn check_endgame_order(log: &MoveLog, n: u32) -> Vec<OrderViolation> {
    let mut out = Vec::new();
    let mut counts = UnlabeledConfig::initial((1u64 << n) - 1);
    let indices = move_indices(log);
    let mut times: HashMap<MoveIndex, usize> = HashMap::new();
    let mut before: Vec<u64> = Vec::with_capacity(log.len());
    for (step, mv) in log.moves().enumerate() {
        let here = counts.count(mv.node);
        before.push(here);
        times.insert(indices[step], step);
        let m = indices[step];
        let shadow = FiringMove::unlabeled(mv.node);
        if counts.fire(&shadow).is_err() {
            out.push(OrderViolation {
                rule: "illegal-move",
                step,
                node: m.node,
                j: m.j,
                detail: format!("node holds {here} chips"),
            });
            // keep going on the lenient shadow so later moves still get indices
            counts = lenient_fire(&counts, mv.node);
        }
    }
    for (step, &m) in indices.iter().enumerate() {
        if !m.is_endgame(n) {
            continue;
        }
        if before[step] != 3 {
            out.push(OrderViolation {
                rule: "three-chips",
                step,
                node: m.node,
                j: m.j,
                detail: format!("fired holding {} chips", before[step]),
            });
        }
        let Some(p) = m.node.tree_parent() else {
            continue;
        };
        let earlier = times.get(&MoveIndex::new(p, m.j + 1));
        let later = times.get(&MoveIndex::new(p, m.j));
        match (earlier, later) {
            (Some(&a), Some(&b)) if a < step && step < b => {}
            (a, b) => out.push(OrderViolation {
                rule: "parent-bracket",
                step,
                node: m.node,
                j: m.j,
                detail: format!("parent fires at {:?} and {:?}", a, b),
            }),
        }
    }
    out
}

fn lenient_fire(c: &UnlabeledConfig, node: NodeId) -> UnlabeledConfig {
    let mut counts: BTreeMap<NodeId, u64> = c.iter().collect();
    let here = counts.entry(node).or_default();
    *here = here.saturating_sub(3);
    for target in [node.left(), node.right(), node.parent()] {
        *counts.entry(target).or_default() += 1;
    }
    UnlabeledConfig::from_counts(counts).with_capacity_level(c.capacity_level())
}

/// Every terminal reachable from `c` under every order and every choice of
/// three chips, explored with memoization.
pub fn reachable_terminals(
    c: &LabeledConfig,
    max_states: usize,
) -> Result<Vec<LabeledConfig>, EngineError> {
    let mut seen: HashSet<StateKey> = HashSet::new();
    let mut terminals: BTreeMap<StateKey, LabeledConfig> = BTreeMap::new();
    let mut stack = vec![c.clone()];
    seen.insert(c.state_key());
    while let Some(state) = stack.pop() {
        let fireable = state.fireable_nodes();
        if fireable.is_empty() {
            terminals.insert(state.state_key(), state);
            continue;
        }
        for node in fireable {
            let here = state.chips(node).to_vec();
            for a in 0..here.len() {
                for b in a + 1..here.len() {
                    for d in b + 1..here.len() {
                        let mv = FiringMove {
                            node,
                            payload: Payload::Labeled([here[a], here[b], here[d]]),
                        };
                        let next = state.apply_move(&mv)?;
                        if seen.insert(next.state_key()) {
                            if seen.len() > max_states {
                                return Err(EngineError::NonTermination(max_states as u64));
                            }
                            stack.push(next);
                        }
                    }
                }
            }
        }
    }
    Ok(terminals.into_values().collect())
}

/// Whether the endgame from `c` has a single reachable terminal, and it
/// matches the wave schedule's.
pub fn endgame_confluent(c: &LabeledConfig) -> Result<bool, EndgameError> {
    let (wave_terminal, _) = endgame_schedule(c)?;
    let all = reachable_terminals(c, 50_000_000)?;
    Ok(all == [wave_terminal])
}
