//! Game state and dynamics for unlabeled, labeled and colored chip-firing.
//!
//! A node fires three chips at once. Labeled firing sends the smallest chip
//! to the left child, the largest to the right child and the middle one to
//! the parent; the root keeps its middle chip through the self-loop. Colored
//! firing routes red left, blue right and the remaining chip up.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{NodeId, TreeError};

pub type Chip = u32;

/// Nodes deeper than this level are refused rather than silently grown into.
pub const DEFAULT_CAPACITY_LEVEL: u32 = 32;

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("illegal move at node {node} with payload {payload}: {reason}")]
    IllegalMove {
        node: NodeId,
        payload: String,
        reason: String,
    },
    #[error("scripted move {step} is illegal: {source}")]
    ScriptStep {
        step: usize,
        #[source]
        source: Box<EngineError>,
    },
    #[error("script ended with fireable nodes remaining: {0:?}")]
    ScriptIncomplete(Vec<NodeId>),
    #[error("payload flavor {got} does not match a {expected} configuration")]
    FlavorMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error("node {node} would place a chip below capacity level {capacity}")]
    Capacity { node: NodeId, capacity: u32 },
    #[error("no stable configuration after {0} steps")]
    NonTermination(u64),
    #[error("strategy {strategy} cannot run here: {reason}")]
    StrategyPrecondition {
        strategy: &'static str,
        reason: String,
    },
    #[error("threshold {t} outside 1..={total}")]
    Threshold { t: usize, total: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("move log line {line}: {reason}")]
    LogParse { line: usize, reason: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Multiset of three colors, stored as the number of red chips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColorTriple {
    red: u8,
}

impl ColorTriple {
    pub const RRR: ColorTriple = ColorTriple { red: 3 };
    pub const RRB: ColorTriple = ColorTriple { red: 2 };
    pub const RBB: ColorTriple = ColorTriple { red: 1 };
    pub const BBB: ColorTriple = ColorTriple { red: 0 };

    pub fn with_red(red: u8) -> Option<Self> {
        (red <= 3).then_some(ColorTriple { red })
    }

    pub fn red(self) -> u64 {
        self.red as u64
    }

    pub fn blue(self) -> u64 {
        3 - self.red as u64
    }
}

impl fmt::Display for ColorTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.red {
            f.write_str("R")?;
        }
        for _ in self.red..3 {
            f.write_str("B")?;
        }
        Ok(())
    }
}

impl FromStr for ColorTriple {
    type Err = String;

    /// Accepts any order of three `R`/`B` letters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut red = 0u8;
        let mut len = 0;
        for (pos, ch) in s.chars().enumerate() {
            match ch {
                'R' => red += 1,
                'B' => {}
                other => return Err(format!("color '{other}' at offset {pos} is not R or B")),
            }
            len += 1;
        }
        if len != 3 {
            return Err(format!("expected 3 colors, found {len}"));
        }
        Ok(ColorTriple { red })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Payload {
    Unlabeled,
    /// Strictly ascending chip labels.
    Labeled([Chip; 3]),
    Colored(ColorTriple),
}

impl Payload {
    pub fn flavor(&self) -> &'static str {
        match self {
            Payload::Unlabeled => "unlabeled",
            Payload::Labeled(_) => "labeled",
            Payload::Colored(_) => "colored",
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Unlabeled => f.write_str("*"),
            Payload::Labeled([a, b, c]) => write!(f, "{a},{b},{c}"),
            Payload::Colored(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiringMove {
    pub node: NodeId,
    pub payload: Payload,
}

impl FiringMove {
    pub fn unlabeled(node: NodeId) -> Self {
        FiringMove {
            node,
            payload: Payload::Unlabeled,
        }
    }

    /// Labeled move; the triple is sorted here so callers may pass any order.
    pub fn labeled(node: NodeId, mut chips: [Chip; 3]) -> Self {
        chips.sort_unstable();
        FiringMove {
            node,
            payload: Payload::Labeled(chips),
        }
    }

    pub fn colored(node: NodeId, colors: ColorTriple) -> Self {
        FiringMove {
            node,
            payload: Payload::Colored(colors),
        }
    }

    fn illegal(&self, reason: impl Into<String>) -> EngineError {
        EngineError::IllegalMove {
            node: self.node,
            payload: self.payload.to_string(),
            reason: reason.into(),
        }
    }
}

/// Common surface of the three chip flavors.
pub trait ChipConfig: Clone + PartialEq + fmt::Debug + Send + Sync {
    const FLAVOR: &'static str;

    fn chips_at(&self, node: NodeId) -> usize;
    fn total_chips(&self) -> usize;
    /// Ascending list of nodes holding at least one chip.
    fn occupied_nodes(&self) -> Vec<NodeId>;
    fn capacity_level(&self) -> u32;

    /// Applies `mv` in place. On error the configuration is unchanged.
    fn fire(&mut self, mv: &FiringMove) -> Result<(), EngineError>;

    /// Payload used by the deterministic strategies.
    fn default_payload(&self, node: NodeId) -> Payload;

    /// Uniformly random three-subset of the chips at `node`.
    fn random_payload<R: Rng + ?Sized>(&self, node: NodeId, rng: &mut R) -> Payload;

    /// Forgets labels and colors.
    fn counts(&self) -> UnlabeledConfig;

    fn fireable_nodes(&self) -> Vec<NodeId> {
        self.occupied_nodes()
            .into_iter()
            .filter(|&n| self.chips_at(n) >= 3)
            .collect()
    }

    fn is_stable(&self) -> bool {
        self.fireable_nodes().is_empty()
    }

    /// Successor configuration, leaving `self` untouched.
    fn apply_move(&self, mv: &FiringMove) -> Result<Self, EngineError> {
        let mut next = self.clone();
        next.fire(mv)?;
        Ok(next)
    }
}

fn check_capacity(node: NodeId, capacity: u32) -> Result<(), EngineError> {
    if node.level() + 1 > capacity {
        return Err(EngineError::Capacity { node, capacity });
    }
    Ok(())
}

fn random_subset<R: Rng + ?Sized>(len: usize, rng: &mut R) -> [usize; 3] {
    let mut picked = index::sample(rng, len, 3).into_vec();
    picked.sort_unstable();
    [picked[0], picked[1], picked[2]]
}

// ---------------------------------------------------------------------------
// Unlabeled

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnlabeledConfig {
    counts: BTreeMap<NodeId, u64>,
    capacity: u32,
}

impl Default for UnlabeledConfig {
    fn default() -> Self {
        UnlabeledConfig {
            counts: BTreeMap::new(),
            capacity: DEFAULT_CAPACITY_LEVEL,
        }
    }
}

impl UnlabeledConfig {
    pub fn initial(n_chips: u64) -> Self {
        let mut c = Self::default();
        if n_chips > 0 {
            c.counts.insert(NodeId::ROOT, n_chips);
        }
        c
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (NodeId, u64)>) -> Self {
        let counts = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        UnlabeledConfig {
            counts,
            capacity: DEFAULT_CAPACITY_LEVEL,
        }
    }

    pub fn with_capacity_level(mut self, capacity: u32) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn count(&self, node: NodeId) -> u64 {
        self.counts.get(&node).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, u64)> + '_ {
        self.counts.iter().map(|(&n, &c)| (n, c))
    }

    fn add(&mut self, node: NodeId, k: u64) {
        *self.counts.entry(node).or_insert(0) += k;
    }
}

impl ChipConfig for UnlabeledConfig {
    const FLAVOR: &'static str = "unlabeled";

    fn chips_at(&self, node: NodeId) -> usize {
        self.count(node) as usize
    }

    fn total_chips(&self) -> usize {
        self.counts.values().sum::<u64>() as usize
    }

    fn occupied_nodes(&self) -> Vec<NodeId> {
        self.counts.keys().copied().collect()
    }

    fn capacity_level(&self) -> u32 {
        self.capacity
    }

    fn fire(&mut self, mv: &FiringMove) -> Result<(), EngineError> {
        if mv.payload != Payload::Unlabeled {
            return Err(EngineError::FlavorMismatch {
                expected: Self::FLAVOR,
                got: mv.payload.flavor(),
            });
        }
        let node = mv.node;
        let have = self.count(node);
        if have < 3 {
            return Err(mv.illegal(format!("node holds {have} chips, needs 3")));
        }
        check_capacity(node, self.capacity)?;
        if have == 3 {
            self.counts.remove(&node);
        } else {
            self.counts.insert(node, have - 3);
        }
        self.add(node.left(), 1);
        self.add(node.right(), 1);
        self.add(node.parent(), 1);
        Ok(())
    }

    fn default_payload(&self, _node: NodeId) -> Payload {
        Payload::Unlabeled
    }

    fn random_payload<R: Rng + ?Sized>(&self, _node: NodeId, _rng: &mut R) -> Payload {
        Payload::Unlabeled
    }

    fn counts(&self) -> UnlabeledConfig {
        self.clone()
    }
}

// ---------------------------------------------------------------------------
// Labeled

/// Full labeled game state. Chips at each node are kept ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledConfig {
    chips: BTreeMap<NodeId, Vec<Chip>>,
    total: usize,
    capacity: u32,
}

impl LabeledConfig {
    /// Chips `1..=n_chips` stacked at the root.
    pub fn initial(n_chips: usize) -> Self {
        let mut chips = BTreeMap::new();
        if n_chips > 0 {
            chips.insert(NodeId::ROOT, (1..=n_chips as Chip).collect());
        }
        LabeledConfig {
            chips,
            total: n_chips,
            capacity: DEFAULT_CAPACITY_LEVEL,
        }
    }

    /// Builds a configuration from explicit placements; labels must form a
    /// permutation of `1..=N`.
    pub fn from_placements<I, C>(placements: I) -> Result<Self, EngineError>
    where
        I: IntoIterator<Item = (NodeId, C)>,
        C: IntoIterator<Item = Chip>,
    {
        let mut chips: BTreeMap<NodeId, Vec<Chip>> = BTreeMap::new();
        let mut seen = Vec::new();
        for (node, cs) in placements {
            let entry = chips.entry(node).or_default();
            for c in cs {
                entry.push(c);
                seen.push(c);
            }
        }
        chips.retain(|_, v| !v.is_empty());
        for v in chips.values_mut() {
            v.sort_unstable();
        }
        seen.sort_unstable();
        let total = seen.len();
        if seen.iter().enumerate().any(|(i, &c)| c as usize != i + 1) {
            return Err(EngineError::InvalidConfig(format!(
                "labels must be a permutation of 1..={total}"
            )));
        }
        Ok(LabeledConfig {
            chips,
            total,
            capacity: DEFAULT_CAPACITY_LEVEL,
        })
    }

    pub fn with_capacity_level(mut self, capacity: u32) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn chips(&self, node: NodeId) -> &[Chip] {
        self.chips.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &[Chip])> + '_ {
        self.chips.iter().map(|(&n, v)| (n, v.as_slice()))
    }

    /// Node currently holding `chip`, if any.
    pub fn locate(&self, chip: Chip) -> Option<NodeId> {
        self.chips
            .iter()
            .find(|(_, v)| v.binary_search(&chip).is_ok())
            .map(|(&n, _)| n)
    }

    fn insert(&mut self, node: NodeId, chip: Chip) {
        let v = self.chips.entry(node).or_default();
        let pos = v.binary_search(&chip).unwrap_or_else(|p| p);
        v.insert(pos, chip);
    }

    pub fn state_key(&self) -> StateKey {
        StateKey::of(self)
    }
}

impl ChipConfig for LabeledConfig {
    const FLAVOR: &'static str = "labeled";

    fn chips_at(&self, node: NodeId) -> usize {
        self.chips(node).len()
    }

    fn total_chips(&self) -> usize {
        self.total
    }

    fn occupied_nodes(&self) -> Vec<NodeId> {
        self.chips.keys().copied().collect()
    }

    fn capacity_level(&self) -> u32 {
        self.capacity
    }

    fn fire(&mut self, mv: &FiringMove) -> Result<(), EngineError> {
        let Payload::Labeled(triple) = mv.payload else {
            return Err(EngineError::FlavorMismatch {
                expected: Self::FLAVOR,
                got: mv.payload.flavor(),
            });
        };
        let [lo, mid, hi] = triple;
        if !(lo < mid && mid < hi) {
            return Err(mv.illegal("chip labels must be distinct and ascending"));
        }
        let node = mv.node;
        let here = self.chips(node);
        let positions: Vec<usize> = triple
            .iter()
            .map(|c| here.binary_search(c))
            .collect::<Result<_, _>>()
            .map_err(|_| mv.illegal(format!("node holds {:?}", here)))?;
        check_capacity(node, self.capacity)?;
        let v = self
            .chips
            .get_mut(&node)
            .expect("node holds the fired chips");
        for &p in positions.iter().rev() {
            v.remove(p);
        }
        if v.is_empty() {
            self.chips.remove(&node);
        }
        self.insert(node.left(), lo);
        self.insert(node.right(), hi);
        self.insert(node.parent(), mid);
        Ok(())
    }

    /// The three smallest chips at the node.
    fn default_payload(&self, node: NodeId) -> Payload {
        let here = self.chips(node);
        Payload::Labeled([here[0], here[1], here[2]])
    }

    fn random_payload<R: Rng + ?Sized>(&self, node: NodeId, rng: &mut R) -> Payload {
        let here = self.chips(node);
        let [a, b, c] = random_subset(here.len(), rng);
        Payload::Labeled([here[a], here[b], here[c]])
    }

    fn counts(&self) -> UnlabeledConfig {
        UnlabeledConfig::from_counts(self.chips.iter().map(|(&n, v)| (n, v.len() as u64)))
            .with_capacity_level(self.capacity)
    }
}

/// Canonical bytes of a labeled configuration: ascending `(node, chips)`
/// pairs, each as `node: u64 LE`, `len: u32 LE`, then the chips as `u32 LE`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Vec<u8>);

impl StateKey {
    pub fn of(config: &LabeledConfig) -> Self {
        let mut bytes = Vec::with_capacity(config.chips.len() * 12 + config.total * 4);
        for (node, chips) in &config.chips {
            bytes.extend_from_slice(&node.index().to_le_bytes());
            bytes.extend_from_slice(&(chips.len() as u32).to_le_bytes());
            for c in chips {
                bytes.extend_from_slice(&c.to_le_bytes());
            }
        }
        StateKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

// ---------------------------------------------------------------------------
// Colored

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Colors {
    pub red: u64,
    pub blue: u64,
}

impl Colors {
    pub fn total(self) -> u64 {
        self.red + self.blue
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoredConfig {
    colors: BTreeMap<NodeId, Colors>,
    capacity: u32,
}

impl Default for ColoredConfig {
    fn default() -> Self {
        ColoredConfig {
            colors: BTreeMap::new(),
            capacity: DEFAULT_CAPACITY_LEVEL,
        }
    }
}

impl ColoredConfig {
    pub fn initial(red: u64, blue: u64) -> Self {
        let mut c = Self::default();
        if red + blue > 0 {
            c.colors.insert(NodeId::ROOT, Colors { red, blue });
        }
        c
    }

    pub fn from_colors(colors: impl IntoIterator<Item = (NodeId, Colors)>) -> Self {
        let colors = colors.into_iter().filter(|(_, c)| c.total() > 0).collect();
        ColoredConfig {
            colors,
            capacity: DEFAULT_CAPACITY_LEVEL,
        }
    }

    pub fn with_capacity_level(mut self, capacity: u32) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn colors(&self, node: NodeId) -> Colors {
        self.colors.get(&node).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, Colors)> + '_ {
        self.colors.iter().map(|(&n, &c)| (n, c))
    }

    pub fn total_red(&self) -> u64 {
        self.colors.values().map(|c| c.red).sum()
    }

    pub fn total_blue(&self) -> u64 {
        self.colors.values().map(|c| c.blue).sum()
    }

    fn add(&mut self, node: NodeId, red: bool) {
        let e = self.colors.entry(node).or_default();
        if red {
            e.red += 1;
        } else {
            e.blue += 1;
        }
    }
}

/// Where the three chips of a colored firing go: `(left, right, up)`, `true` = red.
pub fn color_routing(t: ColorTriple) -> (bool, bool, bool) {
    match t.red {
        3 => (true, true, true),
        2 => (true, false, true),
        1 => (true, false, false),
        _ => (false, false, false),
    }
}

impl ChipConfig for ColoredConfig {
    const FLAVOR: &'static str = "colored";

    fn chips_at(&self, node: NodeId) -> usize {
        self.colors(node).total() as usize
    }

    fn total_chips(&self) -> usize {
        self.colors.values().map(|c| c.total()).sum::<u64>() as usize
    }

    fn occupied_nodes(&self) -> Vec<NodeId> {
        self.colors.keys().copied().collect()
    }

    fn capacity_level(&self) -> u32 {
        self.capacity
    }

    fn fire(&mut self, mv: &FiringMove) -> Result<(), EngineError> {
        let Payload::Colored(triple) = mv.payload else {
            return Err(EngineError::FlavorMismatch {
                expected: Self::FLAVOR,
                got: mv.payload.flavor(),
            });
        };
        let node = mv.node;
        let have = self.colors(node);
        if have.red < triple.red() || have.blue < triple.blue() {
            return Err(mv.illegal(format!(
                "node holds {}R {}B, short by {}R {}B",
                have.red,
                have.blue,
                triple.red().saturating_sub(have.red),
                triple.blue().saturating_sub(have.blue)
            )));
        }
        check_capacity(node, self.capacity)?;
        let rest = Colors {
            red: have.red - triple.red(),
            blue: have.blue - triple.blue(),
        };
        if rest.total() == 0 {
            self.colors.remove(&node);
        } else {
            self.colors.insert(node, rest);
        }
        let (left, right, up) = color_routing(triple);
        self.add(node.left(), left);
        self.add(node.right(), right);
        self.add(node.parent(), up);
        Ok(())
    }

    /// Reds first, matching the three smallest labels of the red-below-blue lift.
    fn default_payload(&self, node: NodeId) -> Payload {
        let have = self.colors(node);
        Payload::Colored(ColorTriple {
            red: have.red.min(3) as u8,
        })
    }

    fn random_payload<R: Rng + ?Sized>(&self, node: NodeId, rng: &mut R) -> Payload {
        let have = self.colors(node);
        let picked = random_subset(have.total() as usize, rng);
        let red = picked.iter().filter(|&&i| (i as u64) < have.red).count() as u8;
        Payload::Colored(ColorTriple { red })
    }

    fn counts(&self) -> UnlabeledConfig {
        UnlabeledConfig::from_counts(self.colors.iter().map(|(&n, c)| (n, c.total())))
            .with_capacity_level(self.capacity)
    }
}

/// Colors labels `<= t` red and the rest blue, keeping placements.
pub fn threshold_color_projection(
    c: &LabeledConfig,
    t: usize,
) -> Result<ColoredConfig, EngineError> {
    if t < 1 || t > c.total_chips() {
        return Err(EngineError::Threshold {
            t,
            total: c.total_chips(),
        });
    }
    let colors = c.iter().map(|(node, chips)| {
        let red = chips.iter().filter(|&&x| x as usize <= t).count() as u64;
        (
            node,
            Colors {
                red,
                blue: chips.len() as u64 - red,
            },
        )
    });
    Ok(ColoredConfig::from_colors(colors).with_capacity_level(c.capacity))
}

/// Colored image of a labeled move under threshold `t`.
pub fn project_move(mv: &FiringMove, t: usize) -> Option<FiringMove> {
    match mv.payload {
        Payload::Labeled(chips) => {
            let red = chips.iter().filter(|&&x| x as usize <= t).count() as u8;
            Some(FiringMove::colored(mv.node, ColorTriple { red }))
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Move log

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedMove {
    pub step: u64,
    pub mv: FiringMove,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveLog {
    entries: Vec<LoggedMove>,
    fire_counts: BTreeMap<NodeId, u64>,
}

impl MoveLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, mv: FiringMove) {
        let step = self.entries.len() as u64;
        self.entries.push(LoggedMove { step, mv });
        *self.fire_counts.entry(mv.node).or_insert(0) += 1;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LoggedMove] {
        &self.entries
    }

    pub fn moves(&self) -> impl Iterator<Item = &FiringMove> + '_ {
        self.entries.iter().map(|e| &e.mv)
    }

    pub fn fire_count(&self, node: NodeId) -> u64 {
        self.fire_counts.get(&node).copied().unwrap_or(0)
    }

    pub fn fire_counts(&self) -> &BTreeMap<NodeId, u64> {
        &self.fire_counts
    }

    pub fn extend(&mut self, other: &MoveLog) {
        for mv in other.moves() {
            self.push(*mv);
        }
    }

    /// One move per line. Unlabeled moves print the node's running fire
    /// ordinal (1-based) in place of a payload.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut ordinals: BTreeMap<NodeId, u64> = BTreeMap::new();
        for e in &self.entries {
            let node = e.mv.node;
            let k = ordinals.entry(node).or_insert(0);
            *k += 1;
            match e.mv.payload {
                Payload::Unlabeled => out.push_str(&format!("fire {node} {k}\n")),
                p => out.push_str(&format!("fire {node} {p}\n")),
            }
        }
        out
    }

    /// Parses [`MoveLog::to_text`] output. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<MoveLog, EngineError> {
        let mut log = MoveLog::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| EngineError::LogParse {
                line: lineno + 1,
                reason,
            };
            let mut parts = line.split_whitespace();
            if parts.next() != Some("fire") {
                return Err(err("expected 'fire'".into()));
            }
            let node: u64 = parts
                .next()
                .ok_or_else(|| err("missing node".into()))?
                .parse()
                .map_err(|e| err(format!("bad node: {e}")))?;
            let node = NodeId::new(node).map_err(|e| err(e.to_string()))?;
            let payload = parts.next().ok_or_else(|| err("missing payload".into()))?;
            if parts.next().is_some() {
                return Err(err("trailing tokens".into()));
            }
            let mv = if payload.contains(',') {
                let chips: Vec<Chip> = payload
                    .split(',')
                    .map(|s| s.parse::<Chip>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(format!("bad chip label: {e}")))?;
                let triple: [Chip; 3] = chips
                    .try_into()
                    .map_err(|_| err("labeled payload needs 3 chips".into()))?;
                FiringMove::labeled(node, triple)
            } else if payload.starts_with(['R', 'B']) {
                FiringMove::colored(node, payload.parse().map_err(err)?)
            } else {
                let k: u64 = payload
                    .parse()
                    .map_err(|e| err(format!("bad ordinal: {e}")))?;
                if k != log.fire_count(node) + 1 {
                    return Err(err(format!(
                        "ordinal {k} for node {node}, expected {}",
                        log.fire_count(node) + 1
                    )));
                }
                FiringMove::unlabeled(node)
            };
            log.push(mv);
        }
        Ok(log)
    }
}

/// Replays `log` from `initial`, failing on the first illegal move.
pub fn replay<C: ChipConfig>(initial: &C, log: &MoveLog) -> Result<C, EngineError> {
    let mut c = initial.clone();
    for (step, mv) in log.moves().enumerate() {
        c.fire(mv).map_err(|e| EngineError::ScriptStep {
            step,
            source: Box::new(e),
        })?;
    }
    Ok(c)
}

// ---------------------------------------------------------------------------
// Strategies

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Fire the smallest-index fireable node.
    LowestNodeFirst,
    /// Root first, then both branches in lockstep, the root answering each
    /// pair of child fires. Requires every chip at the root.
    MirroredRecursive,
    /// Lowest node first until the endgame begins, then waves of top-down fires.
    WaveEndgame,
    /// Uniform fireable node, then a uniform three-subset of its chips.
    UniformRandom {
        seed: u64,
    },
    Scripted(Vec<FiringMove>),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::LowestNodeFirst => "lowest_node_first",
            Strategy::MirroredRecursive => "mirrored_recursive",
            Strategy::WaveEndgame => "wave_endgame",
            Strategy::UniformRandom { .. } => "uniform_random",
            Strategy::Scripted(_) => "scripted",
        }
    }

    /// Parses the non-scripted strategy names; `seed` feeds the random one.
    pub fn from_name(name: &str, seed: u64) -> Option<Strategy> {
        Some(match name {
            "lowest" | "lowest_node_first" => Strategy::LowestNodeFirst,
            "mirrored" | "mirrored_recursive" => Strategy::MirroredRecursive,
            "waves" | "wave_endgame" => Strategy::WaveEndgame,
            "random" | "uniform_random" => Strategy::UniformRandom { seed },
            _ => return None,
        })
    }
}

/// Identifier of the uniform random model, embedded in every sampled report.
pub const RANDOM_MODEL_ID: &str = "uniform-node/uniform-triple/chacha8-v1";

#[derive(Debug, Clone, Copy)]
pub struct StabilizeOptions {
    pub max_steps: u64,
}

impl Default for StabilizeOptions {
    fn default() -> Self {
        StabilizeOptions {
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

/// Runs `strategy` from `c` until no node can fire.
pub fn stabilize<C: ChipConfig>(c: &C, strategy: &Strategy) -> Result<(C, MoveLog), EngineError> {
    stabilize_with(c, strategy, StabilizeOptions::default())
}

pub fn stabilize_with<C: ChipConfig>(
    c: &C,
    strategy: &Strategy,
    opts: StabilizeOptions,
) -> Result<(C, MoveLog), EngineError> {
    let mut state = c.clone();
    let mut log = MoveLog::new();
    let step = |state: &mut C, log: &mut MoveLog, mv: FiringMove| -> Result<(), EngineError> {
        if log.len() as u64 >= opts.max_steps {
            return Err(EngineError::NonTermination(opts.max_steps));
        }
        state.fire(&mv)?;
        log.push(mv);
        Ok(())
    };
    match strategy {
        Strategy::LowestNodeFirst => {
            while let Some(node) = lowest_fireable(&state) {
                let mv = FiringMove {
                    node,
                    payload: state.default_payload(node),
                };
                step(&mut state, &mut log, mv)?;
            }
        }
        Strategy::UniformRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            loop {
                let fireable = state.fireable_nodes();
                if fireable.is_empty() {
                    break;
                }
                let mv = random_move(&state, &fireable, &mut rng);
                step(&mut state, &mut log, mv)?;
            }
        }
        Strategy::Scripted(moves) => {
            for (i, mv) in moves.iter().enumerate() {
                step(&mut state, &mut log, *mv).map_err(|e| EngineError::ScriptStep {
                    step: i,
                    source: Box::new(e),
                })?;
            }
            let left = state.fireable_nodes();
            if !left.is_empty() {
                return Err(EngineError::ScriptIncomplete(left));
            }
        }
        Strategy::MirroredRecursive => {
            let total = state.total_chips() as u64;
            if state.chips_at(NodeId::ROOT) as u64 != total {
                return Err(EngineError::StrategyPrecondition {
                    strategy: strategy.name(),
                    reason: "all chips must start at the root".into(),
                });
            }
            for node in mirrored_schedule(total) {
                let node = NodeId::new(node)?;
                let mv = FiringMove {
                    node,
                    payload: state.default_payload(node),
                };
                step(&mut state, &mut log, mv)?;
            }
            debug_assert!(state.is_stable());
        }
        Strategy::WaveEndgame => {
            let total = state.total_chips();
            let Some(n) = height_for_full_tree(total) else {
                return Err(EngineError::StrategyPrecondition {
                    strategy: strategy.name(),
                    reason: format!("{total} chips is not of the form 2^n - 1"),
                });
            };
            loop {
                if endgame_ready(&state, n) {
                    for node in wave_order(n) {
                        let mv = FiringMove {
                            node,
                            payload: state.default_payload(node),
                        };
                        step(&mut state, &mut log, mv)?;
                    }
                    break;
                }
                let Some(node) = lowest_fireable(&state) else {
                    break;
                };
                let mv = FiringMove {
                    node,
                    payload: state.default_payload(node),
                };
                step(&mut state, &mut log, mv)?;
            }
        }
    }
    Ok((state, log))
}

fn lowest_fireable<C: ChipConfig>(c: &C) -> Option<NodeId> {
    c.occupied_nodes().into_iter().find(|&n| c.chips_at(n) >= 3)
}

/// One draw of the uniform random model: node index first, then the subset.
pub fn random_move<C: ChipConfig, R: Rng + ?Sized>(
    c: &C,
    fireable: &[NodeId],
    rng: &mut R,
) -> FiringMove {
    let node = fireable[rng.gen_range(0..fireable.len())];
    FiringMove {
        node,
        payload: c.random_payload(node, rng),
    }
}

/// `n` with `total == 2^n - 1`, if any.
pub fn height_for_full_tree(total: usize) -> Option<u32> {
    let t = total as u64 + 1;
    t.is_power_of_two().then(|| t.trailing_zeros())
}

/// Height of the terminal perfect tree for `n_chips` (`2^n - 1 <= N <= 2^(n+1) - 2`).
pub fn terminal_height(n_chips: u64) -> u32 {
    64 - (n_chips + 1).leading_zeros() - 1
}

/// The state just before the root's last `n - 1` fires: root holds 3 chips,
/// every node on levels `2..n` holds 2, nothing else is occupied.
pub fn endgame_ready<C: ChipConfig>(c: &C, n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let occupied = c.occupied_nodes();
    if occupied.len() != (1usize << (n - 1)) - 1 {
        return false;
    }
    occupied.iter().all(|&node| {
        let want = match node.level() {
            1 => 3,
            l if l < n => 2,
            _ => return false,
        };
        c.chips_at(node) == want
    })
}

/// Node order of the endgame waves for height `n`: wave `w` fires nodes
/// `1..2^(n-w)` in index order.
pub fn wave_order(n: u32) -> Vec<NodeId> {
    let mut out = Vec::new();
    for w in 1..n {
        let end = 1u64 << (n - w);
        out.extend((1..end).map(|i| NodeId::new(i).expect("nonzero")));
    }
    out
}

/// Fire sequence of the lockstep-branch schedule for `chips` at the root.
/// Node indices are absolute.
pub fn mirrored_schedule(chips: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut rest = chips;
    let mut fires = 0;
    while rest >= 3 {
        rest -= 2;
        fires += 1;
        out.push(1);
    }
    if fires == 0 {
        return out;
    }
    // each child runs the same schedule on `fires` chips, its self-loop
    // emulated by the root firing once both children have fired
    for m in mirrored_schedule(fires) {
        let depth = 63 - m.leading_zeros();
        out.push(m + (1 << depth));
        out.push(m + (2 << depth));
        if m == 1 {
            out.push(1);
        }
    }
    out
}
