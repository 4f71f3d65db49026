//! Exact and sampled distributions of terminal configurations.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{
    random_move, Chip, ChipConfig, EngineError, FiringMove, LabeledConfig, RANDOM_MODEL_ID,
};
use crate::labeled::{endgame_schedule, EndgameError, TerminalView, ViewError};
use crate::tree::NodeId;

/// Trials per random substream. Fixed so that results do not depend on
/// how blocks are spread over workers.
pub const BLOCK: u64 = 10_000;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("n must be between 1 and 10, got {0}")]
    Height(u32),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Endgame(#[from] EndgameError),
    #[error(transparent)]
    View(#[from] ViewError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub perm: Vec<Chip>,
    pub inversions: u64,
    pub count: u64,
}

/// Terminal configurations with their counts out of `trials`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributionReport {
    pub n: u32,
    pub model: String,
    /// Exact enumeration (every outcome weighted once) rather than sampling.
    pub exact: bool,
    pub trials: u64,
    pub seed: Option<u64>,
    /// Sorted by count descending, then permutation.
    pub entries: Vec<Entry>,
}

impl DistributionReport {
    fn from_counts(
        n: u32,
        model: &str,
        exact: bool,
        seed: Option<u64>,
        counts: HashMap<Vec<Chip>, u64>,
    ) -> Self {
        let trials = counts.values().sum();
        let mut entries: Vec<Entry> = counts
            .into_iter()
            .map(|(perm, count)| Entry {
                inversions: crate::labeled::inversions(&perm),
                perm,
                count,
            })
            .collect();
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.perm.cmp(&b.perm)));
        DistributionReport {
            n,
            model: model.to_string(),
            exact,
            trials,
            seed,
            entries,
        }
    }

    pub fn count(&self, perm: &[Chip]) -> u64 {
        self.entries
            .iter()
            .find(|e| e.perm == perm)
            .map_or(0, |e| e.count)
    }

    /// `(count, trials)`; kept as integers so no rounding enters comparisons.
    pub fn frequency(&self, perm: &[Chip]) -> (u64, u64) {
        (self.count(perm), self.trials)
    }

    pub fn mode(&self) -> Option<&Entry> {
        self.entries.first()
    }

    pub fn support(&self) -> impl Iterator<Item = &[Chip]> {
        self.entries.iter().map(|e| e.perm.as_slice())
    }

    /// Appendix-style lines: `[p1, ..., pN], <inversions>, <count>`.
    pub fn write_listing<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.entries {
            let parts: Vec<String> = e.perm.iter().map(|c| c.to_string()).collect();
            writeln!(out, "[{}], {}, {}", parts.join(", "), e.inversions, e.count)?;
        }
        Ok(())
    }
}

/// Every ordered pair of root triples for 7 chips, finished by the wave
/// schedule: 35 first triples times 10 second triples.
pub fn exact_distribution_n3() -> Result<DistributionReport, SamplerError> {
    let root = NodeId::ROOT;
    let start = LabeledConfig::initial(7);
    let mut counts: HashMap<Vec<Chip>, u64> = HashMap::new();
    for first in triples(start.chips(root)) {
        let mid = start.apply_move(&FiringMove::labeled(root, first))?;
        for second in triples(mid.chips(root)) {
            let ready = mid.apply_move(&FiringMove::labeled(root, second))?;
            let (terminal, _) = endgame_schedule(&ready)?;
            let view = TerminalView::from_config(&terminal)?;
            *counts.entry(view.perm().to_vec()).or_default() += 1;
        }
    }
    Ok(DistributionReport::from_counts(
        3,
        "exhaustive root triples",
        true,
        None,
        counts,
    ))
}

fn triples(chips: &[Chip]) -> Vec<[Chip; 3]> {
    let m = chips.len();
    let mut out = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                out.push([chips[a], chips[b], chips[c]]);
            }
        }
    }
    out
}

/// The random stream for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// One uniform-random stabilization of `2^n - 1` chips drawing from `rng`.
pub fn random_terminal(n: u32, rng: &mut ChaCha8Rng) -> Result<TerminalView, SamplerError> {
    let mut c = LabeledConfig::initial((1usize << n) - 1);
    loop {
        let fireable = c.fireable_nodes();
        if fireable.is_empty() {
            break;
        }
        let mv = random_move(&c, &fireable, rng);
        c.fire(&mv)?;
    }
    Ok(TerminalView::from_config(&c)?)
}

/// `trials` independent stabilizations. Trial `t` uses block `t / BLOCK`,
/// so the counts depend only on `(n, trials, seed)`.
pub fn sample_distribution(
    n: u32,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<DistributionReport, SamplerError> {
    if trials == 0 {
        return Err(SamplerError::NoTrials);
    }
    if !(1..=10).contains(&n) {
        return Err(SamplerError::Height(n));
    }
    let blocks = trials.div_ceil(BLOCK);
    let run_block = |b: u64| -> Result<HashMap<Vec<Chip>, u64>, SamplerError> {
        let mut rng = block_rng(seed, b);
        let len = BLOCK.min(trials - b * BLOCK);
        let mut counts = HashMap::new();
        for _ in 0..len {
            let v = random_terminal(n, &mut rng)?;
            *counts.entry(v.perm().to_vec()).or_insert(0) += 1;
        }
        Ok(counts)
    };
    let merge = |mut a: HashMap<Vec<Chip>, u64>, b: HashMap<Vec<Chip>, u64>| {
        for (k, v) in b {
            *a.entry(k).or_insert(0) += v;
        }
        a
    };
    let counts = if workers <= 1 {
        (0..blocks)
            .map(run_block)
            .try_fold(HashMap::new(), |acc, r| r.map(|c| merge(acc, c)))?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| {
            (0..blocks)
                .into_par_iter()
                .map(run_block)
                .try_reduce(HashMap::new, |a, b| Ok(merge(a, b)))
        })?
    };
    Ok(DistributionReport::from_counts(
        n,
        RANDOM_MODEL_ID,
        false,
        Some(seed),
        counts,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InversionProfile {
    /// Inversion count to total count.
    pub totals: BTreeMap<u64, u64>,
    pub trials: u64,
    /// Most frequent 2-inversion entry beating the least frequent 1-inversion one.
    pub two_beats_one: Option<(Entry, Entry)>,
}

pub fn inversion_profile(r: &DistributionReport) -> InversionProfile {
    let mut totals = BTreeMap::new();
    for e in &r.entries {
        *totals.entry(e.inversions).or_insert(0) += e.count;
    }
    // entries are sorted by count descending
    let best_two = r.entries.iter().find(|e| e.inversions == 2);
    let worst_one = r.entries.iter().rev().find(|e| e.inversions == 1);
    let two_beats_one = match (best_two, worst_one) {
        (Some(a), Some(b)) if a.count > b.count => Some((a.clone(), b.clone())),
        _ => None,
    };
    InversionProfile {
        totals,
        trials: r.trials,
        two_beats_one,
    }
}

/// Whether a `count / trials` frequency lies in `[lo, hi]`, compared exactly
/// by cross-multiplying with `lo = lo_num / den` and `hi = hi_num / den`.
pub fn frequency_within(count: u64, trials: u64, lo_num: u64, hi_num: u64, den: u64) -> bool {
    let (c, t) = (count as u128 * den as u128, trials as u128);
    c >= lo_num as u128 * t && c <= hi_num as u128 * t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc(r: &DistributionReport) -> Vec<((Chip, Chip, Chip), u64)> {
        r.entries
            .iter()
            .map(|e| ((e.perm[2], e.perm[3], e.perm[4]), e.count))
            .collect()
    }

    #[test]
    fn exact_n3() {
        let r = exact_distribution_n3().unwrap();
        assert_eq!(r.trials, 350);
        assert_eq!(
            abc(&r),
            vec![
                ((3, 4, 5), 216),
                ((3, 5, 4), 54),
                ((4, 3, 5), 54),
                ((4, 5, 3), 12),
                ((5, 3, 4), 12),
                ((5, 4, 3), 2)
            ]
        );
        assert_eq!(r.mode().unwrap().perm, vec![1, 2, 3, 4, 5, 6, 7]);
    }

    // (5,4,3) only arises from firing {1,2,3} and then {5,6,7}
    #[test]
    fn reversed_middle_path() {
        let root = NodeId::ROOT;
        let c = LabeledConfig::initial(7)
            .apply_move(&FiringMove::labeled(root, [1, 2, 3]))
            .unwrap()
            .apply_move(&FiringMove::labeled(root, [5, 6, 7]))
            .unwrap();
        let (t, _) = endgame_schedule(&c).unwrap();
        assert_eq!(
            TerminalView::from_config(&t).unwrap().perm(),
            &[1, 2, 5, 4, 3, 6, 7]
        );
    }

    #[test]
    fn sampled_n3_matches_exact() {
        let trials = 70_000;
        let r = sample_distribution(3, trials, 11, 1).unwrap();
        let exact = exact_distribution_n3().unwrap();
        assert_eq!(r.entries.len(), 6);
        for e in &exact.entries {
            let p = e.count as f64 / 350.0;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            let got = r.count(&e.perm) as f64 / trials as f64;
            assert!((got - p).abs() < 4.0 * sigma, "{:?}: {got} vs {p}", e.perm);
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let a = sample_distribution(3, 25_000, 5, 1).unwrap();
        let b = sample_distribution(3, 25_000, 5, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_distribution(3, 25_000, 6, 1).unwrap());
    }

    #[test]
    fn small_profiles() {
        let r = sample_distribution(2, 10, 0, 1).unwrap();
        assert_eq!(r.entries.len(), 1);
        let p = inversion_profile(&r);
        assert_eq!(p.totals, BTreeMap::from([(0, 10)]));
        assert!(p.two_beats_one.is_none());
        assert!(matches!(
            sample_distribution(3, 0, 0, 1),
            Err(SamplerError::NoTrials)
        ));
    }

    #[test]
    fn exact_frequency_bounds() {
        assert!(frequency_within(38_450, 1_000_000, 34, 43, 1000));
        assert!(!frequency_within(33_999, 1_000_000, 34, 43, 1000));
        assert!(frequency_within(43_000, 1_000_000, 34, 43, 1000));
    }

    #[test]
    fn listing() {
        let r = exact_distribution_n3().unwrap();
        let mut buf = Vec::new();
        r.write_listing(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("[1, 2, 3, 4, 5, 6, 7], 0, 216"));
        assert_eq!(text.lines().count(), 6);
    }
}
