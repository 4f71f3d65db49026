//! Closed-form predictions for unlabeled dynamics and measured runs to
//! compare them against.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{
    stabilize, terminal_height, ChipConfig, EngineError, MoveLog, Strategy, UnlabeledConfig,
};
use crate::tree::level_nodes;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("chip count must be at least 1")]
    NoChips,
    #[error("height must be between 1 and 58, got {0}")]
    Height(u32),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Eulerian number with one descent: `2^m - (m + 1)`.
pub fn eulerian_k1(m: u32) -> u64 {
    assert!(m < 64, "eulerian_k1 overflows past m = 63");
    (1u64 << m) - (m as u64 + 1)
}

/// Chips per node on levels `1..=n` of the terminal tree for `n_chips`, read
/// off the binary expansion of `n_chips + 1`.
pub fn predicted_level_chips(n_chips: u64) -> Result<Vec<u64>, ShapeError> {
    if n_chips == 0 {
        return Err(ShapeError::NoChips);
    }
    let n = terminal_height(n_chips);
    let bits = n_chips + 1;
    Ok((0..n).map(|i| ((bits >> i) & 1) + 1).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirePrediction {
    /// Fires per node, indexed by level - 1.
    pub per_level: Vec<u64>,
    pub total: u64,
}

/// Per-node fire counts by level and the total move count for `2^n - 1` chips.
pub fn predicted_fires(n: u32) -> Result<FirePrediction, ShapeError> {
    if !(1..=58).contains(&n) {
        return Err(ShapeError::Height(n));
    }
    let per_level: Vec<u64> = (1..=n).map(|level| eulerian_k1(n - level + 1)).collect();
    // 2^n (n - 3) + n + 3, rearranged to stay unsigned
    let total = ((1u128 << n) * n as u128 + n as u128 + 3 - 3 * (1u128 << n)) as u64;
    debug_assert_eq!(
        total,
        per_level
            .iter()
            .enumerate()
            .map(|(i, f)| (1u64 << i) * f)
            .sum::<u64>()
    );
    Ok(FirePrediction { per_level, total })
}

/// Measured outcome of one stabilization.
///
/// Serialized key order: `total_chips`, `height`, `deepest_level_touched`,
/// `chips_per_level`, `chips_uniform`, `fires_per_level`, `fires_uniform`,
/// `total_moves`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub total_chips: u64,
    /// Deepest occupied level of the terminal configuration.
    pub height: u32,
    /// Deepest level that held a chip at any point of the run.
    pub deepest_level_touched: u32,
    /// Chips on the leftmost node of each level `1..=height`.
    pub chips_per_level: Vec<u64>,
    /// Every node of every level `1..=height` matches its leftmost node.
    pub chips_uniform: bool,
    pub fires_per_level: Vec<u64>,
    pub fires_uniform: bool,
    pub total_moves: u64,
}

impl ShapeReport {
    pub fn from_run<C: ChipConfig>(initial: &C, terminal: &C, log: &MoveLog) -> ShapeReport {
        let counts = terminal.counts();
        let height = counts.iter().map(|(n, _)| n.level()).max().unwrap_or(0);
        let start = initial
            .occupied_nodes()
            .iter()
            .map(|n| n.level())
            .max()
            .unwrap_or(0);
        let fired = log
            .fire_counts()
            .keys()
            .map(|n| n.level() + 1)
            .max()
            .unwrap_or(0);
        let mut chips_per_level = Vec::new();
        let mut fires_per_level = Vec::new();
        let mut chips_uniform = true;
        let mut fires_uniform = true;
        for level in 1..=height {
            let chips: Vec<u64> = level_nodes(level).map(|n| counts.count(n)).collect();
            let fires: Vec<u64> = level_nodes(level).map(|n| log.fire_count(n)).collect();
            chips_uniform &= chips.iter().all(|&c| c == chips[0]);
            fires_uniform &= fires.iter().all(|&f| f == fires[0]);
            chips_per_level.push(chips[0]);
            fires_per_level.push(fires[0]);
        }
        ShapeReport {
            total_chips: counts.total_chips() as u64,
            height,
            deepest_level_touched: start.max(fired),
            chips_per_level,
            chips_uniform,
            fires_per_level,
            fires_uniform,
            total_moves: log.len() as u64,
        }
    }
}

/// Stabilizes `n_chips` unlabeled chips from the root and tabulates the result.
pub fn measure_run(n_chips: u64, strategy: &Strategy) -> Result<ShapeReport, ShapeError> {
    if n_chips == 0 {
        return Err(ShapeError::NoChips);
    }
    let initial = UnlabeledConfig::initial(n_chips);
    let (terminal, log) = stabilize(&initial, strategy)?;
    Ok(ShapeReport::from_run(&initial, &terminal, &log))
}

/// Stabilizes any flavor and tabulates its unlabeled shadow.
pub fn measure<C: ChipConfig>(initial: &C, strategy: &Strategy) -> Result<ShapeReport, ShapeError> {
    let (terminal, log) = stabilize(initial, strategy)?;
    Ok(ShapeReport::from_run(initial, &terminal, &log))
}

/// Differences between a measured run and the closed forms, empty when they agree.
pub fn shape_mismatches(report: &ShapeReport) -> Vec<String> {
    let mut out = Vec::new();
    let n = report.total_chips;
    if n == 0 {
        return out;
    }
    let expected = predicted_level_chips(n).expect("nonzero");
    if report.height as usize != expected.len() {
        out.push(format!(
            "N={n}: height {} != {}",
            report.height,
            expected.len()
        ));
    }
    if report.deepest_level_touched > expected.len() as u32 {
        out.push(format!(
            "N={n}: a chip reached level {}",
            report.deepest_level_touched
        ));
    }
    if !report.chips_uniform {
        out.push(format!("N={n}: levels not uniform"));
    }
    if report.chips_per_level != expected {
        out.push(format!(
            "N={n}: chips {:?} != {:?}",
            report.chips_per_level, expected
        ));
    }
    if let Some(h) = crate::config::height_for_full_tree(n as usize) {
        let fires = predicted_fires(h).expect("height in range");
        if report.fires_per_level != fires.per_level || !report.fires_uniform {
            out.push(format!(
                "N={n}: fires {:?} != {:?}",
                report.fires_per_level, fires.per_level
            ));
        }
        if report.total_moves != fires.total {
            out.push(format!(
                "N={n}: moves {} != {}",
                report.total_moves, fires.total
            ));
        }
    }
    out
}

/// Sum over levels of nodes-per-level times fires-per-node.
pub fn fires_total(per_level: &[u64]) -> u64 {
    per_level
        .iter()
        .enumerate()
        .map(|(i, f)| (1u64 << i) * f)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Alternating-sum formula for Eulerian numbers, independent of the k = 1 closed form.
    fn eulerian_alternating(m: u32, k: u32) -> i128 {
        let binom = |n: u32, r: u32| -> i128 {
            (0..r).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
        };
        (0..=k)
            .map(|i| {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                sign * ((k + 1 - i) as i128).pow(m) * binom(m + 1, i)
            })
            .sum()
    }

    #[test]
    fn eulerian_values() {
        assert_eq!(eulerian_k1(1), 0);
        assert_eq!(eulerian_k1(3), 4);
        assert_eq!(eulerian_k1(0), 0);
        for m in 1..=20 {
            assert_eq!(eulerian_k1(m) as i128, eulerian_alternating(m, 1), "m={m}");
        }
        for m in 1..=30 {
            assert_eq!(eulerian_k1(m + 1), (1u64 << m) - 1 + eulerian_k1(m));
        }
    }

    #[test]
    fn level_chip_patterns() {
        assert_eq!(predicted_level_chips(4).unwrap(), vec![2, 1]);
        assert_eq!(predicted_level_chips(6).unwrap(), vec![2, 2]);
        for n in 1..=8 {
            let full = (1u64 << n) - 1;
            assert_eq!(predicted_level_chips(full).unwrap(), vec![1; n as usize]);
        }
        assert!(predicted_level_chips(0).is_err());
    }

    #[test]
    fn fire_predictions() {
        let p = predicted_fires(3).unwrap();
        assert_eq!(p.per_level, vec![4, 1, 0]);
        assert_eq!(p.total, 6);
        let p = predicted_fires(4).unwrap();
        assert_eq!(p.per_level, vec![11, 4, 1, 0]);
        assert_eq!(p.total, 23);
        let p = predicted_fires(1).unwrap();
        assert_eq!(p.per_level, vec![0]);
        assert_eq!(p.total, 0);
        for n in 1..=40 {
            let p = predicted_fires(n).unwrap();
            assert_eq!(fires_total(&p.per_level), p.total);
            assert!(p.per_level.windows(2).all(|w| w[0] >= w[1]));
        }
        assert!(predicted_fires(0).is_err());
    }

    #[test]
    fn measured_runs() {
        let r = measure_run(7, &Strategy::MirroredRecursive).unwrap();
        assert_eq!(r.height, 3);
        assert_eq!(r.chips_per_level, vec![1, 1, 1]);
        assert_eq!(r.fires_per_level, vec![4, 1, 0]);
        assert_eq!(r.total_moves, 6);
        let r = measure_run(15, &Strategy::UniformRandom { seed: 3 }).unwrap();
        assert_eq!(r.total_moves, 23);
        let r = measure_run(6, &Strategy::LowestNodeFirst).unwrap();
        assert_eq!(r.height, 2);
        assert_eq!(r.chips_per_level, vec![2, 2]);
        assert!(shape_mismatches(&r).is_empty());
        assert!(matches!(
            measure_run(0, &Strategy::LowestNodeFirst),
            Err(ShapeError::NoChips)
        ));
    }

    #[test]
    fn report_key_order() {
        let r = measure_run(3, &Strategy::LowestNodeFirst).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(
            json.starts_with(
                r#"{"total_chips":3,"height":2,"deepest_level_touched":2,"chips_per_level":[1,1]"#
            ),
            "{json}"
        );
    }
}
