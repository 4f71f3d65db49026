//! Stabilizes `N` labeled chips from the root under each strategy and prints
//! the terminal configuration level by level.
//!
//!     cargo run --example simulate -- 15 [seed]

use treefire::tree::level_nodes;
use treefire::{stabilize, LabeledConfig, Strategy};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let chips: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(15);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

    for strategy in [
        Strategy::LowestNodeFirst,
        Strategy::MirroredRecursive,
        Strategy::WaveEndgame,
        Strategy::UniformRandom { seed },
    ] {
        let (t, log) = stabilize(&LabeledConfig::initial(chips), &strategy)?;
        println!("{} ({} moves)", strategy.name(), log.len());
        let deepest = t.iter().map(|(n, _)| n.level()).max().unwrap_or(0);
        for level in 1..=deepest {
            let row: Vec<String> = level_nodes(level)
                .map(|node| {
                    let c = t.chips(node);
                    if c.is_empty() {
                        ".".into()
                    } else {
                        format!("{c:?}")
                    }
                })
                .collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
