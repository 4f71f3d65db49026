//! Runs random labeled stabilizations and checks the terminal against the
//! sorting properties: subtree extremes, parent adjacency, bottom parents,
//! and the move order of the endgame.
//!
//!     cargo run --release --example sorting -- 5 200

use treefire::labeled::{check_all, check_endgame_order, TerminalView};
use treefire::{stabilize, LabeledConfig, Strategy};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let runs: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);

    let (mut identity, mut violations) = (0, 0);
    for seed in 0..runs {
        let (t, log) = stabilize(
            &LabeledConfig::initial((1 << n) - 1),
            &Strategy::UniformRandom { seed },
        )?;
        let view = TerminalView::from_config(&t)?;
        identity += view.is_identity() as u64;
        for v in check_all(&view) {
            println!("seed {seed}: {v}");
            violations += 1;
        }
        for v in check_endgame_order(&log, n) {
            println!("seed {seed}: {v}");
            violations += 1;
        }
        if seed < 3 {
            println!(
                "seed {seed}: {} ({} inversions)",
                view.perm_string(),
                view.inversions()
            );
        }
    }
    println!("{runs} runs, {identity} sorted, {violations} violations");

    // a hand-made terminal that breaks parent adjacency
    let bad = TerminalView::from_perm(vec![1, 3, 2, 4, 5, 6, 7])?;
    for v in check_all(&bad) {
        println!("synthetic: {v}");
    }
    Ok(())
}
