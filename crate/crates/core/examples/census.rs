//! Enumerates every reachable terminal configuration for `2^n - 1` chips.
//!
//!     cargo run --release --example census -- 4 [--no-collapse]

use std::time::Instant;

use treefire::census::{enumerate_terminals, CensusOptions};

fn main() -> anyhow::Result<()> {
    let n: u32 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(3);
    let mut opts = CensusOptions::from_env();
    opts.collapse_endgame = !std::env::args().any(|a| a == "--no-collapse");
    let start = Instant::now();
    let r = enumerate_terminals(n, &opts)?;
    println!(
        "n = {n}: {} terminal configurations ({:.1?})",
        r.count,
        start.elapsed()
    );
    println!("search: {:?}", r.stats);
    println!("fixed chips: {:?}", r.fixed_chips());
    let labels = r.x_labels();
    let x = |v| {
        labels
            .iter()
            .position(|&u| u == v)
            .map(|i| i + 1)
            .unwrap_or(0)
    };
    print!("forced among free nodes:");
    for (u, v) in r.forced_free_pairs() {
        print!(" x{}<x{}", x(u), x(v));
    }
    println!();
    for (node, (lo, hi)) in &r.per_node_bounds {
        println!("node {node:>2}: min {lo:>2} max {hi:>2}");
    }
    Ok(())
}
