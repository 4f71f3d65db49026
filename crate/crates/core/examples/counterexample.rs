//! Replays the two bundled firing scripts on 23 red and 40 blue chips and
//! shows that the colored game does not sort.
//!
//!     cargo run --example counterexample

use treefire::colored::{bundled_scripts, run_scripted_counterexample};

fn main() -> anyhow::Result<()> {
    let (s1, s2) = bundled_scripts()?;
    println!("scripts: {} + {} moves", s1.len(), s2.len());
    let r = run_scripted_counterexample()?;
    println!(
        "blue chips at the root after the first script: {}",
        r.blue_at_root_after_script1
    );
    println!("endgame: {} moves", r.endgame_moves);
    for (node, c) in r.colors {
        println!("node {node:>2}: {c}");
    }
    println!(
        "labeled lift: node 4 holds {}, node 8 holds {}",
        r.lifted.0, r.lifted.1
    );
    println!(
        "{}",
        if r.passed {
            "not sorted, as expected"
        } else {
            "unexpected outcome"
        }
    );
    Ok(())
}
