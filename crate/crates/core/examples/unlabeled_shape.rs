//! Terminal shape and fire counts of unlabeled chip-firing against the
//! closed forms: level chips from the binary expansion, `2^m - m - 1` fires.
//!
//!     cargo run --example unlabeled_shape -- 6

use treefire::unlabeled::{measure_run, predicted_fires, predicted_level_chips, shape_mismatches};
use treefire::Strategy;

fn main() -> anyhow::Result<()> {
    let n: u32 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(6);
    let chips = (1u64 << n) - 1;

    for seed in 0..3 {
        let r = measure_run(chips, &Strategy::UniformRandom { seed })?;
        println!(
            "seed {seed}: {} moves, fires per level {:?}",
            r.total_moves, r.fires_per_level
        );
    }
    let want = predicted_fires(n)?;
    println!(
        "predicted: {} moves, fires per level {:?}",
        want.total, want.per_level
    );

    // shapes for a handful of chip counts that are not 2^n - 1
    for total in [1, 2, 10, 100, 333] {
        let r = measure_run(total, &Strategy::LowestNodeFirst)?;
        let bad = shape_mismatches(&r);
        println!(
            "N = {total:>3}: level chips {:?} (predicted {:?}){}",
            r.chips_per_level,
            predicted_level_chips(total)?,
            if bad.is_empty() {
                String::new()
            } else {
                format!(" MISMATCH {bad:?}")
            }
        );
    }
    Ok(())
}
