//! Exact distribution for 7 chips, then a seeded sample for larger trees.
//!
//!     cargo run --release --example distribution -- 4 100000 [seed] [workers]

use treefire::sampler::{exact_distribution_n3, inversion_profile, sample_distribution};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    let trials: u64 = args
        .next()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(100_000);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let workers: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let exact = exact_distribution_n3()?;
    println!("exact, out of {}:", exact.trials);
    exact.write_listing(std::io::stdout())?;

    let r = sample_distribution(n, trials, seed, workers)?;
    println!(
        "\nn = {n}, {trials} trials, seed {seed}: {} distinct terminals",
        r.entries.len()
    );
    for e in r.entries.iter().take(8) {
        println!(
            "{:?}, {}, {:.5}",
            e.perm,
            e.inversions,
            e.count as f64 / trials as f64
        );
    }
    let p = inversion_profile(&r);
    println!("by inversions: {:?}", p.totals);
    if let Some((two, one)) = p.two_beats_one {
        println!(
            "{:?} (2 inversions, {}) beats {:?} (1 inversion, {})",
            two.perm, two.count, one.perm, one.count
        );
    }
    Ok(())
}
