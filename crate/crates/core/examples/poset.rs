//! Builds the endgame poset, checks it, and writes a Hasse diagram.
//!
//!     cargo run --example poset -- 5 > p5.dot && neato -n -Tsvg p5.dot > p5.svg

use treefire::poset::{check_modular, check_symmetry, distributive_failure, find_m3, PosetPn};

fn main() -> anyhow::Result<()> {
    let n: u32 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(4);
    let p = PosetPn::build(n)?;
    let m = check_modular(&p);
    let s = check_symmetry(&p);
    eprintln!(
        "P_{n}: {} elements, rank sizes {:?}",
        p.len(),
        p.rank_sizes()
    );
    eprintln!(
        "graded {} / modular lattice {} / symmetric {}",
        m.graded(),
        m.passed(),
        s.passed()
    );
    eprintln!("top {} bottom {}", p.top(), p.bottom());
    if let Some(w) = find_m3(&p) {
        eprintln!("diamond {w}");
    }
    if let Some((a, b, c)) = distributive_failure(&p) {
        eprintln!("{a} meet ({b} join {c}) != ({a} meet {b}) join ({a} meet {c})");
    }
    print!("{}", p.to_dot());
    Ok(())
}
