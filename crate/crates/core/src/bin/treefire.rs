use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use treefire::census::{enumerate_terminals, CensusError, CensusOptions};
use treefire::colored::run_scripted_counterexample;
use treefire::config::RANDOM_MODEL_ID;
use treefire::manifest::RunManifest;
use treefire::poset::{check_modular, check_symmetry, f_infinity, find_m3, PosetPn};
use treefire::sampler::{inversion_profile, sample_distribution};
use treefire::verify::{self, Suite};
use treefire::{stabilize, ColoredConfig, LabeledConfig, Strategy, UnlabeledConfig};

#[derive(Parser)]
#[command(
    name = "treefire",
    version,
    about = "Chip-firing on the binary tree with a root self-loop"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flavor {
    Labeled,
    Unlabeled,
    Colored,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    #[value(alias = "lowest_node_first")]
    Lowest,
    #[value(alias = "mirrored_recursive")]
    Mirrored,
    #[value(alias = "wave_endgame")]
    Waves,
    #[value(alias = "uniform_random")]
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PosetCheck {
    All,
    Modular,
    Symmetry,
    M3,
    Ranks,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Unlabeled,
    Labeled,
    Poset,
    Colored,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stabilize chips placed at the root.
    Simulate {
        #[arg(long)]
        chips: u64,
        #[arg(long, value_enum, default_value_t = Flavor::Labeled)]
        flavor: Flavor,
        #[arg(long, value_enum, default_value_t = StrategyArg::Lowest)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Red chips for the colored flavor (the rest are blue); defaults to half.
        #[arg(long)]
        red: Option<u64>,
        /// Write the move log here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write the terminal configuration here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate every reachable terminal configuration of 2^n - 1 chips.
    Enumerate {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Search through the endgame instead of finishing it with waves.
        #[arg(long)]
        no_endgame_collapse: bool,
        /// Permit n above 4.
        #[arg(long)]
        allow_large_n: bool,
    },
    /// Sample terminal configurations under uniform random firing.
    Sample {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Build and check the endgame poset.
    Poset {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = PosetCheck::All)]
        check: PosetCheck,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Replay a scripted counterexample.
    Counterexample {
        #[arg(long, value_parser = ["5.2"])]
        id: String,
    },
    /// Run invariant suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

/// A completed command that nevertheless found a failing check.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct CheckFailed(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if matches!(
                e.downcast_ref::<CensusError>(),
                Some(CensusError::Budget { .. })
            ) {
                ExitCode::from(4)
            } else if e.downcast_ref::<CheckFailed>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn write(path: &PathBuf, manifest: &RunManifest, body: &str) -> Result<()> {
    fs::write(path, manifest.render(body)).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    let json_out = cli.format == Format::Json;
    match cli.cmd {
        Cmd::Simulate {
            chips,
            flavor,
            strategy,
            seed,
            red,
            log,
            out,
        } => {
            let name = match strategy {
                StrategyArg::Lowest => "lowest",
                StrategyArg::Mirrored => "mirrored",
                StrategyArg::Waves => "waves",
                StrategyArg::Random => "random",
            };
            let strat = Strategy::from_name(name, seed).expect("known strategy");
            let (terminal, moves) = match flavor {
                Flavor::Labeled => {
                    let (t, l) = stabilize(&LabeledConfig::initial(chips as usize), &strat)?;
                    (t.iter().map(|(n, c)| (n, join(c))).collect::<Vec<_>>(), l)
                }
                Flavor::Unlabeled => {
                    let (t, l) = stabilize(&UnlabeledConfig::initial(chips), &strat)?;
                    (t.iter().map(|(n, c)| (n, c.to_string())).collect(), l)
                }
                Flavor::Colored => {
                    let red = red.unwrap_or(chips / 2);
                    if red > chips {
                        bail!("--red {red} exceeds --chips {chips}");
                    }
                    let (t, l) = stabilize(&ColoredConfig::initial(red, chips - red), &strat)?;
                    (
                        t.iter()
                            .map(|(n, c)| (n, format!("{}R{}B", c.red, c.blue)))
                            .collect(),
                        l,
                    )
                }
            };
            let manifest = RunManifest::new("simulate")
                .param("chips", chips)
                .param("flavor", flavor_name(flavor))
                .param("strategy", strat.name())
                .param("red", red)
                .seed(seed);
            let manifest = if matches!(strategy, StrategyArg::Random) {
                manifest.model(RANDOM_MODEL_ID)
            } else {
                manifest
            };
            let body: String = terminal
                .iter()
                .map(|(n, p)| format!("{n}: {p}\n"))
                .collect();
            if let Some(path) = &log {
                write(path, &manifest, &moves.to_text())?;
            }
            if let Some(path) = &out {
                write(path, &manifest, &body)?;
            }
            if json_out {
                let nodes: serde_json::Map<String, serde_json::Value> = terminal
                    .iter()
                    .map(|(n, p)| (n.to_string(), json!(p)))
                    .collect();
                println!("{}", json!({ "moves": moves.len(), "terminal": nodes }));
            } else {
                print!("{body}");
                println!("{} moves", moves.len());
            }
        }
        Cmd::Enumerate {
            n,
            out,
            parallel,
            no_endgame_collapse,
            allow_large_n,
        } => {
            let opts = CensusOptions {
                collapse_endgame: !no_endgame_collapse,
                workers: parallel.max(1),
                allow_large_n,
                ..CensusOptions::from_env()
            };
            let r = enumerate_terminals(n, &opts)?;
            if let Some(path) = &out {
                let mut body = Vec::new();
                r.write_listing(&mut body)?;
                let manifest = RunManifest::new("enumerate")
                    .param("n", n)
                    .param("endgame_collapse", !no_endgame_collapse);
                write(path, &manifest, &String::from_utf8(body)?)?;
            }
            if json_out {
                let bounds: Vec<_> = r
                    .per_node_bounds
                    .iter()
                    .map(|(k, (lo, hi))| json!([k, lo, hi]))
                    .collect();
                println!(
                    "{}",
                    json!({ "n": n, "count": r.count, "stats": r.stats, "bounds": bounds })
                );
            } else {
                println!("{}", r.count);
            }
        }
        Cmd::Sample {
            n,
            trials,
            seed,
            out,
            parallel,
        } => {
            let r = sample_distribution(n, trials, seed, parallel.max(1))?;
            if let Some(path) = &out {
                let mut body = Vec::new();
                r.write_listing(&mut body)?;
                let manifest = RunManifest::new("sample")
                    .param("n", n)
                    .param("trials", trials)
                    .seed(seed)
                    .model(RANDOM_MODEL_ID);
                write(path, &manifest, &String::from_utf8(body)?)?;
            }
            let profile = inversion_profile(&r);
            if json_out {
                let top: Vec<_> = r.entries.iter().take(10).collect();
                println!(
                    "{}",
                    json!({ "n": n, "trials": trials, "seed": seed, "model": r.model, "distinct": r.entries.len(), "top": top, "inversions": profile.totals })
                );
            } else {
                println!(
                    "{} distinct terminals over {} trials",
                    r.entries.len(),
                    r.trials
                );
                for e in r.entries.iter().take(10) {
                    println!("{:?}, {}, {}", e.perm, e.inversions, e.count);
                }
                if let Some((a, b)) = &profile.two_beats_one {
                    println!(
                        "2-inversion {:?} ({}) outranks 1-inversion {:?} ({})",
                        a.perm, a.count, b.perm, b.count
                    );
                }
            }
        }
        Cmd::Poset { n, check, dot } => {
            let p = PosetPn::build(n)?;
            let mut lines = vec![format!(
                "P_{n}: {} elements, top rank {}",
                p.len(),
                2 * n - 3
            )];
            let mut ok = true;
            if matches!(check, PosetCheck::All | PosetCheck::Modular) {
                let m = check_modular(&p);
                ok &= m.passed();
                lines.push(format!(
                    "graded: {}, lattice violations: {}, modular violations: {}",
                    m.graded(),
                    m.lattice_violations.len(),
                    m.modular_violations.len()
                ));
            }
            if matches!(check, PosetCheck::All | PosetCheck::Symmetry) {
                let s = check_symmetry(&p);
                ok &= s.passed();
                lines.push(format!(
                    "vertical involution: {}, horizontal anti-automorphism: {}",
                    s.vertical_failures.is_empty(),
                    s.horizontal_failures.is_empty()
                ));
            }
            if matches!(check, PosetCheck::All | PosetCheck::M3) {
                match find_m3(&p) {
                    Some(w) => lines.push(format!("M3: {w}")),
                    None => lines.push("M3: none".into()),
                }
            }
            if matches!(check, PosetCheck::All | PosetCheck::Ranks) {
                let sizes = p.rank_sizes();
                lines.push(format!("rank sizes: {sizes:?}"));
                let expected: Vec<u64> = (1..n).map(f_infinity).collect();
                ok &= sizes[..expected.len()] == expected[..];
            }
            if let Some(path) = &dot {
                write(path, &RunManifest::new("poset").param("n", n), &p.to_dot())?;
            }
            if json_out {
                println!("{}", json!({ "n": n, "passed": ok, "report": lines }));
            } else {
                for l in &lines {
                    println!("{l}");
                }
            }
            if !ok {
                return Err(CheckFailed(format!("P_{n} failed a check")).into());
            }
        }
        Cmd::Counterexample { id: _ } => {
            let r = run_scripted_counterexample()?;
            if json_out {
                println!("{}", serde_json::to_string(&r)?);
            } else {
                let colors: Vec<String> = r
                    .colors
                    .iter()
                    .map(|(n, c)| format!("node {n}={c}"))
                    .collect();
                println!("{}", colors.join(", "));
                println!(
                    "labeled lift: chip at node 4 = {}, chip at node 8 = {}",
                    r.lifted.0, r.lifted.1
                );
                println!("{}", if r.passed { "PASS" } else { "FAIL" });
            }
            if !r.passed {
                return Err(CheckFailed("verdict mismatch".into()).into());
            }
        }
        Cmd::Verify { suite } => {
            let suite = match suite {
                SuiteArg::All => Suite::All,
                SuiteArg::Unlabeled => Suite::Unlabeled,
                SuiteArg::Labeled => Suite::Labeled,
                SuiteArg::Poset => Suite::Poset,
                SuiteArg::Colored => Suite::Colored,
            };
            let checks = verify::run(suite);
            for c in &checks {
                if json_out {
                    println!("{}", serde_json::to_string(c)?);
                } else {
                    println!("{c}");
                }
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CheckFailed(format!("{failed} checks failed")).into());
            }
        }
    }
    Ok(())
}

fn join(chips: &[u32]) -> String {
    chips
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn flavor_name(f: Flavor) -> &'static str {
    match f {
        Flavor::Labeled => "labeled",
        Flavor::Unlabeled => "unlabeled",
        Flavor::Colored => "colored",
    }
}
