//! Invariant suites behind `treefire verify`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::census::{enumerate_terminals, CensusOptions};
use crate::colored::{check_color_consistency, run_scripted_counterexample};
use crate::config::{
    replay, stabilize, ChipConfig, LabeledConfig, MoveLog, Strategy, UnlabeledConfig,
};
use crate::labeled::{
    check_all, check_endgame_order, endgame_confluent, endgame_precondition, TerminalView,
};
use crate::poset::{
    check_modular, check_symmetry, consistency_with_dynamics, f_infinity, find_m3, PosetPn,
};
use crate::sampler::exact_distribution_n3;
use crate::unlabeled::{measure_run, predicted_fires, shape_mismatches};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Unlabeled,
    Labeled,
    Poset,
    Colored,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "all" => Suite::All,
            "unlabeled" => Suite::Unlabeled,
            "labeled" => Suite::Labeled,
            "poset" => Suite::Poset,
            "colored" => Suite::Colored,
            _ => return Err(format!("unknown suite {s:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{mark} {}/{}", self.suite, self.name)?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

struct Recorder {
    suite: &'static str,
    out: Vec<Check>,
}

impl Recorder {
    fn check(&mut self, name: impl Into<String>, failures: Vec<String>) {
        let passed = failures.is_empty();
        let detail = failures.into_iter().take(3).collect::<Vec<_>>().join("; ");
        self.out.push(Check {
            suite: self.suite,
            name: name.into(),
            passed,
            detail,
        });
    }
}

pub fn run(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::All => [
            Suite::Unlabeled,
            Suite::Labeled,
            Suite::Poset,
            Suite::Colored,
        ]
        .into_iter()
        .flat_map(run)
        .collect(),
        Suite::Unlabeled => unlabeled(),
        Suite::Labeled => labeled(),
        Suite::Poset => poset(),
        Suite::Colored => colored(),
    }
}

fn unlabeled() -> Vec<Check> {
    let mut r = Recorder {
        suite: "unlabeled",
        out: Vec::new(),
    };
    let mut bad = Vec::new();
    for n_chips in 1..=510 {
        match measure_run(n_chips, &Strategy::LowestNodeFirst) {
            Ok(rep) => bad.extend(shape_mismatches(&rep)),
            Err(e) => bad.push(format!("N={n_chips}: {e}")),
        }
    }
    r.check("terminal shape for N in 1..=510", bad);

    let mut bad = Vec::new();
    for n in 1..=8u32 {
        let want = predicted_fires(n).expect("small n");
        for seed in 0..5 {
            match measure_run((1 << n) - 1, &Strategy::UniformRandom { seed }) {
                Ok(rep)
                    if rep.total_moves == want.total && rep.fires_per_level == want.per_level => {}
                Ok(rep) => bad.push(format!("n={n} seed={seed}: {} moves", rep.total_moves)),
                Err(e) => bad.push(format!("n={n} seed={seed}: {e}")),
            }
        }
    }
    r.check("fire counts for n in 1..=8", bad);

    let mut bad = Vec::new();
    for strategy in [
        Strategy::LowestNodeFirst,
        Strategy::MirroredRecursive,
        Strategy::UniformRandom { seed: 9 },
    ] {
        let start = UnlabeledConfig::initial(100);
        match stabilize(&start, &strategy) {
            Ok((t, log)) => {
                if replay(&start, &log).as_ref() != Ok(&t) {
                    bad.push(format!("{}: replay differs", strategy.name()));
                }
                if MoveLog::parse(&log.to_text()).as_ref() != Ok(&log) {
                    bad.push(format!("{}: log text round trip differs", strategy.name()));
                }
            }
            Err(e) => bad.push(e.to_string()),
        }
    }
    r.check("replay and log round trip", bad);
    r.out
}

fn labeled() -> Vec<Check> {
    let mut r = Recorder {
        suite: "labeled",
        out: Vec::new(),
    };
    let mut bad = Vec::new();
    for n in 2..=6u32 {
        for seed in 0..40 {
            let start = LabeledConfig::initial((1 << n) - 1);
            let outcome = stabilize(&start, &Strategy::UniformRandom { seed })
                .map_err(|e| e.to_string())
                .and_then(|(t, log)| {
                    Ok((
                        TerminalView::from_config(&t).map_err(|e| e.to_string())?,
                        log,
                    ))
                });
            match outcome {
                Ok((view, log)) => {
                    bad.extend(
                        check_all(&view)
                            .iter()
                            .map(|v| format!("n={n} seed={seed}: {v}")),
                    );
                    bad.extend(
                        check_endgame_order(&log, n)
                            .iter()
                            .map(|v| format!("n={n} seed={seed}: {v}")),
                    );
                }
                Err(e) => bad.push(format!("n={n} seed={seed}: {e}")),
            }
        }
    }
    r.check("sorting checks and endgame order on random runs", bad);

    let mut bad = Vec::new();
    match enumerate_terminals(3, &CensusOptions::default()) {
        Ok(c) => {
            if c.count != 6 {
                bad.push(format!("{} terminals", c.count));
            }
            let fixed: Vec<(u64, u32)> = c
                .fixed_chips()
                .into_iter()
                .map(|(n, x)| (n.index(), x))
                .collect();
            if fixed != [(2, 2), (3, 6), (4, 1), (7, 7)] {
                bad.push(format!("fixed chips {fixed:?}"));
            }
            match exact_distribution_n3() {
                Ok(d)
                    if d.support()
                        .all(|p| c.terminals.iter().any(|t| t.perm() == p))
                        && d.entries.len() == 6 => {}
                Ok(_) => bad.push("exact distribution support differs from census".into()),
                Err(e) => bad.push(e.to_string()),
            }
        }
        Err(e) => bad.push(e.to_string()),
    }
    r.check("census and exact distribution at n = 3", bad);

    let mut bad = Vec::new();
    for n in 2..=3u32 {
        let (_, log) = stabilize(
            &LabeledConfig::initial((1 << n) - 1),
            &Strategy::WaveEndgame,
        )
        .expect("waves run");
        let moves: Vec<_> = log.moves().copied().collect();
        let mut state = LabeledConfig::initial((1 << n) - 1);
        for mv in &moves {
            if endgame_precondition(&state).is_ok() {
                break;
            }
            state.fire(mv).expect("replays");
        }
        match endgame_confluent(&state) {
            Ok(true) => {}
            Ok(false) => bad.push(format!("n={n}: several terminals")),
            Err(e) => bad.push(format!("n={n}: {e}")),
        }
    }
    r.check("endgame confluence for n <= 3", bad);
    r.out
}

fn poset() -> Vec<Check> {
    let mut r = Recorder {
        suite: "poset",
        out: Vec::new(),
    };
    for n in 2..=7u32 {
        let mut bad = Vec::new();
        let p = match PosetPn::build(n) {
            Ok(p) => p,
            Err(e) => {
                r.check(format!("P_{n}"), vec![e.to_string()]);
                continue;
            }
        };
        if p.len() as u64 != (1u64 << n) - (n as u64 + 1) {
            bad.push(format!("{} elements", p.len()));
        }
        let m = check_modular(&p);
        if !m.passed() || m.top_rank != 2 * n - 3 {
            bad.push(format!("modular/graded check failed: {m:?}"));
        }
        let s = check_symmetry(&p);
        bad.extend(s.vertical_failures);
        bad.extend(s.horizontal_failures);
        if find_m3(&p).is_some() != (n >= 4) {
            bad.push("diamond presence wrong".into());
        }
        let sizes = p.rank_sizes();
        for rank in 1..n {
            if sizes[rank as usize - 1] != f_infinity(rank) {
                bad.push(format!(
                    "rank {rank} has {} elements",
                    sizes[rank as usize - 1]
                ));
            }
        }
        if n <= 5 {
            let d = consistency_with_dynamics(&p, &(0..10).collect::<Vec<_>>());
            bad.extend(
                d.failures
                    .into_iter()
                    .map(|(s, e)| format!("seed {s}: {e}")),
            );
            bad.extend(d.wave_failures);
        }
        r.check(format!("P_{n}"), bad);
    }
    r.out
}

fn colored() -> Vec<Check> {
    let mut r = Recorder {
        suite: "colored",
        out: Vec::new(),
    };
    let bad = match run_scripted_counterexample() {
        Ok(rep) if rep.passed => Vec::new(),
        Ok(rep) => vec![format!("verdict failed: {rep:?}")],
        Err(e) => vec![e.to_string()],
    };
    r.check("scripted 23/40 counterexample", bad);
    let c = check_color_consistency(4, &(0..20).collect::<Vec<_>>(), &[1, 7, 14, 15]);
    r.check("threshold projections of labeled runs", c.failures);
    r.out
}
