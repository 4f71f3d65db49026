//! Red/blue firing scripts and the 23-red, 40-blue counterexample to the
//! local search-tree property.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::config::{
    project_move, stabilize, threshold_color_projection, Chip, ChipConfig, ColorTriple,
    ColoredConfig, EngineError, FiringMove, LabeledConfig, MoveLog, Payload, Strategy,
};
use crate::labeled::{endgame_schedule, EndgameError};
use crate::tree::NodeId;

pub const SCRIPT1: &str = include_str!("../data/script1.txt");
pub const SCRIPT2: &str = include_str!("../data/script2.txt");
pub const SCRIPT1_SHA256: &str = "1785d3054504a4cb4108573b148ba0414464b2a7aa08b23e0aec1d8a150cad1a";
pub const SCRIPT2_SHA256: &str = "46e0f6017051850488118185fd8eef7713818cb757d8783fa13b34958f347c67";

pub const RED: u64 = 23;
pub const BLUE: u64 = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("line {line}, column {column}: {reason}")]
    Syntax {
        line: usize,
        column: usize,
        reason: String,
    },
    #[error("move {step} (line {line}) {mv}: {source}")]
    Step {
        step: usize,
        line: usize,
        mv: ScriptMove,
        source: EngineError,
    },
}

#[derive(Debug, Error)]
pub enum ColoredError {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Endgame(#[from] EndgameError),
    #[error("script checksum mismatch for {name}: {found}")]
    Checksum { name: &'static str, found: String },
}

/// One `[i,XYZ]` token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScriptMove {
    pub node: NodeId,
    pub colors: ColorTriple,
    /// 1-based source line.
    pub line: usize,
}

impl ScriptMove {
    pub fn firing(&self) -> FiringMove {
        FiringMove::colored(self.node, self.colors)
    }
}

impl fmt::Display for ScriptMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.node, self.colors)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiringScript {
    pub moves: Vec<ScriptMove>,
}

impl FiringScript {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// One token per line.
    pub fn to_text(&self) -> String {
        self.moves.iter().map(|m| format!("{m}\n")).collect()
    }

    pub fn truncated(&self, len: usize) -> FiringScript {
        FiringScript {
            moves: self.moves[..len.min(self.moves.len())].to_vec(),
        }
    }
}

const DECORATIONS: [&str; 5] = ["\\longrightarrow", "->", "→", "$", "\\\\"];

/// Parses `[i,XYZ]` tokens. Arrows, `$` and whitespace between tokens are
/// ignored; `#` starts a comment.
pub fn parse_script(text: &str) -> Result<FiringScript, ScriptError> {
    let mut moves = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut rest = body;
        while !rest.is_empty() {
            let column = body.len() - rest.len() + 1;
            let err = |reason: String| ScriptError::Syntax {
                line,
                column,
                reason,
            };
            if let Some(t) = rest.strip_prefix(char::is_whitespace) {
                rest = t;
                continue;
            }
            if let Some(d) = DECORATIONS.iter().find(|d| rest.starts_with(**d)) {
                rest = &rest[d.len()..];
                continue;
            }
            let Some(inner) = rest.strip_prefix('[') else {
                return Err(err(format!(
                    "unexpected {:?}",
                    rest.chars().next().unwrap_or(' ')
                )));
            };
            let close = inner.find(']').ok_or_else(|| err("unclosed '['".into()))?;
            let token = &inner[..close];
            let (node, colors) = token
                .split_once(',')
                .ok_or_else(|| err(format!("expected [i,XYZ], got [{token}]")))?;
            let node: u64 = node
                .trim()
                .parse()
                .map_err(|_| err(format!("bad node {:?}", node.trim())))?;
            let node = NodeId::new(node).map_err(|e| err(e.to_string()))?;
            let colors: ColorTriple = colors.trim().parse().map_err(|e: String| err(e))?;
            moves.push(ScriptMove { node, colors, line });
            rest = &inner[close + 1..];
        }
    }
    Ok(FiringScript { moves })
}

/// Applies the script move by move.
pub fn replay(
    script: &FiringScript,
    initial: &ColoredConfig,
) -> Result<ColoredConfig, ScriptError> {
    let mut c = initial.clone();
    for (step, m) in script.moves.iter().enumerate() {
        c.fire(&m.firing()).map_err(|source| ScriptError::Step {
            step: step + 1,
            line: m.line,
            mv: *m,
            source,
        })?;
    }
    Ok(c)
}

fn sha256_hex(text: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// The bundled scripts, checked against their recorded digests.
pub fn bundled_scripts() -> Result<(FiringScript, FiringScript), ColoredError> {
    for (name, text, want) in [
        ("script1", SCRIPT1, SCRIPT1_SHA256),
        ("script2", SCRIPT2, SCRIPT2_SHA256),
    ] {
        let found = sha256_hex(text);
        if found != want {
            return Err(ColoredError::Checksum { name, found });
        }
    }
    Ok((parse_script(SCRIPT1)?, parse_script(SCRIPT2)?))
}

/// `'R'` or `'B'` for the single chip at `node`, `'-'` if empty or mixed.
pub fn color_letter(c: &ColoredConfig, node: NodeId) -> char {
    match c.colors(node) {
        x if x.red == 1 && x.blue == 0 => 'R',
        x if x.red == 0 && x.blue == 1 => 'B',
        _ => '-',
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub script1_moves: usize,
    pub script2_moves: usize,
    pub endgame_moves: usize,
    /// Blue chips still at the root after the first script.
    pub blue_at_root_after_script1: u64,
    /// Colors at nodes 32, 16, 8, 4 of the terminal configuration.
    pub colors: [(u64, char); 4],
    /// Chips at nodes 4 and 8 when reds are 1..=23 and blues 24..=63.
    pub lifted: (Chip, Chip),
    pub passed: bool,
}

/// Replays both scripts from 23 red and 40 blue chips at the root, finishes
/// with the wave endgame, and checks nodes 32, 16, 4 end red and node 8 blue.
pub fn run_scripted_counterexample() -> Result<CounterexampleReport, ColoredError> {
    let (s1, s2) = bundled_scripts()?;
    let start = ColoredConfig::initial(RED, BLUE);
    let after1 = replay(&s1, &start)?;
    let before_endgame = replay(&s2, &after1)?;
    let (terminal, waves) = endgame_schedule(&before_endgame)?;

    let nodes = [32u64, 16, 8, 4];
    let colors = nodes.map(|i| (i, color_letter(&terminal, NodeId::new(i).expect("nonzero"))));

    let mut log = MoveLog::new();
    for m in s1.moves.iter().chain(&s2.moves) {
        log.push(m.firing());
    }
    log.extend(&waves);
    let lifted_terminal = lift(&log, (RED + BLUE) as usize, RED as usize)?;
    let chip = |i: u64| lifted_terminal.chips(NodeId::new(i).expect("nonzero"))[0];
    let lifted = (chip(4), chip(8));

    let passed = colors.map(|(_, c)| c) == ['R', 'R', 'B', 'R']
        && lifted.0 < lifted.1
        && threshold_color_projection(&lifted_terminal, RED as usize)? == terminal;
    Ok(CounterexampleReport {
        script1_moves: s1.len(),
        script2_moves: s2.len(),
        endgame_moves: waves.len(),
        blue_at_root_after_script1: after1.colors(NodeId::ROOT).blue,
        colors,
        lifted,
        passed,
    })
}

/// Labeled replay of a colored log from `total` chips at the root, labels
/// `1..=red` red and the rest blue. Each move takes the smallest labels of
/// each color at the node.
pub fn lift(log: &MoveLog, total: usize, red: usize) -> Result<LabeledConfig, EngineError> {
    let mut state = LabeledConfig::initial(total);
    for mv in log.moves() {
        let Payload::Colored(t) = mv.payload else {
            return Err(EngineError::FlavorMismatch {
                expected: "colored",
                got: mv.payload.flavor(),
            });
        };
        let here = state.chips(mv.node);
        let reds = here
            .iter()
            .filter(|&&x| x as usize <= red)
            .take(t.red() as usize);
        let blues = here
            .iter()
            .filter(|&&x| x as usize > red)
            .take(t.blue() as usize);
        let picked: Vec<Chip> = reds.chain(blues).copied().collect();
        if picked.len() != 3 {
            return Err(EngineError::IllegalMove {
                node: mv.node,
                payload: t.to_string(),
                reason: format!("lift found only {:?}", picked),
            });
        }
        let lifted = FiringMove::labeled(mv.node, [picked[0], picked[1], picked[2]]);
        state.fire(&lifted)?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConsistencyReport {
    pub runs: usize,
    pub failures: Vec<String>,
}

/// Runs labeled stabilizations of `2^n - 1` chips and projects each onto
/// colors at every threshold: every projected move must be legal and the
/// colored terminal must be the projection of the labeled terminal.
pub fn check_color_consistency(n: u32, seeds: &[u64], thresholds: &[usize]) -> ConsistencyReport {
    let size = (1usize << n) - 1;
    let mut report = ConsistencyReport::default();
    for &seed in seeds {
        let start = LabeledConfig::initial(size);
        let (terminal, log) = match stabilize(&start, &Strategy::UniformRandom { seed }) {
            Ok(r) => r,
            Err(e) => {
                report.failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        for &t in thresholds {
            report.runs += 1;
            let result = (|| -> Result<bool, EngineError> {
                let mut colored = threshold_color_projection(&start, t)?;
                for mv in log.moves() {
                    colored.fire(&project_move(mv, t).expect("labeled move"))?;
                }
                Ok(colored == threshold_color_projection(&terminal, t)?)
            })();
            match result {
                Ok(true) => {}
                Ok(false) => report
                    .failures
                    .push(format!("seed {seed}, t={t}: terminal colors differ")),
                Err(e) => report.failures.push(format!("seed {seed}, t={t}: {e}")),
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Colors;
    use crate::labeled::endgame_precondition;

    fn n(i: u64) -> NodeId {
        NodeId::new(i).unwrap()
    }

    #[test]
    fn parse_tokens() {
        let s = parse_script("[1,RRB]").unwrap();
        assert_eq!(
            (s.moves[0].node, s.moves[0].colors),
            (n(1), ColorTriple::RRB)
        );
        let s = parse_script("$[12,RBB]$ $\\longrightarrow$ [3,BRB] -> # note\n[2, BBB]").unwrap();
        let got: Vec<(u64, ColorTriple)> =
            s.moves.iter().map(|m| (m.node.index(), m.colors)).collect();
        assert_eq!(
            got,
            vec![
                (12, ColorTriple::RBB),
                (3, ColorTriple::RBB),
                (2, ColorTriple::BBB)
            ]
        );
        assert_eq!(s.moves[2].line, 2);
        assert_eq!(parse_script(&s.to_text()).unwrap().to_text(), s.to_text());
        assert!(parse_script("").unwrap().is_empty());
    }

    #[test]
    fn parse_errors() {
        let e = parse_script("[1,RRR]\n  [1,RGB]").unwrap_err();
        assert!(
            matches!(
                e,
                ScriptError::Syntax {
                    line: 2,
                    column: 3,
                    ..
                }
            ),
            "{e}"
        );
        assert!(parse_script("[0,RRR]").is_err());
        assert!(parse_script("[1,RR]").is_err());
        assert!(parse_script("[1,RRRR]").is_err());
        assert!(parse_script("[1 RRR]").is_err());
        assert!(parse_script("[1,RRR").is_err());
        assert!(parse_script("x[1,RRR]").is_err());
    }

    #[test]
    fn routing_rules() {
        for (t, left, right, up) in [
            (ColorTriple::RRR, 'R', 'R', 'R'),
            (ColorTriple::RRB, 'R', 'B', 'R'),
            (ColorTriple::RBB, 'R', 'B', 'B'),
            (ColorTriple::BBB, 'B', 'B', 'B'),
        ] {
            let mut c = ColoredConfig::from_colors([(
                n(2),
                Colors {
                    red: t.red(),
                    blue: t.blue(),
                },
            )]);
            c.fire(&FiringMove::colored(n(2), t)).unwrap();
            assert_eq!(
                (
                    color_letter(&c, n(4)),
                    color_letter(&c, n(5)),
                    color_letter(&c, n(1))
                ),
                (left, right, up),
                "{t}"
            );
        }
    }

    #[test]
    fn bundled_scripts_intact() {
        let (s1, s2) = bundled_scripts().unwrap();
        assert_eq!(s1.len(), 40);
        assert!(s1.moves.iter().all(|m| m.colors == ColorTriple::RRR));
        assert_eq!(s2.len(), 104);
        assert_eq!(sha256_hex(SCRIPT1), SCRIPT1_SHA256);
    }

    #[test]
    fn replay_empty_and_illegal() {
        let start = ColoredConfig::initial(RED, BLUE);
        assert_eq!(replay(&FiringScript::default(), &start).unwrap(), start);
        let bad = parse_script("[1,RRR]\n[2,BBB]").unwrap();
        match replay(&bad, &start).unwrap_err() {
            ScriptError::Step { step, line, .. } => assert_eq!((step, line), (2, 2)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn counterexample() {
        let r = run_scripted_counterexample().unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.colors, [(32, 'R'), (16, 'R'), (8, 'B'), (4, 'R')]);
        assert_eq!(r.blue_at_root_after_script1, 40);
        assert_eq!(r.endgame_moves, 57);
        assert!(r.lifted.0 <= 23 && r.lifted.1 > 23);
    }

    #[test]
    fn truncated_script_misses_endgame() {
        let (s1, s2) = bundled_scripts().unwrap();
        let after1 = replay(&s1, &ColoredConfig::initial(RED, BLUE)).unwrap();
        let short = replay(&s2.truncated(s2.len() - 1), &after1).unwrap();
        assert!(matches!(
            endgame_precondition(&short),
            Err(EndgameError::Precondition { .. })
        ));
        assert!(endgame_schedule(&short).is_err());
    }

    #[test]
    fn colorings_are_consistent() {
        let r = check_color_consistency(4, &(0..25).collect::<Vec<_>>(), &[1, 7, 14, 15]);
        assert_eq!(r.runs, 100);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        let r = check_color_consistency(5, &[1, 2], &[23]);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
    }
}
