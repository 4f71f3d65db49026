use proptest::prelude::*;

use treefire::config::replay;
use treefire::{
    stabilize, ChipConfig, ColoredConfig, LabeledConfig, MoveLog, Strategy, UnlabeledConfig,
};

// waves only apply to full trees
fn strategy(pick: u8, seed: u64, chips: u64) -> Strategy {
    match pick % 4 {
        0 => Strategy::LowestNodeFirst,
        1 => Strategy::MirroredRecursive,
        2 if (chips + 1).is_power_of_two() => Strategy::WaveEndgame,
        2 => Strategy::LowestNodeFirst,
        _ => Strategy::UniformRandom { seed },
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn labeled_conserves_chips(n in prop_oneof![0usize..80, Just(31), Just(63)], pick in 0u8..4, seed in any::<u64>()) {
        let (t, _) = stabilize(&LabeledConfig::initial(n), &strategy(pick, seed, n as u64)).unwrap();
        prop_assert!(t.is_stable());
        let mut all: Vec<u32> = t.iter().flat_map(|(_, c)| c.to_vec()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (1..=n as u32).collect::<Vec<_>>());
        for (_, c) in t.iter() {
            prop_assert!(c.len() <= 2);
        }
    }

    #[test]
    fn replay_reproduces_terminal(n in 0usize..60, pick in 0u8..4, seed in any::<u64>()) {
        let start = LabeledConfig::initial(n);
        let s = strategy(pick, seed, n as u64);
        let (t, log) = stabilize(&start, &s).unwrap();
        prop_assert_eq!(&replay(&start, &log).unwrap(), &t);
        prop_assert_eq!(stabilize(&start, &s).unwrap(), (t, log));
    }

    #[test]
    fn logs_round_trip(n in 0u64..60, red in 0u64..30, seed in any::<u64>()) {
        let s = Strategy::UniformRandom { seed };
        let logs: Vec<MoveLog> = vec![
            stabilize(&UnlabeledConfig::initial(n), &s).unwrap().1,
            stabilize(&LabeledConfig::initial(n as usize), &s).unwrap().1,
            stabilize(&ColoredConfig::initial(red, n), &s).unwrap().1,
        ];
        for log in logs {
            prop_assert_eq!(MoveLog::parse(&log.to_text()).unwrap(), log);
        }
    }

    // labels and colors ride on top of the unlabeled game
    #[test]
    fn shadow_is_abelian(n in 0u64..100, red in 0u64..50, pick in 0u8..4, seed in any::<u64>()) {
        let s = strategy(pick, seed, n);
        let (base, base_log) = stabilize(&UnlabeledConfig::initial(n), &Strategy::LowestNodeFirst).unwrap();
        let (l, l_log) = stabilize(&LabeledConfig::initial(n as usize), &s).unwrap();
        let (c, c_log) = stabilize(&ColoredConfig::initial(red.min(n), n - red.min(n)), &s).unwrap();
        prop_assert_eq!(&l.counts(), &base);
        prop_assert_eq!(&c.counts(), &base);
        prop_assert_eq!(l_log.len(), base_log.len());
        prop_assert_eq!(c_log.len(), base_log.len());
    }
}
