use slice_integrity::adapters::Verdict;
use slice_integrity::harness::{run_scenario, run_scenario_in, Mode, ScenarioConfig, Transcript, CHAIN_FILE};
use slice_integrity::ledger::ChainSnapshot;

const GOLDEN: &str = include_str!("fixtures/default_transcript.jsonl");

#[test]
fn default_run_matches_golden_transcript() {
    let t = run_scenario(&ScenarioConfig::default()).unwrap();
    assert_eq!(t.to_jsonl(), GOLDEN);
    assert_eq!(Transcript::from_jsonl(GOLDEN).unwrap(), t);
}

#[test]
fn live_mode_is_verdict_equivalent() {
    let det = run_scenario(&ScenarioConfig::default()).unwrap();
    let live = run_scenario(&ScenarioConfig { mode: Mode::Live, tick_ms: 20, ..Default::default() }).unwrap();
    assert_eq!(live.verdicts(), det.verdicts());
    assert_eq!(live.log_lines(), det.log_lines());
    assert!(live.entries.windows(2).all(|w| w[0].tick <= w[1].tick));
}

#[test]
fn state_dir_holds_the_chain() {
    let dir = tempfile::tempdir().unwrap();
    let t = run_scenario_in(&ScenarioConfig::default(), Some(dir.path())).unwrap();
    assert_eq!(t.verdicts(), vec![Verdict::Verified, Verdict::Corrupted]);
    let chain: ChainSnapshot = serde_json::from_slice(&std::fs::read(dir.path().join(CHAIN_FILE)).unwrap()).unwrap();
    let fulfills = chain
        .blocks
        .iter()
        .flat_map(|b| &b.transactions)
        .filter(|s| s.status.is_success() && s.tx.call.as_ref().is_some_and(|c| c.function == "fulfill"))
        .count();
    assert_eq!(fulfills, 1);
    assert!(dir.path().join("store").is_dir());

    // reusing the directory collides with the tenant created last time
    assert!(run_scenario_in(&ScenarioConfig::default(), Some(dir.path())).is_err());
}

#[test]
fn other_slice_and_interval() {
    let cfg = ScenarioConfig {
        slice_id: "0x2a".into(),
        cron_interval_ticks: 3,
        quantum_initial: 7,
        quantum_tampered: 8,
        ..Default::default()
    };
    let t = run_scenario(&cfg).unwrap();
    assert_eq!(t.reports.iter().map(|r| r.checked_at).collect::<Vec<_>>(), vec![3, 6]);
    assert!(t.log_lines()[1].ends_with("/slices/0x2a corrompida!"));
}
