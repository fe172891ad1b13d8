mod common;

use csf_core::bench::BenchmarkBundle;
use csf_core::driver::{run_csf, CsfConfig, Legalizer, Mode};
use csf_core::model::generate_outline;
use csf_core::objective::{boundary_violation, is_legal, total_overlap};
use csf_core::preset::Preset;
use csf_core::report::{RunInfo, RunRecord};

fn record(
    nl: &csf_core::model::Netlist,
    o: &csf_core::model::Outline,
    cfg: &CsfConfig,
) -> RunRecord {
    let r = run_csf(nl, o, cfg).unwrap();
    RunRecord::new(
        nl,
        &r.placement,
        o,
        RunInfo {
            seed: cfg.seed,
            mode: cfg.mode.to_string(),
            legalizer: cfg.legalizer.to_string(),
            hpwl: r.hpwl,
            legal: r.legal,
            attempts: r.attempts,
            t_g: r.t_g,
            t_l: r.t_l,
            t_w: r.t_w,
        },
    )
    .unwrap()
}

#[test]
fn bundle_counts_survive_the_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let texts = common::synthetic(40, 12, 70, 300.0, 5);
    let b = common::write_bundle(dir.path(), "syn", &texts);
    let loaded = b.load().unwrap();
    assert_eq!(loaded.netlist.num_modules(), 40);
    assert_eq!(loaded.netlist.terminals.len(), 12);
    assert_eq!(loaded.netlist.nets.len(), 70);
    assert_eq!(loaded.netlist.name, "syn");
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let b = BenchmarkBundle::in_dir(dir.path(), "absent");
    assert!(matches!(b.load(), Err(csf_core::Error::Io { .. })));
}

#[test]
fn qq_legalizes_a_roomy_instance() {
    let nl = common::load(30, 10, 50, 250.0, 2);
    let o = generate_outline(nl.total_area(), 1.0, 0.6).unwrap();
    let cfg = CsfConfig::new(Preset::gsrc(), 1);
    let r = run_csf(&nl, &o, &cfg).unwrap();
    assert!(r.legal);
    assert_eq!(total_overlap(&r.placement, &nl), 0.0);
    assert_eq!(boundary_violation(&r.placement, &nl, &o), 0.0);
    assert!(r.t_w >= r.t_g + r.t_l);
}

#[test]
fn fixed_scale_modes_report_consistently() {
    let nl = common::load(20, 6, 30, 200.0, 2);
    let o = generate_outline(nl.total_area(), 1.0, 0.6).unwrap();
    for mode in [Mode::Cc, Mode::Qc] {
        let mut cfg = CsfConfig::new(Preset::gsrc(), 1);
        cfg.mode = mode;
        cfg.t_max = 2;
        let r = run_csf(&nl, &o, &cfg).unwrap();
        assert_eq!(r.legal, is_legal(&r.placement, &nl, &o));
        assert!(r.attempts >= 1 && r.attempts <= 2);
        assert!(r.t_w >= r.t_g + r.t_l);
    }
}

#[test]
fn every_graph_legalizer_returns_legal_layouts() {
    let nl = common::load(30, 10, 50, 250.0, 3);
    let o = generate_outline(nl.total_area(), 1.0, 0.6).unwrap();
    for leg in [Legalizer::LaCg, Legalizer::IlaCgm, Legalizer::IlaCgs] {
        let mut cfg = CsfConfig::new(Preset::gsrc(), 4);
        cfg.legalizer = leg;
        let r = run_csf(&nl, &o, &cfg).unwrap();
        assert!(r.legal, "{leg}");
        assert!(is_legal(&r.placement, &nl, &o));
    }
}

#[test]
fn identical_seeds_give_identical_json() {
    let nl = common::load(25, 8, 40, 220.0, 9);
    let o = generate_outline(nl.total_area(), 1.0, 0.5).unwrap();
    let cfg = CsfConfig::new(Preset::gsrc(), 77);
    let a = record(&nl, &o, &cfg).without_timings().to_json().unwrap();
    let b = record(&nl, &o, &cfg).without_timings().to_json().unwrap();
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.seed = 78;
    let c = record(&nl, &o, &other).without_timings().to_json().unwrap();
    assert_ne!(a, c);
}
