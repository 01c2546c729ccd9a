use gencert::synth::{self, CoverageConfig, MixtureSpec, PartitionKind};

fn floor(level: f64, trials: usize) -> f64 {
    level - 3.0 * (level * (1.0 - level) / trials as f64).sqrt()
}

#[test]
fn gap_shrinks_as_n_grows() {
    let spec = MixtureSpec::symmetric_gaussians();
    let gaps: Vec<f64> = [500, 2000, 8000]
        .iter()
        .map(|&n| {
            let mut cfg = CoverageConfig::new(n, 20, 20, 10.0);
            cfg.seed = 3;
            synth::coverage_run(&spec, &cfg).unwrap().summary.mean_gap
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn coverage_holds_for_interval_cells_and_known_masses() {
    let spec = MixtureSpec::symmetric_gaussians();
    let mut cfg = CoverageConfig::new(2000, 100, 20, 30.0);
    cfg.partition = PartitionKind::Intervals;
    cfg.general = true;
    cfg.seed = 8;
    let r = synth::coverage_run(&spec, &cfg).unwrap();
    assert!(r.summary.coverage_fraction >= floor(r.guarantee, 100));
    let general = r.general.expect("general summary");
    assert!(general.coverage_fraction >= floor(r.guarantee, 100));
    for t in &r.trials {
        assert!(t.general_bound.unwrap() >= t.train_loss);
    }
}

#[test]
fn trained_thresholds_still_cover() {
    let spec = MixtureSpec::symmetric_gaussians();
    let mut cfg = CoverageConfig::new(1000, 50, 10, 20.0);
    cfg.train_threshold = true;
    let r = synth::coverage_run(&spec, &cfg).unwrap();
    assert!(r.truth.is_none());
    assert!(r.summary.coverage_fraction >= floor(r.guarantee, 50));
}
