use gencert::augment::{self, certify_aug, pair_stats};
use gencert::partition::FeatureTable;
use gencert::synth::{self, CoverageConfig, MixtureSpec};
use gencert::{Assignment, BoundParams, SampleTable};
use proptest::prelude::*;

fn table(losses: &[f64], cells: &[usize], prefix: &str) -> (SampleTable, Assignment) {
    let ids: Vec<String> = (0..losses.len()).map(|i| format!("{prefix}{i}")).collect();
    (
        SampleTable::new(ids.clone(), losses.to_vec()).unwrap(),
        Assignment::new(ids, cells.to_vec()).unwrap(),
    )
}

fn cell_losses(k: usize) -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    prop::collection::vec((0.0f64..=1.0, 0..k), 1..60).prop_map(|v| v.into_iter().unzip())
}

proptest! {
    #[test]
    fn sensitivity_is_symmetric((la, ca) in cell_losses(5), (lb, cb) in cell_losses(5)) {
        let (a, aa) = table(&la, &ca, "a");
        let (b, ab) = table(&lb, &cb, "b");
        let ab_stats = pair_stats(&a, &aa, &b, &ab, 5).unwrap();
        let ba_stats = pair_stats(&b, &ab, &a, &aa, 5).unwrap();
        for (x, y) in ab_stats.cells.iter().zip(&ba_stats.cells) {
            prop_assert!((x.eps_bar - y.eps_bar).abs() <= 1e-15);
            prop_assert!((0.0..=1.0).contains(&x.eps_bar));
        }
    }

    #[test]
    fn correction_vanishes_when_proportions_match(
        (lo, co) in cell_losses(4),
        reps in 1usize..4,
        noise in prop::collection::vec(0.0f64..=1.0, 240),
    ) {
        // every original cell replicated `reps` times with fresh losses
        let ca: Vec<usize> = co.iter().flat_map(|&c| std::iter::repeat_n(c, reps)).collect();
        let la: Vec<f64> = noise[..ca.len()].to_vec();
        let (o, oa) = table(&lo, &co, "o");
        let (a, aa) = table(&la, &ca, "a");
        let p = BoundParams::from_residual(4, 0.01, 1.0, 0.04, 1.0).unwrap();
        let cert = certify_aug(&o, &oa, &a, &aa, &p).unwrap();
        prop_assert_eq!(cert.correction, 0.0);
        prop_assert!(!cert.report.corrected);
        prop_assert_eq!(cert.report.main_part, Some(cert.pairs.eps_bar + cert.aug_loss));
    }
}

#[test]
fn transform_noise_has_the_requested_variance() {
    let n = 250_000;
    let x = FeatureTable::from_flat((0..n).map(|i| i.to_string()).collect(), 4, vec![0.5; n * 4]).unwrap();
    let y = augment::gaussian_transform(&x, 0.15, 42).unwrap();
    let d: Vec<f64> = y.data().iter().zip(x.data()).map(|(a, b)| a - b).collect();
    assert_eq!(d.len(), 1_000_000);
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
    assert!((var - 0.0225).abs() <= 2e-4, "variance {var}");
}

#[test]
fn main_part_rises_with_noise_on_average() {
    let spec = MixtureSpec::symmetric_gaussians();
    let mut cfg = CoverageConfig::new(2000, 1, 20, 30.0);
    cfg.seed = 5;
    let sigmas = [0.0, 0.05, 0.1, 0.15, 0.2];
    let seeds = [1, 2, 3, 4, 5];
    let rows = synth::sigma_sweep(&spec, &cfg, &sigmas, &seeds).unwrap();
    let mean_at = |s: f64| {
        let v: Vec<f64> = rows.iter().filter(|r| r.sigma == s).map(|r| r.main_part).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let means: Vec<f64> = sigmas.iter().map(|&s| mean_at(s)).collect();
    // one-sided: neighbouring levels may dip by sampling noise only
    for w in means.windows(2) {
        assert!(w[1] >= w[0] - 0.005, "{means:?}");
    }
    assert!(means[4] > means[0], "{means:?}");
}
