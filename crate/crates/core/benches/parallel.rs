use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gencert::augment;
use gencert::conclab::{self, CountModel, LatentLaw, TailCheckSpec, TailRegime};
use gencert::exec;
use gencert::partition::{self, FeatureTable};
use gencert::synth::{self, CoverageConfig, MixtureSpec};
use gencert::{Assignment, SampleTable};

fn both<F: Fn()>(c: &mut Criterion, group: &str, f: F) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("path", "parallel"), |b| b.iter(&f));
    g.bench_function(BenchmarkId::new("path", "sequential"), |b| b.iter(|| exec::sequential(&f)));
    g.finish();
}

fn random_table(n: usize, d: usize, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    FeatureTable::from_flat((0..n).map(|i| i.to_string()).collect(), d, data).unwrap()
}

fn kmeans_assign(c: &mut Criterion) {
    let x = random_table(20_000, 8, 1);
    let centroids = partition::fit(&x, 200, 2, 3).unwrap();
    both(c, "kmeans_assign", || {
        std::hint::black_box(partition::assign(&x, &centroids).unwrap());
    });
}

fn kmeans_fit(c: &mut Criterion) {
    let x = random_table(5_000, 4, 3);
    both(c, "kmeans_fit", || {
        std::hint::black_box(partition::fit(&x, 50, 4, 10).unwrap());
    });
}

fn tail_mc(c: &mut Criterion) {
    let spec = TailCheckSpec {
        n: 200,
        mu: vec![0.2, 0.3, 0.5],
        gamma: 2.0,
        t_grid: vec![50.0, 100.0],
        trials: 20_000,
        seed: 5,
        latent: LatentLaw::two_state_bernoulli(3),
        counts: CountModel::Independent,
        regime: TailRegime::Unified,
        force_mc: true,
    };
    both(c, "tail_monte_carlo", || {
        std::hint::black_box(conclab::hoeffding_conditional_check(&spec).unwrap());
    });
}

fn coverage(c: &mut Criterion) {
    let spec = MixtureSpec::symmetric_gaussians();
    let cfg = CoverageConfig::new(2000, 20, 20, 30.0);
    both(c, "coverage_trials", || {
        std::hint::black_box(synth::coverage_run(&spec, &cfg).unwrap());
    });
}

fn sensitivity(c: &mut Criterion) {
    let n = 6000;
    let k = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let table = |rng: &mut ChaCha8Rng| SampleTable::new(ids.clone(), (0..n).map(|_| rng.random()).collect()).unwrap();
    let cells = |rng: &mut ChaCha8Rng| Assignment::new(ids.clone(), (0..n).map(|_| rng.random_range(0..k)).collect()).unwrap();
    let (o, oc, a, ac) = (table(&mut rng), cells(&mut rng), table(&mut rng), cells(&mut rng));
    both(c, "pair_stats", || {
        std::hint::black_box(augment::pair_stats(&o, &oc, &a, &ac, k).unwrap());
    });
}

criterion_group!(benches, kmeans_assign, kmeans_fit, tail_mc, coverage, sensitivity);
criterion_main!(benches);
