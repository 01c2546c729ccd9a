//! Command-line front end. [`run`] is the whole program; `main` only
//! forwards the process arguments and exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use gencert::conclab::{self, Suite};
use gencert::optimize::{self, GridConfig};
use gencert::partition::{self, Centroids, DEFAULT_MAX_ITERS};
use gencert::synth::{self, Experiment};
use gencert::{augment, bound, io, BoundParams, GeneralParams};

pub mod report;

#[derive(Parser, Debug)]
#[command(name = "gencert", version, about = "Partition-based generalization certificates")]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit seeded k-means on a feature table and write cell assignments.
    Partition(PartitionArgs),
    /// Certify the expected loss from losses and a partition.
    Certify(CertifyArgs),
    /// Certify from original and transformed samples.
    CertifyAug(CertifyAugArgs),
    /// Grid search over K and alpha.
    Optimize(OptimizeArgs),
    /// Check the concentration inequalities numerically.
    VerifyConcentration(VerifyArgs),
    /// Coverage experiment on a synthetic mixture.
    Synthetic(SyntheticArgs),
}

#[derive(Args, Debug)]
struct PartitionArgs {
    /// `id,f1,...,fd`
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Assign with these centroids instead of fitting new ones.
    #[arg(long)]
    apply: Option<PathBuf>,
    /// `id,cell` output.
    #[arg(long)]
    out: PathBuf,
    /// Fitted centroids, in the feature-table format.
    #[arg(long)]
    centroids: Option<PathBuf>,
    /// JSON summary of the fit.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long)]
    alpha: f64,
    /// Residual `gamma^(-alpha)`; gamma is derived from it.
    #[arg(long, conflicts_with = "gamma")]
    gamma_failure: Option<f64>,
    /// Explicit gamma >= 1.
    #[arg(long)]
    gamma: Option<f64>,
    /// Supremum of the loss (1 for the 0-1 loss).
    #[arg(long)]
    c_sup: f64,
}

impl BoundArgs {
    fn params(&self) -> anyhow::Result<BoundParams> {
        Ok(match self.gamma {
            Some(g) => BoundParams::with_gamma(self.k, self.delta, self.alpha, g, self.c_sup)?,
            None => BoundParams::from_residual(
                self.k,
                self.delta,
                self.alpha,
                self.gamma_failure.unwrap_or(bound::DEFAULT_EPS_GAMMA),
                self.c_sup,
            )?,
        })
    }
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// `id,loss`
    #[arg(long)]
    losses: PathBuf,
    /// `id,cell`
    #[arg(long)]
    assignments: PathBuf,
    #[command(flatten)]
    bound: BoundArgs,
    /// Known cell masses `p_1,...,p_K`: certify with them instead.
    #[arg(long, value_delimiter = ',')]
    cell_masses: Option<Vec<f64>>,
    #[arg(long, requires = "cell_masses")]
    delta1: Option<f64>,
    #[arg(long, requires = "cell_masses")]
    delta2: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CertifyAugArgs {
    #[arg(long)]
    losses: PathBuf,
    #[arg(long)]
    assignments: PathBuf,
    /// Losses of the transformed samples; may contain `{sigma}`.
    #[arg(long)]
    aug_losses: String,
    /// Cells of the transformed samples; may contain `{sigma}`.
    #[arg(long)]
    aug_assignments: String,
    #[command(flatten)]
    bound: BoundArgs,
    /// Noise levels substituted for `{sigma}`; one report per level.
    #[arg(long, value_delimiter = ',')]
    sigma_grid: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[arg(long)]
    losses: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = bound::DEFAULT_EPS_GAMMA)]
    gamma_failure: f64,
    /// Supremum of the loss (1 for the 0-1 loss).
    #[arg(long)]
    c_sup: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Split delta evenly over the grid.
    #[arg(long)]
    bonferroni: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Best certificate.
    #[arg(long)]
    out: PathBuf,
    /// Every grid row.
    #[arg(long)]
    grid_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// exact, mc, full or quick
    #[arg(long, default_value = "full")]
    suite: String,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `check,params,estimate,bound,margin,pass`
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SyntheticArgs {
    /// `key = value` experiment file.
    #[arg(long)]
    spec: PathBuf,
    /// Override the file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-trial rows.
    #[arg(long)]
    out: PathBuf,
    /// JSON summary.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Augmentation sweep rows (needs `sigma_grid` in the spec).
    #[arg(long)]
    sweep_out: Option<PathBuf>,
}

/// Run with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Exit codes: 0 success, 1 a concentration check failed, 2 bad input.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = writeln!(err, "{}", json!({"error": "usage", "message": e.to_string().trim_end()}));
            return 2;
        }
    };
    let mut buf = Vec::new();
    let result = with_threads(cli.threads, || dispatch(cli.cmd, &mut buf));
    let _ = out.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<gencert::Error>())
                .map_or("invalid_input", gencert::Error::kind);
            let msg = format!("{e:#}");
            let _ = writeln!(err, "{}", json!({"error": kind, "message": msg}));
            2
        }
    }
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> anyhow::Result<R> + Send) -> anyhow::Result<R> {
    match threads {
        None => f(),
        Some(0) => bail!("--threads must be at least 1"),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .context("starting worker threads")?
            .install(f),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> anyhow::Result<R> + Send) -> anyhow::Result<R> {
    if threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    f()
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_csv(path: &Path, f: impl FnOnce(&mut fs::File) -> gencert::Result<()>) -> anyhow::Result<()> {
    io::write_file(path, f).with_context(|| format!("writing {}", path.display()))
}

fn dispatch(cmd: Command, out: &mut Vec<u8>) -> anyhow::Result<i32> {
    match cmd {
        Command::Partition(a) => cmd_partition(a),
        Command::Certify(a) => cmd_certify(a),
        Command::CertifyAug(a) => cmd_certify_aug(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::VerifyConcentration(a) => cmd_verify(a, out),
        Command::Synthetic(a) => cmd_synthetic(a),
    }
}

fn cmd_partition(a: PartitionArgs) -> anyhow::Result<i32> {
    let features = io::read_features(&a.features)?;
    let centroids = match (&a.apply, a.k) {
        (Some(path), _) => {
            let table = io::read_features(path)?;
            Centroids::from_rows((0..table.len()).map(|j| table.row(j).to_vec()).collect())?
        }
        (None, Some(k)) => partition::fit(&features, k, a.seed, a.max_iters)?,
        (None, None) => bail!("partition needs --k (or --apply with existing centroids)"),
    };
    let assignment = partition::assign(&features, &centroids)?;
    write_csv(&a.out, |w| io::write_assignments(w, &assignment))?;
    if let Some(path) = &a.centroids {
        let ids = (0..centroids.k()).map(|j| j.to_string()).collect();
        let table = gencert::FeatureTable::new(ids, centroids.rows().map(<[f64]>::to_vec).collect())?;
        write_csv(path, |w| io::write_features(w, &table))?;
    }
    if let Some(path) = &a.report {
        let counts = partition::counts(&assignment, centroids.k())?;
        let v = json!({
            "n": features.len(),
            "K": centroids.k(),
            "T_size": counts.t_size(),
            "sum_sq": bound::compute_sum_sq(&counts).ok(),
            "counts": counts.counts(),
            "iters_run": centroids.iters_run,
            "objective": centroids.objective,
            "applied": a.apply.is_some(),
            "seeds": {"kmeans": if a.apply.is_some() { Value::Null } else { json!(a.seed) }},
        });
        write_text(path, &(serde_json::to_string_pretty(&v)? + "\n"))?;
    }
    Ok(0)
}

fn load_counts(
    losses: &gencert::SampleTable,
    assignments: &gencert::Assignment,
    k: usize,
) -> anyhow::Result<gencert::CellCounts> {
    if assignments.len() != losses.len() {
        bail!(
            "{} assignments for {} losses; every sample needs exactly one cell",
            assignments.len(),
            losses.len()
        );
    }
    let mut hist = vec![0u64; k];
    for cell in losses.cells(assignments)? {
        *hist
            .get_mut(cell)
            .ok_or_else(|| anyhow!(gencert::Error::InvalidInput(format!("cell {cell} is outside [0, {k})"))))? += 1;
    }
    Ok(gencert::CellCounts::new(hist)?)
}

fn cmd_certify(a: CertifyArgs) -> anyhow::Result<i32> {
    let losses = io::read_losses(&a.losses)?;
    let assignments = io::read_assignments(&a.assignments)?;
    let params = a.bound.params()?;
    let counts = load_counts(&losses, &assignments, params.k())?;
    let report = match &a.cell_masses {
        None => bound::certify(&losses, &counts, &params)?,
        Some(p) => {
            let gp = GeneralParams::new(
                p.clone(),
                a.delta1.unwrap_or(params.eps_gamma()),
                a.delta2.unwrap_or(params.delta() / 2.0),
            )?;
            bound::certify_general(&losses, &counts, &gp, &params)?
        }
    };
    write_text(&a.out, &report::to_json(report::bound_report(&report, json!({}))))?;
    Ok(0)
}

fn sigma_path(template: &str, sigma: f64) -> PathBuf {
    PathBuf::from(template.replace("{sigma}", &format!("{sigma}")))
}

fn cmd_certify_aug(a: CertifyAugArgs) -> anyhow::Result<i32> {
    let losses = io::read_losses(&a.losses)?;
    let assignments = io::read_assignments(&a.assignments)?;
    let params = a.bound.params()?;
    let certify_one = |aug_l: &Path, aug_a: &Path, sigma: Option<f64>| -> anyhow::Result<_> {
        let aug_losses = io::read_losses(aug_l)?;
        let aug_cells = io::read_assignments(aug_a)?;
        let cert = augment::certify_aug(&losses, &assignments, &aug_losses, &aug_cells, &params)?;
        Ok(report::aug_report(&cert, sigma))
    };
    let text = match &a.sigma_grid {
        None => report::to_json(certify_one(Path::new(&a.aug_losses), Path::new(&a.aug_assignments), None)?),
        Some(grid) => {
            if !a.aug_losses.contains("{sigma}") || !a.aug_assignments.contains("{sigma}") {
                bail!("--sigma-grid needs `{{sigma}}` in --aug-losses and --aug-assignments");
            }
            let reports = grid
                .iter()
                .map(|&s| {
                    certify_one(&sigma_path(&a.aug_losses, s), &sigma_path(&a.aug_assignments, s), Some(s))
                        .map(Value::Object)
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            serde_json::to_string_pretty(&json!({ "sweep": reports }))? + "\n"
        }
    };
    write_text(&a.out, &text)?;
    Ok(0)
}

fn cmd_optimize(a: OptimizeArgs) -> anyhow::Result<i32> {
    let losses = io::read_losses(&a.losses)?;
    let features = io::read_features(&a.features)?;
    let (k_default, alpha_default) = GridConfig::default_grids();
    let cfg = GridConfig {
        k_grid: a.k_grid.unwrap_or(k_default),
        alpha_grid: a.alpha_grid.unwrap_or(alpha_default),
        delta: a.delta,
        eps_gamma: a.gamma_failure,
        c_sup: a.c_sup,
        seed: a.seed,
        bonferroni: a.bonferroni,
        max_iters: a.max_iters,
    };
    let result = optimize::grid_search(&losses, &features, &cfg)?;
    write_text(&a.out, &report::to_json(report::grid_report(&result, a.seed, a.bonferroni)))?;
    if let Some(path) = &a.grid_out {
        write_csv(path, |w| io::write_grid(w, &result.rows))?;
    }
    Ok(0)
}

fn cmd_verify(a: VerifyArgs, out: &mut Vec<u8>) -> anyhow::Result<i32> {
    let suite: Suite = a.suite.parse()?;
    let outcomes = conclab::run_suite(suite, a.trials, a.seed)?;
    if let Some(path) = &a.out {
        write_csv(path, |w| io::write_checks(w, &outcomes))?;
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.pass).collect();
    writeln!(
        out,
        "{} checks ({} exact, {} sampled), {} failed",
        outcomes.len(),
        outcomes.iter().filter(|o| o.exact).count(),
        outcomes.iter().filter(|o| !o.exact).count(),
        failed.len()
    )?;
    for f in &failed {
        writeln!(out, "FAIL {} {} estimate={} bound={}", f.check, f.params, f.estimate, f.bound)?;
    }
    Ok(if failed.is_empty() { 0 } else { 1 })
}

fn cmd_synthetic(a: SyntheticArgs) -> anyhow::Result<i32> {
    let text = fs::read_to_string(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    let mut exp = Experiment::parse(&text).with_context(|| a.spec.display().to_string())?;
    if let Some(s) = a.seed {
        exp.coverage.seed = s;
    }
    let result = synth::coverage_run(&exp.spec, &exp.coverage)?;
    write_text(&a.out, &report::trials_csv(&result.trials))?;
    if let Some(path) = &a.summary {
        write_text(path, &report::to_json(report::coverage_report(&exp, &result)))?;
    }
    if let Some(path) = &a.sweep_out {
        if exp.sigma_grid.is_empty() {
            bail!("--sweep-out needs `sigma_grid` in the experiment file");
        }
        let rows = synth::sigma_sweep(&exp.spec, &exp.coverage, &exp.sigma_grid, &exp.sweep_seeds)?;
        write_text(path, &report::sweep_csv(&rows))?;
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("gencert").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(err).unwrap())
    }

    #[test]
    fn sigma_templates() {
        assert_eq!(sigma_path("l_{sigma}.csv", 0.05), PathBuf::from("l_0.05.csv"));
        assert_eq!(sigma_path("l_{sigma}.csv", 0.0), PathBuf::from("l_0.csv"));
        assert_eq!(sigma_path("plain.csv", 0.1), PathBuf::from("plain.csv"));
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run_args(&["--help"]).0, 0);
        assert_eq!(run_args(&["certify", "--help"]).0, 0);
    }

    #[test]
    fn c_sup_is_mandatory() {
        let (code, err) = run_args(&["certify", "--losses", "l", "--assignments", "a", "--k", "2", "--alpha", "1", "--out", "o"]);
        assert_eq!(code, 2);
        assert!(err.contains("--c-sup"), "{err}");
    }

    #[test]
    fn zero_threads_is_rejected() {
        let (code, err) = run_args(&["--threads", "0", "verify-concentration", "--suite", "exact"]);
        assert_eq!(code, 2);
        assert!(err.contains("--threads"), "{err}");
    }

    #[test]
    fn gamma_and_residual_conflict() {
        let (code, err) = run_args(&[
            "certify", "--losses", "l", "--assignments", "a", "--k", "2", "--alpha", "1", "--c-sup", "1",
            "--gamma", "2", "--gamma-failure", "0.1", "--out", "o",
        ]);
        assert_eq!(code, 2);
        assert!(err.contains("usage"), "{err}");
    }
}
