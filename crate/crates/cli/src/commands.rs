//! Implementations of the CLI subcommands.
//!
//! Every command is a pure function of its inputs, flags, and seed: all
//! randomness flows from the given 64-bit seed through documented sub-seed
//! streams, and parallel reductions happen in fixed order, so outputs are
//! independent of thread count.

use std::io::Write;
use std::path::{Path, PathBuf};

use moat_core::domain::{Evidence, VarDomain};
use moat_core::inference::{
    estimate_marginals_collapsed_with_trees, estimate_marginals_from_states,
    estimate_marginals_is, exact_posterior, gibbs_sample, importance_sample_with_trees,
    kl_metric, PosteriorEstimate,
};
use moat_core::likelihood::{log_likelihood_given, log_partition};
use moat_core::math::subseed;
use moat_core::model::MoatModel;
use moat_core::st_sampler::sample_tree;
use moat_core::training::{ablation_compare, train, TrainConfig};
use moat_core::tree::tree_conditional_sample;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::dataset::{Dataset, DatasetTriple, Split};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::model_io::{load_model, save_model};

/// Parses `--evidence` strings of the form `"3=1,7=0"`; empty means none.
pub fn parse_evidence(spec: &str, domain: &VarDomain) -> Result<Evidence, CliError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Evidence::empty());
    }
    let mut entries = Vec::new();
    for part in spec.split(',') {
        let (var, value) = part.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("evidence entry {part:?} is not var=value"))
        })?;
        let var: usize = var
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad evidence variable {var:?}")))?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad evidence value {value:?}")))?;
        entries.push((var, value));
    }
    Evidence::new(entries, domain).map_err(CliError::from)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => Ok(Box::new(std::io::BufWriter::new(
            std::fs::File::create(p)
                .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        ))),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

/// Mean log-likelihood with rows evaluated in parallel and reduced in row
/// order (thread-count independent).
pub fn parallel_mean_ll(model: &MoatModel, data: &Dataset) -> Result<f64, CliError> {
    data.check_against(model.domain())?;
    let log_z = log_partition(model);
    if log_z == f64::NEG_INFINITY {
        return Err(CliError::Numeric("disconnected weight graph (Z = 0)".into()));
    }
    let lls: Result<Vec<f64>, _> = (0..data.n_rows())
        .into_par_iter()
        .map(|r| log_likelihood_given(model, data.row(r), log_z))
        .collect();
    let lls = lls.map_err(CliError::from)?;
    Ok(lls.iter().sum::<f64>() / lls.len() as f64)
}

pub struct TrainArgs {
    pub data_dir: PathBuf,
    pub dataset: String,
    pub config: TrainConfig,
    pub out_dir: PathBuf,
}

/// Trains on a dataset triple and persists the model, per-epoch history
/// CSV, and a run manifest under the output directory.
pub fn cmd_train(args: &TrainArgs) -> Result<(), CliError> {
    let triple = DatasetTriple::load(&args.data_dir, &args.dataset)?;
    let domain = triple.infer_domain()?;
    let (model, history) =
        train(&triple.train.view(), &triple.valid.view(), &domain, &args.config)?;

    std::fs::create_dir_all(&args.out_dir)?;
    let model_path = args.out_dir.join("model.json");
    save_model(&model_path, &model)?;

    let history_path = args.out_dir.join("history.csv");
    let mut csv = open_out(Some(&history_path))?;
    writeln!(csv, "epoch,train_ll,valid_ll")?;
    for (epoch, (t, v)) in history.train_ll.iter().zip(&history.valid_ll).enumerate() {
        writeln!(csv, "{epoch},{t},{v}")?;
    }
    drop(csv);

    let test_ll = parallel_mean_ll(&model, &triple.test)?;
    RunManifest::new("train", args.config.seed)
        .dataset(triple.train.path())
        .dataset(triple.valid.path())
        .dataset(triple.test.path())
        .output(&model_path)
        .output(&history_path)
        .write(&args.out_dir.join("manifest.json"))?;

    println!(
        "best epoch {} (valid LL {:.6}); test LL {:.4}; model at {}",
        history.chosen_epoch,
        history.valid_ll[history.chosen_epoch],
        test_ll,
        model_path.display()
    );
    Ok(())
}

pub struct EvalArgs {
    pub model: PathBuf,
    pub data_dir: PathBuf,
    pub dataset: String,
    pub split: Split,
}

/// Prints the mean log-likelihood of a split to four decimals.
pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let triple = DatasetTriple::load(&args.data_dir, &args.dataset)?;
    let data = match args.split {
        Split::Train => &triple.train,
        Split::Valid => &triple.valid,
        Split::Test => &triple.test,
    };
    let ll = parallel_mean_ll(&model, data)?;
    println!("{ll:.4}");
    Ok(())
}

pub struct LoglikArgs {
    pub model: PathBuf,
    pub data: PathBuf,
    pub out: Option<PathBuf>,
}

/// Per-row log-likelihoods as CSV at full precision.
pub fn cmd_loglik(args: &LoglikArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let data = Dataset::load(&args.data, Split::Test)?;
    data.check_against(model.domain())?;
    let log_z = log_partition(&model);
    if log_z == f64::NEG_INFINITY {
        return Err(CliError::Numeric("disconnected weight graph (Z = 0)".into()));
    }
    let lls: Result<Vec<f64>, _> = (0..data.n_rows())
        .into_par_iter()
        .map(|r| log_likelihood_given(&model, data.row(r), log_z))
        .collect();
    let mut out = open_out(args.out.as_deref())?;
    writeln!(out, "row,log_likelihood")?;
    for (r, ll) in lls.map_err(CliError::from)?.into_iter().enumerate() {
        writeln!(out, "{r},{ll}")?;
    }
    Ok(())
}

pub struct SampleArgs {
    pub model: PathBuf,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Draws full samples from the model: a spanning tree per sample, then an
/// unconditional draw from that tree.
pub fn cmd_sample(args: &SampleArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let n = model.domain().n();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(subseed(args.seed, 0));
    let mut out = open_out(args.out.as_deref())?;
    let empty = Evidence::empty();
    for _ in 0..args.samples {
        let tree = sample_tree(n, model.weights(), &mut rng)?;
        let x = tree_conditional_sample(&tree, model.table(), &empty, &mut rng)?;
        let line: Vec<String> = x.iter().map(usize::to_string).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Is,
    Collapsed,
    Gibbs,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Is => "is",
            Method::Collapsed => "collapsed",
            Method::Gibbs => "gibbs",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "is" => Ok(Method::Is),
            "collapsed" => Ok(Method::Collapsed),
            "gibbs" => Ok(Method::Gibbs),
            _ => Err(CliError::Usage(format!(
                "unknown method {s:?} (expected is, collapsed, or gibbs)"
            ))),
        }
    }
}

/// One posterior estimate with the requested method and budget. Seed
/// streams: trees/chains draw from `subseed(seed, 1)`, completions from
/// `subseed(seed, 2)`.
pub fn run_method(
    model: &MoatModel,
    evidence: &Evidence,
    method: Method,
    samples: usize,
    burn_in: usize,
    seed: u64,
) -> Result<PosteriorEstimate, CliError> {
    let domain = model.domain();
    let mut tree_rng = rand_chacha::ChaCha8Rng::seed_from_u64(subseed(seed, 1));
    let mut fill_rng = rand_chacha::ChaCha8Rng::seed_from_u64(subseed(seed, 2));
    match method {
        Method::Is => {
            let trees: Result<Vec<_>, _> = (0..samples)
                .map(|_| sample_tree(domain.n(), model.weights(), &mut tree_rng))
                .collect();
            let samples = importance_sample_with_trees(model, evidence, trees?, &mut fill_rng)?;
            Ok(estimate_marginals_is(&samples, evidence, domain)?)
        }
        Method::Collapsed => {
            let trees: Result<Vec<_>, _> = (0..samples)
                .map(|_| sample_tree(domain.n(), model.weights(), &mut tree_rng))
                .collect();
            Ok(estimate_marginals_collapsed_with_trees(model, evidence, &trees?)?)
        }
        Method::Gibbs => {
            let states = gibbs_sample(model, evidence, samples, burn_in, &mut tree_rng)?;
            Ok(estimate_marginals_from_states(&states, evidence, domain)?)
        }
    }
}

pub struct InferArgs {
    pub model: PathBuf,
    pub evidence: String,
    pub method: Method,
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Optional CSV of the normalized importance-weight histogram.
    pub weights_out: Option<PathBuf>,
}

/// Estimates posterior marginals of the free variables and emits them as
/// CSV rows `variable,value,probability`.
pub fn cmd_infer(args: &InferArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let evidence = parse_evidence(&args.evidence, model.domain())?;
    let estimate = run_method(
        &model,
        &evidence,
        args.method,
        args.samples,
        args.burn_in,
        args.seed,
    )?;

    if let Some(hist_path) = &args.weights_out {
        if args.method != Method::Is {
            return Err(CliError::Usage(
                "--weights-out applies to the importance-sampling method only".into(),
            ));
        }
        let mut tree_rng = rand_chacha::ChaCha8Rng::seed_from_u64(subseed(args.seed, 1));
        let mut fill_rng = rand_chacha::ChaCha8Rng::seed_from_u64(subseed(args.seed, 2));
        let trees: Result<Vec<_>, _> = (0..args.samples)
            .map(|_| sample_tree(model.domain().n(), model.weights(), &mut tree_rng))
            .collect();
        let samples =
            importance_sample_with_trees(&model, &evidence, trees?, &mut fill_rng)?;
        let weights: Vec<f64> = samples.iter().map(|s| s.weight()).collect();
        write_weight_histogram(&weights, &mut open_out(Some(hist_path))?)?;
    }

    let mut out = open_out(args.out.as_deref())?;
    writeln!(out, "variable,value,probability")?;
    for (i, &v) in estimate.free_variables().iter().enumerate() {
        for (value, &p) in estimate.marginals()[i].iter().enumerate() {
            writeln!(out, "{v},{value},{p}")?;
        }
    }
    eprintln!(
        "samples {}  effective sample size {:.6}",
        estimate.sample_count(),
        estimate.effective_sample_size()
    );
    Ok(())
}

/// Histogram of weights normalized by their mean, 0.1-wide bins up to 3
/// plus an overflow bin. Emits `bin_lo,bin_hi,count,fraction`.
pub fn write_weight_histogram(
    weights: &[f64],
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
    if mean <= 0.0 {
        return Err(CliError::Numeric("all importance weights are zero".into()));
    }
    let bins = 30usize;
    let width = 0.1;
    let mut counts = vec![0usize; bins + 1];
    for &w in weights {
        let ratio = w / mean;
        let idx = ((ratio / width) as usize).min(bins);
        counts[idx] += 1;
    }
    writeln!(out, "bin_lo,bin_hi,count,fraction")?;
    for (i, &c) in counts.iter().enumerate() {
        let lo = i as f64 * width;
        let hi = if i == bins { f64::INFINITY } else { (i + 1) as f64 * width };
        writeln!(out, "{lo},{hi},{c},{}", c as f64 / weights.len() as f64)?;
    }
    Ok(())
}

pub struct ConvergeArgs {
    pub model: PathBuf,
    pub evidence: String,
    pub max_samples: usize,
    pub burn_in: usize,
    pub n_seeds: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Convergence curves for all three methods against the exact posterior:
/// CSV rows `method,seed,sample_count,mean_kl`.
pub fn cmd_converge(args: &ConvergeArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let evidence = parse_evidence(&args.evidence, model.domain())?;
    let exact = exact_posterior(&model, &evidence)?;

    let checkpoints: Vec<usize> = [10usize, 32, 100, 316, 1000, 3162, 10_000, 31_623, 100_000]
        .into_iter()
        .filter(|&c| c <= args.max_samples)
        .collect();
    if checkpoints.is_empty() {
        return Err(CliError::Usage("--samples too small for any checkpoint".into()));
    }

    let mut out = open_out(args.out.as_deref())?;
    writeln!(out, "method,seed,sample_count,mean_kl")?;
    for method in [Method::Is, Method::Collapsed, Method::Gibbs] {
        for seed_idx in 0..args.n_seeds {
            let run_seed = subseed(args.seed, (method as u64) << 32 | seed_idx);
            for &count in &checkpoints {
                let est =
                    run_method(&model, &evidence, method, count, args.burn_in, run_seed)?;
                let kl = kl_metric(&exact, &est)?;
                writeln!(out, "{},{seed_idx},{count},{kl}", method.name())?;
            }
        }
    }
    Ok(())
}

pub struct AblateArgs {
    pub data_dir: PathBuf,
    pub dataset: String,
    pub config: TrainConfig,
    pub runs: usize,
    pub out: Option<PathBuf>,
}

/// Initialization ablation curves: CSV rows
/// `init,run,epoch,train_ll,valid_ll` with init in {deterministic, random}.
pub fn cmd_ablate(args: &AblateArgs) -> Result<(), CliError> {
    let triple = DatasetTriple::load(&args.data_dir, &args.dataset)?;
    let domain = triple.infer_domain()?;
    let runs = ablation_compare(
        &triple.train.view(),
        &triple.valid.view(),
        &domain,
        &args.config,
        args.runs,
    )?;
    let mut out = open_out(args.out.as_deref())?;
    writeln!(out, "init,run,epoch,train_ll,valid_ll")?;
    for (run, pair) in runs.iter().enumerate() {
        for (name, history) in
            [("deterministic", &pair.deterministic), ("random", &pair.random)]
        {
            for (epoch, (t, v)) in
                history.train_ll.iter().zip(&history.valid_ll).enumerate()
            {
                writeln!(out, "{name},{run},{epoch},{t},{v}")?;
            }
        }
    }
    Ok(())
}

/// Small-scale equivalence suite: fast paths against brute-force oracles.
/// Prints one line per check; any failure exits nonzero.
pub fn cmd_oracle_check() -> Result<(), CliError> {
    use moat_core::fixtures::{random_model, random_weights};
    use moat_core::oracle::{
        brute_likelihood, brute_map, brute_partition, colorable_map_probability,
        count_exact_leaf_trees, enumerate_leaf_counts, is_three_colorable,
        map_hardness_gadget, Graph,
    };

    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("ok   {name}");
        } else {
            println!("FAIL {name}: {detail}");
            failures += 1;
        }
    };

    // Cayley partition
    {
        let mut worst: f64 = 0.0;
        for n in 3..=8usize {
            let model = MoatModel::new(
                vec![1.0; n * (n - 1) / 2],
                random_model(&vec![2; n], 0).table().clone(),
            )
            .map_err(CliError::from)?;
            let expect = (n as f64 - 2.0) * (n as f64).ln();
            worst = worst.max((log_partition(&model) - expect).abs() / expect.max(1.0));
        }
        check("cayley-partition", worst <= 1e-10, format!("rel err {worst:.3e}"));
    }

    // determinant likelihood vs tree enumeration
    {
        let mut worst: f64 = 0.0;
        for seed in 0..25u64 {
            let n = 3 + (seed as usize) % 4;
            let model = random_model(&vec![2; n], 900 + seed);
            let x: Vec<usize> = (0..n).map(|v| (seed as usize + v) % 2).collect();
            let fast = moat_core::likelihood::log_likelihood(&model, &x)
                .map_err(CliError::from)?
                .exp();
            let brute = brute_likelihood(&model, &x).map_err(CliError::from)?;
            worst = worst.max((fast - brute).abs() / brute.max(1e-300));
        }
        check("likelihood-vs-enumeration", worst <= 1e-9, format!("rel err {worst:.3e}"));
    }

    // partition vs enumeration with random weights
    {
        let mut worst: f64 = 0.0;
        for n in 3..=6usize {
            let w = random_weights(n, 0.2, 3.0, 40 + n as u64);
            let det = moat_core::likelihood::log_weighted_tree_sum(n, &w);
            let brute = brute_partition(n, &w).map_err(CliError::from)?.ln();
            worst = worst.max((det - brute).abs() / brute.abs().max(1.0));
        }
        check("partition-vs-enumeration", worst <= 1e-10, format!("rel err {worst:.3e}"));
    }

    // normalization over the full domain
    {
        let mut worst: f64 = 0.0;
        for seed in 0..10u64 {
            let model = random_model(&[2; 8], 7700 + seed);
            let mut total = 0.0;
            model.domain().clone().for_each_assignment(|x| {
                total += moat_core::likelihood::log_likelihood(&model, x).unwrap().exp();
            });
            worst = worst.max((total - 1.0).abs());
        }
        check("normalization", worst <= 1e-8, format!("max |sum - 1| = {worst:.3e}"));
    }

    // 3-coloring MAP gadget on K_3 / P_3 / K_4
    {
        let k3 = map_hardness_gadget(&Graph::complete(3)).map_err(CliError::from)?;
        let (_, p3) = brute_map(&k3).map_err(CliError::from)?;
        let graph_p3 = Graph::new(3, &[(0, 1), (1, 2)]).map_err(CliError::from)?;
        let (_, pp) =
            brute_map(&map_hardness_gadget(&graph_p3).map_err(CliError::from)?)
                .map_err(CliError::from)?;
        let k4 = map_hardness_gadget(&Graph::complete(4)).map_err(CliError::from)?;
        let (_, p4) = brute_map(&k4).map_err(CliError::from)?;
        let ok = (p3 - 1.0 / 12.0).abs() < 1e-12
            && (pp - colorable_map_probability(3)).abs() < 1e-12
            && p4 < colorable_map_probability(4) - 1e-12
            && is_three_colorable(&Graph::complete(3))
            && !is_three_colorable(&Graph::complete(4));
        check("map-gadget", ok, format!("K3 {p3}, P3 {pp}, K4 {p4}"));
    }

    // leaf-count gadget vs enumeration on K_4
    {
        let g = Graph::complete(4);
        let eps = 1e-4;
        let mut ok = true;
        let mut detail = String::new();
        for k_set in [vec![0], vec![0, 1], vec![1, 3], vec![0, 1, 2]] {
            let (_, exact) = enumerate_leaf_counts(&g, &k_set).map_err(CliError::from)?;
            let counted = count_exact_leaf_trees(&g, &k_set, eps).map_err(CliError::from)?;
            if counted != exact {
                ok = false;
                detail = format!("K = {k_set:?}: {counted} vs {exact}");
                break;
            }
        }
        check("leafcount-gadget", ok, detail);
    }

    // Wilson sampler vs exact reference in total variation
    {
        let n = 4;
        let weights = random_weights(n, 0.3, 2.5, 99);
        let trees = moat_core::oracle::enumerate_spanning_trees(
            &Graph::from_positive_weights(n, &weights),
        )
        .map_err(CliError::from)?;
        let draws = 20_000;
        let mut counts = vec![0usize; trees.len()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..draws {
            let t = sample_tree(n, &weights, &mut rng).map_err(CliError::from)?;
            counts[trees.iter().position(|c| c == &t).unwrap()] += 1;
        }
        let tv: f64 = trees
            .iter()
            .zip(&counts)
            .map(|(t, &c)| {
                let p = moat_core::st_sampler::exact_tree_log_prob(n, &weights, t).exp();
                (c as f64 / draws as f64 - p).abs()
            })
            .sum::<f64>()
            / 2.0;
        check("wilson-sampler", tv <= 0.03, format!("TV {tv:.4}"));
    }

    if failures > 0 {
        Err(CliError::Numeric(format!("{failures} oracle check(s) failed")))
    } else {
        println!("all oracle checks passed");
        Ok(())
    }
}
