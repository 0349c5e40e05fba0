//! Deterministic initialization and stochastic-gradient maximum-likelihood
//! training.
//!
//! Initialization sets the marginals to Laplace-smoothed empirical
//! frequencies (inverted back to free parameters) and each edge weight to
//! the empirical mutual information of its pair, floored away from zero:
//! the spanning-tree analogue of picking a maximum-mutual-information tree,
//! spread across all trees at once. The whole procedure is deterministic.
//!
//! Training is plain minibatch SGD ascent on the mean log-likelihood (Adam
//! is available behind a config switch). Epoch shuffles draw from per-epoch
//! sub-seeds of one master seed; rows are canonicalized by content before
//! shuffling, so training is invariant to the order rows arrive in. The
//! returned parameters are those of the epoch with the best validation
//! log-likelihood over the fixed epoch budget.

use alloc::vec::Vec;

use crate::domain::{pairs, Assignments, VarDomain};
use crate::error::MoatError;
use crate::gradients::grad_batch;
use crate::likelihood::batch_mean_log_likelihood;
use crate::math;
use crate::model::{FreeParams, MarginalTable, MoatModel};
use rand::{Rng, SeedableRng};

/// Floor added to each mutual information before taking the log weight, so
/// independent pairs keep finite edge logits.
const MI_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Optimizer {
    /// Plain SGD; the reference optimizer.
    Sgd,
    /// Adam with the usual defaults (0.9, 0.999, 1e-8).
    Adam,
}

/// Hyperparameters for one training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Laplace pseudocount for the empirical marginals.
    pub smoothing: f64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 1024,
            learning_rate: 0.05,
            epochs: 50,
            seed: 0,
            smoothing: 1.0,
            optimizer: Optimizer::Sgd,
        }
    }
}

impl TrainConfig {
    fn check(&self) -> Result<(), MoatError> {
        let lr_ok = self.learning_rate.is_finite() && self.learning_rate > 0.0;
        let smoothing_ok = self.smoothing.is_finite() && self.smoothing >= 0.0;
        if self.batch_size == 0 || !lr_ok || !smoothing_ok {
            return Err(MoatError::ShapeMismatch(
                "batch size, learning rate, and smoothing must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Mean log-likelihoods recorded per epoch. Entry 0 describes the
/// initialized (untrained) parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainHistory {
    pub train_ll: Vec<f64>,
    pub valid_ll: Vec<f64>,
    /// Index into the epoch lists with the best validation log-likelihood
    /// (earliest wins ties); the returned parameters are from this epoch.
    pub chosen_epoch: usize,
}

/// Deterministic initialization from data: Laplace-smoothed empirical
/// marginals inverted to free parameters, edge logits
/// `ln(MI_uv + 1e-3)` from the smoothed pairwise tables.
pub fn initialize(
    data: &Assignments<'_>,
    domain: &VarDomain,
    smoothing: f64,
) -> Result<FreeParams, MoatError> {
    if data.is_empty() {
        return Err(MoatError::EmptyData);
    }
    if data.n_cols() != domain.n() {
        return Err(MoatError::ShapeMismatch("data columns != n".into()));
    }
    let n = domain.n();
    let rows = data.n_rows() as f64;

    let mut univ_counts: Vec<Vec<f64>> =
        (0..n).map(|v| alloc::vec![0.0; domain.cardinality(v)]).collect();
    let mut pair_counts: Vec<Vec<f64>> = pairs(n)
        .map(|(u, v)| alloc::vec![0.0; domain.cardinality(u) * domain.cardinality(v)])
        .collect();
    for row in data.rows() {
        domain.check_assignment(row)?;
        for v in 0..n {
            univ_counts[v][row[v]] += 1.0;
        }
        for (q, (u, v)) in pairs(n).enumerate() {
            pair_counts[q][row[u] * domain.cardinality(v) + row[v]] += 1.0;
        }
    }

    let univariate: Vec<Vec<f64>> = univ_counts
        .iter()
        .enumerate()
        .map(|(v, counts)| {
            let cells = domain.cardinality(v) as f64;
            counts.iter().map(|c| (c + smoothing) / (rows + smoothing * cells)).collect()
        })
        .collect();
    let pairwise: Vec<Vec<f64>> = pair_counts
        .iter()
        .map(|counts| {
            let cells = counts.len() as f64;
            counts.iter().map(|c| (c + smoothing) / (rows + smoothing * cells)).collect()
        })
        .collect();

    // mutual information in nats from each smoothed pairwise table's own
    // marginals, so MI stays >= 0 regardless of smoothing
    let mut edge_logits = Vec::with_capacity(pairs(n).count());
    for (q, (u, v)) in pairs(n).enumerate() {
        let (ku, kv) = (domain.cardinality(u), domain.cardinality(v));
        let joint = &pairwise[q];
        let mut row_marg = alloc::vec![0.0; ku];
        let mut col_marg = alloc::vec![0.0; kv];
        for a in 0..ku {
            for b in 0..kv {
                row_marg[a] += joint[a * kv + b];
                col_marg[b] += joint[a * kv + b];
            }
        }
        let mut mi = 0.0;
        for a in 0..ku {
            for b in 0..kv {
                let p = joint[a * kv + b];
                if p > 0.0 {
                    mi += p * math::ln(p / (row_marg[a] * col_marg[b]));
                }
            }
        }
        edge_logits.push(math::ln(mi.max(0.0) + MI_FLOOR));
    }

    let table = MarginalTable::new(domain.clone(), univariate, pairwise)?;
    let mut params = FreeParams::invert_marginals(&table)?;
    params.edge_logits = edge_logits;
    Ok(params)
}

/// Minibatch SGD ascent from explicit starting parameters. Returns the
/// best-validation-epoch parameters and the full history.
pub fn train_from(
    initial: FreeParams,
    train_data: &Assignments<'_>,
    valid_data: &Assignments<'_>,
    domain: &VarDomain,
    config: &TrainConfig,
) -> Result<(FreeParams, TrainHistory), MoatError> {
    config.check()?;
    if train_data.is_empty() || valid_data.is_empty() {
        return Err(MoatError::EmptyData);
    }
    if train_data.n_cols() != domain.n() || valid_data.n_cols() != domain.n() {
        return Err(MoatError::ShapeMismatch("split columns != n".into()));
    }

    let mut params = initial;
    let evaluate = |p: &FreeParams| -> Result<(f64, f64), MoatError> {
        let model = p.realize(domain)?;
        Ok((
            batch_mean_log_likelihood(&model, train_data)?,
            batch_mean_log_likelihood(&model, valid_data)?,
        ))
    };

    let (t0, v0) = evaluate(&params)?;
    let mut history = TrainHistory {
        train_ll: alloc::vec![t0],
        valid_ll: alloc::vec![v0],
        chosen_epoch: 0,
    };
    let mut best = (0usize, v0, params.clone());

    // canonical row order by content, so training does not depend on the
    // order rows arrived in; identical rows are interchangeable
    let mut order: Vec<usize> = (0..train_data.n_rows()).collect();
    order.sort_by(|&a, &b| train_data.row(a).cmp(train_data.row(b)));

    let mut adam_m = FreeParams::zeros(domain);
    let mut adam_v = FreeParams::zeros(domain);
    let mut adam_t = 0u32;

    let mut batch_buf: Vec<usize> = Vec::new();
    for epoch in 1..=config.epochs {
        let mut rng =
            rand_chacha::ChaCha8Rng::seed_from_u64(math::subseed(config.seed, epoch as u64));
        let mut shuffled = order.clone();
        for i in (1..shuffled.len()).rev() {
            let j = rng.gen_range(0..=i);
            shuffled.swap(i, j);
        }

        for (batch_idx, chunk) in shuffled.chunks(config.batch_size).enumerate() {
            batch_buf.clear();
            for &r in chunk {
                batch_buf.extend_from_slice(train_data.row(r));
            }
            let batch = Assignments::new(&batch_buf, domain.n())?;
            let model = params.realize(domain)?;
            let grad = grad_batch(&model, &params, &batch)?;
            let mut finite = true;
            let mut probe = grad.clone();
            probe.for_each_mut(|x| finite &= x.is_finite());
            if !finite {
                return Err(MoatError::NanLoss { epoch, batch: batch_idx });
            }
            match config.optimizer {
                Optimizer::Sgd => params.scaled_add(config.learning_rate, &grad),
                Optimizer::Adam => {
                    adam_t += 1;
                    adam_step(
                        &mut params,
                        &grad,
                        &mut adam_m,
                        &mut adam_v,
                        adam_t,
                        config.learning_rate,
                    );
                }
            }
        }

        let (t, v) = evaluate(&params)?;
        if !t.is_finite() || !v.is_finite() {
            // batch index past the end denotes the epoch evaluation
            return Err(MoatError::NanLoss { epoch, batch: shuffled.len() });
        }
        history.train_ll.push(t);
        history.valid_ll.push(v);
        if v > best.1 {
            best = (epoch, v, params.clone());
        }
    }

    history.chosen_epoch = best.0;
    Ok((best.2, history))
}

fn adam_step(
    params: &mut FreeParams,
    grad: &FreeParams,
    m: &mut FreeParams,
    v: &mut FreeParams,
    t: u32,
    lr: f64,
) {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let bc1 = 1.0 - libm_powi(B1, t);
    let bc2 = 1.0 - libm_powi(B2, t);
    let update = |p: &mut Vec<f64>, g: &[f64], m: &mut Vec<f64>, v: &mut Vec<f64>| {
        for i in 0..p.len() {
            m[i] = B1 * m[i] + (1.0 - B1) * g[i];
            v[i] = B2 * v[i] + (1.0 - B2) * g[i] * g[i];
            let mhat = m[i] / bc1;
            let vhat = v[i] / bc2;
            p[i] += lr * mhat / (math::sqrt(vhat) + EPS);
        }
    };
    update(&mut params.edge_logits, &grad.edge_logits, &mut m.edge_logits, &mut v.edge_logits);
    for i in 0..params.univariate_logits.len() {
        update(
            &mut params.univariate_logits[i],
            &grad.univariate_logits[i],
            &mut m.univariate_logits[i],
            &mut v.univariate_logits[i],
        );
    }
    for i in 0..params.pair_params.len() {
        update(
            &mut params.pair_params[i],
            &grad.pair_params[i],
            &mut m.pair_params[i],
            &mut v.pair_params[i],
        );
    }
}

fn libm_powi(base: f64, mut exp: u32) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= b;
        }
        b *= b;
        exp >>= 1;
    }
    acc
}

/// Initialization followed by SGD; returns the best-validation model.
pub fn train(
    train_data: &Assignments<'_>,
    valid_data: &Assignments<'_>,
    domain: &VarDomain,
    config: &TrainConfig,
) -> Result<(MoatModel, TrainHistory), MoatError> {
    let initial = initialize(train_data, domain, config.smoothing)?;
    let (best, history) = train_from(initial, train_data, valid_data, domain, config)?;
    Ok((best.realize(domain)?, history))
}

/// Paired histories from one ablation run: deterministic initialization
/// versus standard-normal random initialization, same SGD seed.
#[derive(Clone, Debug)]
pub struct AblationRun {
    pub deterministic: TrainHistory,
    pub random: TrainHistory,
}

/// Trains `n_runs` pairs of models, one from the deterministic
/// initialization and one from N(0,1) random parameters, with run-specific
/// sub-seeds driving both the shuffles and the random draws.
pub fn ablation_compare(
    train_data: &Assignments<'_>,
    valid_data: &Assignments<'_>,
    domain: &VarDomain,
    config: &TrainConfig,
    n_runs: usize,
) -> Result<Vec<AblationRun>, MoatError> {
    if n_runs == 0 {
        return Err(MoatError::EmptyData);
    }
    let det_init = initialize(train_data, domain, config.smoothing)?;
    let mut out = Vec::with_capacity(n_runs);
    for run in 0..n_runs {
        let run_seed = math::subseed(config.seed, 0x5eed_0000 + run as u64);
        let run_config = TrainConfig { seed: run_seed, ..config.clone() };
        let (_, deterministic) =
            train_from(det_init.clone(), train_data, valid_data, domain, &run_config)?;
        let mut rng =
            rand_chacha::ChaCha8Rng::seed_from_u64(math::subseed(run_seed, 0xab1a7e));
        let random_init = FreeParams::standard_normal(domain, &mut rng);
        let (_, random) =
            train_from(random_init, train_data, valid_data, domain, &run_config)?;
        out.push(AblationRun { deterministic, random });
    }
    Ok(out)
}
