//! Posterior simulation: latent-value augmentation, group parameters, the
//! total mass parameter and the split/merge/shuffle partition moves.
//!
//! One iteration runs, in order: a split or a merge, a shuffle, the latent
//! update, the group-parameter update and the total-mass update. Partition
//! moves are Metropolis-Hastings steps on the partition with the group
//! parameters integrated out; when a move is accepted the parameters of the
//! groups it created are drawn from their conditional posteriors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::binning::expand_memberships;
use crate::conjugate::{
    log_marginal_sequential, sample_group_params, GroupModel, NormalGammaParams, SuffStats,
};
use crate::distributions::{
    chain_rng, sample_beta, sample_gamma, sample_truncated_normal, ChainRng,
};
use crate::error::{Error, Result};
use crate::prior::log_restricted_prior;
use crate::types::{
    BinLayout, BinnedDataset, ChainState, Hyperparams, MoveCounts, Partition, Trace,
};

/// Probabilities of proposing a split or a merge when both are possible.
/// When only one of them is possible it gets all the mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveMix {
    pub split: f64,
    pub merge: f64,
}

impl Default for MoveMix {
    fn default() -> Self {
        Self {
            split: 0.5,
            merge: 0.5,
        }
    }
}

/// Which blocks of the state an iteration updates. Freezing blocks is used by
/// the exactness tests (fixed latent values, fixed total mass).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Updates {
    pub partition: bool,
    pub latent: bool,
    pub params: bool,
    pub alpha: bool,
}

impl Default for Updates {
    fn default() -> Self {
        Self {
            partition: true,
            latent: true,
            params: true,
            alpha: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    #[serde(default)]
    pub move_mix: MoveMix,
    #[serde(default)]
    pub updates: Updates,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            iterations: 30_000,
            burn_in: 20_000,
            thin: 1,
            seed: 0,
            move_mix: MoveMix::default(),
            updates: Updates::default(),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidConfig(format!(
                "burn-in {} must be below the iteration count {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thinning must be positive".into()));
        }
        let MoveMix { split, merge } = self.move_mix;
        if !(split >= 0.0 && merge >= 0.0) || (split + merge - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "split/merge probabilities ({split}, {merge}) must be nonnegative and sum to 1"
            )));
        }
        Ok(())
    }

    /// Number of draws a run retains.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Builds the starting state: memberships expanded from the frequencies,
/// latent values uniform within their bins, a single group, group parameters
/// drawn given those values and the total mass drawn from its hyperprior.
pub fn init_state<M: GroupModel, R: Rng + ?Sized>(
    dataset: &BinnedDataset,
    model: &M,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<ChainState> {
    crate::types::validate_dataset(dataset)?;
    hyper.validate()?;
    let layout = &dataset.layout;
    let e = expand_memberships(&dataset.freqs)?;
    let y = e
        .iter()
        .map(|&bin| draw_in_bin(layout, bin, rng))
        .collect::<Vec<_>>();
    let partition = Partition::single(y.len())?;
    let params = vec![sample_group_params(
        &model.posterior(&SuffStats::from_slice(&y)),
        rng,
    )?];
    let alpha = sample_gamma(hyper.alpha_shape, hyper.alpha_rate, rng)?;
    ChainState::new(y, e, partition, params, alpha, layout)
}

/// Uniform inside a bounded bin; open-ended bins get an exponential offset
/// from their finite edge (or a standard normal for the whole line).
fn draw_in_bin<R: Rng + ?Sized>(layout: &BinLayout, bin: usize, rng: &mut R) -> f64 {
    let (lo, hi) = layout.bounds(bin);
    let u: f64 = rng.random();
    let x = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => hi - (hi - lo) * u,
        (true, false) => lo - (1.0 - u).ln(),
        (false, true) => hi + (1.0 - u).ln(),
        (false, false) => crate::distributions::std_normal_quantile(u.max(f64::MIN_POSITIVE)),
    };
    if layout.contains(bin, x) {
        x
    } else if x > hi {
        hi
    } else {
        lo.next_up().min(hi)
    }
}

/// Redraws every latent value from its group's normal truncated to its bin.
pub fn update_latent<R: Rng + ?Sized>(
    state: &mut ChainState,
    layout: &BinLayout,
    rng: &mut R,
) -> Result<()> {
    let ranges: Vec<_> = state.partition.ranges().collect();
    for (range, theta) in ranges.into_iter().zip(&state.params) {
        let sd = theta.sd();
        for i in range {
            let (lo, hi) = layout.bounds(state.e[i]);
            match sample_truncated_normal(theta.mu, sd, lo, hi, rng) {
                Ok(y) => state.y[i] = y,
                // the current value is a valid point of the bin; keep it
                Err(Error::NumericalUnderflow { .. }) => {
                    log::warn!("latent update underflow for y[{}] in ({lo}, {hi}]", i + 1)
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

/// Redraws the parameters of every group from its conditional posterior.
pub fn update_params<M: GroupModel, R: Rng + ?Sized>(
    state: &mut ChainState,
    model: &M,
    rng: &mut R,
) -> Result<()> {
    let ranges: Vec<_> = state.partition.ranges().collect();
    for (j, range) in ranges.into_iter().enumerate() {
        let post = model.posterior(&SuffStats::from_slice(&state.y[range]));
        state.params[j] = sample_group_params(&post, rng)?;
    }
    Ok(())
}

/// Probability of the `shape + k` gamma component in the auxiliary-variable
/// update of the total mass, given the auxiliary draw `eta`.
pub fn escobar_west_weight(shape: f64, rate: f64, k: usize, n: usize, eta: f64) -> f64 {
    let odds = (shape + k as f64 - 1.0) / (n as f64 * (rate - eta.ln()));
    odds / (1.0 + odds)
}

/// Redraws the total mass parameter through the auxiliary variable
/// `eta ~ Beta(alpha + 1, n)` and the resulting two-component gamma mixture.
pub fn update_alpha<R: Rng + ?Sized>(
    state: &mut ChainState,
    shape: f64,
    rate: f64,
    rng: &mut R,
) -> Result<()> {
    let n = state.n();
    let k = state.partition.num_groups();
    let eta = sample_beta(state.alpha + 1.0, n as f64, rng)?;
    let w = escobar_west_weight(shape, rate, k, n, eta);
    let u: f64 = rng.random();
    let post_shape = if u < w {
        shape + k as f64
    } else {
        shape + k as f64 - 1.0
    };
    state.alpha = sample_gamma(post_shape, rate - eta.ln(), rng)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Split,
    Merge,
    Shuffle,
}

/// A proposed partition together with `log q(π | π') - log q(π' | π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub kind: MoveKind,
    pub partition: Partition,
    pub log_proposal_ratio: f64,
}

/// Split and merge branch probabilities for a partition.
pub fn branch_probabilities(partition: &Partition, mix: &MoveMix) -> (f64, f64) {
    let can_split = partition.num_splittable() > 0;
    let can_merge = partition.num_groups() >= 2;
    match (can_split, can_merge) {
        (true, true) => (mix.split, mix.merge),
        (true, false) => (1.0, 0.0),
        (false, true) => (0.0, 1.0),
        (false, false) => (0.0, 0.0),
    }
}

/// Log probability of proposing the split of `group` at `cut` from `partition`.
fn log_split_probability(partition: &Partition, mix: &MoveMix, group: usize) -> f64 {
    let (p_split, _) = branch_probabilities(partition, mix);
    let size = partition.sizes()[group];
    p_split.ln() - (partition.num_splittable() as f64).ln() - ((size - 1) as f64).ln()
}

/// Log probability of proposing the merge of one given adjacent pair.
fn log_merge_probability(partition: &Partition, mix: &MoveMix) -> f64 {
    let (_, p_merge) = branch_probabilities(partition, mix);
    p_merge.ln() - ((partition.num_groups() - 1) as f64).ln()
}

/// The split of `group` (0-based) after its first `cut` elements.
pub fn split_proposal(
    partition: &Partition,
    mix: &MoveMix,
    group: usize,
    cut: usize,
) -> Result<Proposal> {
    let proposed = partition.split(group, cut)?;
    let forward = log_split_probability(partition, mix, group);
    let reverse = log_merge_probability(&proposed, mix);
    Ok(Proposal {
        kind: MoveKind::Split,
        partition: proposed,
        log_proposal_ratio: reverse - forward,
    })
}

/// The merge of groups `pair` and `pair + 1` (0-based).
pub fn merge_proposal(partition: &Partition, mix: &MoveMix, pair: usize) -> Result<Proposal> {
    let proposed = partition.merge(pair)?;
    let forward = log_merge_probability(partition, mix);
    let reverse = log_split_probability(&proposed, mix, pair);
    Ok(Proposal {
        kind: MoveKind::Merge,
        partition: proposed,
        log_proposal_ratio: reverse - forward,
    })
}

/// Moves the boundary of pair `pair` so the left group has `left` elements.
pub fn shuffle_proposal(partition: &Partition, pair: usize, left: usize) -> Result<Proposal> {
    Ok(Proposal {
        kind: MoveKind::Shuffle,
        partition: partition.reshuffle(pair, left)?,
        log_proposal_ratio: 0.0,
    })
}

/// Splits a uniformly chosen non-singleton group at a uniformly chosen cut.
pub fn propose_split<R: Rng + ?Sized>(
    partition: &Partition,
    mix: &MoveMix,
    rng: &mut R,
) -> Result<Proposal> {
    let splittable: Vec<usize> = partition
        .sizes()
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= 2)
        .map(|(j, _)| j)
        .collect();
    if splittable.is_empty() {
        return Err(Error::NoSplittableGroup);
    }
    let group = splittable[rng.random_range(0..splittable.len())];
    let cut = rng.random_range(1..partition.sizes()[group]);
    split_proposal(partition, mix, group, cut)
}

/// Merges a uniformly chosen pair of adjacent groups.
pub fn propose_merge<R: Rng + ?Sized>(
    partition: &Partition,
    mix: &MoveMix,
    rng: &mut R,
) -> Result<Proposal> {
    let k = partition.num_groups();
    if k < 2 {
        return Err(Error::SingleGroup);
    }
    merge_proposal(partition, mix, rng.random_range(0..k - 1))
}

/// Redraws the boundary of a uniformly chosen adjacent pair uniformly among
/// the positions that keep both groups nonempty.
pub fn propose_shuffle<R: Rng + ?Sized>(partition: &Partition, rng: &mut R) -> Result<Proposal> {
    let k = partition.num_groups();
    if k < 2 {
        return Err(Error::SingleGroup);
    }
    let pair = rng.random_range(0..k - 1);
    let total = partition.sizes()[pair] + partition.sizes()[pair + 1];
    shuffle_proposal(partition, pair, rng.random_range(1..total))
}

/// How group marginal likelihoods are evaluated in acceptance ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalRoute {
    /// Closed form from the group's sufficient statistics.
    WholeGroup,
    /// Product of one-step posterior predictives (exact normal-gamma only).
    Predictive,
}

/// Group index ranges present in `a` but not in `b`.
fn changed_ranges(a: &Partition, b: &Partition) -> Vec<std::ops::Range<usize>> {
    let others: Vec<_> = b.ranges().collect();
    a.ranges().filter(|r| !others.contains(r)).collect()
}

fn group_log_marginal<M: GroupModel>(model: &M, values: &[f64], route: MarginalRoute) -> f64 {
    match route {
        MarginalRoute::WholeGroup => model.log_marginal(&SuffStats::from_slice(values)),
        MarginalRoute::Predictive => log_marginal_sequential(model.prior(), values),
    }
}

/// Log Metropolis-Hastings ratio of a partition proposal with the group
/// parameters integrated out over the current latent values.
pub fn log_acceptance_ratio<M: GroupModel>(
    state: &ChainState,
    proposal: &Proposal,
    model: &M,
    route: MarginalRoute,
) -> Result<f64> {
    let current = &state.partition;
    let proposed = &proposal.partition;
    if proposed.n() != current.n() {
        return Err(Error::InvalidPartition(format!(
            "proposal {proposed} does not cover {} observations",
            current.n()
        )));
    }
    let prior =
        log_restricted_prior(proposed, state.alpha)? - log_restricted_prior(current, state.alpha)?;
    let gained: f64 = changed_ranges(proposed, current)
        .into_iter()
        .map(|r| group_log_marginal(model, &state.y[r], route))
        .sum();
    let lost: f64 = changed_ranges(current, proposed)
        .into_iter()
        .map(|r| group_log_marginal(model, &state.y[r], route))
        .sum();
    Ok(prior + gained - lost + proposal.log_proposal_ratio)
}

/// Accepts or rejects a proposal; on acceptance the partition is replaced and
/// new groups get parameters drawn from their posteriors. Groups that the move
/// left untouched keep their parameters.
pub fn accept_partition_move<M: GroupModel, R: Rng + ?Sized>(
    state: &mut ChainState,
    proposal: Proposal,
    model: &M,
    rng: &mut R,
) -> Result<bool> {
    let log_ratio = log_acceptance_ratio(state, &proposal, model, MarginalRoute::WholeGroup)?;
    let u: f64 = rng.random();
    let accept = u.ln() < log_ratio;
    if !accept {
        return Ok(false);
    }
    let old: Vec<_> = state
        .partition
        .ranges()
        .zip(state.params.iter().copied())
        .collect();
    let mut params = Vec::with_capacity(proposal.partition.num_groups());
    for range in proposal.partition.ranges() {
        let theta = match old.iter().find(|(r, _)| *r == range) {
            Some((_, theta)) => *theta,
            None => sample_group_params(
                &model.posterior(&SuffStats::from_slice(&state.y[range])),
                rng,
            )?,
        };
        params.push(theta);
    }
    state.partition = proposal.partition;
    state.params = params;
    debug_assert_eq!(state.partition.n(), state.y.len());
    Ok(true)
}

/// The full transition kernel for one dataset layout and model.
pub struct Sampler<'a, M = NormalGammaParams> {
    layout: &'a BinLayout,
    model: M,
    hyper: Hyperparams,
    config: SamplerConfig,
}

impl<'a> Sampler<'a, NormalGammaParams> {
    pub fn new(layout: &'a BinLayout, hyper: &Hyperparams, config: SamplerConfig) -> Result<Self> {
        Self::with_model(layout, hyper.normal_gamma(), hyper, config)
    }
}

impl<'a, M: GroupModel> Sampler<'a, M> {
    pub fn with_model(
        layout: &'a BinLayout,
        model: M,
        hyper: &Hyperparams,
        config: SamplerConfig,
    ) -> Result<Self> {
        layout.validate()?;
        hyper.validate()?;
        config.validate()?;
        Ok(Self {
            layout,
            model,
            hyper: *hyper,
            config,
        })
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn init_state<R: Rng + ?Sized>(
        &self,
        dataset: &BinnedDataset,
        rng: &mut R,
    ) -> Result<ChainState> {
        init_state(dataset, &self.model, &self.hyper, rng)
    }

    /// One iteration of the kernel.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        counts: &mut MoveCounts,
        rng: &mut R,
    ) -> Result<()> {
        let updates = self.config.updates;
        if updates.partition {
            let (p_split, p_merge) = branch_probabilities(&state.partition, &self.config.move_mix);
            if p_split + p_merge > 0.0 {
                let u: f64 = rng.random();
                if u < p_split {
                    let proposal = propose_split(&state.partition, &self.config.move_mix, rng)?;
                    counts.split_proposed += 1;
                    if accept_partition_move(state, proposal, &self.model, rng)? {
                        counts.split_accepted += 1;
                    }
                } else {
                    let proposal = propose_merge(&state.partition, &self.config.move_mix, rng)?;
                    counts.merge_proposed += 1;
                    if accept_partition_move(state, proposal, &self.model, rng)? {
                        counts.merge_accepted += 1;
                    }
                }
            }
            if state.partition.num_groups() >= 2 {
                let proposal = propose_shuffle(&state.partition, rng)?;
                counts.shuffle_proposed += 1;
                if accept_partition_move(state, proposal, &self.model, rng)? {
                    counts.shuffle_accepted += 1;
                }
            }
        }
        if updates.latent {
            update_latent(state, self.layout, rng)?;
        }
        if updates.params {
            update_params(state, &self.model, rng)?;
        }
        if updates.alpha {
            update_alpha(state, self.hyper.alpha_shape, self.hyper.alpha_rate, rng)?;
        }
        debug_assert!(state.check(self.layout).is_ok());
        Ok(())
    }

    /// Runs the configured number of iterations from `state`, keeping every
    /// `thin`-th draw after burn-in. Returns the trace and the final state.
    pub fn run<R: Rng + ?Sized>(
        &self,
        mut state: ChainState,
        rng: &mut R,
    ) -> Result<(Trace, ChainState)> {
        state.check(self.layout)?;
        let SamplerConfig {
            iterations,
            burn_in,
            thin,
            ..
        } = self.config;
        let mut trace = Trace::default();
        let report_every = (iterations / 10).max(1);
        for t in 0..iterations {
            self.step(&mut state, &mut trace.moves, rng)?;
            if t >= burn_in && (t + 1 - burn_in) % thin == 0 {
                trace.push(t, &state);
            }
            if (t + 1) % report_every == 0 {
                log::debug!(
                    "iteration {}/{iterations}: k = {}, alpha = {:.4}",
                    t + 1,
                    state.partition.num_groups(),
                    state.alpha
                );
            }
        }
        Ok((trace, state))
    }
}

/// Runs one chain on stream `stream` of the configured seed.
pub fn run_chain_on_stream(
    dataset: &BinnedDataset,
    hyper: &Hyperparams,
    config: &SamplerConfig,
    stream: u64,
) -> Result<Trace> {
    let sampler = Sampler::new(&dataset.layout, hyper, *config)?;
    let mut rng: ChainRng = chain_rng(config.seed, stream);
    let state = sampler.init_state(dataset, &mut rng)?;
    let (trace, _) = sampler.run(state, &mut rng)?;
    Ok(trace)
}

/// Fits one chain from the seed in `config`.
pub fn run_chain(
    dataset: &BinnedDataset,
    hyper: &Hyperparams,
    config: &SamplerConfig,
) -> Result<Trace> {
    run_chain_on_stream(dataset, hyper, config, 0)
}

/// Runs `chains` independent chains in parallel; chain `i` uses stream `i` of
/// the configured seed, so chain 0 reproduces [`run_chain`].
pub fn run_chains(
    dataset: &BinnedDataset,
    hyper: &Hyperparams,
    config: &SamplerConfig,
    chains: usize,
) -> Result<Vec<Trace>> {
    if chains == 0 {
        return Err(Error::InvalidConfig("chain count must be positive".into()));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains)
            .map(|i| scope.spawn(move || run_chain_on_stream(dataset, hyper, config, i as u64)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    })
}
