mod common;

use binclust::conjugate::{GroupModel, SuffStats};
use binclust::distributions::chain_rng;
use binclust::oracle::{enumerate_compositions, geweke_test, geweke_test_with_model, GewekeConfig};
use binclust::prior::log_restricted_prior;
use binclust::sampler::{
    branch_probabilities, log_acceptance_ratio, merge_proposal, shuffle_proposal, split_proposal,
    MarginalRoute, MoveMix, Proposal,
};
use binclust::{ChainState, GroupParams, Hyperparams, Partition};
use common::{fixed_y_exactness, DropMeanShrinkage};

#[test]
fn fixed_y_chain_matches_enumeration() {
    let result = fixed_y_exactness(1.0, 200_000, 11);
    assert!(
        result.total_variation < 0.02,
        "TV {} exact {:?} empirical {:?}",
        result.total_variation,
        result.exact,
        result.empirical
    );
    // the target is not concentrated on one partition, so the check has teeth
    assert!(result.exact.iter().all(|(_, p)| *p < 0.9));
}

#[test]
fn larger_alpha_means_more_groups() {
    let mean_k = |alpha: f64| {
        fixed_y_exactness(alpha, 50_000, 5)
            .empirical
            .iter()
            .map(|(p, f)| p.num_groups() as f64 * f)
            .sum::<f64>()
    };
    let (small, large) = (mean_k(0.1), mean_k(10.0));
    assert!(small < large, "{small} vs {large}");
}

fn every_move(p: &Partition, mix: &MoveMix) -> Vec<(Proposal, f64)> {
    let (p_split, p_merge) = branch_probabilities(p, mix);
    let sizes = p.sizes();
    let k = sizes.len();
    let mut moves = Vec::new();
    for (j, &s) in sizes.iter().enumerate().filter(|(_, &s)| s >= 2) {
        for cut in 1..s {
            let q = p_split / p.num_splittable() as f64 / (s - 1) as f64;
            moves.push((split_proposal(p, mix, j, cut).unwrap(), q));
        }
    }
    for pair in 0..k.saturating_sub(1) {
        moves.push((
            merge_proposal(p, mix, pair).unwrap(),
            p_merge / (k - 1) as f64,
        ));
    }
    moves
}

fn shuffle_moves(p: &Partition) -> Vec<(Proposal, f64)> {
    let sizes = p.sizes();
    let k = sizes.len();
    let mut moves = Vec::new();
    for pair in 0..k.saturating_sub(1) {
        let total = sizes[pair] + sizes[pair + 1];
        for left in 1..total {
            let q = 1.0 / (k - 1) as f64 / (total - 1) as f64;
            moves.push((shuffle_proposal(p, pair, left).unwrap(), q));
        }
    }
    moves
}

/// Probability flow `p(π) K(π → π')` for every pair of distinct compositions,
/// with the proposal probabilities counted directly rather than taken from
/// the proposal ratios.
fn flows(
    y: &[f64],
    alpha: f64,
    moves: impl Fn(&Partition) -> Vec<(Proposal, f64)>,
) -> Vec<(Partition, Partition, f64, f64)> {
    let model = Hyperparams::default().normal_gamma();
    let log_post = |p: &Partition| {
        log_restricted_prior(p, alpha).unwrap()
            + p.ranges()
                .map(|r| model.log_marginal(&SuffStats::from_slice(&y[r])))
                .sum::<f64>()
    };
    let kernel = |from: &Partition| {
        let state = ChainState {
            y: y.to_vec(),
            e: vec![0; y.len()],
            partition: from.clone(),
            params: vec![
                GroupParams {
                    mu: 0.0,
                    lambda: 1.0
                };
                from.num_groups()
            ],
            alpha,
        };
        moves(from)
            .into_iter()
            .filter(|(prop, _)| prop.partition != *from)
            .map(|(prop, q)| {
                let r =
                    log_acceptance_ratio(&state, &prop, &model, MarginalRoute::WholeGroup).unwrap();
                (prop.partition, q * r.exp().min(1.0))
            })
            .collect::<Vec<_>>()
    };
    let parts = enumerate_compositions(y.len()).unwrap();
    let mut out = Vec::new();
    for a in &parts {
        for (b, k_ab) in kernel(a) {
            let k_ba: f64 = kernel(&b)
                .into_iter()
                .filter(|(c, _)| c == a)
                .map(|(_, k)| k)
                .sum();
            let forward = (log_post(a)).exp() * k_ab;
            let backward = (log_post(&b)).exp() * k_ba;
            out.push((a.clone(), b, forward, backward));
        }
    }
    out
}

#[test]
fn split_merge_satisfies_detailed_balance() {
    let y = [0.1, 0.5, 0.7, 2.0, 2.2, 4.1, 5.0];
    for mix in [
        MoveMix::default(),
        MoveMix {
            split: 0.3,
            merge: 0.7,
        },
    ] {
        for (a, b, forward, backward) in flows(&y, 1.3, |p| every_move(p, &mix)) {
            assert!(
                (forward - backward).abs() <= 1e-12 * forward.max(backward),
                "{a} -> {b}: {forward} vs {backward}"
            );
        }
    }
}

#[test]
fn shuffle_satisfies_detailed_balance() {
    let y = [-1.0, 0.3, 0.4, 1.9, 2.5, 2.6];
    let checked = flows(&y, 0.7, shuffle_moves);
    assert!(!checked.is_empty());
    for (a, b, forward, backward) in checked {
        assert!(
            (forward - backward).abs() <= 1e-12 * forward.max(backward),
            "{a} -> {b}: {forward} vs {backward}"
        );
    }
}

#[test]
fn geweke_passes_for_exact_model() {
    let report = geweke_test(&GewekeConfig::default(), &mut chain_rng(2024, 0)).unwrap();
    assert!(report.z_scores.iter().all(|z| z.is_finite()));
    assert!(report.max_abs_z() < 4.0, "{report:?}");
}

#[test]
fn geweke_catches_broken_rate_update() {
    let config = GewekeConfig::default();
    let broken = DropMeanShrinkage(config.hyper.normal_gamma());
    let report = geweke_test_with_model(&config, &broken, &mut chain_rng(2024, 0)).unwrap();
    assert!(report.max_abs_z() > 6.0, "{report:?}");
}
