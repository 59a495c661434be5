//! Attack-effectiveness measurement: HR@k, Recall@k, surrogate-victim
//! Jaccard similarity, gradient-similarity analysis, and end-to-end victim
//! retraining on poisoned data.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attack::TargetSpec;
use crate::data::InteractionDataset;
use crate::error::{Error, Result};
use crate::recmodel::{
    self, EmbeddingTable, GradientBuffer, LossKind, TopKList, TrainConfig,
};
use crate::seeds;

/// Fraction of eligible real users (those not interacting with the target)
/// whose top-k list contains the target item.
pub fn hit_ratio(
    topk: &[TopKList],
    dataset: &InteractionDataset,
    target: u32,
    k: usize,
) -> Result<f64> {
    if target as usize >= dataset.n_items() {
        return Err(Error::Bounds(format!("target item {target} out of range")));
    }
    let mut eligible = 0usize;
    let mut hits = 0usize;
    for list in topk {
        if list.user >= dataset.real_user_count() {
            continue;
        }
        if list.items.len() != k {
            return Err(Error::Argument(format!(
                "top-k list for user {} has length {}, expected {k}",
                list.user,
                list.items.len()
            )));
        }
        if dataset.interacts(list.user, target) {
            continue;
        }
        eligible += 1;
        if list.items.contains(&target) {
            hits += 1;
        }
    }
    if eligible == 0 {
        return Err(Error::UndefinedMetric(format!(
            "every real user interacts with target {target}"
        )));
    }
    Ok(hits as f64 / eligible as f64)
}

/// Mean over eligible users of `|T_u ∩ I_t| / |I_t \ I_u|`, excluding
/// users who interacted with every target item. With a singleton target
/// this reduces to the hit ratio, bit for bit.
pub fn recall_at_k(
    topk: &[TopKList],
    dataset: &InteractionDataset,
    targets: &TargetSpec,
    k: usize,
) -> Result<f64> {
    targets.check_bounds(dataset)?;
    let mut eligible = 0usize;
    let mut sum = 0.0;
    for list in topk {
        if list.user >= dataset.real_user_count() {
            continue;
        }
        if list.items.len() != k {
            return Err(Error::Argument(format!(
                "top-k list for user {} has length {}, expected {k}",
                list.user,
                list.items.len()
            )));
        }
        let missing = targets
            .items()
            .iter()
            .filter(|&&t| !dataset.interacts(list.user, t))
            .count();
        if missing == 0 {
            continue; // interacted with all targets
        }
        eligible += 1;
        let in_list = targets
            .items()
            .iter()
            .filter(|&&t| !dataset.interacts(list.user, t) && list.items.contains(&t))
            .count();
        sum += in_list as f64 / missing as f64;
    }
    if eligible == 0 {
        return Err(Error::UndefinedMetric(
            "every real user interacts with all target items".into(),
        ));
    }
    Ok(sum / eligible as f64)
}

/// Mean Jaccard index between two models' top-k lists over the same users.
pub fn jaccard_topk_similarity(lists_a: &[TopKList], lists_b: &[TopKList]) -> Result<f64> {
    if lists_a.len() != lists_b.len() {
        return Err(Error::Argument(format!(
            "user sets differ: {} vs {} lists",
            lists_a.len(),
            lists_b.len()
        )));
    }
    if lists_a.is_empty() {
        return Err(Error::Argument("empty top-k collections".into()));
    }
    let mut sorted_a: Vec<&TopKList> = lists_a.iter().collect();
    let mut sorted_b: Vec<&TopKList> = lists_b.iter().collect();
    sorted_a.sort_by_key(|l| l.user);
    sorted_b.sort_by_key(|l| l.user);

    let mut sum = 0.0;
    for (a, b) in sorted_a.iter().zip(&sorted_b) {
        if a.user != b.user {
            return Err(Error::Argument(format!(
                "mismatched user sets: {} vs {}",
                a.user, b.user
            )));
        }
        if a.items.len() != b.items.len() {
            return Err(Error::Argument(format!(
                "mismatched k for user {}: {} vs {}",
                a.user,
                a.items.len(),
                b.items.len()
            )));
        }
        let sa: HashSet<u32> = a.items.iter().copied().collect();
        let sb: HashSet<u32> = b.items.iter().copied().collect();
        let inter = sa.intersection(&sb).count();
        let union = sa.union(&sb).count();
        sum += if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        };
    }
    Ok(sum / lists_a.len() as f64)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairCosineStats {
    pub interacted_mean: f64,
    pub interacted_std: f64,
    pub random_mean: f64,
    pub random_std: f64,
}

/// Cosine similarity of epoch-summed gradients over interacted user-item
/// pairs versus an equal number of seeded random non-interacted pairs.
pub fn gradient_pair_cosine(
    dataset: &InteractionDataset,
    accumulated: &GradientBuffer,
    seed: u64,
) -> PairCosineStats {
    let n = dataset.n_users();
    let interacted: Vec<f64> = dataset
        .edges()
        .map(|(u, i)| cosine(accumulated.row(u as usize), accumulated.row(n + i as usize)))
        .collect();

    let mut rng = seeds::rng(seed, "random-pairs", 0);
    let m = dataset.n_items();
    let mut random = Vec::with_capacity(interacted.len());
    let mut guard = 0usize;
    while random.len() < interacted.len() && guard < interacted.len() * 1000 {
        guard += 1;
        let u = rng.gen_range(0..n);
        let i = rng.gen_range(0..m) as u32;
        if dataset.interacts(u, i) {
            continue;
        }
        random.push(cosine(accumulated.row(u), accumulated.row(n + i as usize)));
    }

    let (im, is) = mean_std(&interacted);
    let (rm, rs) = mean_std(&random);
    PairCosineStats {
        interacted_mean: im,
        interacted_std: is,
        random_mean: rm,
        random_std: rs,
    }
}

/// A victim recommender to retrain from scratch during evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct VictimConfig {
    pub name: String,
    pub dim: usize,
    pub train: TrainConfig,
}

impl VictimConfig {
    pub fn mf_bce(dim: usize, train: TrainConfig) -> Self {
        Self {
            name: "mf_bce".into(),
            dim,
            train: TrainConfig {
                loss: LossKind::Bce,
                ..train
            },
        }
    }

    pub fn mf_bpr(dim: usize, train: TrainConfig) -> Self {
        Self {
            name: "mf_bpr".into(),
            dim,
            train: TrainConfig {
                loss: LossKind::Bpr,
                ..train
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricRecord {
    pub victim: String,
    pub target_set: usize,
    pub seed: u64,
    pub k: usize,
    pub hr: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VictimAggregate {
    pub victim: String,
    pub hr_mean: f64,
    pub hr_std: f64,
    pub recall_mean: f64,
    pub recall_std: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsReport {
    pub k: usize,
    pub records: Vec<MetricRecord>,
    pub aggregates: Vec<VictimAggregate>,
}

impl MetricsReport {
    /// Recompute the per-victim aggregates from the raw records.
    pub fn aggregates_from_records(records: &[MetricRecord]) -> Vec<VictimAggregate> {
        let mut victims: Vec<String> = Vec::new();
        for r in records {
            if !victims.contains(&r.victim) {
                victims.push(r.victim.clone());
            }
        }
        victims
            .into_iter()
            .map(|v| {
                let hrs: Vec<f64> = records
                    .iter()
                    .filter(|r| r.victim == v)
                    .map(|r| r.hr)
                    .collect();
                let recalls: Vec<f64> = records
                    .iter()
                    .filter(|r| r.victim == v)
                    .map(|r| r.recall)
                    .collect();
                let (hr_mean, hr_std) = mean_std(&hrs);
                let (recall_mean, recall_std) = mean_std(&recalls);
                VictimAggregate {
                    victim: v,
                    hr_mean,
                    hr_std,
                    recall_mean,
                    recall_std,
                }
            })
            .collect()
    }

    /// CSV payload: one row per victim x target-set x seed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("victim,target_set,seed,hr,recall\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.victim, r.target_set, r.seed, r.hr, r.recall
            ));
        }
        out
    }
}

/// Retrain each victim from scratch on the poisoned data for every seed,
/// then measure HR@k and Recall@k per target set. HR over a multi-item
/// set is the mean per-item hit ratio.
pub fn evaluate_attack(
    poisoned: &InteractionDataset,
    victims: &[VictimConfig],
    target_sets: &[TargetSpec],
    k: usize,
    seeds: &[u64],
) -> Result<MetricsReport> {
    if k < 1 {
        return Err(Error::Argument("k must be >= 1".into()));
    }
    let mut records = Vec::new();
    for victim in victims {
        for &seed in seeds {
            let topk = train_victim_topk(poisoned, victim, k, seed)
                .map_err(|e| Error::Victim {
                    victim: victim.name.clone(),
                    source: Box::new(e),
                })?;
            for (ts_idx, ts) in target_sets.iter().enumerate() {
                let recall = recall_at_k(&topk, poisoned, ts, k)?;
                let mut hr_sum = 0.0;
                for &t in ts.items() {
                    hr_sum += hit_ratio(&topk, poisoned, t, k)?;
                }
                let hr = hr_sum / ts.len() as f64;
                records.push(MetricRecord {
                    victim: victim.name.clone(),
                    target_set: ts_idx,
                    seed,
                    k,
                    hr,
                    recall,
                });
            }
        }
    }
    for r in &records {
        debug_assert!((0.0..=1.0).contains(&r.hr) && (0.0..=1.0).contains(&r.recall));
    }
    let aggregates = MetricsReport::aggregates_from_records(&records);
    Ok(MetricsReport {
        k,
        records,
        aggregates,
    })
}

/// Fresh initialization, full training on the poisoned data, top-k lists
/// for every real user.
pub fn train_victim_topk(
    poisoned: &InteractionDataset,
    victim: &VictimConfig,
    k: usize,
    seed: u64,
) -> Result<Vec<TopKList>> {
    let mut cfg = victim.train.clone();
    cfg.seed = seeds::child(seed, "victim-train", 0);
    let mut table = EmbeddingTable::init(
        poisoned.n_users(),
        poisoned.n_items(),
        victim.dim,
        seeds::child(seed, "victim-init", 0),
    );
    recmodel::fit(&mut table, poisoned, &cfg, None)?;
    recmodel::top_k_real_users(&table, poisoned, k)
}
