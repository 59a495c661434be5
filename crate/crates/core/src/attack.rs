//! Fake-user generation: the Random/Bandwagon heuristics, the iterative
//! surrogate-guided attack loop with optional gradient passing, surrogate
//! pretraining, and sampled retraining sets.

use rand::seq::index::sample as index_sample;

use crate::data::{inject_fake, FakeInteractions, InteractionDataset};
use crate::error::{Error, Result};
use crate::gpengine::GpConfig;
use crate::recmodel::{
    self, softplus, train_epoch_hooked, EmbeddingTable, GradientBuffer, LossKind, TrainConfig,
    TrainHooks,
};
use crate::seeds;

/// Attack budgets: number of fake users and interactions per fake user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackBudget {
    pub n_fake: usize,
    pub tau: usize,
}

impl AttackBudget {
    pub fn validate(&self) -> Result<()> {
        if self.n_fake < 1 || self.tau < 1 {
            return Err(Error::Argument("attack budgets must be >= 1".into()));
        }
        Ok(())
    }

    /// Paper defaults: 1% of real users, and the mean real interaction
    /// count as the per-user budget.
    pub fn defaults_for(dataset: &InteractionDataset) -> Self {
        let n_real = dataset.real_user_count();
        let nnz: usize = (0..n_real).map(|u| dataset.user_degree(u)).sum();
        let mean = (nnz as f64 / n_real.max(1) as f64).round() as usize;
        Self {
            n_fake: ((0.01 * n_real as f64).ceil() as usize).max(1),
            tau: mean.max(1),
        }
    }
}

/// Set of promoted item indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSpec {
    items: Vec<u32>,
}

impl TargetSpec {
    pub fn new(mut items: Vec<u32>) -> Result<Self> {
        items.sort_unstable();
        items.dedup();
        if items.is_empty() {
            return Err(Error::Argument("target set must be nonempty".into()));
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[u32] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, item: u32) -> bool {
        self.items.binary_search(&item).is_ok()
    }

    pub fn check_bounds(&self, dataset: &InteractionDataset) -> Result<()> {
        for &i in &self.items {
            if i as usize >= dataset.n_items() {
                return Err(Error::Bounds(format!(
                    "target item {i} out of range for {} items",
                    dataset.n_items()
                )));
            }
        }
        Ok(())
    }

    /// `count` items drawn uniformly without replacement.
    pub fn random(dataset: &InteractionDataset, count: usize, seed: u64) -> Result<Self> {
        if count == 0 || count > dataset.n_items() {
            return Err(Error::Argument(format!(
                "cannot draw {count} targets from {} items",
                dataset.n_items()
            )));
        }
        let mut rng = seeds::rng(seed, "targets", 0);
        let items = index_sample(&mut rng, dataset.n_items(), count)
            .iter()
            .map(|i| i as u32)
            .collect();
        Self::new(items)
    }
}

/// Surrogate training configuration for the attack loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateConfig {
    pub dim: usize,
    /// Base optimizer settings (loss must be BCE). `train.epochs` is the
    /// pretraining budget when `pretrain` is set.
    pub train: TrainConfig,
    /// Recommendation-loss epochs per fake-user iteration.
    pub retrain_epochs: usize,
    /// Adversarial-phase epochs per fake-user iteration.
    pub adv_epochs: usize,
    pub adv_weight: f64,
    pub pretrain: bool,
    /// Fraction of real edges kept in each retraining set; 0 disables
    /// sampling.
    pub sample_ratio: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            dim: 16,
            train: TrainConfig::default(),
            retrain_epochs: 1,
            adv_epochs: 1,
            adv_weight: 1.0,
            pretrain: false,
            sample_ratio: 0.0,
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.train.loss != LossKind::Bce {
            return Err(Error::Argument("surrogate loss must be BCE".into()));
        }
        if self.retrain_epochs < 1 {
            return Err(Error::Argument("retrain_epochs must be >= 1".into()));
        }
        if self.adv_weight <= 0.0 {
            return Err(Error::Argument("adv_weight must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.sample_ratio) {
            return Err(Error::Argument("sample_ratio must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicKind {
    Random,
    Bandwagon,
}

/// Items making up the most-interacted decile, ties broken by index.
fn popular_items(dataset: &InteractionDataset) -> Vec<u32> {
    let m = dataset.n_items();
    let mut by_count: Vec<(usize, u32)> = (0..m)
        .map(|i| (dataset.item_degree(i), i as u32))
        .collect();
    by_count.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let take = ((m as f64) * 0.1).ceil() as usize;
    by_count.iter().take(take.max(1)).map(|&(_, i)| i).collect()
}

fn sample_from<R: rand::Rng>(pool: &[u32], count: usize, rng: &mut R) -> Vec<u32> {
    if count >= pool.len() {
        return pool.to_vec();
    }
    index_sample(rng, pool.len(), count)
        .iter()
        .map(|k| pool[k])
        .collect()
}

/// Heuristic fake users: every row holds all target items; remaining
/// budget slots are filled with random items (Random) or half popular,
/// half random items (Bandwagon).
pub fn heuristic_attack(
    kind: HeuristicKind,
    dataset: &InteractionDataset,
    targets: &TargetSpec,
    budget: AttackBudget,
    seed: u64,
) -> Result<FakeInteractions> {
    budget.validate()?;
    targets.check_bounds(dataset)?;
    if budget.tau < targets.len() {
        return Err(Error::Argument(format!(
            "budget tau={} cannot hold {} target items",
            budget.tau,
            targets.len()
        )));
    }

    let non_target: Vec<u32> = (0..dataset.n_items() as u32)
        .filter(|&i| !targets.contains(i))
        .collect();
    let popular: Vec<u32> = popular_items(dataset)
        .into_iter()
        .filter(|&i| !targets.contains(i))
        .collect();
    let fill = budget.tau - targets.len();

    let mut rows = Vec::with_capacity(budget.n_fake);
    for r in 0..budget.n_fake {
        let mut rng = seeds::rng(seed, "heuristic-row", r as u64);
        let mut row = targets.items().to_vec();
        match kind {
            HeuristicKind::Random => {
                row.extend(sample_from(&non_target, fill, &mut rng));
            }
            HeuristicKind::Bandwagon => {
                let n_pop = (fill / 2).min(popular.len());
                let chosen = sample_from(&popular, n_pop, &mut rng);
                let rest: Vec<u32> = non_target
                    .iter()
                    .copied()
                    .filter(|i| !chosen.contains(i))
                    .collect();
                let n_rand = (fill - chosen.len()).min(rest.len());
                row.extend(chosen);
                row.extend(sample_from(&rest, n_rand, &mut rng));
            }
        }
        rows.push(row);
    }
    FakeInteractions::new(rows, budget.tau)
}

/// Promotion loss: for every real user not yet interacting with a target
/// item, `softplus(-r_u . r_t)` pushes that score up.
pub fn adversarial_loss(
    table: &EmbeddingTable,
    dataset: &InteractionDataset,
    targets: &TargetSpec,
) -> f64 {
    let mut loss = 0.0;
    for u in 0..dataset.real_user_count() {
        let ru = table.user_row(u);
        for &t in targets.items() {
            if !dataset.interacts(u, t) {
                let s: f64 = ru
                    .iter()
                    .zip(table.item_row(t as usize))
                    .map(|(a, b)| a * b)
                    .sum();
                loss += softplus(-s);
            }
        }
    }
    loss
}

/// Gradient of [`adversarial_loss`] with respect to the representations.
pub fn adversarial_gradient(
    table: &EmbeddingTable,
    dataset: &InteractionDataset,
    targets: &TargetSpec,
) -> GradientBuffer {
    let n = table.n_users();
    let mut grad = GradientBuffer::zeros(table.n_rows(), table.dim());
    for u in 0..dataset.real_user_count() {
        for &t in targets.items() {
            if !dataset.interacts(u, t) {
                let s = table.score(u, t as usize);
                let c = -crate::recmodel::sigmoid(-s);
                grad.axpy_row(u, table.item_row(t as usize), c);
                grad.axpy_row(n + t as usize, table.user_row(u), c);
            }
        }
    }
    grad
}

/// Train a surrogate on the real interactions alone; the returned table is
/// restored (and extended with fake rows) in each attack iteration.
pub fn pretrain_surrogate(
    dataset: &InteractionDataset,
    scfg: &SurrogateConfig,
) -> Result<EmbeddingTable> {
    scfg.validate()?;
    let mut table = EmbeddingTable::init(
        dataset.n_users(),
        dataset.n_items(),
        scfg.dim,
        scfg.train.seed,
    );
    for epoch in 0..scfg.train.epochs {
        recmodel::train_epoch(&mut table, dataset, &scfg.train, None, epoch)?;
    }
    Ok(table)
}

/// Poisoned dataset holding a uniform `sample_ratio` fraction of the real
/// edges (exactly `floor(ratio * nnz_real)` of them) plus all fake edges.
pub fn sampled_retrain_set(
    dataset: &InteractionDataset,
    fake: &FakeInteractions,
    sample_ratio: f64,
    seed: u64,
) -> Result<InteractionDataset> {
    if !(sample_ratio > 0.0 && sample_ratio <= 1.0) {
        return Err(Error::Argument("sample_ratio must be in (0, 1]".into()));
    }
    let real = dataset.real_user_count();
    let edges: Vec<(u32, u32)> = dataset
        .edges()
        .filter(|&(u, _)| (u as usize) < real)
        .collect();
    let want = ((sample_ratio * edges.len() as f64).floor() as usize).min(edges.len());

    let mut rng = seeds::rng(seed, "sample-bernoulli", 0);
    let mut keep: Vec<bool> = edges
        .iter()
        .map(|_| rng.gen_range(0.0..1.0) < sample_ratio)
        .collect();
    let kept = keep.iter().filter(|&&k| k).count();

    // Exact count adjustment after the Bernoulli pass.
    let mut adjust_rng = seeds::rng(seed, "sample-adjust", 0);
    if kept > want {
        let kept_idx: Vec<usize> = (0..edges.len()).filter(|&e| keep[e]).collect();
        for pos in index_sample(&mut adjust_rng, kept_idx.len(), kept - want) {
            keep[kept_idx[pos]] = false;
        }
    } else if kept < want {
        let dropped_idx: Vec<usize> = (0..edges.len()).filter(|&e| !keep[e]).collect();
        for pos in index_sample(&mut adjust_rng, dropped_idx.len(), want - kept) {
            keep[dropped_idx[pos]] = true;
        }
    }

    let mut rows = vec![Vec::new(); real];
    for (e, &(u, i)) in edges.iter().enumerate() {
        if keep[e] {
            rows[u as usize].push(i);
        }
    }
    let sampled = dataset.with_real_rows(rows)?;
    inject_fake(&sampled, fake)
}

use rand::Rng;

/// Iterative surrogate-guided attack: one fake user is crafted per
/// iteration by retraining the surrogate on the current poisoned data,
/// optionally with gradient passing, then filling the user's remaining
/// budget with the items the surrogate scores highest.
pub fn dpa2dl_gp_attack(
    dataset: &InteractionDataset,
    targets: &TargetSpec,
    budget: AttackBudget,
    scfg: &SurrogateConfig,
    gp: Option<&GpConfig>,
    seed: u64,
) -> Result<FakeInteractions> {
    budget.validate()?;
    scfg.validate()?;
    targets.check_bounds(dataset)?;
    if let Some(g) = gp {
        g.validate()?;
    }
    if dataset.n_users() != dataset.real_user_count() {
        return Err(Error::Argument(
            "attack input must contain only real users".into(),
        ));
    }
    if budget.tau < targets.len() {
        return Err(Error::Argument(format!(
            "budget tau={} cannot hold {} target items",
            budget.tau,
            targets.len()
        )));
    }

    let n_real = dataset.n_users();
    let fill = budget.tau - targets.len();
    let pretrained = if scfg.pretrain {
        Some(pretrain_surrogate(dataset, scfg)?)
    } else {
        None
    };

    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(budget.n_fake);
    for i in 0..budget.n_fake {
        rows.push(targets.items().to_vec());
        let step = |e: Error| Error::Attack {
            fake_user: i,
            source: Box::new(e),
        };

        let fake_so_far = FakeInteractions::new(rows.clone(), budget.tau).map_err(step)?;
        let full_poisoned = inject_fake(dataset, &fake_so_far).map_err(step)?;
        let train_set = if scfg.sample_ratio > 0.0 && scfg.sample_ratio < 1.0 {
            sampled_retrain_set(
                dataset,
                &fake_so_far,
                scfg.sample_ratio,
                seeds::child(seed, "retrain-sample", i as u64),
            )
            .map_err(step)?
        } else {
            full_poisoned.clone()
        };

        let mut surrogate = match &pretrained {
            Some(pre) => pre.extend_users(i + 1, seeds::child(seed, "fake-rows", i as u64)),
            None => EmbeddingTable::init(
                n_real + i + 1,
                dataset.n_items(),
                scfg.dim,
                seeds::child(seed, "surrogate-init", i as u64),
            ),
        };

        // recommendation phase; GP passes over the full poisoned graph
        // even when training draws from the sampled set
        let mut rec_cfg = scfg.train.clone();
        rec_cfg.seed = seeds::child(seed, "rec-train", i as u64);
        for epoch in 0..scfg.retrain_epochs {
            train_epoch_hooked(
                &mut surrogate,
                &train_set,
                &rec_cfg,
                epoch,
                TrainHooks {
                    gp: gp.map(|g| (g, &full_poisoned)),
                    ..TrainHooks::default()
                },
            )
            .map_err(step)?;
        }

        // adversarial phase: GP still applies to the recommendation-loss
        // gradient only; the promotion gradient is added afterwards
        let mut adv_cfg = scfg.train.clone();
        adv_cfg.seed = seeds::child(seed, "adv-train", i as u64);
        let adv_weight = scfg.adv_weight;
        let promote = |table: &EmbeddingTable| {
            let mut g = adversarial_gradient(table, &full_poisoned, targets);
            g.values_mut().iter_mut().for_each(|v| *v *= adv_weight);
            g
        };
        for epoch in 0..scfg.adv_epochs {
            train_epoch_hooked(
                &mut surrogate,
                &train_set,
                &adv_cfg,
                epoch,
                TrainHooks {
                    gp: gp.map(|g| (g, &full_poisoned)),
                    extra_gradient: Some(&promote),
                    ..TrainHooks::default()
                },
            )
            .map_err(step)?;
        }

        // fill the row with the highest-scoring non-target items
        let fake_global = n_real + i;
        let mut scored: Vec<(f64, u32)> = (0..dataset.n_items())
            .filter(|&j| !targets.contains(j as u32))
            .map(|j| (surrogate.score(fake_global, j), j as u32))
            .collect();
        scored.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let row = &mut rows[i];
        row.extend(scored.iter().take(fill).map(|&(_, j)| j));
        row.sort_unstable();
    }

    FakeInteractions::new(rows, budget.tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recmodel::{BatchSize, Negatives};

    fn fixture(n_users: usize, n_items: usize, seed: u64) -> InteractionDataset {
        let mut rng = seeds::rng(seed, "attack-fixture", 0);
        let rows = (0..n_users)
            .map(|_| {
                let mut row: Vec<u32> = (0..n_items)
                    .filter(|_| rng.gen_range(0.0..1.0) < 0.3)
                    .map(|i| i as u32)
                    .collect();
                if row.is_empty() {
                    row.push(rng.gen_range(0..n_items) as u32);
                }
                row
            })
            .collect();
        InteractionDataset::from_rows(rows, n_items).unwrap()
    }

    fn quick_surrogate() -> SurrogateConfig {
        SurrogateConfig {
            dim: 4,
            train: TrainConfig {
                lr: 0.1,
                epochs: 2,
                batch_size: BatchSize::Size(16),
                negatives: Negatives::Sampled { per_positive: 1 },
                ..TrainConfig::default()
            },
            retrain_epochs: 1,
            adv_epochs: 1,
            adv_weight: 5.0,
            pretrain: false,
            sample_ratio: 0.0,
        }
    }

    #[test]
    fn heuristic_budget_equal_targets_gives_exact_rows() {
        let ds = fixture(8, 10, 1);
        let targets = TargetSpec::new(vec![2, 5]).unwrap();
        let budget = AttackBudget { n_fake: 3, tau: 2 };
        for kind in [HeuristicKind::Random, HeuristicKind::Bandwagon] {
            let fake = heuristic_attack(kind, &ds, &targets, budget, 9).unwrap();
            for row in fake.rows() {
                assert_eq!(row, &vec![2, 5]);
            }
        }
    }

    #[test]
    fn heuristic_random_rows_are_full_and_contain_targets() {
        let ds = fixture(8, 12, 2);
        let targets = TargetSpec::new(vec![0, 7]).unwrap();
        let budget = AttackBudget { n_fake: 5, tau: 6 };
        let fake = heuristic_attack(HeuristicKind::Random, &ds, &targets, budget, 3).unwrap();
        assert_eq!(fake.n_fake(), 5);
        for row in fake.rows() {
            assert_eq!(row.len(), 6);
            assert!(targets.items().iter().all(|t| row.contains(t)));
        }
        // deterministic under seed
        let again = heuristic_attack(HeuristicKind::Random, &ds, &targets, budget, 3).unwrap();
        assert_eq!(fake, again);
    }

    #[test]
    fn heuristic_rejects_small_budget() {
        let ds = fixture(4, 6, 1);
        let targets = TargetSpec::new(vec![0, 1, 2]).unwrap();
        let budget = AttackBudget { n_fake: 1, tau: 2 };
        assert!(heuristic_attack(HeuristicKind::Random, &ds, &targets, budget, 0).is_err());
    }

    #[test]
    fn bandwagon_hits_dominant_item() {
        // one item interacted by everyone; popular decile of 10 items is
        // exactly that item, so every bandwagon row must include it
        let rows: Vec<Vec<u32>> = (0..12).map(|u| vec![0, 1 + (u % 9) as u32]).collect();
        let ds = InteractionDataset::from_rows(rows, 10).unwrap();
        let pop = popular_items(&ds);
        assert_eq!(pop, vec![0]);
        let targets = TargetSpec::new(vec![5]).unwrap();
        let budget = AttackBudget { n_fake: 8, tau: 5 };
        let fake = heuristic_attack(HeuristicKind::Bandwagon, &ds, &targets, budget, 4).unwrap();
        for row in fake.rows() {
            assert!(row.contains(&0), "row {row:?} misses the dominant item");
            assert!(row.contains(&5));
        }
    }

    #[test]
    fn adversarial_loss_all_interacting_is_zero() {
        let ds = InteractionDataset::from_rows(vec![vec![0], vec![0]], 2).unwrap();
        let t = EmbeddingTable::init(2, 2, 3, 1);
        let targets = TargetSpec::new(vec![0]).unwrap();
        assert_eq!(adversarial_loss(&t, &ds, &targets), 0.0);
    }

    #[test]
    fn adversarial_loss_single_pair_is_ln2() {
        let ds = InteractionDataset::from_rows(vec![vec![1]], 2).unwrap();
        let t = EmbeddingTable::zeros(1, 2, 3);
        let targets = TargetSpec::new(vec![0]).unwrap();
        let loss = adversarial_loss(&t, &ds, &targets);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn adversarial_gradient_matches_finite_differences() {
        let ds = fixture(4, 6, 3);
        let t = EmbeddingTable::init(4, 6, 3, 4);
        let targets = TargetSpec::new(vec![1, 4]).unwrap();
        let analytic = adversarial_gradient(&t, &ds, &targets);
        let mut fd = GradientBuffer::zeros(t.n_rows(), t.dim());
        let step = 1e-5;
        let mut probe = t.clone();
        for idx in 0..t.values().len() {
            let orig = probe.values()[idx];
            probe.values_mut()[idx] = orig + step;
            let plus = adversarial_loss(&probe, &ds, &targets);
            probe.values_mut()[idx] = orig - step;
            let minus = adversarial_loss(&probe, &ds, &targets);
            probe.values_mut()[idx] = orig;
            fd.values_mut()[idx] = (plus - minus) / (2.0 * step);
        }
        let max_rel = analytic
            .values()
            .iter()
            .zip(fd.values())
            .map(|(a, b)| (a - b).abs() / b.abs().max(1e-8))
            .fold(0.0, f64::max);
        assert!(max_rel < 1e-6, "max relative error {max_rel}");
    }

    #[test]
    fn dpa2dl_no_free_slots_returns_target_rows() {
        let ds = fixture(10, 8, 5);
        let targets = TargetSpec::new(vec![3]).unwrap();
        let budget = AttackBudget { n_fake: 2, tau: 1 };
        let fake =
            dpa2dl_gp_attack(&ds, &targets, budget, &quick_surrogate(), None, 11).unwrap();
        for row in fake.rows() {
            assert_eq!(row, &vec![3]);
        }
    }

    #[test]
    fn dpa2dl_structural_invariants() {
        let ds = fixture(12, 10, 6);
        let targets = TargetSpec::new(vec![2, 7]).unwrap();
        let budget = AttackBudget { n_fake: 3, tau: 5 };
        let fake =
            dpa2dl_gp_attack(&ds, &targets, budget, &quick_surrogate(), None, 12).unwrap();
        assert_eq!(fake.n_fake(), 3);
        for row in fake.rows() {
            assert!(row.len() <= 5 && !row.is_empty());
            assert!(targets.items().iter().all(|t| row.contains(t)));
        }
        // injecting never mutates real rows
        let poisoned = inject_fake(&ds, &fake).unwrap();
        poisoned.check_consistency().unwrap();
        for u in 0..ds.n_users() {
            assert_eq!(poisoned.items_of(u), ds.items_of(u));
        }
    }

    #[test]
    fn dpa2dl_zero_weight_gp_is_inert() {
        let ds = fixture(10, 9, 7);
        let targets = TargetSpec::new(vec![4]).unwrap();
        let budget = AttackBudget { n_fake: 2, tau: 4 };
        let scfg = quick_surrogate();
        let plain = dpa2dl_gp_attack(&ds, &targets, budget, &scfg, None, 21).unwrap();
        let inert = GpConfig {
            alpha_odd: 0.0,
            alpha_even: 0.0,
            ..GpConfig::default()
        };
        let gated = dpa2dl_gp_attack(&ds, &targets, budget, &scfg, Some(&inert), 21).unwrap();
        assert_eq!(plain, gated);
    }

    #[test]
    fn dpa2dl_is_deterministic() {
        let ds = fixture(10, 9, 8);
        let targets = TargetSpec::new(vec![1]).unwrap();
        let budget = AttackBudget { n_fake: 2, tau: 3 };
        let scfg = quick_surrogate();
        let gp = GpConfig::default();
        let a = dpa2dl_gp_attack(&ds, &targets, budget, &scfg, Some(&gp), 33).unwrap();
        let b = dpa2dl_gp_attack(&ds, &targets, budget, &scfg, Some(&gp), 33).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pretrain_zero_epochs_is_fresh_init() {
        let ds = fixture(6, 5, 9);
        let mut scfg = quick_surrogate();
        scfg.train.epochs = 0;
        scfg.pretrain = true;
        let pre = pretrain_surrogate(&ds, &scfg).unwrap();
        let fresh = EmbeddingTable::init(6, 5, scfg.dim, scfg.train.seed);
        assert_eq!(pre, fresh);
    }

    #[test]
    fn pretrain_is_deterministic() {
        let ds = fixture(6, 5, 10);
        let scfg = quick_surrogate();
        let a = pretrain_surrogate(&ds, &scfg).unwrap();
        let b = pretrain_surrogate(&ds, &scfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_retrain_ratio_one_keeps_everything() {
        let ds = fixture(8, 7, 11);
        let fake = FakeInteractions::new(vec![vec![0, 3]], 4).unwrap();
        let full = inject_fake(&ds, &fake).unwrap();
        let sampled = sampled_retrain_set(&ds, &fake, 1.0, 5).unwrap();
        assert_eq!(sampled, full);
    }

    #[test]
    fn sampled_retrain_exact_count_and_fake_rows() {
        let ds = fixture(30, 20, 12);
        let fake = FakeInteractions::new(vec![vec![1, 2], vec![3]], 4).unwrap();
        let ratio = 0.1;
        let want = (ratio * ds.nnz() as f64).floor() as usize;
        for seed in 0..5 {
            let sampled = sampled_retrain_set(&ds, &fake, ratio, seed).unwrap();
            sampled.check_consistency().unwrap();
            let real_edges: usize = (0..ds.real_user_count())
                .map(|u| sampled.user_degree(u))
                .sum();
            assert_eq!(real_edges, want);
            assert_eq!(sampled.items_of(30), &[1, 2]);
            assert_eq!(sampled.items_of(31), &[3]);
        }
    }

    #[test]
    fn sampled_retrain_is_roughly_uniform() {
        // chi-square over edge retention counts across 50 seeds
        let ds = fixture(10, 10, 13);
        let fake = FakeInteractions::new(vec![vec![0]], 2).unwrap();
        let edges: Vec<(u32, u32)> = ds.edges().collect();
        let ratio = 0.5;
        let trials = 50;
        let mut counts = vec![0usize; edges.len()];
        for seed in 0..trials {
            let sampled = sampled_retrain_set(&ds, &fake, ratio, seed).unwrap();
            for (e, &(u, i)) in edges.iter().enumerate() {
                if sampled.interacts(u as usize, i) {
                    counts[e] += 1;
                }
            }
        }
        let want = (ratio * edges.len() as f64).floor() as usize;
        let expected = trials as f64 * want as f64 / edges.len() as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // dof ~ edges.len()-1; generous cutoff to keep the test stable
        assert!(
            chi2 < 2.5 * edges.len() as f64,
            "chi-square {chi2} too large for {} edges",
            edges.len()
        );
    }
}
