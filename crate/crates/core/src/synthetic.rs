//! Synthetic benchmark datasets with planted cluster structure, used by
//! tests, the verification oracles, and the desk-scale experiment configs.

use rand::seq::index::sample as index_sample;
use rand::Rng;

use crate::data::InteractionDataset;
use crate::seeds;

#[derive(Debug, Clone)]
pub struct ClusteredConfig {
    pub n_users: usize,
    pub n_items: usize,
    pub clusters: usize,
    /// Inclusive range of interactions per user.
    pub min_degree: usize,
    pub max_degree: usize,
    /// Probability that an interaction stays inside the user's cluster.
    pub in_cluster: f64,
}

impl Default for ClusteredConfig {
    fn default() -> Self {
        Self {
            n_users: 60,
            n_items: 40,
            clusters: 4,
            min_degree: 8,
            max_degree: 14,
            in_cluster: 0.85,
        }
    }
}

/// Users and items are split round-robin into clusters; each user draws
/// most interactions from its own cluster's items and the rest uniformly.
pub fn clustered_dataset(cfg: &ClusteredConfig, seed: u64) -> InteractionDataset {
    let mut rows = Vec::with_capacity(cfg.n_users);
    let per_cluster: Vec<Vec<u32>> = (0..cfg.clusters)
        .map(|c| {
            (0..cfg.n_items as u32)
                .filter(|i| (*i as usize) % cfg.clusters == c)
                .collect()
        })
        .collect();

    for u in 0..cfg.n_users {
        let mut rng = seeds::rng(seed, "clustered-user", u as u64);
        let cluster = &per_cluster[u % cfg.clusters];
        let degree = rng.gen_range(cfg.min_degree..=cfg.max_degree);
        let mut row: Vec<u32> = Vec::with_capacity(degree);
        let mut guard = 0;
        while row.len() < degree && guard < degree * 100 {
            guard += 1;
            let item = if rng.gen_range(0.0..1.0) < cfg.in_cluster {
                cluster[rng.gen_range(0..cluster.len())]
            } else {
                rng.gen_range(0..cfg.n_items) as u32
            };
            if !row.contains(&item) {
                row.push(item);
            }
        }
        rows.push(row);
    }
    // every item needs at least one interaction so degrees stay positive
    let mut ds = InteractionDataset::from_rows(rows.clone(), cfg.n_items).unwrap();
    let orphans: Vec<u32> = (0..cfg.n_items as u32)
        .filter(|&i| ds.item_degree(i as usize) == 0)
        .collect();
    if !orphans.is_empty() {
        let mut rng = seeds::rng(seed, "clustered-orphans", 0);
        let mut rows = rows;
        for &i in &orphans {
            let u = rng.gen_range(0..cfg.n_users);
            rows[u].push(i);
        }
        ds = InteractionDataset::from_rows(rows, cfg.n_items).unwrap();
    }
    ds
}

/// The ~60x40 clustered fixture used by the desk-scale checks.
pub fn desk_fixture(seed: u64) -> InteractionDataset {
    clustered_dataset(&ClusteredConfig::default(), seed)
}

/// The item with the fewest interactions, ties broken by index.
pub fn least_popular_item(dataset: &InteractionDataset) -> u32 {
    (0..dataset.n_items() as u32)
        .min_by_key(|&i| (dataset.item_degree(i as usize), i))
        .expect("dataset has items")
}

/// A random bipartite edge set with exactly `nnz` distinct edges, used by
/// the complexity-scaling benchmark.
pub fn random_bipartite(n_users: usize, n_items: usize, nnz: usize, seed: u64) -> InteractionDataset {
    assert!(nnz <= n_users * n_items);
    let mut rng = seeds::rng(seed, "random-bipartite", 0);
    let picks = index_sample(&mut rng, n_users * n_items, nnz);
    let mut rows = vec![Vec::new(); n_users];
    for p in picks {
        rows[p / n_items].push((p % n_items) as u32);
    }
    InteractionDataset::from_rows(rows, n_items).unwrap()
}
