//! Matrix-factorization recommender: embedding tables, BCE/BPR losses with
//! hand-written gradients, the SGD training loop with an optional gradient
//! passing hook, and top-k recommendation.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::InteractionDataset;
use crate::error::{Error, Result};
use crate::gpengine::{self, GpConfig};
use crate::seeds;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Stacked representation matrix: user rows `[0, n)`, item rows `[n, n+m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    n_users: usize,
    n_items: usize,
    dim: usize,
    values: Vec<f64>,
}

const INIT_STDDEV: f64 = 0.01;

impl EmbeddingTable {
    /// Entries drawn i.i.d. Gaussian(0, 0.01^2) from a seeded generator.
    pub fn init(n_users: usize, n_items: usize, dim: usize, seed: u64) -> Self {
        assert!(n_users >= 1 && n_items >= 1 && dim >= 1);
        let mut rng = seeds::rng(seed, "embedding-init", 0);
        let normal = Normal::new(0.0, INIT_STDDEV).unwrap();
        let values = (0..(n_users + n_items) * dim)
            .map(|_| normal.sample(&mut rng))
            .collect();
        Self {
            n_users,
            n_items,
            dim,
            values,
        }
    }

    pub fn zeros(n_users: usize, n_items: usize, dim: usize) -> Self {
        Self {
            n_users,
            n_items,
            dim,
            values: vec![0.0; (n_users + n_items) * dim],
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.n_users + self.n_items
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.dim..(r + 1) * self.dim]
    }

    pub fn user_row(&self, u: usize) -> &[f64] {
        self.row(u)
    }

    pub fn item_row(&self, i: usize) -> &[f64] {
        self.row(self.n_users + i)
    }

    pub fn user_row_mut(&mut self, u: usize) -> &mut [f64] {
        self.row_mut(u)
    }

    pub fn item_row_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.n_users;
        self.row_mut(n + i)
    }

    /// Preference score of user `u` for item `i` (dot product).
    pub fn score(&self, u: usize, i: usize) -> f64 {
        dot(self.user_row(u), self.item_row(i))
    }

    pub fn matches(&self, dataset: &InteractionDataset) -> bool {
        self.n_users == dataset.n_users() && self.n_items == dataset.n_items()
    }

    /// Append `extra` freshly initialized user rows after the existing user
    /// block, keeping all current user and item rows. Used to restore a
    /// pretrained checkpoint while adding fake users.
    pub fn extend_users(&self, extra: usize, seed: u64) -> Self {
        let mut rng = seeds::rng(seed, "embedding-extend", 0);
        let normal = Normal::new(0.0, INIT_STDDEV).unwrap();
        let mut values = Vec::with_capacity((self.n_rows() + extra) * self.dim);
        values.extend_from_slice(&self.values[..self.n_users * self.dim]);
        values.extend((0..extra * self.dim).map(|_| normal.sample(&mut rng)));
        values.extend_from_slice(&self.values[self.n_users * self.dim..]);
        Self {
            n_users: self.n_users + extra,
            n_items: self.n_items,
            dim: self.dim,
            values,
        }
    }

    /// Binary checkpoint: magic, `n`, `m`, `d`, layout tag, then row-major
    /// little-endian f64 values.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&(self.n_users as u64).to_le_bytes())?;
        w.write_all(&(self.n_items as u64).to_le_bytes())?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&[LAYOUT_USERS_THEN_ITEMS])?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = fs::File::open(path)?;
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::Format("not an embedding checkpoint".into()));
        }
        let mut buf8 = [0u8; 8];
        let mut read_u64 = |r: &mut fs::File| -> Result<u64> {
            r.read_exact(&mut buf8)?;
            Ok(u64::from_le_bytes(buf8))
        };
        let n_users = read_u64(&mut r)? as usize;
        let n_items = read_u64(&mut r)? as usize;
        let dim = read_u64(&mut r)? as usize;
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        if tag[0] != LAYOUT_USERS_THEN_ITEMS {
            return Err(Error::Format(format!("unknown layout tag {}", tag[0])));
        }
        let count = (n_users + n_items) * dim;
        let mut values = Vec::with_capacity(count);
        let mut fbuf = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut fbuf)?;
            values.push(f64::from_le_bytes(fbuf));
        }
        Ok(Self {
            n_users,
            n_items,
            dim,
            values,
        })
    }
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"GPATKEMB";
const LAYOUT_USERS_THEN_ITEMS: u8 = 0;

/// Seeded Gaussian(0, 0.01^2) initialization of the representation matrix.
pub fn init_embeddings(n_users: usize, n_items: usize, dim: usize, seed: u64) -> EmbeddingTable {
    EmbeddingTable::init(n_users, n_items, dim, seed)
}

/// Dense gradient matrix with the same layout as its [`EmbeddingTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBuffer {
    n_rows: usize,
    dim: usize,
    values: Vec<f64>,
}

impl GradientBuffer {
    pub fn zeros_like(table: &EmbeddingTable) -> Self {
        Self {
            n_rows: table.n_rows(),
            dim: table.dim(),
            values: vec![0.0; table.n_rows() * table.dim()],
        }
    }

    pub fn zeros(n_rows: usize, dim: usize) -> Self {
        Self {
            n_rows,
            dim,
            values: vec![0.0; n_rows * dim],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.dim..(r + 1) * self.dim]
    }

    pub fn fill_zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// `self += scale * other`, rowwise over the whole buffer.
    pub fn add_scaled(&mut self, other: &GradientBuffer, scale: f64) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
    }

    /// `row(r) += scale * v`.
    pub fn axpy_row(&mut self, r: usize, v: &[f64], scale: f64) {
        for (a, b) in self.row_mut(r).iter_mut().zip(v) {
            *a += scale * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &GradientBuffer) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    #[default]
    Bce,
    Bpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BatchSize {
    #[default]
    Full,
    Size(usize),
}

/// Negative handling for BCE training. `All` keeps the exact full form of
/// the loss and requires full-batch iterations; `Sampled` draws uniform
/// non-interacted items per positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Negatives {
    All,
    Sampled { per_positive: usize },
}

impl Default for Negatives {
    fn default() -> Self {
        Negatives::Sampled { per_positive: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub lr: f64,
    pub l2: f64,
    pub epochs: usize,
    pub batch_size: BatchSize,
    pub neg_weight: f64,
    pub negatives: Negatives,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Bce,
            lr: 0.05,
            l2: 0.0,
            epochs: 1,
            batch_size: BatchSize::Full,
            neg_weight: 1.0,
            negatives: Negatives::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lr < 0.0 || !self.lr.is_finite() {
            return Err(Error::Argument("lr must be a nonnegative finite value".into()));
        }
        if self.neg_weight <= 0.0 {
            return Err(Error::Argument("neg_weight must be positive".into()));
        }
        if let Negatives::Sampled { per_positive } = self.negatives {
            if per_positive < 1 {
                return Err(Error::Argument("negs_per_pos must be >= 1".into()));
            }
        }
        if let BatchSize::Size(b) = self.batch_size {
            if b == 0 {
                return Err(Error::Argument("batch_size must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Full BCE objective over the selected negative set.
pub fn bce_loss(
    table: &EmbeddingTable,
    dataset: &InteractionDataset,
    neg_weight: f64,
    negatives: Negatives,
) -> f64 {
    match negatives {
        Negatives::All => {
            let mut loss = 0.0;
            for u in 0..dataset.n_users() {
                let ru = table.user_row(u);
                for i in 0..dataset.n_items() {
                    let s = dot(ru, table.item_row(i));
                    if dataset.interacts(u, i as u32) {
                        loss += softplus(-s);
                    } else {
                        loss += neg_weight * softplus(s);
                    }
                }
            }
            loss
        }
        Negatives::Sampled { per_positive } => {
            bce_loss_sampled(table, dataset, neg_weight, per_positive, 0)
        }
    }
}

/// Sampled-negative BCE objective with an explicit sampling seed.
pub fn bce_loss_sampled(
    table: &EmbeddingTable,
    dataset: &InteractionDataset,
    neg_weight: f64,
    per_positive: usize,
    seed: u64,
) -> f64 {
    let mut rng = seeds::rng(seed, "loss-negatives", 0);
    let mut loss = 0.0;
    for (u, i) in dataset.edges() {
        let ru = table.user_row(u as usize);
        loss += softplus(-dot(ru, table.item_row(i as usize)));
        for _ in 0..per_positive {
            if let Some(j) = sample_negative(dataset, u as usize, &mut rng) {
                loss += neg_weight * softplus(dot(ru, table.item_row(j as usize)));
            }
        }
    }
    loss
}

fn sample_negative<R: Rng>(dataset: &InteractionDataset, u: usize, rng: &mut R) -> Option<u32> {
    let m = dataset.n_items();
    if dataset.user_degree(u) >= m {
        return None;
    }
    loop {
        let j = rng.gen_range(0..m) as u32;
        if !dataset.interacts(u, j) {
            return Some(j);
        }
    }
}

/// Accumulate the exact all-negatives BCE gradient into `grad`.
///
/// For interacted pairs the contribution is `-sigma(-r_u . r_i)` on each
/// side; for non-interacted pairs `+beta * sigma(r_u . r_i)`.
fn accumulate_bce_full_gradient(
    table: &EmbeddingTable,
    dataset: &InteractionDataset,
    neg_weight: f64,
    grad: &mut GradientBuffer,
) {
    let n = dataset.n_users();
    for u in 0..n {
        for i in 0..dataset.n_items() {
            let s = dot(table.user_row(u), table.item_row(i));
            let coeff = if dataset.interacts(u, i as u32) {
                -sigmoid(-s)
            } else {
                neg_weight * sigmoid(s)
            };
            grad.axpy_row(u, table.item_row(i), coeff);
            grad.axpy_row(n + i, table.user_row(u), coeff);
        }
    }
}

/// Exact analytic gradient of the full-negative BCE loss.
pub fn analytic_bce_gradient(
    table: &EmbeddingTable,
    dataset: &InteractionDataset,
    neg_weight: f64,
) -> GradientBuffer {
    let mut grad = GradientBuffer::zeros_like(table);
    accumulate_bce_full_gradient(table, dataset, neg_weight, &mut grad);
    grad
}

#[derive(Debug, Clone, Copy)]
pub struct EpochStats {
    pub mean_loss: f64,
    pub seconds: f64,
}

/// Per-epoch hooks threaded through the training engine.
pub struct TrainHooks<'a> {
    /// Gradient passing configuration plus the interaction graph used to
    /// build the passing matrices (the full poisoned dataset when training
    /// on a sampled one).
    pub gp: Option<(&'a GpConfig, &'a InteractionDataset)>,
    /// Extra gradient added after GP (used for the adversarial phase; GP
    /// applies to the recommendation-loss component only).
    pub extra_gradient: Option<&'a dyn Fn(&EmbeddingTable) -> GradientBuffer>,
    /// Sums the raw per-batch recommendation gradients over the epoch.
    pub accumulate_raw: Option<&'a mut GradientBuffer>,
}

impl Default for TrainHooks<'_> {
    fn default() -> Self {
        Self {
            gp: None,
            extra_gradient: None,
            accumulate_raw: None,
        }
    }
}

/// One epoch of BCE minibatch SGD with the optional GP hook.
///
/// Positives are shuffled by a stream derived from `(cfg.seed, epoch)`;
/// negative sampling and GP coin flips draw from separate streams so that
/// an inert GP configuration leaves the trajectory bitwise unchanged.
pub fn train_epoch(
    table: &mut EmbeddingTable,
    dataset: &InteractionDataset,
    cfg: &TrainConfig,
    gp: Option<&GpConfig>,
    epoch: usize,
) -> Result<EpochStats> {
    train_epoch_hooked(
        table,
        dataset,
        cfg,
        epoch,
        TrainHooks {
            gp: gp.map(|g| (g, dataset)),
            ..TrainHooks::default()
        },
    )
}

pub fn train_epoch_hooked(
    table: &mut EmbeddingTable,
    dataset: &InteractionDataset,
    cfg: &TrainConfig,
    epoch: usize,
    mut hooks: TrainHooks<'_>,
) -> Result<EpochStats> {
    cfg.validate()?;
    if !table.matches(dataset) {
        return Err(Error::Argument(format!(
            "embedding table {}x{} does not match dataset {}x{}",
            table.n_users(),
            table.n_items(),
            dataset.n_users(),
            dataset.n_items()
        )));
    }
    if matches!(cfg.negatives, Negatives::All) && !matches!(cfg.batch_size, BatchSize::Full) {
        return Err(Error::Argument(
            "all-negatives training requires full batches".into(),
        ));
    }

    let start = Instant::now();
    let mut shuffle_rng = seeds::rng(cfg.seed, "shuffle", epoch as u64);
    let mut neg_rng = seeds::rng(cfg.seed, "negatives", epoch as u64);
    let mut gp_rng = seeds::rng(cfg.seed, "gp-coin", epoch as u64);

    let mut edges: Vec<(u32, u32)> = dataset.edges().collect();
    edges.shuffle(&mut shuffle_rng);
    let batch_len = match cfg.batch_size {
        BatchSize::Full => edges.len().max(1),
        BatchSize::Size(b) => b,
    };

    let n = dataset.n_users();
    let mut grad = GradientBuffer::zeros_like(table);
    let mut total_loss = 0.0;
    let mut total_pos = 0usize;

    for (iteration, batch) in edges.chunks(batch_len).enumerate() {
        grad.fill_zero();
        let mut batch_loss = 0.0;

        match cfg.negatives {
            Negatives::All => {
                // Exact Eq.-style full gradient: positives and every
                // non-interacted pair, in the same order as the analytic op.
                for u in 0..n {
                    let ru = table.user_row(u);
                    for i in 0..dataset.n_items() {
                        let s = dot(ru, table.item_row(i));
                        batch_loss += if dataset.interacts(u, i as u32) {
                            softplus(-s)
                        } else {
                            cfg.neg_weight * softplus(s)
                        };
                    }
                }
                accumulate_bce_full_gradient(table, dataset, cfg.neg_weight, &mut grad);
            }
            Negatives::Sampled { per_positive } => {
                for &(u, i) in batch {
                    let (u, i) = (u as usize, i as usize);
                    let s = table.score(u, i);
                    batch_loss += softplus(-s);
                    let c = -sigmoid(-s);
                    grad.axpy_row(u, table.item_row(i), c);
                    grad.axpy_row(n + i, table.user_row(u), c);
                    for _ in 0..per_positive {
                        if let Some(j) = sample_negative(dataset, u, &mut neg_rng) {
                            let j = j as usize;
                            let s = table.score(u, j);
                            batch_loss += cfg.neg_weight * softplus(s);
                            let c = cfg.neg_weight * sigmoid(s);
                            grad.axpy_row(u, table.item_row(j), c);
                            grad.axpy_row(n + j, table.user_row(u), c);
                        }
                    }
                }
            }
        }

        if !batch_loss.is_finite() {
            return Err(Error::Divergence { iteration });
        }
        total_loss += batch_loss;
        total_pos += batch.len();

        if let Some(accum) = hooks.accumulate_raw.as_deref_mut() {
            accum.add_scaled(&grad, 1.0);
        }

        if let Some((gp_cfg, graph)) = hooks.gp {
            let fire = gp_cfg.apply_probability >= 1.0
                || gp_rng.gen_range(0.0..1.0) < gp_cfg.apply_probability;
            if fire {
                grad = gpengine::apply_gradient_passing(&grad, table, graph, gp_cfg)?;
            }
        }

        if let Some(extra) = hooks.extra_gradient {
            let extra_grad = extra(table);
            grad.add_scaled(&extra_grad, 1.0);
        }

        // R <- R - lr * (grad + l2 * R)
        let lr = cfg.lr;
        let l2 = cfg.l2;
        for (v, g) in table.values_mut().iter_mut().zip(grad.values()) {
            *v -= lr * (g + l2 * *v);
        }
    }

    let denom = total_pos.max(1) as f64;
    Ok(EpochStats {
        mean_loss: total_loss / denom,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run `cfg.epochs` BCE epochs, returning per-epoch stats.
pub fn fit(
    table: &mut EmbeddingTable,
    dataset: &InteractionDataset,
    cfg: &TrainConfig,
    gp: Option<&GpConfig>,
) -> Result<Vec<EpochStats>> {
    let mut stats = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let s = match cfg.loss {
            LossKind::Bce => train_epoch(table, dataset, cfg, gp, epoch)?,
            LossKind::Bpr => bpr_train_epoch(table, dataset, cfg, epoch)?,
        };
        stats.push(s);
    }
    Ok(stats)
}

/// Loss of one BPR triple `(u, pos, neg)`.
pub fn bpr_triple_loss(table: &EmbeddingTable, u: usize, pos: usize, neg: usize) -> f64 {
    softplus(-(table.score(u, pos) - table.score(u, neg)))
}

/// Gradient of one BPR triple accumulated into `grad`.
pub fn accumulate_bpr_triple_gradient(
    table: &EmbeddingTable,
    u: usize,
    pos: usize,
    neg: usize,
    grad: &mut GradientBuffer,
) {
    let n = table.n_users();
    let s = table.score(u, pos) - table.score(u, neg);
    let c = sigmoid(-s);
    let (ru, rp, rn) = (table.user_row(u), table.item_row(pos), table.item_row(neg));
    for k in 0..table.dim() {
        grad.row_mut(u)[k] += -c * (rp[k] - rn[k]);
    }
    grad.axpy_row(n + pos, ru, -c);
    grad.axpy_row(n + neg, ru, c);
}

/// One epoch of BPR minibatch SGD. Used for the MF-BPR victim; no GP hook.
pub fn bpr_train_epoch(
    table: &mut EmbeddingTable,
    dataset: &InteractionDataset,
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<EpochStats> {
    cfg.validate()?;
    let start = Instant::now();
    let mut shuffle_rng = seeds::rng(cfg.seed, "shuffle", epoch as u64);
    let mut neg_rng = seeds::rng(cfg.seed, "negatives", epoch as u64);

    let mut edges: Vec<(u32, u32)> = dataset.edges().collect();
    edges.shuffle(&mut shuffle_rng);
    let batch_len = match cfg.batch_size {
        BatchSize::Full => edges.len().max(1),
        BatchSize::Size(b) => b,
    };
    let per_positive = match cfg.negatives {
        Negatives::Sampled { per_positive } => per_positive,
        Negatives::All => {
            return Err(Error::Argument(
                "BPR training requires sampled negatives".into(),
            ))
        }
    };

    let mut grad = GradientBuffer::zeros_like(table);
    let mut total_loss = 0.0;
    let mut total_pos = 0usize;

    for (iteration, batch) in edges.chunks(batch_len).enumerate() {
        grad.fill_zero();
        let mut batch_loss = 0.0;
        for &(u, pos) in batch {
            for _ in 0..per_positive {
                if let Some(neg) = sample_negative(dataset, u as usize, &mut neg_rng) {
                    batch_loss += bpr_triple_loss(table, u as usize, pos as usize, neg as usize);
                    accumulate_bpr_triple_gradient(
                        table,
                        u as usize,
                        pos as usize,
                        neg as usize,
                        &mut grad,
                    );
                }
            }
        }
        if !batch_loss.is_finite() {
            return Err(Error::Divergence { iteration });
        }
        total_loss += batch_loss;
        total_pos += batch.len();

        let (lr, l2) = (cfg.lr, cfg.l2);
        for (v, g) in table.values_mut().iter_mut().zip(grad.values()) {
            *v -= lr * (g + l2 * *v);
        }
    }

    Ok(EpochStats {
        mean_loss: total_loss / total_pos.max(1) as f64,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Top-k recommendation for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct TopKList {
    pub user: usize,
    pub items: Vec<u32>,
    pub scores: Vec<f64>,
}

/// The `k` non-interacted items with the largest scores; ties break by
/// ascending item index.
pub fn top_k(
    table: &EmbeddingTable,
    dataset: &InteractionDataset,
    user: usize,
    k: usize,
) -> Result<TopKList> {
    let m = dataset.n_items();
    let available = m - dataset.user_degree(user);
    if k > available {
        return Err(Error::Argument(format!(
            "k={k} exceeds {available} non-interacted items for user {user}"
        )));
    }
    let mut scored: Vec<(f64, u32)> = (0..m)
        .filter(|&i| !dataset.interacts(user, i as u32))
        .map(|i| (table.score(user, i), i as u32))
        .collect();
    scored.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    scored.truncate(k);
    Ok(TopKList {
        user,
        items: scored.iter().map(|&(_, i)| i).collect(),
        scores: scored.iter().map(|&(s, _)| s).collect(),
    })
}

/// Top-k lists for every real user.
pub fn top_k_real_users(
    table: &EmbeddingTable,
    dataset: &InteractionDataset,
    k: usize,
) -> Result<Vec<TopKList>> {
    (0..dataset.real_user_count())
        .map(|u| top_k(table, dataset, u, k))
        .collect()
}
