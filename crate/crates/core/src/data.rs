//! Interaction data: ingestion, filtering, chronological splitting, sparse
//! dataset structures, and fake-user injection.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One raw interaction record: opaque user/item tokens plus epoch seconds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionTriple {
    pub user: String,
    pub item: String,
    pub timestamp: i64,
}

impl InteractionTriple {
    pub fn new(user: impl Into<String>, item: impl Into<String>, timestamp: i64) -> Self {
        Self {
            user: user.into(),
            item: item.into(),
            timestamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Tsv,
    Csv,
}

impl RecordFormat {
    fn delimiter(self) -> u8 {
        match self {
            RecordFormat::Tsv => b'\t',
            RecordFormat::Csv => b',',
        }
    }
}

/// Ingest-time preprocessing: keep only records whose value column passes.
#[derive(Debug, Clone)]
pub enum ValueFilter {
    /// Keep records with `fields[col] > min` (e.g. Yelp ratings above 3).
    MinRating { col: usize, min: f64 },
    /// Keep records whose `fields[col]` equals the given tag (e.g. clicks).
    EventType { col: usize, value: String },
}

/// Column layout and preprocessing flags for ingestion.
#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub user_col: usize,
    pub item_col: usize,
    pub time_col: usize,
    pub filter: Option<ValueFilter>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            user_col: 0,
            item_col: 1,
            time_col: 2,
            filter: None,
        }
    }
}

/// Parsed triples plus counts of lines that were dropped.
#[derive(Debug)]
pub struct IngestReport {
    pub triples: Vec<InteractionTriple>,
    pub malformed: usize,
    /// Records dropped by the value filter; these are well-formed lines.
    pub filtered: usize,
}

fn parse_timestamp(field: &str) -> Option<i64> {
    let field = field.trim();
    if let Ok(v) = field.parse::<i64>() {
        return (v >= 0).then_some(v);
    }
    // Raw check-in logs carry RFC 3339 timestamps.
    chrono::DateTime::parse_from_rfc3339(field)
        .ok()
        .map(|dt| dt.timestamp())
        .filter(|&v| v >= 0)
}

/// Parse interaction records from a byte stream.
///
/// Each record is `user<sep>item<sep>timestamp`; an optional header row is
/// auto-detected by a non-numeric timestamp field. Malformed lines are
/// counted and reported; more than 50% malformed is a format error.
pub fn ingest_interactions<R: Read>(source: R, format: RecordFormat) -> Result<IngestReport> {
    ingest_with_options(source, format, &IngestOptions::default())
}

/// [`ingest_interactions`] with explicit column layout and value filters.
pub fn ingest_with_options<R: Read>(
    source: R,
    format: RecordFormat,
    opts: &IngestOptions,
) -> Result<IngestReport> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(false)
        .flexible(true)
        .from_reader(source);

    let mut triples = Vec::new();
    let mut malformed = 0usize;
    let mut filtered = 0usize;
    let mut first = true;

    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                if let csv::ErrorKind::Io(io) = e.into_kind() {
                    return Err(Error::Io(io));
                }
                malformed += 1;
                first = false;
                continue;
            }
        };
        if record.len() == 1 && record[0].trim().is_empty() {
            continue; // blank line
        }

        let time_field = record.get(opts.time_col);
        if first {
            first = false;
            // Header row: the timestamp field exists but is not a timestamp.
            if let Some(f) = time_field {
                if parse_timestamp(f).is_none() {
                    continue;
                }
            }
        }

        let (user, item, ts) = match (
            record.get(opts.user_col),
            record.get(opts.item_col),
            time_field.and_then(parse_timestamp),
        ) {
            (Some(u), Some(i), Some(ts)) if !u.trim().is_empty() && !i.trim().is_empty() => {
                (u.trim().to_string(), i.trim().to_string(), ts)
            }
            _ => {
                malformed += 1;
                continue;
            }
        };

        if let Some(f) = &opts.filter {
            let keep = match f {
                ValueFilter::MinRating { col, min } => match record.get(*col) {
                    Some(v) => match v.trim().parse::<f64>() {
                        Ok(r) => r > *min,
                        Err(_) => {
                            malformed += 1;
                            continue;
                        }
                    },
                    None => {
                        malformed += 1;
                        continue;
                    }
                },
                ValueFilter::EventType { col, value } => match record.get(*col) {
                    Some(v) => v.trim() == value,
                    None => {
                        malformed += 1;
                        continue;
                    }
                },
            };
            if !keep {
                filtered += 1;
                continue;
            }
        }

        triples.push(InteractionTriple::new(user, item, ts));
    }

    let total = triples.len() + malformed + filtered;
    if total > 0 && malformed * 2 > total {
        return Err(Error::Format(format!(
            "{malformed} of {total} records malformed"
        )));
    }
    Ok(IngestReport {
        triples,
        malformed,
        filtered,
    })
}

/// Drop duplicate (user, item) pairs, keeping the earliest timestamp.
/// Output order follows the first appearance of each pair.
pub fn dedup_triples(triples: &[InteractionTriple]) -> Vec<InteractionTriple> {
    let mut seen: HashMap<(&str, &str), usize> = HashMap::new();
    let mut out: Vec<InteractionTriple> = Vec::new();
    for t in triples {
        match seen.entry((t.user.as_str(), t.item.as_str())) {
            std::collections::hash_map::Entry::Occupied(e) => {
                let idx = *e.get();
                if t.timestamp < out[idx].timestamp {
                    out[idx].timestamp = t.timestamp;
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(out.len());
                out.push(t.clone());
            }
        }
    }
    out
}

/// Iteratively remove users and items with fewer than `min_interactions`
/// edges until a fixpoint is reached. Deduplicates first.
pub fn kcore_filter(
    triples: &[InteractionTriple],
    min_interactions: usize,
) -> Vec<InteractionTriple> {
    assert!(min_interactions >= 1, "min_interactions must be >= 1");
    let mut edges = dedup_triples(triples);
    loop {
        let mut users: HashMap<&str, usize> = HashMap::new();
        let mut items: HashMap<&str, usize> = HashMap::new();
        for t in &edges {
            *users.entry(t.user.as_str()).or_default() += 1;
            *items.entry(t.item.as_str()).or_default() += 1;
        }
        let before = edges.len();
        let keep: Vec<bool> = edges
            .iter()
            .map(|t| {
                users[t.user.as_str()] >= min_interactions
                    && items[t.item.as_str()] >= min_interactions
            })
            .collect();
        let mut i = 0;
        edges.retain(|_| {
            let k = keep[i];
            i += 1;
            k
        });
        if edges.len() == before {
            return edges;
        }
    }
}

/// Bidirectional token <-> dense-index maps for real users and items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMaps {
    user_tokens: Vec<String>,
    item_tokens: Vec<String>,
    user_index: HashMap<String, u32>,
    item_index: HashMap<String, u32>,
}

impl IdMaps {
    fn from_tokens(user_tokens: Vec<String>, item_tokens: Vec<String>) -> Self {
        let user_index = user_tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let item_index = item_tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self {
            user_tokens,
            item_tokens,
            user_index,
            item_index,
        }
    }

    pub fn user_token(&self, idx: u32) -> Option<&str> {
        self.user_tokens.get(idx as usize).map(String::as_str)
    }

    pub fn item_token(&self, idx: u32) -> Option<&str> {
        self.item_tokens.get(idx as usize).map(String::as_str)
    }

    pub fn user_index(&self, token: &str) -> Option<u32> {
        self.user_index.get(token).copied()
    }

    pub fn item_index(&self, token: &str) -> Option<u32> {
        self.item_index.get(token).copied()
    }
}

/// Sparse bipartite interaction structure in row and column form.
///
/// Fake users, when present, occupy the index range
/// `[real_user_count, n_users)`; items and real users keep their original
/// dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionDataset {
    n_users: usize,
    n_items: usize,
    by_user: Vec<Vec<u32>>,
    by_item: Vec<Vec<u32>>,
    nnz: usize,
    real_user_count: usize,
    id_maps: Arc<IdMaps>,
}

impl InteractionDataset {
    /// Build directly from per-user rows. Rows must index items in
    /// `[0, n_items)`; duplicates within a row are dropped.
    pub fn from_rows(rows: Vec<Vec<u32>>, n_items: usize) -> Result<Self> {
        let user_tokens = (0..rows.len()).map(|u| format!("u{u}")).collect();
        let item_tokens = (0..n_items).map(|i| format!("i{i}")).collect();
        Self::from_rows_with_maps(rows, n_items, Arc::new(IdMaps::from_tokens(user_tokens, item_tokens)))
    }

    fn from_rows_with_maps(
        mut rows: Vec<Vec<u32>>,
        n_items: usize,
        id_maps: Arc<IdMaps>,
    ) -> Result<Self> {
        let n_users = rows.len();
        let mut by_item = vec![Vec::new(); n_items];
        let mut nnz = 0;
        for (u, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            for &i in row.iter() {
                if i as usize >= n_items {
                    return Err(Error::Bounds(format!(
                        "item index {i} out of range for {n_items} items"
                    )));
                }
                by_item[i as usize].push(u as u32);
            }
            nnz += row.len();
        }
        Ok(Self {
            n_users,
            n_items,
            by_user: rows,
            by_item,
            nnz,
            real_user_count: n_users,
            id_maps,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn real_user_count(&self) -> usize {
        self.real_user_count
    }

    pub fn id_maps(&self) -> &IdMaps {
        &self.id_maps
    }

    /// Items interacted by user `u`, sorted ascending.
    pub fn items_of(&self, u: usize) -> &[u32] {
        &self.by_user[u]
    }

    /// Users who interacted with item `i`, sorted ascending.
    pub fn users_of(&self, i: usize) -> &[u32] {
        &self.by_item[i]
    }

    pub fn user_degree(&self, u: usize) -> usize {
        self.by_user[u].len()
    }

    pub fn item_degree(&self, i: usize) -> usize {
        self.by_item[i].len()
    }

    pub fn interacts(&self, u: usize, i: u32) -> bool {
        self.by_user[u].binary_search(&i).is_ok()
    }

    /// All edges in canonical order (user ascending, then item ascending).
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.by_user
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&i| (u as u32, i)))
    }

    /// Same index space and id maps but different real-user rows; any fake
    /// users are dropped. Used to build sampled retraining sets.
    pub fn with_real_rows(&self, rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.len() != self.real_user_count {
            return Err(Error::Argument(format!(
                "expected {} real rows, got {}",
                self.real_user_count,
                rows.len()
            )));
        }
        Self::from_rows_with_maps(rows, self.n_items, Arc::clone(&self.id_maps))
    }

    /// Check the structural invariants; used by tests and after injection.
    pub fn check_consistency(&self) -> Result<()> {
        if self.by_user.len() != self.n_users || self.by_item.len() != self.n_items {
            return Err(Error::Format("shape mismatch".into()));
        }
        let row_sum: usize = self.by_user.iter().map(Vec::len).sum();
        let col_sum: usize = self.by_item.iter().map(Vec::len).sum();
        if row_sum != self.nnz || col_sum != self.nnz {
            return Err(Error::Format(format!(
                "edge count mismatch: rows {row_sum}, cols {col_sum}, nnz {}",
                self.nnz
            )));
        }
        for (u, row) in self.by_user.iter().enumerate() {
            if !row.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Format(format!("row {u} not strictly increasing")));
            }
            for &i in row {
                if i as usize >= self.n_items {
                    return Err(Error::Bounds(format!("item {i} out of range in row {u}")));
                }
                if self.by_item[i as usize].binary_search(&(u as u32)).is_err() {
                    return Err(Error::Format(format!("edge ({u},{i}) missing from by_item")));
                }
            }
        }
        for (i, col) in self.by_item.iter().enumerate() {
            if !col.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Format(format!("column {i} not strictly increasing")));
            }
        }
        if self.real_user_count > self.n_users {
            return Err(Error::Format("real_user_count exceeds n_users".into()));
        }
        Ok(())
    }
}

/// Train/validation pair sharing one index space.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: InteractionDataset,
    pub validation: InteractionDataset,
}

/// Interactions of the injected fake users: one sorted item list per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FakeInteractions {
    rows: Vec<Vec<u32>>,
    budget: usize,
}

impl FakeInteractions {
    /// Rows are sorted and deduplicated; every row must hold between 1 and
    /// `budget` items.
    pub fn new(mut rows: Vec<Vec<u32>>, budget: usize) -> Result<Self> {
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            if row.is_empty() || row.len() > budget {
                return Err(Error::Argument(format!(
                    "fake row {r} has {} items, budget is 1..={budget}",
                    row.len()
                )));
            }
        }
        Ok(Self { rows, budget })
    }

    pub fn empty(budget: usize) -> Self {
        Self {
            rows: Vec::new(),
            budget,
        }
    }

    pub fn n_fake(&self) -> usize {
        self.rows.len()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Persist as `fake_edges.tsv`: one `fake_row_index<TAB>item_index`
    /// line per edge, sorted.
    pub fn save_edges<W: Write>(&self, mut w: W) -> Result<()> {
        for (r, row) in self.rows.iter().enumerate() {
            for &i in row {
                writeln!(w, "{r}\t{i}")?;
            }
        }
        Ok(())
    }

    pub fn load_edges<R: Read>(reader: R, n_fake: usize, budget: usize) -> Result<Self> {
        let mut rows = vec![Vec::new(); n_fake];
        for line in std::io::BufReader::new(reader).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (r, i) = match (parts.next(), parts.next()) {
                (Some(r), Some(i)) => (
                    r.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Format(format!("bad fake edge line: {line}")))?,
                    i.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Format(format!("bad fake edge line: {line}")))?,
                ),
                _ => return Err(Error::Format(format!("bad fake edge line: {line}"))),
            };
            if r >= n_fake {
                return Err(Error::Bounds(format!("fake row {r} out of range")));
            }
            rows[r].push(i);
        }
        Self::new(rows, budget)
    }
}

/// Assign dense indices by first appearance and build the sparse structure.
/// Duplicate (user, item) pairs are merged, keeping the earliest timestamp.
pub fn build_dataset(triples: &[InteractionTriple]) -> InteractionDataset {
    let deduped = dedup_triples(triples);
    let (maps, edges) = index_triples(&deduped);
    let n_items = maps.item_tokens.len();
    let mut rows = vec![Vec::new(); maps.user_tokens.len()];
    for (u, i, _) in edges {
        rows[u as usize].push(i);
    }
    InteractionDataset::from_rows_with_maps(rows, n_items, Arc::new(maps))
        .expect("indices are in range by construction")
}

fn index_triples(deduped: &[InteractionTriple]) -> (IdMaps, Vec<(u32, u32, i64)>) {
    let mut user_tokens: Vec<String> = Vec::new();
    let mut item_tokens: Vec<String> = Vec::new();
    let mut user_index: HashMap<String, u32> = HashMap::new();
    let mut item_index: HashMap<String, u32> = HashMap::new();
    let mut edges = Vec::with_capacity(deduped.len());
    for t in deduped {
        let u = *user_index.entry(t.user.clone()).or_insert_with(|| {
            user_tokens.push(t.user.clone());
            (user_tokens.len() - 1) as u32
        });
        let i = *item_index.entry(t.item.clone()).or_insert_with(|| {
            item_tokens.push(t.item.clone());
            (item_tokens.len() - 1) as u32
        });
        edges.push((u, i, t.timestamp));
    }
    (
        IdMaps {
            user_tokens,
            item_tokens,
            user_index,
            item_index,
        },
        edges,
    )
}

/// Split each user's interactions chronologically: the earliest
/// `ceil(train_ratio * |I_u|)` go to train, the rest to validation.
/// Timestamp ties break by ascending item index.
pub fn chronological_split(triples: &[InteractionTriple], train_ratio: f64) -> SplitDataset {
    assert!(
        train_ratio > 0.0 && train_ratio <= 1.0,
        "train_ratio must be in (0, 1]"
    );
    let deduped = dedup_triples(triples);
    let (maps, edges) = index_triples(&deduped);
    let maps = Arc::new(maps);
    let n_users = maps.user_tokens.len();
    let n_items = maps.item_tokens.len();

    let mut per_user: Vec<Vec<(i64, u32)>> = vec![Vec::new(); n_users];
    for (u, i, ts) in edges {
        per_user[u as usize].push((ts, i));
    }

    let mut train_rows = vec![Vec::new(); n_users];
    let mut val_rows = vec![Vec::new(); n_users];
    for (u, mut items) in per_user.into_iter().enumerate() {
        items.sort_unstable();
        let cut = (train_ratio * items.len() as f64).ceil() as usize;
        for (pos, (_, i)) in items.into_iter().enumerate() {
            if pos < cut {
                train_rows[u].push(i);
            } else {
                val_rows[u].push(i);
            }
        }
    }

    let train = InteractionDataset::from_rows_with_maps(train_rows, n_items, Arc::clone(&maps))
        .expect("indices in range");
    let validation =
        InteractionDataset::from_rows_with_maps(val_rows, n_items, maps).expect("indices in range");
    SplitDataset { train, validation }
}

/// Concatenate fake users after the real ones. Any fake users already in
/// `dataset` are replaced; real edges are carried over untouched.
pub fn inject_fake(
    dataset: &InteractionDataset,
    fake: &FakeInteractions,
) -> Result<InteractionDataset> {
    for (r, row) in fake.rows().iter().enumerate() {
        for &i in row {
            if i as usize >= dataset.n_items {
                return Err(Error::Bounds(format!(
                    "fake row {r}: item index {i} out of range for {} items",
                    dataset.n_items
                )));
            }
        }
    }

    let real = dataset.real_user_count;
    let mut by_user: Vec<Vec<u32>> = dataset.by_user[..real].to_vec();
    by_user.extend(fake.rows().iter().cloned());

    let mut by_item = dataset.by_item.clone();
    for col in &mut by_item {
        let cut = col.partition_point(|&u| (u as usize) < real);
        col.truncate(cut);
    }
    for (r, row) in fake.rows().iter().enumerate() {
        let global = (real + r) as u32;
        for &i in row {
            by_item[i as usize].push(global);
        }
    }

    let nnz = by_user.iter().map(Vec::len).sum();
    Ok(InteractionDataset {
        n_users: real + fake.n_fake(),
        n_items: dataset.n_items,
        by_user,
        by_item,
        nnz,
        real_user_count: real,
        id_maps: Arc::clone(&dataset.id_maps),
    })
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct DatasetMeta {
    n_users: usize,
    n_items: usize,
    nnz: usize,
    real_user_count: usize,
}

/// Persist a dataset directory: `meta.json`, `edges.tsv` (one
/// `user<TAB>item` line per edge, sorted), and the token maps.
pub fn save_dataset(dataset: &InteractionDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let meta = DatasetMeta {
        n_users: dataset.n_users,
        n_items: dataset.n_items,
        nnz: dataset.nnz,
        real_user_count: dataset.real_user_count,
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;

    let mut edges = BufWriter::new(fs::File::create(dir.join("edges.tsv"))?);
    for (u, i) in dataset.edges() {
        writeln!(edges, "{u}\t{i}")?;
    }
    edges.flush()?;

    let mut users = BufWriter::new(fs::File::create(dir.join("users.tsv"))?);
    for t in &dataset.id_maps.user_tokens {
        writeln!(users, "{t}")?;
    }
    users.flush()?;
    let mut items = BufWriter::new(fs::File::create(dir.join("items.tsv"))?);
    for t in &dataset.id_maps.item_tokens {
        writeln!(items, "{t}")?;
    }
    items.flush()?;
    Ok(())
}

pub fn load_dataset(dir: &Path) -> Result<InteractionDataset> {
    let meta: DatasetMeta = serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;
    let read_tokens = |name: &str| -> Result<Vec<String>> {
        Ok(fs::read_to_string(dir.join(name))?
            .lines()
            .map(str::to_string)
            .collect())
    };
    let user_tokens = read_tokens("users.tsv")?;
    let item_tokens = read_tokens("items.tsv")?;

    let mut rows = vec![Vec::new(); meta.n_users];
    for line in fs::read_to_string(dir.join("edges.tsv"))?.lines() {
        let mut parts = line.split('\t');
        let (u, i) = match (parts.next(), parts.next()) {
            (Some(u), Some(i)) => (
                u.parse::<usize>()
                    .map_err(|_| Error::Format(format!("bad edge line: {line}")))?,
                i.parse::<u32>()
                    .map_err(|_| Error::Format(format!("bad edge line: {line}")))?,
            ),
            _ => return Err(Error::Format(format!("bad edge line: {line}"))),
        };
        if u >= meta.n_users {
            return Err(Error::Bounds(format!("user {u} out of range")));
        }
        rows[u].push(i);
    }

    let maps = Arc::new(IdMaps::from_tokens(user_tokens, item_tokens));
    let mut ds = InteractionDataset::from_rows_with_maps(rows, meta.n_items, maps)?;
    ds.real_user_count = meta.real_user_count;
    if ds.nnz != meta.nnz {
        return Err(Error::Format(format!(
            "edge count {} does not match meta nnz {}",
            ds.nnz, meta.nnz
        )));
    }
    ds.check_consistency()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(u: &str, i: &str, ts: i64) -> InteractionTriple {
        InteractionTriple::new(u, i, ts)
    }

    #[test]
    fn ingest_single_record() {
        let rep = ingest_interactions("u1\ti9\t100\n".as_bytes(), RecordFormat::Tsv).unwrap();
        assert_eq!(rep.triples, vec![t("u1", "i9", 100)]);
        assert_eq!(rep.malformed, 0);
    }

    #[test]
    fn ingest_empty_stream() {
        let rep = ingest_interactions("".as_bytes(), RecordFormat::Tsv).unwrap();
        assert!(rep.triples.is_empty());
        assert_eq!(rep.malformed, 0);
    }

    #[test]
    fn ingest_counts_malformed() {
        let src = "u1\ti1\t5\nbadline\nu2\ti2\t7\n";
        let rep = ingest_interactions(src.as_bytes(), RecordFormat::Tsv).unwrap();
        assert_eq!(rep.triples.len(), 2);
        assert_eq!(rep.malformed, 1);
    }

    #[test]
    fn ingest_detects_header() {
        let src = "user,item,timestamp\nu1,i1,5\n";
        let rep = ingest_interactions(src.as_bytes(), RecordFormat::Csv).unwrap();
        assert_eq!(rep.triples, vec![t("u1", "i1", 5)]);
        assert_eq!(rep.malformed, 0);
    }

    #[test]
    fn ingest_rejects_mostly_malformed() {
        let src = "u1\ti1\t5\nbad\nworse\n";
        assert!(matches!(
            ingest_interactions(src.as_bytes(), RecordFormat::Tsv),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn ingest_rfc3339_timestamps() {
        let src = "u1\t2010-10-19T23:55:27Z\ti1\n";
        let opts = IngestOptions {
            user_col: 0,
            item_col: 2,
            time_col: 1,
            filter: None,
        };
        let rep = ingest_with_options(src.as_bytes(), RecordFormat::Tsv, &opts).unwrap();
        assert_eq!(rep.triples.len(), 1);
        assert_eq!(rep.triples[0].timestamp, 1287532527);
    }

    #[test]
    fn ingest_min_rating_filter() {
        let src = "u1\ti1\t5\t100\nu1\ti2\t2\t101\n";
        let opts = IngestOptions {
            user_col: 0,
            item_col: 1,
            time_col: 3,
            filter: Some(ValueFilter::MinRating { col: 2, min: 3.0 }),
        };
        let rep = ingest_with_options(src.as_bytes(), RecordFormat::Tsv, &opts).unwrap();
        assert_eq!(rep.triples.len(), 1);
        assert_eq!(rep.filtered, 1);
        assert_eq!(rep.triples[0].item, "i1");
    }

    #[test]
    fn dedup_keeps_earliest() {
        let out = dedup_triples(&[t("u", "i", 9), t("u", "i", 3), t("u", "j", 1)]);
        assert_eq!(out, vec![t("u", "i", 3), t("u", "j", 1)]);
    }

    // Independent fixpoint oracle: repeatedly drop edges below threshold.
    fn kcore_oracle(
        mut edges: Vec<InteractionTriple>,
        min: usize,
    ) -> Vec<InteractionTriple> {
        loop {
            let mut users: HashMap<String, usize> = HashMap::new();
            let mut items: HashMap<String, usize> = HashMap::new();
            for e in &edges {
                *users.entry(e.user.clone()).or_default() += 1;
                *items.entry(e.item.clone()).or_default() += 1;
            }
            let next: Vec<_> = edges
                .iter()
                .filter(|e| users[&e.user] >= min && items[&e.item] >= min)
                .cloned()
                .collect();
            if next.len() == edges.len() {
                return edges;
            }
            edges = next;
        }
    }

    #[test]
    fn kcore_min_one_is_identity() {
        let input = vec![t("a", "x", 1), t("b", "y", 2), t("a", "x", 5)];
        assert_eq!(kcore_filter(&input, 1), dedup_triples(&input));
    }

    #[test]
    fn kcore_three_edge_fixture_matches_oracle() {
        // u1 has 2 items, u2 has 1; min=2 removes u2's edge, then items
        // with a single remaining edge, cascading to empty.
        let input = vec![t("u1", "a", 1), t("u1", "b", 2), t("u2", "a", 3)];
        let got = kcore_filter(&input, 2);
        let want = kcore_oracle(dedup_triples(&input), 2);
        assert_eq!(got, want);
        assert!(got.is_empty());
    }

    #[test]
    fn kcore_is_idempotent() {
        let mut input = Vec::new();
        for u in 0..6 {
            for i in 0..(u + 1) {
                input.push(t(&format!("u{u}"), &format!("i{i}"), (u * 10 + i) as i64));
            }
        }
        let once = kcore_filter(&input, 3);
        let twice = kcore_filter(&once, 3);
        assert_eq!(once, twice);
    }

    #[test]
    fn split_ratio_one_empties_validation() {
        let split = chronological_split(&[t("u", "a", 1), t("u", "b", 2)], 1.0);
        assert_eq!(split.validation.nnz(), 0);
        assert_eq!(split.train.nnz(), 2);
    }

    #[test]
    fn split_five_interactions_at_ratio_point_eight() {
        let triples: Vec<_> = (0..5).map(|k| t("u", &format!("i{k}"), k as i64)).collect();
        let split = chronological_split(&triples, 0.8);
        assert_eq!(split.train.items_of(0).len(), 4);
        assert_eq!(split.validation.items_of(0).len(), 1);
        // the latest interaction lands in validation
        assert_eq!(split.validation.items_of(0), &[4]);
    }

    #[test]
    fn split_breaks_timestamp_ties_by_item_index() {
        // 10 interactions, the last two share a timestamp; a stable
        // sort-then-cut oracle decides which goes to validation.
        let mut triples: Vec<_> = (0..8).map(|k| t("u", &format!("i{k}"), k as i64)).collect();
        triples.push(t("u", "late_b", 100));
        triples.push(t("u", "late_a", 100));
        let split = chronological_split(&triples, 0.9);

        // Oracle: items indexed by first appearance, sorted by (ts, index).
        let ds = build_dataset(&triples);
        let idx_b = ds.id_maps().item_index("late_b").unwrap();
        let idx_a = ds.id_maps().item_index("late_a").unwrap();
        let mut keyed = vec![];
        for (k, tr) in triples.iter().enumerate() {
            let idx = ds.id_maps().item_index(&tr.item).unwrap();
            keyed.push((tr.timestamp, idx, k));
        }
        keyed.sort();
        let expect_val = keyed.last().unwrap().1;
        // late_b was seen first so it has the smaller index and stays in train
        assert_eq!(expect_val, idx_a.max(idx_b));
        assert_eq!(split.validation.items_of(0), &[expect_val]);
    }

    #[test]
    fn split_partitions_edges() {
        let mut triples = Vec::new();
        for u in 0..7 {
            for i in 0..(3 + u % 4) {
                triples.push(t(&format!("u{u}"), &format!("i{i}"), (i * 7 + u) as i64));
            }
        }
        let deduped = dedup_triples(&triples);
        let split = chronological_split(&triples, 0.8);
        assert_eq!(split.train.nnz() + split.validation.nnz(), deduped.len());
    }

    #[test]
    fn build_single_edge() {
        let ds = build_dataset(&[t("u", "i", 1)]);
        assert_eq!((ds.n_users(), ds.n_items(), ds.nnz()), (1, 1, 1));
        assert_eq!(ds.real_user_count(), 1);
    }

    #[test]
    fn build_matches_transpose_oracle() {
        // random-ish 20x30 edge set; by_item must equal the transpose of by_user
        let mut triples = Vec::new();
        let mut state = 12345u64;
        for k in 0..200 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (state >> 33) % 20;
            let i = (state >> 13) % 30;
            triples.push(t(&format!("u{u}"), &format!("i{i}"), k));
        }
        let ds = build_dataset(&triples);
        let mut transpose = vec![Vec::new(); ds.n_items()];
        for u in 0..ds.n_users() {
            for &i in ds.items_of(u) {
                transpose[i as usize].push(u as u32);
            }
        }
        for i in 0..ds.n_items() {
            assert_eq!(ds.users_of(i), transpose[i].as_slice());
        }
        let row_sum: usize = (0..ds.n_users()).map(|u| ds.items_of(u).len()).sum();
        let col_sum: usize = (0..ds.n_items()).map(|i| ds.users_of(i).len()).sum();
        assert_eq!(row_sum, col_sum);
        assert_eq!(row_sum, ds.nnz());
    }

    #[test]
    fn inject_empty_is_identity() {
        let ds = build_dataset(&[t("u", "i", 1), t("v", "j", 2)]);
        let out = inject_fake(&ds, &FakeInteractions::empty(3)).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn inject_single_fake_user() {
        let ds = build_dataset(&[t("u", "a", 1), t("v", "b", 2)]);
        let fake = FakeInteractions::new(vec![vec![0]], 3).unwrap();
        let out = inject_fake(&ds, &fake).unwrap();
        assert_eq!(out.n_users(), 3);
        assert_eq!(out.nnz(), ds.nnz() + 1);
        assert_eq!(out.users_of(0), &[0, 2]);
        assert_eq!(out.real_user_count(), 2);
    }

    #[test]
    fn inject_preserves_real_rows_and_invariants() {
        let mut triples = Vec::new();
        for u in 0..6 {
            for i in 0..4 {
                triples.push(t(&format!("u{u}"), &format!("i{}", (u + i) % 7), (u + i) as i64));
            }
        }
        let ds = build_dataset(&triples);
        let fake = FakeInteractions::new(
            vec![vec![0, 1, 2], vec![3, 4], vec![5, 6, 0], vec![1], vec![2, 3]],
            3,
        )
        .unwrap();
        let out = inject_fake(&ds, &fake).unwrap();
        out.check_consistency().unwrap();
        assert_eq!(out.n_users(), ds.n_users() + 5);
        for u in 0..ds.real_user_count() {
            assert_eq!(out.items_of(u), ds.items_of(u));
        }
    }

    #[test]
    fn inject_rejects_out_of_range_items() {
        let ds = build_dataset(&[t("u", "i", 1)]);
        let fake = FakeInteractions::new(vec![vec![9]], 3).unwrap();
        assert!(matches!(inject_fake(&ds, &fake), Err(Error::Bounds(_))));
    }

    #[test]
    fn save_load_round_trip() {
        let mut triples = Vec::new();
        for u in 0..5 {
            for i in 0..3 {
                triples.push(t(&format!("user-{u}"), &format!("item-{i}"), (u * 3 + i) as i64));
            }
        }
        let ds = build_dataset(&triples);
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&ds, dir.path()).unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(ds, loaded);
    }
}
