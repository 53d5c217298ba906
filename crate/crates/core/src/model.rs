//! Domain types shared by every stage of the pipeline.
//!
//! Zones and files are identified by 1-based indices in all I/O. Internally a
//! zone's row/column in the cost matrix is `index - 1`. A [`Network`] can only
//! be obtained through [`validate_network`], so everything downstream may rely
//! on the matrix being square, symmetric, zero-diagonal and non-negative, and
//! on every catalog file having one hit count per zone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A zone of the network, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneId(usize);

impl ZoneId {
    /// Panics on 0; zone indices start at 1.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "zone indices are 1-based");
        ZoneId(index)
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub(crate) fn idx(self) -> usize {
        self.0 - 1
    }

    /// All zones `1..=n` in ascending order.
    pub fn all(n: usize) -> impl Iterator<Item = ZoneId> + Clone {
        (1..=n).map(ZoneId)
    }
}

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}", self.0)
    }
}

/// A file (or set of files handled as a unit), 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FileId(usize);

impl FileId {
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "file indices are 1-based");
        FileId(index)
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for FileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "File {}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("cost matrix row {row} has {len} entries, expected {expected}")]
    RaggedMatrix {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("cost matrix has no zones")]
    EmptyMatrix,
    #[error("cost matrix entry ({i},{j}) is negative: {value}")]
    NegativeEntry { i: usize, j: usize, value: i64 },
    #[error("cost matrix diagonal entry ({i},{i}) is {value}, expected 0")]
    NonZeroDiagonal { i: usize, value: i64 },
    #[error("cost matrix is asymmetric at ({i},{j}): {forward} vs {backward}")]
    Asymmetric {
        i: usize,
        j: usize,
        forward: i64,
        backward: i64,
    },
    #[error("demand matrix covers {demand} zones but the cost matrix has {costs}")]
    ZoneCountMismatch { demand: usize, costs: usize },
    #[error("{file} has {len} hit counts, expected one per zone ({expected})")]
    HitsLength {
        file: FileId,
        len: usize,
        expected: usize,
    },
    #[error("{file} has no demand entry")]
    MissingDemand { file: FileId },
    #[error("demand given for {file}, which is not in the catalog")]
    UnknownFile { file: FileId },
    #[error("{file} appears more than once in the catalog")]
    DuplicateFile { file: FileId },
    #[error("{file} references zone {zone}, but the network has {zones} zones")]
    UnknownZone {
        file: FileId,
        zone: usize,
        zones: usize,
    },
    #[error("{file} has invalid size {size_tb} TB (must be finite and > 0)")]
    InvalidSize { file: FileId, size_tb: f64 },
}

/// Symmetric zone-to-zone access costs with a zero diagonal.
///
/// Construction only checks the shape; the remaining invariants are checked by
/// [`CostMatrix::validate`] (and therefore by [`validate_network`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix {
    n: usize,
    cost: Vec<i64>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, ModelError> {
        let n = rows.len();
        if n == 0 {
            return Err(ModelError::EmptyMatrix);
        }
        let mut cost = Vec::with_capacity(n * n);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::RaggedMatrix {
                    row: r + 1,
                    len: row.len(),
                    expected: n,
                });
            }
            cost.extend(row);
        }
        Ok(CostMatrix { n, cost })
    }

    /// Checks non-negativity, zero diagonal and symmetry, reporting the first
    /// violation in row-major order.
    pub fn validate(&self) -> Result<(), ModelError> {
        for i in 0..self.n {
            for j in 0..self.n {
                let value = self.cost[i * self.n + j];
                if value < 0 {
                    return Err(ModelError::NegativeEntry {
                        i: i + 1,
                        j: j + 1,
                        value,
                    });
                }
                if i == j && value != 0 {
                    return Err(ModelError::NonZeroDiagonal { i: i + 1, value });
                }
                let backward = self.cost[j * self.n + i];
                if value != backward {
                    return Err(ModelError::Asymmetric {
                        i: i + 1,
                        j: j + 1,
                        forward: value,
                        backward,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn zones(&self) -> usize {
        self.n
    }

    /// Raw entry. Only meaningful as a non-negative cost once validated.
    pub fn entry(&self, i: ZoneId, j: ZoneId) -> i64 {
        self.cost[i.idx() * self.n + j.idx()]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.cost.chunks(self.n).map(<[i64]>::to_vec).collect()
    }
}

/// Hits per (file, zone).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DemandMatrix {
    hits: BTreeMap<FileId, Vec<u64>>,
}

impl DemandMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// `hits[z]` is the hit count from zone `z + 1`.
    pub fn insert(&mut self, file: FileId, hits: Vec<u64>) {
        self.hits.insert(file, hits);
    }

    pub fn file_hits(&self, file: FileId) -> Option<&[u64]> {
        self.hits.get(&file).map(Vec::as_slice)
    }

    pub fn files(&self) -> impl Iterator<Item = FileId> + '_ {
        self.hits.keys().copied()
    }
}

impl FromIterator<(FileId, Vec<u64>)> for DemandMatrix {
    fn from_iter<T: IntoIterator<Item = (FileId, Vec<u64>)>>(iter: T) -> Self {
        DemandMatrix {
            hits: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileMeta {
    pub id: FileId,
    /// Upload zone before relocation.
    pub home: ZoneId,
    pub size_tb: f64,
}

/// A validated network: costs, demand and catalog that agree with each other.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    costs: CostMatrix,
    demand: DemandMatrix,
    catalog: Vec<FileMeta>,
}

pub fn validate_network(
    costs: CostMatrix,
    demand: DemandMatrix,
    catalog: Vec<FileMeta>,
) -> Result<Network, ModelError> {
    costs.validate()?;
    let n = costs.zones();

    let mut seen = BTreeSet::new();
    for meta in &catalog {
        if !seen.insert(meta.id) {
            return Err(ModelError::DuplicateFile { file: meta.id });
        }
        if meta.home.get() > n {
            return Err(ModelError::UnknownZone {
                file: meta.id,
                zone: meta.home.get(),
                zones: n,
            });
        }
        if !(meta.size_tb.is_finite() && meta.size_tb > 0.0) {
            return Err(ModelError::InvalidSize {
                file: meta.id,
                size_tb: meta.size_tb,
            });
        }
        let hits = demand
            .file_hits(meta.id)
            .ok_or(ModelError::MissingDemand { file: meta.id })?;
        if hits.len() != n {
            return Err(ModelError::HitsLength {
                file: meta.id,
                len: hits.len(),
                expected: n,
            });
        }
    }
    if let Some(file) = demand.files().find(|f| !seen.contains(f)) {
        return Err(ModelError::UnknownFile { file });
    }

    let mut catalog = catalog;
    catalog.sort_by_key(|m| m.id);
    Ok(Network {
        costs,
        demand,
        catalog,
    })
}

impl Network {
    pub fn zones(&self) -> usize {
        self.costs.zones()
    }

    pub fn zone_ids(&self) -> impl Iterator<Item = ZoneId> + Clone {
        ZoneId::all(self.zones())
    }

    pub fn costs(&self) -> &CostMatrix {
        &self.costs
    }

    pub fn demand(&self) -> &DemandMatrix {
        &self.demand
    }

    /// Catalog sorted by file id.
    pub fn catalog(&self) -> &[FileMeta] {
        &self.catalog
    }

    pub fn file(&self, id: FileId) -> Option<&FileMeta> {
        self.catalog
            .binary_search_by_key(&id, |m| m.id)
            .ok()
            .map(|pos| &self.catalog[pos])
    }

    pub fn contains_zone(&self, zone: ZoneId) -> bool {
        zone.get() <= self.zones()
    }

    /// Access cost between two zones. Both must belong to the network.
    pub fn cost(&self, i: ZoneId, j: ZoneId) -> u64 {
        self.costs.entry(i, j) as u64
    }

    /// Hits on `file` from `zone`. Both must belong to the network.
    pub fn hits(&self, file: FileId, zone: ZoneId) -> u64 {
        self.demand.file_hits(file).expect("file in network")[zone.idx()]
    }

    /// Copy of the network with a different cost matrix of the same size.
    pub fn with_costs(&self, costs: CostMatrix) -> Result<Network, ModelError> {
        validate_network(costs, self.demand.clone(), self.catalog.clone())
    }
}

/// Where a file lives: its home plus replica zones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hosting {
    pub home: ZoneId,
    pub replicas: BTreeSet<ZoneId>,
}

impl Hosting {
    pub fn new(home: ZoneId) -> Self {
        Hosting {
            home,
            replicas: BTreeSet::new(),
        }
    }

    pub fn hosts(&self, zone: ZoneId) -> bool {
        self.home == zone || self.replicas.contains(&zone)
    }

    /// Home first, then replicas in ascending zone order.
    pub fn host_zones(&self) -> impl Iterator<Item = ZoneId> + '_ {
        std::iter::once(self.home).chain(self.replicas.iter().copied())
    }
}

/// Per-file home and replica set.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Placement {
    files: BTreeMap<FileId, Hosting>,
}

impl Placement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_home(&mut self, file: FileId, home: ZoneId) {
        self.files.insert(file, Hosting::new(home));
    }

    /// Adds a replica. Returns false when `zone` already hosts the file or the
    /// file is unknown.
    pub fn add_replica(&mut self, file: FileId, zone: ZoneId) -> bool {
        match self.files.get_mut(&file) {
            Some(h) if !h.hosts(zone) => h.replicas.insert(zone),
            _ => false,
        }
    }

    pub fn get(&self, file: FileId) -> Option<&Hosting> {
        self.files.get(&file)
    }

    pub fn home(&self, file: FileId) -> Option<ZoneId> {
        self.files.get(&file).map(|h| h.home)
    }

    pub fn iter(&self) -> impl Iterator<Item = (FileId, &Hosting)> + '_ {
        self.files.iter().map(|(f, h)| (*f, h))
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn replica_count(&self) -> usize {
        self.files.values().map(|h| h.replicas.len()).sum()
    }

    /// True when both placements have the same files with the same homes.
    pub fn same_homes(&self, other: &Placement) -> bool {
        self.files.len() == other.files.len()
            && self
                .files
                .iter()
                .zip(other.files.iter())
                .all(|((fa, ha), (fb, hb))| fa == fb && ha.home == hb.home)
    }
}

/// Operator thresholds: maximum access cost `A` and minimum demand `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    #[serde(rename = "A")]
    pub max_access_cost: u64,
    #[serde(rename = "Y")]
    pub min_hits: u64,
}

impl Thresholds {
    pub fn new(max_access_cost: u64, min_hits: u64) -> Self {
        Thresholds {
            max_access_cost,
            min_hits,
        }
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::new(5, 0)
    }
}

/// Money conversion. One raw unit (hit × access-cost unit) is worth
/// `hit_cost * cost_scale` money units; hosting one TB costs `per_tb_cost`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tariff {
    pub hit_cost: f64,
    pub cost_scale: f64,
    pub per_tb_cost: f64,
}

impl Default for Tariff {
    fn default() -> Self {
        Tariff {
            hit_cost: 0.01,
            cost_scale: 1.0,
            per_tb_cost: 20.0,
        }
    }
}

impl Tariff {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("hit_cost", self.hit_cost),
            ("cost_scale", self.cost_scale),
            ("per_tb_cost", self.per_tb_cost),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("tariff {name} must be finite and >= 0, got {v}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_file(n: usize, home: usize) -> (DemandMatrix, Vec<FileMeta>) {
        let demand = [(FileId::new(1), vec![1; n])].into_iter().collect();
        let catalog = vec![FileMeta {
            id: FileId::new(1),
            home: ZoneId::new(home),
            size_tb: 1.0,
        }];
        (demand, catalog)
    }

    #[test]
    fn single_zone_is_valid() {
        let costs = CostMatrix::from_rows(vec![vec![0]]).unwrap();
        let (demand, catalog) = one_file(1, 1);
        let net = validate_network(costs, demand, catalog).unwrap();
        assert_eq!(net.zones(), 1);
    }

    #[test]
    fn asymmetry_names_first_pair() {
        let costs = CostMatrix::from_rows(vec![vec![0, 3], vec![4, 0]]).unwrap();
        let (demand, catalog) = one_file(2, 1);
        let err = validate_network(costs, demand, catalog).unwrap_err();
        assert_eq!(
            err,
            ModelError::Asymmetric {
                i: 1,
                j: 2,
                forward: 3,
                backward: 4
            }
        );
    }

    #[test]
    fn rejects_bad_matrices() {
        assert_eq!(
            CostMatrix::from_rows(vec![vec![0, 1], vec![1]]).unwrap_err(),
            ModelError::RaggedMatrix {
                row: 2,
                len: 1,
                expected: 2
            }
        );
        let neg = CostMatrix::from_rows(vec![vec![0, -1], vec![-1, 0]]).unwrap();
        assert!(matches!(
            neg.validate(),
            Err(ModelError::NegativeEntry { i: 1, j: 2, .. })
        ));
        let diag = CostMatrix::from_rows(vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(
            diag.validate(),
            Err(ModelError::NonZeroDiagonal { i: 2, value: 2 })
        );
    }

    #[test]
    fn rejects_catalog_inconsistencies() {
        let costs = CostMatrix::from_rows(vec![vec![0, 1], vec![1, 0]]).unwrap();

        let (demand, catalog) = one_file(2, 3);
        assert!(matches!(
            validate_network(costs.clone(), demand, catalog),
            Err(ModelError::UnknownZone { zone: 3, .. })
        ));

        let (demand, catalog) = one_file(3, 1);
        assert!(matches!(
            validate_network(costs.clone(), demand, catalog),
            Err(ModelError::HitsLength { len: 3, .. })
        ));

        let (_, catalog) = one_file(2, 1);
        assert!(matches!(
            validate_network(costs.clone(), DemandMatrix::new(), catalog),
            Err(ModelError::MissingDemand { .. })
        ));

        let (mut demand, catalog) = one_file(2, 1);
        demand.insert(FileId::new(9), vec![0, 0]);
        assert!(matches!(
            validate_network(costs.clone(), demand, catalog),
            Err(ModelError::UnknownFile { .. })
        ));

        let (demand, mut catalog) = one_file(2, 1);
        catalog[0].size_tb = 0.0;
        assert!(matches!(
            validate_network(costs, demand, catalog),
            Err(ModelError::InvalidSize { .. })
        ));
    }

    #[test]
    fn validation_is_idempotent() {
        let costs = CostMatrix::from_rows(vec![vec![0, 2], vec![2, 0]]).unwrap();
        let (demand, catalog) = one_file(2, 2);
        let net = validate_network(costs, demand, catalog).unwrap();
        let again = validate_network(
            net.costs().clone(),
            net.demand().clone(),
            net.catalog().to_vec(),
        )
        .unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn placement_replicas_exclude_home() {
        let mut p = Placement::new();
        let f = FileId::new(1);
        p.set_home(f, ZoneId::new(2));
        assert!(!p.add_replica(f, ZoneId::new(2)));
        assert!(p.add_replica(f, ZoneId::new(1)));
        assert!(!p.add_replica(f, ZoneId::new(1)));
        assert_eq!(p.replica_count(), 1);
        assert!(!p.add_replica(FileId::new(7), ZoneId::new(1)));
    }
}
