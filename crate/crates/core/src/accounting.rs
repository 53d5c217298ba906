//! Access cost, gain, hosting cost and net gain.
//!
//! A consumer is always served from the cheapest zone hosting the file. Raw
//! quantities are exact integers in hit × cost units; the [`Tariff`] converts
//! them to money only when a report is produced.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::duplication::{duplicate, Strategy};
use crate::model::{FileId, Network, Placement, Tariff, Thresholds, ZoneId};
use crate::placement::{relocate_all, RelocationRule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AccountingError {
    #[error("{0} is not in the placement")]
    UnknownFile(FileId),
    #[error("placements disagree on the home of {0}")]
    HomeMismatch(FileId),
    #[error("placements cover different files")]
    FileSetMismatch,
    #[error("{file} lost replica {zone} between the two placements")]
    ReplicaRemoved { file: FileId, zone: ZoneId },
    #[error("sweep needs at least one Y value")]
    EmptySweep,
}

/// Cheapest access cost from zone `i` to any host of `file`.
pub fn effective_cost(
    net: &Network,
    placement: &Placement,
    i: ZoneId,
    file: FileId,
) -> Result<u64, AccountingError> {
    let hosting = placement
        .get(file)
        .ok_or(AccountingError::UnknownFile(file))?;
    Ok(hosting
        .host_zones()
        .map(|k| net.cost(i, k))
        .min()
        .expect("home is always a host"))
}

/// `sum_f sum_i hits(f, i) * effective_cost(i, f)`.
pub fn total_access_cost(net: &Network, placement: &Placement) -> u128 {
    placement
        .iter()
        .map(|(file, _)| file_access_cost(net, placement, file))
        .sum()
}

fn file_access_cost(net: &Network, placement: &Placement, file: FileId) -> u128 {
    net.zone_ids()
        .map(|i| {
            let c = effective_cost(net, placement, i, file).expect("file in placement");
            u128::from(net.hits(file, i)) * u128::from(c)
        })
        .sum()
}

/// Access-cost reduction between two placements with the same homes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GainBreakdown {
    /// Keyed by (file, consumer zone).
    pub cells: BTreeMap<(FileId, ZoneId), u128>,
}

impl GainBreakdown {
    pub fn cell(&self, file: FileId, zone: ZoneId) -> u128 {
        self.cells.get(&(file, zone)).copied().unwrap_or(0)
    }

    pub fn per_file(&self) -> BTreeMap<FileId, u128> {
        let mut out = BTreeMap::new();
        for (&(f, _), &g) in &self.cells {
            *out.entry(f).or_insert(0) += g;
        }
        out
    }

    pub fn per_zone(&self) -> BTreeMap<ZoneId, u128> {
        let mut out = BTreeMap::new();
        for (&(_, z), &g) in &self.cells {
            *out.entry(z).or_insert(0) += g;
        }
        out
    }

    pub fn total(&self) -> u128 {
        self.cells.values().sum()
    }
}

fn check_growth(before: &Placement, after: &Placement) -> Result<(), AccountingError> {
    if before.len() != after.len() {
        return Err(AccountingError::FileSetMismatch);
    }
    for (file, b) in before.iter() {
        let a = after.get(file).ok_or(AccountingError::FileSetMismatch)?;
        if a.home != b.home {
            return Err(AccountingError::HomeMismatch(file));
        }
        if let Some(&zone) = b.replicas.iter().find(|z| !a.replicas.contains(z)) {
            return Err(AccountingError::ReplicaRemoved { file, zone });
        }
    }
    Ok(())
}

/// Per-cell gain `hits(f, i) * (cost_before(i, f) - cost_after(i, f))`.
/// `after` must keep every home and replica of `before`.
pub fn access_gain(
    net: &Network,
    before: &Placement,
    after: &Placement,
) -> Result<GainBreakdown, AccountingError> {
    check_growth(before, after)?;
    let mut cells = BTreeMap::new();
    for (file, _) in before.iter() {
        for i in net.zone_ids() {
            let b = effective_cost(net, before, i, file)?;
            let a = effective_cost(net, after, i, file)?;
            // Superset of hosts, so a <= b.
            cells.insert((file, i), u128::from(net.hits(file, i)) * u128::from(b - a));
        }
    }
    Ok(GainBreakdown { cells })
}

/// Gain of each added replica: every consumer cell is credited to the host
/// that serves it in `after` (cheapest, ties to the lower zone), and only
/// cells served by a host absent from `before` carry gain.
///
/// Keys are (file, serving replica, consumer zone). Values sum to
/// [`access_gain`]'s total.
pub fn replica_gains(
    net: &Network,
    before: &Placement,
    after: &Placement,
) -> Result<BTreeMap<(FileId, ZoneId, ZoneId), u128>, AccountingError> {
    check_growth(before, after)?;
    let mut out = BTreeMap::new();
    for (file, old) in before.iter() {
        let new = after.get(file).expect("checked by check_growth");
        let added: Vec<ZoneId> = new
            .replicas
            .iter()
            .copied()
            .filter(|z| !old.hosts(*z))
            .collect();
        if added.is_empty() {
            continue;
        }
        for i in net.zone_ids() {
            let b = effective_cost(net, before, i, file)?;
            let server = added
                .iter()
                .copied()
                .min_by_key(|&k| (net.cost(i, k), k))
                .expect("non-empty");
            let a = net.cost(i, server);
            for &k in &added {
                let gain = if k == server && a < b { b - a } else { 0 };
                out.insert(
                    (file, k, i),
                    u128::from(net.hits(file, i)) * u128::from(gain),
                );
            }
        }
    }
    Ok(out)
}

pub fn hosting_cost(n_duplicates: usize, size_tb: f64, tariff: &Tariff) -> f64 {
    n_duplicates as f64 * size_tb * tariff.per_tb_cost
}

pub fn monetize(gain_raw: u128, tariff: &Tariff) -> f64 {
    gain_raw as f64 * tariff.hit_cost * tariff.cost_scale
}

pub fn net_gain(gain_raw: u128, n_duplicates: usize, tariff: &Tariff, size_tb: f64) -> f64 {
    monetize(gain_raw, tariff) - hosting_cost(n_duplicates, size_tb, tariff)
}

/// Hosting cost of every replica in `placement`, using each file's own size.
pub fn placement_hosting_cost(net: &Network, placement: &Placement, tariff: &Tariff) -> f64 {
    placement
        .iter()
        .map(|(file, h)| {
            let size = net.file(file).map_or(0.0, |m| m.size_tb);
            hosting_cost(h.replicas.len(), size, tariff)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellCost {
    pub file: FileId,
    pub zone: ZoneId,
    pub hits: u64,
    pub cost_before: u64,
    pub cost_after: u64,
    pub gain: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileCost {
    pub file: FileId,
    pub replicas: usize,
    pub access_before: u128,
    pub access_after: u128,
    pub gain: u128,
    pub hosting: f64,
}

/// Full before/after comparison for one duplication run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub cells: Vec<CellCost>,
    pub files: Vec<FileCost>,
    pub access_before: u128,
    pub access_after: u128,
    pub gain: u128,
    pub gain_money: f64,
    pub hosting: f64,
    pub net_gain: f64,
}

pub fn cost_report(
    net: &Network,
    before: &Placement,
    after: &Placement,
    tariff: &Tariff,
) -> Result<CostReport, AccountingError> {
    let gains = access_gain(net, before, after)?;
    let mut cells = Vec::new();
    let mut files = Vec::new();
    for (file, hosting) in after.iter() {
        let mut access_before = 0u128;
        let mut access_after = 0u128;
        for i in net.zone_ids() {
            let hits = net.hits(file, i);
            let cost_before = effective_cost(net, before, i, file)?;
            let cost_after = effective_cost(net, after, i, file)?;
            access_before += u128::from(hits) * u128::from(cost_before);
            access_after += u128::from(hits) * u128::from(cost_after);
            cells.push(CellCost {
                file,
                zone: i,
                hits,
                cost_before,
                cost_after,
                gain: gains.cell(file, i),
            });
        }
        let added = hosting.replicas.len() - before.get(file).map_or(0, |h| h.replicas.len());
        let size = net.file(file).map_or(0.0, |m| m.size_tb);
        files.push(FileCost {
            file,
            replicas: added,
            access_before,
            access_after,
            gain: access_before - access_after,
            hosting: hosting_cost(added, size, tariff),
        });
    }
    let access_before = files.iter().map(|f| f.access_before).sum();
    let access_after = files.iter().map(|f| f.access_after).sum();
    let gain = gains.total();
    let hosting: f64 = files.iter().map(|f| f.hosting).sum();
    let gain_money = monetize(gain, tariff);
    Ok(CostReport {
        cells,
        files,
        access_before,
        access_after,
        gain,
        gain_money,
        hosting,
        net_gain: gain_money - hosting,
    })
}

/// Everything held fixed across a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub rule: RelocationRule,
    pub strategy: Strategy,
    pub max_access_cost: u64,
    pub tariff: Tariff,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub min_hits: u64,
    pub duplicates: usize,
    pub gain: u128,
    pub gain_money: f64,
    pub hosting: f64,
    pub net_gain: f64,
    pub report: CostReport,
}

/// One relocate → duplicate → account run at demand threshold `y`.
pub fn sweep_row(net: &Network, params: &SweepParams, y: u64) -> SweepRow {
    let relocated = relocate_all(net, params.rule).placement;
    let run = duplicate(
        net,
        &relocated,
        params.strategy,
        Thresholds::new(params.max_access_cost, y),
    );
    let report = cost_report(net, &relocated, &run.placement, &params.tariff)
        .expect("duplication only adds replicas");
    SweepRow {
        min_hits: y,
        duplicates: run.duplicates(),
        gain: report.gain,
        gain_money: report.gain_money,
        hosting: report.hosting,
        net_gain: report.net_gain,
        report,
    }
}

/// Independent runs for every Y, in ascending Y order (duplicates removed).
pub fn sweep(
    net: &Network,
    params: &SweepParams,
    y_values: &[u64],
) -> Result<Vec<SweepRow>, AccountingError> {
    if y_values.is_empty() {
        return Err(AccountingError::EmptySweep);
    }
    let mut ys = y_values.to_vec();
    ys.sort_unstable();
    ys.dedup();
    Ok(ys.par_iter().map(|&y| sweep_row(net, params, y)).collect())
}

/// First Y at which net gain turns from a loss into a non-negative value,
/// linearly interpolated between the two rows that straddle the change.
pub fn break_even(rows: &[SweepRow]) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.net_gain < 0.0 && b.net_gain >= 0.0 {
            let (ya, yb) = (a.min_hits as f64, b.min_hits as f64);
            Some(ya + (yb - ya) * (-a.net_gain) / (b.net_gain - a.net_gain))
        } else {
            None
        }
    })
}

/// Row with the largest net gain; the lowest Y wins ties.
pub fn best_net_gain(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter()
        .fold(None, |best: Option<&SweepRow>, r| match best {
            Some(b) if b.net_gain >= r.net_gain => Some(b),
            _ => Some(r),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical;
    use crate::model::{validate_network, CostMatrix, DemandMatrix, FileMeta};

    fn f(i: usize) -> FileId {
        FileId::new(i)
    }
    fn z(i: usize) -> ZoneId {
        ZoneId::new(i)
    }

    fn relocated() -> (Network, Placement) {
        let net = canonical::network();
        let p = relocate_all(&net, canonical::RELOCATION).placement;
        (net, p)
    }

    #[test]
    fn effective_cost_examples() {
        let (net, mut p) = relocated();
        p.add_replica(f(5), z(1));
        p.add_replica(f(5), z(4));
        assert_eq!(effective_cost(&net, &p, z(2), f(5)).unwrap(), 2);
        assert_eq!(effective_cost(&net, &p, z(3), f(5)).unwrap(), 1);
        assert_eq!(effective_cost(&net, &p, z(6), f(5)).unwrap(), 4);
        assert_eq!(effective_cost(&net, &p, z(3), f(2)).unwrap(), 0);
        assert_eq!(
            effective_cost(&net, &p, z(1), f(8)),
            Err(AccountingError::UnknownFile(f(8)))
        );
    }

    #[test]
    fn worked_gain_for_file5() {
        let (net, before) = relocated();
        let mut after = before.clone();
        after.add_replica(f(5), z(1));
        let g = access_gain(&net, &before, &after).unwrap();
        assert_eq!(g.cell(f(5), z(1)), 26600);
        for zone in [2, 3, 5, 6] {
            assert_eq!(g.cell(f(5), z(zone)), 0);
        }
        // Without the zone 4 replica, zone 4 consumers also switch to zone 1.
        assert_eq!(g.cell(f(5), z(4)), 2800 * (6 - 2));
        assert_eq!(g.total(), 26600 + 11200);
    }

    #[test]
    fn replica_gain_credits_serving_host() {
        let (net, before) = relocated();
        let mut after = before.clone();
        after.add_replica(f(5), z(1));
        after.add_replica(f(5), z(4));
        let gains = replica_gains(&net, &before, &after).unwrap();
        assert_eq!(gains[&(f(5), z(1), z(1))], 26600);
        for zone in 2..=6 {
            assert_eq!(gains[&(f(5), z(1), z(zone))], 0);
        }
        assert_eq!(gains[&(f(5), z(4), z(4))], 2800 * 6);
        let total: u128 = gains.values().sum();
        assert_eq!(total, access_gain(&net, &before, &after).unwrap().total());
    }

    #[test]
    fn identical_placements_gain_nothing() {
        let (net, p) = relocated();
        let g = access_gain(&net, &p, &p).unwrap();
        assert_eq!(g.total(), 0);
        assert!(g.cells.values().all(|&v| v == 0));
    }

    #[test]
    fn gain_rejects_non_growth() {
        let (net, p) = relocated();
        let mut moved = p.clone();
        moved.set_home(f(1), z(2));
        assert_eq!(
            access_gain(&net, &p, &moved),
            Err(AccountingError::HomeMismatch(f(1)))
        );
        let mut grown = p.clone();
        grown.add_replica(f(1), z(2));
        assert!(matches!(
            access_gain(&net, &grown, &p),
            Err(AccountingError::ReplicaRemoved { .. })
        ));
    }

    #[test]
    fn single_zone_costs_nothing() {
        let net = validate_network(
            CostMatrix::from_rows(vec![vec![0]]).unwrap(),
            [(f(1), vec![42])].into_iter().collect::<DemandMatrix>(),
            vec![FileMeta {
                id: f(1),
                home: z(1),
                size_tb: 1.0,
            }],
        )
        .unwrap();
        let p = relocate_all(&net, RelocationRule::MinCost).placement;
        assert_eq!(total_access_cost(&net, &p), 0);
    }

    #[test]
    fn hosting_and_net_gain() {
        let tariff = Tariff::default();
        assert_eq!(hosting_cost(13, 100.0, &tariff), 26000.0);
        assert_eq!(hosting_cost(2, 100.0, &tariff), 4000.0);
        assert_eq!(hosting_cost(0, 100.0, &tariff), 0.0);
        assert_eq!(net_gain(0, 0, &tariff, 100.0), 0.0);
        let scaled = Tariff {
            cost_scale: 100.0,
            ..Tariff::default()
        };
        assert!((monetize(26600, &scaled) - 26600.0).abs() < 1e-9);
        assert!((monetize(26600, &tariff) - 266.0).abs() < 1e-9);
        // Zero-size files: net gain is the monetised gain.
        assert_eq!(net_gain(500, 7, &tariff, 0.0), monetize(500, &tariff));
    }

    #[test]
    fn report_is_consistent() {
        let (net, before) = relocated();
        let run = duplicate(&net, &before, Strategy::Caching, Thresholds::new(5, 0));
        let r = cost_report(&net, &before, &run.placement, &Tariff::default()).unwrap();
        assert_eq!(r.gain, r.access_before - r.access_after);
        assert_eq!(r.access_before, total_access_cost(&net, &before));
        assert_eq!(r.access_after, total_access_cost(&net, &run.placement));
        assert_eq!(r.files.iter().map(|f| f.replicas).sum::<usize>(), 13);
        assert_eq!(r.hosting, 26000.0);
        assert_eq!(r.cells.len(), 36);
    }

    #[test]
    fn canonical_sweep_counts() {
        let net = canonical::network();
        for (strategy, col) in [(Strategy::Caching, 1), (Strategy::Fetching, 2)] {
            let params = SweepParams {
                rule: canonical::RELOCATION,
                strategy,
                max_access_cost: 5,
                tariff: Tariff::default(),
            };
            let rows = sweep(&net, &params, &[20000, 0, 10000, 5000, 0]).unwrap();
            let counts: Vec<_> = rows.iter().map(|r| (r.min_hits, r.duplicates)).collect();
            let expected: Vec<_> = canonical::EXPECTED_COUNTS
                .iter()
                .map(|c| (c.0, if col == 1 { c.1 } else { c.2 }))
                .collect();
            assert_eq!(counts, expected);
            assert!(rows[0].net_gain < 0.0);
        }
    }

    #[test]
    fn empty_sweeps() {
        let net = canonical::network();
        let params = SweepParams {
            rule: RelocationRule::MinCost,
            strategy: Strategy::Caching,
            max_access_cost: 5,
            tariff: Tariff::default(),
        };
        assert_eq!(sweep(&net, &params, &[]), Err(AccountingError::EmptySweep));

        let empty = validate_network(
            CostMatrix::from_rows(vec![vec![0, 9], vec![9, 0]]).unwrap(),
            DemandMatrix::new(),
            vec![],
        )
        .unwrap();
        for row in sweep(&empty, &params, &[0, 10]).unwrap() {
            assert_eq!((row.duplicates, row.gain), (0, 0));
            assert_eq!((row.hosting, row.net_gain), (0.0, 0.0));
        }
    }

    fn row(y: u64, net_gain: f64) -> SweepRow {
        SweepRow {
            min_hits: y,
            duplicates: 0,
            gain: 0,
            gain_money: 0.0,
            hosting: 0.0,
            net_gain,
            report: CostReport {
                cells: vec![],
                files: vec![],
                access_before: 0,
                access_after: 0,
                gain: 0,
                gain_money: 0.0,
                hosting: 0.0,
                net_gain,
            },
        }
    }

    #[test]
    fn break_even_interpolates() {
        let rows = vec![
            row(0, -30.0),
            row(1000, -10.0),
            row(2000, 30.0),
            row(3000, -5.0),
        ];
        assert_eq!(break_even(&rows), Some(1250.0));
        assert_eq!(break_even(&rows[2..]), None);
        assert_eq!(best_net_gain(&rows).unwrap().min_hits, 2000);
    }
}
