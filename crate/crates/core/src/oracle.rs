//! Brute-force references for small instances.
//!
//! Nothing here calls into `placement`, `duplication` or `accounting` except
//! the constraint search, whose constraints are predicates over the real
//! pipeline by definition. The other functions work on raw matrix rows so that
//! agreement with the main path means something.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::accounting::{break_even, sweep, SweepParams};
use crate::canonical;
use crate::duplication::{duplicate, Strategy};
use crate::model::{
    validate_network, CostMatrix, DemandMatrix, FileId, FileMeta, Network, Placement, Tariff,
    Thresholds, ZoneId,
};
use crate::placement::{best_location, relocate_all};
use crate::topology::{matrix_from_upper, Arc, CANONICAL_FREE_ENTRIES, CANONICAL_UPPER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("no replica set covers every trigger zone within the access cap")]
    Infeasible,
    #[error("constraint search supports at most {max} free entries, got {got}")]
    TooManyFreeEntries { max: usize, got: usize },
    #[error("reference tables unreproducible under the implemented semantics: no assignment satisfies all constraints")]
    Unreproducible,
}

/// Argmin of `sum_i hits[i] * cost[i][j]` by exhaustive evaluation. Ties keep
/// the upload zone, then the lowest index.
pub fn brute_best_location(net: &Network, file: FileId) -> ZoneId {
    let rows = net.costs().rows();
    let hits = net.demand().file_hits(file).expect("file in network");
    let upload = net.file(file).expect("file in network").home.get() - 1;
    let totals: Vec<i128> = (0..rows.len())
        .map(|j| {
            let mut total = 0i128;
            for (i, row) in rows.iter().enumerate() {
                total += hits[i] as i128 * row[j] as i128;
            }
            total
        })
        .collect();
    let min = *totals.iter().min().expect("at least one zone");
    let pick = if totals[upload] == min {
        upload
    } else {
        totals.iter().position(|&t| t == min).unwrap()
    };
    ZoneId::new(pick + 1)
}

/// Minimum of `cost[i][k]` over an explicit host list.
pub fn brute_effective_cost(costs: &CostMatrix, i: ZoneId, hosts: &[ZoneId]) -> i64 {
    let rows = costs.rows();
    let mut best = i64::MAX;
    for k in hosts {
        let c = rows[i.get() - 1][k.get() - 1];
        if c < best {
            best = c;
        }
    }
    best
}

/// Double loop over files and zones using [`brute_effective_cost`].
pub fn brute_total_access_cost(net: &Network, placement: &Placement) -> u128 {
    let mut total = 0u128;
    for (file, hosting) in placement.iter() {
        let hosts: Vec<ZoneId> = hosting.host_zones().collect();
        let hits = net.demand().file_hits(file).expect("file in network");
        for (i, &h) in hits.iter().enumerate() {
            let c = brute_effective_cost(net.costs(), ZoneId::new(i + 1), &hosts);
            total += h as u128 * c as u128;
        }
    }
    total
}

/// Number of (consumer zone, file) pairs with `cost(i, home) > A` and
/// `hits > Y`, counted directly from the homes.
pub fn brute_trigger_count(net: &Network, placement: &Placement, thresholds: Thresholds) -> usize {
    let rows = net.costs().rows();
    let mut count = 0;
    for (file, hosting) in placement.iter() {
        let hits = net.demand().file_hits(file).expect("file in network");
        for (i, row) in rows.iter().enumerate() {
            let c = row[hosting.home.get() - 1] as u64;
            if c > thresholds.max_access_cost && hits[i] > thresholds.min_hits {
                count += 1;
            }
        }
    }
    count
}

/// Shortest distances by enumerating every simple path (exponential; n ≤ 7).
/// `None` marks an unreachable pair.
pub fn brute_shortest_paths(n: usize, arcs: &[Arc]) -> Vec<Vec<Option<i64>>> {
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for arc in arcs {
        adj[arc.a - 1].push((arc.b - 1, arc.weight));
        adj[arc.b - 1].push((arc.a - 1, arc.weight));
    }

    fn walk(
        adj: &[Vec<(usize, i64)>],
        at: usize,
        dist: i64,
        visited: &mut Vec<bool>,
        best: &mut [Option<i64>],
    ) {
        if best[at].is_none_or(|b| dist < b) {
            best[at] = Some(dist);
        }
        for &(next, w) in &adj[at] {
            if !visited[next] {
                visited[next] = true;
                walk(adj, next, dist + w, visited, best);
                visited[next] = false;
            }
        }
    }

    (0..n)
        .map(|src| {
            let mut best = vec![None; n];
            let mut visited = vec![false; n];
            visited[src] = true;
            walk(&adj, src, 0, &mut visited, &mut best);
            best
        })
        .collect()
}

/// Smallest replica set (excluding `home`) such that every trigger zone has a
/// host within `max_access_cost`. Ties go to the lower total access cost for
/// the file, then to the lexicographically smaller zone list.
pub fn brute_min_cost_cover(
    net: &Network,
    file: FileId,
    home: ZoneId,
    trigger_zones: &[ZoneId],
    max_access_cost: u64,
) -> Result<BTreeSet<ZoneId>, OracleError> {
    let n = net.zones();
    let rows = net.costs().rows();
    let hits = net.demand().file_hits(file).expect("file in network");
    let others: Vec<usize> = (0..n).filter(|&z| z != home.get() - 1).collect();

    let mut best: Option<(usize, u128, Vec<usize>)> = None;
    for mask in 0u32..(1 << others.len()) {
        let set: Vec<usize> = others
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask & (1 << bit) != 0)
            .map(|(_, &z)| z)
            .collect();
        let mut hosts = set.clone();
        hosts.push(home.get() - 1);
        let reach = |i: usize| hosts.iter().map(|&k| rows[i][k]).min().unwrap();
        let covered = trigger_zones
            .iter()
            .all(|t| reach(t.get() - 1) as u64 <= max_access_cost);
        if !covered {
            continue;
        }
        let access: u128 = (0..n).map(|i| hits[i] as u128 * reach(i) as u128).sum();
        let key = (set.len(), access, set);
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.map(|(_, _, set)| set.into_iter().map(|z| ZoneId::new(z + 1)).collect())
        .ok_or(OracleError::Infeasible)
}

/// A matrix entry left open for the search, with its candidate values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeEntry {
    pub i: usize,
    pub j: usize,
    pub domain: RangeInclusive<i64>,
}

/// A named predicate over a candidate matrix.
pub struct Constraint {
    pub name: String,
    check: Box<dyn Fn(&CostMatrix) -> bool + Send + Sync>,
}

impl Constraint {
    pub fn new(
        name: impl Into<String>,
        check: impl Fn(&CostMatrix) -> bool + Send + Sync + 'static,
    ) -> Self {
        Constraint {
            name: name.into(),
            check: Box::new(check),
        }
    }

    pub fn holds(&self, m: &CostMatrix) -> bool {
        (self.check)(m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchHit {
    /// Values of the free entries, in the order they were given.
    pub assignment: Vec<i64>,
    pub matrix: CostMatrix,
}

pub const MAX_FREE_ENTRIES: usize = 6;

/// Tries every assignment of the free entries (symmetrically) on top of
/// `fixed` and keeps those satisfying all constraints, in lexicographic order
/// of the assignment.
pub fn matrix_constraint_search(
    fixed: &CostMatrix,
    free: &[FreeEntry],
    constraints: &[Constraint],
) -> Result<Vec<SearchHit>, OracleError> {
    if free.len() > MAX_FREE_ENTRIES {
        return Err(OracleError::TooManyFreeEntries {
            max: MAX_FREE_ENTRIES,
            got: free.len(),
        });
    }
    let mut assignments: Vec<Vec<i64>> = vec![Vec::new()];
    for entry in free {
        assignments = assignments
            .into_iter()
            .flat_map(|prefix| {
                entry.domain.clone().map(move |v| {
                    let mut a = prefix.clone();
                    a.push(v);
                    a
                })
            })
            .collect();
    }
    let base = fixed.rows();
    Ok(assignments
        .into_par_iter()
        .filter_map(|assignment| {
            let mut rows = base.clone();
            for (entry, &v) in free.iter().zip(&assignment) {
                rows[entry.i - 1][entry.j - 1] = v;
                rows[entry.j - 1][entry.i - 1] = v;
            }
            let matrix = CostMatrix::from_rows(rows).expect("same shape as fixed");
            constraints
                .iter()
                .all(|c| c.holds(&matrix))
                .then_some(SearchHit { assignment, matrix })
        })
        .collect())
}

/// Errors when a search came back empty.
pub fn require_reproducible(hits: Vec<SearchHit>) -> Result<Vec<SearchHit>, OracleError> {
    if hits.is_empty() {
        Err(OracleError::Unreproducible)
    } else {
        Ok(hits)
    }
}

/// Y grid used to locate break-even points.
pub fn fine_sweep() -> Vec<u64> {
    (0..=20000).step_by(500).collect()
}

fn grid_matches(placement: &Placement, grid: &[&str; 6]) -> bool {
    canonical::grid_rows(grid)
        .into_iter()
        .all(|(f, home, replicas)| {
            placement.get(FileId::new(f)).is_some_and(|h| {
                h.home.get() == home
                    && h.replicas.iter().map(|z| z.get()).collect::<Vec<_>>() == replicas
            })
        })
}

fn with_candidate(m: &CostMatrix) -> Option<Network> {
    validate_network(m.clone(), canonical::demand(), canonical::catalog()).ok()
}

fn canonical_run(net: &Network, strategy: Strategy, y: u64) -> Placement {
    let relocated = relocate_all(net, canonical::RELOCATION).placement;
    duplicate(
        net,
        &relocated,
        strategy,
        Thresholds::new(canonical::ACCESS_CAP, y),
    )
    .placement
}

fn sweep_params(strategy: Strategy) -> SweepParams {
    SweepParams {
        rule: canonical::RELOCATION,
        strategy,
        max_access_cost: canonical::ACCESS_CAP,
        tariff: Tariff::default(),
    }
}

/// Inputs of the search that fixes the four unstated canonical entries.
pub struct CanonicalSearch {
    pub fixed: CostMatrix,
    pub free: Vec<FreeEntry>,
    pub constraints: Vec<Constraint>,
}

/// Constraints every reference outcome imposes on the reference matrix.
pub fn canonical_constraints() -> Vec<Constraint> {
    let mut cs = vec![
        Constraint::new("relocation reproduces the reference homes", |m| {
            with_candidate(m).is_some_and(|net| {
                let r = relocate_all(&net, canonical::RELOCATION);
                r.moves
                    .iter()
                    .map(|mv| mv.home.get())
                    .eq(canonical::RELOCATED_HOMES)
            })
        }),
        Constraint::new(
            "cost-minimising best location agrees on files 1, 2, 3, 5, 6",
            |m| {
                with_candidate(m).is_some_and(|net| {
                    [1, 2, 3, 5, 6].iter().all(|&f| {
                        best_location(&net, FileId::new(f)).map(|z| z.get()).ok()
                            == Some(canonical::RELOCATED_HOMES[f - 1])
                    })
                })
            },
        ),
        Constraint::new("caching grid at Y=0", |m| {
            with_candidate(m).is_some_and(|net| {
                grid_matches(
                    &canonical_run(&net, Strategy::Caching, 0),
                    &canonical::CACHING_GRID_Y0,
                )
            })
        }),
        Constraint::new("fetching grid at Y=0", |m| {
            with_candidate(m).is_some_and(|net| {
                grid_matches(
                    &canonical_run(&net, Strategy::Fetching, 0),
                    &canonical::FETCHING_GRID_Y0,
                )
            })
        }),
        Constraint::new("duplicate counts across the Y sweep", |m| {
            with_candidate(m).is_some_and(|net| {
                canonical::EXPECTED_COUNTS
                    .iter()
                    .all(|&(y, caching, fetching)| {
                        canonical_run(&net, Strategy::Caching, y).replica_count() == caching
                            && canonical_run(&net, Strategy::Fetching, y).replica_count()
                                == fetching
                    })
            })
        }),
    ];
    cs.push(Constraint::new(
        "net loss at Y=0 for both strategies",
        |m| {
            with_candidate(m).is_some_and(|net| {
                Strategy::ALL.iter().all(|&s| {
                    sweep(&net, &sweep_params(s), &[0])
                        .map(|rows| rows[0].net_gain < 0.0)
                        .unwrap_or(false)
                })
            })
        },
    ));
    cs.push(Constraint::new(
        "fetching breaks even at a lower Y than caching",
        |m| {
            with_candidate(m).is_some_and(|net| {
                let ys = fine_sweep();
                let be = |s| sweep(&net, &sweep_params(s), &ys).ok().and_then(|r| break_even(&r));
                matches!((be(Strategy::Fetching), be(Strategy::Caching)), (Some(f), Some(c)) if f < c)
            })
        },
    ));
    cs
}

pub fn canonical_search_inputs() -> CanonicalSearch {
    let fixed_upper: Vec<_> = CANONICAL_UPPER
        .iter()
        .copied()
        .filter(|&(i, j, _)| !CANONICAL_FREE_ENTRIES.contains(&(i, j)))
        .collect();
    CanonicalSearch {
        fixed: matrix_from_upper(canonical::ZONES, &fixed_upper),
        free: CANONICAL_FREE_ENTRIES
            .iter()
            .map(|&(i, j)| FreeEntry {
                i,
                j,
                domain: 1..=9,
            })
            .collect(),
        constraints: canonical_constraints(),
    }
}

/// Runs the four-entry search. The frozen canonical matrix must be the first
/// hit.
pub fn canonical_search() -> Result<Vec<SearchHit>, OracleError> {
    let inputs = canonical_search_inputs();
    require_reproducible(matrix_constraint_search(
        &inputs.fixed,
        &inputs.free,
        &inputs.constraints,
    )?)
}

/// Size bounds for random instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceBounds {
    pub max_zones: usize,
    pub max_files: usize,
    pub max_cost: i64,
    pub max_hits: u64,
}

impl Default for InstanceBounds {
    fn default() -> Self {
        InstanceBounds {
            max_zones: 6,
            max_files: 6,
            max_cost: 9,
            max_hits: 200_000,
        }
    }
}

/// Random valid network within `bounds`: symmetric zero-diagonal costs, random
/// hits and upload zones.
#[allow(clippy::needless_range_loop)]
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, bounds: InstanceBounds) -> Network {
    let n = rng.gen_range(1..=bounds.max_zones);
    let files = rng.gen_range(1..=bounds.max_files);
    let mut rows = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = rng.gen_range(0..=bounds.max_cost);
            rows[i][j] = c;
            rows[j][i] = c;
        }
    }
    let demand: DemandMatrix = (1..=files)
        .map(|f| {
            let hits = (0..n).map(|_| rng.gen_range(0..=bounds.max_hits)).collect();
            (FileId::new(f), hits)
        })
        .collect();
    let catalog = (1..=files)
        .map(|f| FileMeta {
            id: FileId::new(f),
            home: ZoneId::new(rng.gen_range(1..=n)),
            size_tb: rng.gen_range(1..=100) as f64,
        })
        .collect();
    validate_network(CostMatrix::from_rows(rows).unwrap(), demand, catalog)
        .expect("generated network is valid")
}

/// Random connected graph on `n` zones: a random spanning tree plus extra arcs,
/// weights in `1..=max_weight`.
pub fn random_connected_arcs<R: Rng + ?Sized>(rng: &mut R, n: usize, max_weight: i64) -> Vec<Arc> {
    let mut arcs = Vec::new();
    for child in 2..=n {
        let parent = rng.gen_range(1..child);
        arcs.push(Arc::new(parent, child, rng.gen_range(1..=max_weight)));
    }
    if n >= 2 {
        for _ in 0..rng.gen_range(0..=n) {
            let a = rng.gen_range(1..=n);
            let b = rng.gen_range(1..=n);
            if a != b {
                arcs.push(Arc::new(a, b, rng.gen_range(1..=max_weight)));
            }
        }
    }
    arcs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::canonical_matrix;

    fn z(i: usize) -> ZoneId {
        ZoneId::new(i)
    }

    #[test]
    fn brute_best_location_examples() {
        let net = canonical::network();
        assert_eq!(brute_best_location(&net, FileId::new(6)), z(4));
        let one = validate_network(
            CostMatrix::from_rows(vec![vec![0]]).unwrap(),
            [(FileId::new(1), vec![5])].into_iter().collect(),
            vec![FileMeta {
                id: FileId::new(1),
                home: z(1),
                size_tb: 1.0,
            }],
        )
        .unwrap();
        assert_eq!(brute_best_location(&one, FileId::new(1)), z(1));
    }

    #[test]
    fn cover_examples() {
        let net = canonical::network();
        let f6 = FileId::new(6);
        assert!(brute_min_cost_cover(&net, f6, z(4), &[], 5)
            .unwrap()
            .is_empty());
        let single = brute_min_cost_cover(&net, f6, z(4), &[z(3)], 5).unwrap();
        assert_eq!(single.len(), 1);
        let triggers = [z(2), z(3), z(5), z(6)];
        let cover = brute_min_cost_cover(&net, f6, z(4), &triggers, 5).unwrap();
        assert!(cover.len() <= 2, "{cover:?}");
    }

    #[test]
    fn shortest_path_enumeration() {
        let arcs = [Arc::new(1, 2, 2), Arc::new(2, 3, 2), Arc::new(1, 3, 7)];
        let d = brute_shortest_paths(4, &arcs);
        assert_eq!(d[0][2], Some(4));
        assert_eq!(d[0][3], None);
        assert_eq!(d[3][3], Some(0));
    }

    #[test]
    fn search_degenerate_cases() {
        let m = canonical_matrix();
        let all = matrix_constraint_search(&m, &[], &[]).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].matrix, m);

        let free = [FreeEntry {
            i: 4,
            j: 5,
            domain: 1..=9,
        }];
        let contradictory = [
            Constraint::new("(4,5) >= 6", |m: &CostMatrix| m.entry(z(4), z(5)) >= 6),
            Constraint::new("(4,5) <= 5", |m: &CostMatrix| m.entry(z(4), z(5)) <= 5),
        ];
        let hits = matrix_constraint_search(&m, &free, &contradictory).unwrap();
        assert!(hits.is_empty());
        assert_eq!(require_reproducible(hits), Err(OracleError::Unreproducible));

        let too_many: Vec<_> = (0..7)
            .map(|_| FreeEntry {
                i: 1,
                j: 2,
                domain: 1..=1,
            })
            .collect();
        assert!(matches!(
            matrix_constraint_search(&m, &too_many, &[]),
            Err(OracleError::TooManyFreeEntries { got: 7, .. })
        ));
    }

    #[test]
    fn random_instances_respect_bounds() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let net = random_network(&mut rng, InstanceBounds::default());
            assert!((1..=6).contains(&net.zones()));
            assert!((1..=6).contains(&net.catalog().len()));
            let n = rng.gen_range(1..=6);
            let arcs = random_connected_arcs(&mut rng, n, 9);
            assert!(brute_shortest_paths(n, &arcs)
                .iter()
                .all(|row| row.iter().all(Option::is_some)));
        }
    }
}
