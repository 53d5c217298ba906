//! Randomised agreement checks between the main pipeline and the oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::accounting::{
    access_gain, effective_cost, replica_gains, sweep, total_access_cost, SweepParams,
};
use crate::duplication::{duplicate, Strategy};
use crate::model::{FileId, Network, Placement, Tariff, Thresholds, ZoneId};
use crate::oracle::{
    brute_best_location, brute_effective_cost, brute_min_cost_cover, brute_shortest_paths,
    brute_total_access_cost, brute_trigger_count, random_connected_arcs, random_network,
    InstanceBounds,
};
use crate::placement::{best_location, relocate_all, RelocationRule};
use crate::report;
use crate::topology::costs_from_arcs;

/// Result of one named property over many random instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub instances: usize,
    /// First few counterexample descriptions.
    pub failures: Vec<String>,
    pub failure_count: usize,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} ({} instances, {} failures)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.failure_count
        )
    }
}

struct Check {
    outcome: CheckOutcome,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            outcome: CheckOutcome {
                name,
                instances: 0,
                failures: Vec::new(),
                failure_count: 0,
            },
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.outcome.instances += 1;
        if !ok {
            self.outcome.failure_count += 1;
            if self.outcome.failures.len() < 5 {
                self.outcome.failures.push(describe());
            }
        }
    }
}

fn random_thresholds(rng: &mut ChaCha8Rng, bounds: InstanceBounds) -> Thresholds {
    Thresholds::new(
        rng.gen_range(0..=bounds.max_cost as u64),
        rng.gen_range(0..=bounds.max_hits),
    )
}

fn random_replicas(rng: &mut ChaCha8Rng, net: &Network, base: &Placement) -> Placement {
    let mut p = base.clone();
    for (file, _) in base.iter() {
        for z in net.zone_ids() {
            if rng.gen_bool(0.3) {
                p.add_replica(file, z);
            }
        }
    }
    p
}

fn fingerprint(net: &Network, strategy: Strategy, thresholds: Thresholds) -> String {
    let relocation = relocate_all(net, RelocationRule::MinCost);
    let run = duplicate(net, &relocation.placement, strategy, thresholds);
    let params = SweepParams {
        rule: RelocationRule::MinCost,
        strategy,
        max_access_cost: thresholds.max_access_cost,
        tariff: Tariff::default(),
    };
    let rows = sweep(net, &params, &[0, thresholds.min_hits]).expect("non-empty");
    [
        report::relocation_csv(&relocation),
        report::format_grid(&run.placement, net.zones()),
        run.trace.to_json_lines(),
        report::sweep_csv(&rows),
        report::sweep_files_csv(&rows),
        report::sweep_zones_csv(&rows),
    ]
    .concat()
}

/// Runs every pipeline-vs-oracle property on `instances` random networks
/// (and `instances` random graphs for the topology check).
pub fn property_suite(instances: usize, seed: u64) -> Vec<CheckOutcome> {
    let bounds = InstanceBounds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best = Check::new("best_location matches exhaustive argmin");
    let mut eff = Check::new("effective_cost matches exhaustive host minimum");
    let mut total = Check::new("total_access_cost matches double-loop oracle");
    let mut gains = Check::new("per-cell and per-replica gains sum to total gain");
    let mut trig = Check::new("caching duplicates equal trigger count");
    let mut mono_y = Check::new("caching duplicates non-increasing in Y");
    let mut mono_a = Check::new("caching duplicates non-increasing in A");
    let mut fetch_le = Check::new("fetching duplicates <= caching duplicates");
    let mut cover = Check::new("every trigger is served within A after duplication");
    let mut optimal = Check::new("minimum cover <= fetching <= caching per file");
    let mut homes = Check::new("duplication keeps homes and only adds replicas");
    let mut determinism = Check::new("full pipeline output is byte-identical across runs");
    let mut paths = Check::new("costs_from_arcs matches simple-path enumeration");

    for _ in 0..instances {
        let net = random_network(&mut rng, bounds);

        for meta in net.catalog() {
            let main = best_location(&net, meta.id).expect("catalog file");
            let brute = brute_best_location(&net, meta.id);
            best.record(main == brute, || {
                format!(
                    "{}: main {main} vs oracle {brute} on {:?}",
                    meta.id,
                    net.costs().rows()
                )
            });
        }

        let rule = if rng.gen_bool(0.5) {
            RelocationRule::MinCost
        } else {
            RelocationRule::MaxDemand
        };
        let relocated = relocate_all(&net, rule).placement;
        let extended = random_replicas(&mut rng, &net, &relocated);
        let mut eff_ok = true;
        for (file, hosting) in extended.iter() {
            let hosts: Vec<ZoneId> = hosting.host_zones().collect();
            for i in net.zone_ids() {
                let main = effective_cost(&net, &extended, i, file).expect("in placement");
                eff_ok &= main as i64 == brute_effective_cost(net.costs(), i, &hosts);
            }
        }
        eff.record(eff_ok, || format!("mismatch on {:?}", net.costs().rows()));
        total.record(
            total_access_cost(&net, &extended) == brute_total_access_cost(&net, &extended),
            || "total mismatch".into(),
        );

        let t = random_thresholds(&mut rng, bounds);
        let caching = duplicate(&net, &relocated, Strategy::Caching, t);
        let fetching = duplicate(&net, &relocated, Strategy::Fetching, t);

        for run in [&caching, &fetching] {
            let g = access_gain(&net, &relocated, &run.placement).expect("growth only");
            let expected = brute_total_access_cost(&net, &relocated)
                - brute_total_access_cost(&net, &run.placement);
            // u128 cells are non-negative by type; a negative difference would
            // have panicked in access_gain's subtraction.
            let credited: u128 = replica_gains(&net, &relocated, &run.placement)
                .expect("growth only")
                .values()
                .sum();
            gains.record(g.total() == expected && credited == expected, || {
                format!("{}: sum {} vs {}", run.strategy, g.total(), expected)
            });

            let mut served = true;
            if run.trace.is_feasible() {
                for tr in &run.triggers {
                    let c = effective_cost(&net, &run.placement, tr.zone, tr.file).expect("file");
                    served &= c <= t.max_access_cost;
                }
            }
            cover.record(served, || {
                format!("{} left a trigger uncovered", run.strategy)
            });

            let kept = relocated.same_homes(&run.placement)
                && relocated.iter().all(|(f, h)| {
                    h.replicas
                        .is_subset(&run.placement.get(f).expect("same files").replicas)
                });
            homes.record(kept, || format!("{} changed homes", run.strategy));
        }

        let brute_triggers = brute_trigger_count(&net, &relocated, t);
        trig.record(
            caching.duplicates() == caching.triggers.len()
                && caching.triggers.len() == brute_triggers,
            || {
                format!(
                    "{} duplicates, {} triggers",
                    caching.duplicates(),
                    brute_triggers
                )
            },
        );

        let y_hi = rng.gen_range(t.min_hits..=bounds.max_hits);
        let higher_y = duplicate(
            &net,
            &relocated,
            Strategy::Caching,
            Thresholds::new(t.max_access_cost, y_hi),
        );
        mono_y.record(higher_y.duplicates() <= caching.duplicates(), || {
            format!(
                "Y {} -> {}: {} -> {}",
                t.min_hits,
                y_hi,
                caching.duplicates(),
                higher_y.duplicates()
            )
        });
        let a_hi = rng.gen_range(t.max_access_cost..=bounds.max_cost as u64 + 1);
        let higher_a = duplicate(
            &net,
            &relocated,
            Strategy::Caching,
            Thresholds::new(a_hi, t.min_hits),
        );
        mono_a.record(higher_a.duplicates() <= caching.duplicates(), || {
            format!("A {} -> {}", t.max_access_cost, a_hi)
        });

        fetch_le.record(fetching.duplicates() <= caching.duplicates(), || {
            format!(
                "fetching {} > caching {}",
                fetching.duplicates(),
                caching.duplicates()
            )
        });

        let mut ordered = true;
        for (file, hosting) in relocated.iter() {
            let zones: Vec<ZoneId> = caching
                .triggers
                .iter()
                .filter(|tr| tr.file == file)
                .map(|tr| tr.zone)
                .collect();
            let per_file = |p: &Placement, f: FileId| p.get(f).expect("file").replicas.len();
            let min = brute_min_cost_cover(&net, file, hosting.home, &zones, t.max_access_cost)
                .map(|s| s.len())
                .unwrap_or(usize::MAX);
            ordered &= min <= per_file(&fetching.placement, file)
                && per_file(&fetching.placement, file) <= per_file(&caching.placement, file);
        }
        optimal.record(ordered, || "cover ordering violated".into());

        let strategy = if rng.gen_bool(0.5) {
            Strategy::Caching
        } else {
            Strategy::Fetching
        };
        let a = fingerprint(&net, strategy, t);
        let b = fingerprint(&net, strategy, t);
        determinism.record(a == b, || "outputs differ between runs".into());

        let n = rng.gen_range(1..=6);
        let arcs = random_connected_arcs(&mut rng, n, 9);
        let main = costs_from_arcs(n, &arcs).expect("connected").rows();
        let brute: Vec<Vec<i64>> = brute_shortest_paths(n, &arcs)
            .into_iter()
            .map(|row| row.into_iter().map(|d| d.expect("connected")).collect())
            .collect();
        paths.record(main == brute, || format!("arcs {arcs:?}"));
    }

    [
        best,
        eff,
        total,
        gains,
        trig,
        mono_y,
        mono_a,
        fetch_le,
        cover,
        optimal,
        homes,
        determinism,
        paths,
    ]
    .into_iter()
    .map(|c| c.outcome)
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        for outcome in property_suite(40, 1) {
            assert!(outcome.passed(), "{}: {:?}", outcome.name, outcome.failures);
        }
    }
}
