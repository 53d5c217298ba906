//! Threshold-gated duplication.
//!
//! A trigger is a (consumer zone `i`, file `f`) pair where the file's home is
//! too far from `i` (`cost(i, home) > A`) and `i` asks for the file often
//! enough (`hits(f, i) > Y`). Triggers are scanned in consumer-zone order, then
//! home-zone order, then file order. Only homes count when testing a trigger;
//! replicas placed earlier in the same scan do not suppress later triggers.
//!
//! * Caching places the replica in the consumer zone itself.
//! * Fetching walks the file's other zones from most to least hits (lower index
//!   first on ties) and takes the first one within `A` of the consumer. If that
//!   zone already hosts the file the trigger is a no-op.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{FileId, Network, Placement, Thresholds, ZoneId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Caching,
    Fetching,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Caching, Strategy::Fetching];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Caching => "caching",
            Strategy::Fetching => "fetching",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "caching" => Ok(Strategy::Caching),
            "fetching" => Ok(Strategy::Fetching),
            other => Err(format!(
                "unknown strategy '{other}' (expected caching or fetching)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trigger {
    pub zone: ZoneId,
    pub file: FileId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// No zone other than the home is within the access cap of the consumer.
    NoAdmissibleZone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Placed { zone: ZoneId },
    NoOp { zone: ZoneId },
    Skipped { reason: SkipReason },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub consumer_zone: ZoneId,
    pub file: FileId,
    #[serde(flatten)]
    pub action: Action,
}

/// Events in scan order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DuplicationTrace {
    pub events: Vec<TraceEvent>,
}

impl DuplicationTrace {
    fn push(&mut self, trigger: Trigger, action: Action) {
        self.events.push(TraceEvent {
            consumer_zone: trigger.zone,
            file: trigger.file,
            action,
        });
    }

    pub fn placed(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.action, Action::Placed { .. }))
            .count()
    }

    /// Triggers for which no admissible zone existed.
    pub fn skipped(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events
            .iter()
            .filter(|e| matches!(e.action, Action::Skipped { .. }))
    }

    pub fn is_feasible(&self) -> bool {
        self.skipped().next().is_none()
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("trace events serialize") + "\n")
            .collect()
    }

    pub fn from_json_lines(text: &str) -> Result<Self, serde_json::Error> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(DuplicationTrace { events })
    }
}

/// Every (consumer zone, file) pair eligible for duplication, in scan order.
pub fn triggers(placement: &Placement, net: &Network, thresholds: Thresholds) -> Vec<Trigger> {
    let mut by_home: Vec<Vec<FileId>> = vec![Vec::new(); net.zones()];
    for (file, hosting) in placement.iter() {
        by_home[hosting.home.get() - 1].push(file);
    }
    let mut out = Vec::new();
    for i in net.zone_ids() {
        for j in net.zone_ids() {
            if net.cost(i, j) <= thresholds.max_access_cost {
                continue;
            }
            for &file in &by_home[j.get() - 1] {
                if net.hits(file, i) > thresholds.min_hits {
                    out.push(Trigger { zone: i, file });
                }
            }
        }
    }
    out
}

/// Candidate zones for fetching `file` on behalf of consumer zone `consumer`:
/// non-home zones by descending hits, lower index first on ties; the first one
/// within `max_access_cost` of the consumer wins.
pub fn retrieve(
    net: &Network,
    placement: &Placement,
    file: FileId,
    consumer: ZoneId,
    max_access_cost: u64,
) -> Option<ZoneId> {
    let home = placement.home(file)?;
    let mut candidates: Vec<ZoneId> = net.zone_ids().filter(|&z| z != home).collect();
    candidates.sort_by_key(|&z| (std::cmp::Reverse(net.hits(file, z)), z));
    candidates
        .into_iter()
        .find(|&k| net.cost(consumer, k) <= max_access_cost)
}

pub fn duplicate_caching(
    placement: &Placement,
    triggers: &[Trigger],
) -> (Placement, DuplicationTrace) {
    let mut out = placement.clone();
    let mut trace = DuplicationTrace::default();
    for &t in triggers {
        let action = if out.add_replica(t.file, t.zone) {
            Action::Placed { zone: t.zone }
        } else {
            Action::NoOp { zone: t.zone }
        };
        trace.push(t, action);
    }
    (out, trace)
}

pub fn duplicate_fetching(
    placement: &Placement,
    triggers: &[Trigger],
    net: &Network,
    max_access_cost: u64,
) -> (Placement, DuplicationTrace) {
    let mut out = placement.clone();
    let mut trace = DuplicationTrace::default();
    for &t in triggers {
        let action = match retrieve(net, &out, t.file, t.zone, max_access_cost) {
            None => Action::Skipped {
                reason: SkipReason::NoAdmissibleZone,
            },
            Some(k) if out.add_replica(t.file, k) => Action::Placed { zone: k },
            Some(k) => Action::NoOp { zone: k },
        };
        trace.push(t, action);
    }
    (out, trace)
}

/// Result of one duplication pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicationRun {
    pub strategy: Strategy,
    pub thresholds: Thresholds,
    pub triggers: Vec<Trigger>,
    pub placement: Placement,
    pub trace: DuplicationTrace,
}

impl DuplicationRun {
    pub fn duplicates(&self) -> usize {
        self.placement.replica_count()
    }
}

/// Runs the trigger scan and the chosen strategy on a relocated placement.
pub fn duplicate(
    net: &Network,
    relocated: &Placement,
    strategy: Strategy,
    thresholds: Thresholds,
) -> DuplicationRun {
    let triggers = triggers(relocated, net, thresholds);
    let (placement, trace) = match strategy {
        Strategy::Caching => duplicate_caching(relocated, &triggers),
        Strategy::Fetching => {
            duplicate_fetching(relocated, &triggers, net, thresholds.max_access_cost)
        }
    };
    DuplicationRun {
        strategy,
        thresholds,
        triggers,
        placement,
        trace,
    }
}
