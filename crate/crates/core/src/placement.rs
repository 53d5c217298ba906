//! Best-location relocation: move each file to the zone that minimises its
//! hits-weighted access cost.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FileId, Network, Placement, ZoneId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlacementError {
    #[error("{0} is not in the catalog")]
    UnknownFile(FileId),
    #[error("zone {zone} is outside the network (1..={zones})")]
    UnknownZone { zone: usize, zones: usize },
}

/// How `relocate_all` picks each file's home.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelocationRule {
    /// Zone minimising `sum_i hits(f, i) * cost(i, j)`.
    #[default]
    MinCost,
    /// Zone with the most hits on the file.
    MaxDemand,
}

impl fmt::Display for RelocationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelocationRule::MinCost => "min-cost",
            RelocationRule::MaxDemand => "max-demand",
        })
    }
}

impl FromStr for RelocationRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min-cost" => Ok(RelocationRule::MinCost),
            "max-demand" => Ok(RelocationRule::MaxDemand),
            other => Err(format!(
                "unknown relocation rule '{other}' (expected min-cost or max-demand)"
            )),
        }
    }
}

fn check_file(net: &Network, file: FileId) -> Result<ZoneId, PlacementError> {
    net.file(file)
        .map(|m| m.home)
        .ok_or(PlacementError::UnknownFile(file))
}

/// Total access cost of serving every hit on `file` from zone `j`.
pub fn location_cost(net: &Network, file: FileId, j: ZoneId) -> Result<u128, PlacementError> {
    check_file(net, file)?;
    if !net.contains_zone(j) {
        return Err(PlacementError::UnknownZone {
            zone: j.get(),
            zones: net.zones(),
        });
    }
    Ok(net
        .zone_ids()
        .map(|i| u128::from(net.hits(file, i)) * u128::from(net.cost(i, j)))
        .sum())
}

/// Picks the zone with the smallest key. The incumbent wins ties, otherwise the
/// lowest zone index does.
fn argmin_keeping_incumbent<K: Ord + Copy>(
    zones: impl Iterator<Item = ZoneId>,
    incumbent: ZoneId,
    key: impl Fn(ZoneId) -> K,
) -> ZoneId {
    let mut best = incumbent;
    let mut best_key = key(incumbent);
    for z in zones {
        let k = key(z);
        if k < best_key {
            best = z;
            best_key = k;
        }
    }
    best
}

/// Zone minimising [`location_cost`] for `file`. Ties keep the file's current
/// (catalog) home, then go to the lowest zone index.
pub fn best_location(net: &Network, file: FileId) -> Result<ZoneId, PlacementError> {
    let incumbent = check_file(net, file)?;
    Ok(argmin_keeping_incumbent(net.zone_ids(), incumbent, |j| {
        location_cost(net, file, j).expect("validated")
    }))
}

/// Zone with the most hits on `file`, with the same tie-break as
/// [`best_location`].
pub fn max_demand_location(net: &Network, file: FileId) -> Result<ZoneId, PlacementError> {
    let incumbent = check_file(net, file)?;
    Ok(argmin_keeping_incumbent(net.zone_ids(), incumbent, |z| {
        std::cmp::Reverse(net.hits(file, z))
    }))
}

pub fn locate(net: &Network, file: FileId, rule: RelocationRule) -> Result<ZoneId, PlacementError> {
    match rule {
        RelocationRule::MinCost => best_location(net, file),
        RelocationRule::MaxDemand => max_demand_location(net, file),
    }
}

/// One row of a relocation report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Move {
    pub file: FileId,
    pub upload: ZoneId,
    pub home: ZoneId,
    pub cost_at_upload: u128,
    pub cost_at_home: u128,
}

impl Move {
    pub fn moved(&self) -> bool {
        self.upload != self.home
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relocation {
    pub placement: Placement,
    pub moves: Vec<Move>,
}

impl Relocation {
    pub fn total_cost_before(&self) -> u128 {
        self.moves.iter().map(|m| m.cost_at_upload).sum()
    }

    pub fn total_cost_after(&self) -> u128 {
        self.moves.iter().map(|m| m.cost_at_home).sum()
    }
}

/// Rehomes every catalog file. Replica sets start empty.
pub fn relocate_all(net: &Network, rule: RelocationRule) -> Relocation {
    let mut placement = Placement::new();
    let mut moves = Vec::with_capacity(net.catalog().len());
    for meta in net.catalog() {
        let home = locate(net, meta.id, rule).expect("catalog file");
        placement.set_home(meta.id, home);
        moves.push(Move {
            file: meta.id,
            upload: meta.home,
            home,
            cost_at_upload: location_cost(net, meta.id, meta.home).expect("validated"),
            cost_at_home: location_cost(net, meta.id, home).expect("validated"),
        });
    }
    Relocation { placement, moves }
}
