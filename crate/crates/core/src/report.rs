//! Text and CSV renderings of placements, relocations and sweeps.
//!
//! Everything here is byte-stable: fixed column order, integers for raw
//! quantities, two decimals for money, `\n` line endings.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::accounting::{CostReport, SweepRow};
use crate::model::{FileId, Placement, ZoneId};
use crate::placement::Relocation;

const CELL: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid has no header line")]
    MissingHeader,
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
}

/// Files as rows, zones as columns: `o` home, `x` replica, `.` absent.
pub fn format_grid(placement: &Placement, zones: usize) -> String {
    let mut out = String::new();
    let mut header = format!("{:CELL$}", "");
    for z in 1..=zones {
        header.push_str(&format!("{:CELL$}", format!("Zone {z}")));
    }
    out.push_str(header.trim_end());
    out.push('\n');
    for (file, hosting) in placement.iter() {
        let mut line = format!("{:CELL$}", format!("File {}", file.get()));
        for z in ZoneId::all(zones) {
            let mark = if hosting.home == z {
                "o"
            } else if hosting.replicas.contains(&z) {
                "x"
            } else {
                "."
            };
            line.push_str(&format!("{mark:CELL$}"));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Inverse of [`format_grid`].
pub fn parse_grid(text: &str) -> Result<Placement, GridError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(GridError::MissingHeader)?;
    let zones = header.split_whitespace().filter(|t| *t == "Zone").count();
    if zones == 0 {
        return Err(GridError::MissingHeader);
    }
    let mut placement = Placement::new();
    for (idx, line) in lines {
        let bad = |message: String| GridError::BadRow {
            line: idx + 1,
            message,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != zones + 2 || tokens[0] != "File" {
            return Err(bad(format!("expected 'File <id>' and {zones} cells")));
        }
        let id: usize = tokens[1]
            .parse()
            .ok()
            .filter(|&i| i >= 1)
            .ok_or_else(|| bad(format!("bad file id '{}'", tokens[1])))?;
        let file = FileId::new(id);
        let cells = &tokens[2..];
        let homes: Vec<usize> = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == "o")
            .map(|(z, _)| z + 1)
            .collect();
        let [home] = homes[..] else {
            return Err(bad(format!("File {id} needs exactly one 'o'")));
        };
        placement.set_home(file, ZoneId::new(home));
        for (z, cell) in cells.iter().enumerate() {
            match *cell {
                "x" => {
                    placement.add_replica(file, ZoneId::new(z + 1));
                }
                "o" | "." => {}
                other => return Err(bad(format!("unknown cell '{other}'"))),
            }
        }
    }
    Ok(placement)
}

pub fn money(v: f64) -> String {
    format!("{v:.2}")
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn relocation_csv(relocation: &Relocation) -> String {
    csv_string(
        &[
            "file",
            "upload_zone",
            "home_zone",
            "moved",
            "cost_at_upload",
            "cost_at_home",
        ],
        relocation.moves.iter().map(|m| {
            vec![
                m.file.get().to_string(),
                m.upload.get().to_string(),
                m.home.get().to_string(),
                m.moved().to_string(),
                m.cost_at_upload.to_string(),
                m.cost_at_home.to_string(),
            ]
        }),
    )
}

pub fn cells_csv(report: &CostReport) -> String {
    csv_string(
        &["file", "zone", "hits", "cost_before", "cost_after", "gain"],
        report.cells.iter().map(|c| {
            vec![
                c.file.get().to_string(),
                c.zone.get().to_string(),
                c.hits.to_string(),
                c.cost_before.to_string(),
                c.cost_after.to_string(),
                c.gain.to_string(),
            ]
        }),
    )
}

pub fn report_summary_csv(report: &CostReport) -> String {
    csv_string(
        &[
            "access_before",
            "access_after",
            "gain",
            "gain (m.u.)",
            "hosting_cost (m.u.)",
            "net_gain (m.u.)",
        ],
        [vec![
            report.access_before.to_string(),
            report.access_after.to_string(),
            report.gain.to_string(),
            money(report.gain_money),
            money(report.hosting),
            money(report.net_gain),
        ]],
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    csv_string(
        &[
            "Y",
            "duplicates",
            "gain",
            "gain (m.u.)",
            "hosting_cost (m.u.)",
            "net_gain (m.u.)",
        ],
        rows.iter().map(|r| {
            vec![
                r.min_hits.to_string(),
                r.duplicates.to_string(),
                r.gain.to_string(),
                money(r.gain_money),
                money(r.hosting),
                money(r.net_gain),
            ]
        }),
    )
}

pub fn sweep_files_csv(rows: &[SweepRow]) -> String {
    csv_string(
        &[
            "Y",
            "file",
            "replicas",
            "access_before",
            "access_after",
            "gain",
            "hosting_cost (m.u.)",
        ],
        rows.iter().flat_map(|r| {
            r.report.files.iter().map(move |f| {
                vec![
                    r.min_hits.to_string(),
                    f.file.get().to_string(),
                    f.replicas.to_string(),
                    f.access_before.to_string(),
                    f.access_after.to_string(),
                    f.gain.to_string(),
                    money(f.hosting),
                ]
            })
        }),
    )
}

pub fn sweep_zones_csv(rows: &[SweepRow]) -> String {
    csv_string(
        &["Y", "zone", "access_before", "access_after", "gain"],
        rows.iter().flat_map(|r| {
            let mut per_zone: BTreeMap<ZoneId, (u128, u128, u128)> = BTreeMap::new();
            for c in &r.report.cells {
                let e = per_zone.entry(c.zone).or_default();
                e.0 += u128::from(c.hits) * u128::from(c.cost_before);
                e.1 += u128::from(c.hits) * u128::from(c.cost_after);
                e.2 += c.gain;
            }
            per_zone.into_iter().map(move |(z, (b, a, g))| {
                vec![
                    r.min_hits.to_string(),
                    z.get().to_string(),
                    b.to_string(),
                    a.to_string(),
                    g.to_string(),
                ]
            })
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical;
    use crate::duplication::{duplicate, Strategy};
    use crate::model::Thresholds;
    use crate::placement::relocate_all;
    use proptest::prelude::*;

    #[test]
    fn caching_grid_layout() {
        let net = canonical::network();
        let p = relocate_all(&net, canonical::RELOCATION).placement;
        let run = duplicate(&net, &p, Strategy::Caching, Thresholds::new(5, 0));
        let grid = format_grid(&run.placement, 6);
        let mut lines = grid.lines();
        assert_eq!(
            lines.next().unwrap(),
            "        Zone 1  Zone 2  Zone 3  Zone 4  Zone 5  Zone 6"
        );
        assert_eq!(
            lines.next().unwrap(),
            "File 1  o       .       .       .       x       x"
        );
        assert_eq!(parse_grid(&grid).unwrap(), run.placement);
    }

    #[test]
    fn grid_errors() {
        assert_eq!(parse_grid(""), Err(GridError::MissingHeader));
        let two_homes = "        Zone 1  Zone 2\nFile 1  o       o\n";
        assert!(matches!(
            parse_grid(two_homes),
            Err(GridError::BadRow { line: 2, .. })
        ));
        let short = "        Zone 1  Zone 2\nFile 1  o\n";
        assert!(parse_grid(short).is_err());
        let junk = "        Zone 1  Zone 2\nFile 1  o       ?\n";
        assert!(parse_grid(junk).is_err());
    }

    #[test]
    fn money_has_two_decimals() {
        assert_eq!(money(-8142.999), "-8143.00");
        assert_eq!(money(0.0), "0.00");
        assert_eq!(money(17857.0), "17857.00");
    }

    #[test]
    fn csv_header_is_quoted_only_when_needed() {
        let s = csv_string(&["a", "b,c"], [vec!["1".into(), "x\"y".into()]]);
        assert_eq!(s, "a,\"b,c\"\n1,\"x\"\"y\"\n");
    }

    proptest! {
        #[test]
        fn grid_round_trip(
            zones in 1usize..9,
            files in proptest::collection::vec((0usize..8, proptest::collection::vec(any::<bool>(), 8)), 0..7),
        ) {
            let mut p = Placement::new();
            for (idx, (home, reps)) in files.iter().enumerate() {
                let f = FileId::new(idx + 1);
                p.set_home(f, ZoneId::new(home % zones + 1));
                for (z, &on) in reps.iter().take(zones).enumerate() {
                    if on {
                        p.add_replica(f, ZoneId::new(z + 1));
                    }
                }
            }
            prop_assert_eq!(parse_grid(&format_grid(&p, zones)).unwrap(), p);
        }
    }
}
