use std::fs;
use std::process::Command;

use vidrep::cli::{run, EXIT_INPUT, EXIT_OK};

fn vidrep(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        std::iter::once("vidrep").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

const CACHING_Y0: &str = concat!(
    "        Zone 1  Zone 2  Zone 3  Zone 4  Zone 5  Zone 6\n",
    "File 1  o       .       .       .       x       x\n",
    "File 2  .       .       o       x       .       x\n",
    "File 3  .       o       .       x       .       .\n",
    "File 4  .       .       o       x       .       x\n",
    "File 5  x       .       .       x       o       .\n",
    "File 6  .       x       x       o       x       x\n",
);

const FETCHING_Y0: &str = concat!(
    "        Zone 1  Zone 2  Zone 3  Zone 4  Zone 5  Zone 6\n",
    "File 1  o       x       x       .       .       .\n",
    "File 2  x       x       o       .       .       .\n",
    "File 3  x       o       .       .       .       .\n",
    "File 4  x       x       o       .       .       .\n",
    "File 5  x       .       x       .       o       .\n",
    "File 6  .       x       x       o       .       .\n",
);

#[test]
fn duplicate_grids_are_golden() {
    for (strategy, golden) in [("caching", CACHING_Y0), ("fetching", FETCHING_Y0)] {
        let (code, out, _) = vidrep(&["duplicate", "--strategy", strategy, "--A", "5", "--Y", "0"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with(golden), "{strategy}:\n{out}");
    }
}

#[test]
fn fetching_trace_at_high_threshold() {
    let (_, out, _) = vidrep(&["duplicate", "--strategy", "fetching", "--Y", "20000"]);
    let trace: Vec<&str> = out.split("\n\n").nth(1).unwrap().lines().collect();
    assert_eq!(
        trace,
        [
            r#"{"consumer_zone":3,"file":6,"action":"placed","zone":3}"#,
            r#"{"consumer_zone":4,"file":3,"action":"placed","zone":1}"#,
        ]
    );
}

#[test]
fn sweep_csv_is_golden() {
    let (code, out, err) = vidrep(&[
        "sweep",
        "--strategy",
        "caching",
        "--Y-range",
        "0:20000:5000",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "Y,duplicates,gain,gain (m.u.),hosting_cost (m.u.),net_gain (m.u.)\n\
         0,13,1785700,17857.00,26000.00,-8143.00\n\
         5000,7,1706900,17069.00,14000.00,3069.00\n\
         10000,6,1636000,16360.00,12000.00,4360.00\n\
         15000,3,863000,8630.00,6000.00,2630.00\n\
         20000,2,691000,6910.00,4000.00,2910.00\n"
    );
    assert!(err.contains("break-even"));
    assert!(!err.contains("divergence"));
}

#[test]
fn min_cost_relocation_override() {
    let (code, out, _) = vidrep(&["best-locate", "--relocation", "min-cost"]);
    assert_eq!(code, EXIT_OK);
    let homes: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(homes, ["1", "3", "2", "1", "5", "4"]);
}

#[test]
fn single_zone_network() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.json");
    fs::write(
        &path,
        r#"{"zones": 1, "matrix": [[0]], "files": [{"id": 1, "home": 1, "size_tb": 1, "hits": [10]}]}"#,
    )
    .unwrap();
    let config = path.to_str().unwrap();
    let (code, out, _) = vidrep(&["best-locate", "--config", config]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "file,upload_zone,home_zone,moved,cost_at_upload,cost_at_home\n1,1,1,false,0,0\n"
    );
    let (code, out, _) = vidrep(&["duplicate", "--config", config, "--strategy", "fetching"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "        Zone 1\nFile 1  o\n\n");
}

#[test]
fn arcs_config_builds_costs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.json");
    fs::write(
        &path,
        r#"{"zones": ["north", "middle", "south"],
            "arcs": [{"a": 1, "b": 2, "weight": 4}, {"a": 2, "b": 3, "weight": 4}],
            "files": [{"id": 1, "home": 1, "size_tb": 10, "hits": [0, 0, 50]}],
            "thresholds": {"A": 5}}"#,
    )
    .unwrap();
    let (code, out, _) = vidrep(&[
        "best-locate",
        "--relocation",
        "min-cost",
        "--config",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().nth(1).unwrap(), "1,1,3,true,400,0");
}

#[test]
fn bad_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(
        &broken,
        "{\n  \"zones\": 2,\n  \"matrix\": [[0, 1], [1, 0]\n}",
    )
    .unwrap();
    let asym = dir.path().join("asym.json");
    fs::write(
        &asym,
        r#"{"zones": 2, "matrix": [[0, 1], [2, 0]], "files": [{"id": 1, "home": 1, "size_tb": 1, "hits": [1, 1]}]}"#,
    )
    .unwrap();

    let (code, _, err) = vidrep(&["best-locate", "--config", broken.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("line 4"), "{err}");

    let (code, _, err) = vidrep(&["best-locate", "--config", asym.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.starts_with("error:"), "{err}");

    let missing = dir.path().join("nope.json");
    assert_eq!(
        vidrep(&["best-locate", "--config", missing.to_str().unwrap()]).0,
        EXIT_INPUT
    );
    assert_eq!(
        vidrep(&["sweep", "--strategy", "caching", "--Y-range", "10:0:5"]).0,
        EXIT_INPUT
    );
    assert_eq!(
        vidrep(&["duplicate", "--strategy", "caching", "--A", "-1"]).0,
        EXIT_INPUT
    );
    assert_eq!(
        vidrep(&["best-locate", "--relocation", "nearest"]).0,
        EXIT_INPUT
    );
}

#[test]
fn help_exits_0() {
    let (code, out, _) = vidrep(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("duplicate"));
}

#[test]
fn output_is_byte_stable() {
    let args = [
        "sweep",
        "--strategy",
        "fetching",
        "--Y-list",
        "20000,0,5000,5000",
    ];
    let first = vidrep(&args);
    assert_eq!(first, vidrep(&args));
    assert_eq!(
        first.1.lines().count(),
        4,
        "sorted and deduplicated Y values"
    );
}

#[test]
fn out_dir_receives_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();

    let (code, stdout, _) = vidrep(&["duplicate", "--strategy", "caching", "--out", out_s]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        fs::read_to_string(out.join("placement.txt")).unwrap(),
        CACHING_Y0
    );
    let trace = fs::read_to_string(out.join("trace.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 13);
    assert!(stdout.ends_with(&trace));
    let cells = fs::read_to_string(out.join("cells.csv")).unwrap();
    assert!(cells.lines().any(|l| l == "5,1,3800,7,0,26600"), "{cells}");
    assert!(fs::read_to_string(out.join("summary.csv"))
        .unwrap()
        .contains("-8143.00"));

    let (code, _, stderr) = vidrep(&[
        "sweep",
        "--strategy",
        "fetching",
        "--Y-list",
        "0,5000,10000,20000",
        "--out",
        out_s,
    ]);
    assert_eq!(code, EXIT_OK);
    let notes = fs::read_to_string(out.join("notes.txt")).unwrap();
    assert_eq!(notes, stderr);
    assert_eq!(notes.matches("divergence:").count(), 2);
    for name in ["sweep.csv", "sweep_files.csv", "sweep_zones.csv"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let files = fs::read_to_string(out.join("sweep_files.csv")).unwrap();
    assert_eq!(files.lines().count(), 1 + 4 * 6);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_vidrep");
    let ok = Command::new(bin).args(["best-locate"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("file,upload_zone"));
    let bad = Command::new(bin).args(["duplicate"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_runs_suite_and_search() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = vidrep(&[
        "verify",
        "--instances",
        "20",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    assert_eq!(
        out.lines().filter(|l| l.starts_with("PASS")).count(),
        14,
        "{out}"
    );
    assert!(
        out.contains("176 satisfying assignments; frozen matrix is the lexicographically first")
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report.as_array().unwrap().len(), 13);
}
