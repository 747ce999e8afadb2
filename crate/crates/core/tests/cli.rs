use std::process::Command;

use netcap::geometry::{build_graph, count_cut_edges, generate_instance, XiMode};
use netcap::harness::{flow_from_json, network_from_json, strip_wall_time, CSV_HEADER};

fn netcap(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_netcap")).args(args).output().unwrap();
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn field<'a>(stdout: &'a str, key: &str) -> &'a str {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key).map(str::trim))
        .unwrap_or_else(|| panic!("{key} missing from {stdout}"))
}

#[test]
fn gen_writes_a_loadable_network() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let (ok, _, err) = netcap(&[
        "gen",
        "--n",
        "40",
        "--seed",
        "9",
        "--xi",
        "const:1.5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    let inst = network_from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(inst, generate_instance(40, 9, XiMode::Constant(1.5)).unwrap());

    let (ok, stdout, _) = netcap(&["cut-count", "--network", path.to_str().unwrap()]);
    assert!(ok);
    let stats = count_cut_edges(&build_graph(&inst, 1.0).unwrap(), &inst);
    let row = stdout.lines().nth(1).unwrap();
    assert!(
        row.ends_with(&format!(
            ",{},{},{}",
            stats.straddling_edges, stats.left_strip, stats.right_strip
        )),
        "{row}"
    );
}

#[test]
fn flow_subcommands_report_values() {
    let (ok, stdout, err) = netcap(&["maxflow", "--n", "200", "--seed", "2"]);
    assert!(ok, "{err}");
    assert_eq!(field(&stdout, "value"), field(&stdout, "cut_links"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flow.json");
    let (ok, stdout, err) = netcap(&[
        "mcf",
        "--n",
        "60",
        "--seed",
        "2",
        "--eps",
        "0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    let file = flow_from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(file.epsilon, 0.1);
    assert_eq!(field(&stdout, "lambda"), netcap::harness::format_sig(file.lambda));
}

#[test]
fn route_and_antenna_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let loads = dir.path().join("loads.csv");
    let (ok, stdout, err) = netcap(&[
        "route",
        "--n",
        "2000",
        "--seed",
        "1",
        "--xi",
        "grid:2",
        "--c-grid",
        "2",
        "--loads-out",
        loads.to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    assert!(field(&stdout, "gamma").parse::<f64>().unwrap() > 0.0);
    let csv = std::fs::read_to_string(loads).unwrap();
    assert!(csv.starts_with("cell_i,cell_j,direction,load,physical_links\n"));

    let mut counts = Vec::new();
    for model in ["omni", "single-beam", "multi-beam"] {
        let (ok, stdout, err) = netcap(&[
            "antenna",
            "--n",
            "3000",
            "--seed",
            "4",
            "--model",
            model,
            "--eps-ang",
            "1e-9",
        ]);
        assert!(ok, "{err}");
        counts.push(field(&stdout, "edges").parse::<usize>().unwrap());
    }
    assert!(counts[0] <= counts[1] && counts[1] <= counts[2], "{counts:?}");
}

#[test]
fn scaling_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("run{k}.csv"));
        let (ok, _, err) = netcap(&[
            "scaling",
            "--metric",
            "single-beam",
            "--n-list",
            "200,400,800,1600",
            "--trials",
            "3",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(ok, "{err}");
        assert!(err.contains("normalized slope"), "{err}");
        runs.push(std::fs::read_to_string(path).unwrap());
    }
    assert_eq!(runs[0].lines().nth(1), Some(CSV_HEADER));
    assert_eq!(runs[0].lines().count(), 2 + 12);
    assert_eq!(strip_wall_time(&runs[0]), strip_wall_time(&runs[1]));
}

#[test]
fn bad_input_fails_cleanly() {
    let (ok, _, err) = netcap(&["antenna", "--n", "100", "--model", "laser"]);
    assert!(!ok && err.contains("laser"), "{err}");
    let (ok, _, err) = netcap(&[
        "scaling",
        "--metric",
        "cut-edges",
        "--n-list",
        "300,200",
        "--trials",
        "1",
    ]);
    assert!(!ok && err.contains("increasing"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"n\": 3,, }").unwrap();
    let (ok, _, err) = netcap(&["cut-count", "--network", path.to_str().unwrap()]);
    assert!(!ok && err.contains("at byte 8"), "{err}");
}
