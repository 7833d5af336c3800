use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_itemset-sampler");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn field(line: &str, i: usize) -> f64 {
    line.split(',').nth(i).unwrap().parse().unwrap()
}

#[test]
fn bounds_row() {
    let out = stdout_of(&[
        "bounds", "--n", "100000", "--delta", "0.01", "--items", "1000", "--ell", "316.22776601683796",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,log_inv_delta,count,ell,delta1,delta1_prime,delta2");
    assert!((field(lines[1], 4) - 0.245776).abs() < 1e-6);
    assert!((field(lines[1], 6) - 0.059095).abs() < 1e-6);
    assert_eq!(lines[1].split(',').nth(5), Some(""));
}

#[test]
fn bounds_accepts_log_inv_delta_and_rejects_both() {
    let out = stdout_of(&["bounds", "--n", "3683", "--log-inv-delta", "9.210340371976184", "--count", "4950"]);
    let row = out.lines().nth(1).unwrap();
    assert!(field(row, 6) <= 0.05);
    assert!(!run(&["bounds", "--n", "10", "--delta", "0.1", "--log-inv-delta", "2", "--count", "3"])
        .status
        .success());
    assert!(!run(&["bounds", "--n", "10", "--delta", "0.1"]).status.success());
}

#[test]
fn sweep_and_curves_are_ordered() {
    let sweep = stdout_of(&["bounds-sweep", "--points", "5", "--delta", "1e-4", "--count", "2^70"]);
    assert_eq!(sweep.lines().count(), 6);
    let curves = stdout_of(&["curves", "--points", "4", "--count-a", "2^70", "--count-b", "4950"]);
    let lines: Vec<&str> = curves.lines().collect();
    assert_eq!(lines[0], "n,delta,count,ell,delta1,delta2");
    assert_eq!(lines.len(), 9);
    for row in &lines[1..] {
        assert!(field(row, 5) < field(row, 4), "{row}");
    }
}

#[test]
fn approx_writes_estimates_and_summary() {
    let out = stdout_of(&[
        "approx",
        "--input",
        data("tiny.dat").to_str().unwrap(),
        "--observed",
        data("tiny_pairs.txt").to_str().unwrap(),
        "--epsilon",
        "0.1",
        "--delta",
        "0.05",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "itemset,frequency,n,exact");
    assert!(lines.contains(&"1+2,0.5,8,true"), "{out}");
    assert_eq!(lines[6], "n,elapsed_sec,full_dataset");
    assert!(lines[7].starts_with("8,") && lines[7].ends_with(",true"));
}

#[test]
fn generate_then_topk_and_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let dat = dir.path().join("gapped.dat");
    let observed = dir.path().join("pairs.txt");
    stdout_of(&[
        "generate", "--spec", data("gapped.spec").to_str().unwrap(), "--seed", "1", "--out",
        dat.to_str().unwrap(),
    ]);
    std::fs::write(&observed, "1 2\n3 4\n5 6\n7 8\n9 10\n").unwrap();

    let topk = stdout_of(&[
        "topk", "--input", dat.to_str().unwrap(), "--observed", observed.to_str().unwrap(), "--k", "2",
        "--delta", "0.01",
    ]);
    let lines: Vec<&str> = topk.lines().collect();
    assert_eq!(lines[0], "rank,itemset,frequency");
    assert!(lines[1].starts_with("1,1+2,") && lines[2].starts_with("2,3+4,"));
    assert_eq!(lines[3], "rounds,final_n,stopped_by,stop_metric");
    assert!(lines[4].contains(",condition_met,"));

    let out_csv = dir.path().join("cand.csv");
    stdout_of(&[
        "candidates", "--input", dat.to_str().unwrap(), "--k", "4", "--chunks", "3", "--out",
        out_csv.to_str().unwrap(),
    ]);
    let cand = std::fs::read_to_string(out_csv).unwrap();
    let lines: Vec<&str> = cand.lines().collect();
    assert_eq!(lines[0], "itemset,exact_frequency");
    assert!(lines.iter().any(|l| l.starts_with("1+2,")));
    assert!(lines.contains(&"threshold,frequent_items,candidate_pairs,pass1_sample_size,chunk_counts"));
}

#[test]
fn eval_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let dat = dir.path().join("dense.dat");
    stdout_of(&["generate", "--spec", data("dense.spec").to_str().unwrap(), "--out", dat.to_str().unwrap()]);
    let cache = dir.path().join("cache");
    let args = [
        "eval", "--input", dat.to_str().unwrap(), "--algo", "both", "--seeds", "3,1", "--cache-dir",
        cache.to_str().unwrap(),
    ];
    let out = stdout_of(&args);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "dataset,algorithm,epsilon,delta,k,elapsed_sec,sample_size,precision,trial_seed"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("dense,precomputed,0.05,0.0001,10,"));
    assert!(lines[1].ends_with(",1") && lines[2].ends_with(",3"));
    assert!(lines[3].starts_with("dense,progressive,"));
    assert!(std::fs::read_dir(&cache).unwrap().count() >= 1);
    // cached oracle gives the same precision column
    let again = stdout_of(&args);
    let precision = |s: &str| s.lines().skip(1).map(|l| field(l, 7)).collect::<Vec<_>>();
    assert_eq!(precision(&out), precision(&again));
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let dat = dir.path().join("bad.dat");
    std::fs::write(&dat, "1 2\n3 x\n").unwrap();
    let out = run(&["candidates", "--input", dat.to_str().unwrap(), "--k", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
