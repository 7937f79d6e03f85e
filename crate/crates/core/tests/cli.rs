use std::fs;

use collatz_ca::cli;
use collatz_ca::digits::{self, MapVariant};
use num_bigint::BigUint;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn invoke(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("collatz-ca").chain(args.iter().copied()), &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

#[test]
fn run_text_prints_iterates_to_first_one() {
    let o = invoke(&["run", "7", "--variant", "ca3", "--format", "text"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout, "7 11 17 13 5 1\n");
}

#[test]
fn run_one_is_a_single_iterate() {
    let o = invoke(&["run", "1", "--variant", "ca2"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout, "1\n");
}

#[test]
fn run_jsonl_matches_oracle() {
    let o = invoke(&["run", "27", "--variant", "ca1", "--format", "jsonl"]);
    assert_eq!(o.code, 0);
    let v: serde_json::Value = serde_json::from_str(o.stdout.trim()).unwrap();
    let fields = ["input", "variant", "iterates", "reached_one", "ca_steps_to_one", "ticks_used"];
    let at: Vec<usize> = fields.iter().map(|f| o.stdout.find(&format!("\"{f}\":")).unwrap()).collect();
    assert!(at.windows(2).all(|w| w[0] < w[1]), "field order in {}", o.stdout);
    assert_eq!(v.as_object().unwrap().len(), fields.len());
    let oracle = digits::oracle_trajectory(MapVariant::T1, &BigUint::from(27u32), 10_000);
    let got: Vec<String> = v["iterates"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
    let want: Vec<String> = oracle.iterates.iter().map(ToString::to_string).collect();
    assert_eq!(got[..want.len()], want[..]);
    assert_eq!(v["ca_steps_to_one"].as_u64(), Some(want.len() as u64 - 1));
    assert_eq!(v["reached_one"], true);
}

#[test]
fn run_jsonl_keeps_big_integers_exact() {
    let n = "1180591620717411303423"; // 2^70 - 1
    let o = invoke(&["run", n, "--variant", "ca3", "--format", "jsonl"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.starts_with(&format!("{{\"input\":{n},\"variant\":\"ca3\",\"iterates\":[{n},")));
}

#[test]
fn run_csv() {
    let o = invoke(&["run", "6", "--variant", "ca3", "--format", "csv"]);
    assert_eq!(o.stdout, "input,variant,row,value\n6,ca3,0,3\n6,ca3,1,5\n6,ca3,2,1\n6,ca3,3,1\n");
}

#[test]
fn run_hits_row_cap() {
    let o = invoke(&["run", "27", "--variant", "ca1", "--max-rows", "5"]);
    assert_eq!(o.code, 2);
    assert_eq!(o.stdout, "27 41 62 31 47\n");
}

#[test]
fn flag_errors_exit_one() {
    assert_eq!(invoke(&["run", "0"]).code, 1);
    assert_eq!(invoke(&["run", "7", "--variant", "ca9"]).code, 1);
    assert_eq!(invoke(&["run", "7", "--max-rows", "0"]).code, 1);
    assert_eq!(invoke(&["verify", "--from", "5", "--to", "4"]).code, 1);
    assert_eq!(invoke(&["efficiency", "--from", "1", "--to", "4"]).code, 1);
    assert_eq!(invoke(&["bogus"]).code, 1);
    assert_eq!(invoke(&[]).code, 1);
    let help = invoke(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("verify"));
}

#[test]
fn verify_reports_zero_mismatches() {
    let o = invoke(&["verify", "--from", "7", "--to", "7", "--variant", "ca1"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout, "ca1 inputs 1 mismatches 0\nmismatches 0\n");
    let o = invoke(&["verify", "--from", "1", "--to", "1", "--variant", "ca3", "--mode", "synchronous"]);
    assert_eq!(o.code, 0);
    let o = invoke(&["verify", "--from", "2", "--to", "300"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.ends_with("ca3 inputs 299 mismatches 0\nmismatches 0\n"), "{}", o.stdout);
}

#[test]
fn efficiency_single_row() {
    let o = invoke(&["efficiency", "--from", "2", "--to", "2", "--variant", "ca1"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout, "n,variant,ca_steps,tst,ratio\n2,ca1,1,1,1.000000\nmean,ca1,,,1.000000\n");
    assert!(o.stderr.contains("n = 1"));
}

#[test]
fn efficiency_mean_matches_recomputation() {
    let o = invoke(&["efficiency", "--from", "2", "--to", "100", "--variant", "ca3"]);
    assert_eq!(o.code, 0);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines.len(), 1 + 99 + 1);
    let mut sum = 0.0;
    for line in &lines[1..100] {
        let f: Vec<&str> = line.split(',').collect();
        sum += f[2].parse::<f64>().unwrap() / f[3].parse::<f64>().unwrap();
    }
    let printed: f64 = lines[100].strip_prefix("mean,ca3,,,").unwrap().parse().unwrap();
    assert!((printed - sum / 99.0).abs() < 1e-6);
}

#[test]
fn batch_modes() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("inputs.txt");
    fs::write(&inputs, "183\n120767\n53132499\n").unwrap();
    let path = inputs.to_str().unwrap();
    let shared = invoke(&["batch", "--inputs", path, "--mode", "shared", "--spacing", "auto"]);
    let stacked = invoke(&["batch", "--inputs", path, "--mode", "stacked"]);
    assert_eq!(shared.code, 0, "{}", shared.stderr);
    assert_eq!(stacked.code, 0);
    let iterates = |text: &str| -> Vec<serde_json::Value> {
        text.lines().map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["iterates"].clone()).collect()
    };
    assert_eq!(iterates(&shared.stdout), iterates(&stacked.stdout));
    assert_eq!(shared.stdout.lines().count(), 3);

    let collide = invoke(&["batch", "--inputs", path, "--mode", "shared", "--spacing", "0,0"]);
    assert_eq!(collide.code, 4);
    assert!(collide.stderr.contains("collide"));
    let wrong_count = invoke(&["batch", "--inputs", path, "--mode", "shared", "--spacing", "100"]);
    assert_eq!(wrong_count.code, 1);
}

#[test]
fn batch_empty_and_unreadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let o = invoke(&["batch", "--inputs", empty.to_str().unwrap()]);
    assert_eq!((o.code, o.stdout.as_str()), (0, ""));
    let missing = dir.path().join("missing.txt");
    assert_eq!(invoke(&["batch", "--inputs", missing.to_str().unwrap()]).code, 1);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "12\nx\n").unwrap();
    assert_eq!(invoke(&["batch", "--inputs", bad.to_str().unwrap()]).code, 1);
}

#[test]
fn rules_dump_sections() {
    let o = invoke(&["rules", "--variant", "ca3"]);
    assert_eq!(o.code, 0);
    let section: Vec<&str> = o
        .stdout
        .lines()
        .skip_while(|l| *l != "# category inner 16")
        .skip(1)
        .take_while(|l| !l.starts_with('#'))
        .collect();
    assert_eq!(section.len(), 16);
    assert!(o.stdout.contains("# consistency ok mismatches 0\n"));

    let o = invoke(&["rules", "--variant", "ca1"]);
    assert!(o.stdout.contains("# category inner 18"));
    assert!(o.stdout.contains("# category parity-sweep 6\n"));
    assert!(o.stdout.contains("# category parity-start 3\n"));

    let o = invoke(&["rules", "--variant", "ca2", "--n-max", "1024"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("# category even-inner 32\n"));
}

#[test]
fn rules_write_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("no-such-dir").join("rules.txt");
    assert_eq!(invoke(&["rules", "--variant", "ca3", "--n-max", "64", "--out", target.to_str().unwrap()]).code, 1);
}

#[test]
fn render_text_and_pgm() {
    let o = invoke(&["render", "7", "--variant", "ca3"]);
    assert_eq!(o.code, 0);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines[0], "ca3 7 14 0");
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[2].replace(' ', "").trim_matches('E'), "1011");

    let one = invoke(&["render", "1", "--variant", "ca3"]);
    let rows: Vec<&str> = one.stdout.lines().skip(1).collect();
    assert!(rows.iter().all(|r| r.split(' ').filter(|t| *t == "1").count() == 1 && !r.contains('0')));

    let ca1 = invoke(&["render", "7", "--variant", "ca1"]);
    assert!(ca1.stdout.starts_with("ca1 16 "));
    assert_eq!(ca1.stdout.lines().count(), 1 + 16 + 1 + 16);

    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("g.pgm");
    let o = invoke(&["render", "7", "--variant", "ca1", "--out", image.to_str().unwrap()]);
    assert_eq!(o.code, 0);
    let pgm = fs::read_to_string(&image).unwrap();
    assert!(pgm.starts_with("P2\n# ca1 rows 16 origin "));
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["run", "97", "--variant", "ca2", "--format", "jsonl"][..],
        &["rules", "--variant", "ca1", "--n-max", "200"][..],
        &["render", "27", "--variant", "ca2"][..],
        &["efficiency", "--from", "2", "--to", "50"][..],
    ] {
        assert_eq!(invoke(args).stdout, invoke(args).stdout);
    }
}
