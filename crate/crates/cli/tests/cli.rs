use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use ces_pcl_cli::run;
use serde_json::Value;

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name]
        .iter()
        .collect();
    path.to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn invoke(args: &[&str], stdin: &str) -> Run {
    let mut argv = vec!["ces-pcl"];
    argv.extend_from_slice(args);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn cli(args: &[&str]) -> Run {
    invoke(args, "")
}

fn json(args: &[&str]) -> Value {
    let mut with = args.to_vec();
    with.push("--json");
    let r = cli(&with);
    serde_json::from_str(&r.out).unwrap_or_else(|e| panic!("{e}: {}", r.out))
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().to_string())
        .collect()
}

#[test]
fn documented_examples() {
    let r = cli(&["prove", &fixture("delta-star.ces")]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out, "e0\ne1\ne2\ne3\ne4\ne5\ne6\ne7\n");

    let r = cli(&["agree", &fixture("or-payoffs.ces")]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out, "agreement\nprovable: a0 a2 b0 b2\n");

    let r = cli(&["traces", &fixture("delta4.ces")]);
    assert_eq!(r.out, "(empty)\na b\nb a\n");
}

#[test]
fn text_and_json_carry_the_same_data() {
    let file = fixture("delta-star.ces");
    let text: Vec<String> = cli(&["traces", &file, "--max", "20"])
        .out
        .lines()
        .map(|l| {
            if l == "(empty)" {
                String::new()
            } else {
                l.to_string()
            }
        })
        .collect();
    let decoded: Vec<String> = json(&["traces", &file, "--max", "20"])["traces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| strings(t).join(" "))
        .collect();
    assert_eq!(text, decoded);

    for (cmd, key) in [
        ("prove", "provable"),
        ("urgent", "urgent"),
        ("prudent", "prudent"),
        ("reachable", "reachable"),
    ] {
        for file in ["c1.ces", "c3.ces", "c4.ces", "or-payoffs.ces"] {
            let f = fixture(file);
            let mut args = vec![cmd, f.as_str()];
            if cmd != "prove" {
                args.extend(["--past", "a"]);
                if file == "or-payoffs.ces" {
                    args[3] = "a0";
                }
            }
            let text: Vec<String> = cli(&args).out.lines().map(String::from).collect();
            assert_eq!(text, strings(&json(&args)[key]), "{cmd} {file}");
        }
    }

    let f = fixture("c3.ces");
    let text = cli(&["credits", &f, "--play", "b,a"]).out;
    let v = json(&["credits", &f, "--play", "b,a"]);
    let rows = v["per_prefix"].as_array().unwrap();
    let rebuilt: String = rows
        .iter()
        .map(|r| {
            let prefix = strings(&r["prefix"]).join(" ");
            let prefix = if prefix.is_empty() {
                "(empty)".to_string()
            } else {
                prefix
            };
            format!("{prefix}: {{{}}}\n", strings(&r["credits"]).join(" "))
        })
        .collect::<String>()
        + &format!("final: {{{}}}\n", strings(&v["final"]).join(" "));
    assert_eq!(text, rebuilt);

    let text = cli(&["verdict", &f, "--play", "a"]).out;
    let v = json(&["verdict", &f, "--play", "a"]);
    for line in text.lines().skip(2) {
        let cols: Vec<&str> = line.split_whitespace().collect();
        let row = &v["participants"][cols[0]];
        let yn = |b: &Value| match b.as_bool() {
            Some(true) => "yes",
            Some(false) => "no",
            None => "-",
        };
        assert_eq!(
            cols[1..],
            [
                yn(&row["innocent"]),
                yn(&row["credit_free"]),
                yn(&row["wins"])
            ]
        );
    }
}

#[test]
fn json_keys_are_sorted() {
    let out = cli(&["simulate", &fixture("c1.ces"), "--json"]).out;
    let keys: Vec<&str> = out
        .lines()
        .filter(|l| l.starts_with("  \"") && l.contains(':'))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn output_is_deterministic() {
    let gen = ["gen", "shy-dancers", "--n", "4", "--circular", "2:2,3:3"];
    assert_eq!(cli(&gen).out, cli(&gen).out);
    let spec = cli(&gen).out;
    for seed in ["0", "7", "123456789"] {
        let a = invoke(&["simulate", "-", "--seed", seed, "--json"], &spec);
        let b = invoke(&["simulate", "-", "--seed", seed, "--json"], &spec);
        assert_eq!(a.code, 0, "{}", a.err);
        assert_eq!(a.out, b.out);
        let v: Value = serde_json::from_str(&a.out).unwrap();
        assert_eq!(v["everyone_wins"], Value::Bool(true));
    }
}

#[test]
fn exit_codes() {
    assert_eq!(
        cli(&["check-trace", &fixture("delta3.ces"), "--trace", "a,b"]).code,
        0
    );
    assert_eq!(
        cli(&["check-trace", &fixture("delta3.ces"), "--trace", "b,a"]).code,
        1
    );
    assert_eq!(
        cli(&["check-trace", &fixture("delta3.ces"), "--trace", "(empty)"]).out,
        "yes\n"
    );
    assert_eq!(cli(&["agree", &fixture("c2.ces")]).code, 1);
    assert_eq!(cli(&["agree", &fixture("c3.ces")]).code, 0);

    let conflicted = cli(&["prudent", &fixture("c5.ces")]);
    assert_eq!(conflicted.code, 3);
    assert!(conflicted.out.is_empty());
    assert!(conflicted.err.contains("conflict-free"));
    assert_eq!(cli(&["agree", &fixture("c5.ces")]).code, 3);
    assert_eq!(cli(&["agree", &fixture("delta4.ces")]).code, 3);
    assert_eq!(
        cli(&["credits", &fixture("c1.ces"), "--play", "a,a"]).code,
        3
    );

    assert_eq!(cli(&["prove", "/nonexistent.ces"]).code, 2);
    assert_eq!(cli(&["frobnicate"]).code, 2);
    assert_eq!(cli(&["urgent", &fixture("c1.ces"), "--past", "zz"]).code, 2);
    assert_eq!(
        cli(&["strategy", &fixture("c1.ces"), "--participant", "Z"]).code,
        2
    );
    assert_eq!(
        cli(&["gen", "shy-dancers", "--n", "3", "--circular", "5:5"]).code,
        2
    );
    assert_eq!(cli(&["--help"]).code, 0);
}

#[test]
fn parse_errors_go_to_stderr_with_positions() {
    let broken = "agent A owns a\nclause a <- b\n";
    let r = invoke(&["prove", "-"], broken);
    assert_eq!(r.code, 2);
    assert!(r.out.is_empty());
    assert!(r.err.contains("-:2:13: undeclared-owner"), "{}", r.err);

    let v = invoke(&["validate", "-"], broken);
    assert_eq!(v.code, 1);
    assert!(v.out.contains("undeclared-owner"));
    assert_eq!(invoke(&["validate", "-"], "agent A owns a\n").out, "ok\n");
}

#[test]
fn encoding_round_trips_through_the_tagged_parser() {
    let encoded = cli(&["encode", &fixture("delta3.ces")]).out;
    assert_eq!(invoke(&["prove", "-"], &encoded).code, 2);
    let proved = invoke(&["--allow-tagged", "prove", "-"], &encoded);
    assert_eq!(proved.out, "R$a\nR$b\nU$a\n");
}

#[test]
fn oracle_subcommands_agree_with_fast_ones() {
    for file in [
        "delta1.ces",
        "delta2.ces",
        "delta3.ces",
        "delta4.ces",
        "c1.ces",
        "c4.ces",
        "or-payoffs.ces",
    ] {
        let f = fixture(file);
        assert_eq!(
            cli(&["prove", &f]).out,
            cli(&["oracle", "prove", &f]).out,
            "{file}"
        );
        assert_eq!(
            cli(&["traces", &f]).out,
            cli(&["oracle", "traces", &f]).out,
            "{file}"
        );
    }
    let f = fixture("c3.ces");
    for past in ["", "a", "b"] {
        let fast = cli(&["prudent", &f, "--past", past]).out;
        assert_eq!(fast, cli(&["oracle", "prudence", &f, "--past", past]).out);
    }
    assert_eq!(
        cli(&["oracle", "prudence", &fixture("c5.ces"), "--past", "a"]).out,
        "b\nc\n"
    );
    assert_eq!(
        cli(&["oracle", "traces", &fixture("delta-star.ces")]).code,
        0
    );
}

#[test]
fn strategies_offer_prudent_owned_events() {
    let f = fixture("c3.ces");
    assert_eq!(cli(&["strategy", &f, "--participant", "A"]).out, "a\n");
    assert_eq!(cli(&["strategy", &f, "--participant", "B"]).out, "");
    assert_eq!(
        cli(&["strategy", &f, "--participant", "B", "--past", "a"]).out,
        "b\n"
    );
}

#[test]
fn binary_reads_stdin_and_sets_exit_status() {
    let exe = env!("CARGO_BIN_EXE_ces-pcl");
    let mut child = Command::new(exe)
        .args(["agree", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(std::fs::read(fixture("c2.ces")).unwrap().as_slice())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "no agreement\nprovable:\nunsatisfied: A B\n"
    );
}
