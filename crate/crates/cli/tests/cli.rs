use serde_json::Value;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ordlab"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out) = run(args);
    assert_eq!(code, 0, "{args:?}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn norm_example() {
    let v = json(&[
        "norm",
        "--alpha",
        "1",
        "--vector",
        r#"{"coords":[[1,"1/1"],[2,"1/1"],[3,"1/1"],[4,"1/1"],[5,"1/1"]]}"#,
    ]);
    assert_eq!(v["value"], "3/1");
    assert_eq!(v["witness"], "{3,4,5}");
    assert_eq!(v["convention"], ordlab::CONVENTION);
    assert_eq!(v["version"], ordlab::VERSION);
}

#[test]
fn ord_and_rank() {
    assert_eq!(json(&["ord", "eval", "w^2*3"])["result"], "w^2*3");
    assert_eq!(json(&["ord", "compare", "w+1", "w*2"])["result"], "LT");
    assert_eq!(json(&["ord", "mul", "w+1", "2"])["result"], "w*2+1");
    assert_eq!(json(&["ord", "classify", "w^(w)"])["result"], "Limit");
    assert_eq!(json(&["schreier", "rank", "--alpha", "1", "--set", "{}"])["order"], "w+1");
    assert_eq!(json(&["schreier", "rank", "--alpha", "1", "--n", "1"])["restricted_order"], 2);
    assert_eq!(json(&["schreier", "enum", "--alpha", "1", "--n", "4"])["count"], 8);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["schreier", "maximal", "--alpha", "1", "--set", "{1,2}"]).0, 2);
    assert_eq!(run(&["ord", "eval", "w^"]).0, 2);
    assert_eq!(run(&["schreier", "rank", "--alpha", "w^(w^(w))", "--set", "{}"]).0, 3);
    assert_eq!(run(&["schreier", "enum", "--alpha", "1", "--n", "400"]).0, 2);
}

#[test]
fn deterministic_output() {
    let args = ["lab", "staircase", "--m", "4", "--filtration", "q", "--seed", "3"];
    assert_eq!(run(&args), run(&args));
    let v = json(&args);
    let value = ordlab::rat::parse_q(v["value"].as_str().unwrap()).unwrap();
    assert!(value <= ordlab::rat::q(1, 2));
}

#[test]
fn seq_and_trees() {
    let seq = r#"[{"coords":[[3,"1/1"]]},{"coords":[[4,"1/1"]]},{"coords":[[5,"1/1"]]}]"#;
    let v = json(&["seq", "analyze", "--alpha", "1", "--seq", seq]);
    assert_eq!(v["l1_constant"], "1/2");
    let s = json(&["lab", "small-sup", "--seq", seq]);
    assert_eq!(s["value"], "1/3");
    let t = json(&["tree", "replace", "--alpha", "3", "--beta", "2", "--depth", "6", "--breadth", "1"]);
    assert_eq!(t["order"], 6);
    assert_eq!(t["order_preserving"], true);
}

#[test]
fn cspace_commands() {
    let f = r#"{"alpha":"1","combo":[["{2}","1/1"],["{2,3}","-2/1"]]}"#;
    let v = json(&["cspace", "cnorm", "--f", f, "--n", "4"]);
    assert_eq!(v["value"], "1/1");
    let e = json(&["cspace", "embed", "--alpha", "1", "--n", "4", "--vector", r#"{"coords":[[2,"1/1"],[3,"-1/2"]]}"#]);
    assert_eq!(e["cnorm"], e["norm"]);
    let st = json(&["cspace", "steptree", "--gamma", "1", "--depth", "3", "--breadth", "2"]);
    assert!(st["l1_constants"].as_array().unwrap().iter().all(|c| c == "1/1"));
}

#[test]
fn dossier_round_trip() {
    let dir = std::env::temp_dir().join(format!("ordlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dossier.json");
    let p = path.to_str().unwrap();
    let (code, out) = run(&["lab", "certify", "--alpha", "1", "--n", "6", "--out", p]);
    assert_eq!((code, out.as_str()), (0, ""));
    let d: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(d["canonical"]["root_order"], "w+1");
    assert_eq!(json(&["lab", "validate", "--dossier", &format!("@{p}")])["valid"], true);
    std::fs::remove_dir_all(&dir).unwrap();
}
