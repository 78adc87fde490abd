use std::path::PathBuf;
use std::process::{Command, Output};

fn hornet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hornet"))
        .args(args)
        .env_remove("HORNET_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(p).unwrap()
}

fn temp_model(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hornet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn golden_outputs() {
    let cases: [(&[&str], &str); 5] = [
        (&["events", "fig2"], "fig2_events.csv"),
        (&["events", "fig3.hornet"], "fig3_events.csv"),
        (&["rg", "fig2"], "fig2_rg.dot"),
        (&["rg", "fig3", "--format", "json"], "fig3_rg.json"),
        (
            &["simulate", "fig3", "--seed", "1", "--steps", "1"],
            "fig3_sim_seed1.csv",
        ),
    ];
    for (args, file) in cases {
        let o = hornet(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        assert_eq!(stdout(&o), golden(file), "{args:?}");
    }
}

#[test]
fn fig3_events_probabilities() {
    let out = stdout(&hornet(&["events", "fig3"]));
    let probs: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(probs, ["1/6", "7/30", "1/4", "7/20"]);
}

#[test]
fn float_mode_prints_decimals() {
    let out = stdout(&hornet(&["--arith", "float", "events", "fig3"]));
    assert!(out.contains(",0.166666666667,"), "{out}");
}

#[test]
fn fig2_rg_has_composed_state() {
    assert!(stdout(&hornet(&["rg", "fig2"])).contains("r[N3, s + v]"));
}

#[test]
fn simulate_is_deterministic_and_reads_env_seed() {
    let a = hornet(&["simulate", "fig3", "--seed", "5", "--steps", "1"]);
    let b = hornet(&["simulate", "fig3", "--seed", "5", "--steps", "1"]);
    assert_eq!(a.stdout, b.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_hornet"))
        .args(["simulate", "fig3", "--steps", "1"])
        .env("HORNET_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
}

#[test]
fn mape_gamma_flag_rescales_rates() {
    // both transitions have no operators, so both get rate 1
    let out = stdout(&hornet(&["--mape-gamma", "0.5", "events", "fig3"]));
    let probs: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(probs, ["5/24", "7/24", "5/24", "7/24"]);
}

#[test]
fn bos_csv() {
    let o = hornet(&["bos", "--horizon", "20", "--seed", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "step,prA0,prA1,structureFlag");
    assert_eq!(lines[1], "0,0.7,0.55,xor");
    assert_eq!(lines.len(), 22);
    assert_eq!(out, stdout(&hornet(&["bos", "--horizon", "20", "--seed", "3"])));
}

#[test]
fn bos_symmetric_start() {
    let out = stdout(&hornet(&["bos", "--a0", "10", "--b0", "10", "--horizon", "0"]));
    assert_eq!(out.lines().nth(1), Some("0,0.5,0.55,xor"));
}

#[test]
fn bos_rejects_bad_params() {
    let o = hornet(&["bos", "--threshold", "1.5"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = hornet(&["bos", "--payoff", "1,1;2,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_model_is_a_model_error() {
    let p = temp_model("empty.hornet", "");
    let o = hornet(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("no system section"));
}

#[test]
fn syntax_errors_are_located() {
    let p = temp_model(
        "bad.hornet",
        "kind K\n  fresh 1\nend\nsystem\n  place p : K\n  trans t\n    in p : y\n  end\nend\n",
    );
    let o = hornet(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 7, column 12"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(hornet(&["nonsense"]).status.code(), Some(2));
    assert_eq!(hornet(&["simulate"]).status.code(), Some(2));
}

#[test]
fn resource_limits_exit_4() {
    let o = hornet(&["rg", "fig2", "--max-states", "2"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).starts_with("digraph"), "partial output is still written");

    // one token split over two output net-tokens has several modes
    let split = "kind K\n  places a b\nend\nobjectnet N : K\n  place a b\nend\nsystem\n  place p q : K\n  var x : K\n  trans t\n    in p : x\n    out q : x + x\n  end\nend\nmarking\n  p[N, 2*a + b]\nend\n";
    let p = temp_model("split.hornet", split);
    assert!(hornet(&["events", p.to_str().unwrap()]).status.success());
    let o = hornet(&["--mode-cap", "2", "events", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn validate_print_round_trips() {
    for name in ["fig2", "fig3"] {
        let o = hornet(&["validate", name]);
        assert!(o.status.success());
        let digest = stdout(&o).rsplit(' ').next().unwrap().trim().to_string();
        let printed = stdout(&hornet(&["validate", "--print", name]));
        let p = temp_model(&format!("{name}-printed.hornet"), &printed);
        let again = stdout(&hornet(&["validate", p.to_str().unwrap()]));
        assert!(again.trim_end().ends_with(&digest), "{name}: {again}");
    }
}

#[test]
fn transient_output() {
    let out = stdout(&hornet(&["rg", "fig3", "--transient", "1"]));
    assert!(out.contains("// s1 0.166666666667"), "{out}");
}

#[test]
fn help_lists_subcommands() {
    let out = stdout(&hornet(&["--help"]));
    for c in ["events", "rg", "simulate", "bos", "validate"] {
        assert!(out.contains(c));
    }
}
