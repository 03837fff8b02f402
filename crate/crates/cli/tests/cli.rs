use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const B01: &str = include_str!("../../core/tests/data/b01.v");
const XOR2: &str = include_str!("../../core/tests/data/xor2.v");

const INVERTER: &str = "module inv (a, y);
  input a;
  output y;
  LUT1 #(.INIT(2'h2)) y_i_1 (.I0(a), .O(y));
endmodule
";

fn seusim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seusim"))
        .args(args)
        .env_remove("SEUSIM_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

struct Work(TempDir);

impl Work {
    fn new() -> Self {
        Work(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn assert_diagnostic(o: &Output, code: i32, class: &str) {
    assert_eq!(o.status.code(), Some(code), "{}", stderr(o));
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("seusim: error[{class}]: ")), "{err}");
}

#[test]
fn parse_writes_ir() {
    let w = Work::new();
    let v = w.file("xor.v", XOR2);
    let ir = w.path("xor.json");
    let o = seusim(&["parse", s(&v), "--ir", s(&ir)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&ir).unwrap();
    assert!(text.contains("\"ir_version\": 1"));
    assert!(text.contains("y_i_1"));
}

#[test]
fn parse_error_exit_codes() {
    let w = Work::new();
    let dsp = w.file("dsp.v", &XOR2.replace("LUT2 #(.INIT(4'h6)) y_i_1", "DSP48E1 mul0"));
    let o = seusim(&["parse", s(&dsp)]);
    assert_diagnostic(&o, 3, "unsupported");
    assert!(stderr(&o).contains("mul0"));

    let dangling = w.file("dangling.v", &XOR2.replace(".I1(b_IBUF), ", ""));
    assert_diagnostic(&seusim(&["parse", s(&dangling)]), 4, "connectivity");

    let syntax = w.file("syntax.v", &XOR2.replace("input a;", "input a"));
    assert_diagnostic(&seusim(&["parse", s(&syntax)]), 2, "syntax");
}

#[test]
fn combinational_loop_is_an_elaboration_error() {
    let w = Work::new();
    let v = w.file(
        "loop.v",
        "module l (a, y);
  input a;
  output y;
  wire p;
  LUT2 #(.INIT(4'h6)) g0 (.I0(a), .I1(y), .O(p));
  LUT1 #(.INIT(2'h1)) g1 (.I0(p), .O(y));
endmodule
",
    );
    let o = seusim(&["campaign", s(&v), "-o", s(&w.path("r.json"))]);
    assert_diagnostic(&o, 5, "elaboration");
}

#[test]
fn campaign_is_deterministic_and_seed_sensitive() {
    let w = Work::new();
    let v = w.file("b01.v", B01);
    let run = |seed: &str, out: &str| {
        let out = w.path(out);
        let o = seusim(&["campaign", s(&v), "--runs", "1024", "--seed", seed, "--threads", "2", "-o", s(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(&out).unwrap()
    };
    let a = run("7", "a.json");
    let b = run("7", "b.json");
    let c = run("8", "c.json");
    assert_eq!(a, b);
    assert_ne!(a, c);
    let manifest = std::fs::read_to_string(w.path("a.json.manifest.json")).unwrap();
    for key in ["design_sha256", "\"seed\": 7", "\"runs\": 1024", "\"cycles\": 10", "\"threads\": 2", "started_unix"] {
        assert!(manifest.contains(key), "{key} missing from {manifest}");
    }
}

#[test]
fn campaign_results_have_declared_dimensions() {
    let w = Work::new();
    let v = w.file("xor.v", XOR2);
    let out = w.path("r.json");
    let o = seusim(&["campaign", s(&v), "--stimuli", "exhaustive", "--cycles", "3", "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(r#"{"runs":64,"cycles":3,"faults":["y_i_1"],"outputs":["y"],"counts":[[[64,64,64]]],"any_error":[[64]]"#), "{text}");
}

#[test]
fn inverter_report_and_histogram() {
    let w = Work::new();
    let v = w.file("inv.v", INVERTER);
    let results = w.path("r.json");
    let o = seusim(&["campaign", s(&v), "--stimuli", "exhaustive", "--cycles", "4", "-o", s(&results)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = seusim(&["report", s(&results), "--table3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "lut,output_bit,cycle_1,cycle_2,cycle_3,cycle_4,total\ny_i_1,y,1,1,1,1,1\n");

    let prefix = w.path("rep");
    let o = seusim(&["report", s(&results), "--table3", "--histogram", "--json", "-o", s(&prefix)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let hist = std::fs::read_to_string(w.path("rep.histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 11);
    assert!(hist.ends_with("0.9,1,1\n"));
    assert!(w.path("rep.table3.csv").exists());
    let json = std::fs::read_to_string(w.path("rep.json")).unwrap();
    assert!(json.contains("\"score\""));
}

fn totals(table: &str) -> Vec<f64> {
    table
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn max_mode_never_exceeds_at_least_once() {
    let w = Work::new();
    let v = w.file("b01.v", B01);
    let results = w.path("r.json");
    let o = seusim(&["campaign", s(&v), "--runs", "512", "--seed", "3", "-o", s(&results)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let max = stdout(&seusim(&["report", s(&results), "--mode", "max"]));
    let alo = stdout(&seusim(&["report", s(&results), "--mode", "at-least-once"]));
    let (max, alo) = (totals(&max), totals(&alo));
    assert_eq!(max.len(), 10);
    assert!(max.iter().zip(&alo).all(|(m, a)| m <= a));

    let hist = stdout(&seusim(&["report", s(&results), "--histogram"]));
    let sum: usize = hist.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(hist.lines().count() - 1, 10);
    assert_eq!(sum, 5);
}

#[test]
fn weights_are_stored_and_can_be_overridden() {
    let w = Work::new();
    let v = w.file("b01.v", B01);
    let weights = w.file("w.csv", "output,weight\noutp,0\n");
    let results = w.path("r.json");
    let o = seusim(&["campaign", s(&v), "--runs", "256", "--weights", s(&weights), "-o", s(&results)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let json = stdout(&seusim(&["report", s(&results), "--json"]));
    assert!(json.contains("\"outp\": \"0\""), "{json}");
    let zero = w.file("zero.csv", "outp,0\noverflw,0\n");
    assert_diagnostic(&seusim(&["report", s(&results), "--weights", s(&zero)]), 6, "config");
    let bad = w.file("bad.csv", "nosuch,1\n");
    let o = seusim(&["campaign", s(&v), "--weights", s(&bad), "-o", s(&results)]);
    assert_diagnostic(&o, 6, "config");
}

#[test]
fn report_rejects_foreign_json() {
    let w = Work::new();
    let bogus = w.file("r.json", r#"{"runs": 1, "cycles": 1}"#);
    assert_diagnostic(&seusim(&["report", s(&bogus)]), 7, "schema");
    let text = w.file("t.json", "not json");
    assert_diagnostic(&seusim(&["report", s(&text)]), 7, "schema");
}

#[test]
fn stimuli_round_trip_through_files() {
    let w = Work::new();
    let v = w.file("b01.v", B01);
    let stim = w.path("s.txt");
    let o = seusim(&["stimuli", "gen", "--design", s(&v), "--cycles", "3", "--runs", "5", "--seed", "1", "-o", s(&stim)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&stim).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.len() == 8 && l.split(';').count() == 3));

    let o = seusim(&["simulate", s(&v), "--stimuli-file", s(&stim), "--run", "4", "--fault", "outp_i_1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("cycle,outp,overflw"));
    assert_eq!(stdout(&o).lines().count(), 4);

    let o = seusim(&["simulate", s(&v), "--fault", "FSM_st_reg[0]"]);
    assert_diagnostic(&o, 6, "config");
    let o = seusim(&["stimuli", "gen", "--inputs", "5", "--cycles", "5", "--stimuli", "exhaustive"]);
    assert_diagnostic(&o, 6, "config");
}

#[test]
fn faults_list_and_usage_errors() {
    let w = Work::new();
    let v = w.file("b01.v", B01);
    let o = seusim(&["faults", "list", s(&v)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 6);
    assert!(stdout(&o).contains("3,FSM_st[1]_i_1,LUT3"));
    let o = seusim(&["frobnicate"]);
    assert_diagnostic(&o, 6, "usage");
    assert_diagnostic(&seusim(&["faults", "list", "/nonexistent/x.v"]), 1, "io");
}
