use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_measdiv");

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace { dir: TempDir::new().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Writes a state file from real/imaginary parts.
    fn state(&self, name: &str, m: &[&[(f64, f64)]], shape: Option<(usize, usize)>) -> PathBuf {
        let rows: Vec<String> = m
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|(a, b)| format!("[{a},{b}]")).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        let shape = shape.map(|(a, r)| format!(",\"shape\":[{a},{r}]")).unwrap_or_default();
        let text = format!("{{\"name\":\"{name}\",\"dim\":{},\"matrix\":[{}]{shape}}}", m.len(), rows.join(","));
        let p = self.path(&format!("{name}.json"));
        fs::write(&p, text).unwrap();
        p
    }

    fn diag(&self, name: &str, d: &[f64]) -> PathBuf {
        let n = d.len();
        let rows: Vec<Vec<(f64, f64)>> =
            (0..n).map(|i| (0..n).map(|j| (if i == j { d[i] } else { 0.0 }, 0.0)).collect()).collect();
        let refs: Vec<&[(f64, f64)]> = rows.iter().map(|r| r.as_slice()).collect();
        self.state(name, &refs, None)
    }

    fn qubit_s(&self) -> PathBuf {
        self.state("s", &[&[(0.7, 0.0), (0.1, -0.2)], &[(0.1, 0.2), (0.3, 0.0)]], None)
    }

    fn qubit_t(&self) -> PathBuf {
        self.state("t", &[&[(0.4, 0.0), (-0.15, 0.05)], &[(-0.15, -0.05), (0.6, 0.0)]], None)
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("MEASURED_DIV_SEED").output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value printed on the `key: value` line.
fn field(o: &Output, key: &str) -> String {
    let prefix = format!("{key}: ");
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
        .unwrap_or_else(|| panic!("no {key} in output:\n{}", stdout(o)))
}

fn number(o: &Output, key: &str) -> f64 {
    let s = field(o, key);
    match s.as_str() {
        "+inf" => f64::INFINITY,
        "-inf" => f64::NEG_INFINITY,
        _ => s.parse().unwrap(),
    }
}

fn classical_renyi(p: &[f64], q: &[f64], a: f64) -> f64 {
    if a == 1.0 {
        return p.iter().zip(q).filter(|(x, _)| **x > 0.0).map(|(x, y)| x * (x / y).ln()).sum();
    }
    let s: f64 = p.iter().zip(q).map(|(x, y)| x.powf(a) * y.powf(1.0 - a)).sum();
    s.ln() / (a - 1.0)
}

#[test]
fn pure_state_against_maximally_mixed_at_half() {
    let w = Workspace::new();
    let rho = w.diag("pure0", &[1.0, 0.0]);
    let sigma = w.diag("maxmix", &[0.5, 0.5]);
    let o = run(&["divergence", "--rho", p(&rho), "--sigma", p(&sigma), "--f", "renyi:0.5"]);
    assert_eq!(o.status.code(), Some(0));
    // -2 log F with F = sqrt(1/2)
    let expected = -2.0 * 0.5f64.sqrt().ln();
    assert!((number(&o, "divergence") - expected).abs() < 1e-9);
}

#[test]
fn identical_states_have_zero_kl() {
    let w = Workspace::new();
    let s = w.qubit_s();
    let o = run(&["divergence", "--rho", p(&s), "--sigma", p(&s), "--f", "kl"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(number(&o, "value").abs() < 1e-9);
}

#[test]
fn disjoint_supports_print_plus_inf() {
    let w = Workspace::new();
    let rho = w.diag("pure0", &[1.0, 0.0]);
    let sigma = w.diag("pure1", &[0.0, 1.0]);
    let out = w.path("rec.json");
    let o = run(&["divergence", "--rho", p(&rho), "--sigma", p(&sigma), "--f", "renyi:2", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&o, "divergence"), "+inf");
    let rec: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(rec["value"], "+inf");
    assert_eq!(rec["report"]["finite"], false);
}

#[test]
fn malformed_inputs_exit_with_parse_code() {
    let w = Workspace::new();
    let good = w.diag("good", &[0.5, 0.5]);
    let bad = w.path("bad.json");
    fs::write(&bad, "{\"name\": \"x\", \"dim\": 2").unwrap();
    let three = w.diag("three", &[0.2, 0.3, 0.5]);
    let skew = w.state("skew", &[&[(0.5, 0.0), (0.3, 0.0)], &[(-0.3, 0.0), (0.5, 0.0)]], None);
    let negative = w.diag("negative", &[1.5, -0.5]);
    for other in [&bad, &three, &skew, &negative] {
        let o = run(&["divergence", "--rho", p(&good), "--sigma", p(other), "--f", "kl"]);
        assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(String::from_utf8_lossy(&o.stderr).lines().count(), 1);
    }
    let o = run(&["divergence", "--rho", p(&good), "--sigma", p(&good), "--f", "renyi:x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn record_is_reproducible_and_seed_precedence_holds() {
    let w = Workspace::new();
    let (s, t) = (w.qubit_s(), w.qubit_t());
    let a = w.path("a.json");
    let b = w.path("b.json");
    let base = ["divergence", "--rho", p(&s), "--sigma", p(&t), "--f", "renyi:0.75", "--out"];
    let run_env = |out: &Path, extra: &[&str]| {
        let mut args = base.to_vec();
        args.push(p(out));
        args.extend_from_slice(extra);
        Command::new(BIN).args(&args).env("MEASURED_DIV_SEED", "7").output().unwrap()
    };
    assert_eq!(run_env(&a, &[]).status.code(), Some(0));
    assert_eq!(run_env(&b, &[]).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let rec: serde_json::Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(rec["seed"], 7);
    assert_eq!(rec["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(rec["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(run_env(&b, &["--seed", "3"]).status.code(), Some(0));
    let rec: serde_json::Value = serde_json::from_str(&fs::read_to_string(&b).unwrap()).unwrap();
    assert_eq!(rec["seed"], 3);
}

#[test]
fn csv_record_uses_lf_endings() {
    let w = Workspace::new();
    let (s, t) = (w.qubit_s(), w.qubit_t());
    let out = w.path("rec.csv");
    let o = run(&["divergence", "--rho", p(&s), "--sigma", p(&t), "--f", "tv", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("command,generator,value,"));
}

#[test]
fn uhlmann_with_trivial_reference_has_zero_gap() {
    let w = Workspace::new();
    let (s, t) = (w.qubit_s(), w.qubit_t());
    let o = run(&["uhlmann", "--direction", "sigma", "--fixed", p(&s), "--marginal", p(&t), "--shape", "2,1", "--alpha", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(number(&o, "gap").abs() < 1e-9);
}

#[test]
fn uhlmann_rejects_excluded_pairing() {
    let w = Workspace::new();
    let (s, t) = (w.qubit_s(), w.qubit_t());
    let o = run(&["uhlmann", "--direction", "rho", "--fixed", p(&s), "--marginal", p(&t), "--shape", "2,1", "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn uhlmann_extension_file_has_the_marginal() {
    let w = Workspace::new();
    let mut rows = vec![vec![(0.0, 0.0); 4]; 4];
    rows[0][0] = (1.0, 0.0);
    let refs: Vec<&[(f64, f64)]> = rows.iter().map(|r| r.as_slice()).collect();
    let fixed = w.state("p00", &refs, Some((2, 2)));
    let marginal = w.diag("maxmix", &[0.5, 0.5]);
    let out = w.path("ext.json");
    let o = run(&[
        "uhlmann", "--direction", "sigma", "--fixed", p(&fixed), "--marginal", p(&marginal), "--shape", "2,2", "--alpha",
        "2", "--out", p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(number(&o, "gap").is_finite());
    assert!((number(&o, "marginal") - 2f64.ln()).abs() < 1e-8);
    let ext: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(ext["shape"], serde_json::json!([2, 2]));
    let re = |i: usize, j: usize| ext["matrix"][i][j][0].as_f64().unwrap();
    let im = |i: usize, j: usize| ext["matrix"][i][j][1].as_f64().unwrap();
    // A-marginal: entries (a, a') summed over r
    assert!((re(0, 0) + re(1, 1) - 0.5).abs() < 1e-8);
    assert!((re(2, 2) + re(3, 3) - 0.5).abs() < 1e-8);
    assert!((re(0, 2) + re(1, 3)).abs() < 1e-8 && (im(0, 2) + im(1, 3)).abs() < 1e-8);
}

#[test]
fn verify_passes_on_commuting_equal_and_random_pairs() {
    let w = Workspace::new();
    let d1 = w.diag("d1", &[0.6, 0.4]);
    let d2 = w.diag("d2", &[0.25, 0.75]);
    let (s, t) = (w.qubit_s(), w.qubit_t());
    for (a, b, f) in [(&d1, &d2, "kl"), (&s, &s, "renyi:2"), (&s, &t, "renyi:0.5"), (&s, &t, "tv")] {
        let o = run(&["verify", "--rho", p(a), "--sigma", p(b), "--f", f, "--trials", "200", "--seed", "11"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert_eq!(field(&o, "povm_bound"), "pass");
        assert_eq!(field(&o, "witness_achievability"), "pass");
    }
}

#[test]
fn duality_gap_closes_for_small_hulls() {
    let w = Workspace::new();
    let s = w.qubit_s();
    let id = w.diag("identity", &[1.0, 1.0]);
    let o = run(&["duality", "--rho", p(&s), "--hull", p(&id)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(number(&o, "gap") < 1e-9);
    let t = w.qubit_t();
    let o = run(&["duality", "--rho", p(&s), "--hull", p(&t)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(number(&o, "gap") <= 1e-4);
    let hull = format!("{},{},{}", p(&t), p(&w.diag("m", &[0.5, 0.5])), p(&w.diag("z", &[0.9, 0.1])));
    let o = run(&["duality", "--rho", p(&s), "--hull", &hull]);
    assert_eq!(o.status.code(), Some(0));
    assert!(number(&o, "gap") <= 1e-4);
}

fn sweep_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sweep_of_equal_states_is_zero() {
    let w = Workspace::new();
    let s = w.qubit_s();
    let o = run(&["sweep", "--rho", p(&s), "--sigma", p(&s), "--alphas", "0.25,0.5,1,2"]);
    assert_eq!(o.status.code(), Some(0));
    for r in sweep_rows(&stdout(&o)) {
        assert!(r[1].parse::<f64>().unwrap().abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn sweep_of_commuting_pair_is_classical() {
    let w = Workspace::new();
    let (pd, qd) = ([0.1, 0.3, 0.6], [0.5, 0.25, 0.25]);
    let rho = w.diag("p", &pd);
    let sigma = w.diag("q", &qd);
    let alphas = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0];
    let list: Vec<String> = alphas.iter().map(|a| a.to_string()).collect();
    let o = run(&["sweep", "--rho", p(&rho), "--sigma", p(&sigma), "--alphas", &list.join(",")]);
    assert_eq!(o.status.code(), Some(0));
    let rows = sweep_rows(&stdout(&o));
    assert_eq!(rows.len(), alphas.len());
    for (r, a) in rows.iter().zip(alphas) {
        assert_eq!(r[0].parse::<f64>().unwrap(), a);
        let m: f64 = r[1].parse().unwrap();
        assert!((m - classical_renyi(&pd, &qd, a)).abs() < 1e-8, "alpha {a}: {m}");
    }
}

#[test]
fn sweep_is_monotone_deterministic_and_lf() {
    let w = Workspace::new();
    let (s, t) = (w.qubit_s(), w.qubit_t());
    let (a, b) = (w.path("a.csv"), w.path("b.csv"));
    let grid = "0,0.2,0.4,0.5,0.7,1,1.5,2,4,inf";
    for out in [&a, &b] {
        let o = run(&["sweep", "--rho", p(&s), "--sigma", p(&t), "--alphas", grid, "--out", p(out)]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(!text.contains('\r'));
    assert!(text.starts_with("alpha,measured,sandwiched,dmax_flag\n"));
    let rows = sweep_rows(&text);
    let measured: Vec<f64> =
        rows.iter().map(|r| if r[1] == "+inf" { f64::INFINITY } else { r[1].parse().unwrap() }).collect();
    assert!(measured.windows(2).all(|m| m[1] >= m[0] - 1e-9), "{measured:?}");
    assert_eq!(rows.last().unwrap()[3], "true");
    assert!(rows[..rows.len() - 1].iter().all(|r| r[3] == "false"));
    let o = run(&["sweep", "--rho", p(&s), "--sigma", p(&t), "--alphas", "0.5,-1"]);
    assert_eq!(o.status.code(), Some(2));
}
