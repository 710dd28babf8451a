use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mixread(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixread"))
        .args(args)
        .env_remove("MIXREAD_JOBS")
        .output()
        .expect("spawn mixread")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Header and data lines; metadata comments dropped.
fn data(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            csv::ReaderBuilder::new()
                .has_headers(false)
                .from_reader(l.as_bytes())
                .records()
                .next()
                .unwrap()
                .unwrap()
                .iter()
                .map(str::to_string)
                .collect()
        })
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = rows[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[i].parse().unwrap()).collect()
}

const SHIFT: &str = r#"
experiment = "shift_sweep"
[params]
nu_q = "5 GHz"
nu_r = "8 GHz"
g_x = "100 MHz"
[[grid]]
name = "g_p"
start = "0 MHz"
stop = "150 MHz"
count = 31
"#;

#[test]
fn list_catalog() {
    let a = mixread(&["list"]);
    assert!(a.status.success());
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(
        names,
        ["shift_sweep", "cpt_sweep", "dephasing_curve", "readout_sim", "kappa_sweep", "overlap_scan"]
    );
    assert!(text.lines().all(|l| l.contains("[required:")));
    assert_eq!(mixread(&["list"]).stdout, a.stdout);
}

#[test]
fn shift_sweep_finds_the_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", SHIFT);
    let out = dir.path().join("o.csv");
    let r = mixread(&["run", s(&cfg), "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let rows = data(&fs::read_to_string(&out).unwrap());
    assert_eq!(
        rows[0],
        ["g_p", "chi", "chi_prime", "chi_perturbative", "k_r0", "k_r1", "nu_r_dressed", "nu_q_dressed", "errors"]
    );
    assert_eq!(rows.len(), 32);
    let g_p = column(&rows, "g_p");
    let chi = column(&rows, "chi");
    // Lower root of the zero condition at g_x = 100 MHz.
    let root = 100e6 / 5.0 * (8.0 - (64.0f64 - 25.0).sqrt());
    let cross = chi.windows(2).position(|w| w[0].signum() != w[1].signum()).unwrap();
    assert!(g_p[cross] <= root && root <= g_p[cross + 1], "{root} not in cell {cross}");
}

#[test]
fn output_is_deterministic_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", SHIFT);
    let strip = |p: &Path| -> String {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# wall_time_s"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let mut outputs = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.path().join(format!("o{jobs}.csv"));
        let r = mixread(&["run", s(&cfg), "--out", s(&out), "--jobs", jobs]);
        assert!(r.status.success());
        outputs.push(strip(&out));
    }
    let env_out = dir.path().join("env.csv");
    let r = Command::new(env!("CARGO_BIN_EXE_mixread"))
        .args(["run", s(&cfg), "--out", s(&env_out), "--seed", "7"])
        .env("MIXREAD_JOBS", "3")
        .output()
        .unwrap();
    assert!(r.status.success());
    outputs.push(strip(&env_out));
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn metadata_echo_reruns() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", SHIFT);
    let out = dir.path().join("o.csv");
    assert!(mixread(&["run", s(&cfg), "--out", s(&out)]).status.success());
    let text = fs::read_to_string(&out).unwrap();
    let echoed: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# config: "))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg2 = write(&dir, "echo.toml", &echoed);
    let out2 = dir.path().join("o2.csv");
    assert!(mixread(&["run", s(&cfg2), "--out", s(&out2)]).status.success());
    assert_eq!(data(&text), data(&fs::read_to_string(&out2).unwrap()));
    assert!(text.contains("# code_version: mixread "));
    assert!(text.contains("# experiment: shift_sweep"));
}

#[test]
fn json_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        r#"
experiment = "readout_sim"
[params]
kappa = "3 MHz"
chi_prime = "0.1 MHz"
n_steady = 15
t_end = "400 ns"
samples = 5
[output]
format = "json"
"#,
    );
    let r = mixread(&["run", s(&cfg)]);
    assert!(r.status.success());
    let j: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    let columns: Vec<&str> = j["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(
        columns,
        ["t", "alpha0_re", "alpha0_im", "alpha1_re", "alpha1_im", "snr", "error", "errors"]
    );
    let rows = j["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[4][0].as_f64().unwrap() - 400e-9).abs() < 1e-18);
    assert!(rows[4][6].as_f64().unwrap() < 1e-4);
    assert_eq!(j["metadata"]["experiment"], "readout_sim");

    // --format overrides the config.
    let r = mixread(&["run", s(&cfg), "--format", "csv"]);
    assert!(String::from_utf8(r.stdout).unwrap().starts_with("# experiment: readout_sim"));
}

#[test]
fn dephasing_above_one_second() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        r#"
experiment = "dephasing_curve"
[params]
kappa = "3 MHz"
chi = "0 Hz"
chi_prime = "1 MHz"
nu_r = "7 GHz"
temperature = "50 mK"
"#,
    );
    let r = mixread(&["run", s(&cfg)]);
    assert!(r.status.success());
    let rows = data(&String::from_utf8(r.stdout).unwrap());
    let t_phi = column(&rows, "t_phi")[0];
    let ode = column(&rows, "gamma_nonlinear_ode")[0];
    assert!(t_phi > 1.0, "{t_phi}");
    assert!(1.0 / ode > 1.0);
}

#[test]
fn cpt_sweep_contour() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        r#"
experiment = "cpt_sweep"
[params]
n_fock = 10
[[grid]]
name = "e_c_delta"
start = "-1.5 GHz"
stop = "0 GHz"
count = 4
"#,
    );
    let r = mixread(&["run", s(&cfg)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let rows = data(&String::from_utf8(r.stdout).unwrap());
    let chi = column(&rows, "chi");
    let chi_prime = column(&rows, "chi_prime");
    assert!(chi.windows(2).any(|w| w[0].signum() != w[1].signum()), "{chi:?}");
    assert!(chi_prime.iter().all(|c| c.abs() > 1e3));
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "experiment = \"shift_swep\"\n");
    let r = mixread(&["run", s(&cfg)]);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8(r.stderr).unwrap();
    assert!(err.contains("did you mean `shift_sweep`"), "{err}");

    let cfg = write(&dir, "units.toml", &SHIFT.replace("\"8 GHz\"", "\"8 Ghz\""));
    let r = mixread(&["run", s(&cfg)]);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8(r.stderr).unwrap();
    assert!(err.contains("line 5") && err.contains("nu_r"), "{err}");

    let r = mixread(&["run", s(&dir.path().join("missing.toml"))]);
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(mixread(&["run", s(&cfg), "--format", "xml"]).status.code(), Some(1));
    assert_eq!(mixread(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mixread(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failures() {
    let dir = TempDir::new().unwrap();
    // A 1 ns step is stable at 1 MHz but exceeds the step limit at 8 MHz.
    let cfg = write(
        &dir,
        "c.toml",
        r#"
experiment = "kappa_sweep"
[params]
chi_prime = "0.12 MHz"
n_steady = 15
t_end = "100 ns"
dt = "1 ns"
[[grid]]
name = "kappa"
start = "1 MHz"
stop = "8 MHz"
count = 3
"#,
    );
    let out = dir.path().join("o.csv");
    let r = mixread(&["run", s(&cfg), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());

    let r = mixread(&["run", s(&cfg), "--out", s(&out), "--keep-going"]);
    assert!(r.status.success());
    let rows = data(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 4);
    let errors = rows[0].len() - 1;
    assert!(rows[1][errors].is_empty());
    assert!(rows[3][errors].contains("step size"), "{:?}", rows[3]);
    assert!(rows[3][1..errors].iter().all(String::is_empty));
    assert!(rows.iter().all(|r| r.len() == rows[0].len()));
}

#[test]
fn overlap_scan_models() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        r#"
experiment = "overlap_scan"
[params]
nu_q = "5 GHz"
nu_r = "8 GHz"
g_x = "30 MHz"
g_p = "30 MHz"
n_max_scan = 8
"#,
    );
    let r = mixread(&["run", s(&cfg)]);
    assert!(r.status.success());
    let rows = data(&String::from_utf8(r.stdout).unwrap());
    assert_eq!(rows.len(), 1 + 4 * 9);
    let f = column(&rows, "fidelity");
    assert!(f.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));

    let cfg = write(&dir, "cpt.toml", "experiment = \"overlap_scan\"\n[params]\nmodel = \"cpt\"\nn_max_scan = 4\n");
    let r = mixread(&["run", s(&cfg)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let cfg = write(&dir, "bad.toml", "experiment = \"overlap_scan\"\n");
    let r = mixread(&["run", s(&cfg)]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8(r.stderr).unwrap().contains("requires parameter `nu_q`"));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let src = fs::read_to_string(&path).unwrap();
            let value: toml::Table = src.parse().unwrap();
            let name = value["experiment"].as_str().unwrap();
            assert_eq!(path.file_stem().unwrap(), name);
            seen += 1;
        }
    }
    assert_eq!(seen, 6);
}
