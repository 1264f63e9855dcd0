use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const EXAMPLE: &str = r#"
units = "rad"
nbar = 1000.0

[params]
mech_freq = 1.0
optical_decay = 0.1
mech_decay = 0.001
coupling = 0.01
"#;

fn sideband(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sideband"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = sideband(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    sideband(dir, args).status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn schema_check(name: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

/// The blue curve α = 0.1, β = 1e-3, ϑ = 0.1 expressed as rates with Ω = 1.
fn blue_curve_config() -> String {
    let g0 = (5e-4f64).sqrt();
    let gm = (0.02f64).sqrt();
    format!(
        "units = \"rad\"\n[params]\nmech_freq = 1.0\noptical_decay = {}\nmech_decay = {gm}\ncoupling = {g0}\n\
         [sweep]\nvariable = \"nbar\"\nstart = 500.0\nstop = 2000.0\npoints = 1501\n",
        0.2 - gm
    )
}

#[test]
fn rejected_input_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write(p, "no_freq.toml", "units = \"rad\"\nnbar = 1.0\n[params]\noptical_decay = 0.1\nmech_decay = 0.001\ncoupling = 0.01\n");
    write(p, "empty.toml", &format!("{EXAMPLE}[sweep]\nvariable = \"nbar\"\nstart = 10.0\nstop = 1.0\npoints = 5\n"));
    write(p, "no_units.toml", &EXAMPLE.replace("units = \"rad\"", ""));
    write(p, "typo.toml", &EXAMPLE.replace("nbar =", "nbr ="));
    write(p, "garbage.csv", "f,S\n0.0,1.0\nnot,a number\n");
    write(p, "coarse.toml", &format!("{EXAMPLE}[simulate]\ndt = 0.1\nduration = 2000.0\n"));

    let cases: &[&[&str]] = &[
        &["-c", "no_freq.toml", "si"],
        &["-c", "empty.toml", "sweep"],
        &["-c", "no_units.toml", "si"],
        &["-c", "typo.toml", "si"],
        &["-c", "missing.toml", "si"],
        &["--units", "rad", "fit", "garbage.csv"],
        &["--units", "rad", "fit", "absent.csv"],
        &["-c", "coarse.toml", "--out", "sim", "simulate"],
        &["-c", "coarse.toml", "simulate"],
        &["--units", "furlongs", "si"],
        &["si", "--bogus"],
    ];
    for args in cases {
        assert_eq!(code(p, args), 2, "{args:?}");
    }
    let stderr = String::from_utf8(sideband(p, cases[0]).stderr).unwrap();
    assert!(stderr.contains("mech_freq"), "{stderr}");
}

#[test]
fn failed_fit_exits_3() {
    let d = tempfile::tempdir().unwrap();
    // a flat spectrum has no peaks to fit
    let rows: String = (0..200).map(|i| format!("{},1.0\n", i as f64 * 0.01)).collect();
    write(d.path(), "flat.csv", &rows);
    assert_eq!(code(d.path(), &["--units", "rad", "fit", "flat.csv"]), 3);
}

#[test]
fn json_outputs_match_schemas() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write(p, "ex.toml", &format!("{EXAMPLE}[sweep]\nvariable = \"coupling\"\nstart = 0.001\nstop = 0.01\npoints = 4\n"));
    for cmd in ["si", "sweep", "optimum", "classify", "synth"] {
        let doc = json(&ok(p, &["-c", "ex.toml", "--format", "json", cmd]));
        schema_check(cmd, &doc);
    }
    ok(p, &["--units", "rad", "--out", "spec", "synth"]);
    let doc = json(&ok(p, &["--units", "rad", "fit", "spec/synth.csv"]));
    schema_check("fit", &doc);
}

#[test]
fn simulate_writes_three_files() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write(
        p,
        "ring.toml",
        "units = \"rad\"\n[params]\nmech_freq = 1.0\noptical_decay = 0.1\nmech_decay = 0.02\ncoupling = 0.1\n\
         [simulate]\nmode = \"ringdown\"\ndt = 0.00625\nduration = 1638.4\ntransient_fraction = 0.25\n\
         sample_stride = 8\nphotons = 500.0\neffective_detuning = -80.0\n",
    );
    ok(p, &["-c", "ring.toml", "--out", "run", "simulate"]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(p.join("run/simulate.json")).unwrap()).unwrap();
    schema_check("simulate", &doc);
    assert_eq!(doc["consistent_with_zero"], true, "{doc:#}");
    assert!(doc["verdict"].as_str().unwrap().contains("consistent with 0"));
    assert!((doc["detuning"].as_f64().unwrap() + 70.001).abs() < 1e-3);
    for f in ["trajectory.csv", "spectrum.csv"] {
        let text = std::fs::read_to_string(p.join("run").join(f)).unwrap();
        assert!(text.lines().count() > 1000, "{f}");
    }
}

#[test]
fn outputs_are_byte_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write(p, "s.toml", "units = \"rad\"\n[synth]\nsnr_db = 20.0\n");
    let a = ok(p, &["-c", "s.toml", "--seed", "7", "synth"]);
    assert_eq!(a, ok(p, &["-c", "s.toml", "--seed", "7", "synth"]));
    assert_ne!(a, ok(p, &["-c", "s.toml", "--seed", "8", "synth"]));

    write(p, "sweep.toml", &blue_curve_config());
    let one = ok(p, &["-c", "sweep.toml", "--workers", "1", "sweep"]);
    assert_eq!(one, ok(p, &["-c", "sweep.toml", "--workers", "3", "sweep"]));

    write(p, "fit.toml", "units = \"rad\"\n[fit]\nbootstrap = 20\n");
    std::fs::write(p.join("noisy.csv"), &a).unwrap();
    let f1 = ok(p, &["-c", "fit.toml", "--seed", "1", "fit", "noisy.csv"]);
    assert_eq!(f1, ok(p, &["-c", "fit.toml", "--seed", "1", "--workers", "2", "fit", "noisy.csv"]));
}

#[test]
fn sweep_peaks_at_the_optimum() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "sweep.toml", &blue_curve_config());
    let csv = String::from_utf8(ok(d.path(), &["-c", "sweep.toml", "sweep"])).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "delta_dimensionless").unwrap();
    let (n, _) = lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').take(col + 1).map(|c| c.parse().unwrap()).collect();
            (f[0], f[col])
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    // √((α+β)² + α²ϑ²)/(αβ) − 1/α for α = 0.1, β = 1e-3, ϑ = 0.1
    let (a, b, th) = (0.1f64, 1e-3f64, 0.1f64);
    let expected = ((a + b).powi(2) + (a * th).powi(2)).sqrt() / (a * b) - 1.0 / a;
    assert!((n - expected).abs() <= 1.0, "peak at {n}, expected {expected}");
}

#[test]
fn zero_coupling_gives_the_bare_offset() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "g0.toml", &EXAMPLE.replace("coupling = 0.01", "coupling = 0.0"));
    let doc = json(&ok(d.path(), &["-c", "g0.toml", "si"]));
    // 2Γ²Ω/(4Ω² + (κ+Γ)²)
    let expected = 2.0 * 1e-6 / (4.0 + 0.101f64.powi(2));
    let full = doc["methods"][0]["delta"].as_f64().unwrap();
    assert!((full - expected).abs() <= 1e-12 * expected, "{full} vs {expected}");
    assert!(doc["optimum"].is_null());
    assert!(doc["regime"].is_null());
    assert_eq!(code(d.path(), &["-c", "g0.toml", "optimum"]), 3);
}

#[test]
fn hz_and_rad_agree() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write(p, "rad.toml", EXAMPLE);
    let tau = std::f64::consts::TAU;
    let hz = format!(
        "units = \"hz\"\nnbar = 1000.0\n[params]\nmech_freq = {}\noptical_decay = {}\nmech_decay = {}\ncoupling = {}\n",
        1.0 / tau,
        0.1 / tau,
        0.001 / tau,
        0.01 / tau
    );
    write(p, "hz.toml", &hz);
    let r = json(&ok(p, &["-c", "rad.toml", "si"]));
    let h = json(&ok(p, &["-c", "hz.toml", "si"]));
    for i in 0..5 {
        let (dr, dh) = (r["methods"][i]["delta"].as_f64().unwrap(), h["methods"][i]["delta"].as_f64().unwrap());
        assert!((dh * tau - dr).abs() <= 1e-12 * dr.abs(), "method {i}: {dh} Hz vs {dr} rad/s");
        let (nr, nh) = (
            r["methods"][i]["delta_normalized"].as_f64().unwrap(),
            h["methods"][i]["delta_normalized"].as_f64().unwrap(),
        );
        assert!((nr - nh).abs() <= 1e-12 * nr.abs(), "method {i}: δ̄ {nh} vs {nr}");
    }
}

#[test]
fn synthetic_spectrum_round_trips_through_fit() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write(p, "n.toml", "units = \"rad\"\n[synth]\nsnr_db = 30.0\n");
    ok(p, &["-c", "n.toml", "--seed", "11", "--out", "syn", "synth"]);
    let doc = json(&ok(p, &["--units", "rad", "fit", "syn/synth.csv", "--bootstrap", "50"]));
    let dn = doc["delta_normalized"].as_f64().unwrap();
    assert!((dn - 0.020).abs() <= 0.001, "{dn}");
    assert_eq!(doc["ci_method"], "bootstrap");
    assert!(doc["ci_low"].as_f64().unwrap() < doc["ci_high"].as_f64().unwrap());
}

#[test]
fn descending_grid_is_resorted() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let text = String::from_utf8(ok(p, &["--units", "rad", "synth"])).unwrap();
    let mut rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    rows.reverse();
    write(p, "desc.csv", &(rows.join("\n") + "\n"));
    write(p, "asc.csv", &text);
    let a = json(&ok(p, &["--units", "rad", "fit", "asc.csv"]));
    let b = json(&ok(p, &["--units", "rad", "fit", "desc.csv"]));
    assert_eq!(a["resorted"], false);
    assert_eq!(b["resorted"], true);
    assert_eq!(a["delta_hat"], b["delta_hat"]);
}
