use std::process::{Command, Output};

use serde_json::Value;

fn catphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catphase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn header(csv: &str, key: &str) -> Option<String> {
    csv.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
}

#[test]
fn vacuum_phase_dist_is_constant() {
    let o = catphase(&[
        "phase-dist",
        "--preset",
        "even_cat",
        "--alpha",
        "0",
        "--beta",
        "0",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 361);
    assert!(rows.iter().all(|r| r[1] == 0.15915494309189535));
    assert_eq!(
        text.lines().filter(|l| !l.starts_with('#')).next(),
        Some("phi_offset,density")
    );
}

#[test]
fn output_is_deterministic() {
    let args = ["figure", "--id", "2d", "--n-phi", "91"];
    assert_eq!(catphase(&args).stdout, catphase(&args).stdout);
    let args = [
        "moments",
        "--preset",
        "yurke_stoler_minus",
        "--s",
        "-0.5",
        "--n",
        "3",
    ];
    assert_eq!(catphase(&args).stdout, catphase(&args).stdout);
}

#[test]
fn header_is_self_describing() {
    let text = stdout(&catphase(&[
        "phase-dist",
        "--preset",
        "odd_cat",
        "--s",
        "0.4",
        "--alpha-arg",
        "0.5",
        "--branch",
        "plus",
    ]));
    assert_eq!(header(&text, "preset").as_deref(), Some("odd_cat"));
    assert_eq!(header(&text, "s").as_deref(), Some("0.4"));
    assert_eq!(header(&text, "branch").as_deref(), Some("plus"));
    assert_eq!(header(&text, "alpha_arg").as_deref(), Some("0.5"));
    assert_eq!(header(&text, "phi_prime").as_deref(), Some("0.5"));
    assert!(header(&text, "eps_tail").is_some());
}

#[test]
fn antinormal_densities_integrate_to_one() {
    for preset in [
        "even_cat",
        "odd_cat",
        "yurke_stoler_plus",
        "yurke_stoler_minus",
    ] {
        for (cmd, flag, val) in [
            ("phase-dist", "--branch", "minus"),
            ("phase-dist", "--branch", "plus"),
            ("one-mode", "--mode", "2"),
        ] {
            let o = catphase(&[cmd, "--preset", preset, "--s", "-1", flag, val]);
            let rows = data_rows(&stdout(&o));
            let integral: f64 = rows
                .windows(2)
                .map(|w| 0.5 * (w[0][1] + w[1][1]) * (w[1][0] - w[0][0]))
                .sum();
            assert!((integral - 1.0).abs() < 1e-3, "{preset} {cmd}: {integral}");
        }
    }
}

#[test]
fn figure_1d_goes_negative() {
    let rows = data_rows(&stdout(&catphase(&["figure", "--id", "1d"])));
    let min = rows
        .iter()
        .filter(|r| r[0] == 0.4)
        .map(|r| r[2])
        .fold(f64::INFINITY, f64::min);
    assert!(min < 0.0);
    assert_eq!(rows.len(), 3 * 361);
}

#[test]
fn surface_panel_flags_the_floor() {
    let text = stdout(&catphase(&[
        "figure",
        "--id",
        "1c",
        "--n-surface",
        "4",
        "--n-phi",
        "9",
    ]));
    assert_eq!(header(&text, "alpha_sq_floor").as_deref(), Some("1e-6"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 36);
    assert_eq!(rows[0][0], 1e-6);
    assert_eq!(rows[35][0], 3.0);
}

#[test]
fn oracle_compare_passes() {
    let o = catphase(&["oracle-compare"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["max_abs_dev_overall"].as_f64().unwrap() < 1e-6);
}

#[test]
fn json_keys_sorted() {
    let text = stdout(&catphase(&["moments"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
    assert!(pos("branch") < pos("n_used") && pos("n_used") < pos("trig"));
}

#[test]
fn uniform_moments() {
    let v: Value = serde_json::from_str(&stdout(&catphase(&[
        "moments", "--alpha", "0", "--beta", "0",
    ])))
    .unwrap();
    assert_eq!(v["trig"]["var_cos"], 0.5);
    assert_eq!(v["trig"]["mean_sin"], 0.0);
    let var = v["phase"]["variance"].as_f64().unwrap();
    assert!((var - std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-15);
}

#[test]
fn coeffs_tables() {
    let rows = data_rows(&stdout(&catphase(&["coeffs", "--branch", "plus"])));
    assert_eq!(rows[0][0], 1.0);
    assert!(rows.iter().all(|r| r[1].abs() < 1.0));
    let text = stdout(&catphase(&[
        "coeffs", "--mode", "1", "--preset", "even_cat",
    ]));
    assert!(text.contains("k,c_even,c_odd,d_odd"));
    assert!(data_rows(&text).iter().all(|r| r[3] == 0.0));
    assert_eq!(
        catphase(&["coeffs", "--mode", "1", "--branch", "plus"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn wigner_slice_grid() {
    let o = catphase(&[
        "wigner-slice",
        "--preset",
        "odd_cat",
        "--nx",
        "5",
        "--ny",
        "3",
        "--x-axis",
        "gamma-re",
        "--y-axis",
        "delta-im",
    ]);
    assert!(o.status.success());
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 15);
    assert_eq!((rows[0][0], rows[0][1]), (-3.0, -3.0));
    let same_axis = catphase(&[
        "wigner-slice",
        "--x-axis",
        "delta-re",
        "--y-axis",
        "delta-re",
    ]);
    assert_eq!(same_axis.status.code(), Some(2));
}

#[test]
fn validate_reports() {
    let v: Value = serde_json::from_str(&stdout(&catphase(&[
        "validate",
        "--preset",
        "yurke_stoler_plus",
        "--s",
        "-1",
    ])))
    .unwrap();
    assert_eq!(v["valid"], true);
    assert!((v["checks"]["quadrature_normalization"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(v["checks"]["minus"]["min_density"].as_f64().unwrap() >= 0.0);
    let v: Value =
        serde_json::from_str(&stdout(&catphase(&["validate", "--mu=1,0", "--nu=0.5,0"]))).unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(v["diagnostics"][0]["kind"], "weight_norm");
}

#[test]
fn errors_are_json_with_status() {
    let cases: [(&[&str], i32, &str); 5] = [
        (&["phase-dist", "--s", "1.5"], 3, "domain"),
        (
            &[
                "phase-dist",
                "--preset",
                "odd_cat",
                "--alpha",
                "0",
                "--beta",
                "0",
            ],
            3,
            "null_state",
        ),
        (
            &["phase-dist", "--alpha", "3", "--beta", "3", "--n-max", "5"],
            4,
            "no_convergence",
        ),
        (&["phase-dist", "--preset", "bogus"], 2, "config"),
        (
            &["phase-dist", "--preset", "even_cat", "--mu=1,0", "--nu=0,0"],
            2,
            "config",
        ),
    ];
    for (args, code, kind) in cases {
        let o = catphase(args);
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        assert!(o.stdout.is_empty());
        let v: Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(v["error"]["kind"], kind, "{args:?}");
    }
}

#[test]
fn config_file_and_out_path() {
    let dir = std::env::temp_dir().join(format!("catphase-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    let out = dir.join("out.json");
    std::fs::write(
        &cfg,
        r#"{"preset": "odd_cat", "s": 0.4, "n_phi": 5, "format": "json"}"#,
    )
    .unwrap();
    let o = catphase(&[
        "phase-dist",
        "--config",
        cfg.to_str().unwrap(),
        "--s",
        "-1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["header"]["preset"], "odd_cat");
    assert_eq!(v["header"]["s"], "-1.0");
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    std::fs::write(&cfg, r#"{"presett": "odd_cat"}"#).unwrap();
    assert_eq!(
        catphase(&["phase-dist", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}
