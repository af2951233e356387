use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn volterra(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volterra"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("VOLTERRA_OUT")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

const SIM: &[&str] = &["simulate", "--k", "2", "--kernel", "powersum", "--alpha", "-1.2", "--M", "4", "--N", "8", "--seed", "7"];

#[test]
fn simulate_is_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    assert_eq!(volterra(a.path(), SIM).status.code(), Some(0));
    assert_eq!(volterra(b.path(), SIM).status.code(), Some(0));
    let mut threaded = SIM.to_vec();
    threaded.extend(["--threads", "3"]);
    assert_eq!(volterra(c.path(), &threaded).status.code(), Some(0));
    let x = std::fs::read(a.path().join("path.csv")).unwrap();
    assert_eq!(x, std::fs::read(b.path().join("path.csv")).unwrap());
    assert_eq!(x, std::fs::read(c.path().join("path.csv")).unwrap());
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("n,X\n"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn simulate_with_innovations_adds_a_column() {
    let d = tempfile::tempdir().unwrap();
    let mut args = SIM.to_vec();
    args.push("--with-eps");
    assert_eq!(volterra(d.path(), &args).status.code(), Some(0));
    let text = std::fs::read_to_string(d.path().join("path.csv")).unwrap();
    assert!(text.starts_with("n,X,eps\n"));
}

#[test]
fn run_manifest_echoes_the_config_and_reruns_identically() {
    let a = tempfile::tempdir().unwrap();
    assert_eq!(volterra(a.path(), SIM).status.code(), Some(0));
    let run = read_json(&a.path().join("run.json"));
    assert_eq!(run["command"], "simulate");
    assert_eq!(run["exit_code"], 0);
    assert_eq!(run["config"]["M"], 4);
    assert_eq!(run["artifacts"][0], "path.csv");
    assert!(run["versions"]["volterra-core"].is_string());
    assert!(run["wall_time_s"].as_f64().unwrap() >= 0.0);

    // the echoed config alone reproduces the path
    let b = tempfile::tempdir().unwrap();
    let cfg = b.path().join("cfg.json");
    let mut echoed = run["config"].clone();
    echoed.as_object_mut().unwrap().remove("out");
    std::fs::write(&cfg, echoed.to_string()).unwrap();
    let out = volterra(b.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(a.path().join("path.csv")).unwrap(),
        std::fs::read(b.path().join("path.csv")).unwrap()
    );
}

#[test]
fn config_file_overrides_flags() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command": "simulate", "N": 5}"#).unwrap();
    let mut args = SIM.to_vec();
    args.extend(["--config", cfg.to_str().unwrap()]);
    assert_eq!(volterra(d.path(), &args).status.code(), Some(0));
    let text = std::fs::read_to_string(d.path().join("path.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn config_for_another_command_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command": "acf"}"#).unwrap();
    let mut args = SIM.to_vec();
    args.extend(["--config", cfg.to_str().unwrap()]);
    assert_eq!(volterra(d.path(), &args).status.code(), Some(1));
    std::fs::write(&cfg, r#"{"no_such_field": 1}"#).unwrap();
    assert_eq!(volterra(d.path(), &args).status.code(), Some(1));
}

#[test]
fn output_directory_defaults_to_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_volterra"))
        .args(["partitions", "--k", "3"])
        .env("VOLTERRA_OUT", d.path())
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    assert_eq!(read_json(&d.path().join("partitions.json"))["count"], 5);
}

#[test]
fn appell_gaussian_matches_golden() {
    let d = tempfile::tempdir().unwrap();
    let out = volterra(d.path(), &["appell", "--moments", "gaussian", "--K", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("A_4(x) = x^4 - 6*x^2 + 3"), "{stdout}");
    assert_eq!(std::fs::read_to_string(d.path().join("appell.csv")).unwrap(), golden("appell_gaussian_k4.csv"));
}

#[test]
fn appell_accepts_an_explicit_moment_list() {
    let d = tempfile::tempdir().unwrap();
    // Rademacher moments 1, 0, 1, 0, 1
    let out = volterra(d.path(), &["appell", "--moments", "1,0,1,0,1", "--K", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let j = read_json(&d.path().join("appell.json"));
    assert_eq!(j["polynomials"][4]["polynomial"], "x^4 - 6*x^2 + 5");
}

#[test]
fn order_five_terms_match_golden() {
    let d = tempfile::tempdir().unwrap();
    let out = volterra(d.path(), &["terms", "--k", "5", "--noise", "gaussian"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(d.path().join("terms.csv")).unwrap(), golden("terms_k5_gaussian.csv"));
    let j = read_json(&d.path().join("terms.json"));
    let counts: Vec<u64> = j["long_memory_multiplicities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["count"].as_u64().unwrap())
        .collect();
    assert_eq!(counts, vec![1, 10, 15]);
    // recount from the exported rows
    let mut per_r = [0; 3];
    for row in j["rows"].as_array().unwrap() {
        if row["regime"] == "LRD" {
            per_r[row["r"].as_u64().unwrap() as usize] += 1;
        }
    }
    assert_eq!(per_r, [1, 10, 15]);
}

#[test]
fn unknown_flag_is_a_usage_error_with_help() {
    let d = tempfile::tempdir().unwrap();
    let out = volterra(d.path(), &["simulate", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("--bogus"));
    assert!(err.contains("Commands:"), "{err}");
}

#[test]
fn help_lists_every_command_and_exits_zero() {
    let d = tempfile::tempdir().unwrap();
    let out = volterra(d.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in [
        "kernel", "partitions", "appell", "terms", "simulate", "mean", "decompose-check", "classify", "acf", "varscale",
        "hermite", "nclt", "clt", "hyper", "verify",
    ] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn missing_parameter_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(volterra(d.path(), &["partitions"]).status.code(), Some(1));
    assert_eq!(volterra(d.path(), &["simulate", "--k", "2", "--alpha", "-1.2"]).status.code(), Some(1));
    assert_eq!(volterra(d.path(), &["terms", "--k", "2", "--noise", "cauchy"]).status.code(), Some(1));
}

#[test]
fn resource_failure_exits_three_with_diagnostic() {
    let d = tempfile::tempdir().unwrap();
    let out = volterra(d.path(), &["mean", "--k", "3", "--alpha", "-1.7", "--M", "1000"]);
    assert_eq!(out.status.code(), Some(3));
    let diag = read_json(&d.path().join("error.json"));
    assert_eq!(diag["error"], "resource");
    assert_eq!(read_json(&d.path().join("run.json"))["exit_code"], 3);
}

#[test]
fn negative_control_manifest_fails_with_diff() {
    let d = tempfile::tempdir().unwrap();
    let mut man: Value = serde_json::from_str(volterra_core::verify::Manifest::builtin_text()).unwrap();
    man["goldens"]["d5"] = serde_json::json!([1, 11, 15]);
    let path = d.path().join("manifest.json");
    std::fs::write(&path, man.to_string()).unwrap();
    let out = volterra(d.path(), &["verify", "--criteria", "2", "--manifest", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let o = read_json(&d.path().join("criterion_02.json"));
    let failing: Vec<&Value> = o["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).collect();
    assert!(!failing.is_empty());
    let shown = serde_json::to_string(&failing).unwrap();
    assert!(shown.contains("10") && shown.contains("11"), "{shown}");
}

#[test]
fn default_manifest_passes_the_symbolic_criteria() {
    let d = tempfile::tempdir().unwrap();
    let out = volterra(d.path(), &["verify", "--criteria", "2,8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = read_json(&d.path().join("verify.json"));
    assert_eq!(v["passed"], 2);
}

#[test]
fn unknown_criterion_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(volterra(d.path(), &["verify", "--criteria", "12"]).status.code(), Some(1));
}

#[test]
fn decompose_check_reports_against_the_manifest() {
    let d = tempfile::tempdir().unwrap();
    let out = volterra(d.path(), &["decompose-check", "--random-table", "--k", "3", "--noise", "exponential"]);
    assert_eq!(out.status.code(), Some(0));
    let r = read_json(&d.path().join("decompose.json"));
    assert_eq!(r["passed"], true);
    for key in ["experiment", "params", "estimates", "cis", "checks", "passed"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    let csv = std::fs::read_to_string(d.path().join("decompose.csv")).unwrap();
    assert!(csv.starts_with("n,X_centred,sum_terms,residual\n"));
}

#[test]
fn tolerance_failure_exits_two() {
    let d = tempfile::tempdir().unwrap();
    let mut man: Value = serde_json::from_str(volterra_core::verify::Manifest::builtin_text()).unwrap();
    man["decomposition"]["max_rel_error"] = serde_json::json!(0.0);
    let path = d.path().join("manifest.json");
    std::fs::write(&path, man.to_string()).unwrap();
    let out = volterra(
        d.path(),
        &["decompose-check", "--random-table", "--k", "3", "--noise", "exponential", "--manifest", path.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kernel_commands_agree_with_closed_forms() {
    let d = tempfile::tempdir().unwrap();
    let out = volterra(d.path(), &["kernel", "htnorm", "--k", "2", "--alpha", "-1.2", "--t", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&d.path().join("htnorm.json"))["norm_squared"]["value"].as_f64().unwrap();
    // beta-function value of the squared norm at k = 2, alpha = -1.2
    assert!((v / 4.44074 - 1.0).abs() < 1e-5, "{v}");

    let out = volterra(d.path(), &["kernel", "validate", "--kernel", "productpower", "--gammas", "-0.6,-0.6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&d.path().join("validate.json"))["report"]["valid"], false);

    let doc = r#"{"kind":"powersum","k":2,"alpha":-1.2}"#;
    let out = volterra(d.path(), &["kernel", "validate", "--kernel", doc]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&d.path().join("validate.json"))["report"]["valid"], true);
}

#[test]
fn classify_reads_exponents() {
    let d = tempfile::tempdir().unwrap();
    volterra(d.path(), &["classify", "--k", "2", "--alpha", "-1.2"]);
    let c = read_json(&d.path().join("classify.json"));
    assert_eq!(c["result"]["memory"]["regime"], "long_memory");
    volterra(d.path(), &["classify", "--kernel", "productpower", "--gammas", "-1.1,-1.1"]);
    let c = read_json(&d.path().join("classify.json"));
    assert_eq!(c["result"]["memory"]["regime"], "short_memory");
}

#[test]
fn schema_kinds_match_the_serializer() {
    let schema: Value = serde_json::from_str(
        &std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/kernel.schema.json")).unwrap(),
    )
    .unwrap();
    let text = schema.to_string();
    use volterra_core::kernel::{to_json, Kernel};
    let kernels = [
        Kernel::power_sum(2, -1.2),
        Kernel::product_power(vec![-0.6, -0.6]),
        Kernel::ratio_form(vec![0.5, 0.5], 2.0).unwrap(),
        Kernel::scale(2.0, Kernel::power_sum(2, -1.2)),
        Kernel::sum(vec![Kernel::power_sum(2, -1.2), Kernel::power_sum(2, -1.2)]).unwrap(),
        Kernel::max(vec![Kernel::power_sum(2, -1.2), Kernel::power_sum(2, -1.2)]).unwrap(),
        Kernel::min(vec![Kernel::power_sum(2, -1.2), Kernel::power_sum(2, -1.2)]).unwrap(),
        Kernel::perturbed(Kernel::power_sum(2, -1.2), 0.5, 0.3).unwrap(),
        Kernel::power_sum(2, -1.2).symmetrized().unwrap(),
    ];
    for g in &kernels {
        let doc: Value = serde_json::from_str(&to_json(g)).unwrap();
        let kind = doc["kind"].as_str().unwrap();
        assert!(text.contains(&format!("\"{kind}\"")), "{kind} missing from the schema");
    }
}

#[test]
fn run_config_schema_fields_are_accepted() {
    let schema: Value = serde_json::from_str(
        &std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/run-config.schema.json"))
            .unwrap(),
    )
    .unwrap();
    for (key, prop) in schema["properties"].as_object().unwrap() {
        let sample = match prop.get("type").and_then(Value::as_str) {
            Some("integer") => serde_json::json!(4),
            Some("number") => serde_json::json!(0.5),
            Some("boolean") => serde_json::json!(true),
            Some("string") => serde_json::json!("x"),
            Some("array") => match prop["items"]["type"].as_str() {
                Some("integer") => serde_json::json!([4]),
                _ => serde_json::json!([0.5]),
            },
            _ => match prop.get("enum") {
                Some(e) => e[0].clone(),
                None => serde_json::json!("powersum"),
            },
        };
        let doc = serde_json::json!({ key: sample });
        let parsed: Result<volterra_cli::RunConfig, _> = serde_json::from_value(doc.clone());
        assert!(parsed.is_ok(), "{doc}: {:?}", parsed.err());
        assert_eq!(serde_json::to_value(parsed.unwrap()).unwrap(), doc);
    }
}
