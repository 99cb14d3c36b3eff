use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use abcsuff_cli::{read_report, validate_spec};

fn abcsuff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abcsuff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_validate_and_roundtrip() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let spec = validate_spec(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = validate_spec(&spec.to_toml()).unwrap();
        assert_eq!(spec, again, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn run_writes_report_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(
        &cfg,
        "kind = \"select_params\"\nmodels = [\"gauss1\"]\npool = \"gaussian5\"\nreplicates = 3\nseed = 5\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let run = abcsuff(&["run", cfg.to_str().unwrap(), "--outdir", out.to_str().unwrap(), "--workers", "2"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_report(&out.join("report.json")).unwrap();
    assert_eq!(report.replicates.len(), 3);
    assert_eq!(report.spec.workers, 2);
    let csv = std::fs::read_to_string(out.join("frequencies.csv")).unwrap();
    assert!(csv.starts_with("statistic,name,count,R"));
    assert_eq!(csv.lines().count(), 6);

    let replay = dir.path().join("replay.toml");
    let seed = abcsuff(&[
        "seed-report",
        out.join("report.json").to_str().unwrap(),
        "--emit-config",
        replay.to_str().unwrap(),
    ]);
    assert!(seed.status.success());
    assert!(String::from_utf8_lossy(&seed.stdout).contains("--seed 5"));
    let out2 = dir.path().join("out2");
    let rerun = abcsuff(&["run", replay.to_str().unwrap(), "--outdir", out2.to_str().unwrap(), "--workers", "1"]);
    assert!(rerun.status.success());
    assert_eq!(
        std::fs::read(out.join("frequencies.csv")).unwrap(),
        std::fs::read(out2.join("frequencies.csv")).unwrap()
    );
}

#[test]
fn invalid_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"select_params\"\nmodels = [\"gauss9\"]\npool = \"gaussian5\"\n").unwrap();
    let out = abcsuff(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("models") && err.contains("line 2"), "{err}");
}

#[test]
fn missing_file_exits_with_two() {
    let out = abcsuff(&["run", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn listings_name_everything() {
    let models = String::from_utf8(abcsuff(&["list-models"]).stdout).unwrap();
    for m in ["gauss1", "coal-island", "rw-biased"] {
        assert!(models.contains(m));
    }
    let pools = String::from_utf8(abcsuff(&["list-pools"]).stdout).unwrap();
    for p in ["gaussian5", "popgen11", "walk5"] {
        assert!(pools.contains(p));
    }
}
