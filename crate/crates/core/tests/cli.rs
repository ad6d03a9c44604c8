use std::path::Path;
use std::process::Command;

fn intermap() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_intermap"));
    c.env("RUST_LOG", "warn");
    c
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn spacing_writes_schema_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let st = intermap()
        .args(["spacing", "--n-qubits", "5", "--alpha", "1/3", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(
        header(&dir.path().join("spacing.csv")),
        "alpha,N,block,s_bin_center,density,ks_sp,ks_poisson,ks_coe,spec_hash,seed,code_version"
    );
    let gp = std::fs::read_to_string(dir.path().join("spacing.gp")).unwrap();
    assert!(gp.contains("'spacing.csv'"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "alpha = \"golden\"\nn_qubits_range = \"4..5\"\nwindow = 4\n").unwrap();
    let out = dir.path().join("out");
    let st = intermap()
        .args(["formfactor", "--window", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(out.join("formfactor.csv")).unwrap();
    assert_eq!(
        header(&out.join("formfactor.csv")),
        "alpha,N,n,re_t,im_t,kappa_re,kappa_im,ff,spec_hash,seed,code_version"
    );
    // two sizes, n = 0..=3 each
    assert_eq!(text.lines().count(), 1 + 2 * 4);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "alpah = \"1/3\"\n").unwrap();
    let out = intermap().args(["spacing", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpah"));
    let st = intermap().args(["ipr", "--variant", "nope"]).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = intermap().args(["spacing", "--n-qubits", "14"]).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn worker_count_does_not_change_output() {
    let run = |workers: &str| {
        let dir = tempfile::tempdir().unwrap();
        let st = intermap()
            .args([
                "isrm_stats",
                "--variant",
                "isrm-nonsym",
                "--n-qubits-range",
                "4..5",
                "--ensemble",
                "6",
                "--seed",
                "11",
            ])
            .args(["--workers", workers, "--out"])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(st.success());
        (
            std::fs::read(dir.path().join("isrm_stats.csv")).unwrap(),
            std::fs::read(dir.path().join("isrm_spacing.csv")).unwrap(),
        )
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn gatelist_emit_and_count() {
    let out = intermap()
        .args(["circuit", "emit", "map", "--n-qubits", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.txt");
    std::fs::write(&path, &out.stdout).unwrap();
    let out = intermap().args(["circuit", "count"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "qubits 4 one_qubit 12 two_qubit 28 total 40"
    );
    std::fs::write(&path, "H 0\nFROB 1\n").unwrap();
    let out = intermap().args(["circuit", "count"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn help_lists_every_key() {
    let out = intermap().args(["spacing", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    for key in [
        "experiment",
        "alpha",
        "n_qubits_range",
        "variant",
        "phase_model",
        "sigma",
        "n_s",
        "ensemble",
        "seed",
        "window",
        "iterate_start",
        "iterate_width",
        "n_windows",
        "late_iterate",
        "counting",
        "shots",
        "out",
        "cache_dir",
        "dense_cap",
        "workers",
    ] {
        assert!(text.contains(key), "{key} missing from help");
    }
}
