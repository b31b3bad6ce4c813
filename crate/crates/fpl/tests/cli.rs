use std::path::Path;
use std::process::Command;

fn fpl(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fpl")).args(args).current_dir(cwd).output().unwrap()
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn unknown_key_fails_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpl(&["synth1d", "learning_rte=0.1"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("learning_rte"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_experiment_and_preset_fail() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!fpl(&["nonsense"], dir.path()).status.success());
    let out = fpl(&["ideal", "preset=paper-nothing"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("paper-nothing"));
}

#[test]
fn missing_dataset_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpl(&["filter", "data_dir=nowhere"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["synth1d", "epochs=60", "record_every=20", "widths=1-16-1", "samples=41"];
    for name in ["a", "b"] {
        let o = format!("--out={name}");
        let mut a = vec![args[0], "--svg", o.as_str()];
        a.extend_from_slice(&args[1..]);
        let out = fpl(&a, dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["spectrum.csv", "loss.csv", "target_spectrum.csv", "delta_f.svg", "manifest.json"] {
        assert_eq!(read(&dir.path().join("a").join(f)), read(&dir.path().join("b").join(f)), "{f}");
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpl(&["theory", "--out", "first", "--seed", "7", "--delta", "0.5", "samples=2000"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = fpl::ExperimentManifest::load(&dir.path().join("first/manifest.json")).unwrap();
    assert_eq!(m.config["seed"], "7");
    assert_eq!(m.config["delta"], "0.5");
    assert_eq!(m.seeds["sampling"], 7);
    assert!(m.outputs.contains(&"theory.csv".to_string()));

    // feed the recorded command back in through a config file
    let body: String = m.config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    std::fs::write(dir.path().join("again.cfg"), body).unwrap();
    let out = fpl(&["theory", "--config", "again.cfg", "--out", "second"], dir.path());
    assert!(out.status.success());
    assert_eq!(read(&dir.path().join("first/theory.csv")), read(&dir.path().join("second/theory.csv")));
    assert!(m.command.starts_with("fpl theory "));
}

#[test]
fn high_ball_radius_row_dominates() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpl(&["theory", "--out", "t", "--delta", "0.25", "samples=20000"], dir.path());
    assert!(out.status.success());
    let csv = String::from_utf8(read(&dir.path().join("t/theory.csv"))).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "0.25");
    assert!(row[2].parse::<f64>().unwrap() >= 0.99, "{csv}");
}

#[test]
fn describe_lists_keys_and_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpl(&["poisson", "--describe"], dir.path());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("learning_rate") && text.contains("paper-poisson"), "{text}");
}
