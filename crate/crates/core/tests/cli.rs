use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn fuzzycell(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuzzycell"))
        .arg("--out-dir")
        .arg(out_dir)
        .args(args)
        .env_remove("FUZZYCELL_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn pgm_pixels(path: &Path) -> (usize, usize, Vec<u8>) {
    let bytes = std::fs::read(path).unwrap();
    let header = String::from_utf8_lossy(&bytes[..16]).into_owned();
    let mut fields = header.split_ascii_whitespace();
    assert_eq!(fields.next(), Some("P5"));
    let w: usize = fields.next().unwrap().parse().unwrap();
    let h: usize = fields.next().unwrap().parse().unwrap();
    assert_eq!(fields.next(), Some("255"));
    let body = bytes[bytes.len() - w * h..].to_vec();
    (w, h, body)
}

#[test]
fn run_writes_single_vehicle_image() {
    let dir = tempfile::tempdir().unwrap();
    let out = fuzzycell(
        dir.path(),
        &["run", scenario("single_vehicle_a09").to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let file = dir.path().join("single_vehicle_a09.pgm");
    assert_eq!(stdout(&out).lines().count(), 1);
    assert!(stdout(&out).contains("single_vehicle_a09.pgm"));
    let (w, h, px) = pgm_pixels(&file);
    assert_eq!((w, h), (100, 21));
    // row 0: the vehicle sits crisp in cell 0
    assert_eq!(px[0], 0);
    assert!(px[1..w].iter().all(|&p| p == 255));
    // every row has exactly one black pixel and it never moves backwards
    let mut last = 0;
    for row in px.chunks(w) {
        let black: Vec<_> = row
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == 0)
            .map(|(c, _)| c)
            .collect();
        if let [c] = black[..] {
            assert!(c >= last);
            last = c;
        } else {
            assert!(black.is_empty(), "row with several full-membership cells");
        }
    }
}

#[test]
fn golden_single_vehicle_image() {
    let dir = tempfile::tempdir().unwrap();
    let out = fuzzycell(
        dir.path(),
        &["run", scenario("single_vehicle_a09.toml").to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let produced = std::fs::read(dir.path().join("single_vehicle_a09.pgm")).unwrap();
    let golden = std::fs::read(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/single_vehicle_a09.pgm"),
    )
    .unwrap();
    assert!(
        produced == golden,
        "output differs from tests/golden/single_vehicle_a09.pgm"
    );
}

#[test]
fn lower_alpha_widens_the_halo() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["single_vehicle_a09", "single_vehicle_a01"] {
        let out = fuzzycell(dir.path(), &["run", scenario(name).to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let (w, _, sharp) = pgm_pixels(&dir.path().join("single_vehicle_a09.pgm"));
    let (_, _, blurred) = pgm_pixels(&dir.path().join("single_vehicle_a01.pgm"));
    for (t, (a, b)) in sharp.chunks(w).zip(blurred.chunks(w)).enumerate() {
        let grey = |row: &[u8]| row.iter().filter(|&&p| p < 255).count();
        assert!(grey(a) <= grey(b), "row {t}");
        assert!(a.iter().zip(b).all(|(x, y)| y <= x), "row {t}");
    }
}

#[test]
fn compare_writes_both_models() {
    let dir = tempfile::tempdir().unwrap();
    let out = fuzzycell(
        dir.path(),
        &[
            "--steps",
            "30",
            "compare",
            scenario("queue50").to_str().unwrap(),
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 4);
    let fcm = std::fs::read_to_string(dir.path().join("queue50_queue_fcm.csv")).unwrap();
    let nasch = std::fs::read_to_string(dir.path().join("queue50_queue_nasch.csv")).unwrap();
    assert!(fcm.starts_with("step,length,grade\n0,50,1.0\n"));
    assert!(nasch.starts_with("step,length,probability\n0,50,1.0\n"));
    assert!(nasch.lines().last().unwrap().starts_with("30,"));
    assert!(dir.path().join("queue50_spacetime_fcm.pgm").exists());
    assert!(dir.path().join("queue50_spacetime_nasch.pgm").exists());
}

#[test]
fn queue_experiment_uses_configured_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = fuzzycell(
        dir.path(),
        &[
            "--steps",
            "5",
            "queue-experiment",
            scenario("queue50").to_str().unwrap(),
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("queue50_queue.csv")).unwrap();
    assert!(text.starts_with("step,length,grade\n0,50,1.0\n1,0,0.8\n"));
}

#[test]
fn fundamental_diagram_with_density_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = fuzzycell(
        dir.path(),
        &[
            "fundamental-diagram",
            scenario("fundamental").to_str().unwrap(),
            "--densities",
            "0.1,1.0",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let fcm = std::fs::read_to_string(dir.path().join("fundamental_fundamental_fcm.csv")).unwrap();
    let rows: Vec<_> = fcm.lines().collect();
    assert_eq!(rows[0], "density,flow_argmax,cut_low,cut_high");
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2], "1.0,0.0,0.0,0.0");
    let nasch =
        std::fs::read_to_string(dir.path().join("fundamental_fundamental_nasch.csv")).unwrap();
    assert!(nasch.lines().any(|l| l == "1.0,0.0,1.0"));
}

#[test]
fn missing_scenario_exits_one_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = fuzzycell(dir.path(), &["run", "missing.file"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.file"));
}

#[test]
fn invalid_override_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = fuzzycell(
        dir.path(),
        &[
            "--alpha",
            "1.5",
            "run",
            scenario("single_vehicle_a09").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("alpha"), "{}", stderr(&out));

    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(scenario("single_vehicle_a09.toml"))
        .unwrap()
        .replace("[4, 0.2]", "[4, 1.5]");
    std::fs::write(&bad, text).unwrap();
    let out = fuzzycell(dir.path(), &["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("v_max"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &[][..],
        &["launch"][..],
        &["--steps", "many", "run", "x"][..],
        &["run"][..],
    ] {
        let out = fuzzycell(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fuzzycell"))
        .args(["run", scenario("single_vehicle_a01").to_str().unwrap()])
        .env("FUZZYCELL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("single_vehicle_a01.pgm").exists());
}
