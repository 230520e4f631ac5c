use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn satqos(config: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satqos"))
        .arg(config)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

const EXAMPLE: &str = r#"command = "exponent"
seed = 1
output = "exponent.csv"

[scenario]
rx_antennas = 2

[scenario.satellite]
tx_snr_db = 10.0

[scenario.interferers]
count = 1

[scenario.interferers.link]
tx_snr_db = 0.0

[coding]
rate = 1.0

[exponent]
numeric = false
"#;

#[test]
fn exponent_example_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ex.toml", EXAMPLE);
    let out = satqos(&cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_rows(&dir.path().join("exponent.csv"));
    let theta_col = header.iter().position(|h| h == "theta").unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "closed_form");
    let theta: f64 = rows[0][theta_col].parse().unwrap();
    assert!((theta - 0.37942).abs() < 1e-4, "{theta}");
}

#[test]
fn header_echoes_build_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ex.toml", EXAMPLE);
    assert!(satqos(&cfg, &[]).status.success());
    let text = fs::read_to_string(dir.path().join("exponent.csv")).unwrap();
    assert!(text.starts_with("# satqos "));
    assert!(text.contains("# r_outer_m = 10000.0"));
    assert!(text.contains("# sample_budget = 100000"));
    assert!(!text.contains('\r'));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "aoi.toml",
        "command = \"aoi-sim\"\nseed = 5\n[aoi]\nupdates = 500\n[service]\nepsilon = 0.2\n",
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(satqos(&cfg, &["--output", a.to_str().unwrap()]).status.success());
    assert!(satqos(&cfg, &["--output", b.to_str().unwrap(), "--workers", "3"])
        .status
        .success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let (header, rows) = read_rows(&a);
    assert_eq!(header, ["u", "arrival", "service", "departure", "sojourn", "peak_aoi"]);
    assert_eq!(rows.len(), 500);
}

#[test]
fn seed_flag_changes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "aoi.toml",
        "command = \"aoi-sim\"\nseed = 5\n[aoi]\nupdates = 50\n[service]\nepsilon = 0.2\n",
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(satqos(&cfg, &["--output", a.to_str().unwrap()]).status.success());
    assert!(satqos(&cfg, &["--output", b.to_str().unwrap(), "--seed", "6"])
        .status
        .success());
    assert_ne!(read_rows(&a).1, read_rows(&b).1);
}

#[test]
fn unstable_delay_exits_with_stability_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        "command = \"delay-bound\"\nseed = 1\noutput = \"bad.csv\"\n[delay]\nbits_per_block = 80\nepsilon = 0.05\n",
    );
    let out = satqos(&cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[stability]"));
    assert!(!dir.path().join("bad.csv").exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (i, text) in [
        "command = \"error\"\nseed = 1\noutput = \"o.csv\"\n[scenario]\nsnr_db_typo = 3.0\n",
        "command = \"error\"\nseed = 1\noutput = \"o.csv\"\n[scenario.interferers]\nr_inner_m = 9000.0\nr_outer_m = 3000.0\n",
        "command = \"nope\"\nseed = 1\noutput = \"o.csv\"\n",
        "command = \"error\"\nseed = 1\noutput = \"missing/o.csv\"\n",
        "command = \"error\"\nseed = 1\noutput = \"o.csv\"\nscenario_file = \"absent.toml\"\n",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(dir.path(), &format!("c{i}.toml"), text);
        let out = satqos(&cfg, &[]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[config]"));
    }
    assert!(!dir.path().join("o.csv").exists());
}

#[test]
fn unknown_key_reports_nearest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "command = \"error\"\nseed = 1\noutput = \"o.csv\"\n[scenario]\nsnr_db_typo = 3.0\n",
    );
    let err = String::from_utf8_lossy(&satqos(&cfg, &[]).stderr).to_string();
    assert!(
        err.contains("scenario.snr_db_typo") && err.contains("`scenario.snr_db`"),
        "{err}"
    );
}

#[test]
fn scenario_file_is_read_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "sc.toml", "rx_antennas = 2\n[satellite]\ntx_snr_db = 10.0\n[interferers]\ncount = 1\n[interferers.link]\ntx_snr_db = 0.0\n");
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "command = \"exponent\"\nseed = 1\noutput = \"o.csv\"\nscenario_file = \"sc.toml\"\n[coding]\nrate = 1.0\n[exponent]\nnumeric = false\n",
    );
    assert!(satqos(&cfg, &[]).status.success());
    let (_, rows) = read_rows(&dir.path().join("o.csv"));
    let theta: f64 = rows[0][1].parse().unwrap();
    assert!((theta - 0.37942).abs() < 1e-4);

    write_config(dir.path(), "bad.toml", "[satellite]\ntx_snr = 10.0\n");
    let cfg = write_config(
        dir.path(),
        "c2.toml",
        "command = \"exponent\"\nseed = 1\noutput = \"o2.csv\"\nscenario_file = \"bad.toml\"\n",
    );
    let out = satqos(&cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scenario.satellite.tx_snr_db"));
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("taken")).unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "command = \"delay-bound\"\nseed = 1\noutput = \"taken\"\n[delay]\nepsilon = 0.05\n",
    );
    let out = satqos(&cfg, &[]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn delay_and_paoi_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.toml",
        "command = \"delay-bound\"\nseed = 9\noutput = \"d.csv\"\n[delay]\nepsilon = 0.05\nd_th = [1, 4]\n",
    );
    assert!(satqos(&cfg, &[]).status.success());
    let (header, rows) = read_rows(&dir.path().join("d.csv"));
    assert_eq!(
        header,
        ["kind", "theta", "threshold", "kernel", "bound", "stable", "seed"]
    );
    assert_eq!(rows.len(), 2);
    let b1: f64 = rows[0][4].parse().unwrap();
    let b4: f64 = rows[1][4].parse().unwrap();
    assert!(b4 < b1 && b1 <= 1.0);
    assert_eq!(rows[0][6], "9");

    let cfg = write_config(
        dir.path(),
        "p.toml",
        "command = \"paoi-bound\"\nseed = 9\noutput = \"p.csv\"\n[service]\nepsilon = 0.05\n[paoi]\na_th = [1e6, 2e6]\n",
    );
    assert!(satqos(&cfg, &[]).status.success());
    let (_, rows) = read_rows(&dir.path().join("p.csv"));
    assert_eq!(rows[0][0], "aoi");
    let p1: f64 = rows[0][4].parse().unwrap();
    let p2: f64 = rows[1][4].parse().unwrap();
    assert!(p2 < p1);
}
