use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/synthetic_minerals.csv")
}

fn reekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reekit")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fit_writes_one_row_per_sample_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = reekit(&["fit", path(&fixture()), "--standard", "chondrite", "--degree", "4", "-o", path(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).contains("imported 30 of 30 rows"));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 31);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn fit_to_stdout_with_exclusions() {
    let o = reekit(&["fit", path(&fixture()), "--exclude", "Ce,Eu", "--degree", "3", "-o", "-"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "sample,lambda0,lambda1,lambda2,rms_misfit,ce_anomaly,eu_anomaly,excluded");
    assert!(lines.next().unwrap().ends_with(",Ce;Eu"));
    assert!(text.lines().any(|l| l.starts_with("SYN-005,") && l.ends_with(",Ce;Eu;Tb")));
}

#[test]
fn exit_codes() {
    let o = reekit(&["fit", path(&fixture()), "--degree", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DegreeOutOfRange"));

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.csv");
    std::fs::write(&junk, "1,2,3\n4,5,6\n").unwrap();
    assert_eq!(reekit(&["fit", path(&junk)]).status.code(), Some(2));
    assert_eq!(reekit(&["fit", path(&dir.path().join("missing.csv"))]).status.code(), Some(2));

    let zeros = dir.path().join("zeros.csv");
    std::fs::write(&zeros, "sample,La,Ce,Pr,Nd,Sm\na,0,0,0,0,0\n").unwrap();
    assert_eq!(reekit(&["fit", path(&zeros)]).status.code(), Some(3));

    let sparse = dir.path().join("sparse.csv");
    std::fs::write(&sparse, "sample,La,Ce,Pr,Nd,Sm\na,1,2,3,4,5\n").unwrap();
    assert_eq!(reekit(&["fit", path(&sparse), "--degree", "6"]).status.code(), Some(3));

    assert_eq!(reekit(&["plot", path(&fixture()), "--kind", "pie"]).status.code(), Some(2));
    let o = reekit(&["plot", path(&fixture()), "--kind", "splom", "--color-by", "colour"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("mineralogy") && err.contains("lithology"), "{err}");

    let bad_prices = dir.path().join("prices.csv");
    std::fs::write(&bad_prices, "element,price\nNd,140\n").unwrap();
    assert_eq!(reekit(&["metrics", path(&fixture()), "--prices", path(&bad_prices)]).status.code(), Some(2));

    assert_eq!(reekit(&["fit"]).status.code(), Some(2));
}

#[test]
fn plot_all_kinds_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["spider", "scatter2d", "scatter3d", "splom", "density_contour", "violin"] {
        let (a, b) = (dir.path().join(format!("{kind}-a.svg")), dir.path().join(format!("{kind}-b.svg")));
        for out in [&a, &b] {
            let o = reekit(&["plot", path(&fixture()), "--kind", kind, "--color-by", "mineralogy", "-o", path(out)]);
            assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let svg = std::fs::read(&a).unwrap();
        assert!(svg.starts_with(b"<svg"), "{kind}");
        assert_eq!(svg, std::fs::read(&b).unwrap(), "{kind}");
    }
}

#[test]
fn spider_has_one_path_per_sample() {
    let o = reekit(&["plot", path(&fixture()), "--kind", "spider", "-o", "-"]);
    assert!(o.status.success());
    let svg = String::from_utf8(o.stdout).unwrap();
    assert_eq!(svg.matches("<path class=\"line\"").count(), 30);
}

#[test]
fn plot_matches_committed_golden() {
    let o = reekit(&["plot", path(&fixture()), "--kind", "splom", "--color-by", "mineralogy", "-o", "-"]);
    assert!(o.status.success());
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/fixture_splom.svg");
    assert!(o.stdout == std::fs::read(golden).unwrap());
}

#[test]
fn metrics_basket_column() {
    let o = reekit(&["metrics", path(&fixture())]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "basket_value_usd_per_t").unwrap();
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').nth(col).unwrap(), "");
    }

    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    let mut table = String::from("element,usd_per_kg_oxide\n");
    for el in ["La", "Ce", "Pr", "Nd", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Y"] {
        table.push_str(&format!("{el},10\n"));
    }
    std::fs::write(&prices, table).unwrap();
    let o = reekit(&["metrics", path(&fixture()), "--prices", path(&prices)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 31);
    for line in text.lines().skip(1) {
        let v: f64 = line.split(',').nth(col).unwrap().parse().unwrap();
        assert!(v > 0.0);
    }
}

#[test]
fn serve_smoke() {
    use std::io::{Read, Write};
    let dir = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_reekit"))
        .args(["serve", "--port", &port.to_string()])
        .env("REEKIT_DATA_DIR", dir.path())
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    let mut response = String::new();
    for _ in 0..100 {
        if let Ok(mut s) = std::net::TcpStream::connect(("127.0.0.1", port)) {
            s.write_all(b"GET /datasets HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
            s.read_to_string(&mut response).unwrap();
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(50));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.ends_with("[]"));
}
