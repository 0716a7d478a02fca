use std::io::{BufRead, BufReader};
use std::process::{Command, Stdio};

use qtoken_core::bank::BankClient;
use qtoken_core::scheme::{SchemeParams, SecretString, SeriesId, TokenReport};
use qtoken_core::WireResponse;

fn qtoken() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qtoken"))
}

#[test]
fn bounds_prints_parameters_and_curves() {
    let out = qtoken().args(["bounds", "--k", "16", "--q-max", "1", "--extra-max", "2"]).output().unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("quantity,k,q,r,y_size,value"));
    let rows: Vec<&str> = lines.collect();
    for expected in [
        "n_m,16,,,,15",
        "n_t,16,,,,256",
        "eps_l,16,,,,0.00390625",
        "eps_f,16,,,,0.375",
        "forgery_bound_6,16,15,,65536,0.375",
        "classical_n_m,16,,,,16",
    ] {
        assert!(rows.contains(&expected), "missing {expected}\n{csv}");
    }
    assert_eq!(rows.iter().filter(|r| r.starts_with("all_correct,")).count(), 4);
}

#[test]
fn bounds_rejects_bad_k() {
    let out = qtoken().args(["bounds", "--k", "6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_csv_and_reports_success() {
    let out = qtoken().args(["run", "voting", "--trials", "200", "--seed", "4"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("scenario,metric,claim,trials,estimate,ci_low,ci_high,reference,relation,pass\n"));
    assert!(csv.contains("voting,double-vote-rejection-rate,"));

    let again = qtoken().args(["run", "voting", "--trials", "200", "--seed", "4"]).output().unwrap();
    assert_eq!(again.stdout, csv.as_bytes());
}

#[test]
fn run_honours_out_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let out = qtoken()
        .args(["run", "honest-flow", "--trials", "300", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("honest-flow,acceptance-rate,"));

    let bad = qtoken().args(["run", "tracking-audit", "--k", "12"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let unknown = qtoken().args(["run", "nonsense"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn serve_answers_over_tcp() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bank.log");
    let mut child = qtoken()
        .args(["serve", "--socket", "127.0.0.1:0", "--mint", "demo:8", "--seed", "1", "--log"])
        .arg(&log)
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdout = BufReader::new(child.stdout.take().unwrap());
    let mut addr = None;
    for _ in 0..2 {
        let mut line = String::new();
        stdout.read_line(&mut line).unwrap();
        if let Some(a) = line.trim().strip_prefix("listening on ") {
            addr = Some(a.to_owned());
        }
    }
    let addr = addr.expect("server address");

    // the minted secret is in the log's MINT record
    let text = std::fs::read_to_string(&log).unwrap();
    let fields: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
    assert_eq!(&fields[..3], ["MINT", "demo", "8"]);
    let params = SchemeParams::new(8).unwrap();
    let secret = SecretString::from_hex(8, params.num_indices(), fields[3], SeriesId::new("demo").unwrap()).unwrap();

    let mut client = BankClient::connect(&addr).unwrap();
    let id = SeriesId::new("demo").unwrap();
    let report = TokenReport::new(9, secret.block(8));
    assert_eq!(client.verify(&id, 8, &report).unwrap(), WireResponse::Ok(None));
    assert_eq!(client.request_line(&format!("VERIFY demo 9 {}", report.value_hex(8))).unwrap(), "REJECT double-spend");
    child.kill().unwrap();
    child.wait().unwrap();
}
