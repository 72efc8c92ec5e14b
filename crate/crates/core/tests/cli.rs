use std::path::PathBuf;

use expgm::cli::{run, DeriveOutput, MonodromyOutput, PeriodsOutput};
use expgm::cycles::CycleBasis;
use expgm::singular::SingularSet;
use expgm::verify::VerificationReport;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.spec"))
        .to_string_lossy()
        .into_owned()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("expgm").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Parses, compares to a second parse of the re-serialized value, and
/// checks the re-serialization is byte-identical.
fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(text: &str) -> T {
    let v: T = serde_json::from_str(text).unwrap();
    let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
    assert_eq!(again, text);
    assert_eq!(serde_json::from_str::<T>(&again).unwrap(), v);
    v
}

fn spec_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    std::io::Write::write_all(&mut f, body.as_bytes()).unwrap();
    f
}

#[test]
fn derive_outputs() {
    let (code, out, _) = cli(&["derive", &fixture("airy")]);
    assert_eq!(code, 0);
    let d: DeriveOutput = round_trip(&out);
    assert_eq!(d.rank, 2);
    assert_eq!(d.connection_display, vec![vec!["0", "-1"], vec!["-t", "0"]]);
    assert_eq!(d.ode_display.as_deref(), Some("y'' - t*y"));
    assert_eq!(d.forms, vec!["du", "u*du"]);

    let (code, out, _) = cli(&["derive", &fixture("linear")]);
    assert_eq!(code, 0);
    let d: DeriveOutput = round_trip(&out);
    assert_eq!(d.rank, 0);
    assert!(d.connection.a.is_empty());
    assert_eq!(d.note.as_deref(), Some("rank zero"));
}

#[test]
fn artifacts_round_trip() {
    let (_, out, _) = cli(&["singular", &fixture("bessel")]);
    let s: SingularSet = round_trip(&out);
    assert_eq!(s.len(), 1);

    let (_, out, _) = cli(&["cycles", &fixture("bessel"), "--t", "1,0.5"]);
    let c: CycleBasis = round_trip(&out);
    assert_eq!(c.len(), 2);

    let (_, out, _) = cli(&["periods", &fixture("airy"), "--t", "0.5,-0.25", "--tol", "1e-10"]);
    let p: PeriodsOutput = round_trip(&out);
    assert_eq!(p.periods.rank(), 2);

    let (code, out, _) = cli(&["verify", &fixture("bessel"), "--t", "1,0"]);
    assert_eq!(code, 0);
    let r: VerificationReport = round_trip(&out);
    assert!(r.passed);

    let (code, out, _) = cli(&["monodromy", &fixture("gaussian"), "--around", "0", "--t0", "1,0"]);
    assert_eq!(code, 0);
    let m: MonodromyOutput = round_trip(&out);
    assert!(m.record.passed);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs: [&[&str]; 4] = [
        &["periods", &fixture("bessel"), "--t", "0.7,0.2"],
        &["verify", &fixture("airy"), "--t", "-1,0.5", "--stokes-count", "5"],
        &["samples", &fixture("airy"), "--from", "0.5", "--to", "1.5", "--steps", "4"],
        &["cycles", &fixture("gaussian"), "--t", "1,1", "--from", "1,0"],
    ];
    for args in runs {
        let first = cli(args);
        assert_eq!(first.0, 0, "{args:?}: {}", first.2);
        assert_eq!(cli(args), first);
    }
}

#[test]
fn samples_csv_layout() {
    let (code, out, _) = cli(&["samples", &fixture("bessel"), "--from", "0.5,0", "--to", "2,0", "--steps", "3"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "t_re,t_im,re_0,im_0,err_0,re_1,im_1,err_1");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 8));
    assert!(lines[1].starts_with("0.5,0,"));

    let (code, out, _) = cli(&["samples", &fixture("linear"), "--from", "1", "--to", "2", "--steps", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("t_re,t_im"));
}

#[test]
fn exit_codes() {
    // 1: argument and spec-file parse errors
    assert_eq!(cli(&["derive"]).0, 1);
    assert_eq!(cli(&["periods", &fixture("airy"), "--t", "one"]).0, 1);
    let bad = spec_file("fiber = affine_line\ng = u^2\ncolour = red\n");
    assert_eq!(cli(&["derive", bad.path().to_str().unwrap()]).0, 1);
    let bad = spec_file("fiber = affine_line\ng = u^2 + 1/t\n");
    assert_eq!(cli(&["derive", bad.path().to_str().unwrap()]).0, 1);
    assert_eq!(cli(&["derive", "/nonexistent/file.spec"]).0, 1);

    // 2: preconditions
    assert_eq!(cli(&["periods", &fixture("gaussian"), "--t", "0,0"]).0, 2);
    assert_eq!(cli(&["verify", &fixture("bessel"), "--t", "0,0"]).0, 2);
    assert_eq!(cli(&["monodromy", &fixture("bessel"), "--around", "3", "--t0", "1,0"]).0, 2);

    // 3: a check fails against an impossible threshold
    let strict = spec_file("fiber = affine_line\ng = u^3/3 - t*u\node_tol = 1e-30\n");
    assert_eq!(cli(&["verify", strict.path().to_str().unwrap(), "--t", "1,0", "--stokes-count", "1"]).0, 3);

    // 4: refinement budget
    let (code, _, err) = cli(&["periods", &fixture("airy"), "--t", "1,0", "--tol", "1e-14", "--max-intervals", "3"]);
    assert_eq!(code, 4, "{err}");

    // help is not an error
    assert_eq!(cli(&["--help"]).0, 0);
}
