use std::path::Path;
use std::process::{Command, Output};

fn piwb(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_piwb"));
    cmd.args(args).env_remove("PIWB_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.arg("--cache").arg(dir);
    }
    cmd.output().expect("piwb runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("piwb-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn check_reports_the_witness_value() {
    let o = piwb(&["check", "[x1,x2][x3,x4][x5,x6]", "A_3"], None);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("proper_central, witness value e14"));
}

#[test]
fn exponent_of_a8_is_certified() {
    let o = piwb(&["exponent", "A_8"], None);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("exp = 3, exp^δ = 3 (certified)"));
}

#[test]
fn ut2_has_no_proper_central_polynomials() {
    let o = piwb(&["codim", "UT_2", "--n", "1..6"], None);
    assert!(o.status.success());
    let out = stdout(&o);
    let recs: Vec<_> = out.lines().filter(|l| l.starts_with("algebra=UT_2 n=")).collect();
    assert_eq!(recs.len(), 6);
    for (i, r) in recs.iter().enumerate() {
        let n = i as i64 + 1;
        let want = (1i64 << (n - 1)) * (n - 2) + 2;
        assert!(r.contains(&format!("c_n={want} ")), "{r}");
        assert!(r.contains("c_n_delta=0 "), "{r}");
    }
}

#[test]
fn cached_reports_are_identical() {
    let dir = scratch("cache");
    let first = piwb(&["codim", "A_3", "--n", "1..4"], Some(&dir));
    let second = piwb(&["codim", "A_3", "--n", "1..4"], Some(&dir));
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert!(std::fs::read_dir(&dir).unwrap().count() >= 4);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn verify_restricted_to_one_algebra_succeeds() {
    let o = piwb(&["verify", "--algebra", "A_3"], None);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("result: all executed checks passed"));
}

#[test]
fn define_describes_a_user_algebra() {
    let dir = scratch("define");
    let file = dir.join("g0.toml");
    std::fs::write(
        &file,
        r#"
name = "G0"
envelope = true
[ambient]
type = "structure_constants"
labels = ["u", "c"]
parity = [0, 1]
products = [["u", "u", "u"], ["u", "c", "c"], ["c", "u", "c"], ["c", "c", "u"]]
[wedderburn]
radical = []
[[wedderburn.blocks]]
kind = "F_plus_cF"
basis = ["u", "c"]
"#,
    )
    .unwrap();
    let o = piwb(&["define", file.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("dim"));
    let e = piwb(&["--define", file.to_str().unwrap(), "exponent", "G0"], None);
    assert!(e.status.success(), "{}", String::from_utf8_lossy(&e.stderr));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn unknown_algebra_is_an_error() {
    let o = piwb(&["codim", "NOPE"], None);
    assert_eq!(o.status.code(), Some(2));
}
