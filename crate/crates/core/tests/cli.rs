use std::io::Write;
use std::process::{Command, Output, Stdio};

fn clpk(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_clpk"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn counts_queens_solutions() {
    let o = clpk(&["tests/programs/queens.pl", "-g", "queens_array(8,B), labeling(B)", "-c"], "");
    assert_eq!(stdout(&o), "92\n");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    assert_eq!(clpk(&["-g", "fail"], "").status.code(), Some(1));
    assert_eq!(clpk(&["-g", "true"], "").status.code(), Some(0));
    assert_eq!(clpk(&["missing.pl"], "").status.code(), Some(2));
    assert_eq!(clpk(&["--no-such-flag"], "").status.code(), Some(2));
    assert_eq!(clpk(&["-g", "X is foo + 1"], "").status.code(), Some(2));
    assert_eq!(clpk(&["-g", "p("], "").status.code(), Some(2));
}

#[test]
fn all_answers() {
    let o = clpk(&["-g", "member(X, [1,2])", "-a"], "");
    assert_eq!(stdout(&o), "X = 1\n;\nX = 2\nyes\n");
}

#[test]
fn floundering_query_reports_delayed_goal() {
    let o = clpk(&["-g", "dif(X, Y)"], "");
    let s = stdout(&o);
    assert!(s.contains("Delayed goals:\n\tdif(X, Y)"), "{}", s);
    assert!(s.ends_with("yes\n"));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn canonical_answers() {
    let o = clpk(&["-g", "X = [a+b, 'c d']", "--canonical"], "");
    assert_eq!(stdout(&o), "X = [+(a, b), 'c d']\nyes\n");
}

#[test]
fn toplevel_session() {
    let input = "member(X, [a,b]).\n;\n;\ndim(M, [2,3]).\nX = f(Y,\n  Y).\nfoo(.\nX :: 1..3, write(hi).\nhalt.\nwrite(after).\n";
    let o = clpk(&[], input);
    assert_eq!(
        stdout(&o),
        "X = a\n;\nX = b\n;\nno\nM = []([](_, _, _), [](_, _, _))\nyes\nX = f(Y, Y)\nyes\nhi\nX = _{1..3}\nyes\n"
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("syntax error"));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn toplevel_prints_domains_and_breals() {
    let o = clpk(&[], "X :: 1.0..2.5, Y = 1.9__2.1.\n");
    assert_eq!(stdout(&o), "X = _{1.0..2.5}\nY = 1.9__2.1\nyes\n");
}
