use clp_kernel::{Engine, EngineError};

fn first(e: &mut Engine, q: &str) -> String {
    match e.query(q).unwrap().next() {
        Some(Ok(a)) => a.to_string(),
        Some(Err(err)) => format!("error: {}", err),
        None => "no".into(),
    }
}

const BOOK: &str = ":- local struct(book(title, author, year, isbn)).\n";

#[test]
fn struct_golden_table() {
    let mut e = Engine::new();
    e.consult_str(BOOK, "book.pl").unwrap();
    let table = [
        ("X = book{}.", "X = book(_, _, _, _)\n"),
        ("X = book{year:1999}.", "X = book(_, _, 1999, _)\n"),
        ("X = book{isbn:I, title:T}.", "X = book(T, _, _, I)\n"),
        ("N is year of book.", "N = 3\n"),
        // field positions are resolved when the clause is read
        ("N = isbn of book, M is N.", "N = 4\nM = 4\n"),
        ("book{author:A} = book(t, a, 1, i).", "A = a\n"),
        ("arg(title of book, book(t, a, 1, i), T).", "T = t\n"),
        ("update_struct(book, [year:2000, title:z], book(a, b, c, d), N).", "N = book(z, b, 2000, d)\n"),
        ("update_struct(book, [], book(a, b, c, d), N).", "N = book(a, b, c, d)\n"),
    ];
    for (q, want) in table {
        assert_eq!(first(&mut e, q), want, "{}", q);
    }
    for q in ["X = book{color:red}.", "X = book{title:a, title:b}.", "N is color of book.", "X = shelf{}."] {
        assert!(matches!(e.query(q), Err(EngineError::Expansion { .. })), "{}", q);
    }
}

#[test]
fn structs_are_visible_only_where_declared() {
    let mut e = Engine::new();
    e.consult_str(":- module(lib).\n:- local struct(p(x, y)).\nmk(P) :- P = p{y:1}.\n:- export mk/1.\n", "lib.pl").unwrap();
    e.consult_str(":- module(user).\n", "user.pl").unwrap();
    assert_eq!(first(&mut e, "lib:mk(P)."), "P = p(_, 1)\n");
    assert!(e.query("X = p{y:1}.").is_err());
}

#[test]
fn subscript_syntax_reads_and_prints() {
    let mut e = Engine::new();
    assert_eq!(first(&mut e, "X = M[3,4], X =.. L."), "X = M[3, 4]\nL = [subscript, M, [3, 4]]\n");
    assert_eq!(first(&mut e, "X = M[I + 1]."), "X = M[I + 1]\n");
    assert_eq!(first(&mut e, "writeq(M[3, 4]), nl, write_canonical(M[3,4])."), "");
    let out = e.take_output();
    let (q, c) = out.split_once('\n').unwrap();
    assert!(q.ends_with("[3, 4]") && c.starts_with("subscript(_") && c.ends_with(", [3, 4])"), "{}", out);
    // only variables take subscripts
    assert!(matches!(e.query("X = f(a)[1]."), Err(EngineError::Syntax(_))));
}

#[test]
fn dim_shapes() {
    let mut e = Engine::new();
    let a = e.once("dim(M, [3, 4]), dim(M, D), functor(M, F, N), arg(1, M, R), functor(R, G, K).").unwrap().unwrap();
    let got: Vec<String> = ["D", "F", "N", "G", "K"].iter().map(|v| a.get(v).unwrap().to_string()).collect();
    assert_eq!(got, ["[3, 4]", "[]", "3", "[]", "4"]);
    assert_eq!(first(&mut e, "dim(M, [3, 4]), M = [](_, R, _), R = [](_, _, _, x), X is 1, subscript(M, [2, 4], V)."),
        "M = []([](_, _, _, _), [](_G11, _G12, _G13, x), [](_, _, _, _))\nR = [](_G11, _G12, _G13, x)\nX = 1\nV = x\n");
    assert_eq!(first(&mut e, "dim(M, [2]), subscript(M, [1, 1], V)."), "error: instantiation error in arithmetic");
    assert!(matches!(e.query("dim(M, [0]).").unwrap().next(), Some(Err(EngineError::Domain(_)))));
    assert!(matches!(e.query("dim(M, [a]).").unwrap().next(), Some(Err(EngineError::Type(_)))));
    assert!(matches!(e.query("dim(M, D).").unwrap().next(), Some(Err(EngineError::Instantiation(_)))));
    // arrays of any rank stay arrays
    assert_eq!(first(&mut e, "dim(M, [2, 1, 3]), dim(M, D)."), "M = []([]([](_, _, _)), []([](_, _, _)))\nD = [2, 1, 3]\n");
}
