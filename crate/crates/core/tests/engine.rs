use clp_kernel::{Engine, EngineError};

fn first(e: &mut Engine, q: &str) -> String {
    match e.query(q).unwrap().next() {
        Some(Ok(a)) => a.to_string(),
        Some(Err(err)) => format!("error: {}", err),
        None => "no".into(),
    }
}

fn all(e: &mut Engine, q: &str) -> Vec<String> {
    e.query(q).unwrap().map(|a| a.unwrap().to_string()).collect()
}

fn error(e: &mut Engine, q: &str) -> EngineError {
    match e.query(q).unwrap().next() {
        Some(Err(err)) => err,
        other => panic!("expected an error from {}, got {:?}", q, other.map(|r| r.map(|a| a.to_string()))),
    }
}

#[test]
fn unification_and_control() {
    let mut e = Engine::new();
    assert_eq!(first(&mut e, "X = f(Y), Y = 1."), "X = f(1)\nY = 1\n");
    assert_eq!(first(&mut e, "1 = 2."), "no");
    assert_eq!(all(&mut e, "member(X, [a,b,c])."), ["X = a\n", "X = b\n", "X = c\n"]);
    assert_eq!(first(&mut e, "( member(X, [1,2,3]), X > 1 -> Y = X ; Y = none )."), "X = 2\nY = 2\n");
    assert_eq!(first(&mut e, "( fail -> Y = 1 ; Y = 2 )."), "Y = 2\n");
    assert_eq!(first(&mut e, "( fail -> true )."), "no");
    assert_eq!(all(&mut e, "( member(X, [1,2]) *-> true ; X = 0 )."), ["X = 1\n", "X = 2\n"]);
    assert_eq!(first(&mut e, "( fail *-> true ; X = 0 )."), "X = 0\n");
    assert_eq!(first(&mut e, "\\+ member(d, [a,b])."), "");
    assert_eq!(first(&mut e, "not(true)."), "no");
    assert_eq!(all(&mut e, "once(member(X, [a,b]))."), ["X = a\n"]);
    assert_eq!(first(&mut e, "ignore(fail)."), "");
    assert_eq!(first(&mut e, "forall(member(X, [1,2]), X > 0)."), "");
    assert_eq!(first(&mut e, "forall(member(X, [1,-2]), X > 0)."), "no");
    assert_eq!(first(&mut e, "G = member(X, [q]), call(G)."), "G = member(q, [q])\nX = q\n");
    assert_eq!(first(&mut e, "call(=(X), 3)."), "X = 3\n");
    assert_eq!(first(&mut e, "X \\= a."), "no");
    assert_eq!(first(&mut e, "f(X) \\= g(X)."), "");
}

#[test]
fn cut_is_local_to_its_clause_and_to_call() {
    let mut e = Engine::new();
    e.consult_str(
        "a(1). a(2).\n\
         first_a(X) :- a(X), !.\n\
         via_call(X) :- call((a(X), !)).\n\
         both(X, Y) :- a(X), call((a(Y), !)).\n",
        "cut.pl",
    )
    .unwrap();
    assert_eq!(all(&mut e, "first_a(X)."), ["X = 1\n"]);
    assert_eq!(all(&mut e, "via_call(X)."), ["X = 1\n"]);
    assert_eq!(e.count_solutions("both(X, Y).").unwrap(), 2);
}

#[test]
fn arithmetic_and_number_types() {
    let mut e = Engine::new();
    assert_eq!(first(&mut e, "X is 2 + 3 * 4."), "X = 14\n");
    assert_eq!(first(&mut e, "X is 1_3 + 1_6."), "X = 1_2\n");
    assert_eq!(first(&mut e, "X is 7 // 2, Y is 7 mod -2."), "X = 3\nY = -1\n");
    assert_eq!(first(&mut e, "X is 2 ** 100."), "X = 1267650600228229401496703205376\n");
    assert_eq!(first(&mut e, "X = 3, Y = 3.0, X = Y."), "no");
    assert_eq!(first(&mut e, "3 =:= 3.0, 3 =:= 3_1, 3 =:= 3.0__3.0, 3.0 =:= 3_1."), "");
    assert_eq!(first(&mut e, "1.9__2.1 < 3."), "");
    assert!(matches!(error(&mut e, "X is foo + 1."), EngineError::Type(_)));
    assert!(matches!(error(&mut e, "X is Y + 1."), EngineError::Instantiation(_)));
    assert!(matches!(error(&mut e, "X is 1 / 0."), EngineError::Eval(_)));
}

#[test]
fn term_builtins() {
    let mut e = Engine::new();
    assert_eq!(first(&mut e, "functor(f(a, b), N, A)."), "N = f\nA = 2\n");
    assert_eq!(first(&mut e, "functor(T, g, 2)."), "T = g(_, _)\n");
    assert_eq!(first(&mut e, "arg(2, f(a, b), X)."), "X = b\n");
    assert!(matches!(error(&mut e, "arg(3, f(a, b), X)."), EngineError::Range(_)));
    assert_eq!(first(&mut e, "f(a, b) =.. L."), "L = [f, a, b]\n");
    assert_eq!(first(&mut e, "T =.. [g, 1]."), "T = g(1)\n");
    assert_eq!(first(&mut e, "copy_term(f(X, Y, X), C), C = f(A, B, D), A == D, A \\== X, B \\== Y."), "C = f(A, B, A)\nD = A\n");
    assert_eq!(first(&mut e, "compare(O, 1, a)."), "O = <\n");
    assert_eq!(first(&mut e, "sort([c, a, b, a], L)."), "L = [a, b, c]\n");
    assert_eq!(first(&mut e, "msort([c, a, b, a], L)."), "L = [a, a, b, c]\n");
    assert_eq!(first(&mut e, "sort(0, @>=, [3, 1, 2, 3], L)."), "L = [3, 3, 2, 1]\n");
    assert_eq!(first(&mut e, "sort(2, @<, [f(a, 2), f(b, 1), f(c, 2)], L)."), "L = [f(b, 1), f(a, 2)]\n");
    assert_eq!(first(&mut e, "keysort([b-1, a-2, b-0], L)."), "L = [a - 2, b - 1, b - 0]\n");
    assert_eq!(first(&mut e, "atom_length(hello, N)."), "N = 5\n");
    assert_eq!(first(&mut e, "atom_codes(A, [0'h, 0'i])."), "A = hi\n");
    assert_eq!(first(&mut e, "atom_chars(abc, L)."), "L = [a, b, c]\n");
    assert_eq!(e.count_solutions("atom_concat(X, Y, abc).").unwrap(), 4);
    assert_eq!(first(&mut e, "atom_concat(ab, cd, X)."), "X = abcd\n");
    assert_eq!(first(&mut e, "atom_number('-12', N)."), "N = -12\n");
    assert_eq!(first(&mut e, "term_to_atom(f(x, 'a b'), A)."), "A = 'f(x, \\'a b\\')'\n");
    assert_eq!(first(&mut e, "term_to_atom(T, 'g(Y, Y)'), T = g(1, Z)."), "T = g(1, 1)\nZ = 1\n");
    assert_eq!(first(&mut e, "length(L, 2)."), "L = [_, _]\n");
    assert_eq!(first(&mut e, "length([a, b, c], N)."), "N = 3\n");
    assert_eq!(first(&mut e, "reverse([1, 2, 3], L), nth1(2, L, X), last(L, Y), sum_list(L, S)."), "L = [3, 2, 1]\nX = 2\nY = 1\nS = 6\n");
    assert_eq!(first(&mut e, "term_variables(f(X, g(Y), X), Vs), Vs = [A, B], A == X, B == Y."), "Vs = [X, Y]\nA = X\nB = Y\n");
}

#[test]
fn findall_and_between() {
    let mut e = Engine::new();
    assert_eq!(
        first(&mut e, "findall(X-Y, (member(X,[1,2]), member(Y,[a,b])), L)."),
        "L = [1 - a, 1 - b, 2 - a, 2 - b]\n"
    );
    assert_eq!(first(&mut e, "findall(X, fail, L)."), "L = []\n");
    assert_eq!(e.count_solutions("between(1, 10, X).").unwrap(), 10);
}

#[test]
fn output_builtins() {
    let mut e = Engine::new();
    assert_eq!(first(&mut e, "write(f('a b', \"s\", [1])), nl, writeq('a b'), tab(2), print(x)."), "");
    assert_eq!(e.take_output(), "f(a b, s, [1])\n'a b'  x");
    first(&mut e, "writeq(- 1), write(' '), writeq(-(1)), write(' '), writeq(1 - -1), write(' '), writeq(a = \\+ b).");
    assert_eq!(e.take_output(), "- 1 - 1 1 - -1 a = (\\+ b)");
    first(&mut e, "write_canonical([a, 'B'|T]).");
    assert!(e.take_output().starts_with("[a, 'B'|_"));
}

#[test]
fn consult_and_existence() {
    let mut e = Engine::new();
    e.consult_str("app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R).\n", "app.pl").unwrap();
    assert_eq!(e.count_solutions("app(X, Y, [1,2,3]).").unwrap(), 4);
    assert!(matches!(error(&mut e, "nope(1)."), EngineError::Existence(_)));
    let err = e.consult_str("p :- .\nq(1).\nr :- X.\n", "bad.pl").unwrap_err();
    let EngineError::Load(msgs) = err else { panic!() };
    assert_eq!(msgs.len(), 1, "{:?}", msgs);
    assert!(msgs[0].contains("bad.pl:1:6"), "{}", msgs[0]);
    // the good clauses were still loaded
    assert_eq!(e.count_solutions("q(1).").unwrap(), 1);
}

#[test]
fn redefinition_from_another_consult_replaces_and_warns() {
    let mut e = Engine::new();
    e.consult_str("p(1).\np(2).\n", "a.pl").unwrap();
    e.consult_str("p(3).\n", "b.pl").unwrap();
    assert_eq!(all(&mut e, "p(X)."), ["X = 3\n"]);
    assert_eq!(e.take_warnings().len(), 1);
}

#[test]
fn modules_and_qualified_calls() {
    let mut e = Engine::new();
    e.consult_str(":- module(lazy).\n:- export p/1.\np(X) :- log_event(lazy(X)).\nhidden(1).\n", "lazy.pl").unwrap();
    e.consult_str(":- module(eager).\n:- export p/1.\np(X) :- log_event(eager(X)).\n", "eager.pl").unwrap();
    assert_eq!(first(&mut e, "[lazy, eager]:p(1)."), "");
    let ev: Vec<String> = e.take_events().iter().map(|t| t.to_string()).collect();
    assert_eq!(ev, ["lazy(1)", "eager(1)"]);
    assert_eq!(first(&mut e, "[lazy]:p(2)."), "");
    assert_eq!(e.take_events().len(), 1);
    assert!(matches!(error(&mut e, "[]:p(1)."), EngineError::Domain(_)));
    assert!(matches!(error(&mut e, "lazy:hidden(X)."), EngineError::Existence(_)));
    assert!(matches!(error(&mut e, "hidden(X)."), EngineError::Existence(_)));
    assert!(matches!(error(&mut e, "p(1)."), EngineError::Existence(_)));
    e.consult_str(":- module(user).\n:- import lazy.\n", "imp.pl").unwrap();
    assert_eq!(first(&mut e, "p(3)."), "");
    assert_eq!(e.take_events()[0].to_string(), "lazy(3)");
}

#[test]
fn structs() {
    let mut e = Engine::new();
    e.consult_str(
        ":- local struct(emp(name, age, salary)).\n\
         salary(E, S) :- E = emp{salary:S}.\n\
         name(N) :- arg(name of emp, emp(bob, 3, 4), N).\n\
         raise(Old, New) :- update_struct(emp, [salary:9], Old, New).\n\
         by_age(L, S) :- sort(age of emp, =<, L, S).\n",
        "emp.pl",
    )
    .unwrap();
    assert_eq!(first(&mut e, "salary(E, 5)."), "E = emp(_, _, 5)\n");
    assert_eq!(first(&mut e, "name(N)."), "N = bob\n");
    assert_eq!(first(&mut e, "raise(emp(a, b, c), N)."), "N = emp(a, b, 9)\n");
    assert_eq!(first(&mut e, "by_age([emp(a, 3, 1), emp(b, 1, 1)], S)."), "S = [emp(b, 1, 1), emp(a, 3, 1)]\n");
    // struct syntax is also read in queries of the declaring module
    assert_eq!(first(&mut e, "X = emp{age:7}."), "X = emp(_, 7, _)\n");
    assert!(matches!(e.query("X = point{y:2}."), Err(EngineError::Expansion { .. })));
    let err = e.consult_str(":- local struct(bad(a, a)).\n", "bad.pl").unwrap_err();
    assert!(err.to_string().contains("bad.pl:1"), "{}", err);
}

#[test]
fn macros_of_all_kinds() {
    let mut e = Engine::new();
    e.consult_str(
        ":- module(eager).\n\
         :- export q/1.\n\
         :- inline(q/1, trans_q/3).\n\
         q(X) :- log_event(runtime(X)).\n\
         trans_q(q(X), log_event(inlined(X)), _M).\n",
        "eager.pl",
    )
    .unwrap();
    e.consult_str(
        ":- import eager.\n\
         :- local macro(foo/1, trans_foo/2, [term]).\n\
         trans_foo(foo(X), bar(X)).\n\
         :- local macro(double/1, trans_double/2, [clause]).\n\
         trans_double(double(X), [X, copy(X)]).\n\
         :- local portray(secret/1, hide/2, term).\n\
         hide(secret(_), secret(hidden)).\n\
         double(item).\n\
         t(X) :- X = foo(1).\n\
         u :- q(1).\n\
         v :- eager:q(2).\n\
         w(X) :- X = secret(pw).\n",
        "user.pl",
    )
    .unwrap();
    assert_eq!(first(&mut e, "t(X)."), "X = bar(1)\n");
    assert_eq!(first(&mut e, "X = foo(2)."), "X = bar(2)\n");
    assert_eq!(e.count_solutions("item.").unwrap(), 1);
    assert_eq!(e.count_solutions("copy(item).").unwrap(), 1);
    first(&mut e, "u.");
    first(&mut e, "v.");
    first(&mut e, "q(3).");
    first(&mut e, "G = q(4), call(G).");
    let ev: Vec<String> = e.take_events().iter().map(|t| t.to_string()).collect();
    assert_eq!(ev, ["inlined(1)", "inlined(2)", "inlined(3)", "runtime(4)"]);
    assert_eq!(first(&mut e, "w(X), write(X), write(' '), write_canonical(X)."), "X = secret(hidden)\n");
    assert_eq!(e.take_output(), "secret(hidden) secret(pw)");
}

#[test]
fn loops() {
    let mut e = Engine::new();
    e.consult_str(
        "sum(L, S) :- ( foreach(X, L), fromto(0, S0, S1, S) do S1 is S0 + X ).\n\
         nums(N, L) :- ( for(I, 1, N), foreach(I, L) do true ).\n\
         three(N) :- ( fromto(0, I, O, 3), fromto(0, C0, C1, N) do O is I + 1, C1 is C0 + 1 ).\n\
         args(T, L) :- ( foreacharg(A, T), foreach(A, L) do true ).\n\
         down(L) :- ( for(I, 5, 1, -2), foreach(I, L) do true ).\n\
         scale(K, L, M) :- ( foreach(X, L), foreach(Y, M), param(K) do Y is K * X ).\n",
        "loops.pl",
    )
    .unwrap();
    assert_eq!(first(&mut e, "sum([1, 2, 3], S)."), "S = 6\n");
    assert_eq!(first(&mut e, "nums(4, L)."), "L = [1, 2, 3, 4]\n");
    assert_eq!(first(&mut e, "nums(0, L)."), "L = []\n");
    assert_eq!(first(&mut e, "three(N)."), "N = 3\n");
    assert_eq!(first(&mut e, "args(f(a, b, c), L)."), "L = [a, b, c]\n");
    assert_eq!(first(&mut e, "down(L)."), "L = [5, 3, 1]\n");
    assert_eq!(first(&mut e, "scale(3, [1, 2], M)."), "M = [3, 6]\n");
    assert_eq!(first(&mut e, "( for(I, 1, 3), foreach(I, L) do true )."), "L = [1, 2, 3]\n");
    assert_eq!(first(&mut e, "N = 2, ( for(I, 1, N), foreach(X, L), param(N) do X is I * N )."), "N = 2\nL = [2, 4]\n");
    assert!(matches!(error(&mut e, "( for(I, 1, a) do true )."), EngineError::Type(_)));
}

#[test]
fn arrays() {
    let mut e = Engine::new();
    assert_eq!(first(&mut e, "dim(M, [2, 3])."), "M = []([](_, _, _), [](_, _, _))\n");
    assert_eq!(first(&mut e, "dim(M, [2, 3]), dim(M, D)."), "M = []([](_, _, _), [](_, _, _))\nD = [2, 3]\n");
    assert!(matches!(error(&mut e, "M = [](a, b, c), X is M[2]."), EngineError::Type(_)));
    assert_eq!(first(&mut e, "M = [](1, 2, 3), X is M[2] * 10."), "M = [](1, 2, 3)\nX = 20\n");
    assert_eq!(first(&mut e, "M = []([](1, 2), [](3, 4)), subscript(M, [2, 1], X)."), "M = []([](1, 2), [](3, 4))\nX = 3\n");
    assert!(matches!(error(&mut e, "M = [](1, 2), X is M[3]."), EngineError::Range(_)));
    e.consult_str("row(M, I, R) :- subscript(M, [I], R).\ntwice(M, I, R) :- R is 2 * M[I].\n", "rows.pl").unwrap();
    assert_eq!(first(&mut e, "row([](a, b), 2, R)."), "R = b\n");
    assert_eq!(first(&mut e, "twice([](5, 6), 2, R)."), "R = 12\n");
    // outside arithmetic a subscript is an ordinary term
    assert_eq!(first(&mut e, "X = M[1, 2], X = subscript(A, I)."), "X = M[1, 2]\nA = M\nI = [1, 2]\n");
}

#[test]
fn destructive_update_is_undone_on_backtracking() {
    let mut e = Engine::new();
    assert_eq!(first(&mut e, "X = f(a), setarg(1, X, b)."), "X = f(b)\n");
    assert_eq!(first(&mut e, "X = f(a), ( setarg(1, X, b), fail ; true )."), "X = f(a)\n");
    assert!(matches!(error(&mut e, "setarg(2, f(a), b)."), EngineError::Range(_)));
    assert_eq!(first(&mut e, "undo(log_event(undone)), fail."), "no");
    assert_eq!(e.take_events().len(), 1);
    // an undo goal survives a cut and still runs when its segment is left
    assert_eq!(first(&mut e, "( once((member(X, [1, 2]), undo(log_event(u(X))))), X > 5 ; true )."), "");
    assert_eq!(e.take_events().iter().map(|t| t.to_string()).collect::<Vec<_>>(), ["u(1)"]);
}

#[test]
fn answers_are_detached_values() {
    let mut e = Engine::new();
    let a = e.once("X = f(Y, Y, Z).").unwrap().unwrap();
    assert_eq!(a.get("X").unwrap().to_string(), "f(_0, _0, _1)");
    assert_eq!(a.to_string(), "X = f(Y, Y, Z)\n");
    assert!(e.succeeds("true.").unwrap());
    assert!(!e.succeeds("fail.").unwrap());
}
