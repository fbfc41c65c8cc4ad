use clp_kernel::Engine;
use proptest::prelude::*;

const PROGRAM: &str = "
l_map(L, R) :- ( foreach(X, L), foreach(Y, R) do Y is X * 2 + 1 ).
h_map([], []).
h_map([X|Xs], [Y|Ys]) :- Y is X * 2 + 1, h_map(Xs, Ys).

l_sum(L, S) :- ( foreach(X, L), fromto(0, A0, A1, S) do A1 is A0 + X ).
h_sum([], S, S).
h_sum([X|Xs], A0, S) :- A1 is A0 + X, h_sum(Xs, A1, S).

l_rev(L, R) :- ( foreach(X, L), fromto([], T, [X|T], R) do true ).
h_rev([], R, R).
h_rev([X|Xs], T, R) :- h_rev(Xs, [X|T], R).

l_range(A, B, R) :- ( for(I, A, B), foreach(I, R) do true ).
h_range(A, B, []) :- A > B, !.
h_range(A, B, [A|R]) :- A1 is A + 1, h_range(A1, B, R).

l_step(A, B, S, R) :- ( for(I, A, B, S), foreach(I, R) do true ).
h_step(A, B, S, []) :- ( S > 0 -> A > B ; A < B ), !.
h_step(A, B, S, [A|R]) :- A1 is A + S, h_step(A1, B, S, R).

l_args(T, R) :- ( foreacharg(X, T), foreach(X, R) do true ).
h_args(T, R) :- T =.. [_|R].

l_add(L, K, R) :- ( foreach(X, L), foreach(Y, R), param(K) do Y is X + K ).
h_add([], _, []).
h_add([X|Xs], K, [Y|Ys]) :- Y is X + K, h_add(Xs, K, Ys).

l_nested(N, R) :-
    ( for(I, 1, N), fromto(0, S0, S, R), param(N) do
        ( for(J, I, N), fromto(S0, T0, T, S), param(I) do T is T0 + I * J )
    ).
h_nested(N, R) :- h_outer(1, N, 0, R).
h_outer(I, N, S, S) :- I > N, !.
h_outer(I, N, S0, S) :- h_inner(I, I, N, S0, S1), I1 is I + 1, h_outer(I1, N, S1, S).
h_inner(_, J, N, S, S) :- J > N, !.
h_inner(I, J, N, S0, S) :- S1 is S0 + I * J, J1 is J + 1, h_inner(I, J1, N, S1, S).
";

fn engine() -> Engine {
    let mut e = Engine::new();
    e.consult_str(PROGRAM, "loops.pl").unwrap();
    e
}

fn answer(e: &mut Engine, q: &str) -> String {
    match e.once(q).unwrap() {
        Some(a) => a.get("R").map(|t| t.to_string()).unwrap_or_default(),
        None => "no".into(),
    }
}

fn list(xs: &[i64]) -> String {
    format!("[{}]", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

fn same(e: &mut Engine, looped: &str, hand: &str) -> Result<String, TestCaseError> {
    let a = answer(e, looped);
    let b = answer(e, hand);
    prop_assert_eq!(&a, &b, "{} vs {}", looped, hand);
    prop_assert_ne!(a.as_str(), "no");
    Ok(a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn foreach_matches_recursion(xs in prop::collection::vec(-1000i64..1000, 0..20)) {
        let mut e = engine();
        let l = list(&xs);
        let mapped = same(&mut e, &format!("l_map({}, R).", l), &format!("h_map({}, R).", l))?;
        prop_assert_eq!(mapped, list(&xs.iter().map(|x| x * 2 + 1).collect::<Vec<_>>()));
        same(&mut e, &format!("l_sum({}, R).", l), &format!("h_sum({}, 0, R).", l))?;
        let rev = same(&mut e, &format!("l_rev({}, R).", l), &format!("h_rev({}, [], R).", l))?;
        prop_assert_eq!(rev, list(&xs.iter().rev().copied().collect::<Vec<_>>()));
    }

    #[test]
    fn for_matches_recursion(a in -20i64..20, b in -20i64..20, s in prop_oneof![-5i64..=-1, 1i64..=5]) {
        let mut e = engine();
        let r = same(&mut e, &format!("l_range({}, {}, R).", a, b), &format!("h_range({}, {}, R).", a, b))?;
        prop_assert_eq!(r, list(&(a..=b).collect::<Vec<_>>()));
        same(&mut e, &format!("l_step({}, {}, {}, R).", a, b, s), &format!("h_step({}, {}, {}, R).", a, b, s))?;
    }

    #[test]
    fn foreacharg_and_param_match_recursion(xs in prop::collection::vec(-50i64..50, 1..12), k in -9i64..9) {
        let mut e = engine();
        let t = format!("f({})", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "));
        let r = same(&mut e, &format!("l_args({}, R).", t), &format!("h_args({}, R).", t))?;
        prop_assert_eq!(r, list(&xs));
        let l = list(&xs);
        same(&mut e, &format!("l_add({}, {}, R).", l, k), &format!("h_add({}, {}, R).", l, k))?;
    }

    #[test]
    fn nested_loops_match_recursion(n in 0i64..12) {
        let mut e = engine();
        let r = same(&mut e, &format!("l_nested({}, R).", n), &format!("h_nested({}, R).", n))?;
        let want: i64 = (1..=n).flat_map(|i| (i..=n).map(move |j| i * j)).sum();
        prop_assert_eq!(r, want.to_string());
    }
}

#[test]
fn loops_leave_no_choicepoints() {
    let mut e = engine();
    assert_eq!(e.count_solutions("l_map([1, 2, 3], R).").unwrap(), 1);
    assert_eq!(e.count_solutions("l_range(1, 0, R).").unwrap(), 1);
    assert_eq!(answer(&mut e, "l_args(a, R)."), "[]");
}
