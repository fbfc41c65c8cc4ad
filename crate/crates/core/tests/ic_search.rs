use clp_kernel::{Engine, EngineError};
use proptest::prelude::*;

const QUEENS: &str = include_str!("programs/queens.pl");

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

/// Brute force over permutations, independent of the engine.
fn queens_oracle(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, row: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if row.len() == n {
            out.push(row.clone());
            return;
        }
        let i = row.len();
        for q in 1..=n {
            let safe = row.iter().enumerate().all(|(j, &p)| p != q && p.abs_diff(q) != i - j);
            if safe {
                row.push(q);
                go(n, row, out);
                row.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut out);
    out
}

#[test]
fn oracle_counts() {
    assert_eq!(queens_oracle(4).len(), 2);
    assert_eq!(queens_oracle(6).len(), 4);
    assert_eq!(queens_oracle(8).len(), 92);
}

fn queens_rows(e: &mut Engine, n: usize, sel: &str) -> Vec<Vec<usize>> {
    let q = format!("queens_array({}, B), B =.. [_|Qs], labeling(Qs, {}).", n, sel);
    e.query(&q)
        .unwrap()
        .map(|a| {
            let qs = a.unwrap().get("Qs").unwrap().to_string();
            qs.trim_matches(|c| c == '[' || c == ']').split(", ").map(|d| d.parse().unwrap()).collect()
        })
        .collect()
}

#[test]
fn queens_matches_oracle() {
    let mut e = Engine::new();
    e.consult_str(QUEENS, "queens.pl").unwrap();
    for n in 1..=7 {
        let expected = queens_oracle(n);
        // input order enumerates in lexicographic order, like the oracle
        assert_eq!(queens_rows(&mut e, n, "input_order"), expected, "n = {}", n);
        let mut ff = queens_rows(&mut e, n, "first_fail");
        ff.sort();
        assert_eq!(ff, expected, "first_fail, n = {}", n);
    }
    let n8 = e.count_solutions("queens_array(8, B), B =.. [_|Qs], labeling(Qs).").unwrap();
    assert_eq!(n8, 92);
}

#[test]
fn labeling_argument_orders_and_errors() {
    let mut e = Engine::new();
    assert_eq!(all(&mut e, "[X, Y] :: 1..2, labeling([X, Y])."), ["X = 1\nY = 1\n", "X = 1\nY = 2\n", "X = 2\nY = 1\n", "X = 2\nY = 2\n"]);
    assert_eq!(e.count_solutions("[X, Y] :: 1..2, labeling(first_fail, [X, Y]).").unwrap(), 4);
    assert_eq!(e.count_solutions("[X, Y] :: 1..2, labeling([X, Y], first_fail).").unwrap(), 4);
    assert_eq!(first(&mut e, "labeling([])."), "");
    assert!(matches!(e.query("X :: 1..2, labeling([X], bogus).").unwrap().next(), Some(Err(EngineError::Domain(_)))));
    assert!(matches!(e.query("labeling(foo(X)).").unwrap().next(), Some(Err(_))));
    // first_fail picks the smallest domain first
    assert_eq!(first(&mut e, "X :: 1..5, Y :: 1..2, labeling([X, Y], first_fail), log_event(X-Y)."), "X = 1\nY = 1\n");
    assert_eq!(
        all(&mut e, "X :: 1..3, Y :: 7..8, labeling([X, Y], first_fail).")[..2],
        ["X = 1\nY = 7\n", "X = 2\nY = 7\n"]
    );
}

#[test]
fn indomain_respects_holes() {
    let mut e = Engine::new();
    assert_eq!(
        all(&mut e, "X :: [1, 3..4, 7], indomain(X)."),
        ["X = 1\n", "X = 3\n", "X = 4\n", "X = 7\n"]
    );
    assert_eq!(all(&mut e, "X :: 1..5, X #\\= 2, X #\\= 4, indomain(X)."), ["X = 1\n", "X = 3\n", "X = 5\n"]);
    assert_eq!(first(&mut e, "indomain(3)."), "");
    assert!(matches!(e.query("X :: 0.0..1.0, indomain(X).").unwrap().next(), Some(Err(_))));
}

#[test]
fn basic_constraints() {
    let mut e = Engine::new();
    let cases = [
        ("X :: 1..10, X #> 3, X #< 6.", "X = _{4..5}\n"),
        ("X :: 1..10, X #>= 3, X #=< 6.", "X = _{3..6}\n"),
        ("[X, Y] :: 0..10, X + Y #= 10, X - Y #= 4.", "X = _{4..10}\nY = _{0..6}\n"),
        ("[X, Y] :: 0..10, X + Y #= 10, X - Y #= 4, labeling([X, Y]).", "X = 7\nY = 3\n"),
        ("[X, Y] :: 0..10, 2 * X #= Y, Y #< 5.", "X = _{0..2}\nY = _{0..4}\n"),
        ("X :: 1..3, X #= 4.", "no"),
        ("X :: 1..5, Y :: 3..8, geq(X, Y).", "X = _{3..5}\nY = _{3..5}\n"),
        ("X :: 0.0..10.0, X $>= 2.5.", "X = _{2.5..10.0}\n"),
        ("X :: 1..4, X $= 2.5.", "no"),
        ("X :: 0..9, alldifferent([X, 1, 2]), X #< 3.", "X = 0\n"),
        ("alldifferent([1, 2, 1]).", "no"),
        ("[A, B, C] :: 1..2, alldifferent([A, B, C]), labeling([A, B, C]).", "no"),
    ];
    for (q, want) in cases {
        let got = first(&mut e, q);
        let got = got.split("Delayed goals").next().unwrap();
        assert_eq!(got, want, "{}", q);
    }
}

#[test]
fn bound_queries() {
    let mut e = Engine::new();
    assert_eq!(
        first(&mut e, "X :: [1..3, 6], get_min(X, L), get_max(X, H), get_domain_size(X, S), get_bounds(X, L2, H2)."),
        "X = _{[1..3, 6]}\nL = 1\nH = 6\nS = 4\nL2 = 1\nH2 = 6\n"
    );
    assert_eq!(first(&mut e, "get_min(5, L), get_max(5, H), get_domain_size(5, S)."), "L = 5\nH = 5\nS = 1\n");
    assert_eq!(first(&mut e, "X :: 1..2, is_solver_var(X)."), "X = _{1..2}\n");
    assert_eq!(first(&mut e, "is_solver_var(X)."), "no");
}

#[derive(Debug, Clone)]
struct Lin {
    coeffs: Vec<i64>,
    op: &'static str,
    rhs: i64,
}

impl Lin {
    fn holds(&self, xs: &[i64]) -> bool {
        let s: i64 = self.coeffs.iter().zip(xs).map(|(c, x)| c * x).sum();
        match self.op {
            "#=" => s == self.rhs,
            "#\\=" => s != self.rhs,
            "#<" => s < self.rhs,
            "#=<" => s <= self.rhs,
            "#>" => s > self.rhs,
            _ => s >= self.rhs,
        }
    }

    fn text(&self, names: &[&str]) -> String {
        let lhs: Vec<String> = self.coeffs.iter().zip(names).map(|(c, n)| format!("({}) * {}", c, n)).collect();
        format!("{} {} {}", lhs.join(" + "), self.op, self.rhs)
    }
}

fn lin(nvars: usize) -> impl Strategy<Value = Lin> {
    (
        prop::collection::vec(-3i64..=3, nvars),
        prop::sample::select(vec!["#=", "#\\=", "#<", "#=<", "#>", "#>="]),
        -6i64..=6,
    )
        .prop_map(|(coeffs, op, rhs)| Lin { coeffs, op, rhs })
}

fn domains(e: &mut Engine, goal: &str) -> Option<Vec<(i64, i64)>> {
    let q = format!("{}, get_bounds(X, XL, XH), get_bounds(Y, YL, YH), get_bounds(Z, ZL, ZH).", goal);
    let a = e.once(&q).unwrap()?;
    let get = |n: &str| -> i64 { a.get(n).unwrap().to_string().parse().unwrap() };
    Some(vec![(get("XL"), get("XH")), (get("YL"), get("YH")), (get("ZL"), get("ZH"))])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// Propagation never removes a solution, and what it leaves is a fixpoint.
    #[test]
    fn propagation_is_sound(cs in prop::collection::vec(lin(3), 1..=3), lo in -3i64..=0, hi in 0i64..=3) {
        let names = ["X", "Y", "Z"];
        let body: Vec<String> = cs.iter().map(|c| c.text(&names)).collect();
        let goal = format!("[X, Y, Z] :: {}..{}, {}", lo, hi, body.join(", "));
        let mut solutions = Vec::new();
        for x in lo..=hi { for y in lo..=hi { for z in lo..=hi {
            if cs.iter().all(|c| c.holds(&[x, y, z])) { solutions.push([x, y, z]); }
        }}}
        let mut e = Engine::new();
        let doms = domains(&mut e, &goal);
        match &doms {
            None => prop_assert!(solutions.is_empty(), "pruned all of {:?}", solutions),
            Some(d) => for s in &solutions {
                for i in 0..3 {
                    prop_assert!(d[i].0 <= s[i] && s[i] <= d[i].1, "{:?} outside {:?}", s, d);
                }
            },
        }
        if let Some(d) = doms {
            // posting everything again changes nothing
            let again = domains(&mut e, &format!("{}, {}", goal, body.join(", "))).unwrap();
            prop_assert_eq!(again, d);
        }
        let found = e.count_solutions(&format!("{}, labeling([X, Y, Z]).", goal)).unwrap();
        prop_assert_eq!(found, solutions.len());
    }
}
