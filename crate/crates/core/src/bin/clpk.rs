use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use clp_kernel::{Answer, Engine, EngineError};

/// Loads programs and runs queries, interactively or in batch.
#[derive(Parser, Debug)]
#[command(name = "clpk", version)]
struct Args {
    /// Program files to load, in order.
    files: Vec<PathBuf>,
    /// Goal to run instead of starting the interactive toplevel.
    #[arg(short = 'g', long = "goal")]
    goal: Option<String>,
    /// Print the number of solutions of the goal.
    #[arg(short = 'c', long = "count", requires = "goal")]
    count: bool,
    /// Print every solution of the goal, not just the first.
    #[arg(short = 'a', long = "all", requires = "goal", conflicts_with = "count")]
    all: bool,
    /// Print answers in canonical syntax.
    #[arg(long)]
    canonical: bool,
}

const OK: u8 = 0;
const FAILED: u8 = 1;
const ERROR: u8 = 2;

fn flush_output(eng: &mut Engine, out: &mut impl Write) {
    let text = eng.take_output();
    if !text.is_empty() {
        let _ = write!(out, "{}", text);
        if !text.ends_with('\n') {
            let _ = writeln!(out);
        }
    }
}

fn print_answer(a: &Answer, out: &mut impl Write) {
    let _ = write!(out, "{}", a);
}

fn report(err: &EngineError) {
    eprintln!("error: {}", err);
}

fn batch(eng: &mut Engine, goal: &str, args: &Args) -> u8 {
    let mut out = io::stdout().lock();
    if args.count {
        let r = eng.count_solutions(goal);
        flush_output(eng, &mut out);
        return match r {
            Ok(n) => {
                let _ = writeln!(out, "{}", n);
                OK
            }
            Err(e) => {
                report(&e);
                ERROR
            }
        };
    }
    let mut sols = match eng.query(goal) {
        Ok(s) => s,
        Err(e) => {
            report(&e);
            return ERROR;
        }
    };
    let mut found = 0;
    loop {
        let next = sols.next();
        flush_output(sols.engine(), &mut out);
        match next {
            None => break,
            Some(Err(e)) => {
                report(&e);
                return ERROR;
            }
            Some(Ok(a)) => {
                if found > 0 {
                    let _ = writeln!(out, ";");
                }
                print_answer(&a, &mut out);
                found += 1;
                if !args.all {
                    break;
                }
            }
        }
    }
    if found == 0 {
        let _ = writeln!(out, "no");
        FAILED
    } else {
        let _ = writeln!(out, "yes");
        OK
    }
}

/// Reads one query: lines up to one ending in a full stop.
fn read_query(input: &mut impl BufRead, prompt: bool) -> Option<String> {
    let mut text = String::new();
    loop {
        if prompt {
            print!("{}", if text.is_empty() { "?- " } else { "   " });
            let _ = io::stdout().flush();
        }
        let mut line = String::new();
        if input.read_line(&mut line).ok()? == 0 {
            return (!text.trim().is_empty()).then_some(text);
        }
        text.push_str(&line);
        let t = text.trim();
        if t.is_empty() {
            text.clear();
            continue;
        }
        if t.ends_with('.') {
            return Some(text);
        }
    }
}

/// Asks whether to look for another answer. Piped input answers with a
/// line holding `;`; anything else is left for the next query.
fn wants_more(input: &mut impl BufRead, out: &mut impl Write, interactive: bool) -> bool {
    if interactive {
        let _ = write!(out, "more? ");
        let _ = out.flush();
        let mut line = String::new();
        let _ = input.read_line(&mut line);
        return line.trim() == ";";
    }
    let next = match input.fill_buf() {
        Ok(buf) => buf.iter().find(|b| !b.is_ascii_whitespace()).copied(),
        Err(_) => None,
    };
    if next != Some(b';') {
        return false;
    }
    let mut line = String::new();
    let _ = input.read_line(&mut line);
    let _ = writeln!(out, ";");
    true
}

fn toplevel(eng: &mut Engine) -> u8 {
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut input = stdin.lock();
    let mut out = io::stdout();
    while let Some(q) = read_query(&mut input, interactive) {
        let q = q.trim();
        if q == "halt." {
            break;
        }
        let mut sols = match eng.query(q) {
            Ok(s) => s,
            Err(e) => {
                report(&e);
                continue;
            }
        };
        loop {
            let next = sols.next();
            flush_output(sols.engine(), &mut out);
            match next {
                None => {
                    let _ = writeln!(out, "no");
                    break;
                }
                Some(Err(e)) => {
                    report(&e);
                    break;
                }
                Some(Ok(a)) => {
                    print_answer(&a, &mut out);
                    if !wants_more(&mut input, &mut out, interactive) {
                        let _ = writeln!(out, "yes");
                        break;
                    }
                }
            }
        }
    }
    OK
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { ERROR } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut eng = Engine::new();
    eng.set_canonical(args.canonical);
    for f in &args.files {
        let r = eng.consult_file(f);
        for w in eng.take_warnings() {
            eprintln!("warning: {}", w);
        }
        flush_output(&mut eng, &mut io::stdout());
        if let Err(e) = r {
            report(&e);
            return ExitCode::from(ERROR);
        }
    }
    let code = match &args.goal {
        Some(g) => batch(&mut eng, g, &args),
        None => toplevel(&mut eng),
    };
    ExitCode::from(code)
}
