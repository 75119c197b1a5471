//! Command-line front end: run goals under either engine, trace
//! derivations, cross-check the engines, compare goal equivalences, inspect
//! causal structure, and exercise the axiom suites.
//!
//! Exit codes are a stable contract: 0 success/equivalent, 1 no answer or
//! inconclusive, 2 usage or parse error, 3 separated.

use std::process::ExitCode;

use tilog::causality::{causal_refute, linearizations, replay};
use tilog::engine::{
    correspondence_check, sld_derivations, sld_refute, tile_refute, Answer,
    AnswerSet, ResolutionMode,
};
use tilog::gen::{random_goal, random_program, Rng};
use tilog::semantics::{bisim_equiv, closure_equiv, trace_equiv, ClosureRelation};
use tilog::syntax::{parse_goal_checked, parse_program, Goal, Program};
use tilog::theory::law_suite;
use tilog::tiles::exchange_suite;

#[derive(Debug, Clone)]
struct Config {
    engine: Engine,
    mode: ResolutionMode,
    depth_derivation: usize,
    depth_term: usize,
    depth_proof: usize,
    depth_instance: usize,
    cap: usize,
    k: usize,
    rel: String,
    format: Format,
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Engine {
    Sld,
    Tile,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    Text,
    Lines,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            engine: Engine::Both,
            mode: ResolutionMode::Mgu,
            depth_derivation: 8,
            depth_term: 3,
            depth_proof: 6,
            depth_instance: 2,
            cap: 64,
            k: 2,
            rel: "3".to_string(),
            format: Format::Text,
            seed: 42,
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Vec<String>) -> Result<ExitCode, String> {
    let mut positional = Vec::new();
    let mut config = Config::default();
    let mut it = args.into_iter();
    let command = it.next().ok_or_else(usage)?;
    for arg in it {
        if let Some(rest) = arg.strip_prefix("--") {
            let (key, value) =
                rest.split_once('=').ok_or_else(|| format!("flag `--{rest}` needs a value"))?;
            match key {
                "engine" => {
                    config.engine = match value {
                        "sld" => Engine::Sld,
                        "tile" => Engine::Tile,
                        "both" => Engine::Both,
                        _ => return Err(format!("unknown engine `{value}`")),
                    }
                }
                "mode" => {
                    config.mode = match value {
                        "mgu" => ResolutionMode::Mgu,
                        "ground" => ResolutionMode::Ground,
                        "any" => ResolutionMode::AnyInstance,
                        _ => return Err(format!("unknown mode `{value}`")),
                    }
                }
                "depth-derivation" => config.depth_derivation = parse_num(value)?,
                "depth-term" => config.depth_term = parse_num(value)?,
                "depth-proof" => config.depth_proof = parse_num(value)?,
                "depth-instance" => config.depth_instance = parse_num(value)?,
                "cap" => config.cap = parse_num(value)?,
                "k" => config.k = parse_num(value)?,
                "rel" => config.rel = value.to_string(),
                "seed" => config.seed = value.parse().map_err(|_| "bad seed".to_string())?,
                "format" => {
                    config.format = match value {
                        "text" => Format::Text,
                        "lines" => Format::Lines,
                        _ => return Err(format!("unknown format `{value}`")),
                    }
                }
                _ => return Err(format!("unknown flag `--{key}`")),
            }
        } else {
            positional.push(arg);
        }
    }
    for b in [
        config.depth_derivation,
        config.depth_term,
        config.depth_proof,
        config.depth_instance,
        config.cap,
    ] {
        if b == 0 {
            return Err("depth bounds must be positive".to_string());
        }
    }
    match command.as_str() {
        "run" => cmd_run(&positional, &config),
        "repl" => cmd_repl(&positional, &config),
        "trace" => cmd_trace(&positional, &config),
        "compare" => cmd_compare(&positional, &config),
        "equiv" => cmd_equiv(&positional, &config),
        "causality" => cmd_causality(&positional, &config),
        "axioms" => cmd_axioms(&config),
        "help" | "--help" => {
            println!("{}", usage());
            Ok(ExitCode::SUCCESS)
        }
        other => Err(format!("unknown command `{other}`\n{}", usage())),
    }
}

fn usage() -> String {
    "usage: tilog <command> [args] [flags]\n\
     commands:\n\
     \x20 run <program.pl> <goal>         answers from the selected engine\n\
     \x20 repl <program.pl>               read goals from standard input\n\
     \x20 trace <program.pl> <goal>       derivation steps and proof terms\n\
     \x20 compare [<program.pl> [goal]]   cross-check both engines (random corpus without args)\n\
     \x20 equiv <program.pl> <g1> <g2>    goal equivalence (--rel=1|2|3|trace|bisim)\n\
     \x20 causality <program.pl> <goal>   dependency forests, schedules, replays\n\
     \x20 axioms                          law suites on random arrows and tiles\n\
     flags: --engine=sld|tile|both --mode=mgu|ground|any --rel=R --k=N --seed=N\n\
     \x20      --depth-derivation=N --depth-term=N --depth-proof=N --depth-instance=N\n\
     \x20      --cap=N --format=text|lines"
        .to_string()
}

fn parse_num(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("bad number `{s}`"))
}

fn load(path: &str) -> Result<Program, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    parse_program(&text).map_err(|e| format!("{path}: {e}"))
}

fn load_goal(p: &Program, text: &str) -> Result<Goal, String> {
    parse_goal_checked(text, &p.signature).map_err(|e| e.to_string())
}

/// Answers print in goal syntax so the lines format round-trips through the
/// goal parser: `bind(X, t), ...` or `true`.
fn answer_goal_syntax(a: &Answer) -> String {
    let bindings: Vec<String> = a.0.iter().map(|(v, t)| format!("bind({v},{t})")).collect();
    if bindings.is_empty() {
        "true".to_string()
    } else {
        bindings.join(", ")
    }
}

fn print_answers(set: &AnswerSet, label: &str, config: &Config) {
    match config.format {
        Format::Text => {
            for a in &set.answers {
                println!("{a}");
            }
            if set.answers.is_empty() {
                println!("no.");
            }
            if set.truncated {
                println!("(truncated at bound)");
            }
        }
        Format::Lines => {
            for a in &set.answers {
                println!("answer\t{label}\t{}.", answer_goal_syntax(a));
            }
            println!(
                "summary\t{label}\tcount={}\ttruncated={}",
                set.answers.len(),
                set.truncated
            );
        }
    }
}

fn cmd_run(positional: &[String], config: &Config) -> Result<ExitCode, String> {
    let [path, goal_text] = positional else {
        return Err("run needs a program file and a goal".to_string());
    };
    let program = load(path)?;
    let goal = load_goal(&program, goal_text)?;
    let bound = config.depth_derivation;
    let mut any = false;
    match config.engine {
        Engine::Sld => {
            let set = sld_refute(&goal, &program, config.mode, bound, config.depth_instance);
            any |= !set.answers.is_empty();
            print_answers(&set, "sld", config);
        }
        Engine::Tile => {
            let (_, set) = tile_refute(&goal, &program, bound);
            any |= !set.answers.is_empty();
            print_answers(&set, "tile", config);
        }
        Engine::Both => {
            let sld = sld_refute(&goal, &program, config.mode, bound, config.depth_instance);
            let (_, tile) = tile_refute(&goal, &program, bound);
            if sld.answers != tile.answers {
                eprintln!("warning: engines disagree; run `compare` for details");
            }
            any |= !sld.answers.is_empty();
            print_answers(&sld, "both", config);
        }
    }
    Ok(if any { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_repl(positional: &[String], config: &Config) -> Result<ExitCode, String> {
    let [path] = positional else {
        return Err("repl needs a program file".to_string());
    };
    let program = load(path)?;
    let bound = config.depth_derivation;
    let mut line = String::new();
    loop {
        use std::io::{BufRead, Write};
        print!("?- ");
        std::io::stdout().flush().ok();
        line.clear();
        if std::io::stdin().lock().read_line(&mut line).unwrap_or(0) == 0 {
            break;
        }
        let text = line.trim();
        if text.is_empty() || text == "quit" || text == "halt." {
            break;
        }
        let padded = if text.ends_with('.') { text.to_string() } else { format!("{text}.") };
        match load_goal(&program, &padded) {
            Ok(goal) => {
                let set = match config.engine {
                    Engine::Sld => {
                        sld_refute(&goal, &program, config.mode, bound, config.depth_instance)
                    }
                    _ => tile_refute(&goal, &program, bound).1,
                };
                print_answers(&set, "repl", config);
            }
            Err(e) => eprintln!("error: {e}"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_trace(positional: &[String], config: &Config) -> Result<ExitCode, String> {
    let [path, goal_text] = positional else {
        return Err("trace needs a program file and a goal".to_string());
    };
    let program = load(path)?;
    let goal = load_goal(&program, goal_text)?;
    let bound = config.depth_derivation;
    let mut any = false;
    let goal_vars = tilog::syntax::variables_of(&goal);
    if config.engine != Engine::Tile {
        for (i, d) in sld_derivations(&goal, &program, bound).iter().enumerate() {
            any = true;
            println!(
                "derivation\t{i}\tanswer={}",
                tilog::engine::canonical_answer(&d.answer, &goal_vars)
            );
            for (n, s) in d.steps.iter().enumerate() {
                println!(
                    "step\t{n}\tmode=mgu\tclause={}\tunifier={}\tresolvent={}",
                    s.clause, s.unifier, s.resolvent
                );
            }
        }
    }
    if config.engine != Engine::Sld {
        let (refutations, _) = tile_refute(&goal, &program, bound);
        for (i, r) in refutations.iter().enumerate() {
            any = true;
            println!("refutation\t{i}\tanswer={}", r.answer);
            println!("effect\t{i}\t{}", r.tile.effect);
            print!("{}", r.proof.render());
        }
    }
    Ok(if any { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_compare(positional: &[String], config: &Config) -> Result<ExitCode, String> {
    let bound = config.depth_derivation;
    match positional {
        [path, goal_text] => {
            let program = load(path)?;
            let goal = load_goal(&program, goal_text)?;
            let report = correspondence_check(&program, &goal, bound);
            report_compare(&goal, &report);
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        [path] => {
            let program = load(path)?;
            let mut rng = Rng::new(config.seed);
            let mut failures = 0;
            for _ in 0..20 {
                let goal = random_goal(&mut rng, &program);
                let report = correspondence_check(&program, &goal, bound.min(5));
                report_compare(&goal, &report);
                if !report.passed {
                    failures += 1;
                }
            }
            Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        [] => {
            let mut rng = Rng::new(config.seed);
            let mut failures = 0;
            for i in 0..20 {
                let program = random_program(&mut rng, 4);
                let goal = random_goal(&mut rng, &program);
                let report = correspondence_check(&program, &goal, bound.min(5));
                if !report.passed {
                    failures += 1;
                    println!("FAIL\tcase {i}\tgoal {goal}");
                } else {
                    println!(
                        "PASS\tcase {i}\tgoal {goal}\tanswers={}",
                        report.sld.answers.len()
                    );
                }
            }
            Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        _ => Err("compare takes a program file and optionally a goal".to_string()),
    }
}

fn report_compare(goal: &Goal, report: &tilog::engine::CorrespondenceReport) {
    if report.passed {
        println!("PASS\t{goal}\tanswers={}", report.sld.answers.len());
    } else {
        println!("FAIL\t{goal}");
        for a in &report.only_sld {
            println!("only-sld\t{a}");
        }
        for a in &report.only_tile {
            println!("only-tile\t{a}");
        }
    }
}

fn cmd_equiv(positional: &[String], config: &Config) -> Result<ExitCode, String> {
    let [path, g1_text, g2_text] = positional else {
        return Err("equiv needs a program file and two goals".to_string());
    };
    let program = load(path)?;
    let g1 = load_goal(&program, g1_text)?;
    let g2 = load_goal(&program, g2_text)?;
    let report = match config.rel.as_str() {
        "1" => closure_equiv(
            &g1,
            &g2,
            &program,
            ClosureRelation::GroundInstances,
            config.depth_term,
            config.depth_derivation,
        ),
        "2" => closure_equiv(
            &g1,
            &g2,
            &program,
            ClosureRelation::AnyInstance,
            config.depth_instance,
            config.depth_derivation,
        ),
        "3" | "trace" => trace_equiv(&g1, &g2, &program, config.depth_derivation),
        "bisim" => bisim_equiv(&g1, &g2, &program, config.k),
        other => return Err(format!("unknown relation `{other}`")),
    };
    println!("{report}");
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn cmd_causality(positional: &[String], config: &Config) -> Result<ExitCode, String> {
    let [path, goal_text] = positional else {
        return Err("causality needs a program file and a goal".to_string());
    };
    let program = load(path)?;
    let goal = load_goal(&program, goal_text)?;
    let refs = causal_refute(&goal, &program, config.depth_derivation);
    if refs.is_empty() {
        println!("no.");
        return Ok(ExitCode::from(1));
    }
    let mut all_consistent = true;
    for (i, (answer, forest, _)) in refs.iter().enumerate() {
        println!("refutation\t{i}\tanswer={answer}");
        print!("{}", forest.render());
        let (schedules, exhaustive) = linearizations(forest, config.cap);
        println!("schedules\t{i}\tcount={}\texhaustive={exhaustive}", schedules.len());
        for s in &schedules {
            match replay(s, &goal, &program) {
                Ok(replayed) if &replayed == answer => {
                    println!("replay\t{s}\tok");
                }
                Ok(replayed) => {
                    all_consistent = false;
                    println!("replay\t{s}\tMISMATCH {replayed}");
                }
                Err(e) => {
                    all_consistent = false;
                    println!("replay\t{s}\tERROR {e}");
                }
            }
        }
    }
    Ok(if all_consistent { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn cmd_axioms(config: &Config) -> Result<ExitCode, String> {
    let laws = law_suite(config.seed, 500);
    println!("laws\tfailures={laws}\trounds=500");
    let exchange = exchange_suite(config.seed, 100);
    println!("exchange\tfailures={exchange}\trounds=100");
    // the pullback basis of a random program's signature all commutes
    let mut rng = Rng::new(config.seed);
    let program = random_program(&mut rng, 4);
    let sys = tilog::tiles::basic_tiles(&program.signature);
    let bad = sys.tiles.values().filter(|t| !t.commutes()).count();
    println!("basis\tnon-commuting={bad}");
    Ok(if laws == 0 && exchange == 0 && bad == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}
