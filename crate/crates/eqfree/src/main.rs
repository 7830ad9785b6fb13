use clap::{Parser, Subcommand};
use eqfree::eval::{eval_sentence_with, EvalOptions};
use eqfree::formula::parse;
use eqfree::games;
use eqfree::harness::{run_suite, SuiteConfig};
use eqfree::leibniz;
use eqfree::monadic;
use eqfree::structure::{blow_up, Structure, Vocabulary};
use eqfree::{Error, Result};
use serde_json::json;
use std::collections::BTreeSet;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "eqfree", about = "Workbench for first-order logic without identity over finite structures", version)]
struct Cli {
    /// Machine-readable JSON output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a structure by its largest congruence
    Reduce { structure: String },
    /// Decide weak isomorphism of two structures and print a witness
    Weakiso { left: String, right: String },
    /// Play the n-round comparison game on two structures
    Ef {
        left: String,
        right: String,
        #[arg(long)]
        rounds: u32,
    },
    /// Evaluate a sentence on a structure
    Eval {
        structure: String,
        formula: String,
        #[arg(long, default_value_t = 5)]
        henkin_cap: usize,
    },
    /// Inflate a structure to a larger weakly isomorphic one
    Blowup {
        structure: String,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Interval normal form of a monadic counting sentence
    Normalform {
        formula: String,
        #[arg(long = "Y", value_delimiter = ',', num_args = 0..)]
        y: Vec<u32>,
    },
    /// Whether a counting threshold is expressible from the given ones
    Definable {
        #[arg(long)]
        r: u32,
        #[arg(long = "Y", value_delimiter = ',', num_args = 0..)]
        y: Vec<u32>,
    },
    /// Print a certificate theory for the vocabulary of a structure
    EmitTheory {
        #[arg(value_parser = ["game", "karp", "order-equality"])]
        kind: String,
        structure: String,
    },
    /// Run the property suites
    Check {
        #[arg(long = "suite", default_values_t = [String::from("all")])]
        suites: Vec<String>,
        #[arg(long, default_value_t = 3)]
        max_size: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 5)]
        henkin_cap: usize,
    },
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes")
}

fn load(path: &str) -> Result<Structure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    Structure::from_json_str(&text)
}

fn default_seed(explicit: Option<u64>) -> u64 {
    explicit
        .or_else(|| std::env::var("EQFREE_SEED").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0xEF5EED)
}

fn witness_json(s: &Structure, t: &Structure, c: &leibniz::Correspondence) -> serde_json::Value {
    json!(c
        .pairs
        .iter()
        .map(|&(a, b)| vec![s.elem_name(a).to_string(), t.elem_name(b).to_string()])
        .collect::<Vec<_>>())
}

/// Ok(true) means the checked property holds; Ok(false) maps to exit 1.
fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Reduce { structure } => {
            let s = load(structure)?;
            let (r, proj) = leibniz::reduce(&s);
            if cli.json {
                let classes: Vec<Vec<String>> = r
                    .elems()
                    .map(|k| {
                        s.elems()
                            .filter(|&e| proj.map[e] == k)
                            .map(|e| s.elem_name(e).to_string())
                            .collect()
                    })
                    .collect();
                println!(
                    "{}",
                    pretty(&json!({
                        "structure": serde_json::from_str::<serde_json::Value>(&r.to_json_string()).expect("structure JSON parses"),
                        "classes": classes,
                    }))
                );
            } else {
                println!("{}", r.to_json_string());
            }
            Ok(true)
        }
        Command::Weakiso { left, right } => {
            let s = load(left)?;
            let t = load(right)?;
            let witness = leibniz::weak_iso(&s, &t)?;
            if cli.json {
                let value = match &witness {
                    Some(c) => json!({"weak_iso": true, "witness": witness_json(&s, &t, c)}),
                    None => json!({"weak_iso": false}),
                };
                println!("{}", pretty(&value));
            } else {
                match &witness {
                    Some(c) => {
                        let pairs: Vec<String> = c
                            .pairs
                            .iter()
                            .map(|&(a, b)| format!("{}~{}", s.elem_name(a), t.elem_name(b)))
                            .collect();
                        println!("{}", pairs.join(" "));
                    }
                    None => println!("none"),
                }
            }
            Ok(witness.is_some())
        }
        Command::Ef {
            left,
            right,
            rounds,
        } => {
            let s = load(left)?;
            let t = load(right)?;
            let equivalent = games::ef_equiv(&s, &t, *rounds)?;
            let sentence = if equivalent || *rounds > 2 {
                None
            } else {
                Some(games::distinguishing_sentence(&s, &t, *rounds)?)
            };
            if cli.json {
                println!(
                    "{}",
                    pretty(&json!({
                        "rounds": rounds,
                        "equivalent": equivalent,
                        "distinguishing_sentence": sentence.as_ref().map(|f| f.to_string()),
                    }))
                );
            } else if equivalent {
                println!("equivalent at {rounds} rounds");
            } else {
                match &sentence {
                    Some(f) => println!("distinguishable at {rounds} rounds: {f}"),
                    None => println!("distinguishable at {rounds} rounds"),
                }
            }
            Ok(equivalent)
        }
        Command::Eval {
            structure,
            formula,
            henkin_cap,
        } => {
            let s = load(structure)?;
            let f = parse(formula, s.vocab())?;
            let opts = EvalOptions {
                henkin_cap: *henkin_cap,
            };
            let value = eval_sentence_with(&s, &f, &opts)?;
            if cli.json {
                println!(
                    "{}",
                    pretty(&json!({"formula": f.to_string(), "value": value}))
                );
            } else {
                println!("{value}");
            }
            Ok(value)
        }
        Command::Blowup {
            structure,
            size,
            seed,
        } => {
            let s = load(structure)?;
            let seed = default_seed(*seed);
            let (b, proj) = blow_up(&s, *size, Some(seed))?;
            if cli.json {
                let projection: Vec<[String; 2]> = b
                    .elems()
                    .map(|e| {
                        [
                            b.elem_name(e).to_string(),
                            s.elem_name(proj.map[e]).to_string(),
                        ]
                    })
                    .collect();
                println!(
                    "{}",
                    pretty(&json!({
                        "seed": seed,
                        "structure": serde_json::from_str::<serde_json::Value>(&b.to_json_string()).expect("structure JSON parses"),
                        "projection": projection,
                    }))
                );
            } else {
                println!("{}", b.to_json_string());
            }
            Ok(true)
        }
        Command::Normalform { formula, y } => {
            let vocab = Vocabulary::new().with_relation("P", 1);
            let f = parse(formula, &vocab)?;
            let y: BTreeSet<u32> = y.iter().copied().collect();
            let nf = monadic::normalize(&f, &y)?;
            if cli.json {
                println!(
                    "{}",
                    pretty(&json!({
                        "formula": f.to_string(),
                        "thresholds": y,
                        "normal_form": nf.to_string(),
                    }))
                );
            } else {
                println!("{nf}");
            }
            Ok(true)
        }
        Command::Definable { r, y } => {
            let y: BTreeSet<u32> = y.iter().copied().collect();
            let yes = monadic::definable(*r, &y);
            if cli.json {
                println!(
                    "{}",
                    pretty(&json!({"r": r, "thresholds": y, "definable": yes}))
                );
            } else {
                println!("{}", if yes { "yes" } else { "no" });
            }
            Ok(yes)
        }
        Command::EmitTheory { kind, structure } => {
            let s = load(structure)?;
            let theory = match kind.as_str() {
                "game" => games::emit_game_theory(s.vocab()),
                "karp" => games::emit_karp_theory(s.vocab()),
                "order-equality" => {
                    let mut rho = s.vocab().clone();
                    for (name, arity) in [
                        (games::FIELD_SYMBOL, 1),
                        (games::EQUALITY_RELATION, 2),
                        (games::ORDER_SYMBOL, 2),
                    ] {
                        if !rho.relations().contains_key(name) {
                            rho = rho.with_relation(name, arity);
                        }
                    }
                    if !rho.constants().contains(games::LAST_CONSTANT) {
                        rho = rho.with_constant(games::LAST_CONSTANT);
                    }
                    games::emit_order_equality_axioms(&rho)?
                }
                _ => unreachable!(),
            };
            if cli.json {
                let lines: Vec<String> = theory.iter().map(|f| f.to_string()).collect();
                println!(
                    "{}",
                    pretty(&json!({"kind": kind, "sentences": lines}))
                );
            } else {
                for f in &theory {
                    println!("{f}");
                }
            }
            Ok(true)
        }
        Command::Check {
            suites,
            max_size,
            seed,
            henkin_cap,
        } => {
            let cfg = SuiteConfig {
                max_size: *max_size,
                seed: default_seed(*seed),
                henkin_cap: *henkin_cap,
                suites: suites.clone(),
            };
            let report = run_suite(&cfg)?;
            if cli.json {
                println!("{}", report.to_json());
            } else {
                for s in &report.suites {
                    println!(
                        "{}: {} ({} instances)",
                        s.name,
                        if s.pass { "pass" } else { "FAIL" },
                        s.instances
                    );
                    for f in &s.failures {
                        println!("  {f}");
                    }
                }
            }
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            // bad inputs are usage errors; everything else reports as failure
            match e {
                Error::Io(_)
                | Error::Syntax { .. }
                | Error::UnknownSymbol(_)
                | Error::EqualityForbidden { .. }
                | Error::InvalidStructure(_)
                | Error::UnknownSuite(_)
                | Error::NotASentence(_)
                | Error::NotMonadic(_)
                | Error::NotInFragment(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
