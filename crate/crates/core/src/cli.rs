//! Command-line front end. [`run`] returns the process exit code:
//! 0 on success, 1 for diagnostics about the input, 2 when an internal solver
//! check fails and 64 for usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::costfn::Rational;
use crate::error::SolverError;
use crate::io::{emit, entries, parse_game, print_game, to_csv, to_svg, ResultFile};
use crate::model::{Arena, Owner, Ptg, Severity, Sptg};
use crate::pipeline::nra::{nra_check, KappaBound, NraOptions, NraVerdict};
use crate::pipeline::{reset_acyclic_solve, solve_nra, PtgSolution};
use crate::play::{default_horizon, play_cost, random_fp_strategy, simulate, Configuration, Play};
use crate::sptg::{solve_sptg_with, SolveOptions, ValueResult};
use crate::urgent::{solve_instant_with, InstantOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "sptg", version, about = "Exact solver for one-clock priced timed games")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "csv")]
    pub format: Format,
    /// Write the output to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the value-iteration bound of every instant solve.
    #[arg(long, global = true)]
    pub max_iterations: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value functions (and strategies for simple games) of every location.
    Solve { file: PathBuf },
    /// Values at one clock value of the game where every location is urgent.
    SolveInstant {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Prints the region game.
    Region { file: PathBuf },
    /// Solves a game whose reset cycles cost at least 0 or at most -kappa.
    SolveNra {
        file: PathBuf,
        #[arg(long)]
        kappa: String,
        /// Skip the membership check.
        #[arg(long)]
        assert_nra: bool,
        /// Number of reset-free copies; defaults to the bound derived from kappa.
        #[arg(long)]
        copies: Option<u64>,
    },
    /// Plays optimal strategies of a simple game against random opponents.
    Simulate {
        file: PathBuf,
        /// Start configuration `location:clock`.
        #[arg(long)]
        from: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Validates a game and classifies it.
    Check {
        file: PathBuf,
        #[arg(long)]
        kappa: Option<String>,
    },
}

/// Failure of a subcommand with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn diag(message: impl Into<String>) -> Self {
        Failure { code: EXIT_DIAGNOSTICS, message: message.into() }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = if e.is_assertion() { EXIT_ASSERTION } else { EXIT_DIAGNOSTICS };
        Failure { code, message: e.to_string() }
    }
}

/// Output of a subcommand: the document and whether it reports a problem.
struct Output {
    text: String,
    code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: EXIT_OK }
    }
}

/// Parses `args` (program name first), runs the command and writes its
/// output to `out` (or `--out`) and messages to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &o.text).map_err(|e| format!("{}: {e}", path.display())),
                None => out.write_all(o.text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_DIAGNOSTICS;
            }
            o.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &PathBuf) -> Result<Ptg, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::diag(format!("{}: {e}", path.display())))?;
    parse_game(&text).map_err(|e| {
        let lines: Vec<String> = e.0.iter().map(|x| format!("{}:{x}", path.display())).collect();
        Failure::diag(lines.join("\n"))
    })
}

fn rational(s: &str, what: &str) -> Result<Rational, Failure> {
    s.parse().map_err(|_| Failure { code: EXIT_USAGE, message: format!("{what}: not a rational number: {s}") })
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    let opts = SolveOptions { max_iterations: cli.max_iterations };
    match &cli.command {
        Command::Solve { file } => {
            let g = load(file)?;
            if g.is_sptg() {
                let s = Sptg::new(g.clone()).map_err(SolverError::from)?;
                let r = solve_sptg_with(&s, &opts)?;
                Ok(Output::ok(emit_sptg(&g, &r, cli.format)))
            } else {
                let sol = reset_acyclic_solve(&g, &opts).map_err(|e| match e {
                    SolverError::ResetCycle(_) => Failure::diag(format!("{e}; use solve-nra for games with reset cycles")),
                    other => other.into(),
                })?;
                Ok(Output::ok(emit_ptg(&g, &sol, cli.format, "reset-acyclic", None)))
            }
        }
        Command::SolveInstant { file, at } => {
            let g = load(file)?;
            let nu = rational(at, "--at")?;
            let s = Sptg::new(g.clone()).map_err(SolverError::from)?;
            let a = Arena::from_sptg(&s).all_urgent();
            let x = solve_instant_with(&a, &nu, &InstantOptions { max_iterations: cli.max_iterations, trace: false })?;
            let text = match cli.format {
                Format::Csv => {
                    let mut t = String::from("location,value\n");
                    for (n, v) in a.names.iter().zip(&x.values) {
                        t.push_str(&format!("{n},{v}\n"));
                    }
                    t
                }
                Format::Json => {
                    let values: serde_json::Map<String, serde_json::Value> =
                        a.names.iter().zip(&x.values).map(|(n, v)| (n.clone(), json!(v))).collect();
                    let doc = json!({
                        "format": emit::RESULT_FORMAT,
                        "solver": "instant",
                        "at": x.nu,
                        "values": values,
                        "iterations": x.iterations,
                        "iteration_bound": x.iteration_bound,
                    });
                    serde_json::to_string_pretty(&doc).expect("serializes") + "\n"
                }
                Format::Svg => return Err(Failure { code: EXIT_USAGE, message: "svg output needs value functions; use solve".into() }),
            };
            Ok(Output::ok(text))
        }
        Command::Region { file } => {
            let g = load(file)?;
            let rg = crate::pipeline::region_ptg(&g);
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&rg).expect("serializes") + "\n",
                _ => format!("{}{}", rg.describe(), print_game(&rg.as_ptg())),
            };
            Ok(Output::ok(text))
        }
        Command::SolveNra { file, kappa, assert_nra, copies } => {
            let g = load(file)?;
            let k = rational(kappa, "--kappa")?;
            let o = NraOptions { solve: opts, assert_nra: *assert_nra, early_stop: copies.is_none(), copies: *copies };
            let s = solve_nra(&g, &k, &o)?;
            let details = json!({ "budget": s.budget, "stable_after": s.stable_after, "copies_solved": s.solution.copies, "check": s.report });
            Ok(Output::ok(emit_ptg(&g, &s.solution, cli.format, "nra", Some(details))))
        }
        Command::Simulate { file, from, seed, horizon } => {
            let g = load(file)?;
            let s = Sptg::new(g.clone()).map_err(|e| Failure::diag(format!("simulate needs a simple game: {e}")))?;
            let (loc, clock) = from.split_once(':').ok_or_else(|| Failure { code: EXIT_USAGE, message: "--from expects location:clock".into() })?;
            let l = g.index_of(loc).ok_or_else(|| Failure::diag(format!("unknown location `{loc}`")))?;
            let nu = rational(clock, "--from")?;
            if nu.is_negative() || &nu > s.r() {
                return Err(SolverError::OutOfRange(nu).into());
            }
            let r = solve_sptg_with(&s, &opts)?;
            let h = horizon.unwrap_or_else(|| default_horizon(r.min_strategy.k, g.locations.len()));
            let start = Configuration::new(l, nu.clone());
            let value = r.values[l].evaluate(&nu).map_err(SolverError::from)?;
            let mut min_opt = r.min_strategy.clone();
            let mut max_rand = random_fp_strategy(&s, Owner::Max, *seed);
            let p1 = simulate(&g, start.clone(), &mut min_opt, &mut max_rand, h).map_err(|e| Failure { code: EXIT_ASSERTION, message: e.to_string() })?;
            let mut max_opt = r.max_strategy.clone();
            let mut min_rand = random_fp_strategy(&s, Owner::Min, *seed);
            let p2 = simulate(&g, start, &mut min_rand, &mut max_opt, h).map_err(|e| Failure { code: EXIT_ASSERTION, message: e.to_string() })?;
            let (c1, c2) = (play_cost(&g, &p1), play_cost(&g, &p2));
            let code = if c1 <= value && c2 >= value { EXIT_OK } else { EXIT_ASSERTION };
            let text = match cli.format {
                Format::Json => {
                    let doc = json!({
                        "format": emit::RESULT_FORMAT,
                        "solver": "simulate",
                        "start": { "location": loc, "clock": nu },
                        "value": value,
                        "seed": seed,
                        "optimal_min": { "cost": c1, "play": describe_play(&g, &p1) },
                        "optimal_max": { "cost": c2, "play": describe_play(&g, &p2) },
                    });
                    serde_json::to_string_pretty(&doc).expect("serializes") + "\n"
                }
                _ => {
                    let mut t = format!("value {value}\n");
                    t.push_str(&format!("# optimal Min against random Max (seed {seed}): cost {c1}\n"));
                    t.push_str(&play_lines(&g, &p1));
                    t.push_str(&format!("# random Min (seed {seed}) against optimal Max: cost {c2}\n"));
                    t.push_str(&play_lines(&g, &p2));
                    t
                }
            };
            Ok(Output { text, code })
        }
        Command::Check { file, kappa } => {
            let g = load(file)?;
            check(&g, kappa.as_deref())
        }
    }
}

fn describe_play(g: &Ptg, p: &Play) -> Vec<serde_json::Value> {
    p.steps
        .iter()
        .map(|s| {
            json!({
                "delay": s.delay,
                "transition": s.transition,
                "cost": s.cost,
                "to": g.locations[s.to.location].id,
                "clock": s.to.clock,
            })
        })
        .collect()
}

fn play_lines(g: &Ptg, p: &Play) -> String {
    let mut t = format!("({}, {})", g.locations[p.start.location].id, p.start.clock);
    for s in &p.steps {
        t.push_str(&format!(" --{}/{}--> ({}, {})", s.delay, s.cost, g.locations[s.to.location].id, s.to.clock));
    }
    t.push('\n');
    t
}

fn non_final(g: &Ptg) -> impl Fn(usize) -> bool + '_ {
    move |i| i < g.locations.len() && !g.locations[i].is_final()
}

fn emit_sptg(g: &Ptg, r: &ValueResult, format: Format) -> String {
    let es = entries(&r.names, &r.values, non_final(g));
    match format {
        Format::Csv => to_csv(&es),
        Format::Svg => to_svg(&es),
        Format::Json => {
            let mut doc = ResultFile::new("sptg", Rational::from_int(g.clock_bound), &es);
            doc.strategies = Some(json!({ "max": r.max_strategy, "min": r.min_strategy, "minus_infinity": r.minus_infinity }));
            doc.stats = Some(json!(r.stats));
            doc.details = Some(json!({ "sweep_endpoints": r.sweep_endpoints }));
            doc.to_json()
        }
    }
}

fn emit_ptg(g: &Ptg, s: &PtgSolution, format: Format, solver: &str, details: Option<serde_json::Value>) -> String {
    let es = entries(&s.names, &s.values, non_final(g));
    match format {
        Format::Csv => to_csv(&es),
        Format::Svg => to_svg(&es),
        Format::Json => {
            let mut doc = ResultFile::new(solver, s.clock_bound.clone(), &es);
            let regions: Vec<String> = s.layers.iter().map(|l| l.region.label()).collect();
            doc.stats = Some(json!({ "copies": s.copies, "regions": regions }));
            doc.details = details;
            doc.to_json()
        }
    }
}

fn check(g: &Ptg, kappa: Option<&str>) -> Result<Output, Failure> {
    let mut t = String::new();
    let mut code = EXIT_OK;
    for d in g.validate() {
        if d.severity == Severity::Error {
            code = EXIT_DIAGNOSTICS;
        }
        t.push_str(&format!("{d}\n"));
    }
    let class = if g.is_sptg() {
        "simple"
    } else if !g.has_resets() {
        "reset-free"
    } else {
        "with resets"
    };
    t.push_str(&format!("game: {} locations, {} transitions, {class}\n", g.locations.len(), g.transitions.len()));
    if g.has_resets() {
        let rg = crate::pipeline::region_ptg(g);
        match crate::pipeline::solve::find_reset_cycle(&rg) {
            None => t.push_str("resets: acyclic\n"),
            Some(c) => {
                t.push_str(&format!("resets: cycle {}\n", c.join(" -> ")));
                let k = kappa.map(|k| rational(k, "--kappa")).transpose()?;
                let probe = nra_check(g, None);
                let k = match (k, &probe.kappa_bound) {
                    (Some(k), _) => Some(k),
                    (None, KappaBound::AtMost(b)) => Some(b.clone()),
                    (None, KappaBound::Any) => Some(Rational::one()),
                    (None, KappaBound::None) => None,
                };
                let report = match &k {
                    Some(k) => nra_check(g, Some(k)),
                    None => probe,
                };
                match &report.verdict {
                    NraVerdict::Holds => {
                        t.push_str(&format!("nra: holds for kappa = {}\n", k.expect("checked with a kappa")))
                    }
                    NraVerdict::Violated { cycle } => {
                        code = EXIT_DIAGNOSTICS;
                        let (lo, hi) = cycle.anchored.clone().unwrap_or(cycle.relaxed.clone());
                        let scope = match &k {
                            Some(k) => format!("kappa = {k}"),
                            None => "any kappa".into(),
                        };
                        t.push_str(&format!(
                            "nra: violated for {scope}: cycle {} has prices in [{lo}, {hi}]\n",
                            cycle.path.join(" -> ")
                        ));
                    }
                    NraVerdict::Inconclusive { reason } => t.push_str(&format!("nra: inconclusive ({reason})\n")),
                }
            }
        }
    }
    Ok(Output { text: t, code })
}
