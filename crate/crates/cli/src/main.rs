//! `cdgl`: check proofs and refinements, inline system-test proofs,
//! simulate systems, and pretty-print source files.
//!
//! Reports go to stdout and diagnostics to stderr. Exit codes: 0 success,
//! 1 rejection or failed simulation, 2 usage error, 3 parse error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cdgl_core::corpus::{evaluate_seeds, Summary};
use cdgl_core::inline::{compile, is_system_test_proof, to_normal_shape};
use cdgl_core::kernel::{check_proof, CheckReport, Verdict as KernelVerdict};
use cdgl_core::par;
use cdgl_core::refine::check_refinement;
use cdgl_core::sim::{self, RandomDemon, Script, SimOptions, State, Verdict};
use cdgl_core::surface::{parse_file, parse_formula, print_file, print_game, Decl, Item, Sequent, SourceFile};
use cdgl_core::syntax::{Formula, Game};

#[derive(Parser)]
#[command(name = "cdgl", version, about = "Refinement proofs for hybrid games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a proof declaration.
    Check {
        file: PathBuf,
        #[arg(long)]
        proof: String,
        /// Accept even when some obligations were assumed rather than decided.
        #[arg(long)]
        allow_assumed: bool,
    },
    /// Check a refinement derivation declaration.
    Refine {
        file: PathBuf,
        #[arg(long)]
        derivation: String,
        #[arg(long)]
        allow_assumed: bool,
    },
    /// Inline a system-test proof into the system it describes.
    Inline {
        file: PathBuf,
        #[arg(long)]
        proof: String,
        /// Emit a source file that also declares the transfer proof.
        #[arg(long)]
        emit_transfer: bool,
        /// Emit a source file that also declares the refinement derivation.
        #[arg(long)]
        emit_refinement: bool,
    },
    /// Run a system against a Demon script, or against random Demons.
    Simulate {
        file: PathBuf,
        /// Name of the game declaration to run.
        #[arg(long)]
        system: String,
        /// Initial state, one `name = value` per line.
        #[arg(long)]
        init: PathBuf,
        /// Demon decisions, one per line.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        script: Option<PathBuf>,
        /// Play this many random Demons instead of a script.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Postcondition checked on the final state.
        #[arg(long)]
        post: String,
        /// Integrate every ODE with RK4.
        #[arg(long)]
        rk4: bool,
        #[arg(long, default_value_t = SimOptions::default().steps)]
        steps: u32,
        /// Upper bound on loop iterations.
        #[arg(long, default_value_t = sim::DEFAULT_CAP)]
        cap: usize,
    },
    /// Generate proofs and push them through check, inline and re-check.
    Corpus {
        #[arg(long, default_value_t = 100)]
        count: u64,
        /// First seed; sample i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a source file in canonical form.
    Fmt {
        file: PathBuf,
        /// Exit 1 instead of printing when the file is not canonical.
        #[arg(long)]
        check: bool,
    },
}

/// A diagnostic and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

const REJECTED: u8 = 1;
const USAGE: u8 = 2;
const PARSE: u8 = 3;

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let color = std::env::var("CDGL_COLOR").is_ok_and(|v| v == "1");
    par::init_pool();
    match par::with_stack(move || run(cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if color {
                eprintln!("\x1b[1;31merror\x1b[0m: {}", f.message);
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Check { file, proof, allow_assumed } => check(&file, &proof, allow_assumed),
        Command::Refine { file, derivation, allow_assumed } => refine(&file, &derivation, allow_assumed),
        Command::Inline { file, proof, emit_transfer, emit_refinement } => {
            inline(&file, &proof, emit_transfer, emit_refinement)
        }
        Command::Simulate { file, system, init, script, random, seed, post, rk4, steps, cap } => {
            let opts = SimOptions { steps, force_rk4: rk4, ..SimOptions::default() };
            let target = Target { file: &file, system: &system, init: &init, post: &post, opts };
            match (script, random) {
                (Some(script), _) => simulate(&target, &script, cap),
                (None, Some(n)) => simulate_random(&target, n, seed, cap),
                (None, None) => Err(Failure::new(USAGE, "one of --script or --random is required")),
            }
        }
        Command::Corpus { count, seed } => corpus(count, seed),
        Command::Fmt { file, check } => fmt(&file, check),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(USAGE, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<SourceFile, Failure> {
    let text = read(path)?;
    parse_file(&text).map_err(|e| Failure::new(PARSE, format!("{}:{e}", path.display())))
}

fn proof_decl<'f>(file: &'f SourceFile, name: &str) -> Result<(&'f Sequent, &'f cdgl_core::proof::Proof), Failure> {
    file.proof(name).ok_or_else(|| Failure::new(USAGE, format!("no proof named `{name}`")))
}

fn verdict(report: &CheckReport, allow_assumed: bool) -> u8 {
    print!("{}", report.render());
    if let KernelVerdict::Rejected { reason, path } = &report.verdict {
        eprintln!("rejected at {path}: {reason}");
    } else if report.n_assumed() > 0 && !allow_assumed {
        eprintln!("{} obligations were assumed; pass --allow-assumed to accept them", report.n_assumed());
    }
    if report.accepted() && (allow_assumed || report.n_assumed() == 0) {
        0
    } else {
        REJECTED
    }
}

fn check(path: &Path, name: &str, allow_assumed: bool) -> Outcome {
    let file = load(path)?;
    let (seq, proof) = proof_decl(&file, name)?;
    Ok(verdict(&check_proof(&seq.ctx, proof, &seq.goal), allow_assumed))
}

fn refine(path: &Path, name: &str, allow_assumed: bool) -> Outcome {
    let file = load(path)?;
    let (seq, d) = file.derivation(name).ok_or_else(|| Failure::new(USAGE, format!("no derivation named `{name}`")))?;
    Ok(verdict(&check_refinement(&seq.ctx, d, &seq.goal), allow_assumed))
}

fn inline(path: &Path, name: &str, emit_transfer: bool, emit_refinement: bool) -> Outcome {
    let file = load(path)?;
    let (seq, proof) = proof_decl(&file, name)?;
    let report = check_proof(&seq.ctx, proof, &seq.goal);
    if !report.accepted() {
        eprint!("{}", report.render());
        return Err(Failure::new(REJECTED, format!("proof `{name}` is rejected")));
    }
    if !is_system_test_proof(&seq.ctx, proof, &seq.goal) {
        return Err(Failure::new(REJECTED, format!("proof `{name}` is not a system-test proof")));
    }
    let compiled = to_normal_shape(&seq.ctx, proof, &seq.goal)
        .and_then(|shape| compile(&shape))
        .map_err(|e| Failure::new(REJECTED, e.to_string()))?;
    if !emit_transfer && !emit_refinement {
        println!("{}", print_game(&compiled.system));
        return Ok(0);
    }
    let (game, post) = match &seq.goal {
        Formula::Box(g, p) => ((**g).clone(), (**p).clone()),
        Formula::Diamond(g, p) => (Game::dual((**g).clone()), (**p).clone()),
        _ => unreachable!("system-test proofs have modal goals"),
    };
    let mut out = SourceFile::default();
    out.decls.push(decl(format!("{name}_system"), Item::Game(compiled.system.clone())));
    if emit_transfer {
        let goal = Formula::boxf(compiled.system.clone(), post);
        let seq = Sequent { ctx: seq.ctx.clone(), goal };
        out.decls.push(decl(format!("{name}_transfer"), Item::Proof(seq, compiled.transfer)));
    }
    if emit_refinement {
        let d = compiled.refinement.map_err(|e| Failure::new(REJECTED, format!("no refinement certificate: {e}")))?;
        let goal = Formula::refine(None, compiled.system, game);
        let seq = Sequent { ctx: seq.ctx.clone(), goal };
        out.decls.push(decl(format!("{name}_refinement"), Item::Derivation(seq, d)));
    }
    print!("{}", print_file(&out));
    Ok(0)
}

fn decl(name: String, item: Item) -> Decl {
    Decl { name, comments: Vec::new(), item }
}

/// What `simulate` runs, shared by the scripted and random modes.
struct Target<'a> {
    file: &'a Path,
    system: &'a str,
    init: &'a Path,
    post: &'a str,
    opts: SimOptions,
}

impl Target<'_> {
    fn load(&self) -> Result<(Game, State, Formula), Failure> {
        let file = load(self.file)?;
        let game = file
            .game(self.system)
            .ok_or_else(|| Failure::new(USAGE, format!("no game named `{}`", self.system)))?
            .clone();
        let init = State::parse(&read(self.init)?)
            .map_err(|e| Failure::new(PARSE, format!("{}: {e}", self.init.display())))?;
        let post = parse_formula(self.post).map_err(|e| Failure::new(PARSE, format!("--post:{e}")))?;
        Ok((game, init, post))
    }
}

fn simulate(target: &Target<'_>, script_path: &Path, cap: usize) -> Outcome {
    let (game, init, post) = target.load()?;
    let mut script = Script::parse(&read(script_path)?)
        .map_err(|e| Failure::new(PARSE, format!("{}: {e}", script_path.display())))?;
    script.cap = cap;
    let trace = sim::run_system(&game, &init, &script, &post, &target.opts)
        .map_err(|e| Failure::new(REJECTED, e.to_string()))?;
    print!("{}", trace.to_tsv());
    println!("VERDICT {}", trace.verdict);
    Ok(if trace.verdict == Verdict::PostconditionHolds { 0 } else { REJECTED })
}

fn simulate_random(target: &Target<'_>, n: usize, seed: u64, cap: usize) -> Outcome {
    let (game, init, post) = target.load()?;
    let scripts: Vec<Script> = (0..n as u64)
        .map(|i| {
            let mut rng = cdgl_core::gen::rng(seed.wrapping_add(i));
            let mut demon = RandomDemon::new(&mut rng);
            sim::run_random(&game, &init, &mut demon, cap, &post, &target.opts).map(|(s, _)| s)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::new(REJECTED, e.to_string()))?;
    let traces = sim::run_batch(&game, &init, &scripts, &post, &target.opts);
    let mut failures = 0;
    for (i, t) in traces.into_iter().enumerate() {
        let t = t.map_err(|e| Failure::new(REJECTED, e.to_string()))?;
        failures += (t.verdict != Verdict::PostconditionHolds) as usize;
        println!("{}\t{}\t{}", seed.wrapping_add(i as u64), scripts[i].decisions.len(), t.verdict);
    }
    println!("HOLDS {}/{n}", n - failures);
    Ok(if failures == 0 { 0 } else { REJECTED })
}

fn corpus(count: u64, seed: u64) -> Outcome {
    let outcomes = evaluate_seeds(seed..seed.saturating_add(count));
    let s = Summary::of(&outcomes);
    println!("generated\t{}", s.generated);
    println!("accepted\t{}", s.accepted);
    println!("system_test\t{}", s.system_test);
    println!("compiled\t{}", s.compiled);
    println!("is_system\t{}", s.is_system);
    println!("transfer\t{}", s.transfer);
    println!("refinement\t{}", s.refinement);
    println!("refinement_unsupported\t{}", s.refinement_unsupported);
    let full = s.system_test == s.compiled
        && s.compiled == s.is_system
        && s.is_system == s.transfer
        && s.transfer == s.refinement;
    Ok(if full { 0 } else { REJECTED })
}

fn fmt(path: &Path, check: bool) -> Outcome {
    let text = read(path)?;
    let file = parse_file(&text).map_err(|e| Failure::new(PARSE, format!("{}:{e}", path.display())))?;
    let out = print_file(&file);
    if check {
        if out == text {
            return Ok(0);
        }
        eprintln!("{} is not in canonical form", path.display());
        return Ok(REJECTED);
    }
    print!("{out}");
    Ok(0)
}
