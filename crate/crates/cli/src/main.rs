use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pastssm::formula::{lower_to_crasp, normalize_mod_lcm_with_cap, DEFAULT_MODULUS_CAP};
use pastssm::semantics::{enumerate_language_over, Alphabet, Letter, DEFAULT_WORD_BUDGET};
use pastssm::verify::{aa_star_candidates, aa_star_demo, check_model, monotonicity_experiment};
use pastssm::{compile_over, eval, eval_at, parse, Formula, GatePolicy, NumericMode, Ssm, Trace};

mod config;

/// Compile past-time temporal formulas into state space models and check them.
#[derive(Parser)]
#[command(name = "pastssm", version)]
struct Cli {
    /// Key-value file whose entries act as flags (`max-len = 6`); flags given
    /// on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print it back with its depth and subformulas.
    Parse {
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a formula on a trace.
    Eval {
        #[command(flatten)]
        formula: FormulaArg,
        /// Letters separated by `;`, e.g. `a;{a,b};{}`.
        #[arg(long)]
        trace: String,
        /// 1-based position; defaults to the last one.
        #[arg(long)]
        pos: Option<usize>,
    },
    /// Compile a formula to a model (JSON).
    Compile {
        #[command(flatten)]
        formula: FormulaArg,
        #[command(flatten)]
        target: Target,
        /// Propositions to reserve input dimensions for, e.g. `a,b,c`.
        #[arg(long, value_delimiter = ',')]
        alphabet: Vec<String>,
        /// Write the model here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a model on a trace and print every output.
    Run {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        trace: String,
        #[arg(long, default_value = "exact")]
        mode: NumericMode,
        /// Dump hidden and layer outputs as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print whether a model accepts a trace.
    Accepts {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        trace: String,
        #[arg(long, default_value = "exact")]
        mode: NumericMode,
    },
    /// List the words of a formula's language up to a length.
    Enumerate {
        #[command(flatten)]
        formula: FormulaArg,
        #[command(flatten)]
        words: Words,
    },
    /// Compare a compiled model with the evaluator on every word up to a length.
    Check {
        #[command(flatten)]
        formula: FormulaArg,
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        words: Words,
        #[arg(long)]
        json: bool,
    },
    /// Feed one symbol repeatedly to a diagonal model until its output settles.
    Monotone {
        #[command(flatten)]
        model: ModelArg,
        /// A single letter, e.g. `a` or `{a,b}`.
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value = "fixed:12:4")]
        mode: NumericMode,
        #[arg(long, default_value_t = 50)]
        window: usize,
        #[arg(long)]
        json: bool,
    },
    /// Show that diagonal fixed-precision models miss (aa)* while a mixed one does not.
    DemoAastar {
        #[arg(long, default_value = "fixed:12:4")]
        mode: NumericMode,
        #[arg(long, default_value_t = 50)]
        window: usize,
        #[arg(long, default_value_t = 100)]
        max_len: usize,
        #[arg(long)]
        json: bool,
    },
    /// Rewrite a yesterday-free formula into counting form.
    LowerCrasp {
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Rewrite every MOD atom to the lcm of the moduli.
    NormalizeMod {
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(long, default_value_t = DEFAULT_MODULUS_CAP)]
        cap: u64,
    },
}

#[derive(Args)]
struct FormulaArg {
    /// Formula text, or a file containing it.
    #[arg(long)]
    formula: String,
}

impl FormulaArg {
    fn load(&self) -> Result<Formula, Failure> {
        let text = if Path::new(&self.formula).is_file() {
            fs::read_to_string(&self.formula).map_err(|e| Failure::usage(format!("{}: {e}", self.formula)))?
        } else {
            self.formula.clone()
        };
        parse(text.trim()).map_err(Failure::usage)
    }
}

#[derive(Args)]
struct ModelArg {
    /// Model JSON written by `compile`.
    #[arg(long)]
    model: PathBuf,
}

impl ModelArg {
    fn load(&self) -> Result<Ssm, Failure> {
        let text =
            fs::read_to_string(&self.model).map_err(|e| Failure::usage(format!("{}: {e}", self.model.display())))?;
        let ssm = Ssm::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", self.model.display())))?;
        ssm.validate().map_err(Failure::usage)?;
        Ok(ssm)
    }
}

#[derive(Args)]
struct Target {
    #[arg(long, default_value = "diagonal")]
    policy: GatePolicy,
    #[arg(long, default_value = "exact")]
    mode: NumericMode,
}

#[derive(Args)]
struct Words {
    /// Propositions, e.g. `a,b,c`. Defaults to those of the formula.
    #[arg(long, value_delimiter = ',')]
    alphabet: Vec<String>,
    /// One proposition per letter instead of every subset.
    #[arg(long)]
    singleton: bool,
    #[arg(long, default_value_t = 6)]
    max_len: usize,
    /// Refuse to enumerate more words than this.
    #[arg(long, default_value_t = DEFAULT_WORD_BUDGET)]
    budget: u64,
}

impl Words {
    fn alphabet(&self, f: &Formula) -> Alphabet {
        let props = if self.alphabet.is_empty() {
            f.propositions().into_iter().collect()
        } else {
            self.alphabet.clone()
        };
        if self.singleton {
            Alphabet::Singletons(props)
        } else {
            Alphabet::PowerSet(props)
        }
    }
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Self {
            code: 2,
            msg: e.to_string(),
        }
    }
}

fn trace_arg(s: &str) -> Result<Trace, Failure> {
    s.parse().map_err(|e| Failure::usage(format!("trace `{s}`: {e}")))
}

fn show_word(t: &Trace) -> String {
    if t.is_empty() {
        "ε".into()
    } else {
        t.to_string()
    }
}

fn json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn alphabet_label(a: &Alphabet) -> String {
    match a {
        Alphabet::Singletons(p) => format!("{{{}}} (singletons)", p.join(",")),
        Alphabet::PowerSet(p) => format!("2^{{{}}}", p.join(",")),
    }
}

fn execute(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Parse { formula, json: as_json } => {
            let f = formula.load()?;
            let subs: Vec<String> = f.subformulas().iter().map(ToString::to_string).collect();
            if as_json {
                let doc = serde_json::json!({
                    "formula": f.to_string(),
                    "nesting_depth": f.nesting_depth(),
                    "propositions": f.propositions(),
                    "subformulas": subs,
                });
                println!("{}", json(&doc));
            } else {
                println!("{f}");
                println!("depth {}, {} subformulas", f.nesting_depth(), subs.len());
            }
        }
        Command::Eval { formula, trace, pos } => {
            let f = formula.load()?;
            let t = trace_arg(&trace)?;
            let v = match pos {
                Some(p) => eval_at(&f, &t, p).map_err(Failure::usage)?,
                None => eval(&f, &t),
            };
            println!("{v}");
        }
        Command::Compile {
            formula,
            target,
            alphabet,
            out,
        } => {
            let f = formula.load()?;
            let ssm = compile_over(&f, target.policy, target.mode, &alphabet).map_err(Failure::usage)?;
            for w in ssm.warnings() {
                eprintln!("warning: {w}");
            }
            let doc = ssm.to_json();
            match out {
                Some(path) => {
                    fs::write(&path, doc + "\n").map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                    eprintln!(
                        "wrote {}: {} layers, dimension {}",
                        path.display(),
                        ssm.layers().len(),
                        ssm.dim()
                    );
                }
                None => println!("{doc}"),
            }
        }
        Command::Run {
            model,
            trace,
            mode,
            json: as_json,
        } => {
            let ssm = model.load()?;
            let t = trace_arg(&trace)?;
            let rt = pastssm::run(&ssm, &t, mode).map_err(Failure::usage)?;
            if as_json {
                println!("{}", serde_json::to_string_pretty(&rt.to_json()).expect("json value"));
            } else {
                println!("mode {}", rt.mode);
                println!("{:>5}  {:<12}  y", "t", "letter");
                for (i, (letter, y)) in t.letters().iter().zip(&rt.outputs).enumerate() {
                    let one = Trace::new(vec![letter.clone()]);
                    println!("{:>5}  {:<12}  {y}", i + 1, one.to_string());
                }
                println!("accepted {}", rt.accepted());
            }
        }
        Command::Accepts { model, trace, mode } => {
            let ssm = model.load()?;
            let t = trace_arg(&trace)?;
            println!("{}", pastssm::accepts(&ssm, &t, mode).map_err(Failure::usage)?);
        }
        Command::Enumerate { formula, words } => {
            let f = formula.load()?;
            let alphabet = words.alphabet(&f);
            let lang = enumerate_language_over(&f, &alphabet, words.max_len, words.budget).map_err(Failure::usage)?;
            for w in &lang {
                println!("{}", show_word(w));
            }
        }
        Command::Check {
            formula,
            target,
            words,
            json: as_json,
        } => {
            let f = formula.load()?;
            let alphabet = words.alphabet(&f);
            let ssm = compile_over(&f, target.policy, target.mode, alphabet.propositions()).map_err(Failure::usage)?;
            for w in ssm.warnings() {
                eprintln!("warning: {w}");
            }
            let report =
                check_model(&ssm, &f, target.mode, &alphabet, words.max_len, words.budget).map_err(Failure::usage)?;
            if as_json {
                println!("{}", json(&report));
            } else {
                println!("formula     {}", report.formula);
                println!("policy      {}", report.policy);
                println!("mode        {}", report.mode);
                println!("alphabet    {}", alphabet_label(&report.alphabet));
                println!("lengths     1..={}", report.max_len);
                println!("words       {}", report.words_checked);
                println!("accepted    {}", report.accepted_count);
                println!("mismatches  {}", report.mismatches.len());
                for m in report.mismatches.iter().take(10) {
                    println!("  {}  model {} oracle {}", m.word, m.ssm, m.oracle);
                }
                println!("{}", report.verdict());
            }
            return Ok(u8::from(!report.equivalent()));
        }
        Command::Monotone {
            model,
            symbol,
            mode,
            window,
            json: as_json,
        } => {
            let ssm = model.load()?;
            let t = trace_arg(&symbol)?;
            let [letter]: [Letter; 1] = t
                .letters()
                .to_vec()
                .try_into()
                .map_err(|_| Failure::usage(format!("symbol `{symbol}` must be exactly one letter")))?;
            let rep = monotonicity_experiment(&ssm, &letter, mode, window).map_err(Failure::usage)?;
            if as_json {
                println!("{}", json(&rep));
            } else {
                println!("symbol              {}", rep.symbol);
                println!("mode                {}", rep.mode);
                println!("stabilization point {}", rep.stabilization_point);
                println!("hidden fixed point  {}", rep.hidden_fixed_point);
                println!("cap                 {}", rep.cap);
                println!(
                    "window              {} ({})",
                    rep.window,
                    if rep.window_confirmed() { "confirmed" } else { "broken" }
                );
                println!("accepts after       {}", rep.accepts_after);
            }
            return Ok(u8::from(!rep.window_confirmed()));
        }
        Command::DemoAastar {
            mode,
            window,
            max_len,
            json: as_json,
        } => {
            let rep = aa_star_demo(mode, &aa_star_candidates(), window, max_len).map_err(Failure::usage)?;
            if as_json {
                println!("{}", json(&rep));
            } else {
                println!("mode {}", rep.mode);
                for c in &rep.candidates {
                    println!(
                        "N={:<4} a^N {:<5} a^N+1 {:<5} wrong on {:<6} {}",
                        c.stabilization_point,
                        c.accepts_n,
                        c.accepts_n_plus_1,
                        c.misclassified.as_deref().unwrap_or("-"),
                        c.formula
                    );
                }
                println!(
                    "mixed {} on a^1..a^{}: {} errors",
                    rep.mixed_formula,
                    rep.mixed_max_len,
                    rep.mixed_errors.len()
                );
                println!(
                    "{}",
                    if rep.holds() {
                        "separation shown"
                    } else {
                        "separation NOT shown"
                    }
                );
            }
            return Ok(u8::from(!rep.holds()));
        }
        Command::LowerCrasp { formula } => {
            let f = formula.load()?;
            println!("{}", lower_to_crasp(&f).map_err(Failure::usage)?);
        }
        Command::NormalizeMod { formula, cap } => {
            let f = formula.load()?;
            println!("{}", normalize_mod_lcm_with_cap(&f, cap).map_err(Failure::usage)?);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
