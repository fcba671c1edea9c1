//! Command-line front end: `solve`, `vs`, `broadcast`, `product`, `repeat`.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 solver failure.
//! Set `GPTMINT_LOG=debug` for progress logging on stderr.

pub mod files;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpt::{compose_systems, Ordering, ProcessCone};
use crate::money::{
    self, check_broadcastable, check_vs, BankStrategy, BroadcastReport, CounterfeitOptimum, MoneyConfig, ProductReport,
    RepetitionReport,
};
use crate::schema::SCHEMA_VERSION;
use crate::solver::{check_slater, verify_solution, Method, SlaterReport, Status};
use crate::theories::Theory;
use crate::RealVector;
use files::InputDigest;

#[derive(Debug, Parser)]
#[command(name = "gptmint", version, about = "Certified counterfeiting bounds for Wiesner-style money in convex-cone theories")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Certificate and validation tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Seed for randomised certificate checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Document with a `config` key; flags override it.
    #[arg(long, global = true)]
    pub config: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Include wall-clock times (makes reports non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// α, α̃ with its dual certificate, the trivial lower bound and Slater status.
    Solve {
        #[arg(long, default_value = "quantum:2")]
        theory: String,
        #[arg(long, default_value = "builtin:wiesner")]
        strategy: String,
        /// Only the relaxed value α̃.
        #[arg(long)]
        relaxed: bool,
    },
    /// Whether each effect singles out its state.
    Vs {
        #[arg(long, default_value = "quantum:2")]
        theory: String,
        #[arg(long, default_value = "builtin:wiesner")]
        strategy: String,
    },
    /// Whether one map broadcasts every listed state.
    Broadcast {
        #[arg(long, default_value = "quantum:2")]
        theory: String,
        /// `bb84`, `vertices`, `builtin:wiesner` or a document path.
        #[arg(long, default_value = "builtin:wiesner")]
        states: String,
    },
    /// α of the product strategy against α̃_A · α̃_B.
    Product {
        #[arg(long, default_value = "quantum:2")]
        theory: String,
        #[arg(long)]
        theory_b: Option<String>,
        #[arg(long, default_value = "builtin:wiesner")]
        a: String,
        #[arg(long, default_value = "builtin:wiesner")]
        b: String,
    },
    /// Notes needed for forging probability at most δ.
    Repeat {
        #[arg(long, default_value = "quantum:2")]
        theory: String,
        #[arg(long, default_value = "builtin:wiesner")]
        strategy: String,
        #[arg(long)]
        delta: f64,
    },
}

/// Solver diagnostics of one program, with the outcome of re-checking its
/// certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramDiagnostics {
    pub program: String,
    pub method: Method,
    pub status: Status,
    pub iterations: usize,
    #[serde(with = "crate::schema::decimal")]
    pub primal_value: f64,
    #[serde(with = "crate::schema::decimal")]
    pub dual_value: f64,
    #[serde(with = "crate::schema::decimal")]
    pub gap: f64,
    #[serde(with = "crate::schema::decimal")]
    pub primal_residual: f64,
    #[serde(with = "crate::schema::decimal")]
    pub dual_residual: f64,
    pub certificate_verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::schema::decimal_opt")]
    pub alpha: Option<f64>,
    #[serde(with = "crate::schema::decimal")]
    pub alpha_tilde: f64,
    #[serde(with = "crate::schema::decimal")]
    pub alpha_tilde_bound: f64,
    #[serde(with = "crate::schema::decimal")]
    pub lower_bound: f64,
    #[serde(with = "crate::schema::decimal_vec")]
    pub y_cert: RealVector,
    #[serde(with = "crate::schema::decimal_vec")]
    pub chi_opt: RealVector,
    pub slater: SlaterReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Solve(SolveResult),
    Vs { sharp: Vec<bool> },
    Broadcast(BroadcastReport),
    Product(ProductReport),
    Repeat(RepetitionReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub theory: String,
    pub inputs: Vec<InputDigest>,
    pub config: MoneyConfig,
    pub outcome: Outcome,
    pub diagnostics: Vec<ProgramDiagnostics>,
    pub warnings: Vec<String>,
    /// Milliseconds per stage; only with `--timings`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialise")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} on {}\n", self.command, self.theory);
        let line = |out: &mut String, k: &str, v: String| out.push_str(&format!("  {:<22}{}\n", k, v));
        match &self.outcome {
            Outcome::Solve(r) => {
                if let Some(a) = r.alpha {
                    line(&mut out, "alpha", format!("{:.9}", a));
                }
                line(&mut out, "alpha_tilde", format!("{:.9}", r.alpha_tilde));
                line(&mut out, "alpha_tilde bound", format!("{:.9}", r.alpha_tilde_bound));
                line(&mut out, "trivial lower bound", format!("{:.9}", r.lower_bound));
                line(
                    &mut out,
                    "slater (primal/dual)",
                    format!("{}/{}", r.slater.primal_strict, r.slater.dual_strict),
                );
            }
            Outcome::Vs { sharp } => {
                for (i, v) in sharp.iter().enumerate() {
                    line(&mut out, &format!("e_{} sharp", i + 1), v.to_string());
                }
            }
            Outcome::Broadcast(b) => {
                line(&mut out, "broadcastable", b.feasible.to_string());
            }
            Outcome::Product(p) => {
                line(&mut out, "alpha_AB", format!("{:.9}", p.alpha_ab));
                line(&mut out, "alpha_tilde_A", format!("{:.9}", p.alpha_tilde_a));
                line(&mut out, "alpha_tilde_B", format!("{:.9}", p.alpha_tilde_b));
                line(&mut out, "product bound", format!("{:.9}", p.product_bound));
                line(&mut out, "bound holds", p.holds.to_string());
                for d in &p.plugged {
                    line(
                        &mut out,
                        &format!("plug {}", d.name),
                        format!("value {:.9}, physical {}", d.value, d.in_process_cone && d.subcausal),
                    );
                }
            }
            Outcome::Repeat(r) => {
                line(&mut out, "alpha_tilde bound", format!("{:.9}", r.alpha_tilde_bound));
                line(&mut out, "delta", format!("{:e}", r.delta));
                line(&mut out, "n", r.n.to_string());
                line(&mut out, "certified bound", format!("{:.6e} = alpha_tilde^{}", r.certified_bound, r.n));
            }
        }
        for d in &self.diagnostics {
            out.push_str(&format!(
                "  [{}] {:?} via {:?}, {} iterations, gap {:.1e}, certificate {}\n",
                d.program,
                d.status,
                d.method,
                d.iterations,
                d.gap,
                if d.certificate_verified { "verified" } else { "NOT verified" }
            ));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {}\n", w));
        }
        if let Some(t) = &self.timings_ms {
            for (k, v) in t {
                out.push_str(&format!("  time {:<17}{:.1} ms\n", k, v));
            }
        }
        out
    }
}

struct Context {
    cfg: MoneyConfig,
    inputs: Vec<InputDigest>,
    diagnostics: Vec<ProgramDiagnostics>,
    warnings: Vec<String>,
    timings: BTreeMap<String, f64>,
    clock: Instant,
}

impl Context {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings
            .insert(stage.to_string(), (now - self.clock).as_secs_f64() * 1e3);
        self.clock = now;
    }

    /// Re-verifies an optimum against its own program and records it.
    fn record(&mut self, name: &str, s: &BankStrategy, pc: &ProcessCone, ordering: Ordering, opt: &CounterfeitOptimum) -> Result<()> {
        let p = money::counterfeit_program(s, pc, ordering)?;
        let ok = verify_solution(&p, &opt.solution, self.cfg.tol)?;
        if !ok {
            return Err(Error::Certificate(format!("{}: certificate failed the re-check", name)));
        }
        let sol = &opt.solution;
        self.diagnostics.push(ProgramDiagnostics {
            program: name.into(),
            method: sol.method,
            status: sol.status,
            iterations: sol.iterations,
            primal_value: sol.primal_value,
            dual_value: sol.dual_value,
            gap: sol.gap,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            certificate_verified: ok,
        });
        Ok(())
    }
}

fn resolve_config(common: &CommonArgs, inputs: &mut Vec<InputDigest>) -> Result<MoneyConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let (cfg, d) = files::load_config(path)?;
            inputs.push(d);
            cfg
        }
        None => MoneyConfig::default(),
    };
    if let Some(t) = common.tol {
        if !(t > 0.0) {
            return Err(Error::Invalid(format!("--tol must be positive, got {}", t)));
        }
        cfg.tol = t;
    }
    if let Some(m) = common.max_iter {
        cfg.solver.max_iter = m;
    }
    if let Some(s) = common.seed {
        cfg.solver.seed = s;
    }
    cfg.solver.validate()?;
    Ok(cfg)
}

fn load_pair(ctx: &mut Context, theory: &str, strategy: &str) -> Result<(Theory, BankStrategy)> {
    let (t, d) = files::load_theory(theory)?;
    ctx.inputs.push(d);
    let (s, own, d) = files::load_strategy(strategy, &t, ctx.cfg.tol)?;
    ctx.inputs.push(d);
    Ok((own.unwrap_or(t), s))
}

/// Runs one subcommand and builds its report.
pub fn run(cli: &Cli) -> Result<RunReport> {
    let mut inputs = Vec::new();
    let cfg = resolve_config(&cli.common, &mut inputs)?;
    let mut ctx = Context {
        cfg,
        inputs,
        diagnostics: Vec::new(),
        warnings: Vec::new(),
        timings: BTreeMap::new(),
        clock: Instant::now(),
    };
    let (command, theory_label, outcome) = match &cli.command {
        Command::Solve { theory, strategy, relaxed } => {
            let (t, s) = load_pair(&mut ctx, theory, strategy)?;
            let pc = t.cloning_process_cone()?;
            ctx.lap("load");
            let a = if *relaxed {
                None
            } else {
                let a = money::alpha(&s, &pc, &ctx.cfg)?;
                ctx.record("alpha", &s, &pc, Ordering::EffectCone, &a)?;
                ctx.lap("alpha");
                Some(a)
            };
            let at = money::alpha_tilde(&s, &pc, &ctx.cfg)?;
            ctx.record("alpha_tilde", &s, &pc, Ordering::DualStateCone, &at)?;
            money::normalised_y(&s, &pc, &at.y, at.value, &ctx.cfg)?;
            ctx.lap("alpha_tilde");
            let (lower, _) = money::trivial_lower_bound(&s, &pc, ctx.cfg.tol)?;
            let slater = check_slater(
                &money::counterfeit_program(&s, &pc, Ordering::DualStateCone)?,
                ctx.cfg.slater_margin,
            )?;
            ctx.lap("checks");
            let headline = a.as_ref().map_or(at.value, |a| a.value);
            if !ctx.cfg.strictly_below_one(headline) {
                ctx.warnings.push(format!(
                    "perfect counterfeiting: {} = {:.9}, so no number of notes gives security",
                    if a.is_some() { "alpha" } else { "alpha_tilde" },
                    headline
                ));
            }
            if let Some(a) = &a {
                if a.value > at.value + ctx.cfg.tol {
                    return Err(Error::Certificate(format!("alpha {} exceeds alpha_tilde {}", a.value, at.value)));
                }
            }
            let chi_opt = a.as_ref().map_or_else(|| at.chi.clone(), |a| a.chi.clone());
            let r = SolveResult {
                alpha: a.map(|a| a.value),
                alpha_tilde: at.value,
                alpha_tilde_bound: at.upper_bound,
                lower_bound: lower,
                y_cert: at.y,
                chi_opt,
                slater,
            };
            ("solve", t.name.to_string(), Outcome::Solve(r))
        }
        Command::Vs { theory, strategy } => {
            let (t, s) = load_pair(&mut ctx, theory, strategy)?;
            let sharp = check_vs(&s, &ctx.cfg)?;
            ctx.lap("vs");
            if sharp.iter().any(|v| !v) {
                ctx.warnings
                    .push("some effects accept other states with certainty; weak security arguments do not apply".into());
            }
            ("vs", t.name.to_string(), Outcome::Vs { sharp })
        }
        Command::Broadcast { theory, states } => {
            let (t, d) = files::load_theory(theory)?;
            ctx.inputs.push(d);
            let (st, d) = files::load_states(states, &t)?;
            ctx.inputs.push(d);
            let pc = t.cloning_process_cone()?;
            let r = check_broadcastable(&st, &pc, &ctx.cfg)?;
            ctx.lap("broadcast");
            ("broadcast", t.name.to_string(), Outcome::Broadcast(r))
        }
        Command::Product { theory, theory_b, a, b } => {
            let (ta, sa) = load_pair(&mut ctx, theory, a)?;
            let (tb, sb) = load_pair(&mut ctx, theory_b.as_deref().unwrap_or(theory), b)?;
            let pc_a = ta.cloning_process_cone()?;
            let pc_b = tb.cloning_process_cone()?;
            let ab = compose_systems(&[ta.system.clone(), tb.system.clone()], ta.rule.clone())?;
            let abab = compose_systems(&[ab.system.clone(), ab.system.clone()], ta.rule.clone())?;
            let pc_ab = ProcessCone::default_for(&ab.system, &abab.system)?;
            ctx.lap("load");
            let r = money::verify_product_bound(&sa, &pc_a, &sb, &pc_b, &pc_ab, &ctx.cfg)?;
            ctx.lap("product");
            if !r.holds {
                return Err(Error::Certificate(format!(
                    "alpha_AB = {} exceeds alpha_tilde_A * alpha_tilde_B = {}",
                    r.alpha_ab, r.product_bound
                )));
            }
            for d in &r.plugged {
                if !(d.in_process_cone && d.subcausal) {
                    ctx.warnings
                        .push(format!("plugging {} into the optimal counterfeiter left the physical cone", d.name));
                }
            }
            ("product", format!("{} ⊗ {}", ta.name, tb.name), Outcome::Product(r))
        }
        Command::Repeat { theory, strategy, delta } => {
            let (t, s) = load_pair(&mut ctx, theory, strategy)?;
            let pc = t.cloning_process_cone()?;
            let r = money::repetition_security(&s, &pc, *delta, &ctx.cfg)?;
            ctx.lap("repeat");
            ("repeat", t.name.to_string(), Outcome::Repeat(r))
        }
    };
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        command: command.into(),
        theory: theory_label,
        inputs: ctx.inputs,
        config: ctx.cfg,
        outcome,
        diagnostics: ctx.diagnostics,
        warnings: ctx.warnings,
        timings_ms: cli.common.timings.then_some(ctx.timings),
    })
}

/// 0 success, 2 input or validation error, 3 solver failure.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        2
    } else {
        3
    }
}

/// Parses `args`, runs, writes the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(report) => {
            let text = match cli.common.format {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.to_text(),
            };
            for w in &report.warnings {
                log::warn!("{}", w);
            }
            match &cli.common.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: cannot write {}: {}", path.display(), e);
                        return 2;
                    }
                }
                None => print!("{}", text),
            }
            0
        }
        Err(e) => {
            eprintln!("error: {}", e);
            exit_code(&e)
        }
    }
}

pub fn init_logging() {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("GPTMINT_LOG", "warn")).try_init();
}
