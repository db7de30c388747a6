//! The `fmcheck` command line.
//!
//! Exit codes: 0 success (valid, satisfiable), 1 negative analysis result
//! (invalid, void, conflict), 2 usage or input error, 3 size limit exceeded.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analysis::{
    analyze, check_full_configuration, count_products, enumerate_products, evaluate_conjuncts,
    is_extensible, propagate, AnalysisError, ConflictReport, Control, Derivation,
    PropagationResult, SolverBackend, DEFAULT_COUNT_CAP,
};
use crate::config_file::parse_configuration;
use crate::dsl::parse_model;
use crate::encode::{encode_model, write_dimacs, ConjunctRef, EncodedModel, Glyphs, PropFormula};
use crate::model::{Configuration, Decision, FeatureId, FeatureModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TOO_LARGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fmcheck", version, about = "Feature-model verification toolkit")]
pub struct Cli {
    /// Solver used for satisfiability questions.
    #[arg(long, global = true, default_value = "auto")]
    pub backend: SolverBackend,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// ASCII connectives instead of Unicode.
    #[arg(long, global = true)]
    pub ascii: bool,
    /// Largest model, in features, that count/enumerate will attempt.
    #[arg(long, global = true, env = "FMCHECK_COUNT_CAP", default_value_t = DEFAULT_COUNT_CAP)]
    pub count_cap: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a configuration file against a model.
    Check { model: PathBuf, config: PathBuf },
    /// Report void status, dead and core features.
    Analyze {
        model: PathBuf,
        /// Also count products.
        #[arg(long)]
        count: bool,
    },
    /// Interactive configuration: reads `+id`, `-id`, `?` and `done` lines
    /// from standard input.
    Configure { model: PathBuf },
    /// Print the propositional encoding.
    Encode {
        model: PathBuf,
        #[arg(long, conflicts_with = "pretty")]
        dimacs: bool,
        #[arg(long)]
        pretty: bool,
    },
    /// Count valid products.
    Count { model: PathBuf },
    /// List valid products in lexicographic order.
    Enumerate {
        model: PathBuf,
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
    /// Serve every `.fm` file of a directory over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    pub model_dir: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Browser origin allowed by CORS; `*` for any.
    #[arg(long, default_value = "http://localhost:5173")]
    pub cors_origin: String,
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut ctx = Ctx { cli: &cli, out, err };
    match ctx.dispatch(stdin) {
        Ok(code) => code,
        Err(Failure(code)) => code,
    }
}

/// Exit code for a command that stopped early; the message has already been
/// written.
struct Failure(i32);

type CmdResult = Result<i32, Failure>;

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($arg:tt)*) => {{
        let _ = writeln!($w, $($arg)*);
    }};
}

impl Ctx<'_> {
    fn glyphs(&self) -> Glyphs {
        if self.cli.ascii {
            Glyphs::Ascii
        } else {
            Glyphs::Unicode
        }
    }

    fn dispatch(&mut self, stdin: &mut dyn BufRead) -> CmdResult {
        match &self.cli.command {
            Command::Check { model, config } => self.check(model, config),
            Command::Analyze { model, count } => self.analyze(model, *count),
            Command::Configure { model } => self.configure(model, stdin),
            Command::Encode { model, dimacs, .. } => self.encode(model, *dimacs),
            Command::Count { model } => self.count(model),
            Command::Enumerate { model, limit } => self.enumerate(model, *limit),
            Command::Serve(args) => self.serve(args),
        }
    }

    fn fail(&mut self, code: i32, msg: impl std::fmt::Display) -> Failure {
        say!(self.err, "fmcheck: {msg}");
        Failure(code)
    }

    fn analysis_failure(&mut self, e: AnalysisError) -> Failure {
        let code = match e {
            AnalysisError::TooLarge { .. } => EXIT_TOO_LARGE,
            AnalysisError::VoidModel => EXIT_NEGATIVE,
            _ => EXIT_USAGE,
        };
        self.fail(code, e)
    }

    fn load(&mut self, path: &Path) -> Result<(FeatureModel, EncodedModel), Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| self.fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
        let model = match parse_model(&text) {
            Ok(m) => m,
            Err(errors) => {
                for e in &errors {
                    say!(self.err, "{}:{e}", path.display());
                }
                return Err(Failure(EXIT_USAGE));
            }
        };
        let encoded = encode_model(&model)
            .map_err(|e| self.fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
        Ok((model, encoded))
    }

    fn emit_json(&mut self, v: &Value) {
        let text = serde_json::to_string_pretty(v).expect("json values serialize");
        say!(self.out, "{text}");
    }

    fn check(&mut self, model_path: &Path, config_path: &Path) -> CmdResult {
        let (_, e) = self.load(model_path)?;
        let text = std::fs::read_to_string(config_path)
            .map_err(|err| self.fail(EXIT_USAGE, format!("{}: {err}", config_path.display())))?;
        let cfg = parse_configuration(&text, &e)
            .map_err(|err| self.fail(EXIT_USAGE, format!("{}:{err}", config_path.display())))?;

        // Partial configurations are propagated first; whatever stays
        // undecided is then taken as deselected.
        let mut forced = Vec::new();
        let mut completed = Vec::new();
        let full = if cfg.is_full(e.features()) {
            cfg
        } else {
            match propagate(&e, &cfg).map_err(|x| self.analysis_failure(x))? {
                PropagationResult::Conflict(c) => {
                    if self.cli.json {
                        self.emit_json(&json!({
                            "model": e.name(),
                            "status": "conflict",
                            "forced": [],
                            "completed": [],
                            "conjuncts": [],
                            "failing": [],
                            "conflict": c,
                        }));
                    } else {
                        say!(self.out, "model {}", e.name());
                        self.print_conflict(&c);
                    }
                    return Ok(EXIT_NEGATIVE);
                }
                PropagationResult::Consistent {
                    mut decisions,
                    derivations,
                } => {
                    for f in e.features() {
                        if decisions.get(f.as_str()) == Decision::Undecided {
                            decisions.set(f.clone(), Decision::Deselected);
                            completed.push(f.clone());
                        }
                    }
                    forced = derivations;
                    decisions
                }
            }
        };

        let values = evaluate_conjuncts(&e, &full).map_err(|x| self.analysis_failure(x))?;
        let labels = conjunct_labels(&e);
        let valid = values.iter().all(|(_, v)| *v);
        let failing: Vec<&str> = labels
            .iter()
            .zip(&values)
            .filter(|(_, (_, v))| !v)
            .map(|((l, _, _), _)| l.as_str())
            .collect();
        if self.cli.json {
            let conjuncts: Vec<Value> = labels
                .iter()
                .zip(&values)
                .map(|((label, r, f), (_, v))| {
                    json!({
                        "label": label,
                        "ref": r,
                        "formula": f.render(self.glyphs()),
                        "value": v,
                    })
                })
                .collect();
            self.emit_json(&json!({
                "model": e.name(),
                "status": if valid { "valid" } else { "invalid" },
                "forced": forced,
                "completed": completed,
                "conjuncts": conjuncts,
                "failing": failing,
                "conflict": null,
            }));
        } else {
            say!(self.out, "model {}", e.name());
            for d in &forced {
                say!(self.out, "{}", forced_line(d));
            }
            if !completed.is_empty() {
                let names: Vec<&str> = completed.iter().map(FeatureId::as_str).collect();
                say!(self.out, "undecided, taken as deselected: {}", names.join(", "));
            }
            for ((label, r, f), (_, v)) in labels.iter().zip(&values) {
                say!(self.out, "{label:<4}{r}");
                say!(
                    self.out,
                    "    {} = {}",
                    f.render(self.glyphs()),
                    if *v { "TRUE" } else { "FALSE" }
                );
            }
            if valid {
                say!(self.out, "result: Valid");
            } else {
                say!(self.out, "result: Invalid (failing: {})", failing.join(", "));
            }
        }
        Ok(if valid { EXIT_OK } else { EXIT_NEGATIVE })
    }

    fn print_conflict(&mut self, c: &ConflictReport) {
        say!(
            self.out,
            "conflict on {}: required both selected and deselected",
            c.conflicting_feature
        );
        for step in &c.cause_chain {
            say!(
                self.out,
                "  {} {} ({})",
                sign(step.value),
                step.feature,
                step.origin
            );
        }
    }

    fn analyze(&mut self, path: &Path, count: bool) -> CmdResult {
        let (model, e) = self.load(path)?;
        let backend = self.cli.backend.resolve(e.feature_count());
        let cap = count.then_some(self.cli.count_cap);
        let report =
            analyze(&e, backend, cap, &Control::none()).map_err(|x| self.analysis_failure(x))?;
        if self.cli.json {
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["model"] = json!(e.name());
            v["backend"] = json!(backend.to_string());
            self.emit_json(&v);
        } else {
            let preorder = |set: &BTreeSet<FeatureId>| -> String {
                let names: Vec<&str> = e
                    .features()
                    .iter()
                    .filter(|f| set.contains(*f))
                    .map(FeatureId::as_str)
                    .collect();
                if names.is_empty() {
                    "(none)".to_string()
                } else {
                    names.join(", ")
                }
            };
            say!(
                self.out,
                "model {}: {} features, {} constraints",
                e.name(),
                e.feature_count(),
                model.constraints.len()
            );
            say!(self.out, "backend: {backend}");
            say!(self.out, "void: {}", report.void);
            say!(self.out, "dead: {}", preorder(&report.dead_features));
            say!(self.out, "core: {}", preorder(&report.core_features));
            if let Some(n) = report.product_count {
                say!(self.out, "products: {n}");
            }
        }
        Ok(if report.void { EXIT_NEGATIVE } else { EXIT_OK })
    }

    fn configure(&mut self, path: &Path, stdin: &mut dyn BufRead) -> CmdResult {
        let (_, e) = self.load(path)?;
        let mut user = Configuration::new();
        let mut shown: BTreeSet<(FeatureId, bool)> = BTreeSet::new();
        say!(self.out, "model {}", e.name());
        let mut current = self.configure_step(&e, &user, &mut shown)?;
        if let PropagationResult::Conflict(_) = current {
            return Ok(EXIT_NEGATIVE);
        }
        let mut line = String::new();
        loop {
            line.clear();
            let n = stdin
                .read_line(&mut line)
                .map_err(|x| self.fail(EXIT_USAGE, x))?;
            if n == 0 {
                break;
            }
            let cmd = line.trim();
            if cmd.is_empty() || cmd.starts_with('#') {
                continue;
            }
            if cmd == "done" {
                break;
            }
            if cmd == "?" {
                self.print_status(&e, &user, &current);
                continue;
            }
            let (value, name) = match cmd.split_at(1) {
                ("+", rest) => (true, rest.trim()),
                ("-", rest) => (false, rest.trim()),
                _ => {
                    say!(self.err, "unrecognized command `{cmd}`; use +id, -id, ? or done");
                    continue;
                }
            };
            let Some(id) = e.feature(name).cloned() else {
                say!(self.err, "unknown feature `{name}`; ignored");
                continue;
            };
            say!(
                self.out,
                "{} {id}",
                if value { "select" } else { "deselect" }
            );
            user.set(id, Decision::from_bool(value));
            current = self.configure_step(&e, &user, &mut shown)?;
            if let PropagationResult::Conflict(_) = current {
                return Ok(EXIT_NEGATIVE);
            }
        }

        let PropagationResult::Consistent { decisions, .. } = &current else {
            unreachable!("conflicts end the session")
        };
        if decisions.is_full(e.features()) {
            let check =
                check_full_configuration(&e, decisions).map_err(|x| self.analysis_failure(x))?;
            say!(
                self.out,
                "complete: {}",
                if check.is_valid() { "Valid" } else { "Invalid" }
            );
            return Ok(if check.is_valid() { EXIT_OK } else { EXIT_NEGATIVE });
        }
        let undecided = e
            .features()
            .iter()
            .filter(|f| decisions.get(f.as_str()) == Decision::Undecided)
            .count();
        let extensible = is_extensible(&e, decisions, self.cli.backend)
            .map_err(|x| self.analysis_failure(x))?
            .is_sat();
        say!(
            self.out,
            "incomplete: {undecided} undecided; extensible to a valid product: {}",
            if extensible { "yes" } else { "no" }
        );
        Ok(if extensible { EXIT_OK } else { EXIT_NEGATIVE })
    }

    /// Propagates `user` and prints what changed since the previous step.
    fn configure_step(
        &mut self,
        e: &EncodedModel,
        user: &Configuration,
        shown: &mut BTreeSet<(FeatureId, bool)>,
    ) -> Result<PropagationResult, Failure> {
        let result = propagate(e, user).map_err(|x| self.analysis_failure(x))?;
        match &result {
            PropagationResult::Conflict(c) => self.print_conflict(c),
            PropagationResult::Consistent { derivations, .. } => {
                let now: BTreeSet<(FeatureId, bool)> = derivations
                    .iter()
                    .map(|d| (d.feature.clone(), d.value))
                    .collect();
                for (f, v) in shown.difference(&now) {
                    if user.get(f.as_str()) == Decision::Undecided {
                        say!(self.out, "released {} {f}", sign(*v));
                    }
                }
                for d in derivations {
                    if !shown.contains(&(d.feature.clone(), d.value)) {
                        say!(self.out, "{}", forced_line(d));
                    }
                }
                *shown = now;
            }
        }
        Ok(result)
    }

    fn print_status(&mut self, e: &EncodedModel, user: &Configuration, current: &PropagationResult) {
        for f in e.features() {
            let line = match (user.get(f.as_str()), current.derivation_of(f.as_str())) {
                (Decision::Selected, _) => format!("+ {f} (user)"),
                (Decision::Deselected, _) => format!("- {f} (user)"),
                (_, Some(d)) => format!("{} {f} ({})", sign(d.value), d.reason),
                _ => format!("? {f}"),
            };
            say!(self.out, "  {line}");
        }
    }

    fn encode(&mut self, path: &Path, dimacs: bool) -> CmdResult {
        let (_, e) = self.load(path)?;
        if dimacs {
            let text = write_dimacs(e.cnf());
            let _ = self.out.write_all(text.as_bytes());
            return Ok(EXIT_OK);
        }
        let labels = conjunct_labels(&e);
        if self.cli.json {
            let conjuncts: Vec<Value> = labels
                .iter()
                .map(|(label, r, f)| {
                    json!({ "label": label, "ref": r, "formula": f.render(self.glyphs()) })
                })
                .collect();
            self.emit_json(&json!({
                "model": e.name(),
                "features": e.features(),
                "conjuncts": conjuncts,
            }));
            return Ok(EXIT_OK);
        }
        say!(self.out, "model {}", e.name());
        for (label, r, f) in &labels {
            say!(self.out, "{label:<4}{r}");
            // One line per top-level conjunct of the group formula.
            match f {
                PropFormula::And(parts) => {
                    for p in parts {
                        say!(self.out, "    {}", p.render(self.glyphs()));
                    }
                }
                other => say!(self.out, "    {}", other.render(self.glyphs())),
            }
        }
        Ok(EXIT_OK)
    }

    fn count(&mut self, path: &Path) -> CmdResult {
        let (_, e) = self.load(path)?;
        let n = count_products(&e, self.cli.count_cap).map_err(|x| self.analysis_failure(x))?;
        if self.cli.json {
            self.emit_json(&json!({ "model": e.name(), "count": n }));
        } else {
            say!(self.out, "{n}");
        }
        Ok(EXIT_OK)
    }

    fn enumerate(&mut self, path: &Path, limit: usize) -> CmdResult {
        let (_, e) = self.load(path)?;
        let products = enumerate_products(&e, limit, self.cli.count_cap)
            .map_err(|x| self.analysis_failure(x))?;
        let selected = |p: &Configuration| -> Vec<FeatureId> {
            e.features()
                .iter()
                .filter(|f| p.get(f.as_str()) == Decision::Selected)
                .cloned()
                .collect()
        };
        if self.cli.json {
            let list: Vec<Vec<FeatureId>> = products.iter().map(selected).collect();
            self.emit_json(&json!({ "model": e.name(), "products": list }));
        } else {
            for p in &products {
                let names: Vec<String> = selected(p).iter().map(|f| f.to_string()).collect();
                say!(self.out, "{}", names.join(" "));
            }
        }
        Ok(EXIT_OK)
    }

    fn serve(&mut self, args: &ServeArgs) -> CmdResult {
        use crate::service::{load_models, serve, AppState, ServiceConfig};

        let _ = tracing_subscriber::fmt()
            .with_env_filter(
                tracing_subscriber::EnvFilter::try_from_default_env()
                    .unwrap_or_else(|_| "info".into()),
            )
            .with_writer(std::io::stderr)
            .try_init();
        let (models, failures) = load_models(&args.model_dir)
            .map_err(|x| self.fail(EXIT_USAGE, format!("{}: {x}", args.model_dir.display())))?;
        for f in &failures {
            for msg in &f.errors {
                tracing::warn!(file = %f.path.display(), "skipped: {msg}");
            }
        }
        tracing::info!(count = models.len(), "models loaded");
        let config = ServiceConfig {
            cors_origin: Some(args.cors_origin.clone()),
            count_cap: self.cli.count_cap,
            backend: self.cli.backend,
            ..ServiceConfig::default()
        };
        let state = AppState::new(models, config);
        let rt = tokio::runtime::Runtime::new().map_err(|x| self.fail(EXIT_USAGE, x))?;
        let addr = format!("{}:{}", args.host, args.port);
        let listener = rt
            .block_on(tokio::net::TcpListener::bind(&addr))
            .map_err(|x| self.fail(EXIT_USAGE, format!("cannot listen on {addr}: {x}")))?;
        if let Ok(local) = listener.local_addr() {
            tracing::info!("listening on http://{local}");
        }
        rt.block_on(serve(listener, state))
            .map_err(|x| self.fail(EXIT_USAGE, x))?;
        Ok(EXIT_OK)
    }
}

fn sign(v: bool) -> char {
    if v {
        '+'
    } else {
        '-'
    }
}

fn forced_line(d: &Derivation) -> String {
    format!("forced {} {} ({})", sign(d.value), d.feature, d.reason)
}

/// Conjuncts labelled `R` (root), `G1..` (groups) and `D1..` (dependencies).
pub fn conjunct_labels(e: &EncodedModel) -> Vec<(String, ConjunctRef, &PropFormula)> {
    let (mut g, mut d) = (0, 0);
    e.conjuncts()
        .into_iter()
        .map(|(r, f)| {
            let label = match r {
                ConjunctRef::Root { .. } => "R".to_string(),
                ConjunctRef::Group { .. } => {
                    g += 1;
                    format!("G{g}")
                }
                ConjunctRef::Dependency { .. } => {
                    d += 1;
                    format!("D{d}")
                }
            };
            (label, r, f)
        })
        .collect()
}
