mod goldens;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rescalc_core::algebra::TermComb;
use rescalc_core::finiteness::{
    self, finitary_probe, relevant_probes, FiniteStream, ProbeReport, ProbeVerdict, SelfApplicationStream, TaylorStream,
    TermStream, TowerStream, VariablesStream, DEFAULT_CEILING,
};
use rescalc_core::parse;
use rescalc_core::rewrite::{self, Reducer};
use rescalc_core::subst;
use rescalc_core::sysf::{self, Context};
use rescalc_core::taylor::{self, AlgTerm};
use rescalc_core::{Semiring, Term};

/// Largest probe considered when probes are derived from the input.
const DEFAULT_PROBE_SIZE: usize = 6;

#[derive(Parser)]
#[command(name = "rescalc", version, about = "Workbench for the resource lambda-calculus")]
struct Cli {
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Truncation ceiling for infinite objects.
    #[arg(long, global = true, env = "RESCALC_CEILING", default_value_t = DEFAULT_CEILING)]
    ceiling: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Syntax {
    Term,
    Bag,
    Comb,
    Alg,
    Type,
    Context,
}

/// Arguments holding terms or combinations are inline text, or `@PATH` to
/// read a file.
#[derive(Subcommand)]
enum Command {
    /// Parse and print in canonical form.
    Parse {
        input: String,
        #[arg(long, value_enum, default_value = "term")]
        syntax: Syntax,
    },
    /// Normal form of a rational combination.
    Nf {
        comb: String,
        /// Also run this many random maximal reductions per support term.
        #[arg(long)]
        check_confluence: Option<usize>,
    },
    /// One-step reducts of a term (the leftmost one unless --all).
    Step {
        term: String,
        #[arg(long)]
        all: bool,
    },
    /// All terms below a term in the reduction order.
    Downset { term: String },
    /// Whether `t ≤ s`, i.e. `t` occurs in some reduct of `s`.
    Leq { t: String, s: String },
    /// Differential substitution `∂s[T/x]`.
    Dsubst { term: String, bag: String, var: String },
    /// All `(t, T)` with `s` in the support of `∂t[T/x]`.
    InvDsubst { term: String, var: String },
    /// Coefficient of a simple term in a Taylor expansion.
    TaylorCoeff { alg: String, term: String },
    /// Shape elements up to a size.
    Shape {
        alg: String,
        #[arg(long)]
        size: Option<usize>,
    },
    /// Check `Tay(M)_s · m(s) = 1` on the shape and 0 off it.
    Uniformity {
        alg: String,
        #[arg(long)]
        size: Option<usize>,
    },
    /// Coherence of two simple terms and disjointness of their normal forms.
    Coherence { s: String, t: String },
    /// Type-check an algebraic term.
    Typecheck {
        alg: String,
        /// File of `x : type` declarations.
        #[arg(long)]
        context: Option<String>,
        /// Check against this type instead of synthesizing.
        #[arg(long = "type")]
        ty: Option<String>,
    },
    /// Probe a stream: `taylor:M`, `file:PATH`, `tower`, `variables`,
    /// `counterexample:tower` or `counterexample:selfapp`.
    Finitary {
        #[arg(long)]
        stream: String,
        #[command(flatten)]
        probes: Probes,
    },
    /// Round-by-round reduction towards the normal form, per probe.
    Converge {
        /// The combination, inline.
        comb: Option<String>,
        /// The combination, from a file.
        #[arg(short = 'a', id = "comb_file", conflicts_with = "comb")]
        comb_file: Option<String>,
        #[command(flatten)]
        probes: Probes,
    },
    /// One instance of the redex-expansion closure condition. Sets are
    /// `;`-separated terms.
    SaturationCheck {
        #[arg(long)]
        g: String,
        #[arg(long)]
        e: String,
        /// Further argument sets, applied in order.
        #[arg(long = "arg")]
        args: Vec<String>,
        #[arg(long, default_value = "x")]
        var: String,
        #[command(flatten)]
        probes: Probes,
    },
    /// Substitute finite sets for context variables in a typed term's shape.
    FundamentalCheck {
        alg: String,
        #[arg(long)]
        context: Option<String>,
        /// `x=t1;t2;...`, repeatable.
        #[arg(long = "set")]
        sets: Vec<String>,
        #[command(flatten)]
        probes: Probes,
    },
    /// Replay the built-in golden examples.
    PaperExamples,
}

#[derive(clap::Args)]
struct Probes {
    /// A probe term, repeatable.
    #[arg(long = "probe")]
    probe: Vec<String>,
    /// File with one probe per line.
    #[arg(long = "probes")]
    file: Option<String>,
}

struct Outcome {
    text: String,
    json: Value,
    failed: bool,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Outcome {
        Outcome { text, json, failed: false }
    }
}

fn read_file(path: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {path}"))
}

fn input(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => read_file(path),
        None => Ok(arg.to_string()),
    }
}

fn parsed<T>(what: &str, src: &str, f: impl Fn(&str) -> Result<T, rescalc_core::ParseError>) -> Result<T> {
    f(src.trim()).map_err(|e| anyhow!("parse error in {what}: {e}"))
}

fn term_arg(arg: &str) -> Result<Term> {
    parsed("term", &input(arg)?, parse::parse_term)
}

fn alg_arg(arg: &str) -> Result<AlgTerm> {
    parsed("algebraic term", &input(arg)?, parse::parse_alg)
}

/// Terms one per line, skipping blank lines and `#` comments.
fn term_lines(src: &str, origin: &str) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse::parse_term(line).map_err(|e| anyhow!("parse error in {origin}, line {}: column {}: {}", i + 1, e.column, e.message))?);
    }
    Ok(out)
}

/// `;`-separated terms, or `@PATH` with one term per line.
fn term_set(arg: &str) -> Result<Vec<Term>> {
    if let Some(path) = arg.strip_prefix('@') {
        return term_lines(&read_file(path)?, path);
    }
    arg.split(';').map(str::trim).filter(|s| !s.is_empty()).map(|s| parsed("term", s, parse::parse_term)).collect()
}

fn context_arg(arg: &Option<String>) -> Result<Context> {
    match arg {
        Some(path) => parse::parse_context(&read_file(path)?).map_err(|e| anyhow!("parse error in {path}: {e}")),
        None => Ok(Context::new()),
    }
}

impl Probes {
    fn given(&self) -> Result<Option<Vec<Term>>> {
        let mut out = Vec::new();
        for p in &self.probe {
            out.push(term_arg(p)?);
        }
        if let Some(path) = &self.file {
            out.extend(term_lines(&read_file(path)?, path)?);
        }
        Ok((!out.is_empty() || self.file.is_some()).then_some(out))
    }

    /// The given probes, or every small term below one of `terms`.
    fn or_relevant<'a>(&self, terms: impl IntoIterator<Item = &'a Term>, reducer: &Reducer) -> Result<Vec<Term>> {
        Ok(match self.given()? {
            Some(p) => p,
            None => relevant_probes(terms, DEFAULT_PROBE_SIZE, reducer),
        })
    }
}

fn comb_json<R: Semiring>(a: &TermComb<R>) -> Value {
    serde_json::to_value(a.to_json()).expect("serializable")
}

fn terms_json<'a>(ts: impl IntoIterator<Item = &'a Term>) -> Value {
    ts.into_iter().map(|t| Value::String(t.to_string())).collect()
}

fn verdict_text(v: &ProbeVerdict) -> String {
    match v {
        ProbeVerdict::Stable(l) => format!("stable from level {l}"),
        ProbeVerdict::Growing => "growing".to_string(),
        ProbeVerdict::Inconclusive => "inconclusive".to_string(),
    }
}

fn report_json(r: &ProbeReport) -> Value {
    json!({
        "probe": r.probe.to_string(),
        "counts": r.counts,
        "sampled": r.sampled,
        "verdict": r.verdict,
    })
}

fn reports_text(reports: &[ProbeReport]) -> String {
    reports
        .iter()
        .map(|r| {
            let counts: Vec<String> = r.counts.iter().map(usize::to_string).collect();
            format!("{}: {} [{}]", r.probe, verdict_text(&r.verdict), counts.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn reports_json(reports: &[ProbeReport]) -> Value {
    reports.iter().map(report_json).collect()
}

fn lines<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|t| t.to_string()).collect::<Vec<_>>().join("\n")
}

fn stream_of(spec: &str) -> Result<Box<dyn TermStream>> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match (kind, arg) {
        ("taylor", m) => {
            let src = if std::path::Path::new(m).is_file() { read_file(m)? } else { m.to_string() };
            Box::new(TaylorStream::new(&parsed("algebraic term", &src, parse::parse_alg)?))
        }
        ("file", path) => Box::new(FiniteStream::from_terms(&term_lines(&read_file(path)?, path)?)),
        ("tower", "") | ("counterexample", "tower") => Box::new(TowerStream),
        ("variables", "") => Box::new(VariablesStream),
        ("counterexample", "selfapp") => Box::new(SelfApplicationStream::new()),
        _ => bail!("unknown stream {spec}"),
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let reducer = Reducer::global();
    let ceiling = cli.ceiling;
    Ok(match &cli.command {
        Command::Parse { input: src, syntax } => {
            let src = input(src)?;
            let out = match syntax {
                Syntax::Term => parsed("term", &src, parse::parse_term)?.to_string(),
                Syntax::Bag => parsed("bag", &src, parse::parse_bag)?.to_string(),
                Syntax::Comb => parsed("combination", &src, parse::parse_comb)?.to_string(),
                Syntax::Alg => parsed("algebraic combination", &src, parse::parse_alg_comb)?.to_string(),
                Syntax::Type => parsed("type", &src, parse::parse_type)?.to_string(),
                Syntax::Context => {
                    let ctx = parsed("context", &src, parse::parse_context)?;
                    lines(ctx.iter().map(|(x, t)| format!("{x} : {t}")))
                }
            };
            Outcome::ok(out.clone(), json!(out))
        }
        Command::Nf { comb, check_confluence } => {
            let a = parsed("combination", &input(comb)?, parse::parse_comb)?;
            let nf = reducer.normalize_comb(&a);
            let mut out = Outcome::ok(nf.to_string(), json!({ "normal_form": comb_json(&nf) }));
            if let Some(trials) = check_confluence {
                let mut ok = true;
                for (i, t) in a.keys().enumerate() {
                    ok &= rewrite::confluence_check(t, *trials, cli.seed.wrapping_add(i as u64));
                }
                out.text.push_str(&format!("\nconfluent: {ok}"));
                out.json["confluent"] = json!(ok);
                out.failed = !ok;
            }
            out
        }
        Command::Step { term, all } => {
            let s = term_arg(term)?;
            let steps = if *all { rewrite::one_step_all(&s) } else { rewrite::leftmost(&s).into_iter().collect() };
            Outcome::ok(
                lines(steps.iter().map(|st| format!("{}: {}", st.path_string(), st.result))),
                steps.iter().map(|st| json!({ "path": st.path_string(), "result": comb_json(&st.result) })).collect(),
            )
        }
        Command::Downset { term } => {
            let d = reducer.downset(&term_arg(term)?);
            Outcome::ok(lines(d.iter()), terms_json(d.iter()))
        }
        Command::Leq { t, s } => {
            let b = reducer.upset_member(&term_arg(s)?, &term_arg(t)?);
            Outcome::ok(b.to_string(), json!(b))
        }
        Command::Dsubst { term, bag, var } => {
            let bag = parsed("bag", &input(bag)?, parse::parse_bag)?;
            let r = subst::diff_subst(&term_arg(term)?, &bag, var);
            Outcome::ok(r.to_string(), comb_json(&r))
        }
        Command::InvDsubst { term, var } => {
            let sol = subst::inverse_diff_subst(&term_arg(term)?, var);
            Outcome::ok(
                lines(sol.pairs.iter().map(|(t, b)| format!("{t} {b}"))),
                sol.pairs.iter().map(|(t, b)| json!({ "term": t.to_string(), "bag": b.to_string() })).collect(),
            )
        }
        Command::TaylorCoeff { alg, term } => {
            let c = taylor::taylor_coeff(&alg_arg(alg)?, &term_arg(term)?);
            Outcome::ok(c.to_string(), json!(c.to_string()))
        }
        Command::Shape { alg, size } => {
            let s = taylor::shape(&alg_arg(alg)?, size.unwrap_or(ceiling));
            Outcome::ok(lines(&s), terms_json(&s))
        }
        Command::Uniformity { alg, size } => {
            let b = taylor::uniformity_check(&alg_arg(alg)?, size.unwrap_or(ceiling))?;
            Outcome { text: b.to_string(), json: json!(b), failed: !b }
        }
        Command::Coherence { s, t } => {
            let (s, t) = (term_arg(s)?, term_arg(t)?);
            let coherent = taylor::coherent(&s, &t);
            let disjoint = if coherent && s != t { Some(taylor::coherent_disjointness_check(&s, &t, reducer)?) } else { None };
            let mut text = format!("coherent: {coherent}");
            if let Some(d) = disjoint {
                text.push_str(&format!("\ndisjoint normal forms: {d}"));
            }
            Outcome { text, json: json!({ "coherent": coherent, "disjoint": disjoint }), failed: disjoint == Some(false) }
        }
        Command::Typecheck { alg, context, ty } => {
            let ctx = context_arg(context)?;
            let m = alg_arg(alg)?;
            let result = match ty {
                Some(ty) => sysf::typecheck(&ctx, &m, &parsed("type", &input(ty)?, parse::parse_type)?),
                None => sysf::synthesize(&ctx, &m),
            };
            match result {
                Ok(d) => Outcome::ok(d.to_string(), json!({ "ok": true, "derivation": d })),
                Err(e) => Outcome {
                    text: format!("type error: {e}"),
                    json: json!({
                        "ok": false,
                        "error": { "rule": e.rule.to_string(), "path": e.path.to_string(), "message": e.message },
                    }),
                    failed: true,
                },
            }
        }
        Command::Finitary { stream, probes } => {
            let mut e = stream_of(stream)?;
            let probes = match probes.given()? {
                Some(p) => p,
                None => relevant_probes(e.truncate(ceiling).keys(), DEFAULT_PROBE_SIZE, reducer),
            };
            let reports = finitary_probe(e.as_mut(), &probes, ceiling, reducer);
            Outcome::ok(reports_text(&reports), reports_json(&reports))
        }
        Command::Converge { comb, comb_file, probes } => {
            let src = match (comb, comb_file) {
                (Some(c), _) => input(c)?,
                (None, Some(path)) => read_file(path)?,
                (None, None) => bail!("a combination or -a FILE is required"),
            };
            let a = parsed("combination", &src, parse::parse_comb)?;
            let probes = probes.or_relevant(a.keys(), reducer)?;
            let tr = finiteness::nf_convergence_trace(&a, &probes, reducer);
            let mut text = lines(tr.stages.iter().enumerate().map(|(i, s)| format!("stage {i}: {s}")));
            text.push_str(&format!("\nnormal form: {}", tr.normal_form));
            for (p, n) in &tr.stable_from {
                text.push_str(&format!("\n{p}: stable from stage {n}"));
            }
            Outcome::ok(
                text,
                json!({
                    "stages": tr.stages.iter().map(comb_json).collect::<Vec<_>>(),
                    "normal_form": comb_json(&tr.normal_form),
                    "stable_from": tr.stable_from.iter().map(|(p, n)| json!({ "probe": p.to_string(), "stage": n })).collect::<Vec<_>>(),
                }),
            )
        }
        Command::SaturationCheck { g, e, args, var, probes } => {
            let (g, e) = (term_set(g)?, term_set(e)?);
            let args = args.iter().map(|a| term_set(a)).collect::<Result<Vec<_>>>()?;
            let probes = match probes.given()? {
                Some(p) => p,
                None => {
                    let bare = finiteness::saturation_instance_check(&g, &e, &args, var, &[], ceiling, reducer);
                    relevant_probes(bare.lhs.iter(), DEFAULT_PROBE_SIZE, reducer)
                }
            };
            let rep = finiteness::saturation_instance_check(&g, &e, &args, var, &probes, ceiling, reducer);
            let text = format!(
                "left:\n{}\nright:\n{}\nviolations: {}",
                reports_text(&rep.lhs_reports),
                reports_text(&rep.rhs_reports),
                if rep.violations.is_empty() { "none".to_string() } else { lines(&rep.violations).replace('\n', ", ") }
            );
            Outcome {
                text,
                json: json!({
                    "lhs": reports_json(&rep.lhs_reports),
                    "rhs": reports_json(&rep.rhs_reports),
                    "violations": terms_json(&rep.violations),
                }),
                failed: !rep.violations.is_empty(),
            }
        }
        Command::FundamentalCheck { alg, context, sets, probes } => {
            let ctx = context_arg(context)?;
            let m = alg_arg(alg)?;
            let mut map = BTreeMap::new();
            for s in sets {
                let (x, terms) = s.split_once('=').ok_or_else(|| anyhow!("expected x=terms in --set {s}"))?;
                map.insert(x.trim().to_string(), term_set(terms)?);
            }
            let probes = match probes.given()? {
                Some(p) => p,
                None => {
                    let bare = finiteness::fundamental_property_instance(&ctx, &m, &map, &[], ceiling, reducer)?;
                    relevant_probes(bare.substituted.iter(), DEFAULT_PROBE_SIZE, reducer)
                }
            };
            let rep = finiteness::fundamental_property_instance(&ctx, &m, &map, &probes, ceiling, reducer)?;
            let text = format!(
                "type: {}\nsubstituted terms: {}\n{}\nconsistent: {}",
                rep.ty,
                rep.substituted.len(),
                reports_text(&rep.reports),
                rep.consistent
            );
            Outcome {
                text,
                json: json!({
                    "type": rep.ty.to_string(),
                    "substituted": rep.substituted.len(),
                    "reports": reports_json(&rep.reports),
                    "consistent": rep.consistent,
                }),
                failed: !rep.consistent,
            }
        }
        Command::PaperExamples => goldens::replay(reducer),
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Parse { .. } => "parse",
        Command::Nf { .. } => "nf",
        Command::Step { .. } => "step",
        Command::Downset { .. } => "downset",
        Command::Leq { .. } => "leq",
        Command::Dsubst { .. } => "dsubst",
        Command::InvDsubst { .. } => "inv-dsubst",
        Command::TaylorCoeff { .. } => "taylor-coeff",
        Command::Shape { .. } => "shape",
        Command::Uniformity { .. } => "uniformity",
        Command::Coherence { .. } => "coherence",
        Command::Typecheck { .. } => "typecheck",
        Command::Finitary { .. } => "finitary",
        Command::Converge { .. } => "converge",
        Command::SaturationCheck { .. } => "saturation-check",
        Command::FundamentalCheck { .. } => "fundamental-check",
        Command::PaperExamples => "paper-examples",
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                let doc = json!({ "command": command_name(&cli.command), "result": out.json });
                emit(&serde_json::to_string_pretty(&doc).expect("serializable"));
            } else if !out.text.is_empty() {
                emit(&out.text);
            }
            if out.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            if cli.json {
                let doc = json!({ "command": command_name(&cli.command), "error": e.to_string() });
                emit(&serde_json::to_string_pretty(&doc).expect("serializable"));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
