//! System F types and a checker for annotated algebraic terms.
//!
//! Terms are Church style: abstractions carry the type of their binder and
//! type abstraction and instantiation are explicit nodes. [`erase`] recovers
//! the untyped term.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::taylor::{AlgComb, AlgTerm};

/// A binder name kept for printing only; it never takes part in equality,
/// ordering or hashing.
#[derive(Clone, Debug)]
pub struct Hint(pub String);

impl PartialEq for Hint {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Hint {}

impl PartialOrd for Hint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Hint {
    fn cmp(&self, _: &Self) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}

impl Hash for Hint {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// A System F type. Quantified variables are de Bruijn indices so that
/// alpha-equivalent types are equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeExpr {
    Var(String),
    Bound(usize),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    Forall(Hint, Box<TypeExpr>),
}

impl TypeExpr {
    pub fn var(name: &str) -> TypeExpr {
        TypeExpr::Var(name.to_string())
    }

    pub fn arrow(dom: TypeExpr, cod: TypeExpr) -> TypeExpr {
        TypeExpr::Arrow(Box::new(dom), Box::new(cod))
    }

    /// `∀name.body`, binding the free occurrences of `name`.
    pub fn forall(name: &str, body: TypeExpr) -> TypeExpr {
        TypeExpr::Forall(Hint(name.to_string()), Box::new(body.close(name, 0)))
    }

    pub fn parse(src: &str) -> Result<TypeExpr, crate::ParseError> {
        crate::parse::parse_type(src)
    }

    fn close(&self, name: &str, depth: usize) -> TypeExpr {
        match self {
            TypeExpr::Var(n) if n == name => TypeExpr::Bound(depth),
            TypeExpr::Var(_) | TypeExpr::Bound(_) => self.clone(),
            TypeExpr::Arrow(a, b) => TypeExpr::arrow(a.close(name, depth), b.close(name, depth)),
            TypeExpr::Forall(h, b) => TypeExpr::Forall(h.clone(), Box::new(b.close(name, depth + 1))),
        }
    }

    /// Replaces the dangling index `depth` by the closed type `with`.
    fn open(&self, with: &TypeExpr, depth: usize) -> TypeExpr {
        match self {
            TypeExpr::Bound(i) if *i == depth => with.clone(),
            TypeExpr::Var(_) | TypeExpr::Bound(_) => self.clone(),
            TypeExpr::Arrow(a, b) => TypeExpr::arrow(a.open(with, depth), b.open(with, depth)),
            TypeExpr::Forall(h, b) => TypeExpr::Forall(h.clone(), Box::new(b.open(with, depth + 1))),
        }
    }

    /// `∀φ.body` instantiated at `with`; `None` when not a quantifier.
    pub fn instantiate(&self, with: &TypeExpr) -> Option<TypeExpr> {
        match self {
            TypeExpr::Forall(_, body) => Some(body.open(with, 0)),
            _ => None,
        }
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            TypeExpr::Var(n) => {
                out.insert(n.clone());
            }
            TypeExpr::Bound(_) => {}
            TypeExpr::Arrow(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            TypeExpr::Forall(_, b) => b.collect_free(out),
        }
    }

    fn print(&self, avoid: &BTreeSet<String>, binders: &mut Vec<String>, out: &mut String) {
        match self {
            TypeExpr::Var(n) => out.push_str(n),
            TypeExpr::Bound(i) => match binders.len().checked_sub(i + 1) {
                Some(k) => out.push_str(&binders[k]),
                None => out.push_str(&format!("#b{i}")),
            },
            TypeExpr::Arrow(a, b) => {
                let paren = matches!(**a, TypeExpr::Arrow(..) | TypeExpr::Forall(..));
                if paren {
                    out.push('(');
                }
                a.print(avoid, binders, out);
                if paren {
                    out.push(')');
                }
                out.push_str(" -> ");
                b.print(avoid, binders, out);
            }
            TypeExpr::Forall(Hint(hint), b) => {
                let mut name = hint.clone();
                while avoid.contains(&name) || binders.contains(&name) {
                    name.push('\'');
                }
                out.push_str("forall ");
                out.push_str(&name);
                out.push_str(". ");
                binders.push(name);
                b.print(avoid, binders, out);
                binders.pop();
            }
        }
    }
}

impl fmt::Display for TypeExpr {
    /// Quantified variables keep their hint unless that would capture a
    /// free variable or shadow an enclosing quantifier, in which case primes
    /// are appended.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.print(&self.free_variables(), &mut Vec::new(), &mut out);
        f.write_str(&out)
    }
}

/// Capture-avoiding substitution `a[b/phi]`.
pub fn type_subst(a: &TypeExpr, b: &TypeExpr, phi: &str) -> TypeExpr {
    a.close(phi, 0).open(b, 0)
}

/// Term variables with their types.
pub type Context = BTreeMap<String, TypeExpr>;

pub fn context_free_variables(ctx: &Context) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for t in ctx.values() {
        t.collect_free(&mut out);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Axiom,
    ArrowIntro,
    Application,
    ForallIntro,
    ForallElim,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Axiom => "axiom",
            Rule::ArrowIntro => "arrow-intro",
            Rule::Application => "application",
            Rule::ForallIntro => "forall-intro",
            Rule::ForallElim => "forall-elim",
        })
    }
}

/// One step from a node to a subterm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathStep {
    /// Body of a term or type abstraction.
    Body,
    /// Function of an application or operand of a type application.
    Function,
    /// The i-th summand (in term order) of an argument combination.
    Argument(usize),
}

/// Location of a subterm, outermost step first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TermPath(pub Vec<PathStep>);

impl fmt::Display for TermPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            match s {
                PathStep::Body => f.write_str("body")?,
                PathStep::Function => f.write_str("fun")?,
                PathStep::Argument(k) => write!(f, "arg[{k}]")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{rule} at {path}: {message}")]
pub struct TypeError {
    pub rule: Rule,
    pub path: TermPath,
    pub message: String,
}

fn display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// A typing derivation: the last rule, its conclusion and its premises.
#[derive(Clone, Debug, Serialize)]
pub struct Derivation {
    pub rule: Rule,
    #[serde(serialize_with = "display")]
    pub term: AlgTerm,
    #[serde(rename = "type", serialize_with = "display")]
    pub ty: TypeExpr,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    fn print(&self, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("{}: {} : {}\n", self.rule, self.term, self.ty));
        for p in &self.premises {
            p.print(depth + 1, out);
        }
    }
}

impl fmt::Display for Derivation {
    /// One judgment per line, premises indented below their conclusion.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.print(0, &mut out);
        f.write_str(out.trim_end())
    }
}

struct Checker {
    path: Vec<PathStep>,
}

impl Checker {
    fn fail(&self, rule: Rule, message: String) -> TypeError {
        TypeError { rule, path: TermPath(self.path.clone()), message }
    }

    fn within<T>(&mut self, step: PathStep, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(step);
        let out = f(self);
        self.path.pop();
        out
    }

    fn synth(&mut self, ctx: &Context, m: &AlgTerm) -> Result<Derivation, TypeError> {
        match m {
            AlgTerm::Var(x) => match ctx.get(x) {
                Some(ty) => Ok(Derivation { rule: Rule::Axiom, term: m.clone(), ty: ty.clone(), premises: vec![] }),
                None => Err(self.fail(Rule::Axiom, format!("unbound variable {x}"))),
            },
            AlgTerm::Abs { binder, ty, body } => {
                let Some(a) = ty else {
                    return Err(self.fail(Rule::ArrowIntro, format!("binder {binder} has no type annotation")));
                };
                let mut inner = ctx.clone();
                inner.insert(binder.clone(), a.clone());
                let d = self.within(PathStep::Body, |c| c.synth(&inner, body))?;
                let ty = TypeExpr::arrow(a.clone(), d.ty.clone());
                Ok(Derivation { rule: Rule::ArrowIntro, term: m.clone(), ty, premises: vec![d] })
            }
            AlgTerm::App { fun, arg } => {
                let f = self.within(PathStep::Function, |c| c.synth(ctx, fun))?;
                let TypeExpr::Arrow(a, b) = &f.ty else {
                    return Err(self.fail(Rule::Application, format!("function has type {}, not an arrow", f.ty)));
                };
                let mut premises = vec![f.clone()];
                for (i, (n, _)) in arg.iter().enumerate() {
                    let d = self.within(PathStep::Argument(i), |c| c.synth(ctx, n))?;
                    if d.ty != **a {
                        return Err(self.within(PathStep::Argument(i), |c| {
                            c.fail(Rule::Application, format!("argument has type {}, expected {}", d.ty, a))
                        }));
                    }
                    premises.push(d);
                }
                Ok(Derivation { rule: Rule::Application, term: m.clone(), ty: (**b).clone(), premises })
            }
            AlgTerm::TyAbs { tyvar, body } => {
                if context_free_variables(ctx).contains(tyvar) {
                    return Err(self.fail(Rule::ForallIntro, format!("type variable {tyvar} is free in the context")));
                }
                let d = self.within(PathStep::Body, |c| c.synth(ctx, body))?;
                let ty = TypeExpr::forall(tyvar, d.ty.clone());
                Ok(Derivation { rule: Rule::ForallIntro, term: m.clone(), ty, premises: vec![d] })
            }
            AlgTerm::TyApp { body, ty } => {
                let d = self.within(PathStep::Function, |c| c.synth(ctx, body))?;
                match d.ty.instantiate(ty) {
                    Some(inst) => Ok(Derivation { rule: Rule::ForallElim, term: m.clone(), ty: inst, premises: vec![d] }),
                    None => Err(self.fail(Rule::ForallElim, format!("operand has type {}, not a quantifier", d.ty))),
                }
            }
        }
    }
}

/// The unique type of `m` under `ctx`, with its derivation.
pub fn synthesize(ctx: &Context, m: &AlgTerm) -> Result<Derivation, TypeError> {
    Checker { path: Vec::new() }.synth(ctx, m)
}

/// Checks `ctx ⊢ m : ty`.
pub fn typecheck(ctx: &Context, m: &AlgTerm, ty: &TypeExpr) -> Result<Derivation, TypeError> {
    let d = synthesize(ctx, m)?;
    if &d.ty != ty {
        let rule = d.rule;
        return Err(TypeError { rule, path: TermPath::default(), message: format!("term has type {}, expected {}", d.ty, ty) });
    }
    Ok(d)
}

/// Drops binder annotations and type abstraction and application nodes.
pub fn erase(m: &AlgTerm) -> AlgTerm {
    match m {
        AlgTerm::Var(_) => m.clone(),
        AlgTerm::Abs { binder, body, .. } => AlgTerm::Abs { binder: binder.clone(), ty: None, body: Box::new(erase(body)) },
        AlgTerm::App { fun, arg } => AlgTerm::App { fun: Box::new(erase(fun)), arg: erase_comb(arg) },
        AlgTerm::TyAbs { body, .. } | AlgTerm::TyApp { body, .. } => erase(body),
    }
}

pub fn erase_comb(q: &AlgComb) -> AlgComb {
    q.map_keys(erase)
}
