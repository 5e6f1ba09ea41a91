use std::collections::BTreeSet;
use std::fmt;

use crate::algebra::{LinComb, Rational, Semiring};
use crate::sysf::TypeExpr;

/// An algebraic lambda-term: arguments are finite rational combinations.
///
/// Binders are named and equality is syntactic; alpha-equivalent summands
/// are identified when the term is expanded.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlgTerm {
    Var(String),
    Abs { binder: String, ty: Option<TypeExpr>, body: Box<AlgTerm> },
    App { fun: Box<AlgTerm>, arg: AlgComb },
    TyAbs { tyvar: String, body: Box<AlgTerm> },
    TyApp { body: Box<AlgTerm>, ty: TypeExpr },
}

pub type AlgComb = LinComb<Rational, AlgTerm>;

impl AlgTerm {
    pub fn var(name: &str) -> AlgTerm {
        AlgTerm::Var(name.to_string())
    }

    pub fn abs(binder: &str, body: AlgTerm) -> AlgTerm {
        AlgTerm::Abs { binder: binder.to_string(), ty: None, body: Box::new(body) }
    }

    pub fn typed_abs(binder: &str, ty: TypeExpr, body: AlgTerm) -> AlgTerm {
        AlgTerm::Abs { binder: binder.to_string(), ty: Some(ty), body: Box::new(body) }
    }

    pub fn app(fun: AlgTerm, arg: AlgComb) -> AlgTerm {
        AlgTerm::App { fun: Box::new(fun), arg }
    }

    /// `fun(1*arg)`.
    pub fn app1(fun: AlgTerm, arg: AlgTerm) -> AlgTerm {
        AlgTerm::app(fun, LinComb::unit(arg))
    }

    pub fn ty_abs(tyvar: &str, body: AlgTerm) -> AlgTerm {
        AlgTerm::TyAbs { tyvar: tyvar.to_string(), body: Box::new(body) }
    }

    pub fn ty_app(body: AlgTerm, ty: TypeExpr) -> AlgTerm {
        AlgTerm::TyApp { body: Box::new(body), ty }
    }

    pub fn parse(src: &str) -> Result<AlgTerm, crate::ParseError> {
        crate::parse::parse_alg(src)
    }

    /// True when every argument is a single summand with coefficient 1,
    /// i.e. the term is an ordinary lambda-term.
    pub fn is_pure(&self) -> bool {
        match self {
            AlgTerm::Var(_) => true,
            AlgTerm::Abs { body, .. } | AlgTerm::TyAbs { body, .. } | AlgTerm::TyApp { body, .. } => body.is_pure(),
            AlgTerm::App { fun, arg } => {
                fun.is_pure()
                    && arg.len() == 1
                    && arg.iter().all(|(n, c)| *c == Rational::one() && n.is_pure())
            }
        }
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            AlgTerm::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            AlgTerm::Abs { binder, body, .. } => {
                bound.push(binder.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            AlgTerm::App { fun, arg } => {
                fun.collect_free(bound, out);
                for n in arg.keys() {
                    n.collect_free(bound, out);
                }
            }
            AlgTerm::TyAbs { body, .. } | AlgTerm::TyApp { body, .. } => body.collect_free(bound, out),
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if matches!(self, AlgTerm::Abs { .. } | AlgTerm::TyAbs { .. }) {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for AlgTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgTerm::Var(x) => f.write_str(x),
            AlgTerm::Abs { binder, ty: None, body } => write!(f, "\\{binder}.{body}"),
            AlgTerm::Abs { binder, ty: Some(ty), body } => write!(f, "\\{binder}:{ty}.{body}"),
            AlgTerm::App { fun, arg } => {
                fun.fmt_operand(f)?;
                write!(f, "({arg})")
            }
            AlgTerm::TyAbs { tyvar, body } => write!(f, "/\\{tyvar}.{body}"),
            AlgTerm::TyApp { body, ty } => {
                body.fmt_operand(f)?;
                write!(f, "{{{ty}}}")
            }
        }
    }
}
