//! Deterministic pretty-printing of terms, types, values, contexts and
//! derivations. Unicode output uses λ, ⊢, ↦ and superscript annotations;
//! ASCII mode is the canonical form for golden tests.

use std::fmt::Write as _;

use crate::eval::{ClassicValuation, ClassicValue, RedJudgment, RedPremise, ReductionDerivation};
use crate::scope::{ScopeDerivation, ScopeJudgment};
use crate::subst::SubstDerivation;
use crate::syntax::{AnnotatedContext, Context, Dep, DepVector, Term, Type};
use crate::typing::{TypingDerivation, TypingPremise};
use crate::value::{ClosureCode, Valuation, Value};

#[derive(Debug, Clone, Copy)]
pub struct Printer {
    pub unicode: bool,
}

impl Printer {
    pub fn unicode() -> Printer {
        Printer { unicode: true }
    }

    pub fn ascii() -> Printer {
        Printer { unicode: false }
    }

    fn dep(&self, d: Dep) -> &'static str {
        match (self.unicode, d.is_needed()) {
            (true, false) => "\u{2070}",
            (true, true) => "\u{00b9}",
            (false, false) => "^0",
            (false, true) => "^1",
        }
    }

    fn lambda(&self) -> &'static str {
        if self.unicode {
            "\u{03bb}"
        } else {
            "\\"
        }
    }

    fn arrow(&self) -> &'static str {
        if self.unicode {
            "\u{2192}"
        } else {
            "->"
        }
    }

    fn maps_to(&self) -> &'static str {
        if self.unicode {
            "\u{21a6}"
        } else {
            "|->"
        }
    }

    pub fn turnstile(&self) -> &'static str {
        if self.unicode {
            "\u{22a2}"
        } else {
            "|-"
        }
    }

    fn evaluates(&self) -> &'static str {
        if self.unicode {
            "\u{21d2}"
        } else {
            "=>"
        }
    }

    // ----- terms -----

    pub fn term(&self, t: &Term) -> String {
        let mut out = String::new();
        self.term_into(t, &mut out);
        out
    }

    fn term_into(&self, t: &Term, out: &mut String) {
        match t {
            Term::Var(x) => out.push_str(x),
            Term::Pair(a, b) => {
                out.push('(');
                self.term_into(a, out);
                out.push_str(", ");
                self.term_into(b, out);
                out.push(')');
            }
            Term::Proj(ix, e) => {
                let _ = write!(out, "pi{} ", ix.as_u8());
                self.atom_term_into(e, out);
            }
            Term::Lam {
                param,
                param_ty,
                body,
            } => {
                let _ = write!(out, "{}({}:{}) ", self.lambda(), param, self.ty(param_ty));
                self.term_into(body, out);
            }
            Term::Fix {
                fname,
                param,
                param_ty,
                result_ty,
                body,
            } => {
                let _ = write!(
                    out,
                    "fix {fname}({param}:{}):{} = ",
                    self.ty(param_ty),
                    self.ty(result_ty)
                );
                self.term_into(body, out);
            }
            Term::App(f, a) => {
                match f.as_ref() {
                    Term::Lam { .. } | Term::Let { .. } | Term::Fix { .. } => {
                        out.push('(');
                        self.term_into(f, out);
                        out.push(')');
                    }
                    _ => self.term_into(f, out),
                }
                out.push(' ');
                self.atom_term_into(a, out);
            }
            Term::Let { name, def, body } => {
                let _ = write!(out, "let {name} = ");
                self.term_into(def, out);
                out.push_str(" in ");
                self.term_into(body, out);
            }
        }
    }

    fn atom_term_into(&self, t: &Term, out: &mut String) {
        match t {
            Term::Var(_) | Term::Pair(_, _) | Term::Proj(_, _) => self.term_into(t, out),
            _ => {
                out.push('(');
                self.term_into(t, out);
                out.push(')');
            }
        }
    }

    // ----- types -----

    pub fn ty(&self, t: &Type) -> String {
        let mut out = String::new();
        self.ty_into(t, &mut out);
        out
    }

    fn ty_into(&self, t: &Type, out: &mut String) {
        match t {
            Type::Atom(a) => out.push_str(a),
            Type::Product(l, r) => {
                // A closure on the left would swallow the product into its
                // result; nested products are kept explicit.
                match l.as_ref() {
                    Type::Atom(_) => self.ty_into(l, out),
                    _ => {
                        out.push('(');
                        self.ty_into(l, out);
                        out.push(')');
                    }
                }
                out.push_str(" * ");
                match r.as_ref() {
                    Type::Product(_, _) => {
                        out.push('(');
                        self.ty_into(r, out);
                        out.push(')');
                    }
                    _ => self.ty_into(r, out),
                }
            }
            Type::Closure(ct) => {
                out.push('[');
                out.push_str(&self.annotated_context(&ct.captured));
                out.push(']');
                let _ = write!(
                    out,
                    "({}:{}{}) {} ",
                    ct.param,
                    self.ty(&ct.param_ty),
                    self.dep(ct.param_dep),
                    self.arrow()
                );
                self.ty_into(&ct.result_ty, out);
            }
        }
    }

    // ----- contexts and annotations -----

    pub fn context(&self, c: &Context) -> String {
        c.entries
            .iter()
            .map(|e| format!("{}:{}", e.name, self.ty(&e.ty)))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn annotated_context(&self, c: &AnnotatedContext) -> String {
        c.ctx
            .entries
            .iter()
            .zip(&c.deps.entries)
            .map(|(e, (_, d))| format!("{}:{}{}", e.name, self.ty(&e.ty), self.dep(*d)))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn context_with_deps(&self, c: &Context, deps: &DepVector) -> String {
        c.entries
            .iter()
            .zip(&deps.entries)
            .map(|(e, (_, d))| format!("{}:{}{}", e.name, self.ty(&e.ty), self.dep(*d)))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn dep_vector(&self, deps: &DepVector) -> String {
        deps.entries
            .iter()
            .map(|(n, d)| format!("{n}{}", self.dep(*d)))
            .collect::<Vec<_>>()
            .join(",")
    }

    // ----- values -----

    pub fn value(&self, v: &Value) -> String {
        let mut out = String::new();
        self.value_into(v, &mut out);
        out
    }

    fn value_into(&self, v: &Value, out: &mut String) {
        match v {
            Value::AtomConst { constant, .. } => out.push_str(constant),
            Value::Pair(a, b) => {
                out.push('(');
                self.value_into(a, out);
                out.push_str(", ");
                self.value_into(b, out);
                out.push(')');
            }
            Value::Closure {
                pending,
                captured,
                code,
            } => {
                let _ = write!(out, "([{}], ", pending.join(","));
                if captured.is_empty() {
                    out.push_str(if self.unicode { "\u{2205}" } else { "()" });
                } else {
                    out.push('(');
                    for (i, cb) in captured.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        let _ = write!(out, "({} {} ", cb.name, self.maps_to());
                        self.value_into(&cb.value, out);
                        out.push(')');
                    }
                    out.push(')');
                }
                out.push_str(", ");
                self.code_into(code, out);
                out.push(')');
            }
        }
    }

    fn code_into(&self, code: &ClosureCode, out: &mut String) {
        match code {
            ClosureCode::Lam { param, body, .. } => {
                let _ = write!(out, "{}({}) ", self.lambda(), param);
                self.term_into(body, out);
            }
            ClosureCode::Fix {
                fname, param, body, ..
            } => {
                let _ = write!(out, "fix {fname}({param}) ");
                self.term_into(body, out);
            }
        }
    }

    pub fn classic_value(&self, v: &ClassicValue) -> String {
        let mut out = String::new();
        self.classic_value_into(v, &mut out);
        out
    }

    fn classic_value_into(&self, v: &ClassicValue, out: &mut String) {
        match v {
            ClassicValue::AtomConst { constant, .. } => out.push_str(constant),
            ClassicValue::Pair(a, b) => {
                out.push('(');
                self.classic_value_into(a, out);
                out.push_str(", ");
                self.classic_value_into(b, out);
                out.push(')');
            }
            ClassicValue::Closure { env, code } => {
                out.push('(');
                out.push_str(&self.classic_valuation(env));
                out.push_str(", ");
                self.code_into(code, out);
                out.push(')');
            }
        }
    }

    pub fn valuation(&self, v: &Valuation) -> String {
        let inner = v
            .entries
            .iter()
            .map(|(n, val)| format!("{n} {} {}", self.maps_to(), self.value(val)))
            .collect::<Vec<_>>()
            .join(", ");
        format!("({inner})")
    }

    pub fn classic_valuation(&self, v: &ClassicValuation) -> String {
        let inner = v
            .entries
            .iter()
            .map(|(n, val)| format!("{n} {} {}", self.maps_to(), self.classic_value(val)))
            .collect::<Vec<_>>()
            .join(", ");
        format!("({inner})")
    }

    // ----- derivations -----

    pub fn scope_derivation(&self, d: &ScopeDerivation) -> String {
        let mut out = String::new();
        self.scope_node(d, 0, &mut out);
        out
    }

    fn scope_node(&self, d: &ScopeDerivation, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match &d.conclusion {
            ScopeJudgment::Context(ctx) => {
                let _ = writeln!(out, "{pad}{}: {} {}", d.rule.tag(), self.context(ctx), self.turnstile());
            }
            ScopeJudgment::Type(ctx, ty) => {
                let _ = writeln!(
                    out,
                    "{pad}{}: {} {} {}",
                    d.rule.tag(),
                    self.context(ctx),
                    self.turnstile(),
                    self.ty(ty)
                );
            }
        }
        for p in &d.premises {
            self.scope_node(p, indent + 1, out);
        }
    }

    pub fn subst_derivation(&self, d: &SubstDerivation) -> String {
        let mut out = String::new();
        self.subst_node(d, 0, &mut out);
        out
    }

    fn subst_node(&self, d: &SubstDerivation, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        let c = &d.conclusion;
        let mut left_ctx = self.context(&c.prefix);
        if !left_ctx.is_empty() {
            left_ctx.push(',');
        }
        let _ = write!(
            out,
            "{pad}{}: {}{}:{},{} ",
            d.rule.tag(),
            left_ctx,
            c.var,
            self.ty(&c.var_ty),
            self.context(&c.suffix)
        );
        let mut out_ctx = self.context(&c.prefix);
        if !out_ctx.is_empty() && !c.out_suffix.is_empty() {
            out_ctx.push(',');
        }
        out_ctx.push_str(&self.context(&c.out_suffix));
        match &c.ty {
            Some((input, output)) => {
                let _ = writeln!(
                    out,
                    "{} {} -[{}\\{}]-> {} {} {}",
                    self.turnstile(),
                    self.ty(input),
                    c.var,
                    self.dep_vector(&c.deps),
                    out_ctx,
                    self.turnstile(),
                    self.ty(output)
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "-[{}\\{}]-> {}",
                    c.var,
                    self.dep_vector(&c.deps),
                    out_ctx
                );
            }
        }
        for p in &d.premises {
            self.subst_node(p, indent + 1, out);
        }
    }

    pub fn typing_derivation(&self, d: &TypingDerivation) -> String {
        let mut out = String::new();
        self.typing_node(d, 0, &mut out);
        out
    }

    fn typing_node(&self, d: &TypingDerivation, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        let _ = writeln!(
            out,
            "{pad}{}: {} {} {} : {}",
            d.rule.tag(),
            self.context_with_deps(&d.ctx, &d.deps),
            self.turnstile(),
            self.term(&d.term),
            self.ty(&d.ty)
        );
        for p in &d.premises {
            match p {
                TypingPremise::Typing(t) => self.typing_node(t, indent + 1, out),
                TypingPremise::Subst(s) => self.subst_node(s, indent + 1, out),
                TypingPremise::Scope(s) => self.scope_node(s, indent + 1, out),
            }
        }
    }

    pub fn reduction_derivation(&self, d: &ReductionDerivation) -> String {
        let mut out = String::new();
        self.reduction_node(d, 0, &mut out);
        out
    }

    fn reduction_node(&self, d: &ReductionDerivation, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match &d.judgment {
            RedJudgment::Open {
                valuation,
                term,
                value,
            } => {
                let _ = writeln!(
                    out,
                    "{pad}{}: {} {} {} {} {}",
                    d.rule.tag(),
                    self.valuation(valuation),
                    self.turnstile(),
                    self.term(term),
                    self.evaluates(),
                    self.value(value)
                );
            }
            RedJudgment::Classic { env, term, value } => {
                let _ = writeln!(
                    out,
                    "{pad}{}: {} {} {} {} {}",
                    d.rule.tag(),
                    self.classic_valuation(env),
                    self.turnstile(),
                    self.term(term),
                    self.evaluates(),
                    self.classic_value(value)
                );
            }
        }
        for p in &d.premises {
            match p {
                RedPremise::Eval(e) => self.reduction_node(e, indent + 1, out),
                RedPremise::ValueSubst {
                    input,
                    var,
                    arg,
                    output,
                } => {
                    let _ = writeln!(
                        out,
                        "{pad}  subst: {} -[{}\\{}]-> {}",
                        self.value(input),
                        var,
                        self.value(arg),
                        self.value(output)
                    );
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{AnnotatedContext, Dep};

    fn atom(n: &str) -> Type {
        Type::atom(n)
    }

    #[test]
    fn session_type_in_ascii() {
        let cap = AnnotatedContext::from_triples(&[
            ("y1", atom("ty_y1"), false),
            ("y2", atom("ty_y2"), false),
            ("z", atom("ty_z"), true),
        ]);
        let ty = Type::product(
            Type::product(atom("ty_y1"), atom("ty_y2")),
            Type::closure(cap, "x", Dep::ZERO, atom("s"), atom("ty_z")),
        );
        assert_eq!(
            Printer::ascii().ty(&ty),
            "(ty_y1 * ty_y2) * [y1:ty_y1^0,y2:ty_y2^0,z:ty_z^1](x:s^0) -> ty_z"
        );
    }

    #[test]
    fn session_term_in_ascii() {
        let term = Term::let_in(
            "y",
            Term::pair(Term::var("y1"), Term::var("y2")),
            Term::pair(Term::var("y"), Term::lam("x", atom("s"), Term::var("z"))),
        );
        assert_eq!(
            Printer::ascii().term(&term),
            "let y = (y1, y2) in (y, \\(x:s) z)"
        );
        assert_eq!(
            Printer::unicode().term(&term),
            "let y = (y1, y2) in (y, \u{03bb}(x:s) z)"
        );
    }

    #[test]
    fn session_value_formats() {
        use crate::value::{CapturedBinding, ClosureCode};
        let pair = Value::pair(
            Value::atom("ty_y1", "val_y1"),
            Value::atom("ty_y2", "val_y2"),
        );
        let closure = Value::Closure {
            pending: vec!["y1".into(), "y2".into(), "z".into()],
            captured: vec![CapturedBinding {
                name: "y".into(),
                value: pair.clone(),
                deps: None,
            }],
            code: ClosureCode::Lam {
                param: "x".into(),
                param_ty: atom("s"),
                body: Term::var("z"),
            },
        };
        let v = Value::pair(pair, closure);
        assert_eq!(
            Printer::unicode().value(&v),
            "((val_y1, val_y2), ([y1,y2,z], ((y \u{21a6} (val_y1, val_y2))), \u{03bb}(x) z))"
        );
        assert_eq!(
            Printer::ascii().value(&v),
            "((val_y1, val_y2), ([y1,y2,z], ((y |-> (val_y1, val_y2))), \\(x) z))"
        );
    }

    #[test]
    fn annotated_context_format() {
        let actx = AnnotatedContext::from_triples(&[
            ("y1", atom("ty_y1"), true),
            ("y2", atom("ty_y2"), true),
            ("z", atom("ty_z"), false),
        ]);
        assert_eq!(
            Printer::ascii().annotated_context(&actx),
            "y1:ty_y1^1,y2:ty_y2^1,z:ty_z^0"
        );
        assert_eq!(
            Printer::unicode().annotated_context(&actx),
            "y1:ty_y1\u{00b9},y2:ty_y2\u{00b9},z:ty_z\u{2070}"
        );
    }

    #[test]
    fn empty_captured_closure_value() {
        use crate::value::ClosureCode;
        let closure = Value::Closure {
            pending: vec![],
            captured: vec![],
            code: ClosureCode::Lam {
                param: "x".into(),
                param_ty: atom("a"),
                body: Term::var("x"),
            },
        };
        assert_eq!(Printer::ascii().value(&closure), "([], (), \\(x) x)");
        assert_eq!(
            Printer::unicode().value(&closure),
            "([], \u{2205}, \u{03bb}(x) x)"
        );
    }
}
