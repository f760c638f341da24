//! Dependency-annotated type inference: given Γ and a term, computes the
//! dependency vector Φ, the type, and a full derivation of Γ^Φ ⊢ e : σ.
//!
//! Inference is syntax-directed. Binders are removed from result types by
//! the substitution judgment, so types never mention out-of-scope
//! variables.

use std::fmt;

use thiserror::Error;

use crate::scope::{self, ScopeDerivation, ScopeError};
use crate::subst::{self, subst_annotated, SubstDerivation, SubstError};
use crate::syntax::{
    alpha_equal_types, dep_scale, dep_sum, AnnotatedContext, ClosureType, Context, Dep,
    DepVector, Name, Term, Type,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeErrorKind {
    #[error("type mismatch: expected {expected:?}, found {found:?}")]
    Mismatch { expected: Type, found: Type },
    #[error("expected a function, found {0:?}")]
    NotAFunction(Type),
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("{0}")]
    Scope(#[from] ScopeError),
    #[error("{0}")]
    Subst(#[from] SubstError),
    #[error("captured context [{}] is not a prefix of the application-site context [{}]",
            captured.join(","), ambient.join(","))]
    Prefix {
        captured: Vec<Name>,
        ambient: Vec<Name>,
    },
    #[error("fixpoint annotation inference did not stabilize")]
    FixDiverged,
}

/// A typing failure, located by the path of rule slots leading to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub path: Vec<&'static str>,
}

impl TypeError {
    fn new(kind: TypeErrorKind) -> TypeError {
        TypeError { kind, path: vec![] }
    }

    fn at(mut self, step: &'static str) -> TypeError {
        self.path.insert(0, step);
        self
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "at {}: {}", self.path.join(" > "), self.kind)
        }
    }
}

impl std::error::Error for TypeError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypingRule {
    Var,
    Product,
    Proj,
    Lam,
    Fix,
    Let,
    App,
}

impl TypingRule {
    pub fn tag(self) -> &'static str {
        match self {
            TypingRule::Var => "Var",
            TypingRule::Product => "Product",
            TypingRule::Proj => "Proj",
            TypingRule::Lam => "Lam",
            TypingRule::Fix => "Fix",
            TypingRule::Let => "Let",
            TypingRule::App => "App",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypingPremise {
    Typing(TypingDerivation),
    Subst(SubstDerivation),
    Scope(ScopeDerivation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypingDerivation {
    pub rule: TypingRule,
    pub ctx: Context,
    pub deps: DepVector,
    pub term: Term,
    pub ty: Type,
    pub premises: Vec<TypingPremise>,
}

/// Result of inference: Γ^deps ⊢ term : ty, with its derivation.
#[derive(Debug, Clone)]
pub struct Inference {
    pub deps: DepVector,
    pub ty: Type,
    pub derivation: TypingDerivation,
}

pub fn infer(ctx: &Context, term: &Term) -> Result<Inference, TypeError> {
    scope::check_context(ctx).map_err(|e| TypeError::new(e.into()))?;
    infer_rec(ctx, term)
}

fn infer_rec(ctx: &Context, term: &Term) -> Result<Inference, TypeError> {
    match term {
        Term::Var(x) => {
            let ty = ctx
                .lookup(x)
                .cloned()
                .ok_or_else(|| TypeError::new(TypeErrorKind::Unbound(x.clone())))?;
            let scope_deriv =
                scope::check_context(ctx).map_err(|e| TypeError::new(e.into()))?;
            Ok(Inference {
                deps: DepVector::unit(ctx, x),
                ty: ty.clone(),
                derivation: TypingDerivation {
                    rule: TypingRule::Var,
                    ctx: ctx.clone(),
                    deps: DepVector::unit(ctx, x),
                    term: term.clone(),
                    ty,
                    premises: vec![TypingPremise::Scope(scope_deriv)],
                },
            })
        }
        Term::Pair(a, b) => {
            let ia = infer_rec(ctx, a).map_err(|e| e.at("Pair.1"))?;
            let ib = infer_rec(ctx, b).map_err(|e| e.at("Pair.2"))?;
            let deps = dep_sum(&ia.deps, &ib.deps);
            let ty = Type::product(ia.ty.clone(), ib.ty.clone());
            Ok(Inference {
                deps: deps.clone(),
                ty: ty.clone(),
                derivation: TypingDerivation {
                    rule: TypingRule::Product,
                    ctx: ctx.clone(),
                    deps,
                    term: term.clone(),
                    ty,
                    premises: vec![
                        TypingPremise::Typing(ia.derivation),
                        TypingPremise::Typing(ib.derivation),
                    ],
                },
            })
        }
        Term::Proj(ix, e) => {
            let ie = infer_rec(ctx, e).map_err(|e| e.at("Proj"))?;
            let (a, b) = match &ie.ty {
                Type::Product(a, b) => (a.as_ref().clone(), b.as_ref().clone()),
                other => {
                    return Err(TypeError::new(TypeErrorKind::Mismatch {
                        expected: Type::product(Type::atom("_"), Type::atom("_")),
                        found: other.clone(),
                    })
                    .at("Proj"))
                }
            };
            let ty = match ix {
                crate::syntax::ProjIndex::First => a,
                crate::syntax::ProjIndex::Second => b,
            };
            Ok(Inference {
                deps: ie.deps.clone(),
                ty: ty.clone(),
                derivation: TypingDerivation {
                    rule: TypingRule::Proj,
                    ctx: ctx.clone(),
                    deps: ie.deps,
                    term: term.clone(),
                    ty,
                    premises: vec![TypingPremise::Typing(ie.derivation)],
                },
            })
        }
        Term::Lam {
            param,
            param_ty,
            body,
        } => {
            let param_scope =
                scope::check_type(ctx, param_ty).map_err(|e| TypeError::new(e.into()).at("Lam.annotation"))?;
            let inner = ctx.extended(param, param_ty.clone());
            let ib = infer_rec(&inner, body).map_err(|e| e.at("Lam.body"))?;
            let body_deps = ib.deps.prefix(ctx.len());
            let param_dep = ib.deps.entries[ctx.len()].1;
            let ty = Type::closure(
                AnnotatedContext::new(ctx.clone(), body_deps),
                param,
                param_dep,
                param_ty.clone(),
                ib.ty.clone(),
            );
            let deps = DepVector::zeros(ctx);
            Ok(Inference {
                deps: deps.clone(),
                ty: ty.clone(),
                derivation: TypingDerivation {
                    rule: TypingRule::Lam,
                    ctx: ctx.clone(),
                    deps,
                    term: term.clone(),
                    ty,
                    premises: vec![
                        TypingPremise::Scope(param_scope),
                        TypingPremise::Typing(ib.derivation),
                    ],
                },
            })
        }
        Term::Fix {
            fname,
            param,
            param_ty,
            result_ty,
            body,
        } => infer_fix(ctx, term, fname, param, param_ty, result_ty, body),
        Term::App(t, u) => infer_app(ctx, term, t, u),
        Term::Let { name, def, body } => {
            let idef = infer_rec(ctx, def).map_err(|e| e.at("Let.def"))?;
            let inner = ctx.extended(name, idef.ty.clone());
            let ibody = infer_rec(&inner, body).map_err(|e| e.at("Let.body"))?;
            let body_deps = ibody.deps.prefix(ctx.len());
            let phi = ibody.deps.entries[ctx.len()].1;
            // Γ^Φbody, x:σ^φ ⊢ τ →[x\Φdef] Γ^(Φbody+φ·Φdef) ⊢ τ'
            let mut actx = AnnotatedContext::new(ctx.clone(), body_deps);
            actx.push(name.clone(), idef.ty.clone(), phi);
            let (out_ctx, out_ty, sderiv) = subst_annotated(&actx, ctx.len(), &idef.deps, &ibody.ty)
                .map_err(|e| TypeError::new(e.into()).at("Let.subst"))?;
            let deps = out_ctx.deps;
            Ok(Inference {
                deps: deps.clone(),
                ty: out_ty.clone(),
                derivation: TypingDerivation {
                    rule: TypingRule::Let,
                    ctx: ctx.clone(),
                    deps,
                    term: term.clone(),
                    ty: out_ty,
                    premises: vec![
                        TypingPremise::Typing(idef.derivation),
                        TypingPremise::Typing(ibody.derivation),
                        TypingPremise::Subst(sderiv),
                    ],
                },
            })
        }
    }
}

fn infer_app(ctx: &Context, term: &Term, t: &Term, u: &Term) -> Result<Inference, TypeError> {
    let ifun = infer_rec(ctx, t).map_err(|e| e.at("App.fun"))?;
    let ct = match &ifun.ty {
        Type::Closure(ct) => ct.as_ref().clone(),
        other => {
            return Err(TypeError::new(TypeErrorKind::NotAFunction(other.clone())).at("App.fun"))
        }
    };
    if !ct.captured.ctx.embeds_in(ctx) {
        return Err(TypeError::new(TypeErrorKind::Prefix {
            captured: ct.captured.ctx.domain(),
            ambient: ctx.domain(),
        })
        .at("App"));
    }
    let iarg = infer_rec(ctx, u).map_err(|e| e.at("App.arg"))?;
    if !alpha_equal_types(&iarg.ty, &ct.param_ty) {
        return Err(TypeError::new(TypeErrorKind::Mismatch {
            expected: ct.param_ty.clone(),
            found: iarg.ty.clone(),
        })
        .at("App.arg"));
    }
    // The parameter binder must not clash with ambient names before it can
    // join the context for the substitution step.
    let (param, result_ty) = if ctx.position(&ct.param).is_some() {
        let fresh = fresh_name(&ct.param, ctx);
        let renamed = rename_captured(&ct.result_ty, &ct.param, &fresh);
        (fresh, renamed)
    } else {
        (ct.param.clone(), ct.result_ty.clone())
    };
    let mut actx = AnnotatedContext::new(ctx.clone(), ct.captured.deps.zero_extend(ctx));
    actx.push(param, ct.param_ty.clone(), ct.param_dep);
    let (out_ctx, out_ty, sderiv) = subst_annotated(&actx, ctx.len(), &iarg.deps, &result_ty)
        .map_err(|e| TypeError::new(e.into()).at("App.subst"))?;
    // Φfun + Φclos + φ·Φarg, the last two delivered by the annotated step.
    let deps = dep_sum(&ifun.deps, &out_ctx.deps);
    Ok(Inference {
        deps: deps.clone(),
        ty: out_ty.clone(),
        derivation: TypingDerivation {
            rule: TypingRule::App,
            ctx: ctx.clone(),
            deps,
            term: term.clone(),
            ty: out_ty,
            premises: vec![
                TypingPremise::Typing(ifun.derivation),
                TypingPremise::Typing(iarg.derivation),
                TypingPremise::Subst(sderiv),
            ],
        },
    })
}

/// The closure annotation Ψ and the argument annotation φ of a fixpoint are
/// not given in the source. Both start all-zero and are re-inferred from
/// the body until stable; each pass can only add dependencies, so this
/// terminates within |Γ|+2 passes.
fn infer_fix(
    ctx: &Context,
    term: &Term,
    fname: &Name,
    param: &Name,
    param_ty: &Type,
    result_ty: &Type,
    body: &Term,
) -> Result<Inference, TypeError> {
    let param_scope = scope::check_type(ctx, param_ty)
        .map_err(|e| TypeError::new(e.into()).at("Fix.annotation"))?;
    let result_scope = scope::check_type(&ctx.extended(param, param_ty.clone()), result_ty)
        .map_err(|e| TypeError::new(e.into()).at("Fix.annotation"))?;

    let mut psi = DepVector::zeros(ctx);
    let mut phi = Dep::ZERO;
    for _ in 0..ctx.len() + 2 {
        let fty = Type::Closure(Box::new(ClosureType {
            captured: AnnotatedContext::new(ctx.clone(), psi.clone()),
            param: param.clone(),
            param_dep: phi,
            param_ty: param_ty.clone(),
            result_ty: result_ty.clone(),
        }));
        let inner = ctx
            .extended(fname, fty.clone())
            .extended(param, param_ty.clone());
        let ib = infer_rec(&inner, body).map_err(|e| e.at("Fix.body"))?;
        if !alpha_equal_types(&ib.ty, result_ty) {
            return Err(TypeError::new(TypeErrorKind::Mismatch {
                expected: result_ty.clone(),
                found: ib.ty.clone(),
            })
            .at("Fix.body"));
        }
        let next_psi = dep_sum(&psi, &ib.deps.prefix(ctx.len()));
        let next_phi = phi.or(ib.deps.entries[ctx.len() + 1].1);
        let stable = next_psi == psi && next_phi == phi;
        psi = next_psi;
        phi = next_phi;
        if stable {
            let deps = DepVector::zeros(ctx);
            return Ok(Inference {
                deps: deps.clone(),
                ty: fty.clone(),
                derivation: TypingDerivation {
                    rule: TypingRule::Fix,
                    ctx: ctx.clone(),
                    deps,
                    term: term.clone(),
                    ty: fty,
                    premises: vec![
                        TypingPremise::Scope(param_scope),
                        TypingPremise::Scope(result_scope),
                        TypingPremise::Typing(ib.derivation),
                    ],
                },
            });
        }
    }
    Err(TypeError::new(TypeErrorKind::FixDiverged).at("Fix"))
}

fn fresh_name(base: &Name, ctx: &Context) -> Name {
    let mut i = 2;
    loop {
        let candidate = format!("{base}_{i}");
        if ctx.position(&candidate).is_none() {
            return candidate;
        }
        i += 1;
    }
}

/// Renames a captured-context occurrence of a closure-type parameter, for
/// use when the parameter would clash with the ambient context. Nested
/// binders of the same name shadow and stop the renaming.
fn rename_captured(ty: &Type, from: &Name, to: &Name) -> Type {
    match ty {
        Type::Atom(_) => ty.clone(),
        Type::Product(a, b) => {
            Type::product(rename_captured(a, from, to), rename_captured(b, from, to))
        }
        Type::Closure(ct) => {
            let mut captured = AnnotatedContext::empty();
            for (e, (_, d)) in ct.captured.ctx.entries.iter().zip(&ct.captured.deps.entries) {
                let name = if &e.name == from { to.clone() } else { e.name.clone() };
                captured.push(name, rename_captured(&e.ty, from, to), *d);
            }
            let param_ty = rename_captured(&ct.param_ty, from, to);
            let result_ty = if &ct.param == from {
                ct.result_ty.clone()
            } else {
                rename_captured(&ct.result_ty, from, to)
            };
            Type::Closure(Box::new(ClosureType {
                captured,
                param: ct.param.clone(),
                param_dep: ct.param_dep,
                param_ty,
                result_ty,
            }))
        }
    }
}

/// Re-verifies a derivation node by node against the rule schemas without
/// re-running inference; reports the first invalid node with its path.
pub fn check_derivation(d: &TypingDerivation) -> Result<(), String> {
    check_node(d, "root")
}

fn typing_premise<'a>(
    d: &'a TypingDerivation,
    i: usize,
    path: &str,
) -> Result<&'a TypingDerivation, String> {
    match d.premises.get(i) {
        Some(TypingPremise::Typing(t)) => Ok(t),
        _ => Err(format!("{path}: premise {i} must be a typing derivation")),
    }
}

fn check_node(d: &TypingDerivation, path: &str) -> Result<(), String> {
    let fail = |msg: String| Err(format!("{path}: {msg}"));
    if !d.deps.matches_context(&d.ctx) {
        return fail("conclusion annotation domain differs from the context".to_string());
    }
    match (&d.rule, &d.term) {
        (TypingRule::Var, Term::Var(x)) => {
            let ty = match d.ctx.lookup(x) {
                Some(t) => t,
                None => return fail(format!("variable `{x}` not in context")),
            };
            if !alpha_equal_types(ty, &d.ty) {
                return fail("Var conclusion type differs from the context binding".to_string());
            }
            if d.deps != DepVector::unit(&d.ctx, x) {
                return fail("Var annotation must be 1 exactly at the variable".to_string());
            }
            match d.premises.as_slice() {
                [TypingPremise::Scope(s)] => {
                    if !matches!(&s.conclusion, crate::scope::ScopeJudgment::Context(c) if c == &d.ctx)
                    {
                        return fail("Var premise must scope the conclusion context".to_string());
                    }
                    scope::validate(s).map_err(|e| format!("{path}: {e}"))?;
                }
                _ => return fail("Var requires a single scoping premise".to_string()),
            }
        }
        (TypingRule::Product, Term::Pair(a, b)) => {
            let da = typing_premise(d, 0, path)?;
            let db = typing_premise(d, 1, path)?;
            if da.term != **a || db.term != **b || da.ctx != d.ctx || db.ctx != d.ctx {
                return fail("Product premises must type the two components in order".to_string());
            }
            if d.deps != dep_sum(&da.deps, &db.deps) {
                return fail("Product annotation must be the sum of the premises".to_string());
            }
            if d.ty != Type::product(da.ty.clone(), db.ty.clone()) {
                return fail("Product type must pair the premise types".to_string());
            }
        }
        (TypingRule::Proj, Term::Proj(ix, e)) => {
            let de = typing_premise(d, 0, path)?;
            if de.term != **e || de.ctx != d.ctx || de.deps != d.deps {
                return fail("Proj premise mismatch".to_string());
            }
            match &de.ty {
                Type::Product(a, b) => {
                    let want = match ix {
                        crate::syntax::ProjIndex::First => a.as_ref(),
                        crate::syntax::ProjIndex::Second => b.as_ref(),
                    };
                    if want != &d.ty {
                        return fail("Proj conclusion picks the wrong component".to_string());
                    }
                }
                _ => return fail("Proj premise must have a product type".to_string()),
            }
        }
        (
            TypingRule::Lam,
            Term::Lam {
                param,
                param_ty,
                body,
            },
        ) => {
            let db = match d.premises.as_slice() {
                [TypingPremise::Scope(_), TypingPremise::Typing(t)] => t,
                _ => return fail("Lam requires a scope premise and a body premise".to_string()),
            };
            let inner = d.ctx.extended(param, param_ty.clone());
            if db.ctx != inner || db.term != **body {
                return fail("Lam body premise mismatch".to_string());
            }
            if !d.deps.all_zero() {
                return fail("Lam conclusion annotation must be all-zero".to_string());
            }
            let ct = match &d.ty {
                Type::Closure(ct) => ct,
                _ => return fail("Lam must conclude with a closure type".to_string()),
            };
            let ok = ct.captured.ctx == d.ctx
                && ct.captured.deps == db.deps.prefix(d.ctx.len())
                && ct.param == *param
                && ct.param_dep == db.deps.entries[d.ctx.len()].1
                && ct.param_ty == *param_ty
                && ct.result_ty == db.ty;
            if !ok {
                return fail("Lam closure type does not match the body judgment".to_string());
            }
        }
        (
            TypingRule::Fix,
            Term::Fix {
                fname,
                param,
                param_ty,
                ..
            },
        ) => {
            let db = match d.premises.as_slice() {
                [TypingPremise::Scope(_), TypingPremise::Scope(_), TypingPremise::Typing(t)] => t,
                _ => return fail("Fix requires two scope premises and a body premise".to_string()),
            };
            let ct = match &d.ty {
                Type::Closure(ct) => ct,
                _ => return fail("Fix must conclude with a closure type".to_string()),
            };
            let inner = d
                .ctx
                .extended(fname, d.ty.clone())
                .extended(param, param_ty.clone());
            if db.ctx != inner {
                return fail("Fix body premise context mismatch".to_string());
            }
            if !d.deps.all_zero() {
                return fail("Fix conclusion annotation must be all-zero".to_string());
            }
            let stable = db.deps.prefix(d.ctx.len()) == ct.captured.deps
                && db.deps.entries[d.ctx.len() + 1].1 == ct.param_dep
                && alpha_equal_types(&db.ty, &ct.result_ty);
            if !stable {
                return fail("Fix annotations are not a fixpoint of the body judgment".to_string());
            }
        }
        (TypingRule::Let, Term::Let { name, def, body }) => {
            let ddef = typing_premise(d, 0, path)?;
            let dbody = typing_premise(d, 1, path)?;
            let ds = match d.premises.get(2) {
                Some(TypingPremise::Subst(s)) => s,
                _ => return fail("Let requires a substitution premise".to_string()),
            };
            if ddef.term != **def || ddef.ctx != d.ctx {
                return fail("Let definition premise mismatch".to_string());
            }
            let inner = d.ctx.extended(name, ddef.ty.clone());
            if dbody.ctx != inner || dbody.term != **body {
                return fail("Let body premise mismatch".to_string());
            }
            let phi = dbody.deps.entries[d.ctx.len()].1;
            let expected = dep_sum(&dep_scale(phi, &ddef.deps), &dbody.deps.prefix(d.ctx.len()));
            if d.deps != expected {
                return fail("Let annotation must be φ·Φdef + Φbody".to_string());
            }
            let sc = &ds.conclusion;
            let ok = sc.prefix == d.ctx
                && sc.var == *name
                && sc.deps == ddef.deps
                && sc.suffix.is_empty()
                && sc.ty.as_ref().map(|(s, t)| s == &dbody.ty && t == &d.ty) == Some(true);
            if !ok {
                return fail("Let substitution premise mismatch".to_string());
            }
            subst::validate(ds).map_err(|e| format!("{path}: {e}"))?;
        }
        (TypingRule::App, Term::App(t, u)) => {
            let dfun = typing_premise(d, 0, path)?;
            let darg = typing_premise(d, 1, path)?;
            let ds = match d.premises.get(2) {
                Some(TypingPremise::Subst(s)) => s,
                _ => return fail("App requires a substitution premise".to_string()),
            };
            if dfun.term != **t || dfun.ctx != d.ctx || darg.term != **u || darg.ctx != d.ctx {
                return fail("App premises must type the function and argument".to_string());
            }
            let ct = match &dfun.ty {
                Type::Closure(ct) => ct,
                _ => return fail("App function premise must have a closure type".to_string()),
            };
            if !ct.captured.ctx.embeds_in(&d.ctx) {
                return fail("App captured context does not embed into the context".to_string());
            }
            if !alpha_equal_types(&darg.ty, &ct.param_ty) {
                return fail("App argument type mismatch".to_string());
            }
            let sc = &ds.conclusion;
            let ok = sc.prefix == d.ctx
                && sc.deps == darg.deps
                && sc.suffix.is_empty()
                && sc.ty.as_ref().map(|(_, t)| t == &d.ty) == Some(true);
            if !ok {
                return fail("App substitution premise mismatch".to_string());
            }
            let expected = dep_sum(
                &dfun.deps,
                &dep_sum(
                    &ct.captured.deps.zero_extend(&d.ctx),
                    &dep_scale(ct.param_dep, &darg.deps),
                ),
            );
            if d.deps != expected {
                return fail("App annotation must be Φfun + Φclos + φ·Φarg".to_string());
            }
            subst::validate(ds).map_err(|e| format!("{path}: {e}"))?;
        }
        _ => return fail("rule tag does not match the term shape".to_string()),
    }
    for (i, p) in d.premises.iter().enumerate() {
        if let TypingPremise::Typing(t) = p {
            check_node(t, &format!("{path}.{i}"))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scope::check_type as scope_check_type;

    fn atom(n: &str) -> Type {
        Type::atom(n)
    }

    #[test]
    fn pair_with_lambda_splits_dependencies() {
        // Γ = y:s, z:t ⊢ (y, \(x:r) z) : s * ([y:s^0, z:t^1](x:r^0) -> t)
        // with Φ = {y:1, z:0}.
        let ctx = Context::from_pairs(&[("y", atom("s")), ("z", atom("t"))]);
        let term = Term::pair(Term::var("y"), Term::lam("x", atom("r"), Term::var("z")));
        let inf = infer(&ctx, &term).unwrap();
        assert_eq!(inf.deps, DepVector::from_pairs(&[("y", true), ("z", false)]));
        let cap = AnnotatedContext::from_triples(&[
            ("y", atom("s"), false),
            ("z", atom("t"), true),
        ]);
        let expected = Type::product(
            atom("s"),
            Type::closure(cap, "x", Dep::ZERO, atom("r"), atom("t")),
        );
        assert!(alpha_equal_types(&inf.ty, &expected));
        check_derivation(&inf.derivation).unwrap();
    }

    #[test]
    fn session_program_typing() {
        // Γ = y1:a, y2:b, z:c ⊢ let y = (y1, y2) in (y, \(x:s) z)
        let ctx = Context::from_pairs(&[("y1", atom("a")), ("y2", atom("b")), ("z", atom("c"))]);
        let term = Term::let_in(
            "y",
            Term::pair(Term::var("y1"), Term::var("y2")),
            Term::pair(Term::var("y"), Term::lam("x", atom("s"), Term::var("z"))),
        );
        let inf = infer(&ctx, &term).unwrap();
        assert_eq!(
            inf.deps,
            DepVector::from_pairs(&[("y1", true), ("y2", true), ("z", false)])
        );
        let cap = AnnotatedContext::from_triples(&[
            ("y1", atom("a"), false),
            ("y2", atom("b"), false),
            ("z", atom("c"), true),
        ]);
        let expected = Type::product(
            Type::product(atom("a"), atom("b")),
            Type::closure(cap, "x", Dep::ZERO, atom("s"), atom("c")),
        );
        assert!(alpha_equal_types(&inf.ty, &expected));
        check_derivation(&inf.derivation).unwrap();
    }

    #[test]
    fn identity_in_empty_context() {
        let inf = infer(&Context::empty(), &Term::lam("x", atom("a"), Term::var("x"))).unwrap();
        assert!(inf.deps.is_empty());
        let expected = Type::closure(
            AnnotatedContext::empty(),
            "x",
            Dep::ONE,
            atom("a"),
            atom("a"),
        );
        assert!(alpha_equal_types(&inf.ty, &expected));
    }

    #[test]
    fn let_projection_overapproximates() {
        // let w = (a, b) in pi1(w) marks both a and b as needed.
        let ctx = Context::from_pairs(&[("a", atom("A")), ("b", atom("B"))]);
        let term = Term::let_in(
            "w",
            Term::pair(Term::var("a"), Term::var("b")),
            Term::proj1(Term::var("w")),
        );
        let inf = infer(&ctx, &term).unwrap();
        assert_eq!(inf.deps, DepVector::from_pairs(&[("a", true), ("b", true)]));
        assert_eq!(inf.ty, atom("A"));
    }

    #[test]
    fn application_reanchors_escaping_inner_closure() {
        // let g = \(x:S) \(w:R) x in g a : the inner closure type captured
        // (a, x); removing x re-anchors it to (a, g) with a marked needed.
        let ctx = Context::from_pairs(&[("a", atom("S"))]);
        let term = Term::let_in(
            "g",
            Term::lam("x", atom("S"), Term::lam("w", atom("R"), Term::var("x"))),
            Term::app(Term::var("g"), Term::var("a")),
        );
        let inf = infer(&ctx, &term).unwrap();
        let cap = AnnotatedContext::from_triples(&[("a", atom("S"), true)]);
        let expected = Type::closure(cap, "w", Dep::ZERO, atom("R"), atom("S"));
        assert!(alpha_equal_types(&inf.ty, &expected));
        assert_eq!(inf.deps, DepVector::from_pairs(&[("a", false)]));
        check_derivation(&inf.derivation).unwrap();
    }

    #[test]
    fn lambda_conclusion_is_environment_independent() {
        let ctx = Context::from_pairs(&[("y", atom("s"))]);
        let inf = infer(&ctx, &Term::lam("x", atom("a"), Term::var("y"))).unwrap();
        assert!(inf.deps.all_zero());
    }

    #[test]
    fn inferred_types_are_well_scoped() {
        // Typing respects scoping on every example here.
        let ctx = Context::from_pairs(&[("y", atom("s")), ("z", atom("t"))]);
        let terms = vec![
            Term::pair(Term::var("y"), Term::lam("x", atom("r"), Term::var("z"))),
            Term::let_in("w", Term::var("y"), Term::var("w")),
            Term::app(
                Term::lam("x", atom("s"), Term::var("x")),
                Term::var("y"),
            ),
        ];
        for t in terms {
            let inf = infer(&ctx, &t).unwrap();
            scope_check_type(&ctx, &inf.ty).unwrap();
        }
    }

    #[test]
    fn inference_is_deterministic() {
        let ctx = Context::from_pairs(&[("y", atom("s")), ("z", atom("t"))]);
        let term = Term::let_in(
            "w",
            Term::pair(Term::var("y"), Term::var("z")),
            Term::proj2(Term::var("w")),
        );
        let a = infer(&ctx, &term).unwrap();
        let b = infer(&ctx, &term).unwrap();
        assert!(alpha_equal_types(&a.ty, &b.ty));
        assert_eq!(a.deps, b.deps);
    }

    #[test]
    fn unbound_variable_is_reported() {
        match infer(&Context::empty(), &Term::var("nope")) {
            Err(e) => assert!(matches!(e.kind, TypeErrorKind::Unbound(_))),
            Ok(_) => panic!("expected unbound variable error"),
        }
    }

    #[test]
    fn projecting_a_function_fails() {
        let ctx = Context::from_pairs(&[("y", atom("s"))]);
        let term = Term::proj1(Term::lam("x", atom("a"), Term::var("x")));
        assert!(infer(&ctx, &term).is_err());
    }

    #[test]
    fn applying_a_non_function_fails() {
        let ctx = Context::from_pairs(&[("y", atom("s"))]);
        let term = Term::app(Term::var("y"), Term::var("y"));
        match infer(&ctx, &term) {
            Err(e) => assert!(matches!(e.kind, TypeErrorKind::NotAFunction(_))),
            Ok(_) => panic!("expected NotAFunction"),
        }
    }

    #[test]
    fn escape_through_let_is_rejected() {
        // let x = u in let y = u in
        //   let f = \(g:[u:U^0, x:U^1](z:U^0) -> U) g u in f
        // must fail: x occurs in the argument type of f when x leaves scope.
        let ctx = Context::from_pairs(&[("u", atom("U"))]);
        let gcap = AnnotatedContext::from_triples(&[
            ("u", atom("U"), false),
            ("x", atom("U"), true),
        ]);
        let gty = Type::closure(gcap, "z", Dep::ZERO, atom("U"), atom("U"));
        let term = Term::let_in(
            "x",
            Term::var("u"),
            Term::let_in(
                "y",
                Term::var("u"),
                Term::let_in(
                    "f",
                    Term::lam("g", gty, Term::app(Term::var("g"), Term::var("u"))),
                    Term::var("f"),
                ),
            ),
        );
        match infer(&ctx, &term) {
            Err(e) => match e.kind {
                TypeErrorKind::Subst(SubstError::Escape { var, .. }) => assert_eq!(var, "x"),
                other => panic!("expected an escape error for x, got {other:?}"),
            },
            Ok(inf) => panic!("expected an escape error, got type {:?}", inf.ty),
        }
    }

    #[test]
    fn fix_infers_stable_annotations() {
        // fix f(x:a):a = x behaves like the identity; Ψ is all-zero.
        let ctx = Context::from_pairs(&[("y", atom("a"))]);
        let term = Term::Fix {
            fname: "f".to_string(),
            param: "x".to_string(),
            param_ty: atom("a"),
            result_ty: atom("a"),
            body: Box::new(Term::var("x")),
        };
        let inf = infer(&ctx, &term).unwrap();
        assert!(inf.deps.all_zero());
        match &inf.ty {
            Type::Closure(ct) => {
                assert!(ct.captured.deps.all_zero());
                assert_eq!(ct.param_dep, Dep::ONE);
            }
            other => panic!("expected a closure type, got {other:?}"),
        }
        check_derivation(&inf.derivation).unwrap();
    }

    #[test]
    fn fix_using_environment_marks_it() {
        // fix f(x:a):b = y depends on y at application time.
        let ctx = Context::from_pairs(&[("y", atom("b"))]);
        let term = Term::Fix {
            fname: "f".to_string(),
            param: "x".to_string(),
            param_ty: atom("a"),
            result_ty: atom("b"),
            body: Box::new(Term::var("y")),
        };
        let inf = infer(&ctx, &term).unwrap();
        match &inf.ty {
            Type::Closure(ct) => {
                assert_eq!(
                    ct.captured.deps,
                    DepVector::from_pairs(&[("y", true)])
                );
                assert_eq!(ct.param_dep, Dep::ZERO);
            }
            other => panic!("expected a closure type, got {other:?}"),
        }
    }

    #[test]
    fn tampered_derivations_are_rejected() {
        let ctx = Context::from_pairs(&[("y", atom("s")), ("z", atom("t"))]);
        let term = Term::pair(Term::var("y"), Term::var("z"));
        let inf = infer(&ctx, &term).unwrap();
        check_derivation(&inf.derivation).unwrap();

        // Tampered root annotation.
        let mut bad = inf.derivation.clone();
        bad.deps = DepVector::from_pairs(&[("y", false), ("z", false)]);
        assert!(check_derivation(&bad).is_err());

        // Swapped premise order.
        let mut swapped = inf.derivation.clone();
        swapped.premises.reverse();
        assert!(check_derivation(&swapped).is_err());
    }
}
