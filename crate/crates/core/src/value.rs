//! Runtime values, value substitution and value typing.
//!
//! Closures capture nothing at creation: they record the pending domain and
//! absorb values one at a time, most recently bound first, as binders leave
//! scope. The captured vector therefore reads in context order (outermost
//! binder first) because each capture prepends.

use thiserror::Error;

use crate::scope::{self, ScopeDerivation, ScopeError};
use crate::subst::{subst_sequence, SubstDerivation, SubstError};
use crate::syntax::{
    alpha_equal_types, dep_sum, AnnotatedContext, ClosureType, Context, Dep, DepVector, Name,
    Term, Type,
};
use crate::typing::{self, TypeError, TypingDerivation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureCode {
    Lam {
        param: Name,
        param_ty: Type,
        body: Term,
    },
    Fix {
        fname: Name,
        param: Name,
        param_ty: Type,
        result_ty: Type,
        body: Term,
    },
}

impl ClosureCode {
    pub fn param(&self) -> &Name {
        match self {
            ClosureCode::Lam { param, .. } | ClosureCode::Fix { param, .. } => param,
        }
    }

    pub fn param_ty(&self) -> &Type {
        match self {
            ClosureCode::Lam { param_ty, .. } | ClosureCode::Fix { param_ty, .. } => param_ty,
        }
    }

    pub fn body(&self) -> &Term {
        match self {
            ClosureCode::Lam { body, .. } | ClosureCode::Fix { body, .. } => body,
        }
    }

    pub fn as_term(&self) -> Term {
        match self {
            ClosureCode::Lam {
                param,
                param_ty,
                body,
            } => Term::Lam {
                param: param.clone(),
                param_ty: param_ty.clone(),
                body: Box::new(body.clone()),
            },
            ClosureCode::Fix {
                fname,
                param,
                param_ty,
                result_ty,
                body,
            } => Term::Fix {
                fname: fname.clone(),
                param: param.clone(),
                param_ty: param_ty.clone(),
                result_ty: result_ty.clone(),
                body: Box::new(body.clone()),
            },
        }
    }
}

/// One captured binding. `deps` is the dependency vector of the definition
/// that produced the value, recorded when the binding was captured; it is
/// the witness used by value typing. Equality of values ignores it.
#[derive(Debug, Clone)]
pub struct CapturedBinding {
    pub name: Name,
    pub value: Value,
    pub deps: Option<DepVector>,
}

#[derive(Debug, Clone)]
pub enum Value {
    AtomConst { atom: Name, constant: Name },
    Pair(Box<Value>, Box<Value>),
    Closure {
        /// Not-yet-captured variables, in context order.
        pending: Vec<Name>,
        /// Captured bindings in context order; captures prepend.
        captured: Vec<CapturedBinding>,
        code: ClosureCode,
    },
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        match (self, other) {
            (
                Value::AtomConst { atom: a, constant: c },
                Value::AtomConst { atom: a2, constant: c2 },
            ) => a == a2 && c == c2,
            (Value::Pair(a, b), Value::Pair(x, y)) => a == x && b == y,
            (
                Value::Closure {
                    pending: p1,
                    captured: c1,
                    code: k1,
                },
                Value::Closure {
                    pending: p2,
                    captured: c2,
                    code: k2,
                },
            ) => {
                p1 == p2
                    && k1 == k2
                    && c1.len() == c2.len()
                    && c1
                        .iter()
                        .zip(c2)
                        .all(|(a, b)| a.name == b.name && a.value == b.value)
            }
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Value {
    pub fn atom(atom: &str, constant: &str) -> Value {
        Value::AtomConst {
            atom: atom.to_string(),
            constant: constant.to_string(),
        }
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }
}

/// An ordered mapping from variables to values, mirroring a typing context.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Valuation {
    pub entries: Vec<(Name, Value)>,
}

impl Valuation {
    pub fn empty() -> Valuation {
        Valuation::default()
    }

    pub fn from_pairs(pairs: &[(&str, Value)]) -> Valuation {
        Valuation {
            entries: pairs
                .iter()
                .map(|(n, v)| (n.to_string(), v.clone()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, name: Name, value: Value) {
        self.entries.push((name, value));
    }

    pub fn extended(&self, name: &str, value: Value) -> Valuation {
        let mut out = self.clone();
        out.push(name.to_string(), value);
        out
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        self.entries
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    pub fn domain(&self) -> Vec<Name> {
        self.entries.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn prefix(&self, len: usize) -> Valuation {
        Valuation {
            entries: self.entries[..len].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("cannot substitute `{var}`: it is pending but not the most recent binding of [{}]",
            pending.join(","))]
    MalformedPending { var: Name, pending: Vec<Name> },
    #[error("value does not inhabit the type at {path}: {detail}")]
    TypeMismatch { path: String, detail: String },
    #[error("closure body does not type: {0}")]
    Body(#[from] TypeError),
    #[error("{0}")]
    Subst(#[from] SubstError),
    #[error("{0}")]
    Scope(#[from] ScopeError),
}

fn mismatch(path: &str, detail: impl Into<String>) -> ValueError {
    ValueError::TypeMismatch {
        path: path.to_string(),
        detail: detail.into(),
    }
}

/// w →[y\v] w'. Atoms are unchanged, pairs substitute pointwise, and a
/// closure whose pending list ends with y captures it in first position.
/// The dynamics only ever substitutes the most recently bound variable, so
/// y anywhere else in a pending list is malformed. Previously captured
/// values keep referencing y: the capture order puts y before them, so the
/// binding is back in scope whenever they are used.
pub fn subst_value(w: &Value, var: &Name, v: &Value) -> Result<Value, ValueError> {
    subst_value_impl(w, var, v, None)
}

/// As `subst_value`, recording `deps` (the definition's dependency vector)
/// on each new capture as the witness for later value typing.
pub fn subst_value_recorded(
    w: &Value,
    var: &Name,
    v: &Value,
    deps: &DepVector,
) -> Result<Value, ValueError> {
    subst_value_impl(w, var, v, Some(deps))
}

fn subst_value_impl(
    w: &Value,
    var: &Name,
    v: &Value,
    deps: Option<&DepVector>,
) -> Result<Value, ValueError> {
    match w {
        Value::AtomConst { .. } => Ok(w.clone()),
        Value::Pair(a, b) => Ok(Value::pair(
            subst_value_impl(a, var, v, deps)?,
            subst_value_impl(b, var, v, deps)?,
        )),
        Value::Closure {
            pending,
            captured,
            code,
        } => match pending.iter().position(|n| n == var) {
            None => Ok(w.clone()),
            Some(pos) if pos == pending.len() - 1 => {
                let mut new_captured = Vec::with_capacity(captured.len() + 1);
                new_captured.push(CapturedBinding {
                    name: var.clone(),
                    value: v.clone(),
                    deps: deps.cloned(),
                });
                new_captured.extend(captured.iter().cloned());
                Ok(Value::Closure {
                    pending: pending[..pos].to_vec(),
                    captured: new_captured,
                    code: code.clone(),
                })
            }
            Some(_) => Err(ValueError::MalformedPending {
                var: var.clone(),
                pending: pending.clone(),
            }),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueTypingRule {
    Atom,
    Product,
    Closure,
    ClosureFix,
}

impl ValueTypingRule {
    pub fn tag(self) -> &'static str {
        match self {
            ValueTypingRule::Atom => "Value-Atom",
            ValueTypingRule::Product => "Value-Product",
            ValueTypingRule::Closure => "Value-Closure",
            ValueTypingRule::ClosureFix => "Value-Closure-Fix",
        }
    }
}

#[derive(Debug, Clone)]
pub enum ValueTypingPremise {
    Scope(ScopeDerivation),
    Value(ValueTypingDerivation),
    Body(TypingDerivation),
    /// The chosen internal witnesses (ψ_i implicit in the body judgment,
    /// Ψ_i listed here) and the substitution chain they drive.
    Chain {
        psis: Vec<DepVector>,
        steps: Vec<SubstDerivation>,
    },
}

#[derive(Debug, Clone)]
pub struct ValueTypingDerivation {
    pub rule: ValueTypingRule,
    pub ctx: Context,
    pub value: Value,
    pub ty: Type,
    pub premises: Vec<ValueTypingPremise>,
}

impl ValueTypingDerivation {
    /// The captured-value witnesses (Ψ_i, context order) of a closure node.
    pub fn chain_witnesses(&self) -> Option<&[DepVector]> {
        self.premises.iter().find_map(|p| match p {
            ValueTypingPremise::Chain { psis, .. } => Some(psis.as_slice()),
            _ => None,
        })
    }
}

/// Infers the canonical type of a value in a context: atoms and pairs are
/// structural; a closure's type is rebuilt from its pending prefix, its
/// captured values and a re-inference of its body.
pub fn synth_value_type(
    ctx: &Context,
    v: &Value,
) -> Result<(Type, ValueTypingDerivation), ValueError> {
    match v {
        Value::AtomConst { atom, .. } => {
            let sd = scope::check_context(ctx)?;
            let ty = Type::Atom(atom.clone());
            Ok((
                ty.clone(),
                ValueTypingDerivation {
                    rule: ValueTypingRule::Atom,
                    ctx: ctx.clone(),
                    value: v.clone(),
                    ty,
                    premises: vec![ValueTypingPremise::Scope(sd)],
                },
            ))
        }
        Value::Pair(a, b) => {
            let (ta, da) = synth_value_type(ctx, a)?;
            let (tb, db) = synth_value_type(ctx, b)?;
            let ty = Type::product(ta, tb);
            Ok((
                ty.clone(),
                ValueTypingDerivation {
                    rule: ValueTypingRule::Product,
                    ctx: ctx.clone(),
                    value: v.clone(),
                    ty,
                    premises: vec![
                        ValueTypingPremise::Value(da),
                        ValueTypingPremise::Value(db),
                    ],
                },
            ))
        }
        Value::Closure {
            pending,
            captured,
            code,
        } => {
            // The pending list embeds into the ambient telescope; bindings
            // introduced by weakening may interleave.
            let cap_ctx = ctx.select(pending).ok_or_else(|| {
                mismatch(
                    "closure",
                    format!(
                        "pending [{}] does not embed into the ambient context [{}]",
                        pending.join(","),
                        ctx.domain().join(",")
                    ),
                )
            })?;
            let deriv = closure_synth(ctx, &cap_ctx, captured, code, v)?;
            Ok((deriv.ty.clone(), deriv))
        }
    }
}

/// Checks Γ ⊢ v : σ and returns the derivation.
pub fn check_value(
    ctx: &Context,
    v: &Value,
    ty: &Type,
) -> Result<ValueTypingDerivation, ValueError> {
    check_value_at(ctx, v, ty, "value")
}

fn check_value_at(
    ctx: &Context,
    v: &Value,
    ty: &Type,
    path: &str,
) -> Result<ValueTypingDerivation, ValueError> {
    match (v, ty) {
        (Value::AtomConst { atom, .. }, Type::Atom(a)) => {
            if atom != a {
                return Err(mismatch(path, format!("atom `{atom}` is not `{a}`")));
            }
            let sd = scope::check_context(ctx)?;
            Ok(ValueTypingDerivation {
                rule: ValueTypingRule::Atom,
                ctx: ctx.clone(),
                value: v.clone(),
                ty: ty.clone(),
                premises: vec![ValueTypingPremise::Scope(sd)],
            })
        }
        (Value::Pair(a, b), Type::Product(ta, tb)) => {
            let da = check_value_at(ctx, a, ta, &format!("{path}.1"))?;
            let db = check_value_at(ctx, b, tb, &format!("{path}.2"))?;
            Ok(ValueTypingDerivation {
                rule: ValueTypingRule::Product,
                ctx: ctx.clone(),
                value: v.clone(),
                ty: ty.clone(),
                premises: vec![
                    ValueTypingPremise::Value(da),
                    ValueTypingPremise::Value(db),
                ],
            })
        }
        (
            Value::Closure {
                pending, captured, code, ..
            },
            Type::Closure(ct),
        ) => {
            if ct.captured.ctx.domain() != *pending {
                return Err(mismatch(
                    path,
                    format!(
                        "pending [{}] differs from the type's captured domain [{}]",
                        pending.join(","),
                        ct.captured.ctx.domain().join(",")
                    ),
                ));
            }
            if !ct.captured.ctx.embeds_in(ctx) {
                return Err(mismatch(
                    path,
                    "the type's captured context does not embed into the ambient context",
                ));
            }
            if !alpha_equal_types(code.param_ty(), &ct.param_ty) {
                return Err(mismatch(path, "closure parameter annotation differs"));
            }
            let deriv = closure_synth(ctx, &ct.captured.ctx, captured, code, v)?;
            if !alpha_equal_types(&deriv.ty, ty) {
                return Err(mismatch(
                    path,
                    format!("closure types differ: computed {:?}, expected {:?}", deriv.ty, ty),
                ));
            }
            Ok(ValueTypingDerivation {
                ty: ty.clone(),
                ..deriv
            })
        }
        _ => Err(mismatch(path, "value shape does not match the type")),
    }
}

/// Shared spine of Value-Closure / Value-Closure-Fix: types the captured
/// values, re-infers the body, then substitutes the captured variables out
/// of the result type, rightmost first. Recorded witnesses drive the chain;
/// a capture without one falls back to the all-zero vector, the dependency
/// of re-creating the value as a literal.
fn closure_synth(
    ctx: &Context,
    cap_ctx: &Context,
    captured: &[CapturedBinding],
    code: &ClosureCode,
    v: &Value,
) -> Result<ValueTypingDerivation, ValueError> {
    let ambient_scope = scope::check_context(ctx)?;

    let mut inner = cap_ctx.clone();
    let mut premises = vec![ValueTypingPremise::Scope(ambient_scope)];
    let mut psis = Vec::new();
    for cb in captured {
        let (ti, di) = synth_value_type(&inner, &cb.value)?;
        premises.push(ValueTypingPremise::Value(di));
        let psi = match &cb.deps {
            Some(recorded) => {
                // The witness was recorded over the live context at capture
                // time, which may interleave extra bindings with this
                // telescope; re-read it by name, rejecting any needed entry
                // the telescope cannot account for.
                let lost = recorded
                    .entries
                    .iter()
                    .find(|(n, d)| d.is_needed() && inner.position(n).is_none());
                if let Some((n, _)) = lost {
                    return Err(mismatch(
                        "closure",
                        format!(
                            "recorded witness for `{}` needs `{n}`, absent from [{}]",
                            cb.name,
                            inner.domain().join(",")
                        ),
                    ));
                }
                recorded.aligned_to(&inner)
            }
            None => DepVector::zeros(&inner),
        };
        psis.push(psi);
        inner.push(cb.name.clone(), ti);
    }

    let (rule, body_inf) = match code {
        ClosureCode::Lam {
            param,
            param_ty,
            body,
        } => {
            let body_ctx = inner.extended(param, param_ty.clone());
            (ValueTypingRule::Closure, typing::infer(&body_ctx, body)?)
        }
        ClosureCode::Fix {
            fname,
            param,
            param_ty,
            result_ty,
            body,
        } => {
            let inf = infer_fix_body(&inner, fname, param, param_ty, result_ty, body)?;
            (ValueTypingRule::ClosureFix, inf)
        }
    };

    // Γ^Φ, (x_i:τ_i^ψ_i), x:σ^φ ⊢ τ →[(x_i)\(Ψ_i)] Γ^Φ', x:σ^φ ⊢ τ'
    let mut actx = AnnotatedContext::empty();
    for (e, (_, d)) in inner
        .entries
        .iter()
        .zip(&body_inf.deps.prefix(inner.len()).entries)
    {
        actx.push(e.name.clone(), e.ty.clone(), *d);
    }
    let param_dep = body_inf.deps.entries.last().unwrap().1;
    actx.push(code.param().clone(), code.param_ty().clone(), param_dep);

    let (out_ctx, out_ty, steps) =
        subst_sequence(&actx, cap_ctx.len(), &psis, &body_inf.ty)?;

    let final_deps = out_ctx.deps.prefix(cap_ctx.len());
    let ty = Type::Closure(Box::new(ClosureType {
        captured: AnnotatedContext::new(cap_ctx.clone(), final_deps),
        param: code.param().clone(),
        param_dep,
        param_ty: code.param_ty().clone(),
        result_ty: out_ty,
    }));

    premises.push(ValueTypingPremise::Body(body_inf.derivation));
    premises.push(ValueTypingPremise::Chain { psis, steps });
    Ok(ValueTypingDerivation {
        rule,
        ctx: ctx.clone(),
        value: v.clone(),
        ty,
        premises,
    })
}

/// Body typing for a fix closure: the assumed annotations on the
/// self-reference start all-zero and grow until stable, as in inference.
fn infer_fix_body(
    inner: &Context,
    fname: &Name,
    param: &Name,
    param_ty: &Type,
    result_ty: &Type,
    body: &Term,
) -> Result<typing::Inference, ValueError> {
    let mut psi = DepVector::zeros(inner);
    let mut phi = Dep::ZERO;
    for _ in 0..inner.len() + 2 {
        let fty = Type::Closure(Box::new(ClosureType {
            captured: AnnotatedContext::new(inner.clone(), psi.clone()),
            param: param.clone(),
            param_dep: phi,
            param_ty: param_ty.clone(),
            result_ty: result_ty.clone(),
        }));
        let body_ctx = inner
            .extended(fname, fty)
            .extended(param, param_ty.clone());
        let inf = typing::infer(&body_ctx, body)?;
        if !alpha_equal_types(&inf.ty, result_ty) {
            return Err(mismatch(
                "fix body",
                "body type differs from the annotated result type",
            ));
        }
        let next_psi = dep_sum(&psi, &inf.deps.prefix(inner.len()));
        let next_phi = phi.or(inf.deps.entries[inner.len() + 1].1);
        if next_psi == psi && next_phi == phi {
            // Drop the f entry so the chain sees Γ, (x_i), x only.
            let mut deps = inf.deps.prefix(inner.len());
            deps.push(param.clone(), inf.deps.entries[inner.len() + 1].1);
            return Ok(typing::Inference {
                deps,
                ty: inf.ty.clone(),
                derivation: inf.derivation,
            });
        }
        psi = next_psi;
        phi = next_phi;
    }
    Err(mismatch("fix body", "annotations did not stabilize"))
}

/// V : Γ ⊢ with diagnostics.
pub fn check_valuation_detailed(
    valuation: &Valuation,
    ctx: &Context,
) -> Result<Vec<ValueTypingDerivation>, ValueError> {
    if valuation.len() != ctx.len() {
        return Err(mismatch(
            "valuation",
            format!(
                "length {} differs from context length {}",
                valuation.len(),
                ctx.len()
            ),
        ));
    }
    let mut derivs = Vec::new();
    for (i, ((name, value), entry)) in valuation.entries.iter().zip(&ctx.entries).enumerate() {
        if *name != entry.name {
            return Err(mismatch(
                "valuation",
                format!("binding {i} is `{name}`, expected `{}`", entry.name),
            ));
        }
        derivs.push(check_value_at(
            &ctx.prefix(i),
            value,
            &entry.ty,
            &format!("valuation.{name}"),
        )?);
    }
    Ok(derivs)
}

/// V : Γ ⊢, as a plain boolean.
pub fn check_valuation(valuation: &Valuation, ctx: &Context) -> bool {
    check_valuation_detailed(valuation, ctx).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom_ty(n: &str) -> Type {
        Type::atom(n)
    }

    fn lam_closure(pending: &[&str], captured: Vec<CapturedBinding>, param: &str, pty: Type, body: Term) -> Value {
        Value::Closure {
            pending: pending.iter().map(|s| s.to_string()).collect(),
            captured,
            code: ClosureCode::Lam {
                param: param.to_string(),
                param_ty: pty,
                body,
            },
        }
    }

    #[test]
    fn subst_moves_last_pending_to_front() {
        // ([x,y], ∅, \z.y) with y↦v becomes ([x], (y↦v), \z.y)
        let v = Value::atom("a", "c0");
        let w = lam_closure(&["x", "y"], vec![], "z", atom_ty("t"), Term::var("y"));
        let out = subst_value(&w, &"y".to_string(), &v).unwrap();
        match &out {
            Value::Closure { pending, captured, .. } => {
                assert_eq!(pending, &vec!["x".to_string()]);
                assert_eq!(captured.len(), 1);
                assert_eq!(captured[0].name, "y");
                assert_eq!(captured[0].value, v);
            }
            other => panic!("expected a closure, got {other:?}"),
        }
    }

    #[test]
    fn subst_leaves_atoms_and_foreign_closures() {
        let v = Value::atom("a", "c0");
        assert_eq!(subst_value(&v, &"y".to_string(), &v).unwrap(), v);
        let w = lam_closure(&["x"], vec![], "z", atom_ty("t"), Term::var("z"));
        assert_eq!(subst_value(&w, &"y".to_string(), &v).unwrap(), w);
    }

    #[test]
    fn subst_rejects_buried_pending_name() {
        let v = Value::atom("a", "c0");
        let w = lam_closure(&["y", "x"], vec![], "z", atom_ty("t"), Term::var("y"));
        assert!(matches!(
            subst_value(&w, &"y".to_string(), &v),
            Err(ValueError::MalformedPending { .. })
        ));
    }

    #[test]
    fn atom_constant_checks_against_its_atom() {
        let ctx = Context::from_pairs(&[("x", atom_ty("a"))]);
        let v = Value::atom("a", "c0");
        assert!(check_value(&ctx, &v, &atom_ty("a")).is_ok());
        assert!(check_value(&ctx, &v, &atom_ty("b")).is_err());
    }

    #[test]
    fn ill_typed_pair_component_reports_mismatch() {
        let ctx = Context::empty();
        let v = Value::pair(Value::atom("a", "c0"), Value::atom("b", "c1"));
        let ty = Type::product(atom_ty("a"), atom_ty("a"));
        assert!(matches!(
            check_value(&ctx, &v, &ty),
            Err(ValueError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn captured_closure_checks_with_recorded_witness() {
        // The closure produced by `let y = x in \(z:t) y` under x↦v:
        // ([x], (y↦v), \z.y) : [x:a^1](z:t^0) -> a
        let ctx = Context::from_pairs(&[("x", atom_ty("a"))]);
        let v = Value::atom("a", "c0");
        let captured = vec![CapturedBinding {
            name: "y".to_string(),
            value: v,
            deps: Some(DepVector::from_pairs(&[("x", true)])),
        }];
        let w = lam_closure(&["x"], captured, "z", atom_ty("t"), Term::var("y"));
        let cap = AnnotatedContext::from_triples(&[("x", atom_ty("a"), true)]);
        let ty = Type::closure(cap, "z", Dep::ZERO, atom_ty("t"), atom_ty("a"));
        let deriv = check_value(&ctx, &w, &ty).unwrap();
        assert_eq!(deriv.rule, ValueTypingRule::Closure);
        assert_eq!(deriv.chain_witnesses().unwrap().len(), 1);
    }

    #[test]
    fn stale_annotation_is_rejected() {
        // Same closure as above but typed with x marked unneeded.
        let ctx = Context::from_pairs(&[("x", atom_ty("a"))]);
        let captured = vec![CapturedBinding {
            name: "y".to_string(),
            value: Value::atom("a", "c0"),
            deps: Some(DepVector::from_pairs(&[("x", true)])),
        }];
        let w = lam_closure(&["x"], captured, "z", atom_ty("t"), Term::var("y"));
        let cap = AnnotatedContext::from_triples(&[("x", atom_ty("a"), false)]);
        let ty = Type::closure(cap, "z", Dep::ZERO, atom_ty("t"), atom_ty("a"));
        assert!(check_value(&ctx, &w, &ty).is_err());
    }

    #[test]
    fn valuation_checking_is_ordered() {
        let ctx = Context::from_pairs(&[("x", atom_ty("a")), ("y", atom_ty("b"))]);
        let good = Valuation::from_pairs(&[
            ("x", Value::atom("a", "c0")),
            ("y", Value::atom("b", "c0")),
        ]);
        assert!(check_valuation(&good, &ctx));
        let swapped = Valuation::from_pairs(&[
            ("y", Value::atom("b", "c0")),
            ("x", Value::atom("a", "c0")),
        ]);
        assert!(!check_valuation(&swapped, &ctx));
        assert!(check_valuation(&Valuation::empty(), &Context::empty()));
    }

    #[test]
    fn synth_matches_check_on_fresh_closures() {
        let ctx = Context::from_pairs(&[("x", atom_ty("a"))]);
        let w = lam_closure(&["x"], vec![], "z", atom_ty("t"), Term::var("x"));
        let (ty, _) = synth_value_type(&ctx, &w).unwrap();
        check_value(&ctx, &w, &ty).unwrap();
        match &ty {
            Type::Closure(ct) => {
                assert_eq!(ct.captured.deps, DepVector::from_pairs(&[("x", true)]));
                assert_eq!(ct.param_dep, Dep::ZERO);
            }
            other => panic!("expected a closure type, got {other:?}"),
        }
    }
}
