//! Type and context substitution: removing a variable from the closure
//! types that capture it, merging its dependency annotation with the
//! dependency vector of its definition.
//!
//! The judgment is Γ, y:ρ, Δ ⊢ σ →[y\Ψ] Γ, Δ' ⊢ τ with Ψ ranging over Γ.
//! Δ and Δ' always share a domain: only closure annotations inside the
//! types change.

use thiserror::Error;

use crate::syntax::{
    alpha_equal_types, dep_scale, dep_sum, AnnotatedContext, Context, DepVector, Name, Type,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    /// The substituted variable occurs in a contravariant (function
    /// argument) position whose type the substitution would alter; such an
    /// escape of `var` out of its scope must be rejected.
    #[error("variable `{var}` escapes its scope in a function argument type (at {path})")]
    Escape { var: Name, path: String },
    #[error("internal substitution invariant violated: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstRule {
    ContextNil,
    Context,
    Atom,
    Product,
    Closure,
    ClosureNotin,
}

impl SubstRule {
    pub fn tag(self) -> &'static str {
        match self {
            SubstRule::ContextNil => "Subst-Context-Nil",
            SubstRule::Context => "Subst-Context",
            SubstRule::Atom => "Subst-Atom",
            SubstRule::Product => "Subst-Product",
            SubstRule::Closure => "Subst-Closure",
            SubstRule::ClosureNotin => "Subst-Closure-Notin",
        }
    }
}

/// One substitution judgment, for contexts (`ty` is None) or types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstJudgment {
    pub prefix: Context,
    pub var: Name,
    pub var_ty: Type,
    pub suffix: Context,
    pub deps: DepVector,
    pub out_suffix: Context,
    /// (input type, output type) for type judgments.
    pub ty: Option<(Type, Type)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstDerivation {
    pub rule: SubstRule,
    pub conclusion: SubstJudgment,
    pub premises: Vec<SubstDerivation>,
}

struct Query<'a> {
    prefix: &'a Context,
    var: &'a Name,
    var_ty: &'a Type,
    deps: &'a DepVector,
}

impl Query<'_> {
    fn judgment(&self, suffix: &Context, out_suffix: &Context, ty: Option<(Type, Type)>) -> SubstJudgment {
        SubstJudgment {
            prefix: self.prefix.clone(),
            var: self.var.clone(),
            var_ty: self.var_ty.clone(),
            suffix: suffix.clone(),
            deps: self.deps.clone(),
            out_suffix: out_suffix.clone(),
            ty,
        }
    }
}

/// Γ, y:ρ, Δ →[y\Ψ] Γ, Δ'
pub fn subst_context(
    prefix: &Context,
    var: &Name,
    var_ty: &Type,
    suffix: &Context,
    deps: &DepVector,
) -> Result<(Context, SubstDerivation), SubstError> {
    check_deps_domain(prefix, deps)?;
    let q = Query { prefix, var, var_ty, deps };
    subst_ctx_rec(&q, suffix)
}

/// Γ, y:ρ, Δ ⊢ σ →[y\Ψ] Γ, Δ' ⊢ τ
pub fn subst_type(
    prefix: &Context,
    var: &Name,
    var_ty: &Type,
    suffix: &Context,
    ty: &Type,
    deps: &DepVector,
) -> Result<(Context, Type, SubstDerivation), SubstError> {
    check_deps_domain(prefix, deps)?;
    let q = Query { prefix, var, var_ty, deps };
    subst_ty_rec(&q, suffix, ty, "type")
}

fn check_deps_domain(prefix: &Context, deps: &DepVector) -> Result<(), SubstError> {
    if deps.matches_context(prefix) {
        Ok(())
    } else {
        Err(SubstError::Internal(format!(
            "substitution vector domain {:?} does not match the prefix {:?}",
            deps.domain(),
            prefix.domain()
        )))
    }
}

fn subst_ctx_rec(q: &Query, suffix: &Context) -> Result<(Context, SubstDerivation), SubstError> {
    if suffix.is_empty() {
        let out = Context::empty();
        return Ok((
            out.clone(),
            SubstDerivation {
                rule: SubstRule::ContextNil,
                conclusion: q.judgment(suffix, &out, None),
                premises: vec![],
            },
        ));
    }
    let last = suffix.entries.last().unwrap();
    let rest = suffix.prefix(suffix.len() - 1);
    let (out_rest, tau, premise) =
        subst_ty_rec(q, &rest, &last.ty, &format!("context entry {}", last.name))?;
    let out = out_rest.extended(&last.name, tau);
    Ok((
        out.clone(),
        SubstDerivation {
            rule: SubstRule::Context,
            conclusion: q.judgment(suffix, &out, None),
            premises: vec![premise],
        },
    ))
}

fn subst_ty_rec(
    q: &Query,
    suffix: &Context,
    ty: &Type,
    path: &str,
) -> Result<(Context, Type, SubstDerivation), SubstError> {
    match ty {
        Type::Atom(_) => {
            let (out, premise) = subst_ctx_rec(q, suffix)?;
            Ok((
                out.clone(),
                ty.clone(),
                SubstDerivation {
                    rule: SubstRule::Atom,
                    conclusion: q.judgment(suffix, &out, Some((ty.clone(), ty.clone()))),
                    premises: vec![premise],
                },
            ))
        }
        Type::Product(a, b) => {
            let (out_a, ta, pa) = subst_ty_rec(q, suffix, a, &format!("{path}.1"))?;
            let (out_b, tb, pb) = subst_ty_rec(q, suffix, b, &format!("{path}.2"))?;
            debug_assert_eq!(out_a, out_b);
            let tau = Type::product(ta, tb);
            Ok((
                out_a.clone(),
                tau.clone(),
                SubstDerivation {
                    rule: SubstRule::Product,
                    conclusion: q.judgment(suffix, &out_a, Some((ty.clone(), tau))),
                    premises: vec![pa, pb],
                },
            ))
        }
        Type::Closure(ct) => {
            let captured = &ct.captured;
            match captured.ctx.position(q.var) {
                None => {
                    // The variable is not part of the captured context, and
                    // a well-scoped telescope cannot mention it anywhere
                    // deeper either: the closure type is unchanged.
                    check_embedding(
                        &captured.ctx,
                        &q.prefix.concat(suffix),
                        "closure not capturing the variable",
                    )?;
                    let (out, premise) = subst_ctx_rec(q, suffix)?;
                    Ok((
                        out.clone(),
                        ty.clone(),
                        SubstDerivation {
                            rule: SubstRule::ClosureNotin,
                            conclusion: q.judgment(suffix, &out, Some((ty.clone(), ty.clone()))),
                            premises: vec![premise],
                        },
                    ))
                }
                Some(pos) => subst_closure(q, suffix, ty, pos, path),
            }
        }
    }
}

/// The captured context splits as A, y:ρ^χ, B with A embedded into Γ and B
/// embedded into Δ. y's annotation merges into the Γ part as Φ1 + χ·Ψ, and
/// the output re-anchors the captured context to the whole of Γ (the
/// closure's pending list tracks the full ambient prefix at runtime),
/// zero-extending Φ1 over the entries A did not mention. When A is all of
/// Γ and B all of Δ this is the figure's rule verbatim.
fn subst_closure(
    q: &Query,
    suffix: &Context,
    ty: &Type,
    pos: usize,
    path: &str,
) -> Result<(Context, Type, SubstDerivation), SubstError> {
    let ct = match ty {
        Type::Closure(ct) => ct,
        _ => unreachable!(),
    };
    let captured = &ct.captured;
    let before = captured.ctx.prefix(pos);
    check_embedding(&before, q.prefix, "captured part before the substituted variable")?;

    let chi = captured.deps.entries[pos].1;
    let after_names: Vec<Name> = captured.ctx.entries[pos + 1..]
        .iter()
        .map(|e| e.name.clone())
        .collect();
    let after_deps = captured.deps.suffix(pos + 1);
    let after_old = suffix.select(&after_names).ok_or_else(|| {
        SubstError::Internal(format!(
            "captured suffix {after_names:?} after `{}` does not embed into the ambient suffix {:?}",
            q.var,
            suffix.domain()
        ))
    })?;

    // Premise: substitution of the whole ambient suffix.
    let (out_suffix, ctx_premise) = subst_ctx_rec(q, suffix)?;

    // Premise: the parameter type must come out unchanged (contravariance).
    let (_, param_out, param_premise) =
        subst_ty_rec(q, &after_old, &ct.param_ty, &format!("{path}.param"))?;
    if !alpha_equal_types(&param_out, &ct.param_ty) {
        return Err(SubstError::Escape {
            var: q.var.clone(),
            path: format!("{path}.param"),
        });
    }

    // Premise: the result type, under the captured suffix plus the binder.
    let result_suffix = after_old.extended(&ct.param, ct.param_ty.clone());
    let (_, result_out, result_premise) =
        subst_ty_rec(q, &result_suffix, &ct.result_ty, &format!("{path}.result"))?;

    // Rebuild the captured context over the full Γ plus the substituted B.
    let mut new_captured = AnnotatedContext::empty();
    let extended = dep_sum(
        &captured.deps.prefix(pos).aligned_to(q.prefix),
        &dep_scale(chi, q.deps),
    );
    for (entry, (_, d)) in q.prefix.entries.iter().zip(&extended.entries) {
        new_captured.push(entry.name.clone(), entry.ty.clone(), *d);
    }
    let after_new = out_suffix
        .select(&after_names)
        .expect("suffix domains are preserved by substitution");
    for (e, (_, d)) in after_new.entries.iter().zip(&after_deps.entries) {
        new_captured.push(e.name.clone(), e.ty.clone(), *d);
    }

    let tau = Type::closure(
        new_captured,
        &ct.param,
        ct.param_dep,
        ct.param_ty.clone(),
        result_out,
    );
    Ok((
        out_suffix.clone(),
        tau.clone(),
        SubstDerivation {
            rule: SubstRule::Closure,
            conclusion: q.judgment(suffix, &out_suffix, Some((ty.clone(), tau))),
            premises: vec![ctx_premise, param_premise, result_premise],
        },
    ))
}

fn check_embedding(part: &Context, whole: &Context, what: &str) -> Result<(), SubstError> {
    let names: Vec<Name> = part.entries.iter().map(|e| e.name.clone()).collect();
    if whole.select(&names).is_some() {
        Ok(())
    } else {
        Err(SubstError::Internal(format!(
            "{what}: captured names {names:?} do not embed in order into {:?}",
            whole.domain()
        )))
    }
}

/// The derived annotated form: Γ^Φ1, y:ρ^χ, Δ^Φ2 ⊢ τ →[y\Ψ]
/// Γ^(Φ1+χ·Ψ), Δ'^Φ2 ⊢ τ'. `at` is the index of y in `actx`.
pub fn subst_annotated(
    actx: &AnnotatedContext,
    at: usize,
    psi: &DepVector,
    ty: &Type,
) -> Result<(AnnotatedContext, Type, SubstDerivation), SubstError> {
    if at >= actx.len() {
        return Err(SubstError::Internal(format!(
            "annotated substitution index {at} out of bounds for a context of length {}",
            actx.len()
        )));
    }
    let prefix = actx.prefix(at);
    let entry = &actx.ctx.entries[at];
    let chi = actx.deps.entries[at].1;
    let suffix = Context {
        entries: actx.ctx.entries[at + 1..].to_vec(),
    };
    let suffix_deps = actx.deps.suffix(at + 1);

    let (out_suffix, tau, deriv) =
        subst_type(&prefix.ctx, &entry.name, &entry.ty, &suffix, ty, psi)?;

    let mut out = AnnotatedContext::empty();
    let merged = dep_sum(&prefix.deps, &dep_scale(chi, psi));
    for (e, (_, d)) in prefix.ctx.entries.iter().zip(&merged.entries) {
        out.push(e.name.clone(), e.ty.clone(), *d);
    }
    for (e, (_, d)) in out_suffix.entries.iter().zip(&suffix_deps.entries) {
        out.push(e.name.clone(), e.ty.clone(), *d);
    }
    Ok((out, tau, deriv))
}

/// Folds the annotated substitution over a contiguous run of entries,
/// rightmost (innermost) first. `psis[i]` is the dependency vector for the
/// entry at `first + i`, ranging over the context before that entry.
pub fn subst_sequence(
    actx: &AnnotatedContext,
    first: usize,
    psis: &[DepVector],
    ty: &Type,
) -> Result<(AnnotatedContext, Type, Vec<SubstDerivation>), SubstError> {
    if first + psis.len() > actx.len() {
        return Err(SubstError::Internal(
            "substitution run exceeds the context".to_string(),
        ));
    }
    let mut ctx = actx.clone();
    let mut ty = ty.clone();
    let mut derivs = Vec::new();
    for i in (0..psis.len()).rev() {
        let (next_ctx, next_ty, d) = subst_annotated(&ctx, first + i, &psis[i], &ty)?;
        ctx = next_ctx;
        ty = next_ty;
        derivs.push(d);
    }
    Ok((ctx, ty, derivs))
}

/// Schema validation: recomputes each node one step from its premises.
pub fn validate(deriv: &SubstDerivation) -> Result<(), String> {
    validate_at(deriv, "root")
}

fn validate_at(d: &SubstDerivation, path: &str) -> Result<(), String> {
    let c = &d.conclusion;
    let fail = |msg: String| Err(format!("{path}: {msg}"));
    if c.suffix.len() != c.out_suffix.len()
        || !c
            .suffix
            .entries
            .iter()
            .zip(&c.out_suffix.entries)
            .all(|(a, b)| a.name == b.name)
    {
        return fail("suffix domains differ between input and output".to_string());
    }
    let same_query = |p: &SubstJudgment| {
        p.prefix == c.prefix && p.var == c.var && p.var_ty == c.var_ty && p.deps == c.deps
    };
    match d.rule {
        SubstRule::ContextNil => {
            if c.ty.is_some() || !c.suffix.is_empty() || !d.premises.is_empty() {
                return fail("Subst-Context-Nil requires an empty suffix".to_string());
            }
        }
        SubstRule::Context => {
            if c.ty.is_some() || c.suffix.is_empty() || d.premises.len() != 1 {
                return fail("Subst-Context requires a nonempty suffix and one premise".to_string());
            }
            let p = &d.premises[0].conclusion;
            let last = c.suffix.entries.last().unwrap();
            let out_last = c.out_suffix.entries.last().unwrap();
            let ok = same_query(p)
                && p.suffix == c.suffix.prefix(c.suffix.len() - 1)
                && p.ty.as_ref().map(|(s, t)| s == &last.ty && t == &out_last.ty) == Some(true)
                && p.out_suffix == c.out_suffix.prefix(c.out_suffix.len() - 1);
            if !ok {
                return fail("Subst-Context premise mismatch".to_string());
            }
        }
        SubstRule::Atom => {
            let (s, t) = match &c.ty {
                Some(p) => p,
                None => return fail("Subst-Atom must be a type judgment".to_string()),
            };
            if !matches!(s, Type::Atom(_)) || s != t || d.premises.len() != 1 {
                return fail("Subst-Atom leaves the atom unchanged".to_string());
            }
            let p = &d.premises[0].conclusion;
            if !(same_query(p) && p.ty.is_none() && p.suffix == c.suffix && p.out_suffix == c.out_suffix)
            {
                return fail("Subst-Atom premise mismatch".to_string());
            }
        }
        SubstRule::Product => {
            let (s, t) = match &c.ty {
                Some(p) => p,
                None => return fail("Subst-Product must be a type judgment".to_string()),
            };
            let ((s1, s2), (t1, t2)) = match (s, t) {
                (Type::Product(a, b), Type::Product(x, y)) => ((a, b), (x, y)),
                _ => return fail("Subst-Product requires product types".to_string()),
            };
            if d.premises.len() != 2 {
                return fail("Subst-Product requires two premises".to_string());
            }
            let p1 = &d.premises[0].conclusion;
            let p2 = &d.premises[1].conclusion;
            let ok = same_query(p1)
                && same_query(p2)
                && p1.ty.as_ref() == Some(&(s1.as_ref().clone(), t1.as_ref().clone()))
                && p2.ty.as_ref() == Some(&(s2.as_ref().clone(), t2.as_ref().clone()))
                && p1.suffix == c.suffix
                && p2.suffix == c.suffix;
            if !ok {
                return fail("Subst-Product premise mismatch".to_string());
            }
        }
        SubstRule::ClosureNotin => {
            let (s, t) = match &c.ty {
                Some(p) => p,
                None => return fail("Subst-Closure-Notin must be a type judgment".to_string()),
            };
            let ct = match s {
                Type::Closure(ct) => ct,
                _ => return fail("Subst-Closure-Notin requires a closure type".to_string()),
            };
            if s != t || ct.captured.ctx.position(&c.var).is_some() || d.premises.len() != 1 {
                return fail(
                    "Subst-Closure-Notin requires an unchanged closure not capturing the variable"
                        .to_string(),
                );
            }
        }
        SubstRule::Closure => {
            let (s, t) = match &c.ty {
                Some(p) => p,
                None => return fail("Subst-Closure must be a type judgment".to_string()),
            };
            let ct = match s {
                Type::Closure(ct) => ct,
                _ => return fail("Subst-Closure requires a closure type".to_string()),
            };
            let pos = match ct.captured.ctx.position(&c.var) {
                Some(p) => p,
                None => return fail("Subst-Closure requires the variable to be captured".to_string()),
            };
            // Recompute the closure output from the recorded premises.
            let out_ct = match t {
                Type::Closure(ct) => ct,
                _ => return fail("Subst-Closure output must be a closure type".to_string()),
            };
            let chi = ct.captured.deps.entries[pos].1;
            let expected_gamma = dep_sum(
                &ct.captured.deps.prefix(pos).aligned_to(&c.prefix),
                &dep_scale(chi, &c.deps),
            );
            let after_len = ct.captured.len() - pos - 1;
            if out_ct.captured.len() != c.prefix.len() + after_len {
                return fail("Subst-Closure output captured context has the wrong length".to_string());
            }
            let gamma_ok = out_ct.captured.deps.prefix(c.prefix.len()) == expected_gamma
                && out_ct
                    .captured
                    .ctx
                    .prefix(c.prefix.len())
                    .entries
                    .iter()
                    .zip(&c.prefix.entries)
                    .all(|(a, b)| a.name == b.name && a.ty == b.ty);
            if !gamma_ok {
                return fail("Subst-Closure output Γ part does not match Φ1 + χ·Ψ".to_string());
            }
            let after_names: Vec<Name> = ct.captured.ctx.entries[pos + 1..]
                .iter()
                .map(|e| e.name.clone())
                .collect();
            let expected_after = match c.out_suffix.select(&after_names) {
                Some(sel) => sel,
                None => return fail("Subst-Closure B part does not embed in the output suffix".to_string()),
            };
            let delta_ok = out_ct.captured.deps.suffix(c.prefix.len())
                == ct.captured.deps.suffix(pos + 1)
                && out_ct
                    .captured
                    .ctx
                    .entries[c.prefix.len()..]
                    .iter()
                    .zip(&expected_after.entries)
                    .all(|(a, b)| a.name == b.name && a.ty == b.ty);
            if !delta_ok {
                return fail("Subst-Closure output Δ part mismatch".to_string());
            }
            if d.premises.len() != 3 {
                return fail("Subst-Closure requires three premises".to_string());
            }
            let param = &d.premises[1].conclusion;
            match &param.ty {
                Some((ps, pt)) if ps == &ct.param_ty && alpha_equal_types(ps, pt) => {}
                _ => return fail("Subst-Closure parameter type must be unchanged".to_string()),
            }
            let result = &d.premises[2].conclusion;
            match &result.ty {
                Some((rs, rt)) if rs == &ct.result_ty && rt == &out_ct.result_ty => {}
                _ => return fail("Subst-Closure result premise mismatch".to_string()),
            }
        }
    }
    for (i, p) in d.premises.iter().enumerate() {
        validate_at(p, &format!("{path}.{i}"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scope::{check_context, check_type};
    use crate::syntax::Dep;

    fn atom(n: &str) -> Type {
        Type::atom(n)
    }

    /// The session shape: a closure capturing y1,y2,z,y loses y.
    fn session_closure(chi_y: bool) -> Type {
        let cap = AnnotatedContext::from_triples(&[
            ("y1", atom("a"), false),
            ("y2", atom("b"), false),
            ("z", atom("c"), true),
            ("y", Type::product(atom("a"), atom("b")), chi_y),
        ]);
        Type::closure(cap, "x", Dep::ZERO, atom("s"), atom("c"))
    }

    fn session_prefix() -> Context {
        Context::from_pairs(&[("y1", atom("a")), ("y2", atom("b")), ("z", atom("c"))])
    }

    #[test]
    fn empty_suffix_substitutes_to_empty() {
        let prefix = session_prefix();
        let psi = DepVector::from_pairs(&[("y1", true), ("y2", true), ("z", false)]);
        let (out, d) = subst_context(
            &prefix,
            &"y".to_string(),
            &Type::product(atom("a"), atom("b")),
            &Context::empty(),
            &psi,
        )
        .unwrap();
        assert!(out.is_empty());
        validate(&d).unwrap();
    }

    #[test]
    fn closure_drops_unneeded_variable() {
        // χ = 0: the captured annotation is unchanged, y simply disappears.
        let prefix = session_prefix();
        let psi = DepVector::from_pairs(&[("y1", true), ("y2", true), ("z", false)]);
        let (out, tau, d) = subst_type(
            &prefix,
            &"y".to_string(),
            &Type::product(atom("a"), atom("b")),
            &Context::empty(),
            &session_closure(false),
            &psi,
        )
        .unwrap();
        assert!(out.is_empty());
        let expected_cap = AnnotatedContext::from_triples(&[
            ("y1", atom("a"), false),
            ("y2", atom("b"), false),
            ("z", atom("c"), true),
        ]);
        let expected = Type::closure(expected_cap, "x", Dep::ZERO, atom("s"), atom("c"));
        assert!(alpha_equal_types(&tau, &expected));
        validate(&d).unwrap();
    }

    #[test]
    fn closure_merges_definition_deps_when_needed() {
        // χ = 1: the Γ annotation becomes Φ1 + Ψ = {y1:1, y2:1, z:1}.
        let prefix = session_prefix();
        let psi = DepVector::from_pairs(&[("y1", true), ("y2", true), ("z", false)]);
        let (_, tau, d) = subst_type(
            &prefix,
            &"y".to_string(),
            &Type::product(atom("a"), atom("b")),
            &Context::empty(),
            &session_closure(true),
            &psi,
        )
        .unwrap();
        let expected_cap = AnnotatedContext::from_triples(&[
            ("y1", atom("a"), true),
            ("y2", atom("b"), true),
            ("z", atom("c"), true),
        ]);
        let expected = Type::closure(expected_cap, "x", Dep::ZERO, atom("s"), atom("c"));
        assert!(alpha_equal_types(&tau, &expected));
        validate(&d).unwrap();
    }

    #[test]
    fn atoms_pass_through_unchanged() {
        let prefix = session_prefix();
        let psi = DepVector::from_pairs(&[("y1", true), ("y2", true), ("z", false)]);
        let suffix = Context::from_pairs(&[("u", atom("a")), ("v", atom("b"))]);
        let (out, d) = subst_context(
            &prefix,
            &"y".to_string(),
            &Type::product(atom("a"), atom("b")),
            &suffix,
            &psi,
        )
        .unwrap();
        assert_eq!(out, suffix);
        validate(&d).unwrap();
    }

    #[test]
    fn context_substitution_rewrites_closures_in_suffix() {
        let prefix = session_prefix();
        let psi = DepVector::from_pairs(&[("y1", true), ("y2", true), ("z", false)]);
        let suffix = Context::from_pairs(&[("f", session_closure(false))]);
        let (out, d) = subst_context(
            &prefix,
            &"y".to_string(),
            &Type::product(atom("a"), atom("b")),
            &suffix,
            &psi,
        )
        .unwrap();
        assert_eq!(out.domain(), vec!["f"]);
        match &out.entries[0].ty {
            Type::Closure(ct) => assert_eq!(ct.captured.ctx.domain(), vec!["y1", "y2", "z"]),
            other => panic!("expected a closure, got {other:?}"),
        }
        validate(&d).unwrap();
    }

    #[test]
    fn annotated_substitution_updates_outer_annotation() {
        // (y1:a^1, y2:b^1, z:c^0), y:(a*b)^1 with Ψ={y1:1,y2:1,z:0}
        // gives (y1^1, y2^1, z^0) since Φ1 + 1·Ψ adds nothing new.
        let mut actx = AnnotatedContext::from_triples(&[
            ("y1", atom("a"), true),
            ("y2", atom("b"), true),
            ("z", atom("c"), false),
        ]);
        actx.push(
            "y".to_string(),
            Type::product(atom("a"), atom("b")),
            Dep::ONE,
        );
        let psi = DepVector::from_pairs(&[("y1", true), ("y2", true), ("z", false)]);
        let (out, tau, _) = subst_annotated(&actx, 3, &psi, &atom("c")).unwrap();
        assert_eq!(
            out.deps,
            DepVector::from_pairs(&[("y1", true), ("y2", true), ("z", false)])
        );
        assert_eq!(tau, atom("c"));
    }

    #[test]
    fn annotated_substitution_with_unneeded_variable_keeps_annotation() {
        let mut actx = AnnotatedContext::from_triples(&[("y1", atom("a"), false)]);
        actx.push("y".to_string(), atom("b"), Dep::ZERO);
        let psi = DepVector::from_pairs(&[("y1", true)]);
        let (out, _, _) = subst_annotated(&actx, 1, &psi, &atom("c")).unwrap();
        assert_eq!(out.deps, DepVector::from_pairs(&[("y1", false)]));
    }

    #[test]
    fn escape_in_contravariant_position_is_rejected() {
        // Substituting y out of [u:a^0, y:b^1](g:T^1) -> a where T itself
        // captures y: the parameter type would change.
        let prefix = Context::from_pairs(&[("u", atom("a"))]);
        let inner_cap = AnnotatedContext::from_triples(&[
            ("u", atom("a"), false),
            ("y", atom("b"), true),
        ]);
        let inner = Type::closure(inner_cap.clone(), "z", Dep::ZERO, atom("a"), atom("a"));
        let outer = Type::closure(inner_cap, "g", Dep::ONE, inner, atom("a"));
        let psi = DepVector::from_pairs(&[("u", true)]);
        match subst_type(
            &prefix,
            &"y".to_string(),
            &atom("b"),
            &Context::empty(),
            &outer,
            &psi,
        ) {
            Err(SubstError::Escape { var, .. }) => assert_eq!(var, "y"),
            other => panic!("expected Escape, got {other:?}"),
        }
    }

    #[test]
    fn reanchoring_extends_short_captured_contexts() {
        // A closure formed in context (a) later substituted in (a, g):
        // [a:A^0, x:S^1](w:R^0) -> A with x removed re-anchors to (a, g).
        let prefix = Context::from_pairs(&[("a", atom("A")), ("g", atom("G"))]);
        let cap = AnnotatedContext::from_triples(&[
            ("a", atom("A"), false),
            ("x", atom("S"), true),
        ]);
        let ty = Type::closure(cap, "w", Dep::ZERO, atom("R"), atom("A"));
        let psi = DepVector::from_pairs(&[("a", true), ("g", false)]);
        let (_, tau, d) = subst_type(
            &prefix,
            &"x".to_string(),
            &atom("S"),
            &Context::empty(),
            &ty,
            &psi,
        )
        .unwrap();
        let expected_cap = AnnotatedContext::from_triples(&[
            ("a", atom("A"), true),
            ("g", atom("G"), false),
        ]);
        let expected = Type::closure(expected_cap, "w", Dep::ZERO, atom("R"), atom("A"));
        assert!(alpha_equal_types(&tau, &expected));
        validate(&d).unwrap();
    }

    #[test]
    fn substitution_preserves_scoping() {
        // Lemma: well-scoped inputs give well-scoped outputs.
        let prefix = session_prefix();
        let rho = Type::product(atom("a"), atom("b"));
        let full = prefix.extended("y", rho.clone());
        let ty = session_closure(true);
        check_context(&full).unwrap();
        check_type(&full, &ty).unwrap();
        let psi = DepVector::from_pairs(&[("y1", true), ("y2", true), ("z", false)]);
        let (out, tau, _) =
            subst_type(&prefix, &"y".to_string(), &rho, &Context::empty(), &ty, &psi).unwrap();
        let out_ctx = prefix.concat(&out);
        check_context(&out_ctx).unwrap();
        check_type(&out_ctx, &tau).unwrap();
    }

    #[test]
    fn sequence_with_no_bindings_is_identity() {
        let actx = AnnotatedContext::from_triples(&[("y1", atom("a"), true)]);
        let (out, tau, derivs) = subst_sequence(&actx, 1, &[], &atom("c")).unwrap();
        assert_eq!(out, actx);
        assert_eq!(tau, atom("c"));
        assert!(derivs.is_empty());
    }

    #[test]
    fn singleton_sequence_matches_annotated_substitution() {
        let mut actx = AnnotatedContext::from_triples(&[("y1", atom("a"), false)]);
        actx.push("y".to_string(), atom("b"), Dep::ONE);
        let psi = DepVector::from_pairs(&[("y1", true)]);
        let ty = atom("c");
        let (seq_ctx, seq_ty, _) = subst_sequence(&actx, 1, &[psi.clone()], &ty).unwrap();
        let (ann_ctx, ann_ty, _) = subst_annotated(&actx, 1, &psi, &ty).unwrap();
        assert_eq!(seq_ctx, ann_ctx);
        assert_eq!(seq_ty, ann_ty);
    }
}
