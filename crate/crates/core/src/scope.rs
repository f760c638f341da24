//! Well-scoping of contexts and types.
//!
//! The two judgments are mutually recursive: a context is well-scoped when
//! every binding's type is well-scoped in the prefix before it, and a
//! closure type is well-scoped only when its captured context is a literal
//! prefix of the ambient context.

use thiserror::Error;

use crate::syntax::{alpha_equal_types, Context, Name, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScopeError {
    #[error("variable `{name}` is not bound at its use site in a captured context")]
    IllScoped { name: Name, offending: Option<Type> },
    #[error("captured context [{}] does not embed in order into the ambient context [{}]",
            captured.join(","), ambient.join(","))]
    NotPrefix {
        captured: Vec<Name>,
        ambient: Vec<Name>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeRule {
    ContextNil,
    Context,
    Atom,
    Product,
    Closure,
}

impl ScopeRule {
    pub fn tag(self) -> &'static str {
        match self {
            ScopeRule::ContextNil => "Scope-Context-Nil",
            ScopeRule::Context => "Scope-Context",
            ScopeRule::Atom => "Scope-Atom",
            ScopeRule::Product => "Scope-Product",
            ScopeRule::Closure => "Scope-Closure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScopeJudgment {
    /// Γ ⊢
    Context(Context),
    /// Γ ⊢ σ
    Type(Context, Type),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeDerivation {
    pub rule: ScopeRule,
    pub conclusion: ScopeJudgment,
    pub premises: Vec<ScopeDerivation>,
}

/// Γ ⊢ : every suffix binding's type is well-scoped in its prefix.
pub fn check_context(ctx: &Context) -> Result<ScopeDerivation, ScopeError> {
    if ctx.is_empty() {
        return Ok(ScopeDerivation {
            rule: ScopeRule::ContextNil,
            conclusion: ScopeJudgment::Context(ctx.clone()),
            premises: vec![],
        });
    }
    let last = ctx.entries.last().unwrap();
    let prefix = ctx.prefix(ctx.len() - 1);
    let ty_deriv = check_type(&prefix, &last.ty)?;
    Ok(ScopeDerivation {
        rule: ScopeRule::Context,
        conclusion: ScopeJudgment::Context(ctx.clone()),
        premises: vec![ty_deriv],
    })
}

/// Γ ⊢ σ. A closure type's captured context must embed into Γ in order
/// (same names and alpha-equal types, possibly with ambient bindings
/// interleaved by weakening).
pub fn check_type(ctx: &Context, ty: &Type) -> Result<ScopeDerivation, ScopeError> {
    let premises = match ty {
        Type::Atom(_) => vec![check_context(ctx)?],
        Type::Product(a, b) => vec![check_type(ctx, a)?, check_type(ctx, b)?],
        Type::Closure(ct) => {
            let captured = &ct.captured.ctx;
            check_captured_embedding(captured, ctx)?;
            let inner = captured.extended(&ct.param, ct.param_ty.clone());
            vec![
                check_context(ctx)?,
                check_type(captured, &ct.param_ty)?,
                check_type(&inner, &ct.result_ty)?,
            ]
        }
    };
    Ok(ScopeDerivation {
        rule: match ty {
            Type::Atom(_) => ScopeRule::Atom,
            Type::Product(_, _) => ScopeRule::Product,
            Type::Closure(_) => ScopeRule::Closure,
        },
        conclusion: ScopeJudgment::Type(ctx.clone(), ty.clone()),
        premises,
    })
}

fn check_captured_embedding(captured: &Context, ambient: &Context) -> Result<(), ScopeError> {
    let mut next = 0;
    for cap in &captured.entries {
        // A name nowhere in the ambient context is unbound; a name present
        // but unreachable in order (or with a different type) breaks the
        // telescope discipline.
        if ambient.position(&cap.name).is_none() {
            return Err(ScopeError::IllScoped {
                name: cap.name.clone(),
                offending: Some(cap.ty.clone()),
            });
        }
        let found = ambient.entries[next..]
            .iter()
            .position(|e| e.name == cap.name);
        match found {
            Some(offset) => {
                let at = next + offset;
                if !alpha_equal_types(&ambient.entries[at].ty, &cap.ty) {
                    return Err(ScopeError::NotPrefix {
                        captured: captured.domain(),
                        ambient: ambient.domain(),
                    });
                }
                next = at + 1;
            }
            None => {
                return Err(ScopeError::NotPrefix {
                    captured: captured.domain(),
                    ambient: ambient.domain(),
                });
            }
        }
    }
    Ok(())
}

/// Re-checks a derivation node by node against the rule schemas, without
/// consulting the checking functions above.
pub fn validate(deriv: &ScopeDerivation) -> Result<(), String> {
    validate_at(deriv, "root")
}

fn validate_at(d: &ScopeDerivation, path: &str) -> Result<(), String> {
    let fail = |msg: &str| Err(format!("{path}: {msg}"));
    match (&d.rule, &d.conclusion) {
        (ScopeRule::ContextNil, ScopeJudgment::Context(ctx)) => {
            if !ctx.is_empty() || !d.premises.is_empty() {
                return fail("Scope-Context-Nil requires an empty context and no premises");
            }
        }
        (ScopeRule::Context, ScopeJudgment::Context(ctx)) => {
            if ctx.is_empty() || d.premises.len() != 1 {
                return fail("Scope-Context requires a nonempty context and one premise");
            }
            let last = ctx.entries.last().unwrap();
            match &d.premises[0].conclusion {
                ScopeJudgment::Type(pctx, pty)
                    if *pctx == ctx.prefix(ctx.len() - 1) && pty == &last.ty => {}
                _ => return fail("Scope-Context premise must scope the last binding's type"),
            }
        }
        (ScopeRule::Atom, ScopeJudgment::Type(ctx, Type::Atom(_))) => {
            if d.premises.len() != 1 {
                return fail("Scope-Atom requires exactly one premise");
            }
            match &d.premises[0].conclusion {
                ScopeJudgment::Context(pctx) if pctx == ctx => {}
                _ => return fail("Scope-Atom premise must scope the same context"),
            }
        }
        (ScopeRule::Product, ScopeJudgment::Type(ctx, Type::Product(a, b))) => {
            if d.premises.len() != 2 {
                return fail("Scope-Product requires two premises");
            }
            let ok = matches!(&d.premises[0].conclusion,
                    ScopeJudgment::Type(c, t) if c == ctx && t == a.as_ref())
                && matches!(&d.premises[1].conclusion,
                    ScopeJudgment::Type(c, t) if c == ctx && t == b.as_ref());
            if !ok {
                return fail("Scope-Product premises must scope both components");
            }
        }
        (ScopeRule::Closure, ScopeJudgment::Type(ctx, Type::Closure(ct))) => {
            if d.premises.len() != 3 {
                return fail("Scope-Closure requires three premises");
            }
            if check_captured_embedding(&ct.captured.ctx, ctx).is_err() {
                return fail("Scope-Closure captured context does not embed into the ambient");
            }
            let inner = ct.captured.ctx.extended(&ct.param, ct.param_ty.clone());
            let ok = matches!(&d.premises[0].conclusion,
                    ScopeJudgment::Context(c) if c == ctx)
                && matches!(&d.premises[1].conclusion,
                    ScopeJudgment::Type(c, t) if *c == ct.captured.ctx && t == &ct.param_ty)
                && matches!(&d.premises[2].conclusion,
                    ScopeJudgment::Type(c, t) if *c == inner && t == &ct.result_ty);
            if !ok {
                return fail("Scope-Closure premises do not match the rule schema");
            }
        }
        _ => return fail("rule tag does not match the conclusion shape"),
    }
    for (i, p) in d.premises.iter().enumerate() {
        validate_at(p, &format!("{path}.{i}"))?;
    }
    Ok(())
}
