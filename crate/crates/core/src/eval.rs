//! The two big-step evaluators and the cross-semantics equivalence
//! judgment.
//!
//! The open evaluator captures nothing at closure creation: values are
//! absorbed by the substitution chain as binders leave scope. The classic
//! evaluator snapshots the whole environment at creation. Both take a step
//! budget so that fixpoints cannot hang the harness.

use thiserror::Error;

use crate::subst::subst_type;
use crate::syntax::{alpha_equal_terms, Context, DepVector, Name, Term, Type};
use crate::typing::{self, TypeError};
use crate::value::{
    check_value, subst_value, subst_value_recorded, synth_value_type, ClosureCode, Valuation,
    Value, ValueError,
};

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub max_steps: u64,
}

impl Default for EvalConfig {
    fn default() -> EvalConfig {
        EvalConfig {
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("evaluation is stuck: {0}")]
    Stuck(String),
    #[error("closure pending list [{}] is not a prefix of the valuation domain [{}]",
            pending.join(","), domain.join(","))]
    Prefix {
        pending: Vec<Name>,
        domain: Vec<Name>,
    },
    #[error("step budget of {limit} exceeded")]
    BudgetExceeded { limit: u64 },
    #[error("{0}")]
    Value(#[from] ValueError),
    #[error("{0}")]
    Type(#[from] TypeError),
    #[error("evaluator self-check failed: {0}")]
    SelfCheck(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedRule {
    Var,
    Lam,
    LamFix,
    Pair,
    Proj,
    Let,
    App,
    AppFix,
    ClassicVar,
    ClassicLam,
    ClassicLamFix,
    ClassicPair,
    ClassicProj,
    ClassicLet,
    ClassicApp,
    ClassicAppFix,
}

impl RedRule {
    pub fn tag(self) -> &'static str {
        match self {
            RedRule::Var => "Red-Var",
            RedRule::Lam => "Red-Lam",
            RedRule::LamFix => "Red-Lam-Fix",
            RedRule::Pair => "Red-Pair",
            RedRule::Proj => "Red-Proj",
            RedRule::Let => "Red-Let",
            RedRule::App => "Red-App",
            RedRule::AppFix => "Red-App-Fix",
            RedRule::ClassicVar => "Classic-Red-Var",
            RedRule::ClassicLam => "Classic-Red-Lam",
            RedRule::ClassicLamFix => "Classic-Red-Lam-Fix",
            RedRule::ClassicPair => "Classic-Red-Pair",
            RedRule::ClassicProj => "Classic-Red-Proj",
            RedRule::ClassicLet => "Classic-Red-Let",
            RedRule::ClassicApp => "Classic-Red-App",
            RedRule::ClassicAppFix => "Classic-Red-App-Fix",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RedJudgment {
    Open {
        valuation: Valuation,
        term: Term,
        value: Value,
    },
    Classic {
        env: ClassicValuation,
        term: Term,
        value: ClassicValue,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RedPremise {
    Eval(ReductionDerivation),
    ValueSubst {
        input: Value,
        var: Name,
        arg: Value,
        output: Value,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionDerivation {
    pub rule: RedRule,
    pub judgment: RedJudgment,
    pub premises: Vec<RedPremise>,
}

/// Self-check configuration for the open evaluator: the typing context is
/// threaded next to the valuation, dependency vectors are re-inferred at
/// binding sites and recorded on captures, and optionally every value
/// substitution step is checked to preserve value typing.
struct CheckState {
    assert_substitution_typing: bool,
}

struct OpenEvaluator {
    remaining: u64,
    limit: u64,
    check: Option<CheckState>,
}

pub fn eval_open(env: &Valuation, term: &Term) -> Result<(Value, ReductionDerivation), EvalError> {
    eval_open_with(env, term, &EvalConfig::default())
}

pub fn eval_open_with(
    env: &Valuation,
    term: &Term,
    config: &EvalConfig,
) -> Result<(Value, ReductionDerivation), EvalError> {
    let mut ev = OpenEvaluator {
        remaining: config.max_steps,
        limit: config.max_steps,
        check: None,
    };
    ev.eval(env, None, term)
}

/// Self-check mode: evaluates with the typing context alongside, recording
/// the dependency vector of each binding on the captures it produces. With
/// `assert_substitution_typing`, every substitution step is checked to send
/// well-typed values to well-typed values.
pub fn eval_open_checked(
    ctx: &Context,
    env: &Valuation,
    term: &Term,
    config: &EvalConfig,
    assert_substitution_typing: bool,
) -> Result<(Value, ReductionDerivation), EvalError> {
    let mut ev = OpenEvaluator {
        remaining: config.max_steps,
        limit: config.max_steps,
        check: Some(CheckState {
            assert_substitution_typing,
        }),
    };
    ev.eval(env, Some(ctx), term)
}

impl OpenEvaluator {
    fn tick(&mut self) -> Result<(), EvalError> {
        if self.remaining == 0 {
            return Err(EvalError::BudgetExceeded { limit: self.limit });
        }
        self.remaining -= 1;
        Ok(())
    }

    fn eval(
        &mut self,
        env: &Valuation,
        ctx: Option<&Context>,
        term: &Term,
    ) -> Result<(Value, ReductionDerivation), EvalError> {
        self.tick()?;
        match term {
            Term::Var(x) => {
                let value = env
                    .lookup(x)
                    .cloned()
                    .ok_or_else(|| EvalError::Unbound(x.clone()))?;
                Ok((
                    value.clone(),
                    ReductionDerivation {
                        rule: RedRule::Var,
                        judgment: RedJudgment::Open {
                            valuation: env.clone(),
                            term: term.clone(),
                            value,
                        },
                        premises: vec![],
                    },
                ))
            }
            Term::Lam {
                param,
                param_ty,
                body,
            } => {
                let value = Value::Closure {
                    pending: env.domain(),
                    captured: vec![],
                    code: ClosureCode::Lam {
                        param: param.clone(),
                        param_ty: param_ty.clone(),
                        body: (**body).clone(),
                    },
                };
                Ok((
                    value.clone(),
                    ReductionDerivation {
                        rule: RedRule::Lam,
                        judgment: RedJudgment::Open {
                            valuation: env.clone(),
                            term: term.clone(),
                            value,
                        },
                        premises: vec![],
                    },
                ))
            }
            Term::Fix {
                fname,
                param,
                param_ty,
                result_ty,
                body,
            } => {
                let value = Value::Closure {
                    pending: env.domain(),
                    captured: vec![],
                    code: ClosureCode::Fix {
                        fname: fname.clone(),
                        param: param.clone(),
                        param_ty: param_ty.clone(),
                        result_ty: result_ty.clone(),
                        body: (**body).clone(),
                    },
                };
                Ok((
                    value.clone(),
                    ReductionDerivation {
                        rule: RedRule::LamFix,
                        judgment: RedJudgment::Open {
                            valuation: env.clone(),
                            term: term.clone(),
                            value,
                        },
                        premises: vec![],
                    },
                ))
            }
            Term::Pair(a, b) => {
                let (va, da) = self.eval(env, ctx, a)?;
                let (vb, db) = self.eval(env, ctx, b)?;
                let value = Value::pair(va, vb);
                Ok((
                    value.clone(),
                    ReductionDerivation {
                        rule: RedRule::Pair,
                        judgment: RedJudgment::Open {
                            valuation: env.clone(),
                            term: term.clone(),
                            value,
                        },
                        premises: vec![RedPremise::Eval(da), RedPremise::Eval(db)],
                    },
                ))
            }
            Term::Proj(ix, e) => {
                let (v, d) = self.eval(env, ctx, e)?;
                let value = match v {
                    Value::Pair(a, b) => match ix {
                        crate::syntax::ProjIndex::First => *a,
                        crate::syntax::ProjIndex::Second => *b,
                    },
                    other => {
                        return Err(EvalError::Stuck(format!(
                            "projection applied to a non-pair value {other:?}"
                        )))
                    }
                };
                Ok((
                    value.clone(),
                    ReductionDerivation {
                        rule: RedRule::Proj,
                        judgment: RedJudgment::Open {
                            valuation: env.clone(),
                            term: term.clone(),
                            value,
                        },
                        premises: vec![RedPremise::Eval(d)],
                    },
                ))
            }
            Term::Let { name, def, body } => self.eval_let(env, ctx, term, name, def, body),
            Term::App(t, u) => self.eval_app(env, ctx, term, t, u),
        }
    }

    fn eval_let(
        &mut self,
        env: &Valuation,
        ctx: Option<&Context>,
        term: &Term,
        name: &Name,
        def: &Term,
        body: &Term,
    ) -> Result<(Value, ReductionDerivation), EvalError> {
        let (v1, d1) = self.eval(env, ctx, def)?;
        let def_info = match ctx {
            Some(c) => Some(typing::infer(c, def)?),
            None => None,
        };
        let inner_env = env.extended(name, v1.clone());
        let inner_ctx = def_info
            .as_ref()
            .map(|i| ctx.unwrap().extended(name, i.ty.clone()));
        let (v2, d2) = self.eval(&inner_env, inner_ctx.as_ref(), body)?;
        let out = match &def_info {
            Some(i) => {
                let out = subst_value_recorded(&v2, name, &v1, &i.deps)?;
                if self.check.as_ref().is_some_and(|c| c.assert_substitution_typing) {
                    self.assert_substitution_typing(
                        ctx.unwrap(),
                        name,
                        &i.ty,
                        &i.deps,
                        &v2,
                        &out,
                    )?;
                }
                out
            }
            None => subst_value(&v2, name, &v1)?,
        };
        Ok((
            out.clone(),
            ReductionDerivation {
                rule: RedRule::Let,
                judgment: RedJudgment::Open {
                    valuation: env.clone(),
                    term: term.clone(),
                    value: out.clone(),
                },
                premises: vec![
                    RedPremise::Eval(d1),
                    RedPremise::Eval(d2),
                    RedPremise::ValueSubst {
                        input: v2,
                        var: name.clone(),
                        arg: v1,
                        output: out,
                    },
                ],
            },
        ))
    }

    fn eval_app(
        &mut self,
        env: &Valuation,
        ctx: Option<&Context>,
        term: &Term,
        t: &Term,
        u: &Term,
    ) -> Result<(Value, ReductionDerivation), EvalError> {
        let (vf, df) = self.eval(env, ctx, t)?;
        let (pending, captured, code) = match &vf {
            Value::Closure {
                pending,
                captured,
                code,
            } => (pending.clone(), captured.clone(), code.clone()),
            other => {
                return Err(EvalError::Stuck(format!(
                    "application of a non-closure value {other:?}"
                )))
            }
        };
        let domain = env.domain();
        if !embeds(&pending, &domain) {
            return Err(EvalError::Prefix { pending, domain });
        }
        let (varg, darg) = self.eval(env, ctx, u)?;
        let arg_deps = match ctx {
            Some(c) => Some(typing::infer(c, u)?.deps),
            None => None,
        };

        match code {
            ClosureCode::Lam {
                param,
                param_ty,
                body,
            } => {
                // Body runs under V, V1, V2, y↦varg.
                let mut body_env = env.clone();
                let mut body_ctx = ctx.cloned();
                for cb in &captured {
                    body_env.push(cb.name.clone(), cb.value.clone());
                    if let Some(c) = &mut body_ctx {
                        let (ti, _) = synth_value_type(c, &cb.value)?;
                        c.push(cb.name.clone(), ti);
                    }
                }
                body_env.push(param.clone(), varg.clone());
                if let Some(c) = &mut body_ctx {
                    c.push(param.clone(), param_ty.clone());
                }
                let (w, dbody) = self.eval(&body_env, body_ctx.as_ref(), &body)?;

                // w →[y\varg] w' ⇒[V2] w'': most recently introduced first.
                let mut premises = vec![
                    RedPremise::Eval(df),
                    RedPremise::Eval(darg),
                    RedPremise::Eval(dbody),
                ];
                let mut chain_ctx = body_ctx;
                let mut current = w;
                let param_deps = arg_deps.map(|d| {
                    // The argument was computed before the captured bindings
                    // rejoined the context; extend with zeros over them.
                    let c = chain_ctx.as_ref().unwrap();
                    d.aligned_to(&c.prefix(c.len() - 1))
                });
                let steps: Vec<(Name, Value, Option<DepVector>)> =
                    std::iter::once((param.clone(), varg.clone(), param_deps))
                        .chain(captured.iter().rev().map(|cb| {
                            (cb.name.clone(), cb.value.clone(), cb.deps.clone())
                        }))
                        .collect();
                for (var, arg, deps) in steps {
                    let next = match (&self.check, &deps) {
                        (Some(_), Some(d)) => {
                            let c = chain_ctx.as_ref().unwrap();
                            let pre = c.prefix(c.len() - 1);
                            let d = d.aligned_to(&pre);
                            subst_value_recorded(&current, &var, &arg, &d)?
                        }
                        _ => subst_value(&current, &var, &arg)?,
                    };
                    if let Some(c) = &mut chain_ctx {
                        let entry = c.entries.last().cloned().unwrap();
                        let pre = c.prefix(c.len() - 1);
                        if self
                            .check
                            .as_ref()
                            .is_some_and(|cs| cs.assert_substitution_typing)
                        {
                            if let Some(d) = &deps {
                                let d = d.aligned_to(&pre);
                                self.assert_substitution_typing_in(
                                    &pre, &entry.name, &entry.ty, &d, &current, &next,
                                )?;
                            }
                        }
                        debug_assert_eq!(entry.name, var);
                        *c = pre;
                    }
                    premises.push(RedPremise::ValueSubst {
                        input: current,
                        var,
                        arg,
                        output: next.clone(),
                    });
                    current = next;
                }
                Ok((
                    current.clone(),
                    ReductionDerivation {
                        rule: RedRule::App,
                        judgment: RedJudgment::Open {
                            valuation: env.clone(),
                            term: term.clone(),
                            value: current,
                        },
                        premises,
                    },
                ))
            }
            ClosureCode::Fix {
                fname,
                param,
                param_ty,
                ..
            } => {
                // The figure runs the body under V⟨x_i↦v_i⟩⟨f⟩⟨y⟩, with no
                // substitution chain afterwards.
                let mut body_env = select_valuation(env, &pending)
                    .expect("pending embeds into the valuation");
                let mut body_ctx = match ctx {
                    Some(c) => Some(c.select(&pending).expect("pending embeds into the context")),
                    None => None,
                };
                for cb in &captured {
                    body_env.push(cb.name.clone(), cb.value.clone());
                    if let Some(c) = &mut body_ctx {
                        let (ti, _) = synth_value_type(c, &cb.value)?;
                        c.push(cb.name.clone(), ti);
                    }
                }
                if let Some(c) = &mut body_ctx {
                    let (tf, _) = synth_value_type(c, &vf)?;
                    c.push(fname.clone(), tf);
                }
                body_env.push(fname.clone(), vf.clone());
                body_env.push(param.clone(), varg.clone());
                if let Some(c) = &mut body_ctx {
                    c.push(param.clone(), param_ty.clone());
                }
                let (w, dbody) = self.eval(&body_env, body_ctx.as_ref(), code_body(&vf))?;
                Ok((
                    w.clone(),
                    ReductionDerivation {
                        rule: RedRule::AppFix,
                        judgment: RedJudgment::Open {
                            valuation: env.clone(),
                            term: term.clone(),
                            value: w,
                        },
                        premises: vec![
                            RedPremise::Eval(df),
                            RedPremise::Eval(darg),
                            RedPremise::Eval(dbody),
                        ],
                    },
                ))
            }
        }
    }

    fn assert_substitution_typing(
        &self,
        ctx: &Context,
        var: &Name,
        var_ty: &Type,
        deps: &DepVector,
        before: &Value,
        after: &Value,
    ) -> Result<(), EvalError> {
        self.assert_substitution_typing_in(ctx, var, var_ty, deps, before, after)
    }

    /// Value substitution preserves typing: synthesize the type of the
    /// value before the step, substitute the variable out of that type, and
    /// check the substituted value against the substituted type.
    fn assert_substitution_typing_in(
        &self,
        prefix: &Context,
        var: &Name,
        var_ty: &Type,
        deps: &DepVector,
        before: &Value,
        after: &Value,
    ) -> Result<(), EvalError> {
        let full = prefix.extended(var, var_ty.clone());
        let (sigma, _) = synth_value_type(&full, before).map_err(|e| {
            EvalError::SelfCheck(format!("pre-substitution value does not type: {e}"))
        })?;
        let (_, tau, _) = subst_type(prefix, var, var_ty, &Context::empty(), &sigma, deps)
            .map_err(|e| EvalError::SelfCheck(format!("type substitution failed: {e}")))?;
        check_value(prefix, after, &tau).map_err(|e| {
            EvalError::SelfCheck(format!(
                "substituted value does not have the substituted type: {e}"
            ))
        })?;
        Ok(())
    }
}

/// In-order subsequence check on name lists.
fn embeds(part: &[Name], whole: &[Name]) -> bool {
    let mut next = 0;
    for name in part {
        match whole[next..].iter().position(|n| n == name) {
            Some(offset) => next += offset + 1,
            None => return false,
        }
    }
    true
}

/// The sub-valuation at the given names, which must occur in this order.
fn select_valuation(env: &Valuation, names: &[Name]) -> Option<Valuation> {
    let mut next = 0;
    let mut out = Valuation::empty();
    for name in names {
        let offset = env.entries[next..].iter().position(|(n, _)| n == name)?;
        let at = next + offset;
        out.entries.push(env.entries[at].clone());
        next = at + 1;
    }
    Some(out)
}

fn code_body(vf: &Value) -> &Term {
    match vf {
        Value::Closure { code, .. } => code.body(),
        _ => unreachable!("caller matched a closure"),
    }
}

// ---------------------------------------------------------------------------
// Classic semantics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum ClassicValue {
    AtomConst { atom: Name, constant: Name },
    Pair(Box<ClassicValue>, Box<ClassicValue>),
    Closure {
        env: ClassicValuation,
        code: ClosureCode,
    },
}

impl ClassicValue {
    pub fn atom(atom: &str, constant: &str) -> ClassicValue {
        ClassicValue::AtomConst {
            atom: atom.to_string(),
            constant: constant.to_string(),
        }
    }

    pub fn pair(a: ClassicValue, b: ClassicValue) -> ClassicValue {
        ClassicValue::Pair(Box::new(a), Box::new(b))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassicValuation {
    pub entries: Vec<(Name, ClassicValue)>,
}

impl ClassicValuation {
    pub fn empty() -> ClassicValuation {
        ClassicValuation::default()
    }

    pub fn from_pairs(pairs: &[(&str, ClassicValue)]) -> ClassicValuation {
        ClassicValuation {
            entries: pairs
                .iter()
                .map(|(n, v)| (n.to_string(), v.clone()))
                .collect(),
        }
    }

    pub fn push(&mut self, name: Name, value: ClassicValue) {
        self.entries.push((name, value));
    }

    pub fn extended(&self, name: &str, value: ClassicValue) -> ClassicValuation {
        let mut out = self.clone();
        out.push(name.to_string(), value);
        out
    }

    pub fn lookup(&self, name: &str) -> Option<&ClassicValue> {
        self.entries
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    pub fn domain(&self) -> Vec<Name> {
        self.entries.iter().map(|(n, _)| n.clone()).collect()
    }
}

pub fn eval_classic(
    env: &ClassicValuation,
    term: &Term,
) -> Result<(ClassicValue, ReductionDerivation), EvalError> {
    eval_classic_with(env, term, &EvalConfig::default())
}

pub fn eval_classic_with(
    env: &ClassicValuation,
    term: &Term,
    config: &EvalConfig,
) -> Result<(ClassicValue, ReductionDerivation), EvalError> {
    let mut remaining = config.max_steps;
    classic_rec(env, term, &mut remaining, config.max_steps)
}

fn classic_rec(
    env: &ClassicValuation,
    term: &Term,
    remaining: &mut u64,
    limit: u64,
) -> Result<(ClassicValue, ReductionDerivation), EvalError> {
    if *remaining == 0 {
        return Err(EvalError::BudgetExceeded { limit });
    }
    *remaining -= 1;
    let done = |rule: RedRule, value: ClassicValue, premises: Vec<RedPremise>| {
        let deriv = ReductionDerivation {
            rule,
            judgment: RedJudgment::Classic {
                env: env.clone(),
                term: term.clone(),
                value: value.clone(),
            },
            premises,
        };
        Ok((value, deriv))
    };
    match term {
        Term::Var(x) => {
            let v = env
                .lookup(x)
                .cloned()
                .ok_or_else(|| EvalError::Unbound(x.clone()))?;
            done(RedRule::ClassicVar, v, vec![])
        }
        Term::Lam {
            param,
            param_ty,
            body,
        } => done(
            RedRule::ClassicLam,
            ClassicValue::Closure {
                env: env.clone(),
                code: ClosureCode::Lam {
                    param: param.clone(),
                    param_ty: param_ty.clone(),
                    body: (**body).clone(),
                },
            },
            vec![],
        ),
        Term::Fix {
            fname,
            param,
            param_ty,
            result_ty,
            body,
        } => done(
            RedRule::ClassicLamFix,
            ClassicValue::Closure {
                env: env.clone(),
                code: ClosureCode::Fix {
                    fname: fname.clone(),
                    param: param.clone(),
                    param_ty: param_ty.clone(),
                    result_ty: result_ty.clone(),
                    body: (**body).clone(),
                },
            },
            vec![],
        ),
        Term::Pair(a, b) => {
            let (va, da) = classic_rec(env, a, remaining, limit)?;
            let (vb, db) = classic_rec(env, b, remaining, limit)?;
            done(
                RedRule::ClassicPair,
                ClassicValue::pair(va, vb),
                vec![RedPremise::Eval(da), RedPremise::Eval(db)],
            )
        }
        Term::Proj(ix, e) => {
            let (v, d) = classic_rec(env, e, remaining, limit)?;
            let out = match v {
                ClassicValue::Pair(a, b) => match ix {
                    crate::syntax::ProjIndex::First => *a,
                    crate::syntax::ProjIndex::Second => *b,
                },
                other => {
                    return Err(EvalError::Stuck(format!(
                        "projection applied to a non-pair value {other:?}"
                    )))
                }
            };
            done(RedRule::ClassicProj, out, vec![RedPremise::Eval(d)])
        }
        Term::Let { name, def, body } => {
            let (v1, d1) = classic_rec(env, def, remaining, limit)?;
            let inner = env.extended(name, v1);
            let (v2, d2) = classic_rec(&inner, body, remaining, limit)?;
            done(
                RedRule::ClassicLet,
                v2,
                vec![RedPremise::Eval(d1), RedPremise::Eval(d2)],
            )
        }
        Term::App(t, u) => {
            let (vf, df) = classic_rec(env, t, remaining, limit)?;
            let (cenv, code) = match &vf {
                ClassicValue::Closure { env, code } => (env.clone(), code.clone()),
                other => {
                    return Err(EvalError::Stuck(format!(
                        "application of a non-closure value {other:?}"
                    )))
                }
            };
            let (varg, darg) = classic_rec(env, u, remaining, limit)?;
            let (rule, body_env) = match &code {
                ClosureCode::Lam { param, .. } => {
                    (RedRule::ClassicApp, cenv.extended(param, varg))
                }
                ClosureCode::Fix { fname, param, .. } => (
                    RedRule::ClassicAppFix,
                    cenv.extended(fname, vf.clone()).extended(param, varg),
                ),
            };
            let (w, dbody) = classic_rec(&body_env, code.body(), remaining, limit)?;
            done(
                rule,
                w,
                vec![
                    RedPremise::Eval(df),
                    RedPremise::Eval(darg),
                    RedPremise::Eval(dbody),
                ],
            )
        }
    }
}

// ---------------------------------------------------------------------------
// Equivalence of the two semantics
// ---------------------------------------------------------------------------

/// V ⊢ v = W ⊢ w: atoms by constant, pairs pointwise; an open closure is
/// equivalent to a classic one when their code agrees up to alpha and the
/// valuation extended with the captured values agrees with the classic
/// closure's environment on every variable the code can see. The two
/// environments need not share a domain: the open side carries extra
/// application-site bindings where the classic side snapshots only the
/// creation environment.
pub fn values_equiv_semantics(
    open_env: &Valuation,
    v: &Value,
    classic_env: &ClassicValuation,
    w: &ClassicValue,
) -> bool {
    match (v, w) {
        (
            Value::AtomConst { atom, constant },
            ClassicValue::AtomConst {
                atom: a2,
                constant: c2,
            },
        ) => atom == a2 && constant == c2,
        (Value::Pair(a, b), ClassicValue::Pair(x, y)) => {
            values_equiv_semantics(open_env, a, classic_env, x)
                && values_equiv_semantics(open_env, b, classic_env, y)
        }
        (
            Value::Closure {
                pending,
                captured,
                code,
            },
            ClassicValue::Closure { env: wenv, code: wcode },
        ) => {
            if !embeds(pending, &open_env.domain()) {
                return false;
            }
            if !alpha_equal_terms(&code.as_term(), &wcode.as_term()) {
                return false;
            }
            let mut vext = open_env.clone();
            for cb in captured {
                vext.push(cb.name.clone(), cb.value.clone());
            }
            code.as_term().free_vars().iter().all(|name| {
                match (position_of(&vext, name), classic_position_of(wenv, name)) {
                    (Some(i), Some(j)) => {
                        let vpre = vext.prefix(i);
                        let wpre = ClassicValuation {
                            entries: wenv.entries[..j].to_vec(),
                        };
                        values_equiv_semantics(&vpre, &vext.entries[i].1, &wpre, &wenv.entries[j].1)
                    }
                    _ => false,
                }
            })
        }
        _ => false,
    }
}

fn position_of(env: &Valuation, name: &str) -> Option<usize> {
    env.entries.iter().rposition(|(n, _)| n == name)
}

fn classic_position_of(env: &ClassicValuation, name: &str) -> Option<usize> {
    env.entries.iter().rposition(|(n, _)| n == name)
}

/// V ⊢ = W ⊢: same domains, pointwise equivalent under the prefix
/// valuations.
pub fn valuations_equiv(open_env: &Valuation, classic_env: &ClassicValuation) -> bool {
    if open_env.len() != classic_env.entries.len() {
        return false;
    }
    for i in 0..open_env.len() {
        let (n1, v) = &open_env.entries[i];
        let (n2, w) = &classic_env.entries[i];
        if n1 != n2 {
            return false;
        }
        let vpre = open_env.prefix(i);
        let wpre = ClassicValuation {
            entries: classic_env.entries[..i].to_vec(),
        };
        if !values_equiv_semantics(&vpre, v, &wpre, w) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Derivation validation
// ---------------------------------------------------------------------------

/// Independent schema validator for reduction derivations: recomputes each
/// node one step from its premises.
pub fn validate_reduction(d: &ReductionDerivation) -> Result<(), String> {
    validate_red_at(d, "root")
}

fn premise_eval<'a>(
    d: &'a ReductionDerivation,
    i: usize,
    path: &str,
) -> Result<&'a ReductionDerivation, String> {
    match d.premises.get(i) {
        Some(RedPremise::Eval(e)) => Ok(e),
        _ => Err(format!("{path}: premise {i} must be an evaluation")),
    }
}

fn open_judgment<'a>(
    d: &'a ReductionDerivation,
    path: &str,
) -> Result<(&'a Valuation, &'a Term, &'a Value), String> {
    match &d.judgment {
        RedJudgment::Open {
            valuation,
            term,
            value,
        } => Ok((valuation, term, value)),
        _ => Err(format!("{path}: expected an open-semantics judgment")),
    }
}

fn classic_judgment<'a>(
    d: &'a ReductionDerivation,
    path: &str,
) -> Result<(&'a ClassicValuation, &'a Term, &'a ClassicValue), String> {
    match &d.judgment {
        RedJudgment::Classic { env, term, value } => Ok((env, term, value)),
        _ => Err(format!("{path}: expected a classic-semantics judgment")),
    }
}

fn validate_red_at(d: &ReductionDerivation, path: &str) -> Result<(), String> {
    let fail = |msg: String| Err(format!("{path}: {msg}"));
    match d.rule {
        RedRule::Var => {
            let (env, term, value) = open_judgment(d, path)?;
            match term {
                Term::Var(x) if env.lookup(x) == Some(value) => {}
                _ => return fail("Red-Var must return the bound value".to_string()),
            }
        }
        RedRule::Lam | RedRule::LamFix => {
            let (env, term, value) = open_judgment(d, path)?;
            match value {
                Value::Closure {
                    pending,
                    captured,
                    code,
                } => {
                    if *pending != env.domain()
                        || !captured.is_empty()
                        || !alpha_equal_terms(&code.as_term(), term)
                    {
                        return fail(
                            "closure creation must record the domain and capture nothing"
                                .to_string(),
                        );
                    }
                }
                _ => return fail("closure creation must yield a closure".to_string()),
            }
        }
        RedRule::Pair => {
            let (env, term, value) = open_judgment(d, path)?;
            let (a, b) = match term {
                Term::Pair(a, b) => (a, b),
                _ => return fail("Red-Pair term mismatch".to_string()),
            };
            let da = premise_eval(d, 0, path)?;
            let db = premise_eval(d, 1, path)?;
            let (ea, ta, va) = open_judgment(da, path)?;
            let (eb, tb, vb) = open_judgment(db, path)?;
            let ok = ea == env
                && eb == env
                && ta == a.as_ref()
                && tb == b.as_ref()
                && *value == Value::pair(va.clone(), vb.clone());
            if !ok {
                return fail("Red-Pair premises mismatch".to_string());
            }
        }
        RedRule::Proj => {
            let (env, term, value) = open_judgment(d, path)?;
            let (ix, e) = match term {
                Term::Proj(ix, e) => (ix, e),
                _ => return fail("Red-Proj term mismatch".to_string()),
            };
            let dp = premise_eval(d, 0, path)?;
            let (ep, tp, vp) = open_judgment(dp, path)?;
            let picked = match vp {
                Value::Pair(a, b) => match ix {
                    crate::syntax::ProjIndex::First => a.as_ref(),
                    crate::syntax::ProjIndex::Second => b.as_ref(),
                },
                _ => return fail("Red-Proj premise must produce a pair".to_string()),
            };
            if ep != env || tp != e.as_ref() || picked != value {
                return fail("Red-Proj premises mismatch".to_string());
            }
        }
        RedRule::Let => {
            let (env, term, value) = open_judgment(d, path)?;
            let (name, def, body) = match term {
                Term::Let { name, def, body } => (name, def, body),
                _ => return fail("Red-Let term mismatch".to_string()),
            };
            let d1 = premise_eval(d, 0, path)?;
            let d2 = premise_eval(d, 1, path)?;
            let (e1, t1, v1) = open_judgment(d1, path)?;
            let (e2, t2, v2) = open_judgment(d2, path)?;
            let subst = match d.premises.get(2) {
                Some(RedPremise::ValueSubst {
                    input,
                    var,
                    arg,
                    output,
                }) => (input, var, arg, output),
                _ => return fail("Red-Let requires a value substitution step".to_string()),
            };
            let ok = e1 == env
                && t1 == def.as_ref()
                && *e2 == env.extended(name, v1.clone())
                && t2 == body.as_ref()
                && subst.0 == v2
                && subst.1 == name
                && subst.2 == v1
                && subst.3 == value
                && subst_value(v2, name, v1).as_ref() == Ok(value);
            if !ok {
                return fail("Red-Let premises mismatch".to_string());
            }
        }
        RedRule::App => {
            let (env, term, value) = open_judgment(d, path)?;
            let (t, u) = match term {
                Term::App(t, u) => (t, u),
                _ => return fail("Red-App term mismatch".to_string()),
            };
            let df = premise_eval(d, 0, path)?;
            let da = premise_eval(d, 1, path)?;
            let db = premise_eval(d, 2, path)?;
            let (ef, tf, vf) = open_judgment(df, path)?;
            let (ea, ta, varg) = open_judgment(da, path)?;
            let (eb, _tb, w) = open_judgment(db, path)?;
            if ef != env || tf != t.as_ref() || ea != env || ta != u.as_ref() {
                return fail("Red-App function/argument premises mismatch".to_string());
            }
            let (pending, captured, code) = match vf {
                Value::Closure {
                    pending,
                    captured,
                    code: code @ ClosureCode::Lam { .. },
                } => (pending, captured, code),
                _ => return fail("Red-App requires a lambda closure".to_string()),
            };
            if !embeds(pending, &env.domain()) {
                return fail("Red-App pending list must embed into the valuation".to_string());
            }
            let mut expected_env = env.clone();
            for cb in captured {
                expected_env.push(cb.name.clone(), cb.value.clone());
            }
            expected_env.push(code.param().clone(), varg.clone());
            if *eb != expected_env {
                return fail("Red-App body environment mismatch".to_string());
            }
            // Replay the substitution chain.
            let mut current = w.clone();
            let chain: Vec<(Name, Value)> = std::iter::once((code.param().clone(), varg.clone()))
                .chain(captured.iter().rev().map(|cb| (cb.name.clone(), cb.value.clone())))
                .collect();
            if d.premises.len() != 3 + chain.len() {
                return fail("Red-App substitution chain has the wrong length".to_string());
            }
            for (i, (var, arg)) in chain.iter().enumerate() {
                let step = match &d.premises[3 + i] {
                    RedPremise::ValueSubst {
                        input,
                        var: v,
                        arg: a,
                        output,
                    } => (input, v, a, output),
                    _ => return fail("Red-App chain premise mismatch".to_string()),
                };
                let next = match subst_value(&current, var, arg) {
                    Ok(n) => n,
                    Err(e) => return fail(format!("chain substitution failed: {e}")),
                };
                if step.0 != &current || step.1 != var || step.2 != arg || step.3 != &next {
                    return fail("Red-App chain step mismatch".to_string());
                }
                current = next;
            }
            if &current != value {
                return fail("Red-App conclusion differs from the chain output".to_string());
            }
        }
        RedRule::AppFix => {
            let (env, term, value) = open_judgment(d, path)?;
            let (t, u) = match term {
                Term::App(t, u) => (t, u),
                _ => return fail("Red-App-Fix term mismatch".to_string()),
            };
            let df = premise_eval(d, 0, path)?;
            let da = premise_eval(d, 1, path)?;
            let db = premise_eval(d, 2, path)?;
            let (ef, tf, vf) = open_judgment(df, path)?;
            let (ea, ta, varg) = open_judgment(da, path)?;
            let (eb, _tb, w) = open_judgment(db, path)?;
            if ef != env || tf != t.as_ref() || ea != env || ta != u.as_ref() {
                return fail("Red-App-Fix premises mismatch".to_string());
            }
            let (pending, captured, code) = match vf {
                Value::Closure {
                    pending,
                    captured,
                    code: code @ ClosureCode::Fix { .. },
                } => (pending, captured, code),
                _ => return fail("Red-App-Fix requires a fix closure".to_string()),
            };
            let (fname, param) = match code {
                ClosureCode::Fix { fname, param, .. } => (fname, param),
                _ => unreachable!(),
            };
            let mut expected_env = match select_valuation(env, pending) {
                Some(v) => v,
                None => return fail("Red-App-Fix pending list must embed into the valuation".to_string()),
            };
            for cb in captured {
                expected_env.push(cb.name.clone(), cb.value.clone());
            }
            expected_env.push(fname.clone(), vf.clone());
            expected_env.push(param.clone(), varg.clone());
            if *eb != expected_env || w != value {
                return fail("Red-App-Fix body environment or value mismatch".to_string());
            }
        }
        RedRule::ClassicVar => {
            let (env, term, value) = classic_judgment(d, path)?;
            match term {
                Term::Var(x) if env.lookup(x) == Some(value) => {}
                _ => return fail("Classic-Red-Var must return the bound value".to_string()),
            }
        }
        RedRule::ClassicLam | RedRule::ClassicLamFix => {
            let (env, term, value) = classic_judgment(d, path)?;
            match value {
                ClassicValue::Closure { env: cenv, code } => {
                    if cenv != env || !alpha_equal_terms(&code.as_term(), term) {
                        return fail("classic closure must capture the whole environment".to_string());
                    }
                }
                _ => return fail("classic closure creation must yield a closure".to_string()),
            }
        }
        RedRule::ClassicPair => {
            let (env, term, value) = classic_judgment(d, path)?;
            let (a, b) = match term {
                Term::Pair(a, b) => (a, b),
                _ => return fail("Classic-Red-Pair term mismatch".to_string()),
            };
            let da = premise_eval(d, 0, path)?;
            let db = premise_eval(d, 1, path)?;
            let (ea, ta, va) = classic_judgment(da, path)?;
            let (eb, tb, vb) = classic_judgment(db, path)?;
            let ok = ea == env
                && eb == env
                && ta == a.as_ref()
                && tb == b.as_ref()
                && *value == ClassicValue::pair(va.clone(), vb.clone());
            if !ok {
                return fail("Classic-Red-Pair premises mismatch".to_string());
            }
        }
        RedRule::ClassicProj => {
            let (env, term, value) = classic_judgment(d, path)?;
            let (ix, e) = match term {
                Term::Proj(ix, e) => (ix, e),
                _ => return fail("Classic-Red-Proj term mismatch".to_string()),
            };
            let dp = premise_eval(d, 0, path)?;
            let (ep, tp, vp) = classic_judgment(dp, path)?;
            let picked = match vp {
                ClassicValue::Pair(a, b) => match ix {
                    crate::syntax::ProjIndex::First => a.as_ref(),
                    crate::syntax::ProjIndex::Second => b.as_ref(),
                },
                _ => return fail("Classic-Red-Proj premise must produce a pair".to_string()),
            };
            if ep != env || tp != e.as_ref() || picked != value {
                return fail("Classic-Red-Proj premises mismatch".to_string());
            }
        }
        RedRule::ClassicLet => {
            let (env, term, value) = classic_judgment(d, path)?;
            let (name, def, body) = match term {
                Term::Let { name, def, body } => (name, def, body),
                _ => return fail("Classic-Red-Let term mismatch".to_string()),
            };
            let d1 = premise_eval(d, 0, path)?;
            let d2 = premise_eval(d, 1, path)?;
            let (e1, t1, v1) = classic_judgment(d1, path)?;
            let (e2, t2, v2) = classic_judgment(d2, path)?;
            let ok = e1 == env
                && t1 == def.as_ref()
                && *e2 == env.extended(name, v1.clone())
                && t2 == body.as_ref()
                && v2 == value;
            if !ok {
                return fail("Classic-Red-Let premises mismatch".to_string());
            }
        }
        RedRule::ClassicApp | RedRule::ClassicAppFix => {
            let (env, term, value) = classic_judgment(d, path)?;
            let (t, u) = match term {
                Term::App(t, u) => (t, u),
                _ => return fail("Classic-Red-App term mismatch".to_string()),
            };
            let df = premise_eval(d, 0, path)?;
            let da = premise_eval(d, 1, path)?;
            let db = premise_eval(d, 2, path)?;
            let (ef, tf, vf) = classic_judgment(df, path)?;
            let (ea, ta, varg) = classic_judgment(da, path)?;
            let (eb, _tb, w) = classic_judgment(db, path)?;
            if ef != env || tf != t.as_ref() || ea != env || ta != u.as_ref() || w != value {
                return fail("Classic-Red-App premises mismatch".to_string());
            }
            let (cenv, code) = match vf {
                ClassicValue::Closure { env, code } => (env, code),
                _ => return fail("Classic-Red-App requires a closure".to_string()),
            };
            let expected_env = match (d.rule, code) {
                (RedRule::ClassicApp, ClosureCode::Lam { param, .. }) => {
                    cenv.extended(param, varg.clone())
                }
                (RedRule::ClassicAppFix, ClosureCode::Fix { fname, param, .. }) => cenv
                    .extended(fname, vf.clone())
                    .extended(param, varg.clone()),
                _ => return fail("Classic-Red-App rule/closure kind mismatch".to_string()),
            };
            if *eb != expected_env {
                return fail("Classic-Red-App body environment mismatch".to_string());
            }
        }
    }
    for (i, p) in d.premises.iter().enumerate() {
        if let RedPremise::Eval(e) = p {
            validate_red_at(e, &format!("{path}.{i}"))?;
        }
    }
    Ok(())
}
