//! Non-interference checking, the dependency-indexed value equivalence,
//! a brute-force semantic dependency oracle, and the well-typed term
//! generator backing the property suites.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eval::{
    eval_classic_with, eval_open_checked, ClassicValuation, ClassicValue, EvalConfig, EvalError,
};
use crate::scope;
use crate::syntax::{
    alpha_equal_terms, alpha_equal_types, AnnotatedContext, Context, Dep, DepVector, Name, Term,
    Type,
};
use crate::typing::{infer, TypeError};
use crate::value::{check_value, Valuation, Value, ValueTypingPremise};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("combinatorial limit exceeded: {0} combinations; shrink the atom domains")]
    CombinatorialLimit(u64),
    #[error("cannot enumerate values of type {0:?}")]
    Unenumerable(Type),
    #[error("value typing failed while comparing values: {0}")]
    WitnessNotFound(String),
    #[error("{0}")]
    Type(#[from] TypeError),
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("term generation exhausted after {0} attempts")]
    GenerationExhausted(usize),
    #[error("the oracle requires an atomic result type, got {0:?}")]
    NonAtomicResult(Type),
}

/// Finite constant sets per atom type, for exhaustive enumeration.
#[derive(Debug, Clone, Default)]
pub struct AtomDomain {
    map: BTreeMap<Name, Vec<Name>>,
}

impl AtomDomain {
    pub fn new() -> AtomDomain {
        AtomDomain::default()
    }

    pub fn insert(&mut self, atom: &str, constants: &[&str]) {
        assert!(!constants.is_empty(), "an atom needs at least one constant");
        self.map
            .insert(atom.to_string(), constants.iter().map(|s| s.to_string()).collect());
    }

    pub fn constants(&self, atom: &str) -> Option<&[Name]> {
        self.map.get(atom).map(|v| v.as_slice())
    }

    /// Two constants per atom appearing in the context's types.
    pub fn default_for_context(ctx: &Context) -> AtomDomain {
        let mut dom = AtomDomain::new();
        for entry in &ctx.entries {
            for atom in atoms_of(&entry.ty) {
                dom.map
                    .entry(atom.clone())
                    .or_insert_with(|| vec![format!("{atom}_0"), format!("{atom}_1")]);
            }
        }
        dom
    }
}

fn atoms_of(ty: &Type) -> Vec<Name> {
    match ty {
        Type::Atom(a) => vec![a.clone()],
        Type::Product(a, b) => {
            let mut out = atoms_of(a);
            out.extend(atoms_of(b));
            out
        }
        Type::Closure(ct) => {
            let mut out = Vec::new();
            for e in &ct.captured.ctx.entries {
                out.extend(atoms_of(&e.ty));
            }
            out.extend(atoms_of(&ct.param_ty));
            out.extend(atoms_of(&ct.result_ty));
            out
        }
    }
}

fn enumerate_values(ty: &Type, domains: &AtomDomain) -> Result<Vec<Value>, AnalysisError> {
    match ty {
        Type::Atom(a) => {
            let consts = domains
                .constants(a)
                .ok_or_else(|| AnalysisError::Unenumerable(ty.clone()))?;
            Ok(consts.iter().map(|c| Value::atom(a, c)).collect())
        }
        Type::Product(a, b) => {
            let left = enumerate_values(a, domains)?;
            let right = enumerate_values(b, domains)?;
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left {
                for r in &right {
                    out.push(Value::pair(l.clone(), r.clone()));
                }
            }
            Ok(out)
        }
        Type::Closure(_) => Err(AnalysisError::Unenumerable(ty.clone())),
    }
}

/// All valuations of a context over the given domains, in canonical order.
pub fn enumerate_valuations(
    ctx: &Context,
    domains: &AtomDomain,
) -> Result<Vec<Valuation>, AnalysisError> {
    let mut out = vec![Valuation::empty()];
    for entry in &ctx.entries {
        let values = enumerate_values(&entry.ty, domains)?;
        let mut next = Vec::with_capacity(out.len() * values.len());
        for base in &out {
            for v in &values {
                next.push(base.extended(&entry.name, v.clone()));
            }
        }
        out = next;
    }
    Ok(out)
}

/// V =_Φ0 V': the valuations agree on every variable marked needed,
/// recursively Φ0-indexed on closure values.
pub fn phi_equiv_valuations(v1: &Valuation, v2: &Valuation, phi0: &DepVector) -> bool {
    if v1.domain() != v2.domain() || !phi0.matches_first(&v1.domain()) {
        return false;
    }
    phi0.entries.iter().all(|(name, dep)| {
        !dep.is_needed()
            || match (v1.lookup(name), v2.lookup(name)) {
                (Some(a), Some(b)) => equiv_values_untyped(a, b, phi0),
                _ => false,
            }
    })
}

impl DepVector {
    fn matches_first(&self, domain: &[Name]) -> bool {
        self.len() == domain.len()
            && self.entries.iter().zip(domain).all(|((n, _), d)| n == d)
    }
}

/// Structural Φ0-indexed comparison without types: atoms by constant,
/// pairs pointwise; closures compare code up to alpha and captured values
/// only where the recorded capture dependency is contained in Φ0.
fn equiv_values_untyped(a: &Value, b: &Value, phi0: &DepVector) -> bool {
    match (a, b) {
        (
            Value::AtomConst { atom, constant },
            Value::AtomConst {
                atom: a2,
                constant: c2,
            },
        ) => atom == a2 && constant == c2,
        (Value::Pair(x, y), Value::Pair(u, w)) => {
            equiv_values_untyped(x, u, phi0) && equiv_values_untyped(y, w, phi0)
        }
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
                && alpha_equal_terms(&k1.as_term(), &k2.as_term())
                && c1.len() == c2.len()
                && c1.iter().zip(c2).all(|(x, y)| {
                    if x.name != y.name {
                        return false;
                    }
                    let psi = x.deps.as_ref().or(y.deps.as_ref());
                    match psi {
                        Some(psi) if !psi.subset_of(phi0) => true,
                        _ => equiv_values_untyped(&x.value, &y.value, phi0),
                    }
                })
        }
        _ => false,
    }
}

/// Γ ⊢ v =_Φ0 v' : σ. Both sides must inhabit σ; closures must share their
/// code up to alpha, and each captured pair is compared only when its
/// witness Ψ_i is contained in Φ0 (zero-extended to Φ0's domain).
pub fn value_equiv(
    ctx: &Context,
    v1: &Value,
    v2: &Value,
    ty: &Type,
    phi0: &DepVector,
) -> Result<bool, AnalysisError> {
    match (v1, v2, ty) {
        (
            Value::AtomConst { constant: c1, .. },
            Value::AtomConst { constant: c2, .. },
            Type::Atom(_),
        ) => {
            ensure_typed(ctx, v1, ty)?;
            ensure_typed(ctx, v2, ty)?;
            Ok(c1 == c2)
        }
        (Value::Pair(a1, b1), Value::Pair(a2, b2), Type::Product(ta, tb)) => {
            Ok(value_equiv(ctx, a1, a2, ta, phi0)? && value_equiv(ctx, b1, b2, tb, phi0)?)
        }
        (
            Value::Closure {
                captured: c1,
                code: k1,
                ..
            },
            Value::Closure {
                captured: c2,
                code: k2,
                ..
            },
            Type::Closure(_),
        ) => {
            let d1 = ensure_typed(ctx, v1, ty)?;
            let d2 = ensure_typed(ctx, v2, ty)?;
            if !alpha_equal_terms(&k1.as_term(), &k2.as_term()) {
                return Ok(false);
            }
            if c1.len() != c2.len()
                || c1.iter().zip(c2.iter()).any(|(a, b)| a.name != b.name)
            {
                return Ok(false);
            }
            let psis = d1
                .chain_witnesses()
                .ok_or_else(|| AnalysisError::WitnessNotFound("missing chain".to_string()))?;
            let _ = &d2;
            // Captured-value types come from the derivation's premises.
            let mut capt_nodes = d1.premises.iter().filter_map(|p| match p {
                ValueTypingPremise::Value(v) => Some(v),
                _ => None,
            });
            for (i, (cb1, cb2)) in c1.iter().zip(c2.iter()).enumerate() {
                let node = capt_nodes
                    .next()
                    .ok_or_else(|| AnalysisError::WitnessNotFound("missing premise".to_string()))?;
                if psis[i].subset_of(phi0)
                    && !value_equiv(&node.ctx, &cb1.value, &cb2.value, &node.ty, phi0)?
                {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Ok(false),
    }
}

fn ensure_typed(
    ctx: &Context,
    v: &Value,
    ty: &Type,
) -> Result<crate::value::ValueTypingDerivation, AnalysisError> {
    check_value(ctx, v, ty).map_err(|e| AnalysisError::WitnessNotFound(e.to_string()))
}

/// One observed violation of non-interference.
#[derive(Debug, Clone)]
pub struct Violation {
    pub left_valuation: Valuation,
    pub right_valuation: Valuation,
    pub left_value: Value,
    pub right_value: Value,
}

#[derive(Debug, Clone)]
pub struct NonInterferenceReport {
    pub term: Term,
    pub ctx: Context,
    pub deps: DepVector,
    pub result_ty: Type,
    pub pairs_tested: u64,
    pub violations: Vec<Violation>,
}

impl NonInterferenceReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct NonInterferenceConfig {
    pub max_pairs: u64,
    pub eval: EvalConfig,
}

impl Default for NonInterferenceConfig {
    fn default() -> NonInterferenceConfig {
        NonInterferenceConfig {
            max_pairs: 100_000,
            eval: EvalConfig::default(),
        }
    }
}

pub fn check_noninterference(
    ctx: &Context,
    term: &Term,
    domains: &AtomDomain,
) -> Result<NonInterferenceReport, AnalysisError> {
    check_noninterference_with(ctx, term, domains, &NonInterferenceConfig::default())
}

/// Enumerates all Φ0-equivalent valuation pairs over the domains and checks
/// that evaluation results are Φ0-equivalent (and equal, for atomic types).
pub fn check_noninterference_with(
    ctx: &Context,
    term: &Term,
    domains: &AtomDomain,
    config: &NonInterferenceConfig,
) -> Result<NonInterferenceReport, AnalysisError> {
    let inf = infer(ctx, term)?;
    let valuations = enumerate_valuations(ctx, domains)?;
    let total = (valuations.len() as u64).saturating_mul(valuations.len() as u64);
    if total > config.max_pairs {
        return Err(AnalysisError::CombinatorialLimit(total));
    }
    let mut results: Vec<Option<Value>> = vec![None; valuations.len()];
    let mut pairs_tested = 0;
    let mut violations = Vec::new();
    for i in 0..valuations.len() {
        for j in 0..valuations.len() {
            if !phi_equiv_valuations(&valuations[i], &valuations[j], &inf.deps) {
                continue;
            }
            pairs_tested += 1;
            for k in [i, j] {
                if results[k].is_none() {
                    let (v, _) = eval_open_checked(
                        ctx,
                        &valuations[k],
                        term,
                        &config.eval,
                        false,
                    )?;
                    results[k] = Some(v);
                }
            }
            let left = results[i].clone().unwrap();
            let right = results[j].clone().unwrap();
            let mut ok = value_equiv(ctx, &left, &right, &inf.ty, &inf.deps)?;
            if ok && matches!(inf.ty, Type::Atom(_)) {
                ok = left == right;
            }
            if !ok {
                violations.push(Violation {
                    left_valuation: valuations[i].clone(),
                    right_valuation: valuations[j].clone(),
                    left_value: left,
                    right_value: right,
                });
            }
        }
    }
    Ok(NonInterferenceReport {
        term: term.clone(),
        ctx: ctx.clone(),
        deps: inf.deps,
        result_ty: inf.ty,
        pairs_tested,
        violations,
    })
}

/// The set of variables that can influence an atomic result, found by
/// exhaustively toggling one variable at a time under the classic
/// semantics, independent of the open-closure machinery under test.
pub fn semantic_deps_oracle(
    ctx: &Context,
    term: &Term,
    domains: &AtomDomain,
) -> Result<Vec<Name>, AnalysisError> {
    let inf = infer(ctx, term)?;
    if !matches!(inf.ty, Type::Atom(_)) {
        return Err(AnalysisError::NonAtomicResult(inf.ty));
    }
    let valuations = enumerate_valuations(ctx, domains)?;
    let per_var: Vec<Vec<Value>> = ctx
        .entries
        .iter()
        .map(|e| enumerate_values(&e.ty, domains))
        .collect::<Result<_, _>>()?;
    let combos: u64 = valuations.len() as u64
        * per_var
            .iter()
            .map(|v| v.len() as u64)
            .max()
            .unwrap_or(1);
    if combos > 1_000_000 {
        return Err(AnalysisError::CombinatorialLimit(combos));
    }
    let config = EvalConfig::default();
    let mut needed = Vec::new();
    'vars: for (i, entry) in ctx.entries.iter().enumerate() {
        for base in &valuations {
            let (w0, _) = eval_classic_with(&to_classic_valuation(base), term, &config)?;
            for candidate in &per_var[i] {
                if candidate == &base.entries[i].1 {
                    continue;
                }
                let mut flipped = base.clone();
                flipped.entries[i] = (entry.name.clone(), candidate.clone());
                let (w1, _) = eval_classic_with(&to_classic_valuation(&flipped), term, &config)?;
                if w0 != w1 {
                    needed.push(entry.name.clone());
                    continue 'vars;
                }
            }
        }
    }
    Ok(needed)
}

fn to_classic_value(v: &Value) -> ClassicValue {
    match v {
        Value::AtomConst { atom, constant } => ClassicValue::AtomConst {
            atom: atom.clone(),
            constant: constant.clone(),
        },
        Value::Pair(a, b) => ClassicValue::pair(to_classic_value(a), to_classic_value(b)),
        Value::Closure { .. } => {
            unreachable!("enumerated valuations contain first-order values only")
        }
    }
}

pub fn to_classic_valuation(v: &Valuation) -> ClassicValuation {
    ClassicValuation {
        entries: v
            .entries
            .iter()
            .map(|(n, val)| (n.clone(), to_classic_value(val)))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

impl NonInterferenceReport {
    /// Line-oriented rendering; `show` formats terms, valuations and values.
    pub fn to_text(
        &self,
        term: impl Fn(&Term) -> String,
        valuation: impl Fn(&Valuation) -> String,
        value: impl Fn(&Value) -> String,
    ) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "term: {}", term(&self.term));
        let _ = writeln!(
            out,
            "annotation: {}",
            self.deps
                .entries
                .iter()
                .map(|(n, d)| format!("{n}^{d}"))
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(out, "pairs tested: {}", self.pairs_tested);
        let _ = writeln!(out, "violations: {}", self.violations.len());
        for (i, v) in self.violations.iter().enumerate() {
            let _ = writeln!(
                out,
                "violation {}: V={} V'={} v={} v'={}",
                i,
                valuation(&v.left_valuation),
                valuation(&v.right_valuation),
                value(&v.left_value),
                value(&v.right_value),
            );
        }
        out
    }

    /// One JSON record per violation plus a summary header.
    pub fn to_json(
        &self,
        term: impl Fn(&Term) -> String,
        valuation: impl Fn(&Valuation) -> String,
        value: impl Fn(&Value) -> String,
    ) -> serde_json::Value {
        serde_json::json!({
            "term": term(&self.term),
            "annotation": self.deps.entries.iter()
                .map(|(n, d)| (n.clone(), d.is_needed()))
                .collect::<Vec<_>>(),
            "pairs_tested": self.pairs_tested,
            "violations": self.violations.iter().map(|v| serde_json::json!({
                "left_valuation": valuation(&v.left_valuation),
                "right_valuation": valuation(&v.right_valuation),
                "left_value": value(&v.left_value),
                "right_value": value(&v.right_value),
            })).collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// Typed term generation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub depth: usize,
    pub allow_fix: bool,
    pub max_attempts: usize,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            depth: 5,
            allow_fix: false,
            max_attempts: 64,
        }
    }
}

/// Generates a term that infers successfully in `ctx`, optionally at an
/// alpha-equal target type, by walking the typing rules backward with
/// weighted choices and bounded retries.
pub fn gen_typed_term(
    ctx: &Context,
    target: Option<&Type>,
    depth: usize,
    seed: u64,
) -> Result<Term, AnalysisError> {
    gen_typed_term_with(
        ctx,
        target,
        &GenConfig {
            depth,
            ..GenConfig::default()
        },
        seed,
    )
}

pub fn gen_typed_term_with(
    ctx: &Context,
    target: Option<&Type>,
    config: &GenConfig,
    seed: u64,
) -> Result<Term, AnalysisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gen = Generator {
        rng: &mut rng,
        allow_fix: config.allow_fix,
        fresh: 0,
    };
    for _ in 0..config.max_attempts {
        if let Some(term) = gen.term(ctx, target, config.depth) {
            if infer(ctx, &term).is_ok() {
                return Ok(term);
            }
        }
    }
    Err(AnalysisError::GenerationExhausted(config.max_attempts))
}

struct Generator<'a> {
    rng: &'a mut ChaCha8Rng,
    allow_fix: bool,
    fresh: usize,
}

impl Generator<'_> {
    fn fresh_name(&mut self, base: &str, ctx: &Context) -> Name {
        loop {
            self.fresh += 1;
            let name = format!("{base}{}", self.fresh);
            if ctx.position(&name).is_none() {
                return name;
            }
        }
    }

    fn pool_atoms(&mut self, ctx: &Context) -> Vec<Name> {
        let mut atoms = Vec::new();
        for e in &ctx.entries {
            for a in atoms_of(&e.ty) {
                if !atoms.contains(&a) {
                    atoms.push(a);
                }
            }
        }
        if atoms.is_empty() {
            atoms.push("a".to_string());
        }
        atoms
    }

    fn pool_type(&mut self, ctx: &Context) -> Type {
        let atoms = self.pool_atoms(ctx);
        let roll = self.rng.gen_range(0..10);
        if roll < 7 || atoms.len() == 1 && roll < 9 {
            Type::Atom(atoms[self.rng.gen_range(0..atoms.len())].clone())
        } else if roll < 9 {
            Type::product(
                Type::Atom(atoms[self.rng.gen_range(0..atoms.len())].clone()),
                Type::Atom(atoms[self.rng.gen_range(0..atoms.len())].clone()),
            )
        } else {
            // A closure type only matches an argument that is a variable of
            // exactly this type, so reuse one already in scope when present.
            let closures: Vec<&Type> = ctx
                .entries
                .iter()
                .filter(|e| matches!(e.ty, Type::Closure(_)))
                .map(|e| &e.ty)
                .collect();
            if closures.is_empty() {
                Type::Atom(atoms[self.rng.gen_range(0..atoms.len())].clone())
            } else {
                closures[self.rng.gen_range(0..closures.len())].clone()
            }
        }
    }

    fn vars_of_type(&self, ctx: &Context, target: &Type) -> Vec<Name> {
        ctx.entries
            .iter()
            .filter(|e| alpha_equal_types(&e.ty, target))
            .map(|e| e.name.clone())
            .collect()
    }

    fn term(&mut self, ctx: &Context, target: Option<&Type>, depth: usize) -> Option<Term> {
        if depth <= 1 {
            return self.leaf(ctx, target);
        }
        for _ in 0..6 {
            let candidate = match target {
                Some(ty) => self.targeted(ctx, ty, depth),
                None => self.wildcard(ctx, depth),
            };
            if candidate.is_some() {
                return candidate;
            }
        }
        self.leaf(ctx, target)
    }

    fn leaf(&mut self, ctx: &Context, target: Option<&Type>) -> Option<Term> {
        let names: Vec<Name> = match target {
            Some(ty) => self.vars_of_type(ctx, ty),
            None => ctx.domain(),
        };
        if names.is_empty() {
            return None;
        }
        Some(Term::Var(
            names[self.rng.gen_range(0..names.len())].clone(),
        ))
    }

    fn wildcard(&mut self, ctx: &Context, depth: usize) -> Option<Term> {
        match self.rng.gen_range(0..14) {
            0 | 1 => self.leaf(ctx, None),
            2 | 3 | 4 => Some(Term::pair(
                self.term(ctx, None, depth - 1)?,
                self.term(ctx, None, depth - 1)?,
            )),
            5 | 6 | 7 => {
                let param_ty = self.pool_type(ctx);
                let param = self.fresh_name("x", ctx);
                let inner = ctx.extended(&param, param_ty.clone());
                let body = self.term(&inner, None, depth - 1)?;
                Some(Term::Lam {
                    param,
                    param_ty,
                    body: Box::new(body),
                })
            }
            8 | 9 | 10 => {
                let name = self.fresh_name("v", ctx);
                let def = self.term(ctx, None, depth - 1)?;
                let def_ty = infer(ctx, &def).ok()?.ty;
                let inner = ctx.extended(&name, def_ty);
                let body = self.term(&inner, None, depth - 1)?;
                Some(Term::Let {
                    name,
                    def: Box::new(def),
                    body: Box::new(body),
                })
            }
            11 | 12 => self.application(ctx, depth),
            _ => {
                if self.allow_fix {
                    self.fixpoint(ctx, depth)
                } else {
                    self.application(ctx, depth)
                }
            }
        }
    }

    fn targeted(&mut self, ctx: &Context, target: &Type, depth: usize) -> Option<Term> {
        let vars = self.vars_of_type(ctx, target);
        if !vars.is_empty() && self.rng.gen_range(0..4) == 0 {
            return Some(Term::Var(vars[self.rng.gen_range(0..vars.len())].clone()));
        }
        match target {
            Type::Product(a, b) => Some(Term::pair(
                self.term(ctx, Some(a), depth - 1)?,
                self.term(ctx, Some(b), depth - 1)?,
            )),
            Type::Atom(_) => match self.rng.gen_range(0..6) {
                0 | 1 => {
                    // Project the target out of a generated pair.
                    let other = self.pool_type(ctx);
                    if self.rng.gen_bool(0.5) {
                        let pair = Term::pair(
                            self.term(ctx, Some(target), depth - 1)?,
                            self.term(ctx, Some(&other), depth - 1)?,
                        );
                        Some(Term::proj1(pair))
                    } else {
                        let pair = Term::pair(
                            self.term(ctx, Some(&other), depth - 1)?,
                            self.term(ctx, Some(target), depth - 1)?,
                        );
                        Some(Term::proj2(pair))
                    }
                }
                2 | 3 => {
                    // A beta redex returning the target; atoms are stable
                    // under the application-site substitution.
                    let param_ty = self.pool_type(ctx);
                    let param = self.fresh_name("x", ctx);
                    let inner = ctx.extended(&param, param_ty.clone());
                    let body = self.term(&inner, Some(target), depth - 1)?;
                    let arg = self.term(ctx, Some(&param_ty), depth - 1)?;
                    Some(Term::app(
                        Term::Lam {
                            param,
                            param_ty,
                            body: Box::new(body),
                        },
                        arg,
                    ))
                }
                4 => {
                    let name = self.fresh_name("v", ctx);
                    let def = self.term(ctx, None, depth - 1)?;
                    let def_ty = infer(ctx, &def).ok()?.ty;
                    let inner = ctx.extended(&name, def_ty);
                    let body = self.term(&inner, Some(target), depth - 1)?;
                    Some(Term::Let {
                        name,
                        def: Box::new(def),
                        body: Box::new(body),
                    })
                }
                _ => self.leaf(ctx, Some(target)),
            },
            Type::Closure(_) => {
                // Only variables are guaranteed to match a closure type's
                // annotations exactly.
                self.leaf(ctx, Some(target))
            }
        }
    }

    fn application(&mut self, ctx: &Context, depth: usize) -> Option<Term> {
        // Either call a closure-typed variable or build a beta redex.
        let closure_vars: Vec<(Name, Type, Type)> = ctx
            .entries
            .iter()
            .filter_map(|e| match &e.ty {
                Type::Closure(ct) if ct.captured.ctx.embeds_in(ctx) => {
                    Some((e.name.clone(), ct.param_ty.clone(), e.ty.clone()))
                }
                _ => None,
            })
            .collect();
        if !closure_vars.is_empty() && self.rng.gen_bool(0.5) {
            let (name, param_ty, _) =
                closure_vars[self.rng.gen_range(0..closure_vars.len())].clone();
            let arg = self.term(ctx, Some(&param_ty), depth - 1)?;
            return Some(Term::app(Term::Var(name), arg));
        }
        let param_ty = self.pool_type(ctx);
        let param = self.fresh_name("x", ctx);
        let inner = ctx.extended(&param, param_ty.clone());
        let body = self.term(&inner, None, depth - 1)?;
        let arg = self.term(ctx, Some(&param_ty), depth - 1)?;
        Some(Term::app(
            Term::Lam {
                param,
                param_ty,
                body: Box::new(body),
            },
            arg,
        ))
    }

    fn fixpoint(&mut self, ctx: &Context, depth: usize) -> Option<Term> {
        // The body is generated without the self-reference in scope, so the
        // fixpoint always terminates when applied.
        let atoms = self.pool_atoms(ctx);
        let param_ty = Type::Atom(atoms[self.rng.gen_range(0..atoms.len())].clone());
        let fname = self.fresh_name("f", ctx);
        let param = self.fresh_name("x", ctx);
        let inner = ctx.extended(&param, param_ty.clone());
        let body = self.term(&inner, None, depth - 1)?;
        let result_ty = infer(&inner, &body).ok()?.ty;
        scope::check_type(&inner, &result_ty).ok()?;
        Some(Term::Fix {
            fname,
            param,
            param_ty,
            result_ty,
            body: Box::new(body),
        })
    }
}

/// Random well-scoped types for the substitution and round-trip suites.
pub fn gen_type(ctx: &Context, depth: usize, seed: u64) -> Type {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_type_rec(&mut rng, ctx, depth)
}

fn gen_type_rec(rng: &mut ChaCha8Rng, ctx: &Context, depth: usize) -> Type {
    let atoms = ["a", "b", "c"];
    if depth == 0 {
        return Type::Atom(atoms[rng.gen_range(0..atoms.len())].to_string());
    }
    match rng.gen_range(0..6) {
        0 | 1 => Type::Atom(atoms[rng.gen_range(0..atoms.len())].to_string()),
        2 | 3 => Type::product(
            gen_type_rec(rng, ctx, depth - 1),
            gen_type_rec(rng, ctx, depth - 1),
        ),
        _ => {
            let cap_len = rng.gen_range(0..=ctx.len());
            let prefix = ctx.prefix(cap_len);
            let mut captured = AnnotatedContext::empty();
            for e in &prefix.entries {
                captured.push(e.name.clone(), e.ty.clone(), Dep(rng.gen_bool(0.5)));
            }
            let param = format!("p{}", rng.gen_range(0..1000));
            if prefix.position(&param).is_some() {
                return Type::Atom(atoms[0].to_string());
            }
            let param_ty = gen_type_rec(rng, &prefix, depth - 1);
            let inner = prefix.extended(&param, param_ty.clone());
            let result_ty = gen_type_rec(rng, &inner, depth - 1);
            Type::closure(captured, &param, Dep(rng.gen_bool(0.5)), param_ty, result_ty)
        }
    }
}
