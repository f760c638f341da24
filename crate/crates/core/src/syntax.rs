//! Abstract syntax: terms, types, contexts and the boolean dependency algebra.
//!
//! Contexts are ordered telescopes; later entries may mention earlier ones
//! inside closure types, so order is significant and never exchangeable.

use std::fmt;

pub type Name = String;

/// Projection index for pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjIndex {
    First,
    Second,
}

impl ProjIndex {
    pub fn as_u8(self) -> u8 {
        match self {
            ProjIndex::First => 1,
            ProjIndex::Second => 2,
        }
    }
}

/// A single dependency annotation: 1 = needed, 0 = not needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Dep(pub bool);

impl Dep {
    pub const ZERO: Dep = Dep(false);
    pub const ONE: Dep = Dep(true);

    /// Disjunction: used in the sum of dependency vectors.
    pub fn or(self, other: Dep) -> Dep {
        Dep(self.0 || other.0)
    }

    /// Conjunction: used to scale a vector by a single annotation.
    pub fn and(self, other: Dep) -> Dep {
        Dep(self.0 && other.0)
    }

    pub fn is_needed(self) -> bool {
        self.0
    }
}

impl fmt::Display for Dep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.0 { 1 } else { 0 })
    }
}

/// Terms of the calculus. All binders carry concrete names; the parser
/// renames shadowed binders so that every judgment sees pairwise distinct
/// names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(Name),
    Pair(Box<Term>, Box<Term>),
    Proj(ProjIndex, Box<Term>),
    Lam {
        param: Name,
        param_ty: Type,
        body: Box<Term>,
    },
    Fix {
        fname: Name,
        param: Name,
        param_ty: Type,
        result_ty: Type,
        body: Box<Term>,
    },
    App(Box<Term>, Box<Term>),
    Let {
        name: Name,
        def: Box<Term>,
        body: Box<Term>,
    },
}

impl Term {
    pub fn var(n: &str) -> Term {
        Term::Var(n.to_string())
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn proj1(e: Term) -> Term {
        Term::Proj(ProjIndex::First, Box::new(e))
    }

    pub fn proj2(e: Term) -> Term {
        Term::Proj(ProjIndex::Second, Box::new(e))
    }

    pub fn lam(param: &str, param_ty: Type, body: Term) -> Term {
        Term::Lam {
            param: param.to_string(),
            param_ty,
            body: Box::new(body),
        }
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn let_in(name: &str, def: Term, body: Term) -> Term {
        Term::Let {
            name: name.to_string(),
            def: Box::new(def),
            body: Box::new(body),
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Name> {
        let mut acc = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut acc);
        acc
    }

    fn collect_free(&self, bound: &mut Vec<Name>, acc: &mut Vec<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) && !acc.contains(x) {
                    acc.push(x.clone());
                }
            }
            Term::Pair(a, b) => {
                a.collect_free(bound, acc);
                b.collect_free(bound, acc);
            }
            Term::Proj(_, e) => e.collect_free(bound, acc),
            Term::Lam { param, body, .. } => {
                bound.push(param.clone());
                body.collect_free(bound, acc);
                bound.pop();
            }
            Term::Fix {
                fname, param, body, ..
            } => {
                bound.push(fname.clone());
                bound.push(param.clone());
                body.collect_free(bound, acc);
                bound.pop();
                bound.pop();
            }
            Term::App(f, a) => {
                f.collect_free(bound, acc);
                a.collect_free(bound, acc);
            }
            Term::Let { name, def, body } => {
                def.collect_free(bound, acc);
                bound.push(name.clone());
                body.collect_free(bound, acc);
                bound.pop();
            }
        }
    }
}

/// Types: atoms, products and open closure types. A closure type records
/// the annotated context it captures from; those names are bound
/// occurrences of ambient context variables, not binders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Type {
    Atom(Name),
    Product(Box<Type>, Box<Type>),
    Closure(Box<ClosureType>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureType {
    /// Captured context with its dependency annotation.
    pub captured: AnnotatedContext,
    /// The argument binder; renameable, unlike the captured names.
    pub param: Name,
    pub param_dep: Dep,
    pub param_ty: Type,
    /// May mention `param` inside nested captured contexts.
    pub result_ty: Type,
}

impl Type {
    pub fn atom(n: &str) -> Type {
        Type::Atom(n.to_string())
    }

    pub fn product(a: Type, b: Type) -> Type {
        Type::Product(Box::new(a), Box::new(b))
    }

    pub fn closure(
        captured: AnnotatedContext,
        param: &str,
        param_dep: Dep,
        param_ty: Type,
        result_ty: Type,
    ) -> Type {
        Type::Closure(Box::new(ClosureType {
            captured,
            param: param.to_string(),
            param_dep,
            param_ty,
            result_ty,
        }))
    }
}

/// An unannotated typing context: an ordered telescope of bindings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Context {
    pub entries: Vec<ContextEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextEntry {
    pub name: Name,
    pub ty: Type,
}

impl Context {
    pub fn empty() -> Context {
        Context::default()
    }

    pub fn from_pairs(pairs: &[(&str, Type)]) -> Context {
        Context {
            entries: pairs
                .iter()
                .map(|(n, t)| ContextEntry {
                    name: n.to_string(),
                    ty: t.clone(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, name: Name, ty: Type) {
        debug_assert!(self.position(&name).is_none(), "duplicate context name");
        self.entries.push(ContextEntry { name, ty });
    }

    pub fn extended(&self, name: &str, ty: Type) -> Context {
        let mut out = self.clone();
        out.push(name.to_string(), ty);
        out
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.name == name)
            .map(|e| &e.ty)
    }

    pub fn domain(&self) -> Vec<Name> {
        self.entries.iter().map(|e| e.name.clone()).collect()
    }

    pub fn prefix(&self, len: usize) -> Context {
        Context {
            entries: self.entries[..len].to_vec(),
        }
    }

    pub fn concat(&self, other: &Context) -> Context {
        let mut out = self.clone();
        out.entries.extend(other.entries.iter().cloned());
        out
    }

    /// True when `self` is a literal prefix of `longer`: same names in the
    /// same order, with alpha-equal types.
    pub fn is_prefix_of(&self, longer: &Context) -> bool {
        self.len() <= longer.len()
            && self
                .entries
                .iter()
                .zip(&longer.entries)
                .all(|(a, b)| a.name == b.name && alpha_equal_types(&a.ty, &b.ty))
    }

    /// In-order subsequence embedding: every entry appears in `ambient`
    /// with an alpha-equal type, in the same relative order. Weakening may
    /// insert bindings anywhere, so captured telescopes are matched this
    /// way rather than as contiguous prefixes.
    pub fn embeds_in(&self, ambient: &Context) -> bool {
        self.embedding_positions(ambient).is_some()
    }

    /// The ambient positions at which the embedding matches, if it exists.
    pub fn embedding_positions(&self, ambient: &Context) -> Option<Vec<usize>> {
        let mut positions = Vec::with_capacity(self.len());
        let mut next = 0;
        for entry in &self.entries {
            let found = ambient.entries[next..]
                .iter()
                .position(|e| e.name == entry.name)?;
            let at = next + found;
            if !alpha_equal_types(&ambient.entries[at].ty, &entry.ty) {
                return None;
            }
            positions.push(at);
            next = at + 1;
        }
        Some(positions)
    }

    /// The sub-context at the given names, which must occur in this order;
    /// None when a name is missing or out of order.
    pub fn select(&self, names: &[Name]) -> Option<Context> {
        let mut next = 0;
        let mut out = Context::empty();
        for name in names {
            let found = self.entries[next..].iter().position(|e| &e.name == name)?;
            let at = next + found;
            out.entries.push(self.entries[at].clone());
            next = at + 1;
        }
        Some(out)
    }
}

/// A dependency vector: one annotation per variable of the context it
/// decorates, in the same order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DepVector {
    pub entries: Vec<(Name, Dep)>,
}

impl DepVector {
    pub fn zeros(ctx: &Context) -> DepVector {
        DepVector {
            entries: ctx
                .entries
                .iter()
                .map(|e| (e.name.clone(), Dep::ZERO))
                .collect(),
        }
    }

    /// All-zero except `name`, which must be in the domain.
    pub fn unit(ctx: &Context, name: &str) -> DepVector {
        let mut v = DepVector::zeros(ctx);
        let hit = v.entries.iter_mut().find(|(n, _)| n == name);
        hit.expect("unit: name not in context").1 = Dep::ONE;
        v
    }

    pub fn from_pairs(pairs: &[(&str, bool)]) -> DepVector {
        DepVector {
            entries: pairs
                .iter()
                .map(|(n, d)| (n.to_string(), Dep(*d)))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn domain(&self) -> Vec<Name> {
        self.entries.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<Dep> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, d)| *d)
    }

    /// Missing names read as 0, matching the restriction reading used when
    /// reordering substitutions.
    pub fn get_or_zero(&self, name: &str) -> Dep {
        self.get(name).unwrap_or(Dep::ZERO)
    }

    pub fn same_domain(&self, other: &DepVector) -> bool {
        self.len() == other.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|((a, _), (b, _))| a == b)
    }

    pub fn matches_context(&self, ctx: &Context) -> bool {
        self.len() == ctx.len()
            && self
                .entries
                .iter()
                .zip(&ctx.entries)
                .all(|((n, _), e)| *n == e.name)
    }

    pub fn prefix(&self, len: usize) -> DepVector {
        DepVector {
            entries: self.entries[..len].to_vec(),
        }
    }

    pub fn suffix(&self, from: usize) -> DepVector {
        DepVector {
            entries: self.entries[from..].to_vec(),
        }
    }

    /// Extends with zeros so the domain matches `ctx`; the current domain
    /// must be a prefix of `ctx`'s.
    pub fn zero_extend(&self, ctx: &Context) -> DepVector {
        assert!(
            self.len() <= ctx.len()
                && self
                    .entries
                    .iter()
                    .zip(&ctx.entries)
                    .all(|((n, _), e)| *n == e.name),
            "zero_extend: domain is not a prefix of the target context"
        );
        let mut out = self.clone();
        for e in &ctx.entries[self.len()..] {
            out.entries.push((e.name.clone(), Dep::ZERO));
        }
        out
    }

    /// Re-reads the vector over a context's domain by name; entries the
    /// vector lacks come out zero. Any needed entry outside the domain is
    /// an internal inconsistency.
    pub fn aligned_to(&self, ctx: &Context) -> DepVector {
        debug_assert!(
            self.entries
                .iter()
                .all(|(n, d)| !d.is_needed() || ctx.position(n).is_some()),
            "aligned_to would drop a needed dependency"
        );
        DepVector {
            entries: ctx
                .entries
                .iter()
                .map(|e| (e.name.clone(), self.get_or_zero(&e.name)))
                .collect(),
        }
    }

    pub fn push(&mut self, name: Name, dep: Dep) {
        self.entries.push((name, dep));
    }

    pub fn all_zero(&self) -> bool {
        self.entries.iter().all(|(_, d)| !d.is_needed())
    }

    pub fn needed(&self) -> Vec<Name> {
        self.entries
            .iter()
            .filter(|(_, d)| d.is_needed())
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Pointwise implication over the union of domains, reading missing
    /// entries as 0 on either side.
    pub fn subset_of(&self, other: &DepVector) -> bool {
        self.entries
            .iter()
            .all(|(n, d)| !d.is_needed() || other.get_or_zero(n).is_needed())
    }
}

/// Pointwise disjunction. Domains must agree exactly; a mismatch is an
/// internal invariant violation, never reachable from well-formed judgments.
pub fn dep_sum(a: &DepVector, b: &DepVector) -> DepVector {
    assert!(
        a.same_domain(b),
        "dep_sum: domain mismatch: {:?} vs {:?}",
        a.domain(),
        b.domain()
    );
    DepVector {
        entries: a
            .entries
            .iter()
            .zip(&b.entries)
            .map(|((n, da), (_, db))| (n.clone(), da.or(*db)))
            .collect(),
    }
}

/// Pointwise conjunction with a single annotation; scaling by 0 erases the
/// whole vector.
pub fn dep_scale(phi: Dep, v: &DepVector) -> DepVector {
    DepVector {
        entries: v
            .entries
            .iter()
            .map(|(n, d)| (n.clone(), phi.and(*d)))
            .collect(),
    }
}

/// A context together with its dependency annotation over the same domain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotatedContext {
    pub ctx: Context,
    pub deps: DepVector,
}

impl AnnotatedContext {
    pub fn empty() -> AnnotatedContext {
        AnnotatedContext::default()
    }

    pub fn new(ctx: Context, deps: DepVector) -> AnnotatedContext {
        assert!(
            deps.matches_context(&ctx),
            "annotated context: annotation domain must match the context"
        );
        AnnotatedContext { ctx, deps }
    }

    pub fn from_triples(triples: &[(&str, Type, bool)]) -> AnnotatedContext {
        let mut ctx = Context::empty();
        let mut deps = DepVector::default();
        for (n, t, d) in triples {
            ctx.push(n.to_string(), t.clone());
            deps.push(n.to_string(), Dep(*d));
        }
        AnnotatedContext { ctx, deps }
    }

    pub fn len(&self) -> usize {
        self.ctx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ctx.is_empty()
    }

    pub fn push(&mut self, name: Name, ty: Type, dep: Dep) {
        self.ctx.push(name.clone(), ty);
        self.deps.push(name, dep);
    }

    pub fn prefix(&self, len: usize) -> AnnotatedContext {
        AnnotatedContext {
            ctx: self.ctx.prefix(len),
            deps: self.deps.prefix(len),
        }
    }
}

/// Binder-correspondence environment for alpha comparison. Captured-context
/// names are bound occurrences of ambient variables: they only rename when
/// an enclosing binder introduced them.
#[derive(Default)]
struct AlphaEnv {
    pairs: Vec<(Name, Name)>,
}

impl AlphaEnv {
    fn vars_match(&self, a: &Name, b: &Name) -> bool {
        for (la, rb) in self.pairs.iter().rev() {
            if la == a || rb == b {
                return la == a && rb == b;
            }
        }
        a == b
    }

    fn with<T>(&mut self, a: &Name, b: &Name, f: impl FnOnce(&mut Self) -> T) -> T {
        self.pairs.push((a.clone(), b.clone()));
        let out = f(self);
        self.pairs.pop();
        out
    }
}

pub fn alpha_equal_types(a: &Type, b: &Type) -> bool {
    alpha_types(a, b, &mut AlphaEnv::default())
}

pub fn alpha_equal_terms(a: &Term, b: &Term) -> bool {
    alpha_terms(a, b, &mut AlphaEnv::default())
}

fn alpha_types(a: &Type, b: &Type, env: &mut AlphaEnv) -> bool {
    match (a, b) {
        (Type::Atom(x), Type::Atom(y)) => x == y,
        (Type::Product(a1, a2), Type::Product(b1, b2)) => {
            alpha_types(a1, b1, env) && alpha_types(a2, b2, env)
        }
        (Type::Closure(ca), Type::Closure(cb)) => {
            if ca.captured.len() != cb.captured.len() || ca.param_dep != cb.param_dep {
                return false;
            }
            let caps_ok = ca
                .captured
                .ctx
                .entries
                .iter()
                .zip(&ca.captured.deps.entries)
                .zip(
                    cb.captured
                        .ctx
                        .entries
                        .iter()
                        .zip(&cb.captured.deps.entries),
                )
                .all(|((ea, (_, da)), (eb, (_, db)))| {
                    env.vars_match(&ea.name, &eb.name)
                        && da == db
                        && alpha_types(&ea.ty, &eb.ty, env)
                });
            caps_ok
                && alpha_types(&ca.param_ty, &cb.param_ty, env)
                && env.with(&ca.param, &cb.param, |env| {
                    alpha_types(&ca.result_ty, &cb.result_ty, env)
                })
        }
        _ => false,
    }
}

fn alpha_terms(a: &Term, b: &Term, env: &mut AlphaEnv) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => env.vars_match(x, y),
        (Term::Pair(a1, a2), Term::Pair(b1, b2)) => {
            alpha_terms(a1, b1, env) && alpha_terms(a2, b2, env)
        }
        (Term::Proj(i, ea), Term::Proj(j, eb)) => i == j && alpha_terms(ea, eb, env),
        (
            Term::Lam {
                param: pa,
                param_ty: ta,
                body: ba,
            },
            Term::Lam {
                param: pb,
                param_ty: tb,
                body: bb,
            },
        ) => alpha_types(ta, tb, env) && env.with(pa, pb, |env| alpha_terms(ba, bb, env)),
        (
            Term::Fix {
                fname: fa,
                param: pa,
                param_ty: ta,
                result_ty: ra,
                body: ba,
            },
            Term::Fix {
                fname: fb,
                param: pb,
                param_ty: tb,
                result_ty: rb,
                body: bb,
            },
        ) => {
            alpha_types(ta, tb, env)
                && env.with(fa, fb, |env| {
                    env.with(pa, pb, |env| {
                        alpha_types(ra, rb, env) && alpha_terms(ba, bb, env)
                    })
                })
        }
        (Term::App(fa, aa), Term::App(fb, ab)) => {
            alpha_terms(fa, fb, env) && alpha_terms(aa, ab, env)
        }
        (
            Term::Let {
                name: na,
                def: da,
                body: ba,
            },
            Term::Let {
                name: nb,
                def: db,
                body: bb,
            },
        ) => alpha_terms(da, db, env) && env.with(na, nb, |env| alpha_terms(ba, bb, env)),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(n: &str) -> Type {
        Type::atom(n)
    }

    #[test]
    fn dep_sum_is_pointwise_or() {
        let a = DepVector::from_pairs(&[("x", true), ("y", false)]);
        let b = DepVector::from_pairs(&[("x", false), ("y", false)]);
        assert_eq!(dep_sum(&a, &b), a);

        let c = DepVector::from_pairs(&[("x", false), ("y", true)]);
        let d = DepVector::from_pairs(&[("x", true), ("y", false)]);
        assert_eq!(
            dep_sum(&c, &d),
            DepVector::from_pairs(&[("x", true), ("y", true)])
        );
    }

    #[test]
    fn dep_sum_idempotent() {
        let a = DepVector::from_pairs(&[("x", true), ("y", false), ("z", true)]);
        assert_eq!(dep_sum(&a, &a), a);
    }

    #[test]
    fn dep_scale_by_zero_clears() {
        let a = DepVector::from_pairs(&[("x", true), ("y", true)]);
        assert_eq!(
            dep_scale(Dep::ZERO, &a),
            DepVector::from_pairs(&[("x", false), ("y", false)])
        );
        assert_eq!(dep_scale(Dep::ONE, &a), a);
        assert_eq!(
            dep_scale(Dep::ZERO, &DepVector::default()),
            DepVector::default()
        );
    }

    #[test]
    fn alpha_lambda_binder_renaming() {
        let a = Term::lam("x", atom("a"), Term::var("x"));
        let b = Term::lam("y", atom("a"), Term::var("y"));
        assert!(alpha_equal_terms(&a, &b));
        let c = Term::lam("x", atom("a"), Term::var("z"));
        assert!(!alpha_equal_terms(&a, &c));
    }

    #[test]
    fn alpha_closure_param_renameable() {
        // [y:s^0, z:t^1](x:r^0) -> t  vs  same with param w
        let cap = AnnotatedContext::from_triples(&[
            ("y", atom("s"), false),
            ("z", atom("t"), true),
        ]);
        let a = Type::closure(cap.clone(), "x", Dep::ZERO, atom("r"), atom("t"));
        let b = Type::closure(cap, "w", Dep::ZERO, atom("r"), atom("t"));
        assert!(alpha_equal_types(&a, &b));
    }

    #[test]
    fn alpha_captured_names_compared_literally() {
        let ca = AnnotatedContext::from_triples(&[("y", atom("s"), false)]);
        let cb = AnnotatedContext::from_triples(&[("z", atom("s"), false)]);
        let a = Type::closure(ca, "x", Dep::ZERO, atom("r"), atom("t"));
        let b = Type::closure(cb, "x", Dep::ZERO, atom("r"), atom("t"));
        assert!(!alpha_equal_types(&a, &b));
    }

    #[test]
    fn alpha_captured_name_follows_enclosing_binder() {
        // \(y:s) \(x:[y:s^1](w:r^0) -> s) x  vs  the same with y renamed to u:
        // the captured occurrence of y must follow the binder renaming.
        let mk = |outer: &str| {
            let cap = AnnotatedContext::from_triples(&[(outer, atom("s"), true)]);
            Term::lam(
                outer,
                atom("s"),
                Term::lam(
                    "x",
                    Type::closure(cap, "w", Dep::ZERO, atom("r"), atom("s")),
                    Term::var("x"),
                ),
            )
        };
        assert!(alpha_equal_terms(&mk("y"), &mk("u")));
    }

    #[test]
    fn free_vars_first_occurrence_order() {
        // let y = (y1, y2) in (y, \(x:s) z)
        let t = Term::let_in(
            "y",
            Term::pair(Term::var("y1"), Term::var("y2")),
            Term::pair(Term::var("y"), Term::lam("x", atom("s"), Term::var("z"))),
        );
        assert_eq!(t.free_vars(), vec!["y1", "y2", "z"]);
    }

    #[test]
    fn subset_zero_extends_missing_entries() {
        let psi = DepVector::from_pairs(&[("x", true)]);
        let phi = DepVector::from_pairs(&[("x", true), ("y", false)]);
        assert!(psi.subset_of(&phi));
        let psi2 = DepVector::from_pairs(&[("x", false), ("q", true)]);
        assert!(!psi2.subset_of(&phi));
    }
}
