//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use occ::analysis::{
    check_noninterference, gen_typed_term, semantic_deps_oracle, AtomDomain,
    enumerate_valuations,
};
use occ::cli;
use occ::eval::{eval_classic, eval_open, eval_open_checked, values_equiv_semantics, EvalConfig};
use occ::parser::parse_term;
use occ::printer::Printer;
use occ::scope;
use occ::subst::{subst_annotated, subst_type, SubstError};
use occ::syntax::{
    alpha_equal_types, AnnotatedContext, Context, Dep, DepVector, Term, Type,
};
use occ::typing::{infer, TypeErrorKind};
use occ::value::{check_value, check_valuation};

fn normalized(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// The corpus shared by the theorem suites: generated well-typed terms
/// (fix disabled) over small atom-typed contexts with two-constant domains.
fn corpus(count: usize, max_depth: usize) -> Vec<(Context, Term, AtomDomain)> {
    let contexts = [
        Context::from_pairs(&[("u", Type::atom("A"))]),
        Context::from_pairs(&[("u", Type::atom("A")), ("v", Type::atom("B"))]),
        Context::from_pairs(&[
            ("u", Type::atom("A")),
            ("v", Type::atom("B")),
            ("w", Type::atom("A")),
        ]),
    ];
    let mut domains = AtomDomain::new();
    domains.insert("A", &["a0", "a1"]);
    domains.insert("B", &["b0", "b1"]);

    let mut out = Vec::with_capacity(count);
    let mut seed = 0u64;
    while out.len() < count {
        let ctx = &contexts[(seed as usize) % contexts.len()];
        let depth = 3 + (seed as usize) % (max_depth - 2);
        if let Ok(term) = gen_typed_term(ctx, None, depth, seed) {
            out.push((ctx.clone(), term, domains.clone()));
        }
        seed += 1;
        assert!(
            seed < (count as u64) * 20,
            "generation failed to produce the corpus"
        );
    }
    out
}

#[test]
fn criterion_1_session_reproduction() {
    let started = Instant::now();
    let program = cli::prepare("let y = (y1, y2) in (y, \\(x:s) z)").unwrap();
    let inf = infer(&program.ctx, &program.term).unwrap();
    assert_eq!(
        inf.deps,
        DepVector::from_pairs(&[("y1", true), ("y2", true), ("z", false)]),
        "inferred annotation differs from the session"
    );
    let ascii = Printer::ascii();
    assert_eq!(
        normalized(&ascii.ty(&inf.ty)),
        normalized("(ty_y1 * ty_y2) * [y1:ty_y1^0, y2:ty_y2^0, z:ty_z^1](x:s^0) -> ty_z"),
        "result type differs from the session"
    );
    let (value, _) = eval_open(&program.valuation, &program.term).unwrap();
    assert_eq!(
        normalized(&Printer::unicode().value(&value)),
        normalized("((val_y1, val_y2), ([y1,y2,z], ((y \u{21a6} (val_y1, val_y2))), \u{03bb}(x) z))"),
        "result value differs from the session"
    );
    assert_eq!(
        normalized(&ascii.value(&value)),
        normalized("((val_y1, val_y2), ([y1,y2,z], ((y |-> (val_y1, val_y2))), \\(x) z))"),
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1s");
    println!("criterion 1: PASS - session program reproduced in {elapsed:?}");
}

#[test]
fn criterion_2_pair_with_lambda_typing() {
    let ctx = Context::from_pairs(&[("y", Type::atom("sigma")), ("z", Type::atom("tau"))]);
    let term = parse_term("(y, \\(x:rho) z)").unwrap();
    let inf = infer(&ctx, &term).unwrap();
    assert_eq!(inf.deps, DepVector::from_pairs(&[("y", true), ("z", false)]));
    let expected = Type::product(
        Type::atom("sigma"),
        Type::closure(
            AnnotatedContext::from_triples(&[
                ("y", Type::atom("sigma"), false),
                ("z", Type::atom("tau"), true),
            ]),
            "x",
            Dep::ZERO,
            Type::atom("rho"),
            Type::atom("tau"),
        ),
    );
    assert!(alpha_equal_types(&inf.ty, &expected));
    assert_eq!(
        normalized(&Printer::ascii().ty(&inf.ty)),
        normalized("sigma * [y:sigma^0, z:tau^1](x:rho^0) -> tau")
    );
    println!("criterion 2: PASS - annotation {{y:1, z:0}} and closure type match");
}

#[test]
fn criterion_3_type_soundness_suite() {
    let started = Instant::now();
    let corpus = corpus(1000, 6);
    let config = EvalConfig::default();
    let mut evaluations = 0u64;
    for (i, (ctx, term, domains)) in corpus.iter().enumerate() {
        let inf = infer(ctx, term)
            .unwrap_or_else(|e| panic!("corpus term {i} no longer infers: {e}"));
        for valuation in enumerate_valuations(ctx, domains).unwrap() {
            assert!(check_valuation(&valuation, ctx), "enumerated valuation ill-typed");
            let (value, _) = eval_open_checked(ctx, &valuation, term, &config, false)
                .unwrap_or_else(|e| panic!("term {i} failed to evaluate: {e}"));
            check_value(ctx, &value, &inf.ty).unwrap_or_else(|e| {
                panic!(
                    "soundness failure on term {i} ({}): {e}",
                    Printer::ascii().term(term)
                )
            });
            evaluations += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}, budget 5min");
    println!(
        "criterion 3: PASS - {} terms, {evaluations} evaluations all sound in {elapsed:?}",
        corpus.len()
    );
}

#[test]
fn criterion_4_semantic_equivalence_suite() {
    let corpus = corpus(1000, 6);
    let mut cases = 0u64;
    for (i, (ctx, term, domains)) in corpus.iter().enumerate() {
        for valuation in enumerate_valuations(ctx, domains).unwrap() {
            let (open_value, _) = eval_open(&valuation, term)
                .unwrap_or_else(|e| panic!("term {i} failed open evaluation: {e}"));
            let classic_env = occ::analysis::to_classic_valuation(&valuation);
            let (classic_value, _) = eval_classic(&classic_env, term)
                .unwrap_or_else(|e| panic!("term {i} failed classic evaluation: {e}"));
            assert!(
                values_equiv_semantics(&valuation, &open_value, &classic_env, &classic_value),
                "semantics disagree on term {i}: {}",
                Printer::ascii().term(term)
            );
            cases += 1;
        }
    }
    println!("criterion 4: PASS - open and classic semantics agree on {cases} cases");
}

#[test]
fn criterion_5_noninterference_suite() {
    let corpus = corpus(1000, 6);
    let mut pairs = 0u64;
    let mut oracle_checked = 0u64;
    for (i, (ctx, term, domains)) in corpus.iter().enumerate() {
        let report = check_noninterference(ctx, term, domains)
            .unwrap_or_else(|e| panic!("harness error on term {i}: {e}"));
        assert!(
            report.holds(),
            "non-interference violated on term {i}: {}",
            Printer::ascii().term(term)
        );
        pairs += report.pairs_tested;
        if matches!(report.result_ty, Type::Atom(_)) {
            let semantic = semantic_deps_oracle(ctx, term, domains).unwrap();
            let static_set = report.deps.needed();
            for name in &semantic {
                assert!(
                    static_set.contains(name),
                    "static annotation misses semantic dependency {name} on term {i}: {}",
                    Printer::ascii().term(term)
                );
            }
            oracle_checked += 1;
        }
    }
    println!(
        "criterion 5: PASS - zero violations over {pairs} pairs; oracle contained in the static annotation on {oracle_checked} atomic-result terms"
    );
}

#[test]
fn criterion_6_lemma_suite() {
    // Lemma: substitution preserves scoping, on random instances.
    let mut subst_checked = 0;
    for seed in 0..300u64 {
        if let Some((prefix, var, var_ty, ty, psi)) = random_subst_instance(seed) {
            let full = prefix.extended(&var, var_ty.clone());
            if scope::check_type(&full, &ty).is_err() {
                continue;
            }
            match subst_type(&prefix, &var, &var_ty, &Context::empty(), &ty, &psi) {
                Ok((_, tau, _)) => {
                    scope::check_context(&prefix).unwrap();
                    scope::check_type(&prefix, &tau).unwrap_or_else(|e| {
                        panic!("substitution output ill-scoped (seed {seed}): {e}")
                    });
                    subst_checked += 1;
                }
                Err(SubstError::Escape { .. }) => {}
                Err(e) => panic!("unexpected substitution error (seed {seed}): {e}"),
            }
        }
    }
    assert!(subst_checked >= 100, "too few scoping instances: {subst_checked}");

    // Lemma: typing respects scoping, over a generated corpus.
    let corpus = corpus(300, 6);
    for (ctx, term, _) in &corpus {
        let inf = infer(ctx, term).unwrap();
        scope::check_type(ctx, &inf.ty).expect("inferred type must be well-scoped");
    }

    // Lemma: value substitution preserves typing, asserted at every
    // substitution step of the evaluator's self-check mode.
    let config = EvalConfig::default();
    let mut lemma3_runs = 0;
    for (ctx, term, domains) in corpus.iter().take(150) {
        for valuation in enumerate_valuations(ctx, domains).unwrap().into_iter().take(2) {
            eval_open_checked(ctx, &valuation, term, &config, true)
                .expect("self-check mode found a substitution step breaking value typing");
            lemma3_runs += 1;
        }
    }

    // Confluence / reordering: both substitution orders agree on two
    // variables, with the corollary's adjusted annotations.
    let mut confluence_checked = 0;
    let mut seed = 10_000u64;
    while confluence_checked < 500 {
        seed += 1;
        assert!(seed < 60_000, "confluence generation stalled at {confluence_checked}");
        let Some(instance) = random_confluence_instance(seed) else {
            continue;
        };
        let (actx, a, b, psi_a, psi_b, ty) = instance;
        if scope::check_context(&actx.ctx).is_err()
            || scope::check_type(&actx.ctx, &ty).is_err()
        {
            continue;
        }
        // The lemma assumes both single-step substitutions are derivable
        // from the same sequent; an escape in either first step leaves its
        // hypotheses unmet.
        let xa = actx.ctx.entries[a].name.clone();
        let xb = actx.ctx.entries[b].name.clone();
        let first_a = subst_annotated(&actx, a, &psi_a, &ty);
        let first_b = subst_annotated(&actx, b, &psi_b, &ty);
        let ((c1, t1, _), (c2, t2, _)) = match (first_a, first_b) {
            (Ok(ra), Ok(rb)) => (ra, rb),
            (Err(SubstError::Internal(e)), _) | (_, Err(SubstError::Internal(e))) => {
                panic!("internal substitution error at seed {seed}: {e}")
            }
            _ => continue,
        };
        // After x_a: remove x_b with Ψ_b + Ψ_b(x_a)·Ψ_a. After x_b: remove
        // x_a with Ψ_a unchanged, since Ψ_a cannot mention the later x_b.
        let adjusted = adjust(&psi_b, &psi_a, &xa, &c1.ctx.prefix(b - 1));
        let (ctx1, ty1, _) = subst_annotated(&c1, b - 1, &adjusted, &t1)
            .unwrap_or_else(|e| panic!("second step after x_a failed at seed {seed}: {e}"));
        let (ctx2, ty2, _) = subst_annotated(&c2, a, &psi_a, &t2)
            .unwrap_or_else(|e| panic!("second step after x_b failed at seed {seed}: {e}"));
        assert_eq!(
            ctx1.deps, ctx2.deps,
            "confluence annotation mismatch at seed {seed} ({xa}, {xb})"
        );
        assert_eq!(ctx1.ctx.domain(), ctx2.ctx.domain());
        assert!(
            ctx1.ctx
                .entries
                .iter()
                .zip(&ctx2.ctx.entries)
                .all(|(e1, e2)| alpha_equal_types(&e1.ty, &e2.ty)),
            "confluence context mismatch at seed {seed}"
        );
        assert!(
            alpha_equal_types(&ty1, &ty2),
            "confluence type mismatch at seed {seed}"
        );
        confluence_checked += 1;
    }
    println!(
        "criterion 6: PASS - scoping preserved on {subst_checked} substitutions, typing respects scoping on 300 terms, {lemma3_runs} self-checked evaluations, {confluence_checked} confluent substitution pairs"
    );
}

/// Ψ_b + Ψ_b(x_a)·Ψ_a, restricted to the context after x_a was removed.
fn adjust(psi_b: &DepVector, psi_a: &DepVector, xa: &str, domain_ctx: &Context) -> DepVector {
    let scale = psi_b.get_or_zero(xa);
    let mut out = DepVector::default();
    for e in &domain_ctx.entries {
        let base = psi_b.get_or_zero(&e.name);
        let add = scale.and(psi_a.get_or_zero(&e.name));
        out.push(e.name.clone(), base.or(add));
    }
    out
}

#[test]
fn criterion_7_contravariant_escape() {
    // let x = u in let y = u in
    //   let f = \(g:[u:U^0, x:U^1](z:U^0) -> U) g u in f
    // is rejected: x escapes in the argument type of f.
    let ctx = Context::from_pairs(&[("u", Type::atom("U"))]);
    let term = parse_term(
        "let x = u in let y = u in let f = \\(g:[u:U^0, x:U^1](z:U^0) -> U) g u in f",
    )
    .unwrap();
    match infer(&ctx, &term) {
        Err(e) => match &e.kind {
            TypeErrorKind::Subst(SubstError::Escape { var, .. }) => {
                assert_eq!(var, "x", "escape must name the escaping variable");
            }
            other => panic!("expected an escape error naming x, got {other:?}"),
        },
        Ok(inf) => panic!(
            "expected rejection, got type {}",
            Printer::ascii().ty(&inf.ty)
        ),
    }
    println!("criterion 7: PASS - contravariant escape rejected, naming x");
}

// ---------------------------------------------------------------------------
// Random instances for the lemma suites
// ---------------------------------------------------------------------------

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_context(rng: &mut ChaCha8Rng, len: usize, seed: u64) -> Context {
    let mut ctx = Context::empty();
    for i in 0..len {
        let ty = occ::analysis::gen_type(&ctx, rng.gen_range(0..3), seed * 131 + i as u64);
        ctx.push(format!("g{i}"), ty);
    }
    ctx
}

fn random_deps(rng: &mut ChaCha8Rng, ctx: &Context) -> DepVector {
    let mut deps = DepVector::default();
    for e in &ctx.entries {
        deps.push(e.name.clone(), Dep(rng.gen_bool(0.5)));
    }
    deps
}

fn random_subst_instance(seed: u64) -> Option<(Context, String, Type, Type, DepVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prefix_len = rng.gen_range(0..3);
    let prefix = random_context(&mut rng, prefix_len, seed);
    if scope::check_context(&prefix).is_err() {
        return None;
    }
    let var = "y".to_string();
    let var_ty = occ::analysis::gen_type(&prefix, rng.gen_range(0..2), seed * 7 + 1);
    let full = prefix.extended(&var, var_ty.clone());
    let ty = occ::analysis::gen_type(&full, rng.gen_range(1..4), seed * 7 + 2);
    let psi = random_deps(&mut rng, &prefix);
    Some((prefix, var, var_ty, ty, psi))
}

type ConfluenceInstance = (AnnotatedContext, usize, usize, DepVector, DepVector, Type);

fn random_confluence_instance(seed: u64) -> Option<ConfluenceInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.gen_range(2..5);
    let ctx = random_context(&mut rng, len, seed);
    let deps = random_deps(&mut rng, &ctx);
    let actx = AnnotatedContext::new(ctx.clone(), deps);
    let a = rng.gen_range(0..len - 1);
    let b = rng.gen_range(a + 1..len);
    let psi_a = random_deps(&mut rng, &ctx.prefix(a));
    let psi_b = random_deps(&mut rng, &ctx.prefix(b));
    let ty = occ::analysis::gen_type(&ctx, rng.gen_range(1..4), seed * 13 + 5);
    Some((actx, a, b, psi_a, psi_b, ty))
}
