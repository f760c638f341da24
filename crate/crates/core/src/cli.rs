//! The command-line driver: parse, auto-bind unbound variables, infer,
//! evaluate, and render the session blocks, with optional derivation
//! dumps and the non-interference harness.

use std::io::Write;

use crate::analysis::{check_noninterference_with, AtomDomain, NonInterferenceConfig};
use crate::eval::{
    eval_classic_with, eval_open_with, ClassicValuation, ClassicValue, EvalConfig,
};
use crate::parser::{parse_term, rename_binders};
use crate::printer::Printer;
use crate::syntax::{Context, Term, Type};
use crate::typing::infer;
use crate::value::{Valuation, Value};

#[derive(Debug, Clone)]
pub struct Options {
    pub typing_derivation: bool,
    pub reduction_derivation: bool,
    pub check_noninterference: bool,
    pub report_json: bool,
    pub classic: bool,
    pub max_steps: u64,
    pub ascii: bool,
    pub strict: bool,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            typing_derivation: false,
            reduction_derivation: false,
            check_noninterference: false,
            report_json: false,
            classic: false,
            max_steps: 1_000_000,
            ascii: false,
            strict: false,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE_ERROR: i32 = 1;
pub const EXIT_SYNTAX_ERROR: i32 = 2;
pub const EXIT_HARNESS_VIOLATION: i32 = 3;

/// Each unbound variable x is bound in a default environment with a dummy
/// atom type ty_x and constant val_x; `--strict` turns this off.
pub struct SourceProgram {
    pub term: Term,
    pub auto_bound: Vec<String>,
    pub ctx: Context,
    pub valuation: Valuation,
}

pub fn prepare(src: &str) -> Result<SourceProgram, crate::parser::SyntaxError> {
    let parsed = parse_term(src)?;
    let term = rename_binders(&parsed);
    let auto_bound = term.free_vars();
    let mut ctx = Context::empty();
    let mut valuation = Valuation::empty();
    for name in &auto_bound {
        let atom = format!("ty_{name}");
        ctx.push(name.clone(), Type::Atom(atom.clone()));
        valuation.push(name.clone(), Value::atom(&atom, &format!("val_{name}")));
    }
    Ok(SourceProgram {
        term,
        auto_bound,
        ctx,
        valuation,
    })
}

pub fn run(src: &str, opts: &Options, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run_inner(src, opts, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "i/o error: {e}");
            EXIT_TYPE_ERROR
        }
    }
}

fn run_inner(
    src: &str,
    opts: &Options,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::io::Result<i32> {
    let printer = if opts.ascii {
        Printer::ascii()
    } else {
        Printer::unicode()
    };

    let program = match prepare(src) {
        Ok(p) => p,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_SYNTAX_ERROR);
        }
    };

    writeln!(out, "Parsed expression: {}", printer.term(&program.term))?;
    writeln!(out)?;

    if !program.auto_bound.is_empty() {
        if opts.strict {
            writeln!(
                err,
                "unbound variables in strict mode: {}",
                program.auto_bound.join(", ")
            )?;
            return Ok(EXIT_TYPE_ERROR);
        }
        let names = program.auto_bound.join(", ");
        let tys = program
            .auto_bound
            .iter()
            .map(|n| format!("ty_{n}"))
            .collect::<Vec<_>>()
            .join(", ");
        let vals = program
            .auto_bound
            .iter()
            .map(|n| format!("val_{n}"))
            .collect::<Vec<_>>()
            .join(", ");
        writeln!(
            out,
            "The variables ({names}) were unbound; we add them to the default"
        )?;
        writeln!(out, "environment with dummy types ({tys}) and values")?;
        writeln!(out, "({vals}).")?;
        writeln!(out)?;
    }

    let inference = match infer(&program.ctx, &program.term) {
        Ok(i) => i,
        Err(e) => {
            writeln!(err, "type error: {e}")?;
            return Ok(EXIT_TYPE_ERROR);
        }
    };

    writeln!(out, "Inferred typing:")?;
    writeln!(
        out,
        "  {} {}",
        printer.context_with_deps(&program.ctx, &inference.deps),
        printer.turnstile()
    )?;
    writeln!(out, "    {}", printer.term(&program.term))?;
    writeln!(out, "    : {}", printer.ty(&inference.ty))?;
    writeln!(out)?;

    if opts.typing_derivation {
        writeln!(out, "Typing derivation:")?;
        write!(out, "{}", printer.typing_derivation(&inference.derivation))?;
        writeln!(out)?;
    }

    let eval_config = EvalConfig {
        max_steps: opts.max_steps,
    };

    if opts.classic {
        let classic_env = to_classic(&program.valuation);
        match eval_classic_with(&classic_env, &program.term, &eval_config) {
            Ok((value, deriv)) => {
                writeln!(out, "Result value:")?;
                writeln!(out, "  {}", printer.classic_value(&value))?;
                if opts.reduction_derivation {
                    writeln!(out)?;
                    writeln!(out, "Reduction derivation:")?;
                    write!(out, "{}", printer.reduction_derivation(&deriv))?;
                }
            }
            Err(e) => {
                writeln!(err, "evaluation error: {e}")?;
                return Ok(EXIT_TYPE_ERROR);
            }
        }
    } else {
        match eval_open_with(&program.valuation, &program.term, &eval_config) {
            Ok((value, deriv)) => {
                writeln!(out, "Result value:")?;
                writeln!(out, "  {}", printer.value(&value))?;
                if opts.reduction_derivation {
                    writeln!(out)?;
                    writeln!(out, "Reduction derivation:")?;
                    write!(out, "{}", printer.reduction_derivation(&deriv))?;
                }
            }
            Err(e) => {
                writeln!(err, "evaluation error: {e}")?;
                return Ok(EXIT_TYPE_ERROR);
            }
        }
    }

    if opts.check_noninterference {
        let mut domains = AtomDomain::new();
        for name in &program.auto_bound {
            domains.insert(
                &format!("ty_{name}"),
                &[&format!("val_{name}"), &format!("alt_{name}")],
            );
        }
        let config = NonInterferenceConfig {
            eval: eval_config,
            ..NonInterferenceConfig::default()
        };
        match check_noninterference_with(&program.ctx, &program.term, &domains, &config) {
            Ok(report) => {
                writeln!(out)?;
                if opts.report_json {
                    let json = report.to_json(
                        |t| printer.term(t),
                        |v| printer.valuation(v),
                        |v| printer.value(v),
                    );
                    writeln!(out, "{json}")?;
                } else {
                    writeln!(out, "Non-interference report:")?;
                    write!(
                        out,
                        "{}",
                        report.to_text(
                            |t| printer.term(t),
                            |v| printer.valuation(v),
                            |v| printer.value(v),
                        )
                    )?;
                }
                if !report.holds() {
                    return Ok(EXIT_HARNESS_VIOLATION);
                }
            }
            Err(e) => {
                writeln!(err, "non-interference harness error: {e}")?;
                return Ok(EXIT_TYPE_ERROR);
            }
        }
    }

    Ok(EXIT_OK)
}

fn to_classic(v: &Valuation) -> ClassicValuation {
    let mut out = ClassicValuation::empty();
    for (name, value) in &v.entries {
        match value {
            Value::AtomConst { atom, constant } => {
                out.push(name.clone(), ClassicValue::atom(atom, constant));
            }
            _ => unreachable!("auto-bound values are atom constants"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_to_string(src: &str, opts: &Options) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(src, opts, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn session_transcript_in_ascii() {
        let opts = Options {
            ascii: true,
            ..Options::default()
        };
        let (code, out, err) = run_to_string("let y = (y1, y2) in (y, \\(x:s) z)", &opts);
        assert_eq!(code, EXIT_OK, "stderr: {err}");
        assert!(out.contains("Parsed expression: let y = (y1, y2) in (y, \\(x:s) z)"));
        assert!(out.contains("The variables (y1, y2, z) were unbound"));
        assert!(out.contains("y1:ty_y1^1,y2:ty_y2^1,z:ty_z^0 |-"));
        assert!(out.contains(": (ty_y1 * ty_y2) * [y1:ty_y1^0,y2:ty_y2^0,z:ty_z^1](x:s^0) -> ty_z"));
        assert!(out.contains("((val_y1, val_y2), ([y1,y2,z], ((y |-> (val_y1, val_y2))), \\(x) z))"));
    }

    #[test]
    fn strict_mode_rejects_unbound_variables() {
        let opts = Options {
            strict: true,
            ..Options::default()
        };
        let (code, _, err) = run_to_string("x", &opts);
        assert_eq!(code, EXIT_TYPE_ERROR);
        assert!(err.contains("unbound"));
    }

    #[test]
    fn syntax_errors_exit_two() {
        let (code, _, err) = run_to_string("let y = in", &Options::default());
        assert_eq!(code, EXIT_SYNTAX_ERROR);
        assert!(err.contains("syntax error"));
    }

    #[test]
    fn ill_scoped_annotation_exits_one() {
        // The annotation captures an unbound variable q.
        let (code, _, err) = run_to_string("\\(g:[q:s^1](w:r^0) -> s) x", &Options::default());
        assert_eq!(code, EXIT_TYPE_ERROR);
        assert!(err.contains("type error"));
    }

    #[test]
    fn divergent_fix_with_tiny_budget_exits_one() {
        // One recursion per step: give the thread room for the 100 frames.
        std::thread::Builder::new()
            .stack_size(64 * 1024 * 1024)
            .spawn(|| {
                let opts = Options {
                    max_steps: 100,
                    ..Options::default()
                };
                let (code, _, err) = run_to_string("(fix f(x:ty_y):ty_y = f x) y", &opts);
                assert_eq!(code, EXIT_TYPE_ERROR);
                assert!(err.contains("budget"));
            })
            .unwrap()
            .join()
            .unwrap();
    }

    #[test]
    fn noninterference_flag_reports_clean() {
        let opts = Options {
            check_noninterference: true,
            ascii: true,
            ..Options::default()
        };
        let (code, out, err) = run_to_string("let y = x in \\(z:s) z", &opts);
        assert_eq!(code, EXIT_OK, "stderr: {err}");
        assert!(out.contains("violations: 0"));
    }

    #[test]
    fn classic_mode_prints_snapshot_closures() {
        let opts = Options {
            classic: true,
            ascii: true,
            ..Options::default()
        };
        let (code, out, _) = run_to_string("let y = x in \\(z:s) y", &opts);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("((x |-> val_x, y |-> val_x), \\(z) y)"));
    }
}
