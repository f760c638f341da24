use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use occ::cli::{run, Options};

/// Type checker and interpreter for a lambda calculus whose function types
/// carry the context they capture from, with per-variable dependency
/// annotations.
#[derive(Parser)]
#[command(name = "occ", version)]
struct Args {
    /// Program file; reads stdin when absent.
    file: Option<PathBuf>,

    /// Print the typing derivation.
    #[arg(long)]
    typing_derivation: bool,

    /// Print the reduction derivation.
    #[arg(long)]
    reduction_derivation: bool,

    /// Exhaustively check non-interference of the inferred annotation.
    #[arg(long)]
    check_noninterference: bool,

    /// Emit the non-interference report as JSON.
    #[arg(long)]
    report_json: bool,

    /// Evaluate with the classic environment-snapshot semantics.
    #[arg(long)]
    classic: bool,

    /// Evaluation step budget.
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,

    /// Render with ASCII symbols instead of unicode.
    #[arg(long)]
    ascii: bool,

    /// Reject programs with unbound variables instead of auto-binding them.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let src = match &args.file {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
        None => {
            let mut buf = String::new();
            if let Err(e) = std::io::stdin().read_to_string(&mut buf) {
                eprintln!("cannot read stdin: {e}");
                return ExitCode::from(1);
            }
            buf
        }
    };
    let opts = Options {
        typing_derivation: args.typing_derivation,
        reduction_derivation: args.reduction_derivation,
        check_noninterference: args.check_noninterference,
        report_json: args.report_json,
        classic: args.classic,
        max_steps: args.max_steps,
        ascii: args.ascii,
        strict: args.strict,
    };
    // Evaluation recurses once per step; run on a roomy stack so deep
    // programs hit the step budget, not the guard page.
    let code = std::thread::Builder::new()
        .stack_size(512 * 1024 * 1024)
        .spawn(move || {
            let mut out = std::io::stdout().lock();
            let mut err = std::io::stderr().lock();
            run(&src, &opts, &mut out, &mut err)
        })
        .expect("failed to spawn the evaluation thread")
        .join()
        .expect("evaluation thread panicked");
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
