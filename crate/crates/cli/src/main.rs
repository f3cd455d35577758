use std::io::Write;
use std::process::ExitCode;

use qdisp_cli::Failure;

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("QDISP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("QDISP_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message());
        return ExitCode::from(f.code());
    }
    let inv = qdisp_cli::run(std::env::args_os());
    let mut out = std::io::stdout().lock();
    if out.write_all(&inv.stdout).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(3);
    }
    eprint!("{}", inv.stderr);
    ExitCode::from(inv.code)
}
