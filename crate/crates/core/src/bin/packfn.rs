use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    packfn::cli::configure_threads();
    let out = packfn::cli::run(std::env::args_os().skip(1));
    print!("{}", out.stdout);
    let _ = std::io::stdout().flush();
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
