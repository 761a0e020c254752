use std::io;

fn main() {
    let env_tol = std::env::var(markovkit::cli::TOL_ENV).ok();
    let code = markovkit::cli::main_with_args(
        std::env::args_os(),
        env_tol.as_deref(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
