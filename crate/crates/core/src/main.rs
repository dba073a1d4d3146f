use std::thread;

fn main() {
    // the evaluator and prover recurse; give them room beyond the default main stack
    let code = thread::Builder::new()
        .stack_size(psv::session::STACK_SIZE)
        .spawn(|| psv::session::cli::run_cli(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr()))
        .expect("spawn main worker")
        .join()
        .unwrap_or(psv::session::cli::EXIT_INPUT);
    std::process::exit(code);
}
