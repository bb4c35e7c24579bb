fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(outflow_core::cli_io::run_command(&args));
}
