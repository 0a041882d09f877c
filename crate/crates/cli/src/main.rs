fn main() {
    std::process::exit(asep_cli::dispatch(std::env::args_os()));
}
