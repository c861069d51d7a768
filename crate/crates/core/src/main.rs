fn main() {
    std::process::exit(capypipe::cli::dispatch(std::env::args_os()));
}
