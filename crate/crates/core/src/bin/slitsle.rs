fn main() {
    std::process::exit(slitsle::cli::dispatch(std::env::args_os()));
}
