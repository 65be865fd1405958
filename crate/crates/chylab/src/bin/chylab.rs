fn main() {
    std::process::exit(chylab::cli::dispatch(std::env::args_os()));
}
