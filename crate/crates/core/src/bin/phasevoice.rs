fn main() {
    std::process::exit(phasevoice::cli::dispatch(std::env::args_os()));
}
