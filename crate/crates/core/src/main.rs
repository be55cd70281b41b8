fn main() {
    std::process::exit(qudit_epi::cli::dispatch(std::env::args_os()));
}
