fn main() {
    std::process::exit(genus2_spectra::cli::dispatch(std::env::args_os()));
}
