fn main() {
    std::process::exit(samplekit::cli::run(std::env::args_os()));
}
