fn main() {
    std::process::exit(omegaspace_lab::cli::run(std::env::args_os()));
}
