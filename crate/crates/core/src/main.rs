fn main() {
    std::process::exit(shiftfem::cli::run(std::env::args_os()));
}
