fn main() {
    std::process::exit(otfs::harness::cli::run(std::env::args_os()));
}
