fn main() {
    std::process::exit(clmaddpg::harness::cli::main_with_args(std::env::args_os()));
}
