fn main() {
    std::process::exit(ddpf::cli::run_cli(std::env::args_os()));
}
