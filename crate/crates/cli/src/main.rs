fn main() {
    std::process::exit(volterra_cli::run(std::env::args_os()));
}
