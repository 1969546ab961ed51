fn main() {
    std::process::exit(ismi_cli::run(std::env::args_os()));
}
