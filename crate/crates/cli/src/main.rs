fn main() {
    std::process::exit(wignerlab_cli::cli_run(std::env::args_os()));
}
