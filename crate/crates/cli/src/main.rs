fn main() {
    std::process::exit(curvlab_cli::run(std::env::args_os()));
}
