fn main() {
    std::process::exit(rainbowbf::cli::main_with(std::env::args_os()));
}
