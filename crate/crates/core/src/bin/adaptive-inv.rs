fn main() {
    std::process::exit(adaptive_inventory::cli::main_with_args(std::env::args_os()));
}
