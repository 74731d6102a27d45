fn main() {
    std::process::exit(loadstab_cli::main_with(std::env::args_os()));
}
