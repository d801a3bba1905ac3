fn main() { std::process::exit(rocketstack::cli::main_with_args(std::env::args_os())); }
