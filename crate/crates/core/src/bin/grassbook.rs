fn main() { std::process::exit(grassbook::cli::main()) }
