use clap::Parser;

fn main() {
    std::process::exit(mkdv_ut::cli::main_with(mkdv_ut::cli::Args::parse()));
}
