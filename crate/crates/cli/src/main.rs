use clap::Parser;

fn main() {
    std::process::exit(augeval::run(augeval::Cli::parse()));
}
