use clap::Parser;

fn main() {
    let cli = reviewmine::cli::Cli::parse();
    std::process::exit(reviewmine::cli::run(cli));
}
