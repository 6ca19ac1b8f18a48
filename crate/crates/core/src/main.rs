use clap::Parser;
use log::LevelFilter;

fn main() {
    let cli = teichretract::cli::Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    std::process::exit(teichretract::cli::run(&cli));
}
