use clap::Parser;
use nvscope::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => print!("{text}"),
        Err((err, cfg)) => {
            eprintln!("error: {err}");
            if let Some(cfg) = cfg {
                eprintln!("--- effective configuration ---");
                eprint!("{}", cfg.to_text());
            }
            std::process::exit(err.exit_code());
        }
    }
}
