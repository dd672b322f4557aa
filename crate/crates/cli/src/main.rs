use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = tablemap_cli::Cli::parse();
    match tablemap_cli::run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
