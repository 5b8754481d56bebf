mod args;
mod run;

use std::process::ExitCode;

use log::LevelFilter;

fn main() -> ExitCode {
    let cfg = match args::parse_args(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(e) => e.exit(),
    };
    env_logger::Builder::new()
        .filter_level(if cfg.verbose {
            LevelFilter::Debug
        } else {
            LevelFilter::Warn
        })
        .parse_env("BACKDROP_LOG")
        .format_timestamp(None)
        .init();
    log::debug!("resolved: {:?}", cfg.to_args());

    match run::run(&cfg) {
        Ok(summary) => {
            log::info!(
                "wrote {} frame(s) at {}x{}, {} fps",
                summary.frames_written,
                summary.width,
                summary.height,
                summary.frame_rate
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
