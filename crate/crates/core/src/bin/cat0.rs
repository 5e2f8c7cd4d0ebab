use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CAT0_LOG")).init();
    let code = cat0_core::cli::run(std::env::args_os());
    ExitCode::from(code as u8)
}
