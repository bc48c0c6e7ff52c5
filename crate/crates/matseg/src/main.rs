use std::process::ExitCode;

fn main() -> ExitCode {
    match matseg::cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", matseg::cli::error_record(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
