mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NOT_CERTIFIED: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;
pub const EXIT_NUMERIC: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(m: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, message: m.into() }
    }

    pub fn io(m: impl Into<String>) -> Self {
        Self::validation(m)
    }
}

impl From<isodense::Error> for Failure {
    fn from(e: isodense::Error) -> Self {
        let code = if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERIC };
        Self { code, message: e.to_string() }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("ISODENSE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::validation(format!("ISODENSE_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::validation(format!("ISODENSE_THREADS: {e}")))
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK });
        }
    };
    let code = init_threads().and_then(|_| commands::run(&cli));
    match code {
        Ok(c) => ExitCode::from(c),
        Err(f) => {
            eprintln!("isodense: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
